#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

/// Budget-constrained basket selection with pairwise synergies:
///
///   maximize   sum_i v_i x_i + sum_{i<j} s_ij x_i x_j
///   subject to sum_i c_i x_i <= B,  x binary.
///
/// All amounts are integer cents so objectives compare exactly.
namespace toxmarket::optimizer {

struct Synergy {
  std::size_t i = 0;
  std::size_t j = 0;
  std::int64_t cents = 0;  // > 0 super-additive, < 0 sub-additive
};

struct BasketInstance {
  std::vector<std::int64_t> values;
  std::vector<std::int64_t> costs;
  std::vector<Synergy> synergies;
  std::int64_t budget = 0;

  std::size_t size() const { return values.size(); }

  /// Throws Error(invalid_argument) on the first violated invariant.
  void validate() const;
};

enum class Proof { optimal, bound_gap };

struct BasketSolution {
  std::vector<std::size_t> selected;  // ascending
  std::int64_t objective = 0;
  std::int64_t spend = 0;
  Proof proof = Proof::optimal;
  std::int64_t gap = 0;  // upper bound minus objective when proof is bound_gap
  std::uint64_t nodes = 0;
};

/// Objective and spend of an arbitrary selection (ascending, distinct).
std::int64_t evaluate(const BasketInstance& inst, const std::vector<std::size_t>& selected);
std::int64_t spend_of(const BasketInstance& inst, const std::vector<std::size_t>& selected);

// Linearized model -------------------------------------------------------------

struct Term {
  std::size_t var = 0;
  std::int64_t coeff = 0;
};

/// sum(terms) <= rhs
struct Constraint {
  std::string name;
  std::vector<Term> terms;
  std::int64_t rhs = 0;
};

struct LinearModel {
  std::vector<std::string> variables;  // x0..x{n-1} then y{i}_{j}
  std::size_t asset_variables = 0;
  std::vector<Term> objective;
  std::vector<Constraint> constraints;

  /// One line per constraint in "<=" form, objective first, binaries last.
  std::string to_text() const;

  /// Checks every constraint against a full 0/1 assignment.
  bool feasible(const std::vector<int>& assignment) const;
  std::int64_t objective_value(const std::vector<int>& assignment) const;
};

/// Binary x per asset; y_ij per synergy with y <= x_i, y <= x_j when the
/// synergy is positive, and x_i + x_j - y <= 1, -y <= 0 when negative.
LinearModel build_model(const BasketInstance& inst);

// Solvers ----------------------------------------------------------------------

/// Depth-first branch and bound over x in descending v_i / c_i order (ties by
/// index), taking x = 1 first. Returns OPTIMAL when the search completes in
/// time, else the incumbent with BOUND_GAP.
BasketSolution optimize_basket(const BasketInstance& inst, std::chrono::milliseconds time_limit);

inline constexpr std::size_t kBruteForceLimit = 20;

/// Enumerates all 2^n subsets (n <= 20). Ties go to the lexicographically
/// smallest ascending index list.
BasketSolution brute_force_basket(const BasketInstance& inst);

// File format -------------------------------------------------------------------

/// "n,budget_cents", then n lines "i,value_cents,cost_cents" with i = 0..n-1
/// in order, then any number of "i,j,synergy_cents" lines. Blank lines and
/// lines starting with '#' are skipped.
BasketInstance parse_instance(std::istream& in);
void write_instance(const BasketInstance& inst, std::ostream& out);

}  // namespace toxmarket::optimizer
