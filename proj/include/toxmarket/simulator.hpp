#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include "toxmarket/exchange.hpp"

/// Agent-based sessions on a ladder of binary markets over one asset.
///
/// Every agent owns an RNG stream derived from (seed, class, index), and the
/// per-round ordering of manipulators is drawn from a stream separate from
/// everyone else's, so adding a manipulator that never trades leaves every
/// other agent's decisions bit-identical.
namespace toxmarket::sim {

enum class AgentClass { informed, noise, manipulator, arbitrageur };

struct ClassBudget {
  Cents budget;           // scrip credited at the start of the session
  Cents spend_per_round;  // per-market pacing unit
};

struct SimConfig {
  std::uint64_t seed = 1;
  Cents true_price{25'000'000};
  std::vector<Cents> thresholds;  // empty: default_ladder(true_price)
  int n_informed = 0;
  int n_noise = 0;
  int n_manipulators = 0;
  int n_arbitrageurs = 0;
  Cents signal_noise_sigma{1'250'000};
  int rounds = 200;
  ClassBudget informed{Cents{1'000'000}, Cents{500}};
  ClassBudget noise{Cents{1'000'000}, Cents{2'000}};
  ClassBudget manipulator{Cents{100'000}, Cents{10'000}};
  ClassBudget arbitrageur{Cents{1'000'000}, Cents{5'000}};
  double b = 100.0;
  Outcome manipulation_target = Outcome::higher;
  Cents wager_cap{100'000};
  double arbitrage_epsilon = 0.01;
  bool check_invariants = true;

  void validate() const;
  std::vector<Cents> ladder() const;
};

/// Thresholds at 0.625, 0.875, 1.125, 1.375 and 1.625 times the price.
std::vector<Cents> default_ladder(Cents true_price);

struct ArbitrageWindow {
  std::size_t lower_index = 0;
  int open_round = 0;
  std::optional<int> close_round;  // nullopt: still open when the session ended

  int duration(int last_round) const { return close_round.value_or(last_round) - open_round; }
};

struct ShockSpec {
  int shock_round = 0;
  Cents new_true_price;
};

struct ShockOutcome {
  std::vector<std::size_t> straddled;      // threshold indices the shock crossed
  std::vector<double> pre_shock;           // HIGHER price before the shock, per straddled
  std::vector<double> asymptote;           // final HIGHER price, per straddled
  std::vector<std::optional<int>> half_lives;
  std::optional<int> half_life;            // worst over straddled; 0 if none straddled
  std::vector<double> drift;               // asymptote - pre_shock, per straddled
};

struct SimMetrics {
  std::vector<Cents> thresholds;
  std::vector<std::vector<double>> curves;  // [round - 1][threshold] HIGHER price after the round
  std::vector<double> final_prices;
  std::vector<double> final_error;          // |final price - 1{settle price > t}|
  Cents settle_price;
  std::vector<ArbitrageWindow> arbitrage_windows;
  std::size_t trades = 0;
  std::optional<ShockOutcome> shock;

  Cents manipulator_profit;   // summed over manipulators, after settlement
  Cents arbitrageur_profit;
  LedgerTotals totals;        // after settlement
  std::size_t invariant_violations = 0;
  double max_maker_loss_ratio = 0.0;  // worst (paid - collected) / (b ln 2)
};

SimMetrics run_session(const SimConfig& config);

/// Informed agents redraw signals around new_true_price at the start of
/// shock_round; markets settle at the new price.
SimMetrics shock_session(const SimConfig& config, const ShockSpec& shock);

struct ManipulationReport {
  SimMetrics baseline;
  SimMetrics treatment;
  std::vector<double> displacement;  // |treatment - baseline| final price per threshold
  Cents manipulator_profit;
};

/// Paired runs sharing the seed: the config as given (treatment) and the same
/// config with no manipulators (baseline).
ManipulationReport manipulation_experiment(const SimConfig& config);

/// round,threshold_cents,p_higher rows, then a '#'-prefixed summary block.
void export_metrics(const SimMetrics& metrics, std::ostream& out,
                    const ManipulationReport* manipulation = nullptr);

/// JSON config; every key optional, defaulting to the SimConfig defaults.
SimConfig parse_config(std::istream& in);

}  // namespace toxmarket::sim
