#include "toxmarket/optimizer.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "toxmarket/error.hpp"

namespace toxmarket::optimizer {

void BasketInstance::validate() const {
  const std::size_t n = values.size();
  if (costs.size() != n) fail(ErrorKind::invalid_argument, "values and costs differ in length");
  if (budget < 0) fail(ErrorKind::invalid_argument, "budget must be non-negative");
  for (std::size_t i = 0; i < n; ++i) {
    if (costs[i] <= 0) {
      fail(ErrorKind::invalid_argument, "cost of asset " + std::to_string(i) + " must be positive");
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Synergy& s : synergies) {
    if (s.i >= n || s.j >= n) fail(ErrorKind::invalid_argument, "synergy index out of range");
    if (s.i == s.j) fail(ErrorKind::invalid_argument, "synergy pairs an asset with itself");
    if (!seen.emplace(std::min(s.i, s.j), std::max(s.i, s.j)).second) {
      fail(ErrorKind::invalid_argument, "synergy pair (" + std::to_string(s.i) + "," +
                                            std::to_string(s.j) + ") listed twice");
    }
  }
}

std::int64_t evaluate(const BasketInstance& inst, const std::vector<std::size_t>& selected) {
  std::vector<char> in(inst.size(), 0);
  std::int64_t total = 0;
  for (std::size_t i : selected) {
    in.at(i) = 1;
    total += inst.values[i];
  }
  for (const Synergy& s : inst.synergies) {
    if (in[s.i] && in[s.j]) total += s.cents;
  }
  return total;
}

std::int64_t spend_of(const BasketInstance& inst, const std::vector<std::size_t>& selected) {
  std::int64_t total = 0;
  for (std::size_t i : selected) total += inst.costs.at(i);
  return total;
}

// Model ------------------------------------------------------------------------

LinearModel build_model(const BasketInstance& inst) {
  inst.validate();
  LinearModel m;
  const std::size_t n = inst.size();
  m.asset_variables = n;
  for (std::size_t i = 0; i < n; ++i) {
    m.variables.push_back("x" + std::to_string(i));
    m.objective.push_back({i, inst.values[i]});
  }

  Constraint budget{"budget", {}, inst.budget};
  for (std::size_t i = 0; i < n; ++i) budget.terms.push_back({i, inst.costs[i]});
  m.constraints.push_back(std::move(budget));

  for (const Synergy& s : inst.synergies) {
    const std::size_t i = std::min(s.i, s.j);
    const std::size_t j = std::max(s.i, s.j);
    const std::size_t y = m.variables.size();
    const std::string yname = "y" + std::to_string(i) + "_" + std::to_string(j);
    m.variables.push_back(yname);
    m.objective.push_back({y, s.cents});
    if (s.cents > 0) {
      m.constraints.push_back({yname + "_le_x" + std::to_string(i), {{y, 1}, {i, -1}}, 0});
      m.constraints.push_back({yname + "_le_x" + std::to_string(j), {{y, 1}, {j, -1}}, 0});
    } else if (s.cents < 0) {
      m.constraints.push_back({yname + "_ge_and", {{i, 1}, {j, 1}, {y, -1}}, 1});
      m.constraints.push_back({yname + "_ge_zero", {{y, -1}}, 0});
    }
  }
  return m;
}

namespace {
void append_terms(std::ostringstream& os, const std::vector<Term>& terms,
                  const std::vector<std::string>& names) {
  if (terms.empty()) os << " 0";
  for (const Term& t : terms) {
    os << ' ' << (t.coeff < 0 ? '-' : '+') << ' ';
    const std::int64_t mag = t.coeff < 0 ? -t.coeff : t.coeff;
    if (mag != 1) os << mag << ' ';
    os << names[t.var];
  }
}
}  // namespace

std::string LinearModel::to_text() const {
  std::ostringstream os;
  os << "maximize:";
  append_terms(os, objective, variables);
  os << '\n';
  for (const Constraint& c : constraints) {
    os << c.name << ':';
    append_terms(os, c.terms, variables);
    os << " <= " << c.rhs << '\n';
  }
  os << "binary:";
  for (const auto& v : variables) os << ' ' << v;
  os << '\n';
  return os.str();
}

bool LinearModel::feasible(const std::vector<int>& assignment) const {
  for (const Constraint& c : constraints) {
    std::int64_t lhs = 0;
    for (const Term& t : c.terms) lhs += t.coeff * assignment.at(t.var);
    if (lhs > c.rhs) return false;
  }
  return true;
}

std::int64_t LinearModel::objective_value(const std::vector<int>& assignment) const {
  std::int64_t total = 0;
  for (const Term& t : objective) total += t.coeff * assignment.at(t.var);
  return total;
}

// Branch and bound ---------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;
__extension__ using Wide = __int128;

struct Neighbor {
  std::size_t other = 0;
  std::int64_t cents = 0;
};

class BranchAndBound {
 public:
  BranchAndBound(const BasketInstance& inst, Clock::time_point deadline)
      : inst_(inst), n_(inst.size()), adj_(n_), state_(n_, kUndecided), deadline_(deadline) {
    for (const Synergy& s : inst.synergies) {
      adj_[s.i].push_back({s.j, s.cents});
      adj_[s.j].push_back({s.i, s.cents});
    }
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      // v_a / c_a > v_b / c_b with positive costs.
      return static_cast<Wide>(inst.values[a]) * inst.costs[b] >
             static_cast<Wide>(inst.values[b]) * inst.costs[a];
    });
  }

  std::int64_t root_bound() { return bound(0, inst_.budget); }

  void seed_incumbent(std::vector<std::size_t> selected, std::int64_t objective) {
    best_ = std::move(selected);
    best_value_ = objective;
  }

  /// Returns false when the deadline stopped the search.
  bool run() {
    search(0, 0, inst_.budget);
    return !timed_out_;
  }

  const std::vector<std::size_t>& best() const { return best_; }
  std::int64_t best_value() const { return best_value_; }
  std::uint64_t nodes() const { return nodes_; }

  /// Greedy fill in branching order, keeping only strictly improving items.
  std::pair<std::vector<std::size_t>, std::int64_t> greedy() {
    std::vector<char> in(n_, 0);
    std::int64_t value = 0;
    std::int64_t remaining = inst_.budget;
    for (std::size_t i : order_) {
      if (inst_.costs[i] > remaining) continue;
      std::int64_t gain = inst_.values[i];
      for (const Neighbor& nb : adj_[i]) {
        if (in[nb.other]) gain += nb.cents;
      }
      if (gain > 0) {
        in[i] = 1;
        value += gain;
        remaining -= inst_.costs[i];
      }
    }
    std::vector<std::size_t> sel;
    for (std::size_t i = 0; i < n_; ++i) {
      if (in[i]) sel.push_back(i);
    }
    return {std::move(sel), value};
  }

 private:
  static constexpr signed char kUndecided = -1;

  // Upper bound on the extra objective reachable from depth d given the
  // decisions on order_[0..d) and remaining budget.
  std::int64_t bound(std::size_t depth, std::int64_t remaining) {
    struct Item {
      std::int64_t cost;
      std::int64_t weight2;  // 2 * gain + positive synergies to other undecided
    };
    std::vector<Item> items;
    items.reserve(n_ - depth);
    std::int64_t relaxed = 0;
    std::int64_t positive_pairs2 = 0;
    for (std::size_t k = depth; k < n_; ++k) {
      const std::size_t u = order_[k];
      if (inst_.costs[u] > remaining) continue;
      std::int64_t gain = inst_.values[u];
      std::int64_t pos = 0;
      for (const Neighbor& nb : adj_[u]) {
        const signed char st = state_[nb.other];
        if (st == 1) {
          gain += nb.cents;
        } else if (st == kUndecided && nb.cents > 0 && inst_.costs[nb.other] <= remaining) {
          pos += nb.cents;
        }
      }
      relaxed += std::max<std::int64_t>(gain, 0);
      positive_pairs2 += pos;  // each pair counted from both ends
      const std::int64_t w2 = 2 * gain + pos;
      if (w2 > 0) items.push_back({inst_.costs[u], w2});
    }
    relaxed += positive_pairs2 / 2;

    // Fractional knapsack over the halved-synergy weights.
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
      return static_cast<Wide>(a.weight2) * b.cost > static_cast<Wide>(b.weight2) * a.cost;
    });
    Wide frac2 = 0;
    std::int64_t left = remaining;
    for (const Item& it : items) {
      if (it.cost <= left) {
        frac2 += it.weight2;
        left -= it.cost;
      } else {
        frac2 += static_cast<Wide>(it.weight2) * left / it.cost;
        break;
      }
    }
    const auto knapsack = static_cast<std::int64_t>(frac2 / 2);
    return std::min(relaxed, knapsack);
  }

  void search(std::size_t depth, std::int64_t value, std::int64_t remaining) {
    if (timed_out_) return;
    if ((++nodes_ & 0x3ff) == 0 && Clock::now() >= deadline_) {
      timed_out_ = true;
      return;
    }
    if (value > best_value_) {
      best_value_ = value;
      best_.clear();
      for (std::size_t i = 0; i < n_; ++i) {
        if (state_[i] == 1) best_.push_back(i);
      }
    }
    if (depth == n_) return;
    if (value + bound(depth, remaining) <= best_value_) return;

    const std::size_t u = order_[depth];
    if (inst_.costs[u] <= remaining) {
      std::int64_t gain = inst_.values[u];
      for (const Neighbor& nb : adj_[u]) {
        if (state_[nb.other] == 1) gain += nb.cents;
      }
      state_[u] = 1;
      search(depth + 1, value + gain, remaining - inst_.costs[u]);
    }
    state_[u] = 0;
    search(depth + 1, value, remaining);
    state_[u] = kUndecided;
  }

  const BasketInstance& inst_;
  std::size_t n_;
  std::vector<std::vector<Neighbor>> adj_;
  std::vector<std::size_t> order_;
  std::vector<signed char> state_;
  Clock::time_point deadline_;
  std::vector<std::size_t> best_;
  std::int64_t best_value_ = 0;
  std::uint64_t nodes_ = 0;
  bool timed_out_ = false;
};

}  // namespace

BasketSolution optimize_basket(const BasketInstance& inst, std::chrono::milliseconds time_limit) {
  inst.validate();
  if (time_limit.count() < 0) fail(ErrorKind::invalid_argument, "time limit must be non-negative");
  const auto start = Clock::now();
  BranchAndBound bb(inst, start + time_limit);

  BasketSolution sol;
  if (inst.size() > 0 && time_limit.count() == 0) {
    sol.proof = Proof::bound_gap;
    sol.gap = bb.root_bound();
    return sol;
  }
  auto [greedy_sel, greedy_value] = bb.greedy();
  if (greedy_value > 0) bb.seed_incumbent(std::move(greedy_sel), greedy_value);
  const std::int64_t root = bb.root_bound();
  const bool complete = bb.run();

  sol.selected = bb.best();
  sol.objective = bb.best_value();
  sol.spend = spend_of(inst, sol.selected);
  sol.nodes = bb.nodes();
  if (complete) {
    sol.proof = Proof::optimal;
  } else {
    sol.proof = Proof::bound_gap;
    sol.gap = std::max<std::int64_t>(root - sol.objective, 0);
  }
  return sol;
}

BasketSolution brute_force_basket(const BasketInstance& inst) {
  inst.validate();
  const std::size_t n = inst.size();
  if (n > kBruteForceLimit) {
    fail(ErrorKind::invalid_argument, "brute force refuses instances with more than " +
                                          std::to_string(kBruteForceLimit) + " assets");
  }
  BasketSolution best;
  std::vector<std::size_t> sel;
  bool have = false;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    sel.clear();
    std::int64_t spend = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1u) {
        sel.push_back(i);
        spend += inst.costs[i];
      }
    }
    if (spend > inst.budget) continue;
    const std::int64_t obj = evaluate(inst, sel);
    if (!have || obj > best.objective ||
        (obj == best.objective &&
         std::lexicographical_compare(sel.begin(), sel.end(), best.selected.begin(),
                                      best.selected.end()))) {
      best.selected = sel;
      best.objective = obj;
      best.spend = spend;
      have = true;
    }
  }
  best.proof = Proof::optimal;
  best.nodes = std::uint64_t{1} << n;
  return best;
}

// File format ----------------------------------------------------------------------

namespace {

std::vector<std::int64_t> parse_ints(const std::string& line, std::size_t line_no) {
  std::vector<std::int64_t> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    std::string_view tok(line.data() + pos, comma - pos);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) {
      tok.remove_suffix(1);
    }
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || p != tok.data() + tok.size()) {
      fail(ErrorKind::invalid_argument,
           "line " + std::to_string(line_no) + ": expected integer, got '" + std::string(tok) + "'");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

}  // namespace

BasketInstance parse_instance(std::istream& in) {
  if (!in.good()) fail(ErrorKind::io, "instance stream is not readable");
  BasketInstance inst;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto f = parse_ints(line, line_no);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!have_header) {
      if (f.size() != 2 || f[0] < 0) fail(ErrorKind::invalid_argument, where + "expected n,budget_cents");
      n = static_cast<std::size_t>(f[0]);
      inst.budget = f[1];
      have_header = true;
    } else if (inst.values.size() < n) {
      if (f.size() != 3) fail(ErrorKind::invalid_argument, where + "expected i,value_cents,cost_cents");
      if (f[0] != static_cast<std::int64_t>(inst.values.size())) {
        fail(ErrorKind::invalid_argument, where + "asset lines must be numbered 0..n-1 in order");
      }
      inst.values.push_back(f[1]);
      inst.costs.push_back(f[2]);
    } else {
      if (f.size() != 3 || f[0] < 0 || f[1] < 0) {
        fail(ErrorKind::invalid_argument, where + "expected i,j,synergy_cents");
      }
      inst.synergies.push_back(
          {static_cast<std::size_t>(f[0]), static_cast<std::size_t>(f[1]), f[2]});
    }
  }
  if (!have_header) fail(ErrorKind::invalid_argument, "missing n,budget_cents header");
  if (inst.values.size() != n) {
    fail(ErrorKind::invalid_argument, "expected " + std::to_string(n) + " asset lines, found " +
                                          std::to_string(inst.values.size()));
  }
  inst.validate();
  return inst;
}

void write_instance(const BasketInstance& inst, std::ostream& out) {
  out << inst.size() << ',' << inst.budget << '\n';
  for (std::size_t i = 0; i < inst.size(); ++i) {
    out << i << ',' << inst.values[i] << ',' << inst.costs[i] << '\n';
  }
  for (const Synergy& s : inst.synergies) out << s.i << ',' << s.j << ',' << s.cents << '\n';
}

}  // namespace toxmarket::optimizer
