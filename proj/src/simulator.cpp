#include "toxmarket/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <memory>
#include <random>

#include "json.hpp"

#include "toxmarket/error.hpp"
#include "toxmarket/lmsr.hpp"
#include "toxmarket/registry.hpp"
#include "toxmarket/settlement.hpp"

namespace toxmarket::sim {

namespace {

constexpr std::int64_t kEpoch = 1'700'000'000;
const AssetId kSimAsset = "SIM-ASSET";

Timestamp round_time(int round) { return from_epoch_seconds(kEpoch + round); }

AccountId agent_id(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%03d", prefix, index);
  return buf;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::mt19937_64 stream(std::uint64_t seed, AgentClass cls, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cls) + 1u, static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

struct Session;

class Agent {
 public:
  Agent(AgentClass cls, AccountId id, ClassBudget budget)
      : cls_(cls), id_(std::move(id)), budget_(budget) {}
  virtual ~Agent() = default;

  AgentClass agent_class() const { return cls_; }
  const AccountId& id() const { return id_; }
  Cents budget() const { return budget_.budget; }

  virtual void act(Session& s) = 0;
  virtual void on_shock(Session&) {}

 protected:
  AgentClass cls_;
  AccountId id_;
  ClassBudget budget_;
};

struct Session {
  const SimConfig& cfg;
  AssetRegistry registry;
  Exchange ex;
  std::vector<MarketId> ladder;  // ascending thresholds
  std::vector<Cents> thresholds;
  Cents true_price;
  int round = 0;

  Session(const SimConfig& c, ExchangeConfig ec) : cfg(c), ex(registry, ec) {}

  double p_higher(std::size_t i) const {
    return ex.prices(ladder[i])[static_cast<std::size_t>(Outcome::higher)];
  }

  /// Largest spend the account may place in the market right now.
  Cents admissible(const AccountId& id, const MarketId& m) const {
    const Account& a = ex.account(id);
    const Cents room = ex.config().wager_cap - a.wagered_in(m);
    return std::max(Cents{}, std::min(a.balance, room));
  }

  /// Buys with min(spend, admissible); returns the cents actually spent.
  Cents buy(const AccountId& id, std::size_t market, Outcome o, Cents spend) {
    spend = std::min(spend, admissible(id, ladder[market]));
    if (spend.value <= 0) return Cents{};
    ex.execute_trade(id, ladder[market], static_cast<std::size_t>(o), spend, round_time(round));
    return spend;
  }
};

class InformedAgent final : public Agent {
 public:
  InformedAgent(int index, const SimConfig& cfg)
      : Agent(AgentClass::informed, agent_id("INF", index), cfg.informed),
        rng_(stream(cfg.seed, AgentClass::informed, index)) {}

  void draw_signal(const Session& s) {
    const double sigma = static_cast<double>(s.cfg.signal_noise_sigma.value);
    std::normal_distribution<double> noise(0.0, 1.0);
    signal_ = static_cast<double>(s.true_price.value) + sigma * noise(rng_);
  }

  double belief(const Session& s, std::size_t i) const {
    const double t = static_cast<double>(s.thresholds[i].value);
    const double sigma = static_cast<double>(s.cfg.signal_noise_sigma.value);
    if (sigma <= 0.0) return signal_ > t ? 1.0 : 0.0;
    return normal_cdf((signal_ - t) / sigma);
  }

  void act(Session& s) override {
    const double w = static_cast<double>(budget_.spend_per_round.value);
    for (std::size_t i = 0; i < s.ladder.size(); ++i) {
      const double pi = belief(s, i);
      const double p = s.p_higher(i);
      // Fraction of the pacing unit a log-utility bettor stakes at this edge.
      double cents = 0.0;
      Outcome side = Outcome::higher;
      if (pi > p) {
        cents = w * (pi - p) / (1.0 - p);
      } else if (pi < p) {
        cents = w * (p - pi) / p;
        side = Outcome::lower;
      }
      const auto spend = static_cast<std::int64_t>(std::floor(cents));
      if (spend >= 1) s.buy(id_, i, side, Cents{spend});
    }
  }

  void on_shock(Session& s) override { draw_signal(s); }

 private:
  std::mt19937_64 rng_;
  double signal_ = 0.0;
};

class NoiseAgent final : public Agent {
 public:
  NoiseAgent(int index, const SimConfig& cfg)
      : Agent(AgentClass::noise, agent_id("NOI", index), cfg.noise),
        rng_(stream(cfg.seed, AgentClass::noise, index)) {}

  void act(Session& s) override {
    std::uniform_int_distribution<std::size_t> pick(0, s.ladder.size() - 1);
    std::bernoulli_distribution coin(0.5);
    const std::size_t i = pick(rng_);
    const Outcome side = coin(rng_) ? Outcome::higher : Outcome::lower;
    const std::int64_t hi = std::max<std::int64_t>(1, budget_.spend_per_round.value);
    std::uniform_int_distribution<std::int64_t> amount(1, hi);
    const Cents spend{amount(rng_)};
    s.buy(id_, i, side, spend);
  }

 private:
  std::mt19937_64 rng_;
};

class Manipulator final : public Agent {
 public:
  Manipulator(int index, const SimConfig& cfg)
      : Agent(AgentClass::manipulator, agent_id("MAN", index), cfg.manipulator) {}

  void act(Session& s) override {
    const Outcome target = s.cfg.manipulation_target;
    std::vector<std::size_t> order(s.ladder.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto target_price = [&](std::size_t i) {
      return s.ex.prices(s.ladder[i])[static_cast<std::size_t>(target)];
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return target_price(a) < target_price(b); });
    Cents left = budget_.spend_per_round;
    for (std::size_t i : order) {
      if (left.value <= 0) break;
      left -= s.buy(id_, i, target, left);
    }
  }
};

class Arbitrageur final : public Agent {
 public:
  Arbitrageur(int index, const SimConfig& cfg)
      : Agent(AgentClass::arbitrageur, agent_id("ARB", index), cfg.arbitrageur) {}

  void act(Session& s) override {
    Cents left = budget_.spend_per_round;
    for (std::size_t pass = 0; pass < s.ladder.size() && left.value > 0; ++pass) {
      const auto violations = detect_arbitrage(implied_curve(s.ex, kSimAsset), s.cfg.arbitrage_epsilon);
      if (violations.empty()) return;
      const std::size_t i = violations.front().lower_index;
      const Cents spent = close_gap(s, i, left);
      if (spent.value <= 0) return;
      left -= spent;
    }
  }

 private:
  /// Buys equal shares of HIGHER at i and LOWER at i + 1 until the two
  /// exceedance prices meet, limited by the cents available.
  Cents close_gap(Session& s, std::size_t i, Cents available) {
    const MakerBook& lo = s.ex.book(s.ladder[i]);
    const MakerBook& up = s.ex.book(s.ladder[i + 1]);
    const auto H = static_cast<std::size_t>(Outcome::higher);
    const auto L = static_cast<std::size_t>(Outcome::lower);
    auto gap = [&](double d) {
      std::vector<double> ql = lo.q, qu = up.q;
      ql[H] += d;
      qu[L] += d;
      return lmsr::prices(qu, up.b)[H] - lmsr::prices(ql, lo.b)[H];
    };
    auto cost = [&](double d) {
      return lmsr::quote_buy(lo.q, lo.b, H, d) + lmsr::quote_buy(up.q, up.b, L, d);
    };
    const double cap_euro = static_cast<double>(
        std::min({available, s.admissible(id_, s.ladder[i]) + s.admissible(id_, s.ladder[i + 1])})
            .value) / 100.0;
    double hi = 1.0;
    while (gap(hi) > 0.0 && hi < 1e9) hi *= 2.0;
    double lo_d = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo_d + hi);
      if (gap(mid) > 0.0 && cost(mid) <= cap_euro) {
        lo_d = mid;
      } else {
        hi = mid;
      }
    }
    if (cost(hi) <= cap_euro) lo_d = hi;
    const double d = lo_d;
    if (!(d > 0.0)) return Cents{};
    const auto c_lo = static_cast<std::int64_t>(std::floor(lmsr::quote_buy(lo.q, lo.b, H, d) * 100.0));
    const auto c_up = static_cast<std::int64_t>(std::floor(lmsr::quote_buy(up.q, up.b, L, d) * 100.0));
    Cents spent;
    if (c_lo >= 1) spent += s.buy(id_, i, Outcome::higher, Cents{c_lo});
    if (c_up >= 1) spent += s.buy(id_, i + 1, Outcome::lower, Cents{c_up});
    return spent;
  }
};

std::size_t check_invariants(const Session& s) {
  std::size_t bad = 0;
  for (const MarketId& m : s.ladder) {
    const auto p = s.ex.prices(m);
    double sum = 0.0;
    for (double x : p) sum += x;
    if (std::abs(sum - 1.0) > 1e-12) ++bad;
  }
  if (!s.ex.totals().conserved()) ++bad;
  for (const auto& [id, acct] : s.ex.accounts()) {
    if (acct.balance.value < 0) ++bad;
    for (const auto& [m, w] : acct.wagered) {
      if (w > s.ex.config().wager_cap) ++bad;
    }
  }
  return bad;
}

void track_arbitrage(const Session& s, std::vector<ArbitrageWindow>& windows,
                     std::vector<std::optional<std::size_t>>& open) {
  const auto violations = detect_arbitrage(implied_curve(s.ex, kSimAsset), s.cfg.arbitrage_epsilon);
  std::vector<bool> now(open.size(), false);
  for (const auto& v : violations) now[v.lower_index] = true;
  for (std::size_t i = 0; i < open.size(); ++i) {
    if (now[i] && !open[i]) {
      open[i] = windows.size();
      windows.push_back({i, s.round, std::nullopt});
    } else if (!now[i] && open[i]) {
      windows[*open[i]].close_round = s.round;
      open[i].reset();
    }
  }
}

std::optional<int> crossing_round(const std::vector<std::vector<double>>& curves, std::size_t t,
                                  int shock_round, double pre, double target) {
  const double half = 0.5 * (pre + target);
  const bool rising = target > pre;
  for (int r = shock_round; r <= static_cast<int>(curves.size()); ++r) {
    const double p = curves[static_cast<std::size_t>(r - 1)][t];
    if (rising ? p >= half : p <= half) return r - shock_round + 1;
  }
  return std::nullopt;
}

SimMetrics run(const SimConfig& cfg, const std::optional<ShockSpec>& shock) {
  cfg.validate();
  if (shock) {
    if (shock->shock_round < 1 || shock->shock_round > cfg.rounds) {
      fail(ErrorKind::invalid_argument, "shock round must lie within the session");
    }
    if (shock->new_true_price.value <= 0) {
      fail(ErrorKind::invalid_argument, "new true price must be positive");
    }
  }

  ExchangeConfig ec;
  ec.default_b = cfg.b;
  ec.wager_cap = cfg.wager_cap;
  ec.starting_balance = Cents{};
  Session s(cfg, ec);
  s.true_price = cfg.true_price;
  s.thresholds = cfg.ladder();

  Asset asset;
  asset.asset_id = kSimAsset;
  asset.title = "Simulated asset";
  asset.county = "None";
  asset.book_value = cfg.true_price;
  asset.loan_reference = "SIM";
  s.registry.insert(asset);
  const Timestamp cutoff = round_time(cfg.rounds + 1);
  for (Cents t : s.thresholds) {
    s.ladder.push_back(s.ex.create_market(kSimAsset, t, cfg.b, cutoff, round_time(0)).market_id);
  }

  std::vector<std::unique_ptr<Agent>> core;
  std::vector<std::unique_ptr<Agent>> manipulators;
  std::vector<InformedAgent*> informed;
  for (int i = 0; i < cfg.n_informed; ++i) {
    auto a = std::make_unique<InformedAgent>(i + 1, cfg);
    informed.push_back(a.get());
    core.push_back(std::move(a));
  }
  for (int i = 0; i < cfg.n_noise; ++i) core.push_back(std::make_unique<NoiseAgent>(i + 1, cfg));
  for (int i = 0; i < cfg.n_arbitrageurs; ++i) {
    core.push_back(std::make_unique<Arbitrageur>(i + 1, cfg));
  }
  for (int i = 0; i < cfg.n_manipulators; ++i) {
    manipulators.push_back(std::make_unique<Manipulator>(i + 1, cfg));
  }
  for (auto* list : {&core, &manipulators}) {
    for (auto& a : *list) {
      s.ex.open_account(a->id(), round_time(0));
      if (a->budget().value > 0) s.ex.credit_account(a->id(), a->budget(), round_time(0));
    }
  }
  for (InformedAgent* a : informed) a->draw_signal(s);

  std::mt19937_64 order_rng = stream(cfg.seed, AgentClass::noise, 0);
  std::mt19937_64 insert_rng = stream(cfg.seed, AgentClass::manipulator, 0);

  SimMetrics out;
  out.thresholds = s.thresholds;
  out.curves.reserve(static_cast<std::size_t>(cfg.rounds));
  std::vector<std::optional<std::size_t>> open(s.ladder.size() > 0 ? s.ladder.size() - 1 : 0);
  std::vector<double> pre_shock;

  std::vector<Agent*> order;
  for (int r = 1; r <= cfg.rounds; ++r) {
    s.round = r;
    if (shock && r == shock->shock_round) {
      for (std::size_t i = 0; i < s.ladder.size(); ++i) pre_shock.push_back(s.p_higher(i));
      s.true_price = shock->new_true_price;
      for (InformedAgent* a : informed) a->on_shock(s);
    }

    order.clear();
    for (auto& a : core) order.push_back(a.get());
    std::shuffle(order.begin(), order.end(), order_rng);
    for (auto& m : manipulators) {
      std::uniform_int_distribution<std::size_t> slot(0, order.size());
      order.insert(order.begin() + static_cast<std::ptrdiff_t>(slot(insert_rng)), m.get());
    }
    for (Agent* a : order) a->act(s);

    std::vector<double> curve(s.ladder.size());
    for (std::size_t i = 0; i < s.ladder.size(); ++i) curve[i] = s.p_higher(i);
    out.curves.push_back(std::move(curve));
    track_arbitrage(s, out.arbitrage_windows, open);
    if (cfg.check_invariants) out.invariant_violations += check_invariants(s);
  }

  out.final_prices.resize(s.ladder.size());
  for (std::size_t i = 0; i < s.ladder.size(); ++i) out.final_prices[i] = s.p_higher(i);
  out.settle_price = s.true_price;
  for (std::size_t i = 0; i < s.ladder.size(); ++i) {
    const double truth = s.true_price > s.thresholds[i] ? 1.0 : 0.0;
    out.final_error.push_back(std::abs(out.final_prices[i] - truth));
  }
  out.trades = s.ex.trades().size();

  if (shock) {
    ShockOutcome so;
    for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
      const bool before = cfg.true_price > s.thresholds[i];
      const bool after = shock->new_true_price > s.thresholds[i];
      if (before == after) continue;
      so.straddled.push_back(i);
      so.pre_shock.push_back(pre_shock[i]);
      so.asymptote.push_back(out.final_prices[i]);
      so.drift.push_back(out.final_prices[i] - pre_shock[i]);
      if (std::abs(out.final_prices[i] - pre_shock[i]) < 1e-12) {
        so.half_lives.push_back(0);
      } else {
        so.half_lives.push_back(
            crossing_round(out.curves, i, shock->shock_round, pre_shock[i], out.final_prices[i]));
      }
    }
    so.half_life = 0;
    for (const auto& h : so.half_lives) {
      if (!h) {
        so.half_life.reset();
        break;
      }
      so.half_life = std::max(*so.half_life, *h);
    }
    out.shock = std::move(so);
  }

  const Timestamp end = cutoff;
  for (const MarketId& m : s.ladder) {
    halt_at_cutoff(s.ex, m, end);
    resolve_and_settle(s.ex, m, s.true_price, end);
    const MakerBook& book = s.ex.book(m);
    const double loss = book.paid_real - book.collected_real;
    out.max_maker_loss_ratio = std::max(out.max_maker_loss_ratio, loss / lmsr::max_loss(book.b, 2));
  }
  if (cfg.check_invariants) out.invariant_violations += check_invariants(s);
  out.totals = s.ex.totals();
  for (const auto& m : manipulators) {
    out.manipulator_profit += s.ex.account(m->id()).balance - m->budget();
  }
  for (const auto& a : core) {
    if (a->agent_class() == AgentClass::arbitrageur) {
      out.arbitrageur_profit += s.ex.account(a->id()).balance - a->budget();
    }
  }
  return out;
}

}  // namespace

std::vector<Cents> default_ladder(Cents true_price) {
  std::vector<Cents> out;
  for (int k : {5, 7, 9, 11, 13}) {
    out.push_back(Cents{true_price.value * k / 8});
  }
  return out;
}

std::vector<Cents> SimConfig::ladder() const {
  return thresholds.empty() ? default_ladder(true_price) : thresholds;
}

void SimConfig::validate() const {
  if (true_price.value <= 0) fail(ErrorKind::invalid_argument, "true price must be positive");
  if (n_informed < 0 || n_noise < 0 || n_manipulators < 0 || n_arbitrageurs < 0) {
    fail(ErrorKind::invalid_argument, "agent counts must be non-negative");
  }
  if (signal_noise_sigma.value < 0) fail(ErrorKind::invalid_argument, "sigma must be non-negative");
  if (rounds < 0) fail(ErrorKind::invalid_argument, "rounds must be non-negative");
  if (!(b > 0.0) || !std::isfinite(b)) fail(ErrorKind::invalid_argument, "b must be positive");
  if (wager_cap.value <= 0) fail(ErrorKind::invalid_argument, "wager cap must be positive");
  if (arbitrage_epsilon < 0.0) fail(ErrorKind::invalid_argument, "epsilon must be non-negative");
  for (const ClassBudget* cb : {&informed, &noise, &manipulator, &arbitrageur}) {
    if (cb->budget.value < 0 || cb->spend_per_round.value < 0) {
      fail(ErrorKind::invalid_argument, "budgets must be non-negative");
    }
  }
  const auto t = ladder();
  if (t.empty()) fail(ErrorKind::invalid_argument, "ladder is empty");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].value <= 0) fail(ErrorKind::invalid_argument, "thresholds must be positive");
    if (i > 0 && !(t[i - 1] < t[i])) {
      fail(ErrorKind::invalid_argument, "thresholds must be strictly ascending");
    }
  }
}

SimMetrics run_session(const SimConfig& config) { return run(config, std::nullopt); }

SimMetrics shock_session(const SimConfig& config, const ShockSpec& shock) {
  return run(config, shock);
}

ManipulationReport manipulation_experiment(const SimConfig& config) {
  if (config.n_manipulators < 1) {
    fail(ErrorKind::invalid_argument, "treatment needs at least one manipulator");
  }
  SimConfig baseline = config;
  baseline.n_manipulators = 0;
  ManipulationReport rep;
  rep.baseline = run_session(baseline);
  rep.treatment = run_session(config);
  for (std::size_t i = 0; i < rep.baseline.final_prices.size(); ++i) {
    rep.displacement.push_back(
        std::abs(rep.treatment.final_prices[i] - rep.baseline.final_prices[i]));
  }
  rep.manipulator_profit = rep.treatment.manipulator_profit;
  return rep;
}

void export_metrics(const SimMetrics& m, std::ostream& out, const ManipulationReport* manip) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(12);
  out << "round,threshold_cents,p_higher\n";
  for (std::size_t r = 0; r < m.curves.size(); ++r) {
    for (std::size_t i = 0; i < m.thresholds.size(); ++i) {
      out << r + 1 << ',' << m.thresholds[i].value << ',' << m.curves[r][i] << '\n';
    }
  }
  out << "# summary\n";
  out << "# settle_price_cents," << m.settle_price.value << '\n';
  for (std::size_t i = 0; i < m.thresholds.size(); ++i) {
    out << "# final_error," << m.thresholds[i].value << ',' << m.final_error[i] << '\n';
  }
  if (m.shock) {
    out << "# half_life,";
    if (m.shock->half_life) {
      out << *m.shock->half_life << '\n';
    } else {
      out << "never\n";
    }
  }
  if (manip) {
    for (std::size_t i = 0; i < m.thresholds.size(); ++i) {
      out << "# displacement," << m.thresholds[i].value << ',' << manip->displacement[i] << '\n';
    }
    out << "# manipulator_profit_cents," << manip->manipulator_profit.value << '\n';
  }
  for (const auto& w : m.arbitrage_windows) {
    out << "# arbitrage_window," << w.lower_index << ',' << w.open_round << ',';
    if (w.close_round) {
      out << *w.close_round << '\n';
    } else {
      out << "open\n";
    }
  }
  out << "# trades," << m.trades << '\n';
  out << "# conserved," << (m.totals.conserved() ? "true" : "false") << '\n';
  out << "# invariant_violations," << m.invariant_violations << '\n';
  out.flags(flags);
  out.precision(precision);
}

SimConfig parse_config(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_argument, std::string("simulator config: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::invalid_argument, "simulator config must be an object");
  SimConfig c;
  auto cents = [&](const char* key, Cents& dst) {
    if (j.contains(key)) dst = Cents{j.at(key).get<std::int64_t>()};
  };
  auto budget = [&](const char* key, ClassBudget& dst) {
    if (!j.contains(key)) return;
    const auto& o = j.at(key);
    if (o.contains("budget_cents")) dst.budget = Cents{o.at("budget_cents").get<std::int64_t>()};
    if (o.contains("spend_per_round_cents")) {
      dst.spend_per_round = Cents{o.at("spend_per_round_cents").get<std::int64_t>()};
    }
  };
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    cents("true_price_cents", c.true_price);
    if (j.contains("thresholds_cents")) {
      for (const auto& t : j.at("thresholds_cents")) c.thresholds.push_back(Cents{t.get<std::int64_t>()});
    }
    if (j.contains("n_informed")) c.n_informed = j.at("n_informed").get<int>();
    if (j.contains("n_noise")) c.n_noise = j.at("n_noise").get<int>();
    if (j.contains("n_manipulators")) c.n_manipulators = j.at("n_manipulators").get<int>();
    if (j.contains("n_arbitrageurs")) c.n_arbitrageurs = j.at("n_arbitrageurs").get<int>();
    cents("signal_noise_sigma_cents", c.signal_noise_sigma);
    if (j.contains("rounds")) c.rounds = j.at("rounds").get<int>();
    budget("informed", c.informed);
    budget("noise", c.noise);
    budget("manipulator", c.manipulator);
    budget("arbitrageur", c.arbitrageur);
    if (j.contains("b")) c.b = j.at("b").get<double>();
    if (j.contains("manipulation_target")) {
      const auto t = j.at("manipulation_target").get<std::string>();
      if (t == "HIGHER") {
        c.manipulation_target = Outcome::higher;
      } else if (t == "LOWER") {
        c.manipulation_target = Outcome::lower;
      } else {
        fail(ErrorKind::invalid_argument, "manipulation_target must be HIGHER or LOWER");
      }
    }
    cents("wager_cap_cents", c.wager_cap);
    if (j.contains("arbitrage_epsilon")) c.arbitrage_epsilon = j.at("arbitrage_epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_argument, std::string("simulator config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace toxmarket::sim
