#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "toxmarket/error.hpp"
#include "toxmarket/lmsr.hpp"
#include "toxmarket/settlement.hpp"

using namespace toxmarket;
using namespace toxmarket::testing;

namespace {

constexpr std::size_t kHigher = 0;
constexpr std::size_t kLower = 1;

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::io;
}

ImpliedCurve curve_of(std::initializer_list<double> ps) {
  ImpliedCurve c;
  std::int64_t t = 100;
  for (double p : ps) c.points.push_back({Cents{t += 100}, p});
  return c;
}

// Worst-case payoff of holding one HIGHER share at the lower threshold and one
// LOWER share at the upper threshold, over the three regions the true price
// can fall into.
double min_payoff_high_low() {
  const double above_upper = 1.0 + 0.0;
  const double between = 1.0 + 1.0;
  const double below_lower = 0.0 + 1.0;
  return std::min({above_upper, between, below_lower});
}

}  // namespace

TEST_CASE("halt_at_cutoff") {
  World w;
  const MarketId m = w.market();
  CHECK(halt_at_cutoff(w.ex(), m, at(kCutoff - 1)) == MarketState::open);
  CHECK(halt_at_cutoff(w.ex(), m, at(kCutoff)) == MarketState::halted);
  CHECK(halt_at_cutoff(w.ex(), m, at(kCutoff + 10)) == MarketState::halted);
}

TEST_CASE("winning outcome uses the strict rule") {
  CHECK(winning_outcome(Cents{25'000'000}, Cents{26'000'000}) == Outcome::higher);
  CHECK(winning_outcome(Cents{25'000'000}, Cents{25'000'000}) == Outcome::lower);
  CHECK(winning_outcome(Cents{25'000'000}, Cents{24'999'999}) == Outcome::lower);
  CHECK(winning_outcome(Cents{25'000'000}, Cents{25'000'001}) == Outcome::higher);
}

TEST_CASE("share payouts round half-even to the cent") {
  CHECK(share_payout(10.0) == Cents{1000});
  CHECK(share_payout(0.125) == Cents{12});
  CHECK(share_payout(0.375) == Cents{38});
  CHECK(share_payout(10.009623111337907) == Cents{1001});
}

TEST_CASE("resolve_and_settle pays HIGHER holders when the price is above") {
  World w;
  const MarketId m = w.market(25'000'000);
  const AccountId hi = w.ex().open_account("hi", at(kNow)).account_id;
  const AccountId lo = w.ex().open_account("lo", at(kNow)).account_id;
  const double shares = w.ex().execute_trade(hi, m, kHigher, Cents{513}, at(kNow)).shares;
  w.ex().execute_trade(lo, m, kLower, Cents{2000}, at(kNow));
  const Cents hi_before = w.ex().account(hi).balance;
  const Cents lo_before = w.ex().account(lo).balance;

  CHECK(kind_of([&] { resolve_and_settle(w.ex(), m, Cents{26'000'000}, at(kCutoff)); }) ==
        ErrorKind::conflict);  // not halted yet
  halt_at_cutoff(w.ex(), m, at(kCutoff));
  CHECK(kind_of([&] { resolve_and_settle(w.ex(), m, Cents{0}, at(kCutoff)); }) ==
        ErrorKind::invalid_argument);

  auto report = resolve_and_settle(w.ex(), m, Cents{26'000'000}, at(kCutoff));
  REQUIRE(report.payouts.size() == 1);
  CHECK(report.payouts[0].account_id == "hi");
  CHECK(report.payouts[0].amount == share_payout(shares));
  CHECK(w.ex().account(hi).balance == hi_before + share_payout(shares));
  CHECK(w.ex().account(lo).balance == lo_before);
  CHECK(report.lines.size() == 2);
  CHECK(w.ex().market(m).book.state == MarketState::settled);
  CHECK(w.registry.get("BANTRY-1").status == AssetStatus::settled);
  CHECK(w.ex().totals().conserved());

  SUBCASE("settling twice fails and changes nothing") {
    const auto totals = w.ex().totals();
    CHECK(kind_of([&] { resolve_and_settle(w.ex(), m, Cents{26'000'000}, at(kCutoff)); }) ==
          ErrorKind::conflict);
    CHECK(w.ex().totals().balances == totals.balances);
    CHECK(w.ex().totals().payouts == totals.payouts);
  }
  SUBCASE("export") {
    std::ostringstream out;
    export_settlement_csv(report, out);
    CHECK(out.str().rfind("market_id,account_id,outcome,shares,payout_cents\n", 0) == 0);
    CHECK(out.str().find("M000001,hi,HIGHER,10.0096") != std::string::npos);
    CHECK(out.str().find(",1001\n") != std::string::npos);
  }
}

TEST_CASE("a tie at the threshold settles LOWER") {
  World w;
  const MarketId m = w.market(25'000'000);
  const AccountId hi = w.ex().open_account("hi", at(kNow)).account_id;
  const AccountId lo = w.ex().open_account("lo", at(kNow)).account_id;
  w.ex().execute_trade(hi, m, kHigher, Cents{1000}, at(kNow));
  w.ex().execute_trade(lo, m, kLower, Cents{1000}, at(kNow));
  w.ex().halt(m);
  auto report = resolve_and_settle(w.ex(), m, Cents{25'000'000}, at(kCutoff));
  CHECK(report.winning_outcome == kLower);
  REQUIRE(report.payouts.size() == 1);
  CHECK(report.payouts[0].account_id == "lo");
}

TEST_CASE("asset settles only after its last market") {
  World w;
  const MarketId m1 = w.market(20'000'000);
  const MarketId m2 = w.market(30'000'000);
  w.ex().halt(m1);
  w.ex().halt(m2);
  resolve_and_settle(w.ex(), m1, Cents{26'000'000}, at(kCutoff));
  CHECK(w.registry.get("BANTRY-1").status == AssetStatus::market_open);
  resolve_and_settle(w.ex(), m2, Cents{26'000'000}, at(kCutoff));
  CHECK(w.registry.get("BANTRY-1").status == AssetStatus::settled);
}

TEST_CASE("maker loss stays within b ln 2 and payouts within rounding slack") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    ExchangeConfig cfg;
    cfg.wager_cap = Cents{100'000'000};
    World w(cfg);
    const double b = std::vector<double>{10.0, 100.0, 1000.0}[trial % 3];
    const MarketId m = w.market(25'000'000, b);
    std::vector<AccountId> accts;
    for (int i = 0; i < 4; ++i) accts.push_back(w.ex().open_account(std::nullopt, at(kNow)).account_id);
    std::uniform_int_distribution<std::int64_t> spend(1, 50'000);
    for (int i = 0; i < 60; ++i) {
      const AccountId& a = accts[rng() % accts.size()];
      const Cents s{spend(rng)};
      if (w.ex().account(a).balance >= s) w.ex().execute_trade(a, m, rng() % 2, s, at(kNow));
    }
    w.ex().halt(m);
    const Cents announced{rng() % 2 ? 26'000'000 : 24'000'000};
    auto report = resolve_and_settle(w.ex(), m, announced, at(kCutoff));
    const auto& bk = w.ex().market(m).book;
    CHECK(bk.paid_real - bk.collected_real <= lmsr::max_loss(b, 2) + 1e-9);

    double winning_shares = 0.0;
    Cents paid;
    for (const auto& p : report.payouts) paid += p.amount;
    for (const auto& l : report.lines) {
      if (l.outcome == kBinaryOutcomes[report.winning_outcome]) winning_shares += l.shares;
    }
    CHECK(static_cast<double>(paid.value) <=
          winning_shares * 100.0 + static_cast<double>(report.payouts.size()));
    CHECK(w.ex().totals().conserved());
  }
}

TEST_CASE("implied_curve") {
  World w;
  SUBCASE("single fresh market") {
    w.market(25'000'000);
    auto c = implied_curve(w.ex(), "BANTRY-1");
    REQUIRE(c.points.size() == 1);
    CHECK(c.points[0].p_exceed == 0.5);
  }
  SUBCASE("two fresh markets are vacuously monotone") {
    w.market(30'000'000);
    w.market(20'000'000);
    auto c = implied_curve(w.ex(), "BANTRY-1");
    REQUIRE(c.points.size() == 2);
    CHECK(c.points[0].threshold < c.points[1].threshold);
    CHECK(c.points[0].p_exceed == 0.5);
    CHECK(c.points[1].p_exceed == 0.5);
    CHECK(detect_arbitrage(c, 0.0).empty());
  }
  SUBCASE("trades lift P(>t1) to 0.8 and hold P(>t2) at 0.3") {
    const MarketId m1 = w.market(20'000'000);
    const MarketId m2 = w.market(30'000'000);
    const AccountId a = w.ex().open_account(std::nullopt, at(kNow)).account_id;
    // 100 ln 2.5 = 91.629 euro moves 0.5 -> 0.8; 100 ln(5/3) = 51.083 moves 0.5 -> 0.3.
    w.ex().execute_trade(a, m1, kHigher, Cents{9163}, at(kNow));
    w.ex().execute_trade(a, m2, kLower, Cents{5108}, at(kNow));
    auto c = implied_curve(w.ex(), "BANTRY-1");
    CHECK(c.points[0].p_exceed == doctest::Approx(0.8).epsilon(1e-4));
    CHECK(c.points[1].p_exceed == doctest::Approx(0.3).epsilon(1e-4));
    CHECK(detect_arbitrage(c, 0.0).empty());
    CHECK(median_crossing_value(c).value > 20'000'000);
    CHECK(median_crossing_value(c).value < 30'000'000);
  }
  SUBCASE("no markets") {
    CHECK(kind_of([&] { implied_curve(w.ex(), "BANTRY-1"); }) == ErrorKind::not_found);
  }
}

TEST_CASE("detect_arbitrage") {
  CHECK(detect_arbitrage(curve_of({0.9, 0.7, 0.4, 0.1}), 0.0).empty());
  auto v = detect_arbitrage(curve_of({0.4, 0.6}), 0.05);
  REQUIRE(v.size() == 1);
  CHECK(v[0].lower_index == 0);
  CHECK(v[0].excess == doctest::Approx(0.2));
  CHECK(detect_arbitrage(curve_of({0.5, 0.52}), 0.05).empty());
  CHECK(detect_arbitrage(curve_of({0.9, 0.3, 0.5, 0.2, 0.6}), 0.0).size() == 2);
}

TEST_CASE("reported violations are exactly the riskless two-leg purchases") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> pd(0.001, 0.999);
  for (int i = 0; i < 5000; ++i) {
    const double p_lo = pd(rng);
    const double p_hi = i % 10 == 0 ? p_lo : pd(rng);
    const bool flagged = !detect_arbitrage(curve_of({p_lo, p_hi}), 0.0).empty();
    const double cost = p_lo + (1.0 - p_hi);  // HIGHER at t_i, LOWER at t_{i+1}
    const bool riskless_profit = min_payoff_high_low() - cost > 0.0;
    CHECK(flagged == riskless_profit);
  }
}
