#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "toxmarket/combinatorial.hpp"
#include "toxmarket/error.hpp"
#include "toxmarket/lmsr.hpp"
#include "toxmarket/settlement.hpp"

using namespace toxmarket;
using namespace toxmarket::testing;

namespace {

struct PairWorld {
  AssetRegistry registry;
  std::unique_ptr<Exchange> exchange;
  MarketId a, b;

  PairWorld() {
    registry.insert(make_asset("LOT-1", 51.6801, -9.4526));
    registry.insert(make_asset("LOT-2", 51.6810, -9.4526));
    exchange = std::make_unique<Exchange>(registry);
    a = exchange->create_market("LOT-1", Cents{100}, 100.0, at(kCutoff), at(kNow)).market_id;
    b = exchange->create_market("LOT-2", Cents{100}, 100.0, at(kCutoff + 50), at(kNow)).market_id;
  }
  Exchange& ex() { return *exchange; }
};

// Joint book whose prices are exactly p, via q_i = b ln p_i.
MarketId joint_with_prices(PairWorld& w, std::array<double, 4> p) {
  JointMarket j;
  j.event_a = w.a;
  j.event_b = w.b;
  j.book.b = 100.0;
  j.book.cutoff = at(kCutoff);
  for (double pi : p) j.book.q.push_back(100.0 * std::log(pi));
  return w.ex().add_joint_market(std::move(j)).joint_id;
}

}  // namespace

TEST_CASE("create_joint_market") {
  PairWorld w;
  const JointMarket& j = create_joint_market(w.ex(), w.a, w.b, 100.0);
  for (double p : joint_prices(w.ex(), j.joint_id)) CHECK(p == 0.25);
  CHECK(j.book.cutoff == at(kCutoff));
  CHECK_THROWS_AS(create_joint_market(w.ex(), w.a, w.a, 100.0), Error);
  CHECK_THROWS_AS(create_joint_market(w.ex(), w.a, w.b, 0.0), Error);
  w.ex().halt(w.b);
  CHECK_THROWS_AS(create_joint_market(w.ex(), w.a, w.b, 100.0), Error);
}

TEST_CASE("joint prices and marginals") {
  PairWorld w;
  const MarketId j = create_joint_market(w.ex(), w.a, w.b, 100.0).joint_id;
  CHECK(marginal(w.ex(), j, JointEvent::a, Outcome::higher) == 0.5);
  CHECK(marginal(w.ex(), j, JointEvent::b, Outcome::lower) == 0.5);

  JointMarket skew;
  skew.event_a = w.a;
  skew.event_b = w.b;
  skew.book.b = 100.0;
  skew.book.cutoff = at(kCutoff);
  skew.book.q = {10.0, 0.0, 0.0, 0.0};
  const MarketId s = w.ex().add_joint_market(std::move(skew)).joint_id;
  // e^0.1 / (e^0.1 + 3), by direct normalization.
  CHECK(std::abs(joint_prices(w.ex(), s)[0] - 0.26921434944631023) < 1e-5);
  CHECK(joint_prices(w.ex(), s)[0] == doctest::Approx(0.26921434944631023).epsilon(1e-13));
}

TEST_CASE("marginals stay consistent under random joint trades") {
  PairWorld w;
  const MarketId j = create_joint_market(w.ex(), w.a, w.b, 50.0).joint_id;
  const AccountId acct = w.ex().open_account(std::nullopt, at(kNow)).account_id;
  std::mt19937_64 rng(37);
  for (int i = 0; i < 100; ++i) {
    w.ex().execute_trade(acct, j, rng() % 4, Cents{static_cast<std::int64_t>(1 + rng() % 900)},
                         at(kNow));
    const auto p = joint_prices(w.ex(), j);
    CHECK(std::abs(p[0] + p[1] + p[2] + p[3] - 1.0) <= 1e-12);
    for (JointEvent e : {JointEvent::a, JointEvent::b}) {
      CHECK(std::abs(marginal(w.ex(), j, e, Outcome::higher) +
                     marginal(w.ex(), j, e, Outcome::lower) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("dependency_report") {
  PairWorld w;
  SUBCASE("uniform state is exactly independent") {
    const MarketId j = create_joint_market(w.ex(), w.a, w.b, 100.0).joint_id;
    auto r = dependency_report(w.ex(), j);
    CHECK(r.lift == 1.0);
    CHECK(r.classification == Dependency::independent);
  }
  SUBCASE("(0.4, 0.1, 0.1, 0.4) signals complements with lift 1.6") {
    auto r = dependency_report(w.ex(), joint_with_prices(w, {0.4, 0.1, 0.1, 0.4}));
    CHECK(r.lift == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(r.classification == Dependency::complements);
  }
  SUBCASE("(0.1, 0.4, 0.4, 0.1) signals substitutes with lift 0.4") {
    auto r = dependency_report(w.ex(), joint_with_prices(w, {0.1, 0.4, 0.4, 0.1}));
    CHECK(r.lift == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(r.classification == Dependency::substitutes);
  }
  SUBCASE("complements reached through trades") {
    // Buying 138.63 shares each of HH and LL from uniform gives (0.4,0.1,0.1,0.4).
    const MarketId j = create_joint_market(w.ex(), w.a, w.b, 100.0).joint_id;
    const AccountId acct = w.ex().open_account(std::nullopt, at(kNow)).account_id;
    const double target = 100.0 * std::log(4.0);
    const Cents first = ceil_to_cents(w.ex().quote_buy(j, 0, target));
    w.ex().execute_trade(acct, j, 0, first, at(kNow));
    const Cents second = ceil_to_cents(w.ex().quote_buy(j, 3, target));
    w.ex().execute_trade(acct, j, 3, second, at(kNow));
    auto r = dependency_report(w.ex(), j);
    CHECK(r.lift == doctest::Approx(1.6).epsilon(1e-3));
    CHECK(r.classification == Dependency::complements);
  }
  SUBCASE("epsilon is configurable") {
    auto r = dependency_report(w.ex(), joint_with_prices(w, {0.4, 0.1, 0.1, 0.4}), 0.7);
    CHECK(r.classification == Dependency::independent);
  }
}

TEST_CASE("joint markets settle from both base resolutions") {
  PairWorld w;
  const MarketId j = create_joint_market(w.ex(), w.a, w.b, 100.0).joint_id;
  const AccountId acct = w.ex().open_account("x", at(kNow)).account_id;
  w.ex().execute_trade(acct, j, 1, Cents{1000}, at(kNow));  // HL
  w.ex().execute_trade(acct, j, 0, Cents{1000}, at(kNow));  // HH
  CHECK_THROWS_AS(settle_joint(w.ex(), j, at(kCutoff)), Error);
  w.ex().halt(w.a);
  w.ex().halt(w.b);
  resolve_and_settle(w.ex(), w.a, Cents{200}, at(kCutoff));  // a HIGHER
  resolve_and_settle(w.ex(), w.b, Cents{50}, at(kCutoff));   // b LOWER
  const double hl_shares = w.ex().account("x").positions.at(j)[1];
  auto report = settle_joint(w.ex(), j, at(kCutoff));
  CHECK(report.winning_outcome == 1);
  REQUIRE(report.payouts.size() == 1);
  CHECK(report.payouts[0].amount == share_payout(hl_shares));
  const auto& bk = w.ex().joint_market(j).book;
  CHECK(bk.state == MarketState::settled);
  CHECK(bk.paid_real - bk.collected_real <= lmsr::max_loss(100.0, 4));
  CHECK(w.ex().totals().conserved());
  CHECK_THROWS_AS(settle_joint(w.ex(), j, at(kCutoff)), Error);
}

TEST_CASE("propose_pairs") {
  SUBCASE("two assets about 1 km apart within 5 km") {
    PairWorld w;
    auto pairs = propose_pairs(w.ex(), 5.0, 10);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].asset_a == "LOT-1");
    CHECK(pairs[0].asset_b == "LOT-2");
    CHECK(pairs[0].distance_km == doctest::Approx(0.1).epsilon(0.01));
  }
  SUBCASE("Cork and Dublin are not within 100 km") {
    AssetRegistry reg;
    reg.insert(make_asset("CORK", 51.8985, -8.4756));
    reg.insert(make_asset("DUBLIN", 53.3498, -6.2603));
    Exchange ex(reg);
    ex.create_market("CORK", Cents{1}, 100.0, at(kCutoff), at(kNow));
    ex.create_market("DUBLIN", Cents{1}, 100.0, at(kCutoff), at(kNow));
    CHECK(propose_pairs(ex, 100.0, 10).empty());
    CHECK(propose_pairs(ex, 300.0, 10).size() == 1);
  }
  SUBCASE("three co-located assets give three ordered pairs") {
    AssetRegistry reg;
    for (const char* id : {"C", "A", "B"}) reg.insert(make_asset(id));
    Exchange ex(reg);
    for (const char* id : {"C", "A", "B"}) ex.create_market(id, Cents{1}, 100.0, at(kCutoff), at(kNow));
    auto pairs = propose_pairs(ex, 1.0, 10);
    REQUIRE(pairs.size() == 3);
    CHECK((pairs[0].asset_a == "A" && pairs[0].asset_b == "B"));
    CHECK((pairs[1].asset_a == "A" && pairs[1].asset_b == "C"));
    CHECK((pairs[2].asset_a == "B" && pairs[2].asset_b == "C"));
    CHECK(propose_pairs(ex, 1.0, 2).size() == 2);
  }
  SUBCASE("pairs already joined, and assets without open markets, are skipped") {
    PairWorld w;
    create_joint_market(w.ex(), w.a, w.b, 100.0);
    CHECK(propose_pairs(w.ex(), 5.0, 10).empty());
    w.registry.insert(make_asset("LOT-3", 51.6801, -9.4530));
    CHECK(propose_pairs(w.ex(), 5.0, 10).empty());
  }
  SUBCASE("argument errors") {
    PairWorld w;
    CHECK_THROWS_AS(propose_pairs(w.ex(), 0.0, 1), Error);
    CHECK_THROWS_AS(propose_pairs(w.ex(), 1.0, 0), Error);
  }
}

TEST_CASE("propose_pairs is invariant under insertion order") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> lat(51.0, 52.0), lon(-9.0, -8.0);
  std::vector<Asset> assets;
  for (int i = 0; i < 40; ++i) assets.push_back(make_asset("P" + std::to_string(i), lat(rng), lon(rng)));
  std::vector<PairProposal> reference;
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(assets.begin(), assets.end(), rng);
    AssetRegistry reg;
    for (const auto& a : assets) reg.insert(a);
    Exchange ex(reg);
    for (const auto& a : assets) ex.create_market(a.asset_id, Cents{1}, 100.0, at(kCutoff), at(kNow));
    auto pairs = propose_pairs(ex, 20.0, 50);
    if (trial == 0) {
      reference = pairs;
      CHECK(!reference.empty());
      continue;
    }
    REQUIRE(pairs.size() == reference.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(pairs[i].asset_a == reference[i].asset_a);
      CHECK(pairs[i].asset_b == reference[i].asset_b);
    }
  }
}
