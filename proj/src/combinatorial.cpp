#include "toxmarket/combinatorial.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "toxmarket/error.hpp"
#include "toxmarket/geo.hpp"
#include "toxmarket/lmsr.hpp"

namespace toxmarket {

const char* to_string(Dependency d) noexcept {
  switch (d) {
    case Dependency::complements: return "COMPLEMENTS";
    case Dependency::substitutes: return "SUBSTITUTES";
    case Dependency::independent: return "INDEPENDENT";
  }
  return "UNKNOWN";
}

const JointMarket& create_joint_market(Exchange& ex, const MarketId& market_a,
                                       const MarketId& market_b, double b) {
  if (market_a == market_b) fail(ErrorKind::invalid_argument, "joint market needs two distinct events");
  const Market& a = ex.market(market_a);
  const Market& mb = ex.market(market_b);
  if (a.book.state != MarketState::open || mb.book.state != MarketState::open) {
    fail(ErrorKind::conflict, "both base markets must be open");
  }
  if (!(b > 0.0) || !std::isfinite(b)) {
    fail(ErrorKind::invalid_argument, "liquidity b must be positive and finite");
  }
  JointMarket j;
  j.event_a = market_a;
  j.event_b = market_b;
  j.book.q.assign(kJointOutcomes.size(), 0.0);
  j.book.b = b;
  j.book.cutoff = std::min(a.book.cutoff, mb.book.cutoff);
  return ex.add_joint_market(std::move(j));
}

std::vector<double> joint_prices(const Exchange& ex, const MarketId& joint_id) {
  const JointMarket& j = ex.joint_market(joint_id);
  return lmsr::prices(j.book.q, j.book.b);
}

double marginal(const Exchange& ex, const MarketId& joint_id, JointEvent event, Outcome outcome) {
  const auto p = joint_prices(ex, joint_id);
  // Index = 2 * (a is LOWER) + (b is LOWER).
  const std::size_t o = static_cast<std::size_t>(outcome);
  return event == JointEvent::a ? p[2 * o] + p[2 * o + 1] : p[o] + p[2 + o];
}

DependencyReport dependency_report(const Exchange& ex, const MarketId& joint_id, double epsilon) {
  const auto p = joint_prices(ex, joint_id);
  DependencyReport r;
  r.joint_id = joint_id;
  r.p_joint_hh = p[0];
  r.p_marginal_a = p[0] + p[1];
  r.p_marginal_b = p[0] + p[2];
  r.lift = r.p_joint_hh / (r.p_marginal_a * r.p_marginal_b);
  if (r.lift > 1.0 + epsilon) {
    r.classification = Dependency::complements;
  } else if (r.lift < 1.0 - epsilon) {
    r.classification = Dependency::substitutes;
  } else {
    r.classification = Dependency::independent;
  }
  return r;
}

std::vector<PairProposal> propose_pairs(const Exchange& ex, double radius_km,
                                        std::size_t max_pairs) {
  if (!(radius_km > 0.0)) fail(ErrorKind::invalid_argument, "radius must be positive");
  if (max_pairs < 1) fail(ErrorKind::invalid_argument, "max_pairs must be at least 1");

  std::set<AssetId> open_assets;
  for (const auto& [id, m] : ex.markets()) {
    if (m.book.state == MarketState::open) open_assets.insert(m.asset_id);
  }
  std::set<std::pair<AssetId, AssetId>> joined;
  for (const auto& [id, j] : ex.joint_markets()) {
    AssetId x = ex.market(j.event_a).asset_id;
    AssetId y = ex.market(j.event_b).asset_id;
    if (y < x) std::swap(x, y);
    joined.emplace(std::move(x), std::move(y));
  }

  std::vector<PairProposal> out;
  const std::vector<AssetId> ids(open_assets.begin(), open_assets.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Asset& a = ex.registry().get(ids[i]);
    for (std::size_t k = i + 1; k < ids.size(); ++k) {
      if (joined.contains({ids[i], ids[k]})) continue;
      const Asset& b = ex.registry().get(ids[k]);
      const double d = geo::haversine_km(a.location(), b.location());
      if (d <= radius_km) out.push_back({ids[i], ids[k], d});
    }
  }
  std::sort(out.begin(), out.end(), [](const PairProposal& x, const PairProposal& y) {
    if (x.distance_km != y.distance_km) return x.distance_km < y.distance_km;
    if (x.asset_a != y.asset_a) return x.asset_a < y.asset_a;
    return x.asset_b < y.asset_b;
  });
  if (out.size() > max_pairs) out.resize(max_pairs);
  return out;
}

}  // namespace toxmarket
