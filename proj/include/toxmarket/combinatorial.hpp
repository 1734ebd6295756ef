#pragma once

#include <vector>

#include "toxmarket/exchange.hpp"

namespace toxmarket {

enum class Dependency { complements, substitutes, independent };

const char* to_string(Dependency d) noexcept;

struct DependencyReport {
  MarketId joint_id;
  double p_joint_hh = 0.0;
  double p_marginal_a = 0.0;
  double p_marginal_b = 0.0;
  double lift = 1.0;
  Dependency classification = Dependency::independent;
};

struct PairProposal {
  AssetId asset_a;  // asset_a < asset_b
  AssetId asset_b;
  double distance_km = 0.0;
};

/// Which base event a marginal refers to.
enum class JointEvent { a, b };

/// Opens a four-outcome market (HH, HL, LH, LL) over two distinct OPEN
/// binary markets. The joint market halts at the earlier base cutoff.
const JointMarket& create_joint_market(Exchange& ex, const MarketId& market_a,
                                       const MarketId& market_b, double b);

std::vector<double> joint_prices(const Exchange& ex, const MarketId& joint_id);

/// P(event HIGHER) or P(event LOWER) read off the joint distribution.
double marginal(const Exchange& ex, const MarketId& joint_id, JointEvent event, Outcome outcome);

/// lift = P(HH) / (P(a HIGHER) P(b HIGHER)); classified against 1 +- epsilon.
DependencyReport dependency_report(const Exchange& ex, const MarketId& joint_id,
                                   double epsilon = 0.05);

/// Asset pairs, each asset with at least one OPEN binary market, whose
/// distance is within radius_km, excluding pairs already joined by a joint
/// market. Nearest first, ties by (asset_a, asset_b); at most max_pairs.
std::vector<PairProposal> propose_pairs(const Exchange& ex, double radius_km,
                                        std::size_t max_pairs);

}  // namespace toxmarket
