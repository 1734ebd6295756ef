#pragma once

#include <ostream>
#include <vector>

#include "toxmarket/exchange.hpp"

namespace toxmarket {

struct Resolution {
  MarketId market_id;
  Cents announced_price;
  Outcome winning_outcome = Outcome::lower;
  Timestamp resolved_at{};
};

/// One held position and what it paid.
struct SettlementLine {
  MarketId market_id;
  AccountId account_id;
  std::string outcome;
  double shares = 0.0;
  Cents payout;
};

struct SettlementReport {
  MarketId market_id;
  std::size_t winning_outcome = 0;
  std::vector<Payout> payouts;       // winners only, account_id order
  std::vector<SettlementLine> lines; // every held position
};

struct CurvePoint {
  Cents threshold;
  double p_exceed = 0.0;
};

struct ImpliedCurve {
  AssetId asset_id;
  std::vector<CurvePoint> points;  // thresholds strictly ascending
};

struct ArbitrageViolation {
  std::size_t lower_index = 0;  // pair (lower_index, lower_index + 1)
  Cents lower_threshold;
  Cents upper_threshold;
  double excess = 0.0;          // P(>upper) - P(>lower)
};

/// Strict comparison: only a price above the threshold makes HIGHER win.
Outcome winning_outcome(Cents threshold, Cents announced_price);

/// Halts an OPEN market once now >= cutoff. Idempotent; returns the state.
MarketState halt_at_cutoff(Exchange& ex, const MarketId& market_id, Timestamp now);

/// Payout in cents for a fractional number of winning shares at 1 euro each,
/// rounded half-even.
Cents share_payout(double winning_shares);

/// Resolves a HALTED binary market against the announced transfer price and
/// pays every winning position. At-most-once: a settled market refuses.
SettlementReport resolve_and_settle(Exchange& ex, const MarketId& market_id,
                                    Cents announced_price, Timestamp now);

/// Settles a joint market from the resolutions of its two base markets.
/// Halts the joint market first if it is still open.
SettlementReport settle_joint(Exchange& ex, const MarketId& joint_id, Timestamp now);

/// One point per OPEN or HALTED market on the asset, sorted by threshold.
ImpliedCurve implied_curve(const Exchange& ex, const AssetId& asset_id);

/// Adjacent pairs whose exceedance probability rises by more than epsilon.
/// Each such pair is a riskless purchase: HIGHER at the lower threshold plus
/// LOWER at the upper one costs p_i + 1 - p_{i+1} < 1 and pays at least 1.
std::vector<ArbitrageViolation> detect_arbitrage(const ImpliedCurve& curve, double epsilon);

/// Threshold at which the implied exceedance probability crosses 0.5, by
/// linear interpolation between ladder points; clamps to the end points.
/// Usable as a stand-alone value estimate for basket selection.
Cents median_crossing_value(const ImpliedCurve& curve);

/// market_id,account_id,outcome,shares,payout_cents
void export_settlement_csv(const SettlementReport& report, std::ostream& out);

}  // namespace toxmarket
