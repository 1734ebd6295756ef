#include "toxmarket/settlement.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "toxmarket/csv.hpp"
#include "toxmarket/error.hpp"

namespace toxmarket {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

SettlementReport pay_winners(Exchange& ex, const MarketId& id, std::size_t winner,
                             std::optional<Cents> announced, Timestamp now) {
  SettlementReport report;
  report.market_id = id;
  report.winning_outcome = winner;
  const auto names = ex.outcome_names(id);
  for (const Account* acct : ex.holders(id)) {
    const auto& pos = acct->positions.at(id);
    for (std::size_t o = 0; o < pos.size(); ++o) {
      if (pos[o] == 0.0) continue;
      const Cents paid = o == winner ? share_payout(pos[o]) : Cents{};
      report.lines.push_back({id, acct->account_id, std::string(names[o]), pos[o], paid});
      if (paid.value > 0) report.payouts.push_back({acct->account_id, paid});
    }
  }
  ex.commit_settlement(id, winner, announced, report.payouts, now);
  return report;
}

}  // namespace

Outcome winning_outcome(Cents threshold, Cents announced_price) {
  return announced_price > threshold ? Outcome::higher : Outcome::lower;
}

MarketState halt_at_cutoff(Exchange& ex, const MarketId& market_id, Timestamp now) {
  const MakerBook& bk = ex.book(market_id);
  if (bk.state == MarketState::open && now >= bk.cutoff) ex.halt(market_id);
  return ex.book(market_id).state;
}

Cents share_payout(double winning_shares) { return round_half_even_cents(winning_shares); }

SettlementReport resolve_and_settle(Exchange& ex, const MarketId& market_id,
                                    Cents announced_price, Timestamp now) {
  const Market& m = ex.market(market_id);
  if (m.book.state == MarketState::settled) {
    fail(ErrorKind::conflict, "market '" + market_id + "' is already settled");
  }
  if (m.book.state != MarketState::halted) {
    fail(ErrorKind::conflict, "market '" + market_id + "' must be halted before settlement");
  }
  if (announced_price.value <= 0) {
    fail(ErrorKind::invalid_argument, "announced price must be positive");
  }
  const auto winner = static_cast<std::size_t>(winning_outcome(m.threshold, announced_price));
  return pay_winners(ex, market_id, winner, announced_price, now);
}

SettlementReport settle_joint(Exchange& ex, const MarketId& joint_id, Timestamp now) {
  const JointMarket& j = ex.joint_market(joint_id);
  if (j.book.state == MarketState::settled) {
    fail(ErrorKind::conflict, "joint market '" + joint_id + "' is already settled");
  }
  const Market& a = ex.market(j.event_a);
  const Market& b = ex.market(j.event_b);
  if (!a.book.winning_outcome || !b.book.winning_outcome) {
    fail(ErrorKind::conflict, "both base markets must be resolved first");
  }
  // HH, HL, LH, LL: first letter is event a.
  const std::size_t winner = *a.book.winning_outcome * 2 + *b.book.winning_outcome;
  ex.halt(joint_id);
  return pay_winners(ex, joint_id, winner, std::nullopt, now);
}

ImpliedCurve implied_curve(const Exchange& ex, const AssetId& asset_id) {
  ImpliedCurve curve;
  curve.asset_id = asset_id;
  for (const Market* m : ex.markets_for_asset(asset_id)) {
    if (m->book.state == MarketState::settled) continue;
    curve.points.push_back({m->threshold, ex.prices(m->market_id)[0]});
  }
  if (curve.points.empty()) {
    fail(ErrorKind::not_found, "no open or halted markets for asset '" + asset_id + "'");
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const CurvePoint& x, const CurvePoint& y) { return x.threshold < y.threshold; });
  return curve;
}

std::vector<ArbitrageViolation> detect_arbitrage(const ImpliedCurve& curve, double epsilon) {
  std::vector<ArbitrageViolation> out;
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
    const CurvePoint& lo = curve.points[i];
    const CurvePoint& hi = curve.points[i + 1];
    if (hi.p_exceed > lo.p_exceed + epsilon) {
      out.push_back({i, lo.threshold, hi.threshold, hi.p_exceed - lo.p_exceed});
    }
  }
  return out;
}

Cents median_crossing_value(const ImpliedCurve& curve) {
  const auto& pts = curve.points;
  if (pts.empty()) fail(ErrorKind::invalid_argument, "empty curve");
  if (pts.front().p_exceed <= 0.5) return pts.front().threshold;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double p0 = pts[i].p_exceed;
    const double p1 = pts[i + 1].p_exceed;
    if (p0 > 0.5 && p1 <= 0.5) {
      const double w = (p0 - 0.5) / (p0 - p1);
      const double t0 = static_cast<double>(pts[i].threshold.value);
      const double t1 = static_cast<double>(pts[i + 1].threshold.value);
      return Cents{static_cast<std::int64_t>(std::llround(t0 + w * (t1 - t0)))};
    }
  }
  return pts.back().threshold;
}

void export_settlement_csv(const SettlementReport& report, std::ostream& out) {
  out << "market_id,account_id,outcome,shares,payout_cents\n";
  for (const SettlementLine& l : report.lines) {
    out << csv::join({l.market_id, l.account_id, l.outcome, format_double(l.shares),
                      std::to_string(l.payout.value)})
        << '\n';
  }
}

}  // namespace toxmarket
