#include "toxmarket/exchange.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "toxmarket/csv.hpp"
#include "toxmarket/error.hpp"
#include "toxmarket/lmsr.hpp"

namespace toxmarket {

namespace {

std::string make_id(char prefix, std::uint64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06llu", prefix, static_cast<unsigned long long>(n));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

const char* to_string(MarketState s) noexcept {
  switch (s) {
    case MarketState::open: return "OPEN";
    case MarketState::halted: return "HALTED";
    case MarketState::settled: return "SETTLED";
  }
  return "UNKNOWN";
}

Cents Account::wagered_in(const MarketId& m) const {
  auto it = wagered.find(m);
  return it == wagered.end() ? Cents{} : it->second;
}

Exchange::Exchange(AssetRegistry& registry, ExchangeConfig config)
    : registry_(registry), config_(config) {
  if (!(config_.default_b > 0.0) || !std::isfinite(config_.default_b)) {
    fail(ErrorKind::invalid_argument, "default_b must be positive");
  }
  if (config_.wager_cap.value <= 0) fail(ErrorKind::invalid_argument, "wager cap must be positive");
  if (config_.starting_balance.value < 0) {
    fail(ErrorKind::invalid_argument, "starting balance must be non-negative");
  }
}

// Accounts -------------------------------------------------------------------

const Account& Exchange::open_account(std::optional<AccountId> id, Timestamp now) {
  AccountId account_id;
  if (id) {
    account_id = std::move(*id);
    if (account_id.empty()) fail(ErrorKind::invalid_argument, "account id is empty");
    if (accounts_.contains(account_id)) {
      fail(ErrorKind::conflict, "account '" + account_id + "' already exists");
    }
  } else {
    do {
      account_id = make_id('A', next_account_++);
    } while (accounts_.contains(account_id));
  }
  Account& acct = accounts_[account_id];
  acct.account_id = account_id;
  if (config_.starting_balance.value > 0) {
    acct.balance = config_.starting_balance;
    total_credits_ += config_.starting_balance;
    ledger_.push_back({LedgerKind::credit, account_id, config_.starting_balance, "opening", now});
  }
  return acct;
}

Cents Exchange::credit_account(const AccountId& id, Cents amount, Timestamp now) {
  if (amount.value <= 0) fail(ErrorKind::invalid_argument, "credit amount must be positive");
  Account& acct = mutable_account(id);
  acct.balance += amount;
  total_credits_ += amount;
  ledger_.push_back({LedgerKind::credit, id, amount, "top-up", now});
  return acct.balance;
}

const Account& Exchange::account(const AccountId& id) const {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) fail(ErrorKind::not_found, "unknown account '" + id + "'");
  return it->second;
}

Account& Exchange::mutable_account(const AccountId& id) {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) fail(ErrorKind::not_found, "unknown account '" + id + "'");
  return it->second;
}

// Markets --------------------------------------------------------------------

const Market& Exchange::create_market(const AssetId& asset_id, Cents threshold,
                                      std::optional<double> b, Timestamp cutoff, Timestamp now) {
  const Asset& asset = registry_.get(asset_id);
  if (asset.status == AssetStatus::settled) {
    fail(ErrorKind::conflict, "asset '" + asset_id + "' is already settled");
  }
  if (threshold.value <= 0) fail(ErrorKind::invalid_argument, "threshold must be positive");
  const double liquidity = b.value_or(config_.default_b);
  if (!(liquidity > 0.0) || !std::isfinite(liquidity)) {
    fail(ErrorKind::invalid_argument, "liquidity b must be positive and finite");
  }
  if (cutoff <= now) fail(ErrorKind::invalid_argument, "cutoff must be in the future");
  for (const Market* m : markets_for_asset(asset_id)) {
    if (m->threshold == threshold && m->book.state != MarketState::settled) {
      fail(ErrorKind::conflict, "asset '" + asset_id + "' already has a market at this threshold");
    }
  }

  Market m;
  m.market_id = make_id('M', next_market_++);
  m.asset_id = asset_id;
  m.threshold = threshold;
  m.book.q.assign(kBinaryOutcomes.size(), 0.0);
  m.book.b = liquidity;
  m.book.cutoff = cutoff;
  registry_.set_status(asset_id, AssetStatus::market_open);
  auto [it, inserted] = markets_.emplace(m.market_id, std::move(m));
  return it->second;
}

const Market& Exchange::market(const MarketId& id) const {
  auto it = markets_.find(id);
  if (it == markets_.end()) fail(ErrorKind::not_found, "unknown market '" + id + "'");
  return it->second;
}

std::vector<const Market*> Exchange::markets_for_asset(const AssetId& asset_id) const {
  std::vector<const Market*> out;
  for (const auto& [id, m] : markets_) {
    if (m.asset_id == asset_id) out.push_back(&m);
  }
  return out;
}

const JointMarket& Exchange::add_joint_market(JointMarket joint) {
  if (joint.book.q.size() != kJointOutcomes.size()) {
    fail(ErrorKind::invalid_argument, "joint market needs exactly four outcomes");
  }
  if (!(joint.book.b > 0.0) || !std::isfinite(joint.book.b)) {
    fail(ErrorKind::invalid_argument, "liquidity b must be positive and finite");
  }
  joint.joint_id = make_id('J', next_joint_++);
  auto [it, inserted] = joints_.emplace(joint.joint_id, std::move(joint));
  return it->second;
}

const JointMarket& Exchange::joint_market(const MarketId& id) const {
  auto it = joints_.find(id);
  if (it == joints_.end()) fail(ErrorKind::not_found, "unknown joint market '" + id + "'");
  return it->second;
}

const MakerBook& Exchange::book(const MarketId& id) const {
  if (auto it = markets_.find(id); it != markets_.end()) return it->second.book;
  if (auto it = joints_.find(id); it != joints_.end()) return it->second.book;
  fail(ErrorKind::not_found, "unknown market '" + id + "'");
}

MakerBook& Exchange::mutable_book(const MarketId& id) {
  return const_cast<MakerBook&>(std::as_const(*this).book(id));
}

std::span<const std::string_view> Exchange::outcome_names(const MarketId& id) const {
  if (is_joint(id)) return kJointOutcomes;
  (void)market(id);
  return kBinaryOutcomes;
}

std::size_t Exchange::outcome_index(const MarketId& id, std::string_view name) const {
  const auto names = outcome_names(id);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  fail(ErrorKind::invalid_argument, "unknown outcome '" + std::string(name) + "'");
}

// Pricing --------------------------------------------------------------------

std::vector<double> Exchange::prices(const MarketId& id) const {
  const MakerBook& bk = book(id);
  return lmsr::prices(bk.q, bk.b);
}

namespace {
void require_open(const MakerBook& bk, const MarketId& id) {
  if (bk.state != MarketState::open) {
    fail(ErrorKind::conflict, "market '" + id + "' is " + to_string(bk.state));
  }
}
}  // namespace

double Exchange::quote_buy(const MarketId& id, std::size_t outcome, double shares) const {
  const MakerBook& bk = book(id);
  require_open(bk, id);
  return lmsr::quote_buy(bk.q, bk.b, outcome, shares);
}

double Exchange::shares_for_spend(const MarketId& id, std::size_t outcome,
                                  double spend_euro) const {
  const MakerBook& bk = book(id);
  require_open(bk, id);
  return lmsr::shares_for_spend(bk.q, bk.b, outcome, spend_euro);
}

// Trading --------------------------------------------------------------------

const Trade& Exchange::execute_trade(const AccountId& account_id, const MarketId& market_id,
                                     std::size_t outcome, Cents spend, Timestamp now) {
  if (spend.value <= 0) fail(ErrorKind::invalid_argument, "spend must be positive");
  MakerBook& bk = mutable_book(market_id);
  Account& acct = mutable_account(account_id);
  require_open(bk, market_id);
  if (now >= bk.cutoff) fail(ErrorKind::conflict, "market '" + market_id + "' is past its cutoff");
  if (outcome >= bk.outcomes()) fail(ErrorKind::invalid_argument, "outcome out of range");
  if (acct.balance < spend) {
    fail(ErrorKind::conflict, "insufficient balance: " + format_euros(acct.balance) +
                                  " available, " + format_euros(spend) + " requested");
  }
  const Cents already = acct.wagered_in(market_id);
  if (already + spend > config_.wager_cap) {
    const Cents remaining = config_.wager_cap - already;
    fail(ErrorKind::conflict, "wager cap exceeded: remaining allowance " +
                                  format_euros(remaining) + " in market '" + market_id + "'");
  }

  const double spend_euro = spend.euros();
  double shares = lmsr::shares_for_spend(bk.q, bk.b, outcome, spend_euro);
  double quote = lmsr::quote_buy(bk.q, bk.b, outcome, shares);
  // Never hand out shares whose quote exceeds what is charged.
  while (quote > spend_euro) {
    shares = std::nextafter(shares, 0.0);
    quote = lmsr::quote_buy(bk.q, bk.b, outcome, shares);
  }
  const Cents cost = ceil_to_cents(quote);
  if (cost != spend) {
    fail(ErrorKind::invalid_argument, "spend too small to buy a representable share amount");
  }

  Trade trade;
  trade.trade_id = make_id('T', next_trade_);
  trade.account_id = account_id;
  trade.market_id = market_id;
  trade.outcome = outcome;
  trade.outcome_name = std::string(outcome_names(market_id)[outcome]);
  trade.shares = shares;
  trade.cost = cost;
  trade.quote = quote;
  trade.timestamp = now;

  const std::vector<double> saved_q = bk.q;
  const double saved_collected = bk.collected_real;
  const Account saved_account = acct;
  const Cents saved_take = maker_take_;
  const std::size_t saved_trades = trades_.size();
  const std::size_t saved_ledger = ledger_.size();
  try {
    bk.q[outcome] += shares;
    bk.collected_real += quote;
    fault_point("market_updated");

    acct.balance -= cost;
    auto& pos = acct.positions[market_id];
    pos.resize(bk.outcomes(), 0.0);
    pos[outcome] += shares;
    acct.wagered[market_id] += cost;
    fault_point("account_updated");

    maker_take_ += cost;
    trade.prices_after = lmsr::prices(bk.q, bk.b);
    trades_.push_back(std::move(trade));
    ledger_.push_back({LedgerKind::trade, account_id, cost, trades_.back().trade_id, now});
    fault_point("logged");
  } catch (...) {
    bk.q = saved_q;
    bk.collected_real = saved_collected;
    acct = saved_account;
    maker_take_ = saved_take;
    trades_.resize(saved_trades);
    ledger_.resize(saved_ledger);
    throw;
  }
  ++next_trade_;
  return trades_.back();
}

LedgerTotals Exchange::totals() const {
  LedgerTotals t;
  t.credits = total_credits_;
  t.maker_take = maker_take_;
  t.payouts = total_payouts_;
  for (const auto& [id, a] : accounts_) t.balances += a.balance;
  return t;
}

// Lifecycle ------------------------------------------------------------------

void Exchange::halt(const MarketId& id) {
  MakerBook& bk = mutable_book(id);
  if (bk.state == MarketState::open) bk.state = MarketState::halted;
}

void Exchange::commit_settlement(const MarketId& id, std::size_t winning_outcome,
                                 std::optional<Cents> announced_price,
                                 const std::vector<Payout>& payouts, Timestamp now) {
  MakerBook& bk = mutable_book(id);
  if (bk.state == MarketState::settled) fail(ErrorKind::conflict, "market already settled");
  if (bk.state != MarketState::halted) fail(ErrorKind::conflict, "market is not halted");
  if (winning_outcome >= bk.outcomes()) fail(ErrorKind::invalid_argument, "winner out of range");
  for (const Payout& p : payouts) {
    (void)account(p.account_id);
    if (p.amount.value < 0) fail(ErrorKind::invalid_argument, "negative payout");
  }

  // Validation is complete; nothing below can fail.
  for (const Payout& p : payouts) {
    if (p.amount.value == 0) continue;
    accounts_.at(p.account_id).balance += p.amount;
    total_payouts_ += p.amount;
    ledger_.push_back({LedgerKind::payout, p.account_id, p.amount, id, now});
  }
  double paid = 0.0;
  for (const auto& [aid, acct] : accounts_) {
    if (auto it = acct.positions.find(id); it != acct.positions.end()) paid += it->second[winning_outcome];
  }
  bk.paid_real = paid;
  bk.state = MarketState::settled;
  bk.winning_outcome = winning_outcome;
  bk.resolved_at = now;

  if (auto it = markets_.find(id); it != markets_.end()) {
    it->second.announced_price = announced_price;
    const AssetId& asset_id = it->second.asset_id;
    bool all_settled = true;
    for (const Market* m : markets_for_asset(asset_id)) {
      all_settled = all_settled && m->book.state == MarketState::settled;
    }
    if (all_settled) registry_.set_status(asset_id, AssetStatus::settled);
  }
}

std::vector<const Account*> Exchange::holders(const MarketId& id) const {
  std::vector<const Account*> out;
  for (const auto& [aid, acct] : accounts_) {
    auto it = acct.positions.find(id);
    if (it == acct.positions.end()) continue;
    for (double s : it->second) {
      if (s != 0.0) {
        out.push_back(&acct);
        break;
      }
    }
  }
  return out;
}

void export_trades_csv(const std::vector<Trade>& trades, std::ostream& out) {
  out << "trade_id,account_id,market_id,outcome,shares,cost_cents,timestamp\n";
  for (const Trade& t : trades) {
    out << csv::join({t.trade_id, t.account_id, t.market_id, t.outcome_name,
                      format_double(t.shares), std::to_string(t.cost.value),
                      std::to_string(to_epoch_seconds(t.timestamp))})
        << '\n';
  }
}

}  // namespace toxmarket
