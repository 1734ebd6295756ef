#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toxmarket/money.hpp"
#include "toxmarket/registry.hpp"

namespace toxmarket {

using MarketId = std::string;
using AccountId = std::string;
using TradeId = std::string;

enum class MarketState { open, halted, settled };

const char* to_string(MarketState s) noexcept;

/// Binary market outcome indices.
enum class Outcome : std::size_t { higher = 0, lower = 1 };

inline constexpr std::array<std::string_view, 2> kBinaryOutcomes{"HIGHER", "LOWER"};
inline constexpr std::array<std::string_view, 4> kJointOutcomes{"HH", "HL", "LH", "LL"};

struct ExchangeConfig {
  double default_b = 100.0;
  Cents wager_cap{100'000};             // 1,000.00 per account per market
  Cents starting_balance{1'000'000};    // 10,000.00
};

/// Scoring-rule maker state shared by binary and joint markets.
struct MakerBook {
  std::vector<double> q;
  double b = 0.0;
  MarketState state = MarketState::open;
  Timestamp cutoff{};
  std::optional<std::size_t> winning_outcome;
  std::optional<Timestamp> resolved_at;
  double collected_real = 0.0;  // sum of pre-rounding quotes charged
  double paid_real = 0.0;       // sum of winning shares at settlement

  std::size_t outcomes() const { return q.size(); }
};

struct Market {
  MarketId market_id;
  AssetId asset_id;
  Cents threshold;
  MakerBook book;
  std::optional<Cents> announced_price;
};

struct JointMarket {
  MarketId joint_id;
  MarketId event_a;
  MarketId event_b;
  MakerBook book;
};

struct Account {
  AccountId account_id;
  Cents balance;
  std::map<MarketId, std::vector<double>> positions;
  std::map<MarketId, Cents> wagered;

  Cents wagered_in(const MarketId& m) const;
};

struct Trade {
  TradeId trade_id;
  AccountId account_id;
  MarketId market_id;
  std::size_t outcome = 0;
  std::string outcome_name;
  double shares = 0.0;
  Cents cost;
  double quote = 0.0;  // real euro charge before rounding
  Timestamp timestamp{};
  std::vector<double> prices_after;
};

enum class LedgerKind { credit, trade, payout };

struct LedgerEntry {
  LedgerKind kind = LedgerKind::credit;
  AccountId account_id;
  Cents amount;
  std::string reference;  // trade id or market id
  Timestamp timestamp{};
};

struct Payout {
  AccountId account_id;
  Cents amount;
};

/// Totals behind the conservation identity
/// credits == balances + maker_take - payouts.
struct LedgerTotals {
  Cents credits;
  Cents balances;
  Cents maker_take;
  Cents payouts;

  bool conserved() const { return credits == balances + maker_take - payouts; }
};

/// Markets, accounts and the scrip ledger. Not internally synchronized:
/// callers serialize mutations (the service holds one writer lock).
class Exchange {
 public:
  explicit Exchange(AssetRegistry& registry, ExchangeConfig config = {});

  const ExchangeConfig& config() const { return config_; }
  AssetRegistry& registry() { return registry_; }
  const AssetRegistry& registry() const { return registry_; }

  // Accounts ---------------------------------------------------------------

  /// Opens an account funded with the configured starting balance (recorded
  /// as a credit). Generates an id when none is given.
  const Account& open_account(std::optional<AccountId> id, Timestamp now);
  Cents credit_account(const AccountId& id, Cents amount, Timestamp now);
  const Account& account(const AccountId& id) const;
  const std::map<AccountId, Account>& accounts() const { return accounts_; }

  // Markets ----------------------------------------------------------------

  const Market& create_market(const AssetId& asset_id, Cents threshold, std::optional<double> b,
                              Timestamp cutoff, Timestamp now);
  const Market& market(const MarketId& id) const;
  const std::map<MarketId, Market>& markets() const { return markets_; }
  std::vector<const Market*> markets_for_asset(const AssetId& asset_id) const;

  /// Registers a joint market built by the combinatorial layer, assigning
  /// its id.
  const JointMarket& add_joint_market(JointMarket joint);
  const JointMarket& joint_market(const MarketId& id) const;
  const std::map<MarketId, JointMarket>& joint_markets() const { return joints_; }

  /// Book of a binary or joint market.
  const MakerBook& book(const MarketId& id) const;
  bool is_joint(const MarketId& id) const { return joints_.contains(id); }
  std::span<const std::string_view> outcome_names(const MarketId& id) const;
  std::size_t outcome_index(const MarketId& id, std::string_view name) const;

  // Pricing ----------------------------------------------------------------

  std::vector<double> prices(const MarketId& id) const;
  double quote_buy(const MarketId& id, std::size_t outcome, double shares) const;
  double shares_for_spend(const MarketId& id, std::size_t outcome, double spend_euro) const;

  // Trading ----------------------------------------------------------------

  /// Spend-driven purchase. All-or-nothing: on any error q, the account and
  /// the logs are left exactly as they were.
  const Trade& execute_trade(const AccountId& account_id, const MarketId& market_id,
                             std::size_t outcome, Cents spend, Timestamp now);

  const std::vector<Trade>& trades() const { return trades_; }
  const std::vector<LedgerEntry>& ledger() const { return ledger_; }
  LedgerTotals totals() const;

  // Lifecycle primitives used by settlement --------------------------------

  /// OPEN -> HALTED. No-op when already halted.
  void halt(const MarketId& id);

  /// HALTED -> SETTLED with the given winner; credits every payout. Records
  /// announced price for binary markets. Atomic.
  void commit_settlement(const MarketId& id, std::size_t winning_outcome,
                         std::optional<Cents> announced_price, const std::vector<Payout>& payouts,
                         Timestamp now);

  /// Accounts holding a non-zero position in the market.
  std::vector<const Account*> holders(const MarketId& id) const;

  /// Test seam: invoked between the partial mutations of execute_trade.
  /// Throwing from it must leave no trace of the trade.
  void set_fault_hook(std::function<void(std::string_view stage)> hook) {
    fault_hook_ = std::move(hook);
  }

 private:
  MakerBook& mutable_book(const MarketId& id);
  Account& mutable_account(const AccountId& id);
  void fault_point(std::string_view stage) const {
    if (fault_hook_) fault_hook_(stage);
  }

  AssetRegistry& registry_;
  ExchangeConfig config_;
  std::map<AccountId, Account> accounts_;
  std::map<MarketId, Market> markets_;
  std::map<MarketId, JointMarket> joints_;
  std::vector<Trade> trades_;
  std::vector<LedgerEntry> ledger_;
  Cents total_credits_;
  Cents maker_take_;
  Cents total_payouts_;
  std::uint64_t next_account_ = 1;
  std::uint64_t next_market_ = 1;
  std::uint64_t next_joint_ = 1;
  std::uint64_t next_trade_ = 1;
  std::function<void(std::string_view)> fault_hook_;
};

/// Delimited export of the trade log:
/// trade_id,account_id,market_id,outcome,shares,cost_cents,timestamp
void export_trades_csv(const std::vector<Trade>& trades, std::ostream& out);

}  // namespace toxmarket
