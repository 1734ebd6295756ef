#pragma once

#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "json.hpp"
#include "toxmarket/exchange.hpp"
#include "toxmarket/geo.hpp"
#include "toxmarket/journal.hpp"
#include "toxmarket/registry.hpp"

namespace toxmarket {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string journal_path;  // empty: state lives in memory only
  std::string admin_token;
  ExchangeConfig exchange;
  std::int64_t session_ttl_s = 86'400;
  std::string guidelines_path;

  void validate() const;
};

/// JSON keys: host, port, journal_path, admin_token, default_b,
/// wager_cap_cents, starting_balance_cents, session_ttl_s, guidelines_path.
ServiceConfig parse_service_config(std::istream& in);

/// TOXMARKET_HOST, TOXMARKET_PORT, TOXMARKET_JOURNAL and
/// TOXMARKET_ADMIN_TOKEN take precedence over the file.
void apply_env_overrides(ServiceConfig& config,
                         const std::function<const char*(const char*)>& getenv_fn);

struct ApiSession {
  std::string token;
  AccountId account_id;
  Timestamp issued_at;
  Timestamp expires_at;
};

/// Who is calling: the operator or one account holder.
struct Caller {
  bool admin = false;
  AccountId account_id;
};

using Clock = std::function<Timestamp()>;
using IdempotencyKey = std::optional<std::string>;

Timestamp system_now();

/// The running system: registry and exchange behind one reader/writer lock,
/// with every mutation recorded as an event in the journal before it is
/// acknowledged. Startup replays the journal through the same apply path.
class Service {
 public:
  explicit Service(ServiceConfig config, Clock clock = system_now);
  ~Service();

  const ServiceConfig& config() const { return config_; }

  /// Throws ErrorKind::unauthorized for unknown or expired tokens.
  Caller authenticate(std::string_view token) const;

  // Reads ------------------------------------------------------------------
  nlohmann::json list_assets(const std::optional<std::string>& county) const;
  nlohmann::json asset(const AssetId& id) const;
  nlohmann::json nearby_assets(geo::LatLon center, double radius_km) const;
  nlohmann::json list_markets(const std::optional<AssetId>& asset_id) const;
  nlohmann::json market(const MarketId& id) const;
  nlohmann::json quote(const MarketId& id, const std::string& outcome, Cents spend) const;
  nlohmann::json account(const Caller& caller, const AccountId& id) const;
  nlohmann::json curve(const AssetId& id) const;
  nlohmann::json joint_markets() const;
  std::string guidelines() const;
  /// Wager cap minus what the account already spent in the market.
  Cents remaining_allowance(const AccountId& account_id, const MarketId& market_id) const;

  /// Every externally observable piece of state, in a canonical order.
  nlohmann::json snapshot() const;

  // Mutations --------------------------------------------------------------
  nlohmann::json ingest_assets(const Caller& caller, const std::string& csv,
                               const IdempotencyKey& key = {});
  nlohmann::json open_account(const Caller& caller, std::optional<AccountId> id,
                              bool attested_adult, const IdempotencyKey& key = {});
  nlohmann::json issue_session(const Caller& caller, const AccountId& id,
                               const IdempotencyKey& key = {});
  nlohmann::json credit(const Caller& caller, const AccountId& id, Cents amount,
                        const IdempotencyKey& key = {});
  nlohmann::json create_market(const Caller& caller, const AssetId& asset_id, Cents threshold,
                               std::optional<double> b, Timestamp cutoff,
                               const IdempotencyKey& key = {});
  nlohmann::json create_joint_market(const Caller& caller, const MarketId& event_a,
                                     const MarketId& event_b, std::optional<double> b,
                                     const IdempotencyKey& key = {});
  nlohmann::json trade(const Caller& caller, const MarketId& market_id,
                       const std::string& outcome, Cents spend, const IdempotencyKey& key = {});
  nlohmann::json halt(const Caller& caller, const MarketId& market_id,
                      const IdempotencyKey& key = {});
  nlohmann::json settle(const Caller& caller, const MarketId& market_id,
                        std::optional<Cents> announced_price, const IdempotencyKey& key = {});

  /// Number of events applied since the empty state.
  std::uint64_t event_count() const;

  /// True once a journal write has failed. Memory may then hold an event the
  /// journal lacks, so every later call is refused until a restart replays.
  bool poisoned() const;

  /// Test seam forwarded to the journal.
  void set_journal_write_hook(std::function<void()> hook);

  /// Read-only access for tools that run module operations directly.
  const Exchange& exchange() const { return *exchange_; }
  const AssetRegistry& registry() const { return registry_; }

 private:
  struct Stored {
    std::string fingerprint;
    nlohmann::json response;
  };

  /// `generate` adds fields that must not count toward the idempotency
  /// fingerprint, such as freshly minted tokens.
  nlohmann::json commit(const Caller& caller, nlohmann::json event, const IdempotencyKey& key,
                        const std::function<void(nlohmann::json&)>& generate = {});
  nlohmann::json apply(const nlohmann::json& event);
  void require_admin(const Caller& caller) const;
  void check_usable() const;
  void add_session_fields(nlohmann::json& event);
  std::string new_token();

  ServiceConfig config_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  AssetRegistry registry_;
  std::unique_ptr<Exchange> exchange_;
  std::unique_ptr<Journal> journal_;
  std::map<std::string, ApiSession> sessions_;
  std::map<std::string, Stored> idempotent_;
  std::uint64_t applied_ = 0;
  bool poisoned_ = false;
};

}  // namespace toxmarket
