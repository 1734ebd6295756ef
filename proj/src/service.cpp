#include "toxmarket/service.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>

#include "toxmarket/combinatorial.hpp"
#include "toxmarket/error.hpp"
#include "toxmarket/lmsr.hpp"
#include "toxmarket/settlement.hpp"

namespace toxmarket {

using nlohmann::json;

namespace {

constexpr const char* kDefaultGuidelines =
    "# Valuation guidelines\n\n"
    "No guidelines document is configured for this deployment. Operators set "
    "`guidelines_path` to serve the asset valuation guidelines here.\n";

std::int64_t epoch(Timestamp t) { return to_epoch_seconds(t); }

json prices_json(const Exchange& ex, const MarketId& id, const std::vector<double>& p) {
  json out = json::object();
  const auto names = ex.outcome_names(id);
  for (std::size_t i = 0; i < p.size(); ++i) out[std::string(names[i])] = p[i];
  return out;
}

json asset_json(const Asset& a) {
  return {{"asset_id", a.asset_id},
          {"title", a.title},
          {"county", a.county},
          {"latitude", a.latitude},
          {"longitude", a.longitude},
          {"book_value_cents", a.book_value.value},
          {"loan_reference", a.loan_reference},
          {"status", to_string(a.status)}};
}

json book_json(const Exchange& ex, const MarketId& id, const MakerBook& book) {
  json j{{"state", to_string(book.state)},
         {"cutoff", epoch(book.cutoff)},
         {"b", book.b},
         {"outcomes", json::array()},
         {"prices", prices_json(ex, id, ex.prices(id))}};
  for (auto n : ex.outcome_names(id)) j["outcomes"].push_back(std::string(n));
  if (book.winning_outcome) {
    j["winning_outcome"] = std::string(ex.outcome_names(id)[*book.winning_outcome]);
  }
  if (book.resolved_at) j["resolved_at"] = epoch(*book.resolved_at);
  return j;
}

json market_json(const Exchange& ex, const Market& m) {
  json j = book_json(ex, m.market_id, m.book);
  j["market_id"] = m.market_id;
  j["asset_id"] = m.asset_id;
  j["threshold_cents"] = m.threshold.value;
  if (m.announced_price) j["announced_price_cents"] = m.announced_price->value;
  return j;
}

json joint_json(const Exchange& ex, const JointMarket& jm) {
  json j = book_json(ex, jm.joint_id, jm.book);
  j["market_id"] = jm.joint_id;
  j["event_a"] = jm.event_a;
  j["event_b"] = jm.event_b;
  return j;
}

json any_market_json(const Exchange& ex, const MarketId& id) {
  if (ex.is_joint(id)) return joint_json(ex, ex.joint_market(id));
  return market_json(ex, ex.market(id));
}

json report_json(const Exchange& ex, const SettlementReport& r) {
  json j{{"market_id", r.market_id},
         {"winning_outcome", std::string(ex.outcome_names(r.market_id)[r.winning_outcome])},
         {"payouts", json::array()},
         {"lines", json::array()}};
  for (const auto& p : r.payouts) {
    j["payouts"].push_back({{"account_id", p.account_id}, {"payout_cents", p.amount.value}});
  }
  for (const auto& l : r.lines) {
    j["lines"].push_back({{"account_id", l.account_id},
                          {"outcome", l.outcome},
                          {"shares", l.shares},
                          {"payout_cents", l.payout.value}});
  }
  return j;
}

template <class T>
T field(const json& e, const char* key) {
  return e.at(key).get<T>();
}

std::optional<double> optional_double(const json& e, const char* key) {
  if (!e.contains(key) || e.at(key).is_null()) return std::nullopt;
  return e.at(key).get<double>();
}

}  // namespace

Timestamp system_now() {
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

// Config -----------------------------------------------------------------------

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) fail(ErrorKind::invalid_argument, "port out of range");
  if (admin_token.empty()) fail(ErrorKind::invalid_argument, "admin_token must be set");
  if (session_ttl_s <= 0) fail(ErrorKind::invalid_argument, "session_ttl_s must be positive");
  if (!(exchange.default_b > 0.0) || !std::isfinite(exchange.default_b)) {
    fail(ErrorKind::invalid_argument, "default_b must be positive");
  }
  if (exchange.wager_cap.value <= 0) fail(ErrorKind::invalid_argument, "wager cap must be positive");
  if (exchange.starting_balance.value < 0) {
    fail(ErrorKind::invalid_argument, "starting balance must be non-negative");
  }
}

ServiceConfig parse_service_config(std::istream& in) {
  ServiceConfig c;
  try {
    const json j = json::parse(in);
    if (!j.is_object()) fail(ErrorKind::invalid_argument, "service config must be an object");
    if (j.contains("host")) c.host = j.at("host").get<std::string>();
    if (j.contains("port")) c.port = j.at("port").get<int>();
    if (j.contains("journal_path")) c.journal_path = j.at("journal_path").get<std::string>();
    if (j.contains("admin_token")) c.admin_token = j.at("admin_token").get<std::string>();
    if (j.contains("default_b")) c.exchange.default_b = j.at("default_b").get<double>();
    if (j.contains("wager_cap_cents")) {
      c.exchange.wager_cap = Cents{j.at("wager_cap_cents").get<std::int64_t>()};
    }
    if (j.contains("starting_balance_cents")) {
      c.exchange.starting_balance = Cents{j.at("starting_balance_cents").get<std::int64_t>()};
    }
    if (j.contains("session_ttl_s")) c.session_ttl_s = j.at("session_ttl_s").get<std::int64_t>();
    if (j.contains("guidelines_path")) c.guidelines_path = j.at("guidelines_path").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_argument, std::string("service config: ") + e.what());
  }
  return c;
}

void apply_env_overrides(ServiceConfig& c,
                         const std::function<const char*(const char*)>& getenv_fn) {
  if (const char* v = getenv_fn("TOXMARKET_HOST")) c.host = v;
  if (const char* v = getenv_fn("TOXMARKET_PORT")) {
    try {
      c.port = std::stoi(v);
    } catch (const std::exception&) {
      fail(ErrorKind::invalid_argument, "TOXMARKET_PORT is not a number");
    }
  }
  if (const char* v = getenv_fn("TOXMARKET_JOURNAL")) c.journal_path = v;
  if (const char* v = getenv_fn("TOXMARKET_ADMIN_TOKEN")) c.admin_token = v;
}

// Lifecycle --------------------------------------------------------------------

Service::Service(ServiceConfig config, Clock clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
  config_.validate();
  exchange_ = std::make_unique<Exchange>(registry_, config_.exchange);
  if (config_.journal_path.empty()) return;
  std::vector<JournalEntry> existing;
  journal_ = std::make_unique<Journal>(config_.journal_path, existing);
  for (const JournalEntry& entry : existing) {
    try {
      apply(entry.event);
    } catch (const std::exception& e) {
      fail(ErrorKind::corrupt, "journal corrupt at byte offset " + std::to_string(entry.offset) +
                                   ": event does not replay: " + e.what());
    }
  }
}

Service::~Service() = default;

std::uint64_t Service::event_count() const {
  std::shared_lock lock(mutex_);
  return applied_;
}

bool Service::poisoned() const {
  std::shared_lock lock(mutex_);
  return poisoned_;
}

void Service::set_journal_write_hook(std::function<void()> hook) {
  std::unique_lock lock(mutex_);
  if (journal_) journal_->set_write_hook(std::move(hook));
}

void Service::check_usable() const {
  if (poisoned_) fail(ErrorKind::io, "service stopped accepting requests after a journal failure");
}

void Service::require_admin(const Caller& caller) const {
  if (!caller.admin) fail(ErrorKind::unauthorized, "operator token required");
}

void Service::add_session_fields(json& event) {
  event["token"] = new_token();
  event["expires_at"] = event.at("at").get<std::int64_t>() + config_.session_ttl_s;
}

std::string Service::new_token() {
  static thread_local std::random_device rd;
  std::array<std::uint32_t, 4> words{rd(), rd(), rd(), rd()};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%08x%08x%08x%08x", words[0], words[1], words[2], words[3]);
  return buf;
}

Caller Service::authenticate(std::string_view token) const {
  if (token.empty()) fail(ErrorKind::unauthorized, "missing bearer token");
  if (token == config_.admin_token) return Caller{true, {}};
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(std::string(token));
  if (it == sessions_.end()) fail(ErrorKind::unauthorized, "unknown token");
  if (clock_() >= it->second.expires_at) fail(ErrorKind::unauthorized, "token expired");
  return Caller{false, it->second.account_id};
}

// Event application ------------------------------------------------------------

json Service::commit(const Caller& caller, json event, const IdempotencyKey& key,
                     const std::function<void(json&)>& generate) {
  std::unique_lock lock(mutex_);
  check_usable();
  std::string scoped;
  std::string fingerprint;
  if (key) {
    if (key->empty()) fail(ErrorKind::invalid_argument, "idempotency key is empty");
    scoped = (caller.admin ? std::string("admin") : "acct:" + caller.account_id) + "/" + *key;
    fingerprint = event.dump();
    auto it = idempotent_.find(scoped);
    if (it != idempotent_.end()) {
      if (it->second.fingerprint != fingerprint) {
        fail(ErrorKind::conflict, "idempotency key reused with a different request");
      }
      return it->second.response;
    }
    event["idempotency"] = {{"scope", scoped}, {"fingerprint", fingerprint}};
  }
  event["at"] = epoch(clock_());
  if (generate) generate(event);

  json result = apply(event);
  if (journal_) {
    try {
      journal_->append(event);
    } catch (...) {
      poisoned_ = true;
      throw;
    }
  }
  return result;
}

json Service::apply(const json& event) {
  const std::string op = field<std::string>(event, "op");
  const Timestamp at = from_epoch_seconds(field<std::int64_t>(event, "at"));
  json result;
  if (op == "ingest") {
    std::istringstream in(field<std::string>(event, "csv"));
    const IngestReport rep = registry_.ingest(in);
    result = {{"accepted", rep.accepted}, {"accepted_ids", rep.accepted_ids},
              {"rejected", json::array()}};
    for (const auto& r : rep.rejected) {
      result["rejected"].push_back({{"line", r.line}, {"reason", r.reason}});
    }
  } else if (op == "open_account") {
    std::optional<AccountId> id;
    if (event.contains("account_id")) id = field<std::string>(event, "account_id");
    const Account& a = exchange_->open_account(id, at);
    const ApiSession s{field<std::string>(event, "token"), a.account_id, at,
                       from_epoch_seconds(field<std::int64_t>(event, "expires_at"))};
    sessions_[s.token] = s;
    result = {{"account_id", a.account_id},
              {"balance_cents", a.balance.value},
              {"token", s.token},
              {"expires_at", epoch(s.expires_at)}};
  } else if (op == "issue_session") {
    const Account& a = exchange_->account(field<std::string>(event, "account_id"));
    const ApiSession s{field<std::string>(event, "token"), a.account_id, at,
                       from_epoch_seconds(field<std::int64_t>(event, "expires_at"))};
    sessions_[s.token] = s;
    result = {{"account_id", a.account_id}, {"token", s.token}, {"expires_at", epoch(s.expires_at)}};
  } else if (op == "credit") {
    const AccountId id = field<std::string>(event, "account_id");
    const Cents bal = exchange_->credit_account(id, Cents{field<std::int64_t>(event, "amount_cents")}, at);
    result = {{"account_id", id}, {"balance_cents", bal.value}};
  } else if (op == "create_market") {
    const Market& m = exchange_->create_market(
        field<std::string>(event, "asset_id"), Cents{field<std::int64_t>(event, "threshold_cents")},
        optional_double(event, "b"), from_epoch_seconds(field<std::int64_t>(event, "cutoff")), at);
    result = market_json(*exchange_, m);
  } else if (op == "create_joint_market") {
    const double b = optional_double(event, "b").value_or(exchange_->config().default_b);
    const JointMarket& jm = toxmarket::create_joint_market(
        *exchange_, field<std::string>(event, "event_a"), field<std::string>(event, "event_b"), b);
    result = joint_json(*exchange_, jm);
  } else if (op == "trade") {
    const MarketId mid = field<std::string>(event, "market_id");
    const AccountId aid = field<std::string>(event, "account_id");
    const std::size_t o = exchange_->outcome_index(mid, field<std::string>(event, "outcome"));
    const Trade& t =
        exchange_->execute_trade(aid, mid, o, Cents{field<std::int64_t>(event, "spend_cents")}, at);
    const Account& a = exchange_->account(aid);
    result = {{"trade_id", t.trade_id},
              {"account_id", t.account_id},
              {"market_id", t.market_id},
              {"outcome", t.outcome_name},
              {"shares", t.shares},
              {"cost_cents", t.cost.value},
              {"prices_after", prices_json(*exchange_, mid, t.prices_after)},
              {"balance_cents", a.balance.value},
              {"remaining_allowance_cents",
               (exchange_->config().wager_cap - a.wagered_in(mid)).value},
              {"timestamp", epoch(t.timestamp)}};
  } else if (op == "halt") {
    const MarketId mid = field<std::string>(event, "market_id");
    exchange_->book(mid);
    exchange_->halt(mid);
    result = any_market_json(*exchange_, mid);
  } else if (op == "settle") {
    const MarketId mid = field<std::string>(event, "market_id");
    SettlementReport rep;
    if (exchange_->is_joint(mid)) {
      rep = settle_joint(*exchange_, mid, at);
    } else {
      if (!event.contains("announced_price_cents")) {
        fail(ErrorKind::invalid_argument, "announced_price_cents is required");
      }
      if (halt_at_cutoff(*exchange_, mid, at) == MarketState::open) {
        fail(ErrorKind::conflict, "market " + mid + " is open until its cutoff; halt it first");
      }
      rep = resolve_and_settle(*exchange_, mid, Cents{field<std::int64_t>(event, "announced_price_cents")}, at);
    }
    result = report_json(*exchange_, rep);
  } else {
    fail(ErrorKind::invalid_argument, "unknown event '" + op + "'");
  }

  if (event.contains("idempotency")) {
    const json& idem = event.at("idempotency");
    idempotent_[idem.at("scope").get<std::string>()] = {idem.at("fingerprint").get<std::string>(),
                                                        result};
  }
  ++applied_;
  return result;
}

// Mutations --------------------------------------------------------------------

json Service::ingest_assets(const Caller& caller, const std::string& csv, const IdempotencyKey& key) {
  require_admin(caller);
  return commit(caller, {{"op", "ingest"}, {"csv", csv}}, key);
}

json Service::open_account(const Caller& caller, std::optional<AccountId> id, bool attested_adult,
                           const IdempotencyKey& key) {
  require_admin(caller);
  if (!attested_adult) fail(ErrorKind::invalid_argument, "participants must be attested adults");
  json e{{"op", "open_account"}, {"attested_adult", true}};
  if (id) e["account_id"] = *id;
  return commit(caller, std::move(e), key, [this](json& ev) { add_session_fields(ev); });
}

json Service::issue_session(const Caller& caller, const AccountId& id, const IdempotencyKey& key) {
  require_admin(caller);
  return commit(caller, {{"op", "issue_session"}, {"account_id", id}}, key,
                [this](json& ev) { add_session_fields(ev); });
}

json Service::credit(const Caller& caller, const AccountId& id, Cents amount,
                     const IdempotencyKey& key) {
  require_admin(caller);
  return commit(caller, {{"op", "credit"}, {"account_id", id}, {"amount_cents", amount.value}}, key);
}

json Service::create_market(const Caller& caller, const AssetId& asset_id, Cents threshold,
                            std::optional<double> b, Timestamp cutoff, const IdempotencyKey& key) {
  require_admin(caller);
  json e{{"op", "create_market"},
         {"asset_id", asset_id},
         {"threshold_cents", threshold.value},
         {"cutoff", epoch(cutoff)}};
  if (b) e["b"] = *b;
  return commit(caller, std::move(e), key);
}

json Service::create_joint_market(const Caller& caller, const MarketId& event_a,
                                  const MarketId& event_b, std::optional<double> b,
                                  const IdempotencyKey& key) {
  require_admin(caller);
  json e{{"op", "create_joint_market"}, {"event_a", event_a}, {"event_b", event_b}};
  if (b) e["b"] = *b;
  return commit(caller, std::move(e), key);
}

json Service::trade(const Caller& caller, const MarketId& market_id, const std::string& outcome,
                    Cents spend, const IdempotencyKey& key) {
  if (caller.admin || caller.account_id.empty()) {
    fail(ErrorKind::unauthorized, "trades need an account token");
  }
  return commit(caller,
                {{"op", "trade"},
                 {"account_id", caller.account_id},
                 {"market_id", market_id},
                 {"outcome", outcome},
                 {"spend_cents", spend.value}},
                key);
}

json Service::halt(const Caller& caller, const MarketId& market_id, const IdempotencyKey& key) {
  require_admin(caller);
  return commit(caller, {{"op", "halt"}, {"market_id", market_id}}, key);
}

json Service::settle(const Caller& caller, const MarketId& market_id,
                     std::optional<Cents> announced_price, const IdempotencyKey& key) {
  require_admin(caller);
  json e{{"op", "settle"}, {"market_id", market_id}};
  if (announced_price) e["announced_price_cents"] = announced_price->value;
  return commit(caller, std::move(e), key);
}

// Reads ------------------------------------------------------------------------

json Service::list_assets(const std::optional<std::string>& county) const {
  std::shared_lock lock(mutex_);
  check_usable();
  json out = json::array();
  for (const auto& [id, a] : registry_.assets()) {
    if (county && a.county != *county) continue;
    out.push_back(asset_json(a));
  }
  return out;
}

json Service::asset(const AssetId& id) const {
  std::shared_lock lock(mutex_);
  check_usable();
  json j = asset_json(registry_.get(id));
  j["markets"] = json::array();
  for (const Market* m : exchange_->markets_for_asset(id)) j["markets"].push_back(m->market_id);
  return j;
}

json Service::nearby_assets(geo::LatLon center, double radius_km) const {
  std::shared_lock lock(mutex_);
  check_usable();
  json out = json::array();
  for (const NearbyAsset& n : registry_.nearby(center, radius_km)) {
    json j = asset_json(*n.asset);
    j["distance_km"] = n.distance_km;
    out.push_back(std::move(j));
  }
  return out;
}

json Service::list_markets(const std::optional<AssetId>& asset_id) const {
  std::shared_lock lock(mutex_);
  check_usable();
  json out = json::array();
  for (const auto& [id, m] : exchange_->markets()) {
    if (asset_id && m.asset_id != *asset_id) continue;
    json j = market_json(*exchange_, m);
    if (const Asset* a = registry_.find(m.asset_id)) {
      j["asset_title"] = a->title;
      j["county"] = a->county;
    }
    out.push_back(std::move(j));
  }
  return out;
}

json Service::market(const MarketId& id) const {
  std::shared_lock lock(mutex_);
  check_usable();
  return any_market_json(*exchange_, id);
}

json Service::quote(const MarketId& id, const std::string& outcome, Cents spend) const {
  std::shared_lock lock(mutex_);
  check_usable();
  const MakerBook& book = exchange_->book(id);
  const std::size_t o = exchange_->outcome_index(id, outcome);
  if (spend.value <= 0) fail(ErrorKind::invalid_argument, "spend must be positive");
  const double shares = exchange_->shares_for_spend(id, o, spend.euros());
  std::vector<double> q = book.q;
  q[o] += shares;
  const std::vector<double> after = lmsr::prices(q, book.b);
  return {{"market_id", id},
          {"outcome", outcome},
          {"spend_cents", spend.value},
          {"shares", shares},
          {"prices_before", prices_json(*exchange_, id, exchange_->prices(id))},
          {"prices_after", prices_json(*exchange_, id, after)}};
}

json Service::account(const Caller& caller, const AccountId& id) const {
  if (!caller.admin && caller.account_id != id) {
    fail(ErrorKind::unauthorized, "token does not grant access to account '" + id + "'");
  }
  std::shared_lock lock(mutex_);
  check_usable();
  const Account& a = exchange_->account(id);
  const Cents cap = exchange_->config().wager_cap;
  json j{{"account_id", a.account_id},
         {"balance_cents", a.balance.value},
         {"wager_cap_cents", cap.value},
         {"positions", json::array()},
         {"settlements", json::array()}};
  for (const auto& [mid, shares] : a.positions) {
    json p{{"market_id", mid},
           {"shares", prices_json(*exchange_, mid, shares)},
           {"wagered_cents", a.wagered_in(mid).value},
           {"remaining_allowance_cents", (cap - a.wagered_in(mid)).value},
           {"state", to_string(exchange_->book(mid).state)}};
    j["positions"].push_back(std::move(p));
  }
  for (const LedgerEntry& e : exchange_->ledger()) {
    if (e.kind == LedgerKind::payout && e.account_id == id) {
      j["settlements"].push_back({{"market_id", e.reference}, {"payout_cents", e.amount.value}});
    }
  }
  return j;
}

json Service::curve(const AssetId& id) const {
  std::shared_lock lock(mutex_);
  check_usable();
  registry_.get(id);
  json j{{"asset_id", id}, {"points", json::array()}, {"violations", json::array()}};
  if (exchange_->markets_for_asset(id).empty()) return j;
  ImpliedCurve c;
  try {
    c = implied_curve(*exchange_, id);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::not_found) throw;
    return j;
  }
  for (const auto& p : c.points) {
    j["points"].push_back({{"threshold_cents", p.threshold.value}, {"p_exceed", p.p_exceed}});
  }
  for (const auto& v : detect_arbitrage(c, 0.0)) {
    j["violations"].push_back({{"lower_threshold_cents", v.lower_threshold.value},
                               {"upper_threshold_cents", v.upper_threshold.value},
                               {"excess", v.excess}});
  }
  return j;
}

json Service::joint_markets() const {
  std::shared_lock lock(mutex_);
  check_usable();
  json out = json::array();
  for (const auto& [id, jm] : exchange_->joint_markets()) out.push_back(joint_json(*exchange_, jm));
  return out;
}

Cents Service::remaining_allowance(const AccountId& account_id, const MarketId& market_id) const {
  std::shared_lock lock(mutex_);
  check_usable();
  return exchange_->config().wager_cap - exchange_->account(account_id).wagered_in(market_id);
}

std::string Service::guidelines() const {
  if (config_.guidelines_path.empty()) return kDefaultGuidelines;
  std::ifstream in(config_.guidelines_path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "guidelines document is unavailable");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json Service::snapshot() const {
  std::shared_lock lock(mutex_);
  check_usable();
  json s;
  s["events"] = applied_;
  s["assets"] = json::array();
  for (const auto& [id, a] : registry_.assets()) s["assets"].push_back(asset_json(a));
  s["markets"] = json::array();
  auto book_state = [](const MakerBook& b) {
    json j{{"q", b.q},
           {"b", b.b},
           {"state", to_string(b.state)},
           {"cutoff", epoch(b.cutoff)},
           {"collected_real", b.collected_real},
           {"paid_real", b.paid_real}};
    if (b.winning_outcome) j["winning_outcome"] = *b.winning_outcome;
    if (b.resolved_at) j["resolved_at"] = epoch(*b.resolved_at);
    return j;
  };
  for (const auto& [id, m] : exchange_->markets()) {
    json j = book_state(m.book);
    j["market_id"] = id;
    j["asset_id"] = m.asset_id;
    j["threshold_cents"] = m.threshold.value;
    if (m.announced_price) j["announced_price_cents"] = m.announced_price->value;
    s["markets"].push_back(std::move(j));
  }
  s["joint_markets"] = json::array();
  for (const auto& [id, jm] : exchange_->joint_markets()) {
    json j = book_state(jm.book);
    j["market_id"] = id;
    j["event_a"] = jm.event_a;
    j["event_b"] = jm.event_b;
    s["joint_markets"].push_back(std::move(j));
  }
  s["accounts"] = json::array();
  for (const auto& [id, a] : exchange_->accounts()) {
    json w = json::object();
    for (const auto& [mid, c] : a.wagered) w[mid] = c.value;
    s["accounts"].push_back(
        {{"account_id", id}, {"balance_cents", a.balance.value}, {"positions", a.positions}, {"wagered", w}});
  }
  s["trades"] = json::array();
  for (const Trade& t : exchange_->trades()) {
    s["trades"].push_back({{"trade_id", t.trade_id},
                           {"account_id", t.account_id},
                           {"market_id", t.market_id},
                           {"outcome", t.outcome},
                           {"shares", t.shares},
                           {"cost_cents", t.cost.value},
                           {"quote", t.quote},
                           {"timestamp", epoch(t.timestamp)}});
  }
  s["ledger"] = json::array();
  for (const LedgerEntry& e : exchange_->ledger()) {
    s["ledger"].push_back({static_cast<int>(e.kind), e.account_id, e.amount.value, e.reference,
                           epoch(e.timestamp)});
  }
  const LedgerTotals t = exchange_->totals();
  s["totals"] = {{"credits", t.credits.value},
                 {"balances", t.balances.value},
                 {"maker_take", t.maker_take.value},
                 {"payouts", t.payouts.value}};
  s["sessions"] = json::array();
  for (const auto& [tok, ss] : sessions_) {
    s["sessions"].push_back({tok, ss.account_id, epoch(ss.issued_at), epoch(ss.expires_at)});
  }
  s["idempotency"] = json::array();
  for (const auto& [k, st] : idempotent_) s["idempotency"].push_back({k, st.response});
  return s;
}

}  // namespace toxmarket
