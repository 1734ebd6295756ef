#include "toxmarket/api.hpp"

#include <charconv>
#include <cmath>
#include <vector>

namespace toxmarket {

using nlohmann::json;

int http_status(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return 400;
    case ErrorKind::unauthorized: return 401;
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::rejected_record: return 422;
    case ErrorKind::io:
    case ErrorKind::corrupt: return 503;
  }
  return 500;
}

namespace {

std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    std::size_t next = path.find('/', pos);
    if (next == std::string::npos) next = path.size();
    if (next > pos) out.push_back(path.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

ApiResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump()};
}

ApiResponse error_response(ErrorKind kind, const std::string& message) {
  return json_response(http_status(kind), {{"error", to_string(kind)}, {"message", message}});
}

json parse_body(const ApiRequest& r) {
  if (r.body.empty()) return json::object();
  json j;
  try {
    j = json::parse(r.body);
  } catch (const json::exception&) {
    fail(ErrorKind::invalid_argument, "body is not valid JSON");
  }
  if (!j.is_object()) fail(ErrorKind::invalid_argument, "body must be a JSON object");
  return j;
}

std::int64_t body_int(const json& b, const char* key) {
  if (!b.contains(key)) fail(ErrorKind::invalid_argument, std::string("missing field '") + key + "'");
  const json& v = b.at(key);
  if (!v.is_number_integer()) {
    fail(ErrorKind::invalid_argument, std::string("field '") + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::string body_string(const json& b, const char* key) {
  if (!b.contains(key)) fail(ErrorKind::invalid_argument, std::string("missing field '") + key + "'");
  const json& v = b.at(key);
  if (!v.is_string()) fail(ErrorKind::invalid_argument, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> body_opt_string(const json& b, const char* key) {
  if (!b.contains(key) || b.at(key).is_null()) return std::nullopt;
  return body_string(b, key);
}

std::optional<double> body_opt_double(const json& b, const char* key) {
  if (!b.contains(key) || b.at(key).is_null()) return std::nullopt;
  const json& v = b.at(key);
  if (!v.is_number()) fail(ErrorKind::invalid_argument, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::optional<std::string> query(const ApiRequest& r, const char* key) {
  auto it = r.query.find(key);
  if (it == r.query.end()) return std::nullopt;
  return it->second;
}

double query_double(const ApiRequest& r, const char* key) {
  const auto v = query(r, key);
  if (!v) fail(ErrorKind::invalid_argument, std::string("missing query parameter '") + key + "'");
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || end != v->data() + v->size() || !std::isfinite(out)) {
    fail(ErrorKind::invalid_argument, std::string("query parameter '") + key + "' must be a number");
  }
  return out;
}

std::int64_t query_int(const ApiRequest& r, const char* key) {
  const auto v = query(r, key);
  if (!v) fail(ErrorKind::invalid_argument, std::string("missing query parameter '") + key + "'");
  std::int64_t out = 0;
  const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || end != v->data() + v->size()) {
    fail(ErrorKind::invalid_argument, std::string("query parameter '") + key + "' must be an integer");
  }
  return out;
}

std::string bearer(const ApiRequest& r) {
  const std::string& h = r.authorization;
  if (h.size() > 7 && (h.compare(0, 7, "Bearer ") == 0 || h.compare(0, 7, "bearer ") == 0)) {
    return h.substr(7);
  }
  return {};
}

IdempotencyKey idempotency(const ApiRequest& r, const json& body) {
  if (!r.idempotency_key.empty()) return r.idempotency_key;
  if (auto k = body_opt_string(body, "idempotency_key")) return k;
  return std::nullopt;
}

}  // namespace

ApiResponse Api::handle(const ApiRequest& r) const {
  const auto seg = segments(r.path);
  const bool get = r.method == "GET";
  const bool post = r.method == "POST";
  const std::size_t n = seg.size();
  auto is = [&](std::initializer_list<const char*> pattern) {
    if (pattern.size() != n) return false;
    std::size_t i = 0;
    for (const char* p : pattern) {
      if (p[0] != '*' && seg[i] != p) return false;
      ++i;
    }
    return true;
  };
  auto method_not_allowed = [] {
    return json_response(405, {{"error", "method_not_allowed"}, {"message", "method not allowed"}});
  };

  Caller caller;
  std::optional<MarketId> trade_market;
  try {
    auto auth = [&] { caller = service_.authenticate(bearer(r)); };
    auto auth_admin = [&] {
      auth();
      if (!caller.admin) fail(ErrorKind::unauthorized, "operator token required");
    };

    if (is({"health"})) {
      if (!get) return method_not_allowed();
      return json_response(200, {{"status", "ok"}, {"events", service_.event_count()}});
    }
    if (is({"assets"})) {
      if (!get) return method_not_allowed();
      return json_response(200, service_.list_assets(query(r, "county")));
    }
    if (is({"assets", "nearby"})) {
      if (!get) return method_not_allowed();
      const geo::LatLon center{query_double(r, "lat"), query_double(r, "lon")};
      return json_response(200, service_.nearby_assets(center, query_double(r, "radius_km")));
    }
    if (is({"assets", "*"})) {
      if (!get) return method_not_allowed();
      return json_response(200, service_.asset(seg[1]));
    }
    if (is({"assets", "*", "curve"})) {
      if (!get) return method_not_allowed();
      return json_response(200, service_.curve(seg[1]));
    }
    if (is({"markets"})) {
      if (!get) return method_not_allowed();
      return json_response(200, service_.list_markets(query(r, "asset_id")));
    }
    if (is({"markets", "*"})) {
      if (!get) return method_not_allowed();
      return json_response(200, service_.market(seg[1]));
    }
    if (is({"markets", "*", "quote"})) {
      if (!get) return method_not_allowed();
      const auto outcome = query(r, "outcome");
      if (!outcome) fail(ErrorKind::invalid_argument, "missing query parameter 'outcome'");
      return json_response(200, service_.quote(seg[1], *outcome, Cents{query_int(r, "spend_cents")}));
    }
    if (is({"markets", "*", "trades"})) {
      if (!post) return method_not_allowed();
      auth();
      const json b = parse_body(r);
      trade_market = seg[1];
      return json_response(200, service_.trade(caller, seg[1], body_string(b, "outcome"),
                                               Cents{body_int(b, "spend_cents")}, idempotency(r, b)));
    }
    if (is({"joint-markets"})) {
      if (!get) return method_not_allowed();
      return json_response(200, service_.joint_markets());
    }
    if (is({"accounts"})) {
      if (!post) return method_not_allowed();
      auth_admin();
      const json b = parse_body(r);
      const auto attested = b.find("attested_adult");
      if (attested == b.end() || !attested->is_boolean()) {
        fail(ErrorKind::invalid_argument, "field 'attested_adult' must be a boolean");
      }
      return json_response(200, service_.open_account(caller, body_opt_string(b, "account_id"),
                                                      attested->get<bool>(), idempotency(r, b)));
    }
    if (is({"accounts", "*"})) {
      if (!get) return method_not_allowed();
      auth();
      return json_response(200, service_.account(caller, seg[1]));
    }
    if (is({"accounts", "*", "credit"})) {
      if (!post) return method_not_allowed();
      auth_admin();
      const json b = parse_body(r);
      return json_response(200, service_.credit(caller, seg[1], Cents{body_int(b, "amount_cents")},
                                                idempotency(r, b)));
    }
    if (is({"accounts", "*", "sessions"})) {
      if (!post) return method_not_allowed();
      auth_admin();
      const json b = parse_body(r);
      return json_response(200, service_.issue_session(caller, seg[1], idempotency(r, b)));
    }
    if (is({"admin", "assets"})) {
      if (!post) return method_not_allowed();
      auth_admin();
      const IdempotencyKey key =
          r.idempotency_key.empty() ? IdempotencyKey{} : IdempotencyKey{r.idempotency_key};
      const json rep = service_.ingest_assets(caller, r.body, key);
      return json_response(rep.at("rejected").empty() ? 200 : 422, rep);
    }
    if (is({"admin", "markets"})) {
      if (!post) return method_not_allowed();
      auth_admin();
      const json b = parse_body(r);
      return json_response(
          200, service_.create_market(caller, body_string(b, "asset_id"),
                                      Cents{body_int(b, "threshold_cents")}, body_opt_double(b, "b"),
                                      from_epoch_seconds(body_int(b, "cutoff")), idempotency(r, b)));
    }
    if (is({"admin", "joint-markets"})) {
      if (!post) return method_not_allowed();
      auth_admin();
      const json b = parse_body(r);
      return json_response(200, service_.create_joint_market(caller, body_string(b, "event_a"),
                                                             body_string(b, "event_b"),
                                                             body_opt_double(b, "b"), idempotency(r, b)));
    }
    if (is({"admin", "halt"})) {
      if (!post) return method_not_allowed();
      auth_admin();
      const json b = parse_body(r);
      return json_response(200, service_.halt(caller, body_string(b, "market_id"), idempotency(r, b)));
    }
    if (is({"admin", "settle"})) {
      if (!post) return method_not_allowed();
      auth_admin();
      const json b = parse_body(r);
      std::optional<Cents> announced;
      if (b.contains("announced_price_cents")) announced = Cents{body_int(b, "announced_price_cents")};
      return json_response(200, service_.settle(caller, body_string(b, "market_id"), announced,
                                                idempotency(r, b)));
    }
    if (is({"docs", "guidelines"})) {
      if (!get) return method_not_allowed();
      return {200, "text/markdown; charset=utf-8", service_.guidelines()};
    }
    return error_response(ErrorKind::not_found, "no route for " + r.path);
  } catch (const Error& e) {
    ApiResponse out = error_response(e.kind(), e.what());
    if (e.kind() == ErrorKind::conflict && trade_market && !caller.account_id.empty()) {
      try {
        json body = json::parse(out.body);
        body["remaining_allowance_cents"] =
            service_.remaining_allowance(caller.account_id, *trade_market).value;
        out.body = body.dump();
      } catch (const Error&) {
      }
    }
    return out;
  } catch (const json::exception& e) {
    return error_response(ErrorKind::invalid_argument, e.what());
  }
}

}  // namespace toxmarket
