#include "toxmarket/registry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "toxmarket/csv.hpp"
#include "toxmarket/error.hpp"

namespace toxmarket {

namespace {

constexpr std::size_t kColumns = 7;

[[noreturn]] void reject(const std::string& why) { fail(ErrorKind::rejected_record, why); }

double parse_degrees(const std::string& text, const char* name) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty() || !std::isfinite(value)) {
    reject(std::string(name) + " is not a number: '" + text + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

const char* to_string(AssetStatus s) noexcept {
  switch (s) {
    case AssetStatus::registered: return "REGISTERED";
    case AssetStatus::market_open: return "MARKET_OPEN";
    case AssetStatus::settled: return "SETTLED";
  }
  return "UNKNOWN";
}

Asset parse_asset_record(const std::vector<std::string>& fields) {
  if (fields.size() != kColumns) {
    reject("expected " + std::to_string(kColumns) + " columns, found " +
           std::to_string(fields.size()));
  }
  Asset a;
  a.asset_id = fields[0];
  if (a.asset_id.empty()) reject("asset_id is empty");
  a.title = fields[1];
  a.county = fields[2];
  a.latitude = parse_degrees(fields[3], "latitude");
  a.longitude = parse_degrees(fields[4], "longitude");
  if (a.latitude < -90.0 || a.latitude > 90.0) {
    reject("latitude " + fields[3] + " outside [-90, 90]");
  }
  if (a.longitude < -180.0 || a.longitude > 180.0) {
    reject("longitude " + fields[4] + " outside [-180, 180]");
  }
  const std::string& bv = fields[5];
  std::int64_t cents = 0;
  auto [ptr, ec] = std::from_chars(bv.data(), bv.data() + bv.size(), cents, 10);
  if (bv.empty() || ec != std::errc{} || ptr != bv.data() + bv.size()) {
    reject("book_value_cents is not a base-10 integer: '" + bv + "'");
  }
  if (cents <= 0) reject("book_value_cents must be positive");
  a.book_value = Cents{cents};
  a.loan_reference = fields[6];
  return a;
}

std::string format_asset_record(const Asset& a) {
  return csv::join({a.asset_id, a.title, a.county, format_double(a.latitude),
                    format_double(a.longitude), std::to_string(a.book_value.value),
                    a.loan_reference});
}

IngestReport AssetRegistry::ingest(std::istream& in) {
  if (!in.good()) fail(ErrorKind::io, "asset stream is not readable");

  IngestReport report;
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) {
    if (in.bad()) fail(ErrorKind::io, "asset stream read failed");
    return report;  // empty input
  }
  if (csv::join(header->fields) != kAssetHeader) {
    fail(ErrorKind::invalid_argument,
         std::string("asset file header must be '") + kAssetHeader + "'");
  }

  std::vector<Asset> staged;
  std::set<AssetId> staged_ids;
  while (true) {
    std::optional<csv::Record> rec;
    try {
      rec = reader.next();
    } catch (const Error& e) {
      report.rejected.push_back({reader.record_line(), e.what()});
      break;
    }
    if (!rec) break;
    if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;  // blank line
    try {
      Asset a = parse_asset_record(rec->fields);
      if (assets_.contains(a.asset_id) || staged_ids.contains(a.asset_id)) {
        reject("duplicate asset_id '" + a.asset_id + "'");
      }
      staged_ids.insert(a.asset_id);
      staged.push_back(std::move(a));
    } catch (const Error& e) {
      report.rejected.push_back({rec->line, e.what()});
    }
  }
  if (in.bad()) fail(ErrorKind::io, "asset stream read failed");

  for (auto& a : staged) {
    report.accepted_ids.push_back(a.asset_id);
    assets_.emplace(a.asset_id, std::move(a));
  }
  report.accepted = report.accepted_ids.size();
  return report;
}

void AssetRegistry::insert(Asset asset) {
  if (asset.asset_id.empty()) fail(ErrorKind::invalid_argument, "asset_id is empty");
  if (!geo::is_valid(asset.location())) fail(ErrorKind::invalid_argument, "invalid coordinates");
  if (asset.book_value.value <= 0) fail(ErrorKind::invalid_argument, "book value must be positive");
  auto id = asset.asset_id;
  if (!assets_.emplace(id, std::move(asset)).second) {
    fail(ErrorKind::conflict, "duplicate asset_id '" + id + "'");
  }
}

void AssetRegistry::export_csv(std::ostream& out) const {
  out << kAssetHeader << '\n';
  for (const auto& [id, a] : assets_) out << format_asset_record(a) << '\n';
}

std::vector<NearbyAsset> AssetRegistry::nearby(geo::LatLon center, double radius_km) const {
  if (!geo::is_valid(center)) fail(ErrorKind::invalid_argument, "invalid center coordinates");
  if (!(radius_km >= 0.0) || !std::isfinite(radius_km)) {
    fail(ErrorKind::invalid_argument, "radius must be a finite non-negative number");
  }
  std::vector<NearbyAsset> out;
  for (const auto& [id, a] : assets_) {
    const double d = geo::haversine_km(center, a.location());
    if (d <= radius_km) out.push_back({&a, d});
  }
  // assets_ iterates in asset_id order, so a stable sort keeps id order on ties.
  std::stable_sort(out.begin(), out.end(), [](const NearbyAsset& x, const NearbyAsset& y) {
    return x.distance_km < y.distance_km;
  });
  return out;
}

const Asset* AssetRegistry::find(const AssetId& id) const {
  auto it = assets_.find(id);
  return it == assets_.end() ? nullptr : &it->second;
}

const Asset& AssetRegistry::get(const AssetId& id) const {
  if (const Asset* a = find(id)) return *a;
  fail(ErrorKind::not_found, "unknown asset '" + id + "'");
}

void AssetRegistry::set_status(const AssetId& id, AssetStatus status) {
  auto it = assets_.find(id);
  if (it == assets_.end()) fail(ErrorKind::not_found, "unknown asset '" + id + "'");
  it->second.status = status;
}

}  // namespace toxmarket
