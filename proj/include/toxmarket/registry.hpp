#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "toxmarket/geo.hpp"
#include "toxmarket/money.hpp"

namespace toxmarket {

using AssetId = std::string;

enum class AssetStatus { registered, market_open, settled };

const char* to_string(AssetStatus s) noexcept;

struct Asset {
  AssetId asset_id;
  std::string title;
  std::string county;
  double latitude = 0.0;
  double longitude = 0.0;
  Cents book_value;
  std::string loan_reference;
  AssetStatus status = AssetStatus::registered;

  geo::LatLon location() const { return {latitude, longitude}; }
};

struct RejectedRecord {
  std::size_t line = 0;
  std::string reason;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::vector<RejectedRecord> rejected;
  std::vector<AssetId> accepted_ids;
};

struct NearbyAsset {
  const Asset* asset = nullptr;
  double distance_km = 0.0;
};

/// Exact header line of the asset file format.
inline constexpr const char* kAssetHeader =
    "asset_id,title,county,latitude,longitude,book_value_cents,loan_reference";

/// Parses one data record of the asset file format. Throws
/// Error(rejected_record) describing the first schema violation.
Asset parse_asset_record(const std::vector<std::string>& fields);

/// Renders one asset as a data line (no trailing newline).
std::string format_asset_record(const Asset& asset);

/// Keyed store of registered assets. Ingest is the only bulk writer; callers
/// serialize ingest against concurrent readers.
class AssetRegistry {
 public:
  static constexpr int kSchemaVersion = 1;

  /// Partial ingest: each valid record is inserted, each invalid one is
  /// reported with its line number. A missing or wrong header, or a stream
  /// that cannot be read, is fatal (Error io / invalid_argument) and leaves
  /// the registry unchanged.
  IngestReport ingest(std::istream& in);

  /// Inserts one already-validated asset. Throws conflict on duplicate id.
  void insert(Asset asset);

  /// Header plus one line per asset, ordered by asset_id.
  void export_csv(std::ostream& out) const;

  /// Assets within radius_km of center (inclusive), nearest first, ties by
  /// asset_id.
  std::vector<NearbyAsset> nearby(geo::LatLon center, double radius_km) const;

  const Asset* find(const AssetId& id) const;
  const Asset& get(const AssetId& id) const;  // throws not_found
  void set_status(const AssetId& id, AssetStatus status);

  const std::map<AssetId, Asset>& assets() const { return assets_; }
  std::size_t size() const { return assets_.size(); }
  int schema_version() const { return kSchemaVersion; }

 private:
  std::map<AssetId, Asset> assets_;
};

}  // namespace toxmarket
