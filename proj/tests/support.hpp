#pragma once

#include <memory>
#include <sstream>
#include <string>

#include "toxmarket/exchange.hpp"
#include "toxmarket/registry.hpp"

namespace toxmarket::testing {

inline Timestamp at(std::int64_t seconds) { return from_epoch_seconds(seconds); }

inline constexpr std::int64_t kNow = 1'700'000'000;
inline constexpr std::int64_t kCutoff = kNow + 86'400;

inline Asset make_asset(std::string id, double lat = 51.6801, double lon = -9.4526,
                        std::int64_t book_cents = 25'000'000) {
  Asset a;
  a.asset_id = std::move(id);
  a.title = "Unfinished property";
  a.county = "Cork";
  a.latitude = lat;
  a.longitude = lon;
  a.book_value = Cents{book_cents};
  a.loan_reference = "LN-" + a.asset_id;
  return a;
}

/// Registry + exchange pair with one registered asset "BANTRY-1".
struct World {
  AssetRegistry registry;
  std::unique_ptr<Exchange> exchange;

  explicit World(ExchangeConfig config = {}) {
    registry.insert(make_asset("BANTRY-1"));
    exchange = std::make_unique<Exchange>(registry, config);
  }

  Exchange& ex() { return *exchange; }

  MarketId market(std::int64_t threshold_cents = 25'000'000, double b = 100.0,
                  const AssetId& asset = "BANTRY-1") {
    return ex().create_market(asset, Cents{threshold_cents}, b, at(kCutoff), at(kNow)).market_id;
  }
};

}  // namespace toxmarket::testing
