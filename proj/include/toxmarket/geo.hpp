#pragma once

namespace toxmarket::geo {

inline constexpr double kEarthRadiusKm = 6371.0;

struct LatLon {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

bool is_valid(LatLon p) noexcept;

/// Great-circle distance by the haversine formula on a sphere of mean
/// Earth radius. Symmetric in its arguments.
double haversine_km(LatLon a, LatLon b) noexcept;

}  // namespace toxmarket::geo
