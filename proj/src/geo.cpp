#include "toxmarket/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace toxmarket::geo {

namespace {
constexpr double to_radians(double deg) { return deg * std::numbers::pi / 180.0; }
}  // namespace

bool is_valid(LatLon p) noexcept {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

double haversine_km(LatLon a, LatLon b) noexcept {
  const double phi1 = to_radians(a.lat);
  const double phi2 = to_radians(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = to_radians(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

}  // namespace toxmarket::geo
