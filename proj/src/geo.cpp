#include "popmatch/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "popmatch/error.hpp"

namespace popmatch {

namespace {
double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
}  // namespace

double spherical_distance_km(const GeoPoint& a, const GeoPoint& b) {
  double lat1 = deg2rad(a.latitude_deg);
  double lat2 = deg2rad(b.latitude_deg);
  double dlat = lat2 - lat1;
  double dlon = deg2rad(b.longitude_deg - a.longitude_deg);
  double s1 = std::sin(dlat / 2.0);
  double s2 = std::sin(dlon / 2.0);
  double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  h = std::min(1.0, h);
  return kEarthRadiusKm * 2.0 * std::asin(std::sqrt(h));
}

std::vector<int> max_rank(std::span<const double> values) {
  if (values.empty()) throw Error("max_rank: empty input");
  std::size_t n = values.size();
  // Sorting gives O(n log n); rank of x = number of elements <= x.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), values[i]);
    ranks[i] = static_cast<int>(it - sorted.begin());
  }
  return ranks;
}

}  // namespace popmatch
