#pragma once

#include <span>
#include <vector>

namespace popmatch {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
  double longitude_deg = 0.0;
  double latitude_deg = 0.0;
  double elevation_m = 0.0;
};

/// Great-circle distance in km (haversine on a sphere of radius 6371 km).
double spherical_distance_km(const GeoPoint& a, const GeoPoint& b);

/// Max-rank transform: rank of element i is the count of elements <= it
/// (ties get the maximum rank). Matches the indicator-sum definition
/// sum_j 1{x_i >= x_j}.
std::vector<int> max_rank(std::span<const double> values);

}  // namespace popmatch
