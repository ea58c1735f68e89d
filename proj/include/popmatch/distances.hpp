#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "popmatch/geo.hpp"
#include "popmatch/types.hpp"

namespace popmatch {

/// Sentinel written on the stage-two diagonal: self-matching is forbidden
/// but entries must stay finite. Matching solvers never read the diagonal.
inline constexpr double kSelfMatchSentinel = 1e9;

/// Ridge added to a singular covariance diagonal: 1e-8 * trace / dim.
inline constexpr double kCovarianceRidge = 1e-8;

/// 2x2 covariance of the pooled rank vectors used by stage-one matching.
struct RankCovariance {
  double sigma11 = 0.0;
  double sigma12 = 0.0;
  double sigma22 = 0.0;

  /// Determinant after any ridge application.
  double determinant() const { return sigma11 * sigma22 - sigma12 * sigma12; }
};

struct DistanceMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> entries;        // row-major, finite, >= 0
  std::vector<std::uint8_t> penalty_mask;  // entry exceeded caliper / penalized

  double at(int i, int j) const { return entries[i * cols + j]; }
  double& at(int i, int j) { return entries[i * cols + j]; }
  bool penalized(int i, int j) const { return penalty_mask[i * cols + j] != 0; }

  static DistanceMatrix zeros(int rows, int cols);
};

/// Covariance of pooled (early||late) rank vectors, with ridge applied if
/// the raw matrix is singular. Throws if still singular afterwards.
RankCovariance pooled_rank_covariance(std::span<const int> rank_x_early,
                                      std::span<const int> rank_y_early,
                                      std::span<const int> rank_x_late,
                                      std::span<const int> rank_y_late);

/// Stage-one rank-based Mahalanobis distances between early and late
/// clusters of one country, with the soft caliper penalty. The caliper is
/// caliper_multiplier times the sample SD of all pairwise distances;
/// entries at or above it receive +rho and a penalty-mask flag.
DistanceMatrix stage1_distance_matrix(std::span<const GeoPoint> early,
                                      std::span<const GeoPoint> late,
                                      double caliper_multiplier = 0.2,
                                      double rho = 1000.0);

/// Stage-two distance between pairs of clusters: Mahalanobis distance on
/// the 24-dim covariate trajectories plus rho_prime whenever the two pairs'
/// exposure changes differ by less than xi (penalizing similar doses).
/// Diagonal entries get kSelfMatchSentinel.
DistanceMatrix stage2_distance_matrix(std::span<const ClusterPair> pairs,
                                      double rho_prime = 1000.0,
                                      double xi = 0.05);

/// Flag-gated debugging dump.
void dump_distance_matrix(const DistanceMatrix& m, const std::string& path);

}  // namespace popmatch
