#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "popmatch/types.hpp"

namespace popmatch {

struct Stage1Options {
  double caliper_multiplier = 0.2;
  double rho = 1000.0;
  double max_km = 100.0;
};

struct Stage1CountryAudit {
  std::string country;
  int n_early = 0;
  int n_late = 0;
  int matched = 0;
  int distance_dropped = 0;
  int zero_pfpr_dropped = 0;
  int retained = 0;
  bool skipped_missing_epoch = false;
};

struct Stage1Audit {
  std::vector<Stage1CountryAudit> countries;  // country code order
  int matched_total = 0;
  int distance_dropped_total = 0;
  int zero_pfpr_dropped_total = 0;
  int retained_total = 0;
  std::vector<std::string> warnings;
};

struct Stage1Result {
  std::vector<ClusterPair> pairs;
  Stage1Audit audit;
};

/// Stage-one matching over all countries: per country, optimal assignment of
/// the smaller epoch into the larger under the rank-Mahalanobis distance,
/// then the >max_km distance filter, then the both-epochs-zero-PfPR filter.
/// Countries with a missing epoch are skipped with a warning in the audit.
Stage1Result run_stage1(std::span<const ClusterRecord> clusters,
                        const Stage1Options& options = {});

struct Stage1Diagnostics {
  int n_pairs = 0;
  double corr_longitude = 0.0;  // within-pair early vs late
  double corr_latitude = 0.0;
  double mean_distance_km = 0.0;
  double mean_abs_elevation_diff_m = 0.0;
  double mean_longitude_early = 0.0;
  double mean_latitude_early = 0.0;
  double mean_longitude_late = 0.0;
  double mean_latitude_late = 0.0;
  double mean_pfpr_early = 0.0;  // over early-epoch members
  double mean_pfpr_late = 0.0;   // over late-epoch members
};

Stage1Diagnostics stage1_diagnostics(std::span<const ClusterPair> pairs);

void write_pairs_csv(std::span<const ClusterPair> pairs,
                     const std::string& path);

/// Rebuilds ClusterPairs from a pairs CSV; cluster records (with aggregated
/// covariates and outcomes) are looked up by id. z_diff consistency is
/// revalidated on load.
std::vector<ClusterPair> load_pairs_csv(
    const std::string& path,
    const std::map<std::string, ClusterRecord>& clusters);

}  // namespace popmatch
