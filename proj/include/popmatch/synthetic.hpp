#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "popmatch/ingest.hpp"
#include "popmatch/types.hpp"

namespace popmatch {

struct SyntheticConfig {
  int n_countries = 18;
  int clusters_per_country_early = 20;
  int clusters_per_country_late = 20;
  double true_beta1 = -150.0;  // grams per unit PfPR change
  double covariate_effect_scale = 1.0;
  double missingness_rate_target = 0.45;
  double spatial_smoothness = 1.0;  // larger = smoother surfaces
  std::uint64_t seed = 0;
  int individuals_per_cluster = 30;

  void validate() const;
};

/// Secondary generator knobs, mostly for stress tests; the defaults mimic
/// the study data (twin share, size-report missingness, filter exercise
/// rates).
struct GeneratorTuning {
  double twin_rate = 0.037;
  double size_missing_rate = 0.065;
  double covariate_cell_missing_rate = 0.0005;
  double far_pair_fraction = 0.02;   // late clusters displaced > 100 km
  double zero_pfpr_fraction = 0.03;  // hard-zero PfPR locations
  double confounding_strength = 1.0;
  double missingness_slope_scale = 1.0;  // 0 makes missingness MCAR
  double individual_noise_sd = 430.0;
  double size_report_noise_sd = 110.0;
  double cluster_noise_sd = 25.0;
  double time_shock = 35.0;  // common late-epoch outcome shift
};

struct SyntheticTruth {
  double true_beta1 = 0.0;
  std::map<std::string, double> cluster_latent_mean_g;  // noiseless means
  double realized_missingness_rate = 0.0;
  double realized_twin_rate = 0.0;
  int n_individuals = 0;
  int n_clusters = 0;
};

struct SyntheticData {
  std::vector<IndividualRecord> individuals;
  std::vector<ClusterMeta> clusters;
  SyntheticTruth truth;
};

/// Deterministic synthetic corpus: smooth per-country PfPR surfaces with a
/// heterogeneous decline, covariates spatially confounded with the decline,
/// outcomes from a linear model with slope true_beta1, size reports derived
/// from the true birthweight, and logistic missingness calibrated to the
/// target rate.
SyntheticData generate_synthetic(const SyntheticConfig& config,
                                 const GeneratorTuning& tuning = {});

}  // namespace popmatch
