#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "popmatch/types.hpp"

namespace popmatch {

/// cluster_id -> mean birthweight of a completed dataset.
using ClusterOutcomes = std::unordered_map<std::string, double>;

ClusterOutcomes cluster_mean_birthweights(
    std::span<const IndividualRecord> records);

/// One fit of the post-matching working model. The matched-set fixed
/// effects are absorbed by within-quad differencing (each set has exactly
/// two members), which reproduces the full-dummy OLS coefficients and SEs.
/// residual_df uses the bookkeeping 2I - (I + 1 + 1 + 24) = I - 26, counting
/// every absorbed parameter of the working model.
struct RegressionFit {
  std::vector<std::string> names;  // z_diff, then covariate early/late pairs
  std::vector<double> coefficients;
  std::vector<double> se;
  std::vector<double> t;
  double beta1 = 0.0;     // coefficient on z_diff
  double se_beta1 = 0.0;
  double t_beta1 = 0.0;
  int residual_df = 0;
  int n_quads = 0;

  int index_of(const std::string& name) const;
};

RegressionFit fit_working_model(std::span<const QuadMatch> quads,
                                const ClusterOutcomes& outcomes);

struct PooledEstimate {
  double estimate = 0.0;
  double within_var = 0.0;   // mean of squared SEs
  double between_var = 0.0;  // sample variance of estimates
  double total_var = 0.0;    // within + (1 + 1/M) * between
  double df_rubin = 0.0;     // +inf when between_var == 0
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p_value = 0.0;
  int m = 0;
};

/// Rubin's rule over the M imputed-data fits (pools beta1).
PooledEstimate rubin_pool(std::span<const RegressionFit> fits);

/// Rubin pooling of an arbitrary coefficient by design-matrix index.
PooledEstimate rubin_pool_coefficient(std::span<const RegressionFit> fits,
                                      int coefficient_index);

struct DoseEffect {
  double dose = 0.0;    // stated PfPR reduction
  double effect = 0.0;  // grams; -estimate * dose
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Effect of a stated PfPR reduction `dose`: a reduction of d under slope
/// beta1 changes the outcome by -beta1*d; the CI scales linearly.
DoseEffect dose_effect(const PooledEstimate& pooled, double dose);

}  // namespace popmatch
