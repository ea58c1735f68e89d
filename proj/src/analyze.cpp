#include "popmatch/analyze.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

#include "popmatch/error.hpp"
#include "popmatch/stats.hpp"

namespace popmatch {

ClusterOutcomes cluster_mean_birthweights(
    std::span<const IndividualRecord> records) {
  std::unordered_map<std::string, std::pair<double, int>> acc;
  for (const auto& r : records) {
    if (!r.birthweight_g) continue;
    auto& slot = acc[r.cluster_id];
    slot.first += *r.birthweight_g;
    slot.second += 1;
  }
  ClusterOutcomes out;
  out.reserve(acc.size());
  for (const auto& [id, slot] : acc) out[id] = slot.first / slot.second;
  return out;
}

int RegressionFit::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

constexpr int kNumTerms = 1 + 2 * kNumClusterCovariates;  // z_diff + 24

std::vector<std::string> working_model_names() {
  std::vector<std::string> names;
  names.reserve(kNumTerms);
  names.emplace_back("z_diff");
  for (int k = 0; k < kNumClusterCovariates; ++k) {
    names.push_back(std::string(kClusterCovariates[k]) + "_early");
    names.push_back(std::string(kClusterCovariates[k]) + "_late");
  }
  return names;
}

double y_diff_of(const ClusterPair& pair, const ClusterOutcomes& outcomes) {
  auto early = outcomes.find(pair.early.cluster_id);
  auto late = outcomes.find(pair.late.cluster_id);
  if (early == outcomes.end() || late == outcomes.end())
    throw Error("fit_working_model: no outcome for cluster " +
                (early == outcomes.end() ? pair.early.cluster_id
                                         : pair.late.cluster_id));
  return late->second - early->second;
}

// Design row: [z_diff, cov1_early, cov1_late, ..., cov12_early, cov12_late].
void fill_row(Eigen::RowVectorXd& row, const ClusterPair& pair) {
  row(0) = pair.z_diff;
  for (int k = 0; k < kNumClusterCovariates; ++k) {
    row(1 + 2 * k) = pair.early.covariates[k];
    row(2 + 2 * k) = pair.late.covariates[k];
  }
}

}  // namespace

RegressionFit fit_working_model(std::span<const QuadMatch> quads,
                                const ClusterOutcomes& outcomes) {
  const int n_quads = static_cast<int>(quads.size());
  const int df = n_quads - (1 + 1 + 2 * kNumClusterCovariates);
  if (df <= 0)
    throw Error("fit_working_model: " + std::to_string(n_quads) +
                " matched sets leave no residual degrees of freedom "
                "(need I > 26)");

  // Within-quad differences (BEC minus SEC): the matched-set dummies and
  // the intercept cancel, leaving z_diff and the 24 covariate columns.
  Eigen::MatrixXd x(n_quads, kNumTerms);
  Eigen::VectorXd y(n_quads);
  Eigen::RowVectorXd row_bec(kNumTerms), row_sec(kNumTerms);
  for (int i = 0; i < n_quads; ++i) {
    fill_row(row_bec, quads[i].bec);
    fill_row(row_sec, quads[i].sec);
    x.row(i) = row_bec - row_sec;
    y(i) = y_diff_of(quads[i].bec, outcomes) - y_diff_of(quads[i].sec, outcomes);
  }

  std::vector<std::string> names = working_model_names();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-9);
  if (qr.rank() < kNumTerms) {
    std::string cols;
    for (int k = qr.rank(); k < kNumTerms; ++k) {
      if (!cols.empty()) cols += ", ";
      cols += names[qr.colsPermutation().indices()(k)];
    }
    throw Error("fit_working_model: collinear columns after differencing: " +
                cols);
  }

  Eigen::VectorXd coef = qr.solve(y);
  double rss = (y - x * coef).squaredNorm();
  double s2 = rss / df;
  Eigen::MatrixXd xtx_inv =
      (x.transpose() * x)
          .ldlt()
          .solve(Eigen::MatrixXd::Identity(kNumTerms, kNumTerms));

  RegressionFit fit;
  fit.names = std::move(names);
  fit.n_quads = n_quads;
  fit.residual_df = df;
  fit.coefficients.resize(kNumTerms);
  fit.se.resize(kNumTerms);
  fit.t.resize(kNumTerms);
  for (int k = 0; k < kNumTerms; ++k) {
    fit.coefficients[k] = coef(k);
    fit.se[k] = std::sqrt(s2 * xtx_inv(k, k));
    fit.t[k] = fit.se[k] > 0.0 ? coef(k) / fit.se[k] : 0.0;
  }
  fit.beta1 = fit.coefficients[0];
  fit.se_beta1 = fit.se[0];
  fit.t_beta1 = fit.t[0];
  return fit;
}

namespace {

PooledEstimate pool_values(std::span<const double> estimates,
                           std::span<const double> variances) {
  const int m = static_cast<int>(estimates.size());
  if (m < 2) throw Error("rubin_pool: need at least 2 fits");

  PooledEstimate pooled;
  pooled.m = m;
  pooled.estimate = mean(estimates);
  pooled.within_var = mean(variances);
  pooled.between_var = sample_variance(estimates);
  double inflation = 1.0 + 1.0 / m;
  pooled.total_var = pooled.within_var + inflation * pooled.between_var;

  double se = std::sqrt(pooled.total_var);
  double t_crit;
  if (pooled.between_var == 0.0) {
    pooled.df_rubin = std::numeric_limits<double>::infinity();
    t_crit = normal_quantile(0.975);
  } else {
    double ratio = pooled.within_var / (inflation * pooled.between_var);
    pooled.df_rubin = (m - 1) * (1.0 + ratio) * (1.0 + ratio);
    t_crit = student_t_quantile(0.975, pooled.df_rubin);
  }
  pooled.ci_lo = pooled.estimate - t_crit * se;
  pooled.ci_hi = pooled.estimate + t_crit * se;
  pooled.p_value =
      se > 0.0 ? two_sided_p(pooled.estimate / se, pooled.df_rubin) : 0.0;
  return pooled;
}

}  // namespace

PooledEstimate rubin_pool(std::span<const RegressionFit> fits) {
  return rubin_pool_coefficient(fits, 0);
}

PooledEstimate rubin_pool_coefficient(std::span<const RegressionFit> fits,
                                      int coefficient_index) {
  std::vector<double> estimates, variances;
  estimates.reserve(fits.size());
  variances.reserve(fits.size());
  for (const auto& fit : fits) {
    if (coefficient_index < 0 ||
        coefficient_index >= static_cast<int>(fit.coefficients.size()))
      throw Error("rubin_pool: coefficient index out of range");
    estimates.push_back(fit.coefficients[coefficient_index]);
    variances.push_back(fit.se[coefficient_index] *
                        fit.se[coefficient_index]);
  }
  return pool_values(estimates, variances);
}

DoseEffect dose_effect(const PooledEstimate& pooled, double dose) {
  if (!std::isfinite(dose)) throw Error("dose_effect: dose must be finite");
  DoseEffect effect;
  effect.dose = dose;
  effect.effect = -pooled.estimate * dose;
  double a = -pooled.ci_lo * dose;
  double b = -pooled.ci_hi * dose;
  effect.ci_lo = std::min(a, b);
  effect.ci_hi = std::max(a, b);
  return effect;
}

}  // namespace popmatch
