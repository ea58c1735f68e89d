#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "popmatch/mcmc.hpp"
#include "popmatch/types.hpp"

namespace popmatch {

/// Imputation-model predictor names, in design-matrix order. Mother's age
/// and birth order enter with quadratic terms; the birth-size report enters
/// as two indicators with "average" as the reference level.
std::vector<std::string> imputation_predictor_names();

struct ImputationModelSpec {
  double prior_location = 3200.0;  // intercept prior center, grams
  double prior_scale = 593.0;
  int prior_df = 3;
  int chains = 2;
  int iterations_per_chain = 1000;  // including warmup
  double warmup_fraction = 0.5;
  int m_imputations = 20;
  std::uint64_t seed = 0;

  int retained_per_chain() const;
  void validate() const;
};

/// Individual-level design matrix for the imputation model. Rows follow the
/// input record order; `row_of_record` is -1 for records without a design
/// row (only possible when require_outcome is set and the outcome is
/// missing).
struct ImputationDesign {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;  // observed birthweights (only when require_outcome)
  std::vector<std::string> names;
  std::vector<int> row_of_record;
};

/// Builds the design matrix. Missing covariate cells are filled with the
/// within-cluster mean (global mean as fallback). Records lacking a
/// required predictor entirely raise an error.
ImputationDesign build_imputation_design(
    std::span<const IndividualRecord> records, bool require_outcome);

struct PosteriorDraws {
  std::vector<std::string> names;  // coefficients..., "sigma"
  /// Retained draws, chain-major: row c*retained_per_chain + i.
  Eigen::MatrixXd draws;
  int chains = 0;
  int retained_per_chain = 0;

  int total_draws() const { return chains * retained_per_chain; }
};

struct ImputationFit {
  PosteriorDraws posterior;
  McmcDiagnostics diagnostics;
};

/// Fits the Bayesian linear regression on records with observed outcomes.
/// Student-t(prior_df) priors: location prior_location on the intercept,
/// 0 on slopes, scale prior_scale everywhere; half-t on the residual SD.
/// Gibbs sampling over the scale-mixture representation; chains run
/// concurrently on deterministic per-chain substreams.
ImputationFit fit_imputation_model(std::span<const IndividualRecord> records,
                                   const ImputationModelSpec& spec);

/// One deterministic Gibbs chain (exposed for the determinism tests).
/// Returns iterations x (p+1) draws including warmup.
Eigen::MatrixXd run_gibbs_chain(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y,
                                const ImputationModelSpec& spec,
                                std::uint64_t chain_seed);

struct ImputedDataset {
  int imputation_index = 0;  // 1..M
  std::vector<IndividualRecord> records;
  int provenance_draw = 0;  // row in PosteriorDraws::draws
};

/// Draws M completed datasets: each uses one retained posterior draw
/// (evenly spaced across the pooled chains) and imputes every missing
/// birthweight from the normal predictive at that draw.
std::vector<ImputedDataset> draw_imputations(
    std::span<const IndividualRecord> records, const PosteriorDraws& posterior,
    const ImputationModelSpec& spec);

struct PosteriorSummaryRow {
  std::string name;
  double estimate = 0.0;  // posterior mean
  double se = 0.0;        // posterior SD
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double rhat = 0.0;
  double bulk_ess = 0.0;
  double tail_ess = 0.0;
};

std::vector<PosteriorSummaryRow> summarize_posterior(const ImputationFit& fit);

void write_posterior_summary_csv(std::span<const PosteriorSummaryRow> rows,
                                 const std::string& path);

}  // namespace popmatch
