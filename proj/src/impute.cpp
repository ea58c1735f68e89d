#include "popmatch/impute.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <future>
#include <unordered_map>

#include "popmatch/csv.hpp"
#include "popmatch/error.hpp"
#include "popmatch/rng.hpp"

namespace popmatch {

std::vector<std::string> imputation_predictor_names() {
  return {"intercept",
          "mother_age",
          "mother_age_sq",
          "wealth_index",
          "birth_order",
          "birth_order_sq",
          "urban",
          "mother_education",
          "child_sex",
          "marital_status",
          "antenatal_care",
          "birth_size_low",
          "birth_size_large"};
}

int ImputationModelSpec::retained_per_chain() const {
  int warmup = static_cast<int>(iterations_per_chain * warmup_fraction);
  return iterations_per_chain - warmup;
}

void ImputationModelSpec::validate() const {
  if (m_imputations < 2) throw ValidationError("m_imputations must be >= 2");
  if (chains < 2) throw ValidationError("chains must be >= 2 (Rhat needs 2)");
  if (warmup_fraction <= 0.0 || warmup_fraction >= 1.0)
    throw ValidationError("warmup_fraction must lie in (0, 1)");
  if (iterations_per_chain < 8)
    throw ValidationError("iterations_per_chain too small");
  if (prior_scale <= 0.0) throw ValidationError("prior_scale must be > 0");
  if (prior_df < 1) throw ValidationError("prior_df must be >= 1");
}

namespace {

// Within-cluster means of each covariate, for filling sporadic missing
// cells; global means as fallback.
struct CovariateFiller {
  std::unordered_map<std::string, std::array<double, kNumClusterCovariates>> sums;
  std::unordered_map<std::string, std::array<int, kNumClusterCovariates>> counts;
  std::array<double, kNumClusterCovariates> global_sum{};
  std::array<int, kNumClusterCovariates> global_count{};

  explicit CovariateFiller(std::span<const IndividualRecord> records) {
    for (const auto& r : records) {
      auto& s = sums[r.cluster_id];
      auto& c = counts[r.cluster_id];
      for (int k = 0; k < kNumClusterCovariates; ++k) {
        auto v = r.covariate(k);
        if (v) {
          s[k] += *v;
          c[k] += 1;
          global_sum[k] += *v;
          global_count[k] += 1;
        }
      }
    }
  }

  double fill(const IndividualRecord& r, int k) const {
    auto v = r.covariate(k);
    if (v) return *v;
    auto it = counts.find(r.cluster_id);
    if (it != counts.end() && it->second[k] > 0)
      return sums.at(r.cluster_id)[k] / it->second[k];
    if (global_count[k] > 0) return global_sum[k] / global_count[k];
    throw Error("record " + r.record_id + ": predictor '" +
                std::string(kClusterCovariates[k]) +
                "' unseen across the whole dataset");
  }
};

constexpr int kCovMotherAge = 6;
constexpr int kCovBirthOrder = 7;
constexpr int kCovWealth = 8;
constexpr int kCovUrban = 3;
constexpr int kCovEducation = 4;
constexpr int kCovChildSex = 9;
constexpr int kCovMarital = 10;
constexpr int kCovAntenatal = 11;

}  // namespace

ImputationDesign build_imputation_design(
    std::span<const IndividualRecord> records, bool require_outcome) {
  CovariateFiller filler(records);

  std::vector<int> rows;
  rows.reserve(records.size());
  ImputationDesign design;
  design.names = imputation_predictor_names();
  design.row_of_record.assign(records.size(), -1);

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (require_outcome && !records[i].birthweight_g) continue;
    rows.push_back(static_cast<int>(i));
  }

  int p = static_cast<int>(design.names.size());
  design.x.resize(static_cast<int>(rows.size()), p);
  design.y.resize(static_cast<int>(rows.size()));

  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    const IndividualRecord& r = records[rows[ri]];
    if (!r.reported_birth_size)
      throw Error("record " + r.record_id +
                  ": reported_birth_size missing; filter_records must run "
                  "before imputation");
    double age = filler.fill(r, kCovMotherAge);
    double order = filler.fill(r, kCovBirthOrder);
    int row = static_cast<int>(ri);
    design.x(row, 0) = 1.0;
    design.x(row, 1) = age;
    design.x(row, 2) = age * age;
    design.x(row, 3) = filler.fill(r, kCovWealth);
    design.x(row, 4) = order;
    design.x(row, 5) = order * order;
    design.x(row, 6) = filler.fill(r, kCovUrban);
    design.x(row, 7) = filler.fill(r, kCovEducation);
    design.x(row, 8) = filler.fill(r, kCovChildSex);
    design.x(row, 9) = filler.fill(r, kCovMarital);
    design.x(row, 10) = filler.fill(r, kCovAntenatal);
    design.x(row, 11) = *r.reported_birth_size == BirthSize::low ? 1.0 : 0.0;
    design.x(row, 12) = *r.reported_birth_size == BirthSize::large ? 1.0 : 0.0;
    design.y(row) = r.birthweight_g ? *r.birthweight_g : 0.0;
    design.row_of_record[rows[ri]] = row;
  }
  return design;
}

Eigen::MatrixXd run_gibbs_chain(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y,
                                const ImputationModelSpec& spec,
                                std::uint64_t chain_seed) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const double nu = spec.prior_df;
  const double scale2 = spec.prior_scale * spec.prior_scale;

  Eigen::VectorXd prior_mean = Eigen::VectorXd::Zero(p);
  prior_mean(0) = spec.prior_location;  // slopes centered at 0

  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::VectorXd xty = x.transpose() * y;

  Rng rng(chain_seed);

  // Overdispersed but deterministic start.
  Eigen::VectorXd beta = prior_mean;
  for (int j = 0; j < p; ++j)
    beta(j) += 0.1 * spec.prior_scale * rng.normal();
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(p);  // t-prior mixing scales
  double y_sd = std::sqrt((y.array() - y.mean()).square().sum() /
                          std::max(n - 1, 1));
  double sigma2 = y_sd * y_sd * (0.5 + rng.uniform());
  double aux = 1.0;  // half-t auxiliary (Huang-Wand)

  Eigen::MatrixXd draws(spec.iterations_per_chain, p + 1);
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int it = 0; it < spec.iterations_per_chain; ++it) {
    // beta | lambda, sigma2
    Eigen::MatrixXd prec = xtx / sigma2;
    Eigen::VectorXd rhs = xty / sigma2;
    for (int j = 0; j < p; ++j) {
      double prior_prec = 1.0 / (lambda(j) * scale2);
      prec(j, j) += prior_prec;
      rhs(j) += prior_prec * prior_mean(j);
    }
    llt.compute(prec);
    if (llt.info() != Eigen::Success)
      throw Error("gibbs: posterior precision not positive definite");
    Eigen::VectorXd mean_vec = llt.solve(rhs);
    Eigen::VectorXd z(p);
    for (int j = 0; j < p; ++j) z(j) = rng.normal();
    // beta = mean + L^{-T} z has covariance prec^{-1}.
    Eigen::VectorXd noise = llt.matrixU().solve(z);
    beta = mean_vec + noise;

    // lambda_j | beta_j: inverse-gamma((nu+1)/2, (nu + ((b-m)/s)^2)/2)
    for (int j = 0; j < p; ++j) {
      double resid = (beta(j) - prior_mean(j));
      double shape = 0.5 * (nu + 1.0);
      double rate = 0.5 * (nu + resid * resid / scale2);
      lambda(j) = rng.inverse_gamma(shape, rate);
    }

    // sigma2 | beta, aux: inverse-gamma((nu+n)/2, nu/aux + RSS/2)
    double rss = (y - x * beta).squaredNorm();
    sigma2 = rng.inverse_gamma(0.5 * (nu + n), nu / aux + 0.5 * rss);

    // aux | sigma2: inverse-gamma((nu+1)/2, nu/sigma2 + 1/scale^2)
    aux = rng.inverse_gamma(0.5 * (nu + 1.0), nu / sigma2 + 1.0 / scale2);

    draws.row(it).head(p) = beta.transpose();
    draws(it, p) = std::sqrt(sigma2);
  }
  return draws;
}

ImputationFit fit_imputation_model(std::span<const IndividualRecord> records,
                                   const ImputationModelSpec& spec) {
  spec.validate();
  ImputationDesign design = build_imputation_design(records, true);
  const int n = static_cast<int>(design.x.rows());
  const int p = static_cast<int>(design.x.cols());
  if (n < 10 * p)
    throw Error("fit_imputation_model: need at least " +
                std::to_string(10 * p) + " complete cases, have " +
                std::to_string(n));

  // Ridge-free rank check; collinear columns are named via the QR pivots.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::string cols;
    for (int k = qr.rank(); k < p; ++k) {
      if (!cols.empty()) cols += ", ";
      cols += design.names[qr.colsPermutation().indices()(k)];
    }
    throw Error("fit_imputation_model: design matrix rank deficient; "
                "collinear columns: " + cols);
  }

  // Chains as independent concurrent tasks on per-chain substreams.
  std::vector<std::future<Eigen::MatrixXd>> futures;
  for (int c = 0; c < spec.chains; ++c) {
    std::uint64_t chain_seed = substream_seed(spec.seed, "impute-chain", c);
    futures.push_back(std::async(std::launch::async, [&, chain_seed] {
      return run_gibbs_chain(design.x, design.y, spec, chain_seed);
    }));
  }

  const int retained = spec.retained_per_chain();
  const int warmup = spec.iterations_per_chain - retained;

  ImputationFit fit;
  fit.posterior.names = design.names;
  fit.posterior.names.push_back("sigma");
  fit.posterior.chains = spec.chains;
  fit.posterior.retained_per_chain = retained;
  fit.posterior.draws.resize(spec.chains * retained, p + 1);

  std::vector<ChainDraws> per_parameter(p + 1);
  for (int k = 0; k <= p; ++k)
    per_parameter[k].assign(spec.chains, std::vector<double>(retained));

  for (int c = 0; c < spec.chains; ++c) {
    Eigen::MatrixXd chain = futures[c].get();
    for (int i = 0; i < retained; ++i) {
      fit.posterior.draws.row(c * retained + i) = chain.row(warmup + i);
      for (int k = 0; k <= p; ++k)
        per_parameter[k][c][i] = chain(warmup + i, k);
    }
  }

  fit.diagnostics = summarize_diagnostics(fit.posterior.names, per_parameter);
  return fit;
}

std::vector<ImputedDataset> draw_imputations(
    std::span<const IndividualRecord> records, const PosteriorDraws& posterior,
    const ImputationModelSpec& spec) {
  spec.validate();
  const int m = spec.m_imputations;
  const int total = posterior.total_draws();
  if (total < m)
    throw Error("draw_imputations: need at least M retained draws");
  const int p = static_cast<int>(posterior.names.size()) - 1;

  ImputationDesign design = build_imputation_design(records, false);
  if (static_cast<int>(design.x.cols()) != p)
    throw Error("draw_imputations: records do not match the fitted schema");

  std::vector<ImputedDataset> datasets;
  datasets.reserve(m);
  for (int im = 1; im <= m; ++im) {
    // Evenly spaced draw indices across the pooled chains.
    int draw_index =
        static_cast<int>((static_cast<long long>(2 * im - 1) * total) / (2 * m));
    Eigen::VectorXd beta = posterior.draws.row(draw_index).head(p);
    double sigma = posterior.draws(draw_index, p);

    Rng rng(substream_seed(spec.seed, "impute-draw", im));
    ImputedDataset ds;
    ds.imputation_index = im;
    ds.provenance_draw = draw_index;
    ds.records.assign(records.begin(), records.end());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      if (ds.records[i].birthweight_g) continue;  // observed rows untouched
      int row = design.row_of_record[i];
      if (row < 0)
        throw Error("draw_imputations: no design row for record " +
                    ds.records[i].record_id);
      double mu = design.x.row(row).dot(beta);
      ds.records[i].birthweight_g = rng.normal(mu, sigma);
    }
    datasets.push_back(std::move(ds));
  }
  return datasets;
}

std::vector<PosteriorSummaryRow> summarize_posterior(
    const ImputationFit& fit) {
  const auto& draws = fit.posterior.draws;
  std::vector<PosteriorSummaryRow> rows;
  for (std::size_t k = 0; k < fit.posterior.names.size(); ++k) {
    std::vector<double> v(draws.rows());
    for (int i = 0; i < draws.rows(); ++i) v[i] = draws(i, k);
    std::sort(v.begin(), v.end());
    auto quantile = [&](double q) {
      double idx = q * (static_cast<double>(v.size()) - 1.0);
      std::size_t lo = static_cast<std::size_t>(idx);
      std::size_t hi = std::min(lo + 1, v.size() - 1);
      double f = idx - static_cast<double>(lo);
      return (1.0 - f) * v[lo] + f * v[hi];
    };
    PosteriorSummaryRow row;
    row.name = fit.posterior.names[k];
    row.estimate = mean(v);
    row.se = sample_sd(v);
    row.ci_lo = quantile(0.025);
    row.ci_hi = quantile(0.975);
    row.rhat = fit.diagnostics.parameters[k].rhat;
    row.bulk_ess = fit.diagnostics.parameters[k].bulk_ess;
    row.tail_ess = fit.diagnostics.parameters[k].tail_ess;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_posterior_summary_csv(std::span<const PosteriorSummaryRow> rows,
                                 const std::string& path) {
  CsvWriter w(path);
  w.write_row({"predictor", "estimate", "se", "ci_lo", "ci_hi", "rhat",
               "bulk_ess", "tail_ess"});
  for (const auto& r : rows)
    w.write_row({r.name, format_double(r.estimate), format_double(r.se),
                 format_double(r.ci_lo), format_double(r.ci_hi),
                 format_double(r.rhat), format_double(r.bulk_ess),
                 format_double(r.tail_ess)});
  w.close();
}

}  // namespace popmatch
