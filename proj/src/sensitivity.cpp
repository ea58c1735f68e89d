#include "popmatch/sensitivity.hpp"

#include <cmath>

#include "popmatch/csv.hpp"
#include "popmatch/error.hpp"
#include "popmatch/stats.hpp"

namespace popmatch {

double partial_r2(double t_value, double df) {
  if (df < 1.0) throw Error("partial_r2: df must be >= 1");
  double t2 = t_value * t_value;
  return t2 / (t2 + df);
}

namespace {

// Closed form shared by both robustness values.
double rv_from_f(double f) {
  if (f <= 0.0) return 0.0;
  double f2 = f * f;
  return 0.5 * (std::sqrt(f2 * f2 + 4.0 * f2) - f2);
}

}  // namespace

RobustnessValues robustness_values(double t_value, double df, double alpha) {
  if (df < 2.0) throw Error("robustness_values: df must be >= 2");
  if (alpha <= 0.0 || alpha >= 1.0)
    throw Error("robustness_values: alpha must lie in (0, 1)");
  double f = std::fabs(t_value) / std::sqrt(df);
  RobustnessValues rv;
  rv.rv_sign = rv_from_f(f);
  // One df is consumed by the hypothetical confounder.
  double t_crit = student_t_quantile(1.0 - alpha / 2.0, df - 1.0);
  double f_crit = t_crit / std::sqrt(df - 1.0);
  rv.rv_alpha = rv_from_f(std::max(f - f_crit, 0.0));
  return rv;
}

SensitivityReport run_sensitivity(
    std::span<const RegressionFit> fits,
    std::span<const std::string> benchmark_covariates, double alpha,
    std::optional<double> df_override) {
  if (fits.empty()) throw Error("run_sensitivity: no fits");

  SensitivityReport report;
  report.alpha = alpha;
  report.df = df_override ? *df_override
                          : static_cast<double>(fits[0].residual_df);

  for (std::size_t i = 0; i < fits.size(); ++i) {
    const RegressionFit& fit = fits[i];
    SensitivityRow row;
    row.imputation_index = static_cast<int>(i + 1);
    row.estimate = fit.beta1;
    row.se = fit.se_beta1;
    row.t_value = fit.t_beta1;
    RobustnessValues rv = robustness_values(row.t_value, report.df, alpha);
    row.rv_sign = rv.rv_sign;
    row.rv_alpha = rv.rv_alpha;
    report.rows.push_back(row);
  }

  auto column_mean = [&](auto&& get) {
    std::vector<double> v;
    v.reserve(report.rows.size());
    for (const auto& r : report.rows) v.push_back(get(r));
    return mean(v);
  };
  report.average.imputation_index = 0;
  report.average.estimate =
      column_mean([](const SensitivityRow& r) { return r.estimate; });
  report.average.se = column_mean([](const SensitivityRow& r) { return r.se; });
  report.average.t_value =
      column_mean([](const SensitivityRow& r) { return r.t_value; });
  report.average.rv_sign =
      column_mean([](const SensitivityRow& r) { return r.rv_sign; });
  report.average.rv_alpha =
      column_mean([](const SensitivityRow& r) { return r.rv_alpha; });

  for (const std::string& name : benchmark_covariates) {
    double sum = 0.0;
    for (const RegressionFit& fit : fits) {
      int idx = fit.index_of(name);
      if (idx < 0)
        throw Error("run_sensitivity: unknown benchmark covariate '" + name +
                    "'");
      sum += partial_r2(fit.t[idx], report.df);
    }
    report.benchmarks[name] = sum / static_cast<double>(fits.size());
  }
  return report;
}

void write_sensitivity_csv(const SensitivityReport& report,
                           const std::string& path) {
  CsvWriter w(path);
  w.write_row({"row", "imputation_index", "estimate", "se", "t_value",
               "rv_sign", "rv_alpha"});
  for (const auto& r : report.rows)
    w.write_row({"imputation", format_int(r.imputation_index),
                 format_double(r.estimate), format_double(r.se),
                 format_double(r.t_value), format_double(r.rv_sign),
                 format_double(r.rv_alpha)});
  const auto& a = report.average;
  w.write_row({"average", "", format_double(a.estimate), format_double(a.se),
               format_double(a.t_value), format_double(a.rv_sign),
               format_double(a.rv_alpha)});
  w.close();
}

void write_benchmarks_csv(const SensitivityReport& report,
                          const std::string& path) {
  CsvWriter w(path);
  w.write_row({"covariate", "partial_r2"});
  for (const auto& [name, value] : report.benchmarks)
    w.write_row({name, format_double(value)});
  w.close();
}

}  // namespace popmatch
