#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "popmatch/analyze.hpp"

namespace popmatch {

/// Partial R-squared of a regressor from its t statistic: t^2 / (t^2 + df).
double partial_r2(double t_value, double df);

struct RobustnessValues {
  double rv_sign = 0.0;   // strength needed to flip the point-estimate sign
  double rv_alpha = 0.0;  // strength needed to lose alpha-level significance
};

/// Robustness values from the omitted-variable-bias framework. With partial
/// Cohen's f = |t|/sqrt(df): rv_sign = (sqrt(f^4 + 4 f^2) - f^2) / 2; for
/// rv_alpha, f is first reduced by the critical threshold
/// f* = t*(alpha, df-1)/sqrt(df-1), clamped at 0.
RobustnessValues robustness_values(double t_value, double df,
                                   double alpha = 0.05);

struct SensitivityRow {
  int imputation_index = 0;  // 0 for the averages row
  double estimate = 0.0;
  double se = 0.0;
  double t_value = 0.0;
  double rv_sign = 0.0;
  double rv_alpha = 0.0;
};

struct SensitivityReport {
  std::vector<SensitivityRow> rows;  // one per imputation
  SensitivityRow average;            // arithmetic means of the rows
  /// Benchmark partial R2 of named observed covariates (averaged over fits).
  std::map<std::string, double> benchmarks;
  double df = 0.0;
  double alpha = 0.05;
};

/// Per-imputation robustness values plus partial-R2 benchmarking against
/// observed covariates. df defaults to the fits' residual df and can be
/// overridden (the effective df feeding the RVs is an explicit input).
SensitivityReport run_sensitivity(
    std::span<const RegressionFit> fits,
    std::span<const std::string> benchmark_covariates, double alpha = 0.05,
    std::optional<double> df_override = std::nullopt);

void write_sensitivity_csv(const SensitivityReport& report,
                           const std::string& path);
void write_benchmarks_csv(const SensitivityReport& report,
                          const std::string& path);

}  // namespace popmatch
