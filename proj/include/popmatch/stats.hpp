#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace popmatch {

double mean(std::span<const double> xs);

/// Unbiased (n-1) sample variance; 0 for fewer than 2 values.
double sample_variance(std::span<const double> xs);

double sample_sd(std::span<const double> xs);

double sample_covariance(std::span<const double> xs, std::span<const double> ys);

double pearson_correlation(std::span<const double> xs,
                           std::span<const double> ys);

// Student-t distribution with real-valued degrees of freedom (Rubin's rule
// produces fractional df). Backed by Boost.Math.
double student_t_cdf(double x, double df);
double student_t_quantile(double p, double df);

double normal_cdf(double x);
double normal_quantile(double p);

/// Two-sided p-value for a t statistic; df = +inf falls back to the normal.
double two_sided_p(double t, double df);

}  // namespace popmatch
