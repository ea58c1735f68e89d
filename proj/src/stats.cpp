#include "popmatch/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "popmatch/error.hpp"

namespace popmatch {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw Error("mean of empty range");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(n - 1);
}

double sample_sd(std::span<const double> xs) {
  return std::sqrt(sample_variance(xs));
}

double sample_covariance(std::span<const double> xs,
                         std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error("covariance: length mismatch");
  std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mx = mean(xs), my = mean(ys);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (xs[i] - mx) * (ys[i] - my);
  return s / static_cast<double>(n - 1);
}

double pearson_correlation(std::span<const double> xs,
                           std::span<const double> ys) {
  double sx = sample_sd(xs), sy = sample_sd(ys);
  if (sx == 0.0 || sy == 0.0) throw Error("correlation: zero variance input");
  return sample_covariance(xs, ys) / (sx * sy);
}

double student_t_cdf(double x, double df) {
  boost::math::students_t_distribution<double> dist(df);
  return boost::math::cdf(dist, x);
}

double student_t_quantile(double p, double df) {
  boost::math::students_t_distribution<double> dist(df);
  return boost::math::quantile(dist, p);
}

double normal_cdf(double x) {
  boost::math::normal_distribution<double> dist;
  return boost::math::cdf(dist, x);
}

double normal_quantile(double p) {
  boost::math::normal_distribution<double> dist;
  return boost::math::quantile(dist, p);
}

double two_sided_p(double t, double df) {
  double tail = std::isinf(df) ? normal_cdf(-std::fabs(t))
                               : student_t_cdf(-std::fabs(t), df);
  return 2.0 * tail;
}

}  // namespace popmatch
