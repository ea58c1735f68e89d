// Independent reference implementations used as test oracles. These stay
// deliberately naive (textbook formulas, exhaustive search) and must not
// share code with the library paths they check.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "popmatch/geo.hpp"
#include "popmatch/types.hpp"

namespace oracles {

// ---- stage-one distance formula, straight-line -------------------------

struct Stage1Oracle {
  std::vector<std::vector<double>> d;       // unpenalized distances
  std::vector<std::vector<double>> total;   // with caliper penalty
  std::vector<std::vector<bool>> penalized;
  double caliper = 0.0;
};

inline std::vector<double> naive_max_rank(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    int count = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[i] >= x[j]) ++count;
    r[i] = count;
  }
  return r;
}

inline double naive_variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

inline double naive_covariance(const std::vector<double>& a,
                               const std::vector<double>& b) {
  double ma = 0.0, mb = 0.0;
  for (double x : a) ma += x;
  for (double x : b) mb += x;
  ma /= a.size();
  mb /= b.size();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / (a.size() - 1);
}

inline Stage1Oracle stage1_oracle(const std::vector<popmatch::GeoPoint>& early,
                                  const std::vector<popmatch::GeoPoint>& late,
                                  double caliper_multiplier, double rho) {
  std::vector<double> xe, ye, xl, yl;
  for (auto& p : early) {
    xe.push_back(p.longitude_deg);
    ye.push_back(p.latitude_deg);
  }
  for (auto& p : late) {
    xl.push_back(p.longitude_deg);
    yl.push_back(p.latitude_deg);
  }
  auto rxe = naive_max_rank(xe), rye = naive_max_rank(ye);
  auto rxl = naive_max_rank(xl), ryl = naive_max_rank(yl);

  std::vector<double> px = rxe, py = rye;
  px.insert(px.end(), rxl.begin(), rxl.end());
  py.insert(py.end(), ryl.begin(), ryl.end());
  double s11 = naive_variance(px);
  double s22 = naive_variance(py);
  double s12 = naive_covariance(px, py);
  double det = s11 * s22 - s12 * s12;
  double trace = s11 + s22;
  if (det <= 1e-12 * std::max(trace * trace, 1.0)) {
    double ridge = 1e-8 * std::max(trace, 1.0) / 2.0;
    s11 += ridge;
    s22 += ridge;
    det = s11 * s22 - s12 * s12;
  }

  Stage1Oracle oracle;
  std::size_t m = early.size(), n = late.size();
  oracle.d.assign(m, std::vector<double>(n));
  std::vector<double> flat;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double dx = rxe[i] - rxl[j];
      double dy = rye[i] - ryl[j];
      // (dx,dy) Sigma^-1 (dx,dy)^T with the explicit 2x2 inverse.
      double q = (dx * (s22 * dx - s12 * dy) + dy * (-s12 * dx + s11 * dy)) / det;
      oracle.d[i][j] = std::sqrt(std::max(q, 0.0));
      flat.push_back(oracle.d[i][j]);
    }

  double mean = 0.0;
  for (double v : flat) mean += v;
  mean /= flat.size();
  double var = 0.0;
  for (double v : flat) var += (v - mean) * (v - mean);
  double sd = flat.size() > 1 ? std::sqrt(var / (flat.size() - 1)) : 0.0;
  oracle.caliper = caliper_multiplier * sd;

  oracle.total = oracle.d;
  oracle.penalized.assign(m, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (oracle.d[i][j] >= oracle.caliper) {
        oracle.total[i][j] += rho;
        oracle.penalized[i][j] = true;
      }
  return oracle;
}

// ---- stage-two distance formula, straight-line -------------------------

inline std::vector<std::vector<double>> gauss_jordan_inverse(
    std::vector<std::vector<double>> a) {
  std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    double p = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= p;
      inv[col][c] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

inline std::vector<std::vector<double>> stage2_oracle(
    const std::vector<popmatch::ClusterPair>& pairs, double rho_prime,
    double xi, double diagonal_sentinel) {
  std::size_t n = pairs.size();
  constexpr int dim = 24;
  std::vector<std::array<double, dim>> x;
  for (auto& p : pairs) x.push_back(p.covariates_24());

  std::array<double, dim> mu{};
  for (auto& row : x)
    for (int k = 0; k < dim; ++k) mu[k] += row[k] / n;
  std::vector<std::vector<double>> sigma(dim, std::vector<double>(dim, 0.0));
  for (auto& row : x)
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        sigma[a][b] += (row[a] - mu[a]) * (row[b] - mu[b]) / (n - 1);

  // Mirror the library's ridge policy for singular covariances.
  bool singular = false;
  {
    Eigen::MatrixXd s(dim, dim);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) s(a, b) = sigma[a][b];
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    singular = llt.info() != Eigen::Success;
  }
  if (singular) {
    double trace = 0.0;
    for (int k = 0; k < dim; ++k) trace += sigma[k][k];
    double ridge = 1e-8 * std::max(trace, 1.0) / dim;
    for (int k = 0; k < dim; ++k) sigma[k][k] += ridge;
  }
  auto inv = gauss_jordan_inverse(sigma);

  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < n; ++s) {
    out[s][s] = diagonal_sentinel;
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t) continue;
      double q = 0.0;
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
          q += (x[s][a] - x[t][a]) * inv[a][b] * (x[s][b] - x[t][b]);
      double d = std::sqrt(std::max(q, 0.0));
      if (std::fabs(pairs[s].z_diff - pairs[t].z_diff) < xi) d += rho_prime;
      out[s][t] = d;
    }
  }
  return out;
}

// ---- exhaustive matching oracles ----------------------------------------

/// Minimum-cost injection of rows into columns (rows <= cols), via
/// exhaustive DP over column subsets.
inline double brute_force_assignment(const std::vector<std::vector<double>>& c) {
  int m = static_cast<int>(c.size());
  int n = static_cast<int>(c[0].size());
  std::vector<double> dp(static_cast<std::size_t>(1) << n,
                         std::numeric_limits<double>::infinity());
  dp[0] = 0.0;
  for (std::size_t mask = 0; mask < dp.size(); ++mask) {
    int row = __builtin_popcountll(mask);
    if (row >= m || dp[mask] == std::numeric_limits<double>::infinity())
      continue;
    for (int j = 0; j < n; ++j) {
      if (mask & (1ull << j)) continue;
      std::size_t next = mask | (1ull << j);
      dp[next] = std::min(dp[next], dp[mask] + c[row][j]);
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 0; mask < dp.size(); ++mask)
    if (__builtin_popcountll(mask) == m) best = std::min(best, dp[mask]);
  return best;
}

/// Plain recursive enumeration over all injections (for cross-checking the
/// DP on tiny instances).
inline double enumerate_assignment(const std::vector<std::vector<double>>& c,
                                   int row = 0, unsigned used = 0) {
  int m = static_cast<int>(c.size());
  int n = static_cast<int>(c[0].size());
  if (row == m) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    if (used & (1u << j)) continue;
    best = std::min(best, c[row][j] +
                              enumerate_assignment(c, row + 1, used | (1u << j)));
  }
  return best;
}

/// Minimum-weight perfect matching by (n-1)!! enumeration.
inline double brute_force_perfect_matching(
    const std::vector<std::vector<double>>& w, std::vector<int>& taken) {
  int n = static_cast<int>(w.size());
  int first = -1;
  for (int i = 0; i < n; ++i)
    if (!taken[i]) {
      first = i;
      break;
    }
  if (first < 0) return 0.0;
  taken[first] = 1;
  double best = std::numeric_limits<double>::infinity();
  for (int j = first + 1; j < n; ++j) {
    if (taken[j]) continue;
    taken[j] = 1;
    best = std::min(best, w[first][j] + brute_force_perfect_matching(w, taken));
    taken[j] = 0;
  }
  taken[first] = 0;
  return best;
}

inline double brute_force_perfect_matching(
    const std::vector<std::vector<double>>& w) {
  std::vector<int> taken(w.size(), 0);
  return brute_force_perfect_matching(w, taken);
}

// ---- full-dummy OLS oracle ----------------------------------------------

struct FullDummyFit {
  Eigen::VectorXd coefficients;  // the 25 working-model terms
  Eigen::VectorXd se;
  double rss = 0.0;
};

/// Fits the working model with explicit matched-set dummies on the 2I rows
/// (no global intercept column: it is absorbed by the I dummies). SEs use
/// the supplied residual df so both paths share the df convention.
inline FullDummyFit full_dummy_ols(const Eigen::MatrixXd& x_terms,
                                   const Eigen::VectorXd& y,
                                   int n_sets, int residual_df) {
  int rows = static_cast<int>(x_terms.rows());
  int p = static_cast<int>(x_terms.cols());
  Eigen::MatrixXd x(rows, p + n_sets);
  x.leftCols(p) = x_terms;
  x.rightCols(n_sets).setZero();
  for (int r = 0; r < rows; ++r) x(r, p + r / 2) = 1.0;

  Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::VectorXd beta = xtx.ldlt().solve(x.transpose() * y);
  double rss = (y - x * beta).squaredNorm();
  Eigen::MatrixXd cov =
      xtx.ldlt().solve(Eigen::MatrixXd::Identity(p + n_sets, p + n_sets)) *
      (rss / residual_df);

  FullDummyFit fit;
  fit.coefficients = beta.head(p);
  fit.se.resize(p);
  for (int k = 0; k < p; ++k) fit.se(k) = std::sqrt(cov(k, k));
  fit.rss = rss;
  return fit;
}

}  // namespace oracles
