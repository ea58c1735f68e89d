#include "popmatch/distances.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "popmatch/csv.hpp"
#include "popmatch/error.hpp"
#include "popmatch/stats.hpp"

namespace popmatch {

DistanceMatrix DistanceMatrix::zeros(int rows, int cols) {
  DistanceMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.entries.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  m.penalty_mask.assign(static_cast<std::size_t>(rows) * cols, 0);
  return m;
}

RankCovariance pooled_rank_covariance(std::span<const int> rank_x_early,
                                      std::span<const int> rank_y_early,
                                      std::span<const int> rank_x_late,
                                      std::span<const int> rank_y_late) {
  std::vector<double> px, py;
  px.reserve(rank_x_early.size() + rank_x_late.size());
  py.reserve(px.capacity());
  for (int r : rank_x_early) px.push_back(r);
  for (int r : rank_x_late) px.push_back(r);
  for (int r : rank_y_early) py.push_back(r);
  for (int r : rank_y_late) py.push_back(r);

  RankCovariance cov;
  cov.sigma11 = sample_variance(px);
  cov.sigma22 = sample_variance(py);
  cov.sigma12 = sample_covariance(px, py);

  double trace = cov.sigma11 + cov.sigma22;
  if (cov.determinant() <= 1e-12 * std::max(trace * trace, 1.0)) {
    double ridge = kCovarianceRidge * std::max(trace, 1.0) / 2.0;
    cov.sigma11 += ridge;
    cov.sigma22 += ridge;
  }
  if (cov.determinant() <= 0.0)
    throw Error("stage-one rank covariance singular even after ridge");
  return cov;
}

DistanceMatrix stage1_distance_matrix(std::span<const GeoPoint> early,
                                      std::span<const GeoPoint> late,
                                      double caliper_multiplier, double rho) {
  if (early.empty() || late.empty())
    throw Error("stage1_distance_matrix: both epochs need clusters");

  auto coords = [](std::span<const GeoPoint> pts, bool lon) {
    std::vector<double> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      out[i] = lon ? pts[i].longitude_deg : pts[i].latitude_deg;
    return out;
  };
  // Four rank vectors, computed within epoch and coordinate.
  auto rx_early = max_rank(coords(early, true));
  auto ry_early = max_rank(coords(early, false));
  auto rx_late = max_rank(coords(late, true));
  auto ry_late = max_rank(coords(late, false));

  RankCovariance cov =
      pooled_rank_covariance(rx_early, ry_early, rx_late, ry_late);
  double det = cov.determinant();
  double inv11 = cov.sigma22 / det;
  double inv22 = cov.sigma11 / det;
  double inv12 = -cov.sigma12 / det;

  int m = static_cast<int>(early.size());
  int n = static_cast<int>(late.size());
  DistanceMatrix out = DistanceMatrix::zeros(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double dx = rx_early[i] - rx_late[j];
      double dy = ry_early[i] - ry_late[j];
      double q = dx * dx * inv11 + 2.0 * dx * dy * inv12 + dy * dy * inv22;
      out.at(i, j) = std::sqrt(std::max(q, 0.0));
    }
  }

  double caliper = caliper_multiplier * sample_sd(out.entries);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (out.at(i, j) >= caliper) {
        out.at(i, j) += rho;
        out.penalty_mask[i * n + j] = 1;
      }
    }
  }
  return out;
}

DistanceMatrix stage2_distance_matrix(std::span<const ClusterPair> pairs,
                                      double rho_prime, double xi) {
  int n = static_cast<int>(pairs.size());
  if (n < 2) throw Error("stage2_distance_matrix: need at least 2 pairs");

  constexpr int dim = 2 * kNumClusterCovariates;
  Eigen::MatrixXd x(n, dim);
  for (int s = 0; s < n; ++s) {
    auto v = pairs[s].covariates_24();
    for (int k = 0; k < dim; ++k) x(s, k) = v[k];
  }
  Eigen::RowVectorXd mu = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mu;
  Eigen::MatrixXd sigma = centered.transpose() * centered / double(n - 1);

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    double ridge = kCovarianceRidge * std::max(sigma.trace(), 1.0) / dim;
    sigma.diagonal().array() += ridge;
    llt.compute(sigma);
    if (llt.info() != Eigen::Success)
      throw Error("stage-two covariance singular even after ridge");
  }

  DistanceMatrix out = DistanceMatrix::zeros(n, n);
  for (int s = 0; s < n; ++s) {
    out.at(s, s) = kSelfMatchSentinel;
    for (int t = s + 1; t < n; ++t) {
      Eigen::VectorXd delta = (x.row(s) - x.row(t)).transpose();
      double q = delta.dot(llt.solve(delta));
      double d = std::sqrt(std::max(q, 0.0));
      bool penalized =
          std::fabs(pairs[s].z_diff - pairs[t].z_diff) < xi;
      if (penalized) d += rho_prime;
      out.at(s, t) = d;
      out.at(t, s) = d;
      out.penalty_mask[s * n + t] = penalized ? 1 : 0;
      out.penalty_mask[t * n + s] = penalized ? 1 : 0;
    }
  }
  return out;
}

void dump_distance_matrix(const DistanceMatrix& m, const std::string& path) {
  CsvWriter w(path);
  std::vector<std::string> header = {"row"};
  for (int j = 0; j < m.cols; ++j) header.push_back("c" + std::to_string(j));
  w.write_row(header);
  for (int i = 0; i < m.rows; ++i) {
    std::vector<std::string> row = {std::to_string(i)};
    for (int j = 0; j < m.cols; ++j) row.push_back(format_double(m.at(i, j)));
    w.write_row(row);
  }
  w.close();
}

}  // namespace popmatch
