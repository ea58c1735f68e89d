#include "popmatch/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "popmatch/error.hpp"

namespace popmatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DenseCost {
  int m = 0, n = 0;
  std::vector<double> c;  // row-major
  double at(int i, int j) const { return c[i * n + j]; }
};

struct SspSolution {
  std::vector<int> col_of_row;  // size m
  std::vector<double> u, v;     // duals of the shifted problem
  double total = 0.0;           // total in original costs
};

// Shortest augmenting path with dual potentials (the scipy/Crouse scheme).
// Requires m <= n. Costs are shifted so reduced costs stay non-negative.
SspSolution solve_ssp(const DenseCost& cost, double shift) {
  int m = cost.m, n = cost.n;

  SspSolution sol;
  sol.u.assign(m, 0.0);
  sol.v.assign(n, 0.0);
  sol.col_of_row.assign(m, -1);
  std::vector<int> row_of_col(n, -1);

  std::vector<double> shortest(n);
  std::vector<int> pred(n);
  std::vector<char> done_col(n);
  std::vector<char> in_tree_row(m);

  for (int cur = 0; cur < m; ++cur) {
    std::fill(shortest.begin(), shortest.end(), kInf);
    std::fill(pred.begin(), pred.end(), -1);
    std::fill(done_col.begin(), done_col.end(), 0);
    std::fill(in_tree_row.begin(), in_tree_row.end(), 0);

    double min_val = 0.0;
    int i = cur;
    int sink = -1;
    while (sink == -1) {
      in_tree_row[i] = 1;
      int index = -1;
      double lowest = kInf;
      for (int j = 0; j < n; ++j) {
        if (done_col[j]) continue;
        double r = min_val + (cost.at(i, j) - shift) - sol.u[i] - sol.v[j];
        if (r < shortest[j]) {
          shortest[j] = r;
          pred[j] = i;
        }
        if (shortest[j] < lowest ||
            (shortest[j] == lowest && index >= 0 && row_of_col[j] == -1 &&
             row_of_col[index] != -1)) {
          lowest = shortest[j];
          index = j;
        }
      }
      if (index == -1 || lowest == kInf)
        throw Error("assignment: infeasible cost matrix");
      min_val = lowest;
      done_col[index] = 1;
      if (row_of_col[index] == -1)
        sink = index;
      else
        i = row_of_col[index];
    }

    sol.u[cur] += min_val;
    for (int r = 0; r < m; ++r)
      if (in_tree_row[r] && r != cur)
        sol.u[r] += min_val - shortest[sol.col_of_row[r]];
    for (int j = 0; j < n; ++j)
      if (done_col[j]) sol.v[j] -= min_val - shortest[j];

    int j = sink;
    for (;;) {
      int r = pred[j];
      row_of_col[j] = r;
      std::swap(sol.col_of_row[r], j);
      if (r == cur) break;
    }
  }

  sol.total = 0.0;
  for (int r = 0; r < m; ++r) sol.total += cost.at(r, sol.col_of_row[r]);
  return sol;
}

}  // namespace

AssignmentResult solve_assignment(const DistanceMatrix& costs) {
  if (costs.rows == 0 || costs.cols == 0)
    throw Error("solve_assignment: empty cost matrix");
  for (double x : costs.entries)
    if (!std::isfinite(x))
      throw Error("solve_assignment: non-finite cost entry");

  AssignmentResult result;
  DenseCost cost;
  if (costs.rows <= costs.cols) {
    cost.m = costs.rows;
    cost.n = costs.cols;
    cost.c = costs.entries;
  } else {
    result.transposed = true;
    cost.m = costs.cols;
    cost.n = costs.rows;
    cost.c.resize(costs.entries.size());
    for (int i = 0; i < costs.rows; ++i)
      for (int j = 0; j < costs.cols; ++j)
        cost.c[j * costs.rows + i] = costs.at(i, j);
  }

  double shift = 0.0, max_abs = 0.0;
  for (double x : cost.c) {
    shift = std::min(shift, x);
    max_abs = std::max(max_abs, std::fabs(x));
  }

  SspSolution base = solve_ssp(cost, shift);
  const double total = base.total;
  const double eps = 1e-9 * (1.0 + std::fabs(total));
  const double tight_eps = 1e-7 * (1.0 + max_abs);

  // Tie-break pass: walk rows in index order; for each row keep the lowest
  // column that can still complete an assignment of total cost `total`.
  // Only dual-tight edges can sit in an optimum, so columns failing the
  // tightness test are skipped without a re-solve.
  std::vector<int> final_assign(cost.m, -1);
  std::vector<int> live_cols(cost.n);
  for (int j = 0; j < cost.n; ++j) live_cols[j] = j;
  SspSolution cur = base;  // optimum over (rows i.., live_cols)
  double fixed_cost = 0.0;

  for (int i = 0; i < cost.m; ++i) {
    const int incumbent_pos = cur.col_of_row[0];
    int chosen_pos = incumbent_pos;
    bool adopted_trial = false;

    for (int p = 0; p < incumbent_pos; ++p) {
      int j_global = live_cols[p];
      double reduced =
          (cost.at(i, j_global) - shift) - cur.u[0] - cur.v[p];
      if (reduced > tight_eps) continue;

      if (i == cost.m - 1) {
        if (fixed_cost + cost.at(i, j_global) <= total + eps) {
          chosen_pos = p;
          break;
        }
        continue;
      }

      std::vector<int> rest_cols;
      rest_cols.reserve(live_cols.size() - 1);
      for (std::size_t q = 0; q < live_cols.size(); ++q)
        if (static_cast<int>(q) != p) rest_cols.push_back(live_cols[q]);

      DenseCost sub;
      sub.m = cost.m - i - 1;
      sub.n = static_cast<int>(rest_cols.size());
      sub.c.resize(static_cast<std::size_t>(sub.m) * sub.n);
      for (int r = 0; r < sub.m; ++r)
        for (int q = 0; q < sub.n; ++q)
          sub.c[r * sub.n + q] = cost.at(i + 1 + r, rest_cols[q]);
      SspSolution trial = solve_ssp(sub, shift);

      if (fixed_cost + cost.at(i, j_global) + trial.total <= total + eps) {
        chosen_pos = p;
        final_assign[i] = j_global;
        fixed_cost += cost.at(i, j_global);
        live_cols = std::move(rest_cols);
        cur = std::move(trial);
        adopted_trial = true;
        break;
      }
    }

    if (!adopted_trial) {
      int j_global = live_cols[chosen_pos];
      final_assign[i] = j_global;
      fixed_cost += cost.at(i, j_global);
      // Restrict the current optimum: drop row i and the chosen column.
      // The restriction (and its duals) stays optimal for the subproblem.
      live_cols.erase(live_cols.begin() + chosen_pos);
      SspSolution next;
      next.u.assign(cur.u.begin() + 1, cur.u.end());
      next.v = cur.v;
      next.v.erase(next.v.begin() + chosen_pos);
      next.col_of_row.resize(cost.m - i - 1);
      for (int r = 0; r + i + 1 < cost.m; ++r) {
        int old_pos = cur.col_of_row[r + 1];
        next.col_of_row[r] = old_pos - (old_pos > chosen_pos ? 1 : 0);
      }
      cur = std::move(next);
    }
  }

  result.assign = std::move(final_assign);
  result.total_cost = 0.0;
  for (int i = 0; i < cost.m; ++i)
    result.total_cost += cost.at(i, result.assign[i]);
  return result;
}

}  // namespace popmatch
