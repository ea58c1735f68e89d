#include "popmatch/blossom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "popmatch/error.hpp"

namespace popmatch {

namespace detail {

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

WeightedBlossom::WeightedBlossom(int n) : n_(n) {
  int cap = 2 * n + 2;
  g_.assign(cap, std::vector<Edge>(cap));
  for (int u = 0; u < cap; ++u)
    for (int v = 0; v < cap; ++v) g_[u][v] = Edge{u, v, 0};
  lab_.assign(cap, 0);
  match_.assign(cap, 0);
  slack_.assign(cap, 0);
  st_.assign(cap, 0);
  pa_.assign(cap, 0);
  s_.assign(cap, -1);
  vis_.assign(cap, 0);
  flower_.assign(cap, {});
  flower_from_.assign(cap, std::vector<int>(n + 1, 0));
}

void WeightedBlossom::set_weight(int u, int v, long long w) {
  // Doubled so that dual updates (which halve deltas) stay integral.
  g_[u + 1][v + 1].w = g_[v + 1][u + 1].w = 2 * w;
}

void WeightedBlossom::update_slack(int u, int x) {
  if (!slack_[x] || edge_delta(g_[u][x]) < edge_delta(g_[slack_[x]][x]))
    slack_[x] = u;
}

void WeightedBlossom::set_slack(int x) {
  slack_[x] = 0;
  for (int u = 1; u <= n_; ++u)
    if (g_[u][x].w > 0 && st_[u] != x && s_[st_[u]] == 0) update_slack(u, x);
}

void WeightedBlossom::push_queue(int x) {
  if (x <= n_) {
    queue_.push_back(x);
  } else {
    for (int t : flower_[x]) push_queue(t);
  }
}

void WeightedBlossom::set_st(int x, int b) {
  st_[x] = b;
  if (x > n_)
    for (int t : flower_[x]) set_st(t, b);
}

int WeightedBlossom::get_pr(int b, int xr) {
  int pr = static_cast<int>(
      std::find(flower_[b].begin(), flower_[b].end(), xr) -
      flower_[b].begin());
  if (pr % 2 == 1) {
    // Orient the odd cycle so the path from the tip has even length.
    std::reverse(flower_[b].begin() + 1, flower_[b].end());
    return static_cast<int>(flower_[b].size()) - pr;
  }
  return pr;
}

void WeightedBlossom::set_match(int u, int v) {
  match_[u] = g_[u][v].v;
  if (u <= n_) return;
  Edge e = g_[u][v];
  int xr = flower_from_[u][e.u];
  int pr = get_pr(u, xr);
  for (int i = 0; i < pr; ++i) set_match(flower_[u][i], flower_[u][i ^ 1]);
  set_match(xr, v);
  std::rotate(flower_[u].begin(), flower_[u].begin() + pr, flower_[u].end());
}

void WeightedBlossom::augment(int u, int v) {
  for (;;) {
    int xnv = st_[match_[u]];
    set_match(u, v);
    if (!xnv) return;
    set_match(xnv, st_[pa_[xnv]]);
    u = st_[pa_[xnv]];
    v = xnv;
  }
}

int WeightedBlossom::get_lca(int u, int v) {
  for (++lca_clock_; u || v; std::swap(u, v)) {
    if (u == 0) continue;
    if (vis_[u] == lca_clock_) return u;
    vis_[u] = lca_clock_;
    u = st_[match_[u]];
    if (u) u = st_[pa_[u]];
  }
  return 0;
}

void WeightedBlossom::add_blossom(int u, int lca, int v) {
  int b = n_ + 1;
  while (b <= n_x_ && st_[b]) ++b;
  if (b > n_x_) ++n_x_;
  lab_[b] = 0;
  s_[b] = 0;
  match_[b] = match_[lca];
  flower_[b].clear();
  flower_[b].push_back(lca);
  for (int x = u, y; x != lca; x = st_[pa_[y]]) {
    flower_[b].push_back(x);
    y = st_[match_[x]];
    flower_[b].push_back(y);
    push_queue(y);
  }
  std::reverse(flower_[b].begin() + 1, flower_[b].end());
  for (int x = v, y; x != lca; x = st_[pa_[y]]) {
    flower_[b].push_back(x);
    y = st_[match_[x]];
    flower_[b].push_back(y);
    push_queue(y);
  }
  set_st(b, b);
  for (int x = 1; x <= n_x_; ++x) g_[b][x].w = g_[x][b].w = 0;
  for (int x = 1; x <= n_; ++x) flower_from_[b][x] = 0;
  for (int xs : flower_[b]) {
    for (int x = 1; x <= n_x_; ++x)
      if (g_[b][x].w == 0 ||
          edge_delta(g_[xs][x]) < edge_delta(g_[b][x])) {
        g_[b][x] = g_[xs][x];
        g_[x][b] = g_[x][xs];
      }
    for (int x = 1; x <= n_; ++x)
      if (flower_from_[xs][x]) flower_from_[b][x] = xs;
  }
  set_slack(b);
}

void WeightedBlossom::expand_blossom(int b) {
  for (int t : flower_[b]) set_st(t, t);
  int xr = flower_from_[b][g_[b][pa_[b]].u];
  int pr = get_pr(b, xr);
  for (int i = 0; i < pr; i += 2) {
    int xs = flower_[b][i];
    int xns = flower_[b][i + 1];
    pa_[xs] = g_[xns][xs].u;
    s_[xs] = 1;
    s_[xns] = 0;
    slack_[xs] = 0;
    set_slack(xns);
    push_queue(xns);
  }
  s_[xr] = 1;
  pa_[xr] = pa_[b];
  for (std::size_t i = pr + 1; i < flower_[b].size(); ++i) {
    int xs = flower_[b][i];
    s_[xs] = -1;
    set_slack(xs);
  }
  st_[b] = 0;
}

bool WeightedBlossom::on_found_edge(const Edge& e) {
  int u = st_[e.u];
  int v = st_[e.v];
  if (s_[v] == -1) {
    pa_[v] = e.u;
    s_[v] = 1;
    int nu = st_[match_[v]];
    slack_[v] = slack_[nu] = 0;
    s_[nu] = 0;
    push_queue(nu);
  } else if (s_[v] == 0) {
    int lca = get_lca(u, v);
    if (!lca) {
      augment(u, v);
      augment(v, u);
      return true;
    }
    add_blossom(u, lca, v);
  }
  return false;
}

bool WeightedBlossom::matching_phase() {
  std::fill(s_.begin(), s_.begin() + n_x_ + 1, -1);
  std::fill(slack_.begin(), slack_.begin() + n_x_ + 1, 0);
  queue_.clear();
  queue_head_ = 0;
  for (int x = 1; x <= n_x_; ++x)
    if (st_[x] == x && !match_[x]) {
      pa_[x] = 0;
      s_[x] = 0;
      push_queue(x);
    }
  if (queue_.size() == queue_head_) return false;
  for (;;) {
    while (queue_head_ < queue_.size()) {
      int u = queue_[queue_head_++];
      if (s_[st_[u]] == 1) continue;
      for (int v = 1; v <= n_; ++v)
        if (g_[u][v].w > 0 && st_[u] != st_[v]) {
          if (edge_delta(g_[u][v]) == 0) {
            if (on_found_edge(g_[u][v])) return true;
          } else {
            update_slack(u, st_[v]);
          }
        }
    }
    long long d = kInf;
    for (int b = n_ + 1; b <= n_x_; ++b)
      if (st_[b] == b && s_[b] == 1) d = std::min(d, lab_[b] / 2);
    for (int x = 1; x <= n_x_; ++x)
      if (st_[x] == x && slack_[x]) {
        if (s_[x] == -1)
          d = std::min(d, edge_delta(g_[slack_[x]][x]));
        else if (s_[x] == 0)
          d = std::min(d, edge_delta(g_[slack_[x]][x]) / 2);
      }
    for (int u = 1; u <= n_; ++u) {
      if (s_[st_[u]] == 0) {
        if (lab_[u] <= d) return false;
        lab_[u] -= d;
      } else if (s_[st_[u]] == 1) {
        lab_[u] += d;
      }
    }
    for (int b = n_ + 1; b <= n_x_; ++b)
      if (st_[b] == b) {
        if (s_[b] == 0)
          lab_[b] += 2 * d;
        else if (s_[b] == 1)
          lab_[b] -= 2 * d;
      }
    queue_.clear();
    queue_head_ = 0;
    for (int x = 1; x <= n_x_; ++x)
      if (st_[x] == x && slack_[x] && st_[slack_[x]] != x &&
          edge_delta(g_[slack_[x]][x]) == 0)
        if (on_found_edge(g_[slack_[x]][x])) return true;
    for (int b = n_ + 1; b <= n_x_; ++b)
      if (st_[b] == b && s_[b] == 1 && lab_[b] == 0) expand_blossom(b);
  }
}

std::vector<int> WeightedBlossom::solve() {
  n_x_ = n_;
  long long w_max = 0;
  for (int u = 1; u <= n_; ++u) {
    st_[u] = u;
    flower_[u].clear();
    for (int v = 1; v <= n_; ++v) {
      flower_from_[u][v] = (u == v ? u : 0);
      w_max = std::max(w_max, g_[u][v].w);
    }
  }
  for (int u = 1; u <= n_; ++u) lab_[u] = w_max;
  while (matching_phase()) {
  }
  std::vector<int> mate(n_, -1);
  for (int u = 1; u <= n_; ++u)
    if (match_[u]) mate[u - 1] = match_[u] - 1;
  return mate;
}

}  // namespace detail

PerfectMatchingResult solve_perfect_matching(const DistanceMatrix& dist,
                                             int n_phantoms) {
  if (dist.rows != dist.cols)
    throw Error("solve_perfect_matching: matrix must be square");
  int n_real = dist.rows;
  if (n_phantoms < 0) throw Error("solve_perfect_matching: n_phantoms < 0");
  int n_total = n_real + n_phantoms;
  if (n_total % 2 != 0)
    throw Error(
        "solve_perfect_matching: " + std::to_string(n_real) + " real + " +
        std::to_string(n_phantoms) +
        " phantom nodes is odd; add or remove one phantom to make the "
        "total even");

  PerfectMatchingResult result;
  if (n_total == 0) return result;

  double max_abs = 0.0;
  for (int i = 0; i < n_real; ++i)
    for (int j = 0; j < n_real; ++j) {
      if (i == j) continue;
      double w = dist.at(i, j);
      if (!std::isfinite(w) || w < 0.0)
        throw Error("solve_perfect_matching: weights must be finite and >= 0");
      if (std::fabs(w - dist.at(j, i)) >
          1e-9 * (1.0 + std::fabs(w)))
        throw Error("solve_perfect_matching: matrix is not symmetric");
      max_abs = std::max(max_abs, w);
    }

  // Phantom-phantom edges must lose against any matching that avoids them.
  double sentinel = (max_abs + 1.0) * (n_total / 2 + 1);
  double overall_max = std::max(max_abs, n_phantoms >= 2 ? sentinel : 0.0);

  // Integer scaling: power of two, capped so doubled weights and their
  // sums stay far from int64 overflow. Integer-valued inputs stay exact.
  double scale = std::exp2(31);
  double limit = std::exp2(55) / (4.0 * (overall_max + 1.0));
  if (scale > limit) scale = std::exp2(std::floor(std::log2(limit)));

  auto scaled = [&](double w) { return std::llround(w * scale); };
  long long c_max = 0;
  for (int i = 0; i < n_real; ++i)
    for (int j = i + 1; j < n_real; ++j)
      c_max = std::max(c_max, scaled(dist.at(i, j)));
  if (n_phantoms >= 2) c_max = std::max(c_max, scaled(sentinel));
  long long big = c_max + 1;

  // Min-weight perfect matching via max-weight matching on transformed
  // weights big - w: all weights positive, the graph complete, so the
  // maximum weight matching is perfect and minimizes the original total.
  detail::WeightedBlossom solver(n_total);
  for (int i = 0; i < n_total; ++i)
    for (int j = i + 1; j < n_total; ++j) {
      long long w;
      if (i < n_real && j < n_real)
        w = scaled(dist.at(i, j));
      else if (i >= n_real && j >= n_real)
        w = scaled(sentinel);
      else
        w = 0;
      solver.set_weight(i, j, big - w);
    }
  std::vector<int> mate = solver.solve();

  for (int i = 0; i < n_total; ++i) {
    int j = mate[i];
    if (j < 0)
      throw Error("solve_perfect_matching: no perfect matching found");
    if (j < i) continue;
    if (i < n_real && j < n_real) {
      result.edges.emplace_back(i, j);
      result.total_cost += dist.at(i, j);
    } else if (i < n_real) {
      result.discarded.push_back(i);
    } else if (j < n_real) {
      result.discarded.push_back(j);
    }
  }
  std::sort(result.discarded.begin(), result.discarded.end());
  return result;
}

}  // namespace popmatch
