#pragma once

#include <utility>
#include <vector>

#include "popmatch/distances.hpp"

namespace popmatch {

struct PerfectMatchingResult {
  /// Matched real-real index pairs, first < second, sorted by first.
  std::vector<std::pair<int, int>> edges;
  /// Real indices matched to a phantom node (discarded from the study).
  std::vector<int> discarded;
  /// Optimal total over real-real edges only.
  double total_cost = 0.0;
};

/// Exact minimum-weight perfect matching on the general graph given by a
/// symmetric distance matrix, after appending n_phantoms phantom nodes.
/// Phantom-real edges cost 0 and phantom-phantom edges carry a prohibitive
/// sentinel, so phantoms always absorb real nodes. The diagonal of `dist`
/// is ignored (self-matching is impossible in a matching).
///
/// Throws if rows != cols, the matrix is not symmetric, or the total node
/// count is odd (the error says how to adjust n_phantoms).
PerfectMatchingResult solve_perfect_matching(const DistanceMatrix& dist,
                                             int n_phantoms);

namespace detail {

/// Blossom-algorithm core: maximum weight perfect matching with integer
/// weights on a complete graph, O(n^3). Weights are doubled internally so
/// dual variables stay integral. Public solver wraps it with the usual
/// min<->max transform.
class WeightedBlossom {
 public:
  explicit WeightedBlossom(int n);

  /// Set weight of undirected edge (u, v), 0-based, w >= 1.
  void set_weight(int u, int v, long long w);

  /// Runs the matching; returns mate[] (0-based, -1 when unmatched, which
  /// cannot happen for complete graphs with positive weights and even n).
  std::vector<int> solve();

 private:
  struct Edge {
    int u = 0, v = 0;
    long long w = 0;
  };

  long long edge_delta(const Edge& e) const {
    return lab_[e.u] + lab_[e.v] - g_[e.u][e.v].w;
  }
  void update_slack(int u, int x);
  void set_slack(int x);
  void push_queue(int x);
  void set_st(int x, int b);
  int get_pr(int b, int xr);
  void set_match(int u, int v);
  void augment(int u, int v);
  int get_lca(int u, int v);
  void add_blossom(int u, int lca, int v);
  void expand_blossom(int b);
  bool on_found_edge(const Edge& e);
  bool matching_phase();

  int n_ = 0;    // real vertices, 1-based
  int n_x_ = 0;  // current node count including blossoms
  int lca_clock_ = 0;
  std::vector<std::vector<Edge>> g_;
  std::vector<long long> lab_;
  std::vector<int> match_, slack_, st_, pa_, s_, vis_;
  std::vector<std::vector<int>> flower_, flower_from_;
  std::vector<int> queue_;
  std::size_t queue_head_ = 0;
};

}  // namespace detail

}  // namespace popmatch
