#pragma once

#include <vector>

#include "popmatch/distances.hpp"

namespace popmatch {

/// Exact min-cost injective assignment of the smaller side of a cost matrix
/// into the larger side.
struct AssignmentResult {
  /// assign[i] = index on the larger side matched to smaller-side index i.
  std::vector<int> assign;
  /// True when the columns were the smaller side (the map goes col -> row).
  bool transposed = false;
  double total_cost = 0.0;
};

/// Shortest-augmenting-path solver (exact, not heuristic). Ties among
/// equal-cost optima are broken lexicographically: lowest smaller-side index
/// first, then lowest larger-side index.
AssignmentResult solve_assignment(const DistanceMatrix& costs);

}  // namespace popmatch
