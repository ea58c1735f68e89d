#pragma once

#include <span>
#include <string>
#include <vector>

#include "popmatch/types.hpp"

namespace popmatch {

struct Stage2Options {
  double rho_prime = 1000.0;
  double xi = 0.05;
  /// Phantom nodes added before matching; -1 picks the minimum that makes
  /// the node count even (0 or 1).
  int n_phantoms = -1;
  /// Match within each country separately instead of pooled.
  bool per_country = false;
};

struct Stage2Audit {
  int input_pairs = 0;
  int discarded = 0;
  int quads = 0;
  double retention_rate = 0.0;  // 2*quads / input_pairs
};

struct Stage2Result {
  std::vector<QuadMatch> quads;
  std::vector<std::string> discarded_pair_ids;
  Stage2Audit audit;
};

/// Stage-two matching: optimal non-bipartite matching of ClusterPairs under
/// the penalized covariate distance. BEC is the member with the smaller
/// (more negative) z_diff; z_diff ties break by pair_id order.
Stage2Result run_stage2(std::span<const ClusterPair> pairs,
                        const Stage2Options& options = {});

struct BalanceRow {
  std::string name;  // covariate label + epoch, or the exposure-change row
  double mean_bec = 0.0;
  double mean_sec = 0.0;
  double std_diff = 0.0;  // (mean_sec - mean_bec) / pre-matching SD
  bool flagged = false;    // |std_diff| >= 0.1
  bool degenerate = false; // zero pre-matching SD with unequal means
};

struct BalanceTable {
  BalanceRow exposure_change;       // z_diff row
  std::vector<BalanceRow> rows;     // 24 covariate-epoch rows
  double max_abs_std_diff = 0.0;    // over covariate rows only
};

/// Table-4-style balance diagnostics. The denominator of every std_diff is
/// the SD of that column over the pre-matching ClusterPairs.
BalanceTable balance_table(std::span<const QuadMatch> quads,
                           std::span<const ClusterPair> pre_match_pairs);

void write_quads_csv(std::span<const QuadMatch> quads,
                     const std::string& path);

std::vector<QuadMatch> load_quads_csv(const std::string& path,
                                      std::span<const ClusterPair> pairs);

void write_balance_csv(const BalanceTable& table, const std::string& path);

}  // namespace popmatch
