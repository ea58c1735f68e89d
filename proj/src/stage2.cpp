#include "popmatch/stage2.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "popmatch/blossom.hpp"
#include "popmatch/csv.hpp"
#include "popmatch/distances.hpp"
#include "popmatch/stats.hpp"

namespace popmatch {

namespace {

// BEC has the more negative exposure change; ties break by pair_id.
bool is_bec(const ClusterPair& a, const ClusterPair& b) {
  if (a.z_diff != b.z_diff) return a.z_diff < b.z_diff;
  return a.pair_id < b.pair_id;
}

void match_group(std::span<const ClusterPair> pairs,
                 const Stage2Options& options, Stage2Result& out) {
  int n = static_cast<int>(pairs.size());
  DistanceMatrix dist =
      stage2_distance_matrix(pairs, options.rho_prime, options.xi);
  int phantoms = options.n_phantoms >= 0 ? options.n_phantoms : (n % 2);
  PerfectMatchingResult matching = solve_perfect_matching(dist, phantoms);

  for (auto [s, t] : matching.edges) {
    const ClusterPair& a = pairs[s];
    const ClusterPair& b = pairs[t];
    QuadMatch q;
    bool a_is_bec = is_bec(a, b);
    q.bec = a_is_bec ? a : b;
    q.sec = a_is_bec ? b : a;
    q.distance = dist.at(s, t);
    out.quads.push_back(std::move(q));
  }
  for (int idx : matching.discarded)
    out.discarded_pair_ids.push_back(pairs[idx].pair_id);
}

}  // namespace

Stage2Result run_stage2(std::span<const ClusterPair> pairs,
                        const Stage2Options& options) {
  if (pairs.size() < 2) throw Error("run_stage2: need at least 2 pairs");

  Stage2Result result;
  result.audit.input_pairs = static_cast<int>(pairs.size());

  if (options.per_country) {
    std::map<std::string, std::vector<ClusterPair>> groups;
    for (const ClusterPair& p : pairs)
      groups[p.early.country].push_back(p);
    for (auto& [country, group] : groups) {
      if (group.size() < 2) {
        for (auto& p : group) result.discarded_pair_ids.push_back(p.pair_id);
        continue;
      }
      match_group(group, options, result);
    }
  } else {
    match_group(pairs, options, result);
  }

  // Stable ids after the fact so per-country merges stay deterministic.
  for (std::size_t i = 0; i < result.quads.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "q%05zu", i + 1);
    result.quads[i].quad_id = buf;
  }
  result.audit.quads = static_cast<int>(result.quads.size());
  result.audit.discarded = static_cast<int>(result.discarded_pair_ids.size());
  result.audit.retention_rate =
      2.0 * result.audit.quads / result.audit.input_pairs;
  return result;
}

BalanceTable balance_table(std::span<const QuadMatch> quads,
                           std::span<const ClusterPair> pre_match_pairs) {
  if (quads.empty()) throw Error("balance_table: no quads");
  if (pre_match_pairs.empty())
    throw Error("balance_table: no pre-matching pairs");

  constexpr int dim = 2 * kNumClusterCovariates;
  auto column_of = [](const ClusterPair& p, int col) {
    if (col == dim) return p.z_diff;
    return p.covariates_24()[col];
  };

  BalanceTable table;
  for (int col = 0; col <= dim; ++col) {
    std::vector<double> pre(pre_match_pairs.size());
    for (std::size_t i = 0; i < pre_match_pairs.size(); ++i)
      pre[i] = column_of(pre_match_pairs[i], col);
    double sd_pre = sample_sd(pre);

    std::vector<double> bec(quads.size()), sec(quads.size());
    for (std::size_t i = 0; i < quads.size(); ++i) {
      bec[i] = column_of(quads[i].bec, col);
      sec[i] = column_of(quads[i].sec, col);
    }
    BalanceRow row;
    row.mean_bec = mean(bec);
    row.mean_sec = mean(sec);
    if (sd_pre == 0.0) {
      row.std_diff = 0.0;
      row.degenerate = row.mean_bec != row.mean_sec;
    } else {
      row.std_diff = (row.mean_sec - row.mean_bec) / sd_pre;
    }
    row.flagged = std::fabs(row.std_diff) >= 0.1;

    if (col == dim) {
      row.name = "z_diff";
      table.exposure_change = row;
    } else {
      // Table layout: per covariate, early then late.
      int cov = col % kNumClusterCovariates;
      bool late = col >= kNumClusterCovariates;
      row.name = std::string(kClusterCovariates[cov]) +
                 (late ? " (late)" : " (early)");
      table.rows.push_back(row);
    }
  }
  // Interleave early/late per covariate, mirroring the balance table layout.
  std::vector<BalanceRow> ordered;
  ordered.reserve(dim);
  for (int cov = 0; cov < kNumClusterCovariates; ++cov) {
    ordered.push_back(table.rows[cov]);
    ordered.push_back(table.rows[cov + kNumClusterCovariates]);
  }
  table.rows = std::move(ordered);
  for (const auto& row : table.rows)
    table.max_abs_std_diff =
        std::max(table.max_abs_std_diff, std::fabs(row.std_diff));
  return table;
}

void write_quads_csv(std::span<const QuadMatch> quads,
                     const std::string& path) {
  CsvWriter w(path);
  w.write_row({"quad_id", "bec_pair_id", "sec_pair_id", "bec_z_diff",
               "sec_z_diff", "edge_weight"});
  for (const QuadMatch& q : quads)
    w.write_row({q.quad_id, q.bec.pair_id, q.sec.pair_id,
                 format_double(q.bec.z_diff), format_double(q.sec.z_diff),
                 format_double(q.distance)});
  w.close();
}

std::vector<QuadMatch> load_quads_csv(const std::string& path,
                                      std::span<const ClusterPair> pairs) {
  std::unordered_map<std::string, const ClusterPair*> by_id;
  for (const ClusterPair& p : pairs) by_id[p.pair_id] = &p;

  CsvTable t = read_csv(path);
  int c_id = t.require_column("quad_id");
  int c_bec = t.require_column("bec_pair_id");
  int c_sec = t.require_column("sec_pair_id");
  int c_w = t.require_column("edge_weight");

  std::vector<QuadMatch> quads;
  quads.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto bec_it = by_id.find(row[c_bec]);
    auto sec_it = by_id.find(row[c_sec]);
    if (bec_it == by_id.end() || sec_it == by_id.end())
      throw ValidationError(path + ": row " + std::to_string(r + 2) +
                            ": unknown pair id");
    QuadMatch q;
    q.quad_id = row[c_id];
    q.bec = *bec_it->second;
    q.sec = *sec_it->second;
    q.distance = parse_double_field(row[c_w], "edge_weight", r + 2);
    if (q.bec.z_diff > q.sec.z_diff)
      throw ValidationError(path + ": row " + std::to_string(r + 2) +
                            ": BEC/SEC roles violate z_diff ordering");
    quads.push_back(std::move(q));
  }
  return quads;
}

void write_balance_csv(const BalanceTable& table, const std::string& path) {
  CsvWriter w(path);
  w.write_row({"name", "mean_bec", "mean_sec", "std_diff", "flagged",
               "degenerate"});
  auto emit = [&](const BalanceRow& r) {
    w.write_row({r.name, format_double(r.mean_bec), format_double(r.mean_sec),
                 format_double(r.std_diff), r.flagged ? "1" : "0",
                 r.degenerate ? "1" : "0"});
  };
  emit(table.exposure_change);
  for (const auto& r : table.rows) emit(r);
  w.close();
}

}  // namespace popmatch
