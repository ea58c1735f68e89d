#pragma once

#include <span>
#include <string>
#include <vector>

namespace popmatch {

/// Draws from one sampler run: chains[c][i] is draw i of chain c
/// (post-warmup only).
using ChainDraws = std::vector<std::vector<double>>;

/// Split-chain Rhat on rank-normalized draws. Chains are split in half, so
/// at least one chain with >= 4 draws is required.
double split_rhat(const ChainDraws& chains);

/// Effective sample size via Geyer's initial monotone sequence, combined
/// across split chains; capped at the total draw count.
double effective_sample_size(const ChainDraws& chains);

/// Bulk ESS: ESS of the rank-normalized draws.
double bulk_ess(const ChainDraws& chains);

/// Tail ESS: minimum ESS of the 5% and 95% quantile indicator series.
double tail_ess(const ChainDraws& chains);

struct ParameterDiagnostics {
  std::string name;
  double rhat = 0.0;
  double bulk_ess = 0.0;
  double tail_ess = 0.0;
};

struct McmcDiagnostics {
  std::vector<ParameterDiagnostics> parameters;
  double max_rhat = 0.0;
  double min_bulk_ess = 0.0;
  double min_tail_ess = 0.0;
  /// Any parameter with rhat > 1.05; the run is still usable, callers decide.
  bool rhat_warning = false;
};

McmcDiagnostics summarize_diagnostics(
    const std::vector<std::string>& names,
    const std::vector<ChainDraws>& per_parameter_chains);

struct DiagnosticsGateReport {
  bool pass = false;
  double rhat_max = 0.0;
  double ess_min = 0.0;
  std::vector<std::string> offenders;
};

/// Pass iff every rhat <= rhat_max and every bulk/tail ESS >= ess_min.
DiagnosticsGateReport diagnostics_gate(const McmcDiagnostics& diag,
                                       double rhat_max = 1.01,
                                       double ess_min = 400.0);

}  // namespace popmatch
