#include "popmatch/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "popmatch/error.hpp"
#include "popmatch/stats.hpp"

namespace popmatch {

namespace {

ChainDraws split_in_half(const ChainDraws& chains) {
  ChainDraws out;
  for (const auto& chain : chains) {
    std::size_t half = chain.size() / 2;
    if (half < 2) throw Error("mcmc diagnostics: chains too short to split");
    out.emplace_back(chain.begin(), chain.begin() + half);
    out.emplace_back(chain.end() - half, chain.end());
  }
  return out;
}

/// Average ranks with ties, mapped through the normal quantile (Blom
/// offsets), applied jointly across chains.
ChainDraws rank_normalize(const ChainDraws& chains) {
  struct Entry {
    double value;
    std::size_t chain, index;
  };
  std::vector<Entry> all;
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (std::size_t i = 0; i < chains[c].size(); ++i)
      all.push_back({chains[c][i], c, i});
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.value < b.value; });

  std::size_t s = all.size();
  std::vector<double> rank(s);
  for (std::size_t i = 0; i < s;) {
    std::size_t j = i;
    while (j < s && all[j].value == all[i].value) ++j;
    double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) rank[k] = avg;
    i = j;
  }

  ChainDraws out(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c)
    out[c].resize(chains[c].size());
  for (std::size_t i = 0; i < s; ++i) {
    double p = (rank[i] - 0.375) / (static_cast<double>(s) + 0.25);
    out[all[i].chain][all[i].index] = normal_quantile(p);
  }
  return out;
}

double split_rhat_raw(const ChainDraws& split) {
  std::size_t m = split.size();
  std::size_t n = split[0].size();
  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = mean(split[c]);
    vars[c] = sample_variance(split[c]);
  }
  double w = mean(vars);
  double b = static_cast<double>(n) * sample_variance(means);
  if (w <= 0.0) return 1.0;
  double var_plus =
      (static_cast<double>(n - 1) / n) * w + b / static_cast<double>(n);
  return std::sqrt(var_plus / w);
}

double ess_raw(const ChainDraws& split) {
  std::size_t m = split.size();
  std::size_t n = split[0].size();
  double total = static_cast<double>(m) * static_cast<double>(n);

  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = mean(split[c]);
    vars[c] = sample_variance(split[c]);
  }
  double w = mean(vars);
  double b_over_n = sample_variance(means);
  double var_plus = (static_cast<double>(n - 1) / n) * w + b_over_n;
  if (var_plus <= 0.0) return total;

  // Per-chain autocovariances (biased, /n), combined as in the split-chain
  // ESS estimator, then Geyer's initial monotone positive sequence.
  std::vector<std::vector<double>> acov(m);
  for (std::size_t c = 0; c < m; ++c) {
    acov[c].assign(n, 0.0);
    const auto& x = split[c];
    double mu = means[c];
    for (std::size_t t = 0; t < n; ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i + t < n; ++i)
        s += (x[i] - mu) * (x[i + t] - mu);
      acov[c][t] = s / static_cast<double>(n);
    }
  }

  std::vector<double> rho(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double mean_acov = 0.0;
    for (std::size_t c = 0; c < m; ++c) mean_acov += acov[c][t];
    mean_acov /= static_cast<double>(m);
    rho[t] = 1.0 - (w - mean_acov) / var_plus;
  }

  double tau = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  std::size_t t = 0;
  double sum_pairs = 0.0;
  while (t + 1 < n) {
    double pair = rho[t] + rho[t + 1];
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    sum_pairs += pair;
    t += 2;
  }
  tau = std::max(-1.0 + 2.0 * sum_pairs, 1.0 / std::log10(total + 10.0));
  double ess = total / tau;
  return std::min(ess, total);
}

}  // namespace

double split_rhat(const ChainDraws& chains) {
  if (chains.empty()) throw Error("mcmc diagnostics: no chains");
  return split_rhat_raw(split_in_half(rank_normalize(chains)));
}

double effective_sample_size(const ChainDraws& chains) {
  if (chains.empty()) throw Error("mcmc diagnostics: no chains");
  return ess_raw(split_in_half(chains));
}

double bulk_ess(const ChainDraws& chains) {
  return effective_sample_size(rank_normalize(chains));
}

double tail_ess(const ChainDraws& chains) {
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  std::sort(pooled.begin(), pooled.end());
  auto quantile = [&](double p) {
    double idx = p * (static_cast<double>(pooled.size()) - 1.0);
    std::size_t lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, pooled.size() - 1);
    double f = idx - static_cast<double>(lo);
    return (1.0 - f) * pooled[lo] + f * pooled[hi];
  };
  double q05 = quantile(0.05), q95 = quantile(0.95);

  auto indicator_ess = [&](auto&& pred) {
    ChainDraws ind(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) {
      ind[c].resize(chains[c].size());
      for (std::size_t i = 0; i < chains[c].size(); ++i)
        ind[c][i] = pred(chains[c][i]) ? 1.0 : 0.0;
    }
    return effective_sample_size(ind);
  };
  double lower = indicator_ess([&](double x) { return x <= q05; });
  double upper = indicator_ess([&](double x) { return x >= q95; });
  return std::min(lower, upper);
}

McmcDiagnostics summarize_diagnostics(
    const std::vector<std::string>& names,
    const std::vector<ChainDraws>& per_parameter_chains) {
  if (names.size() != per_parameter_chains.size())
    throw Error("summarize_diagnostics: name/draw count mismatch");
  McmcDiagnostics diag;
  diag.max_rhat = 0.0;
  diag.min_bulk_ess = std::numeric_limits<double>::infinity();
  diag.min_tail_ess = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < names.size(); ++k) {
    ParameterDiagnostics p;
    p.name = names[k];
    p.rhat = split_rhat(per_parameter_chains[k]);
    p.bulk_ess = bulk_ess(per_parameter_chains[k]);
    p.tail_ess = tail_ess(per_parameter_chains[k]);
    diag.max_rhat = std::max(diag.max_rhat, p.rhat);
    diag.min_bulk_ess = std::min(diag.min_bulk_ess, p.bulk_ess);
    diag.min_tail_ess = std::min(diag.min_tail_ess, p.tail_ess);
    if (p.rhat > 1.05) diag.rhat_warning = true;
    diag.parameters.push_back(std::move(p));
  }
  return diag;
}

DiagnosticsGateReport diagnostics_gate(const McmcDiagnostics& diag,
                                       double rhat_max, double ess_min) {
  DiagnosticsGateReport report;
  report.rhat_max = rhat_max;
  report.ess_min = ess_min;
  for (const auto& p : diag.parameters) {
    if (p.rhat > rhat_max)
      report.offenders.push_back(p.name + ": rhat " + std::to_string(p.rhat) +
                                 " > " + std::to_string(rhat_max));
    if (p.bulk_ess < ess_min)
      report.offenders.push_back(p.name + ": bulk ESS " +
                                 std::to_string(p.bulk_ess) + " < " +
                                 std::to_string(ess_min));
    if (p.tail_ess < ess_min)
      report.offenders.push_back(p.name + ": tail ESS " +
                                 std::to_string(p.tail_ess) + " < " +
                                 std::to_string(ess_min));
  }
  report.pass = report.offenders.empty();
  return report;
}

}  // namespace popmatch
