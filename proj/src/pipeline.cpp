#include "popmatch/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <unordered_set>

#include "popmatch/distances.hpp"
#include "popmatch/rng.hpp"
#include "popmatch/stats.hpp"

namespace popmatch {

namespace fs = std::filesystem;
using nlohmann::json;

std::string PipelinePaths::imputed_file(int imputation_index) const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%02d.csv", imputation_index);
  return imputed_prefix + buf;
}

namespace {

/// Stage outputs are written to <path>.partial and renamed on commit, so an
/// aborted stage leaves .partial markers instead of half-written artifacts.
class StageOutputs {
 public:
  std::string partial(const std::string& final_path) {
    fs::path p(final_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    pending_.emplace_back(final_path + ".partial", final_path);
    return pending_.back().first;
  }

  std::vector<std::string> commit() {
    std::vector<std::string> finals;
    for (const auto& [partial, final_path] : pending_) {
      fs::rename(partial, final_path);
      finals.push_back(final_path);
    }
    pending_.clear();
    return finals;
  }

 private:
  std::vector<std::pair<std::string, std::string>> pending_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

json stage1_audit_json(const Stage1Audit& audit,
                       const std::optional<Stage1Diagnostics>& diag) {
  json countries = json::array();
  for (const auto& c : audit.countries)
    countries.push_back({{"country", c.country},
                         {"n_early", c.n_early},
                         {"n_late", c.n_late},
                         {"matched", c.matched},
                         {"distance_dropped", c.distance_dropped},
                         {"zero_pfpr_dropped", c.zero_pfpr_dropped},
                         {"retained", c.retained},
                         {"skipped_missing_epoch", c.skipped_missing_epoch}});
  json j{{"countries", countries},
         {"matched_total", audit.matched_total},
         {"distance_dropped_total", audit.distance_dropped_total},
         {"zero_pfpr_dropped_total", audit.zero_pfpr_dropped_total},
         {"retained_total", audit.retained_total},
         {"warnings", audit.warnings}};
  if (diag) {
    j["diagnostics"] = {
        {"n_pairs", diag->n_pairs},
        {"corr_longitude", diag->corr_longitude},
        {"corr_latitude", diag->corr_latitude},
        {"mean_distance_km", diag->mean_distance_km},
        {"mean_abs_elevation_diff_m", diag->mean_abs_elevation_diff_m},
        {"mean_longitude_early", diag->mean_longitude_early},
        {"mean_latitude_early", diag->mean_latitude_early},
        {"mean_longitude_late", diag->mean_longitude_late},
        {"mean_latitude_late", diag->mean_latitude_late},
        {"mean_pfpr_early", diag->mean_pfpr_early},
        {"mean_pfpr_late", diag->mean_pfpr_late}};
  }
  return j;
}

struct LoadedStudy {
  std::vector<IndividualRecord> individuals;
  std::vector<ClusterMeta> metas;
  std::vector<ClusterRecord> clusters;  // aggregated from all records
};

LoadedStudy load_study(const PipelineConfig& config) {
  LoadedStudy study;
  study.individuals =
      load_individuals(config.paths.individuals, config.individual_schema())
          .records;
  study.metas = load_cluster_meta(config.paths.clusters);
  study.clusters = aggregate_clusters(study.individuals, study.metas);
  return study;
}

std::vector<ClusterPair> load_pairs(const PipelineConfig& config,
                                    const LoadedStudy& study) {
  return load_pairs_csv(config.paths.pairs, cluster_index(study.clusters));
}

/// Individuals of the matched quads' clusters, after the record filters.
std::vector<IndividualRecord> filtered_quad_records(
    const LoadedStudy& study, std::span<const QuadMatch> quads) {
  std::unordered_set<std::string> cluster_ids;
  for (const auto& q : quads) {
    cluster_ids.insert(q.bec.early.cluster_id);
    cluster_ids.insert(q.bec.late.cluster_id);
    cluster_ids.insert(q.sec.early.cluster_id);
    cluster_ids.insert(q.sec.late.cluster_id);
  }
  std::vector<IndividualRecord> subset;
  for (const auto& r : study.individuals)
    if (cluster_ids.count(r.cluster_id)) subset.push_back(r);
  return filter_records(subset).kept;
}

}  // namespace

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  PipelineConfig c;
  c.seed = j.value("seed", c.seed);

  if (j.contains("paths")) {
    const json& p = j["paths"];
    auto get = [&](const char* key, std::string& field) {
      field = p.value(key, field);
    };
    get("individuals", c.paths.individuals);
    get("clusters", c.paths.clusters);
    get("truth", c.paths.truth);
    get("pairs", c.paths.pairs);
    get("stage1_audit", c.paths.stage1_audit);
    get("quads", c.paths.quads);
    get("balance", c.paths.balance);
    get("stage2_audit", c.paths.stage2_audit);
    get("posterior_summary", c.paths.posterior_summary);
    get("imputed_prefix", c.paths.imputed_prefix);
    get("fits", c.paths.fits);
    get("analysis", c.paths.analysis);
    get("analysis_text", c.paths.analysis_text);
    get("sensitivity", c.paths.sensitivity);
    get("benchmarks", c.paths.benchmarks);
    get("manifest", c.paths.manifest);
  }
  if (j.contains("synthetic")) {
    const json& s = j["synthetic"];
    c.synthetic.n_countries = s.value("n_countries", c.synthetic.n_countries);
    c.synthetic.clusters_per_country_early = s.value(
        "clusters_per_country_early", c.synthetic.clusters_per_country_early);
    c.synthetic.clusters_per_country_late = s.value(
        "clusters_per_country_late", c.synthetic.clusters_per_country_late);
    c.synthetic.true_beta1 = s.value("true_beta1", c.synthetic.true_beta1);
    c.synthetic.covariate_effect_scale = s.value(
        "covariate_effect_scale", c.synthetic.covariate_effect_scale);
    c.synthetic.missingness_rate_target = s.value(
        "missingness_rate_target", c.synthetic.missingness_rate_target);
    c.synthetic.spatial_smoothness =
        s.value("spatial_smoothness", c.synthetic.spatial_smoothness);
    c.synthetic.individuals_per_cluster = s.value(
        "individuals_per_cluster", c.synthetic.individuals_per_cluster);
  }
  if (j.contains("stage1")) {
    const json& s = j["stage1"];
    c.stage1.caliper_multiplier =
        s.value("caliper_multiplier", c.stage1.caliper_multiplier);
    c.stage1.rho = s.value("rho", c.stage1.rho);
    c.stage1.max_km = s.value("max_km", c.stage1.max_km);
  }
  if (j.contains("stage2")) {
    const json& s = j["stage2"];
    c.stage2.rho_prime = s.value("rho_prime", c.stage2.rho_prime);
    c.stage2.xi = s.value("xi", c.stage2.xi);
    c.stage2.n_phantoms = s.value("n_phantoms", c.stage2.n_phantoms);
    c.stage2.per_country = s.value("per_country", c.stage2.per_country);
  }
  if (j.contains("imputation")) {
    const json& s = j["imputation"];
    c.imputation.prior_location =
        s.value("prior_location", c.imputation.prior_location);
    c.imputation.prior_scale = s.value("prior_scale", c.imputation.prior_scale);
    c.imputation.prior_df = s.value("prior_df", c.imputation.prior_df);
    c.imputation.chains = s.value("chains", c.imputation.chains);
    c.imputation.iterations_per_chain =
        s.value("iterations_per_chain", c.imputation.iterations_per_chain);
    c.imputation.warmup_fraction =
        s.value("warmup_fraction", c.imputation.warmup_fraction);
    c.imputation.m_imputations =
        s.value("m_imputations", c.imputation.m_imputations);
  }
  if (j.contains("sensitivity")) {
    const json& s = j["sensitivity"];
    if (s.contains("benchmarks"))
      c.sensitivity_benchmarks =
          s["benchmarks"].get<std::vector<std::string>>();
    c.alpha = s.value("alpha", c.alpha);
    if (s.contains("df")) c.sensitivity_df = s["df"].get<double>();
  }
  if (j.contains("dose") && !j["dose"].is_null())
    c.dose = j["dose"].get<double>();
  if (j.contains("schema_overrides"))
    c.schema_overrides = j["schema_overrides"].get<std::vector<std::string>>();
  c.dump_distances_dir = j.value("dump_distances_dir", c.dump_distances_dir);
  return c;
}

std::string PipelineConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["paths"] = {{"individuals", paths.individuals},
                {"clusters", paths.clusters},
                {"truth", paths.truth},
                {"pairs", paths.pairs},
                {"stage1_audit", paths.stage1_audit},
                {"quads", paths.quads},
                {"balance", paths.balance},
                {"stage2_audit", paths.stage2_audit},
                {"posterior_summary", paths.posterior_summary},
                {"imputed_prefix", paths.imputed_prefix},
                {"fits", paths.fits},
                {"analysis", paths.analysis},
                {"analysis_text", paths.analysis_text},
                {"sensitivity", paths.sensitivity},
                {"benchmarks", paths.benchmarks},
                {"manifest", paths.manifest}};
  j["synthetic"] = {
      {"n_countries", synthetic.n_countries},
      {"clusters_per_country_early", synthetic.clusters_per_country_early},
      {"clusters_per_country_late", synthetic.clusters_per_country_late},
      {"true_beta1", synthetic.true_beta1},
      {"covariate_effect_scale", synthetic.covariate_effect_scale},
      {"missingness_rate_target", synthetic.missingness_rate_target},
      {"spatial_smoothness", synthetic.spatial_smoothness},
      {"individuals_per_cluster", synthetic.individuals_per_cluster}};
  j["stage1"] = {{"caliper_multiplier", stage1.caliper_multiplier},
                 {"rho", stage1.rho},
                 {"max_km", stage1.max_km}};
  j["stage2"] = {{"rho_prime", stage2.rho_prime},
                 {"xi", stage2.xi},
                 {"n_phantoms", stage2.n_phantoms},
                 {"per_country", stage2.per_country}};
  j["imputation"] = {
      {"prior_location", imputation.prior_location},
      {"prior_scale", imputation.prior_scale},
      {"prior_df", imputation.prior_df},
      {"chains", imputation.chains},
      {"iterations_per_chain", imputation.iterations_per_chain},
      {"warmup_fraction", imputation.warmup_fraction},
      {"m_imputations", imputation.m_imputations}};
  j["sensitivity"] = {{"benchmarks", sensitivity_benchmarks},
                      {"alpha", alpha}};
  if (sensitivity_df) j["sensitivity"]["df"] = *sensitivity_df;
  if (dose) j["dose"] = *dose;
  if (!schema_overrides.empty()) j["schema_overrides"] = schema_overrides;
  if (!dump_distances_dir.empty())
    j["dump_distances_dir"] = dump_distances_dir;
  return j.dump(2);
}

void PipelineConfig::validate() const {
  synthetic.validate();
  imputation.validate();
  if (stage1.caliper_multiplier < 0.0)
    throw ValidationError("stage1.caliper_multiplier must be >= 0");
  if (stage1.rho < 0.0) throw ValidationError("stage1.rho must be >= 0");
  if (stage1.max_km <= 0.0) throw ValidationError("stage1.max_km must be > 0");
  if (stage2.rho_prime <= 0.0)
    throw ValidationError("stage2.rho_prime must be > 0");
  if (stage2.xi < 0.0) throw ValidationError("stage2.xi must be >= 0");
  if (alpha <= 0.0 || alpha >= 1.0)
    throw ValidationError("sensitivity.alpha must lie in (0, 1)");
  if (sensitivity_df && *sensitivity_df < 2.0)
    throw ValidationError("sensitivity.df must be >= 2");

  std::vector<std::string> all = {
      paths.individuals, paths.clusters, paths.truth, paths.pairs,
      paths.stage1_audit, paths.quads, paths.balance, paths.stage2_audit,
      paths.posterior_summary, paths.imputed_prefix, paths.fits,
      paths.analysis, paths.analysis_text, paths.sensitivity,
      paths.benchmarks, paths.manifest};
  std::set<std::string> unique;
  for (const auto& p : all) {
    if (p.empty()) throw ValidationError("config: empty artifact path");
    if (!unique.insert(p).second)
      throw ValidationError("config: artifact paths must be distinct ('" + p +
                            "' repeats)");
  }
}

IndividualSchema PipelineConfig::individual_schema() const {
  IndividualSchema schema;
  for (const auto& spec : schema_overrides) schema.apply_override(spec);
  return schema;
}

std::vector<std::string> stage_synth(const PipelineConfig& config) {
  SyntheticConfig synth = config.synthetic;
  synth.seed = config.seed;
  SyntheticData data = generate_synthetic(synth);

  StageOutputs out;
  write_individuals_csv(data.individuals, out.partial(config.paths.individuals));
  write_cluster_meta_csv(data.clusters, out.partial(config.paths.clusters));

  json truth{{"true_beta1", data.truth.true_beta1},
             {"realized_missingness_rate", data.truth.realized_missingness_rate},
             {"realized_twin_rate", data.truth.realized_twin_rate},
             {"n_individuals", data.truth.n_individuals},
             {"n_clusters", data.truth.n_clusters},
             {"cluster_latent_mean_g", data.truth.cluster_latent_mean_g}};
  write_text(out.partial(config.paths.truth), truth.dump(2) + "\n");
  return out.commit();
}

std::vector<std::string> stage_stage1(const PipelineConfig& config) {
  LoadedStudy study = load_study(config);
  Stage1Result result = run_stage1(study.clusters, config.stage1);

  if (!config.dump_distances_dir.empty()) {
    fs::create_directories(config.dump_distances_dir);
    std::map<std::string,
             std::pair<std::vector<GeoPoint>, std::vector<GeoPoint>>> groups;
    for (const auto& c : study.clusters) {
      auto& g = groups[c.country];
      GeoPoint pt{c.longitude_deg, c.latitude_deg, c.elevation_m};
      (c.epoch == Epoch::early ? g.first : g.second).push_back(pt);
    }
    for (const auto& [country, g] : groups) {
      if (g.first.empty() || g.second.empty()) continue;
      DistanceMatrix m = stage1_distance_matrix(
          g.first, g.second, config.stage1.caliper_multiplier,
          config.stage1.rho);
      dump_distance_matrix(
          m, config.dump_distances_dir + "/stage1_" + country + ".csv");
    }
  }

  StageOutputs out;
  write_pairs_csv(result.pairs, out.partial(config.paths.pairs));
  std::optional<Stage1Diagnostics> diag;
  if (result.pairs.size() >= 2) diag = stage1_diagnostics(result.pairs);
  write_text(out.partial(config.paths.stage1_audit),
             stage1_audit_json(result.audit, diag).dump(2) + "\n");
  return out.commit();
}

std::vector<std::string> stage_stage2(const PipelineConfig& config) {
  LoadedStudy study = load_study(config);
  std::vector<ClusterPair> pairs = load_pairs(config, study);
  Stage2Result result = run_stage2(pairs, config.stage2);
  BalanceTable balance = balance_table(result.quads, pairs);

  if (!config.dump_distances_dir.empty()) {
    fs::create_directories(config.dump_distances_dir);
    dump_distance_matrix(
        stage2_distance_matrix(pairs, config.stage2.rho_prime,
                               config.stage2.xi),
        config.dump_distances_dir + "/stage2.csv");
  }

  StageOutputs out;
  write_quads_csv(result.quads, out.partial(config.paths.quads));
  write_balance_csv(balance, out.partial(config.paths.balance));
  json audit{{"input_pairs", result.audit.input_pairs},
             {"discarded", result.audit.discarded},
             {"quads", result.audit.quads},
             {"retention_rate", result.audit.retention_rate},
             {"discarded_pair_ids", result.discarded_pair_ids},
             {"max_abs_std_diff", balance.max_abs_std_diff},
             {"exposure_change_std_diff", balance.exposure_change.std_diff}};
  write_text(out.partial(config.paths.stage2_audit), audit.dump(2) + "\n");
  return out.commit();
}

std::vector<std::string> stage_impute(const PipelineConfig& config) {
  LoadedStudy study = load_study(config);
  std::vector<ClusterPair> pairs = load_pairs(config, study);
  std::vector<QuadMatch> quads = load_quads_csv(config.paths.quads, pairs);
  std::vector<IndividualRecord> records = filtered_quad_records(study, quads);

  ImputationModelSpec spec = config.imputation;
  spec.seed = substream_seed(config.seed, "impute");
  ImputationFit fit = fit_imputation_model(records, spec);
  std::vector<ImputedDataset> datasets =
      draw_imputations(records, fit.posterior, spec);

  StageOutputs out;
  auto summary = summarize_posterior(fit);
  write_posterior_summary_csv(summary,
                              out.partial(config.paths.posterior_summary));
  for (const auto& ds : datasets)
    write_imputed_csv(ds,
                      out.partial(config.paths.imputed_file(ds.imputation_index)));
  return out.commit();
}

std::vector<std::string> stage_analyze(const PipelineConfig& config) {
  LoadedStudy study = load_study(config);
  std::vector<ClusterPair> pairs = load_pairs(config, study);
  std::vector<QuadMatch> quads = load_quads_csv(config.paths.quads, pairs);

  std::vector<RegressionFit> fits;
  for (int m = 1; m <= config.imputation.m_imputations; ++m) {
    ImputedDataset ds = load_imputed_csv(config.paths.imputed_file(m),
                                         config.individual_schema());
    fits.push_back(
        fit_working_model(quads, cluster_mean_birthweights(ds.records)));
  }

  PooledEstimate pooled = rubin_pool(fits);
  double dose = config.dose.value_or([&] {
    double max_reduction = 0.0;
    for (const auto& q : quads) {
      max_reduction = std::max(max_reduction, -q.bec.z_diff);
      max_reduction = std::max(max_reduction, -q.sec.z_diff);
    }
    return max_reduction;
  }());
  DoseEffect effect = dose_effect(pooled, dose);

  StageOutputs out;
  write_fits_csv(fits, out.partial(config.paths.fits));

  {
    CsvWriter w(out.partial(config.paths.analysis));
    w.write_row({"term", "estimate", "ci_lo", "ci_hi", "p_value", "total_se",
                 "df_rubin"});
    for (std::size_t k = 0; k < fits[0].names.size(); ++k) {
      PooledEstimate pk = rubin_pool_coefficient(fits, static_cast<int>(k));
      w.write_row({fits[0].names[k], format_double(pk.estimate),
                   format_double(pk.ci_lo), format_double(pk.ci_hi),
                   format_double(pk.p_value),
                   format_double(std::sqrt(pk.total_var)),
                   format_double(pk.df_rubin)});
    }
    w.close();
  }

  char line[256];
  std::string text = "Outcome analysis (post-matching working model, "
                     "Rubin-pooled over " +
                     std::to_string(pooled.m) + " imputations)\n\n";
  std::snprintf(line, sizeof(line),
                "  beta1 (grams per unit PfPR change): %.3f\n"
                "  95%% CI: [%.3f, %.3f]\n  p-value: %.4g\n\n",
                pooled.estimate, pooled.ci_lo, pooled.ci_hi, pooled.p_value);
  text += line;
  std::snprintf(line, sizeof(line),
                "  dose-scaled effect of a %.3f PfPR reduction: %.3f g "
                "(95%% CI [%.3f, %.3f])\n",
                effect.dose, effect.effect, effect.ci_lo, effect.ci_hi);
  text += line;
  write_text(out.partial(config.paths.analysis_text), text);
  return out.commit();
}

std::vector<std::string> stage_sensitivity(const PipelineConfig& config) {
  std::vector<RegressionFit> fits = load_fits_csv(config.paths.fits);
  SensitivityReport report =
      run_sensitivity(fits, config.sensitivity_benchmarks, config.alpha,
                      config.sensitivity_df);
  StageOutputs out;
  write_sensitivity_csv(report, out.partial(config.paths.sensitivity));
  write_benchmarks_csv(report, out.partial(config.paths.benchmarks));
  return out.commit();
}

std::vector<std::string> run_stage(const std::string& stage,
                                   const PipelineConfig& config) {
  config.validate();
  try {
    if (stage == "synth") return stage_synth(config);
    if (stage == "stage1") return stage_stage1(config);
    if (stage == "stage2") return stage_stage2(config);
    if (stage == "impute") return stage_impute(config);
    if (stage == "analyze") return stage_analyze(config);
    if (stage == "sensitivity") return stage_sensitivity(config);
  } catch (const Error& e) {
    throw Error("[" + stage + "] " + e.what());
  }
  throw Error("unknown stage: " + stage);
}

Manifest run_pipeline(const PipelineConfig& config) {
  config.validate();
  Manifest manifest;
  manifest.config_echo = config.to_json_text();
  for (const std::string& stage :
       {"synth", "stage1", "stage2", "impute", "analyze", "sensitivity"}) {
    for (const std::string& file : run_stage(stage, config))
      manifest.add(file);
  }
  write_manifest(manifest, config.paths.manifest);
  return manifest;
}

void write_imputed_csv(const ImputedDataset& dataset,
                       const std::string& path) {
  // Same layout as the individuals CSV plus the imputation_index column.
  std::string tmp = path + ".records";
  write_individuals_csv(dataset.records, tmp);
  CsvTable t = read_csv(tmp);
  fs::remove(tmp);

  CsvWriter w(path);
  std::vector<std::string> header = {"imputation_index", "provenance_draw"};
  header.insert(header.end(), t.header.begin(), t.header.end());
  w.write_row(header);
  for (auto& row : t.rows) {
    std::vector<std::string> cells = {
        format_int(dataset.imputation_index),
        format_int(dataset.provenance_draw)};
    cells.insert(cells.end(), row.begin(), row.end());
    w.write_row(cells);
  }
  w.close();
}

ImputedDataset load_imputed_csv(const std::string& path,
                                const IndividualSchema& schema) {
  CsvTable t = read_csv(path);
  int c_index = t.require_column("imputation_index");
  int c_prov = t.require_column("provenance_draw");
  ImputedDataset ds;
  if (!t.rows.empty()) {
    ds.imputation_index = static_cast<int>(
        parse_int_field(t.rows[0][c_index], "imputation_index", 2));
    ds.provenance_draw = static_cast<int>(
        parse_int_field(t.rows[0][c_prov], "provenance_draw", 2));
  }
  ds.records = parse_individuals(t, schema).records;
  return ds;
}

void write_fits_csv(std::span<const RegressionFit> fits,
                    const std::string& path) {
  CsvWriter w(path);
  w.write_row({"imputation_index", "residual_df", "n_quads", "term",
               "estimate", "se", "t"});
  for (std::size_t m = 0; m < fits.size(); ++m) {
    const RegressionFit& fit = fits[m];
    for (std::size_t k = 0; k < fit.names.size(); ++k)
      w.write_row({format_int(static_cast<long long>(m + 1)),
                   format_int(fit.residual_df), format_int(fit.n_quads),
                   fit.names[k], format_double(fit.coefficients[k]),
                   format_double(fit.se[k]), format_double(fit.t[k])});
  }
  w.close();
}

std::vector<RegressionFit> load_fits_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_m = t.require_column("imputation_index");
  int c_df = t.require_column("residual_df");
  int c_n = t.require_column("n_quads");
  int c_term = t.require_column("term");
  int c_est = t.require_column("estimate");
  int c_se = t.require_column("se");
  int c_t = t.require_column("t");

  std::map<int, RegressionFit> by_index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    int m = static_cast<int>(
        parse_int_field(row[c_m], "imputation_index", r + 2));
    RegressionFit& fit = by_index[m];
    fit.residual_df =
        static_cast<int>(parse_int_field(row[c_df], "residual_df", r + 2));
    fit.n_quads = static_cast<int>(parse_int_field(row[c_n], "n_quads", r + 2));
    fit.names.push_back(row[c_term]);
    fit.coefficients.push_back(
        parse_double_field(row[c_est], "estimate", r + 2));
    fit.se.push_back(parse_double_field(row[c_se], "se", r + 2));
    fit.t.push_back(parse_double_field(row[c_t], "t", r + 2));
  }
  std::vector<RegressionFit> fits;
  for (auto& [m, fit] : by_index) {
    if (fit.names.empty() || fit.names[0] != "z_diff")
      throw ValidationError(path + ": first term of each fit must be z_diff");
    fit.beta1 = fit.coefficients[0];
    fit.se_beta1 = fit.se[0];
    fit.t_beta1 = fit.t[0];
    fits.push_back(std::move(fit));
  }
  return fits;
}

}  // namespace popmatch
