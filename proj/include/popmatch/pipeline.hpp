#pragma once

#include <optional>
#include <string>
#include <vector>

#include "popmatch/analyze.hpp"
#include "popmatch/impute.hpp"
#include "popmatch/ingest.hpp"
#include "popmatch/manifest.hpp"
#include "popmatch/sensitivity.hpp"
#include "popmatch/stage1.hpp"
#include "popmatch/stage2.hpp"
#include "popmatch/synthetic.hpp"

namespace popmatch {

struct PipelinePaths {
  std::string individuals = "out/individuals.csv";
  std::string clusters = "out/clusters.csv";
  std::string truth = "out/truth.json";
  std::string pairs = "out/pairs.csv";
  std::string stage1_audit = "out/stage1_audit.json";
  std::string quads = "out/quads.csv";
  std::string balance = "out/balance.csv";
  std::string stage2_audit = "out/stage2_audit.json";
  std::string posterior_summary = "out/posterior_summary.csv";
  std::string imputed_prefix = "out/imputed";  // -> imputed_01.csv ...
  std::string fits = "out/fits.csv";
  std::string analysis = "out/analysis.csv";
  std::string analysis_text = "out/analysis.txt";
  std::string sensitivity = "out/sensitivity.csv";
  std::string benchmarks = "out/benchmarks.csv";
  std::string manifest = "out/manifest.json";

  std::string imputed_file(int imputation_index) const;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  PipelinePaths paths;
  SyntheticConfig synthetic;
  Stage1Options stage1;
  Stage2Options stage2;
  ImputationModelSpec imputation;
  std::vector<std::string> sensitivity_benchmarks = {
      "mother_education_late", "child_sex_late", "marital_status_late"};
  double alpha = 0.05;
  std::optional<double> sensitivity_df;
  /// PfPR reduction for the dose-scaled report; defaults to the largest
  /// observed reduction among matched quads.
  std::optional<double> dose;
  std::vector<std::string> schema_overrides;  // "field=column"
  std::string dump_distances_dir;  // empty disables the debug dumps

  static PipelineConfig from_json_file(const std::string& path);
  static PipelineConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
  void validate() const;
  IndividualSchema individual_schema() const;
};

/// Each stage reads its inputs from the configured paths and writes its
/// outputs (atomically: written as <path>.partial, renamed on success, so a
/// failed stage leaves .partial markers behind). Returns the files written.
std::vector<std::string> stage_synth(const PipelineConfig& config);
std::vector<std::string> stage_stage1(const PipelineConfig& config);
std::vector<std::string> stage_stage2(const PipelineConfig& config);
std::vector<std::string> stage_impute(const PipelineConfig& config);
std::vector<std::string> stage_analyze(const PipelineConfig& config);
std::vector<std::string> stage_sensitivity(const PipelineConfig& config);

/// Runs one named stage; errors are rethrown tagged with the stage name.
std::vector<std::string> run_stage(const std::string& stage,
                                   const PipelineConfig& config);

/// All stages in order plus the artifact manifest.
Manifest run_pipeline(const PipelineConfig& config);

void write_imputed_csv(const ImputedDataset& dataset, const std::string& path);
ImputedDataset load_imputed_csv(const std::string& path,
                                const IndividualSchema& schema = {});

void write_fits_csv(std::span<const RegressionFit> fits,
                    const std::string& path);
std::vector<RegressionFit> load_fits_csv(const std::string& path);

}  // namespace popmatch
