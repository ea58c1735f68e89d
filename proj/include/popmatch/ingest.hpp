#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "popmatch/csv.hpp"
#include "popmatch/types.hpp"

namespace popmatch {

/// Column mapping for the individuals CSV; override names to ingest files
/// with different headers.
struct IndividualSchema {
  std::string record_id = "record_id";
  std::string cluster_id = "cluster_id";
  std::string birthweight_g = "birthweight_g";
  std::string reported_birth_size = "reported_birth_size";
  std::string multiple_birth = "multiple_birth";
  std::string mother_age_years = "mother_age_years";
  std::string birth_order = "birth_order";
  std::string wealth_index = "wealth_index";
  std::string urban = "urban";
  std::string mother_education = "mother_education";
  std::string child_sex = "child_sex";
  std::string marital_status = "marital_status";
  std::string antenatal_care = "antenatal_care";
  std::string modern_contraception = "modern_contraception";
  std::string electricity = "electricity";
  std::string floor_material = "floor_material";
  std::string toilet_facility = "toilet_facility";

  /// Applies an override of the form "field=column".
  void apply_override(const std::string& spec);
};

struct LoadReport {
  std::size_t n_records = 0;
  std::size_t missing_birthweight = 0;
  std::size_t missing_birth_size = 0;
  double missing_birthweight_rate = 0.0;
  double missing_birth_size_rate = 0.0;
};

struct LoadResult {
  std::vector<IndividualRecord> records;
  LoadReport report;
};

/// Reads and validates the individuals CSV. Malformed or out-of-range rows
/// raise a ValidationError naming the row and field.
LoadResult load_individuals(const std::string& path,
                            const IndividualSchema& schema = {});

/// Same validation on an already-read table (used by the imputed-dataset
/// files, which carry an extra imputation_index column).
LoadResult parse_individuals(const CsvTable& table,
                             const IndividualSchema& schema = {});

/// Cluster-year metadata as it appears in the clusters CSV (covariates and
/// outcomes are aggregated from individual records, not stored).
struct ClusterMeta {
  std::string cluster_id;
  std::string country;
  Epoch epoch = Epoch::early;
  double longitude_deg = 0.0;
  double latitude_deg = 0.0;
  double elevation_m = 0.0;
  double pfpr = 0.0;
};

std::vector<ClusterMeta> load_cluster_meta(const std::string& path);
void write_cluster_meta_csv(std::span<const ClusterMeta> metas,
                            const std::string& path);
void write_individuals_csv(std::span<const IndividualRecord> records,
                           const std::string& path);

struct FilterAudit {
  std::size_t input = 0;
  std::size_t multiple_birth_removed = 0;
  double multiple_birth_pct = 0.0;  // of the stage input
  std::size_t missing_size_removed = 0;
  double missing_size_pct = 0.0;  // of the records remaining after stage 1
  std::size_t kept = 0;
};

struct FilterResult {
  std::vector<IndividualRecord> kept;
  FilterAudit audit;
};

/// Record filters in the study's order: multiple births first, then records
/// lacking the mother's reported birth size. Idempotent.
FilterResult filter_records(std::span<const IndividualRecord> records);

/// Aggregates one cluster's records to a ClusterRecord: available-case
/// means for the 12 covariates and the birthweight.
ClusterRecord aggregate_cluster(std::span<const IndividualRecord> records,
                                const ClusterMeta& meta);

/// Aggregates every cluster in `metas`, grouping records by cluster_id.
/// Clusters with no records are skipped.
std::vector<ClusterRecord> aggregate_clusters(
    std::span<const IndividualRecord> records,
    std::span<const ClusterMeta> metas);

std::map<std::string, ClusterRecord> cluster_index(
    std::span<const ClusterRecord> clusters);

}  // namespace popmatch
