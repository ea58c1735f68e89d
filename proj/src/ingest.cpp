#include "popmatch/ingest.hpp"

#include <algorithm>
#include <unordered_map>

#include "popmatch/csv.hpp"

namespace popmatch {

void IndividualSchema::apply_override(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw ValidationError("schema override must look like field=column: " +
                          spec);
  std::string field = spec.substr(0, eq);
  std::string column = spec.substr(eq + 1);
  std::unordered_map<std::string, std::string*> fields = {
      {"record_id", &record_id},
      {"cluster_id", &cluster_id},
      {"birthweight_g", &birthweight_g},
      {"reported_birth_size", &reported_birth_size},
      {"multiple_birth", &multiple_birth},
      {"mother_age_years", &mother_age_years},
      {"birth_order", &birth_order},
      {"wealth_index", &wealth_index},
      {"urban", &urban},
      {"mother_education", &mother_education},
      {"child_sex", &child_sex},
      {"marital_status", &marital_status},
      {"antenatal_care", &antenatal_care},
      {"modern_contraception", &modern_contraception},
      {"electricity", &electricity},
      {"floor_material", &floor_material},
      {"toilet_facility", &toilet_facility},
  };
  auto it = fields.find(field);
  if (it == fields.end())
    throw ValidationError("unknown schema field '" + field + "'");
  *it->second = column;
}

namespace {

std::optional<long long> parse_optional_int(const std::string& cell,
                                            const std::string& column,
                                            std::size_t row) {
  if (is_missing(cell)) return std::nullopt;
  return parse_int_field(cell, column, row);
}

void check_int_range(std::optional<long long> v, long long lo, long long hi,
                     const std::string& column, std::size_t row) {
  if (v && (*v < lo || *v > hi))
    throw ValidationError("row " + std::to_string(row) + ", field '" + column +
                          "': value " + std::to_string(*v) +
                          " outside [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
}

std::optional<int> narrow(std::optional<long long> v) {
  if (!v) return std::nullopt;
  return static_cast<int>(*v);
}

}  // namespace

LoadResult load_individuals(const std::string& path,
                            const IndividualSchema& schema) {
  return parse_individuals(read_csv(path), schema);
}

LoadResult parse_individuals(const CsvTable& t,
                             const IndividualSchema& schema) {
  int c_record = t.require_column(schema.record_id);
  int c_cluster = t.require_column(schema.cluster_id);
  int c_bw = t.require_column(schema.birthweight_g);
  int c_size = t.require_column(schema.reported_birth_size);
  int c_multi = t.require_column(schema.multiple_birth);
  int c_age = t.require_column(schema.mother_age_years);
  int c_order = t.require_column(schema.birth_order);
  int c_wealth = t.require_column(schema.wealth_index);
  int c_urban = t.require_column(schema.urban);
  int c_edu = t.require_column(schema.mother_education);
  int c_sex = t.require_column(schema.child_sex);
  int c_marital = t.require_column(schema.marital_status);
  int c_anc = t.require_column(schema.antenatal_care);
  int c_contra = t.require_column(schema.modern_contraception);
  int c_elec = t.require_column(schema.electricity);
  int c_floor = t.require_column(schema.floor_material);
  int c_toilet = t.require_column(schema.toilet_facility);

  LoadResult result;
  result.records.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::size_t row = r + 2;  // 1-based, after the header
    const auto& cells = t.rows[r];
    IndividualRecord rec;
    rec.record_id = cells[c_record];
    rec.cluster_id = cells[c_cluster];
    if (rec.record_id.empty())
      throw ValidationError("row " + std::to_string(row) +
                            ", field 'record_id': empty");
    if (rec.cluster_id.empty())
      throw ValidationError("row " + std::to_string(row) +
                            ", field 'cluster_id': empty");

    if (!is_missing(cells[c_bw])) {
      double bw = parse_double_field(cells[c_bw], schema.birthweight_g, row);
      if (bw <= 0.0 || bw >= 10000.0)
        throw ValidationError("row " + std::to_string(row) + ", field '" +
                              schema.birthweight_g + "': value outside (0, 10000)");
      rec.birthweight_g = bw;
    } else {
      ++result.report.missing_birthweight;
    }

    auto size = parse_optional_int(cells[c_size], schema.reported_birth_size, row);
    check_int_range(size, 0, 2, schema.reported_birth_size, row);
    if (size)
      rec.reported_birth_size = static_cast<BirthSize>(*size);
    else
      ++result.report.missing_birth_size;

    auto multi = parse_optional_int(cells[c_multi], schema.multiple_birth, row);
    check_int_range(multi, 0, 1, schema.multiple_birth, row);
    if (!multi)
      throw ValidationError("row " + std::to_string(row) + ", field '" +
                            schema.multiple_birth + "': missing");
    rec.multiple_birth = *multi == 1;

    if (!is_missing(cells[c_age])) {
      double age = parse_double_field(cells[c_age], schema.mother_age_years, row);
      if (age < 10.0 || age > 60.0)
        throw ValidationError("row " + std::to_string(row) + ", field '" +
                              schema.mother_age_years +
                              "': value outside [10, 60]");
      rec.mother_age_years = age;
    }

    auto read_ordinal = [&](int col, const std::string& name, long long lo,
                            long long hi) {
      auto v = parse_optional_int(cells[col], name, row);
      check_int_range(v, lo, hi, name, row);
      return narrow(v);
    };
    rec.birth_order = read_ordinal(c_order, schema.birth_order, 1, 3);
    rec.wealth_index = read_ordinal(c_wealth, schema.wealth_index, 1, 5);
    rec.urban = read_ordinal(c_urban, schema.urban, 0, 1);
    rec.mother_education = read_ordinal(c_edu, schema.mother_education, 0, 2);
    rec.child_sex = read_ordinal(c_sex, schema.child_sex, 0, 1);
    rec.marital_status = read_ordinal(c_marital, schema.marital_status, 0, 1);
    rec.antenatal_care = read_ordinal(c_anc, schema.antenatal_care, 0, 1);
    rec.modern_contraception =
        read_ordinal(c_contra, schema.modern_contraception, 0, 1);
    rec.electricity = read_ordinal(c_elec, schema.electricity, 0, 1);
    rec.floor_material = read_ordinal(c_floor, schema.floor_material, 1, 3);
    rec.toilet_facility = read_ordinal(c_toilet, schema.toilet_facility, 0, 1);

    result.records.push_back(std::move(rec));
  }

  result.report.n_records = result.records.size();
  if (result.report.n_records > 0) {
    result.report.missing_birthweight_rate =
        static_cast<double>(result.report.missing_birthweight) /
        result.report.n_records;
    result.report.missing_birth_size_rate =
        static_cast<double>(result.report.missing_birth_size) /
        result.report.n_records;
  }
  return result;
}

std::vector<ClusterMeta> load_cluster_meta(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_id = t.require_column("cluster_id");
  int c_country = t.require_column("country");
  int c_epoch = t.require_column("epoch");
  int c_lon = t.require_column("longitude_deg");
  int c_lat = t.require_column("latitude_deg");
  int c_elev = t.require_column("elevation_m");
  int c_pfpr = t.require_column("pfpr");

  std::vector<ClusterMeta> metas;
  metas.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::size_t row = r + 2;
    const auto& cells = t.rows[r];
    ClusterMeta m;
    m.cluster_id = cells[c_id];
    m.country = cells[c_country];
    if (m.cluster_id.empty())
      throw ValidationError("row " + std::to_string(row) +
                            ", field 'cluster_id': empty");
    m.epoch = parse_epoch(cells[c_epoch]);
    m.longitude_deg = parse_double_field(cells[c_lon], "longitude_deg", row);
    m.latitude_deg = parse_double_field(cells[c_lat], "latitude_deg", row);
    m.elevation_m = parse_double_field(cells[c_elev], "elevation_m", row);
    m.pfpr = parse_double_field(cells[c_pfpr], "pfpr", row);
    if (m.pfpr < 0.0 || m.pfpr > 1.0)
      throw ValidationError("row " + std::to_string(row) +
                            ", field 'pfpr': value outside [0, 1]");
    if (m.longitude_deg < -180.0 || m.longitude_deg > 180.0)
      throw ValidationError("row " + std::to_string(row) +
                            ", field 'longitude_deg': value outside [-180, 180]");
    if (m.latitude_deg < -90.0 || m.latitude_deg > 90.0)
      throw ValidationError("row " + std::to_string(row) +
                            ", field 'latitude_deg': value outside [-90, 90]");
    metas.push_back(std::move(m));
  }
  return metas;
}

void write_cluster_meta_csv(std::span<const ClusterMeta> metas,
                            const std::string& path) {
  CsvWriter w(path);
  w.write_row({"cluster_id", "country", "epoch", "longitude_deg",
               "latitude_deg", "elevation_m", "pfpr"});
  for (const ClusterMeta& m : metas)
    w.write_row({m.cluster_id, m.country, std::string(epoch_name(m.epoch)),
                 format_double(m.longitude_deg), format_double(m.latitude_deg),
                 format_double(m.elevation_m), format_double(m.pfpr)});
  w.close();
}

void write_individuals_csv(std::span<const IndividualRecord> records,
                           const std::string& path) {
  CsvWriter w(path);
  w.write_row({"record_id", "cluster_id", "birthweight_g",
               "reported_birth_size", "multiple_birth", "mother_age_years",
               "birth_order", "wealth_index", "urban", "mother_education",
               "child_sex", "marital_status", "antenatal_care",
               "modern_contraception", "electricity", "floor_material",
               "toilet_facility"});
  auto opt_int = [](const std::optional<int>& v) {
    return v ? format_int(*v) : std::string();
  };
  for (const IndividualRecord& r : records) {
    w.write_row({
        r.record_id,
        r.cluster_id,
        r.birthweight_g ? format_double(*r.birthweight_g) : std::string(),
        r.reported_birth_size
            ? format_int(static_cast<int>(*r.reported_birth_size))
            : std::string(),
        r.multiple_birth ? "1" : "0",
        r.mother_age_years ? format_double(*r.mother_age_years) : std::string(),
        opt_int(r.birth_order),
        opt_int(r.wealth_index),
        opt_int(r.urban),
        opt_int(r.mother_education),
        opt_int(r.child_sex),
        opt_int(r.marital_status),
        opt_int(r.antenatal_care),
        opt_int(r.modern_contraception),
        opt_int(r.electricity),
        opt_int(r.floor_material),
        opt_int(r.toilet_facility),
    });
  }
  w.close();
}

FilterResult filter_records(std::span<const IndividualRecord> records) {
  FilterResult result;
  result.audit.input = records.size();

  std::vector<IndividualRecord> singletons;
  singletons.reserve(records.size());
  for (const auto& r : records) {
    if (r.multiple_birth)
      ++result.audit.multiple_birth_removed;
    else
      singletons.push_back(r);
  }
  if (result.audit.input > 0)
    result.audit.multiple_birth_pct =
        100.0 * result.audit.multiple_birth_removed / result.audit.input;

  for (auto& r : singletons) {
    if (!r.reported_birth_size)
      ++result.audit.missing_size_removed;
    else
      result.kept.push_back(std::move(r));
  }
  if (!singletons.empty())
    result.audit.missing_size_pct =
        100.0 * result.audit.missing_size_removed / singletons.size();
  result.audit.kept = result.kept.size();
  return result;
}

ClusterRecord aggregate_cluster(std::span<const IndividualRecord> records,
                                const ClusterMeta& meta) {
  if (records.empty())
    throw Error("aggregate_cluster: no records for cluster " +
                meta.cluster_id);
  for (const auto& r : records)
    if (r.cluster_id != meta.cluster_id)
      throw Error("aggregate_cluster: record " + r.record_id +
                  " belongs to cluster " + r.cluster_id + ", not " +
                  meta.cluster_id);

  ClusterRecord c;
  c.cluster_id = meta.cluster_id;
  c.country = meta.country;
  c.epoch = meta.epoch;
  c.longitude_deg = meta.longitude_deg;
  c.latitude_deg = meta.latitude_deg;
  c.elevation_m = meta.elevation_m;
  c.pfpr = meta.pfpr;
  c.n_individuals = static_cast<int>(records.size());

  for (int k = 0; k < kNumClusterCovariates; ++k) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : records) {
      auto v = r.covariate(k);
      if (v) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0)
      throw Error("aggregate_cluster: covariate '" +
                  std::string(kClusterCovariates[k]) +
                  "' has no observed values in cluster " + meta.cluster_id);
    c.covariates[k] = sum / n;
  }

  double bw_sum = 0.0;
  int bw_n = 0;
  for (const auto& r : records)
    if (r.birthweight_g) {
      bw_sum += *r.birthweight_g;
      ++bw_n;
    }
  if (bw_n > 0) c.mean_birthweight_g = bw_sum / bw_n;
  return c;
}

std::vector<ClusterRecord> aggregate_clusters(
    std::span<const IndividualRecord> records,
    std::span<const ClusterMeta> metas) {
  std::unordered_map<std::string, std::vector<IndividualRecord>> grouped;
  for (const auto& r : records) grouped[r.cluster_id].push_back(r);

  std::vector<ClusterRecord> out;
  out.reserve(metas.size());
  for (const ClusterMeta& m : metas) {
    auto it = grouped.find(m.cluster_id);
    if (it == grouped.end()) continue;
    out.push_back(aggregate_cluster(it->second, m));
  }
  return out;
}

std::map<std::string, ClusterRecord> cluster_index(
    std::span<const ClusterRecord> clusters) {
  std::map<std::string, ClusterRecord> index;
  for (const auto& c : clusters) {
    if (!index.emplace(c.cluster_id, c).second)
      throw ValidationError("duplicate cluster id: " + c.cluster_id);
  }
  return index;
}

}  // namespace popmatch
