#include "popmatch/stage1.hpp"

#include <algorithm>
#include <cmath>

#include "popmatch/assignment.hpp"
#include "popmatch/csv.hpp"
#include "popmatch/distances.hpp"
#include "popmatch/geo.hpp"
#include "popmatch/stats.hpp"

namespace popmatch {

namespace {

GeoPoint to_geo(const ClusterRecord& c) {
  return GeoPoint{c.longitude_deg, c.latitude_deg, c.elevation_m};
}

std::string pair_id_for(const std::string& country, int seq) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-p%04d", country.c_str(), seq);
  return buf;
}

}  // namespace

ClusterPair ClusterPair::make(std::string pair_id, ClusterRecord early,
                              ClusterRecord late, double distance_km) {
  if (early.epoch != Epoch::early || late.epoch != Epoch::late)
    throw Error("ClusterPair: epoch roles reversed for pair " + pair_id);
  if (early.country != late.country)
    throw Error("ClusterPair: cross-country pair " + pair_id);
  ClusterPair p;
  p.pair_id = std::move(pair_id);
  p.distance_km = distance_km;
  p.elevation_diff_m = late.elevation_m - early.elevation_m;
  p.z_early = early.pfpr;
  p.z_late = late.pfpr;
  p.z_diff = p.z_late - p.z_early;
  p.y_early = early.mean_birthweight_g;
  p.y_late = late.mean_birthweight_g;
  p.early = std::move(early);
  p.late = std::move(late);
  return p;
}

Stage1Result run_stage1(std::span<const ClusterRecord> clusters,
                        const Stage1Options& options) {
  // Group by country; std::map keeps country code order deterministic.
  std::map<std::string, std::pair<std::vector<ClusterRecord>,
                                  std::vector<ClusterRecord>>> by_country;
  for (const ClusterRecord& c : clusters) {
    auto& bucket = by_country[c.country];
    (c.epoch == Epoch::early ? bucket.first : bucket.second).push_back(c);
  }

  Stage1Result result;
  for (auto& [country, bucket] : by_country) {
    auto& early = bucket.first;
    auto& late = bucket.second;
    Stage1CountryAudit audit;
    audit.country = country;
    audit.n_early = static_cast<int>(early.size());
    audit.n_late = static_cast<int>(late.size());
    if (early.empty() || late.empty()) {
      audit.skipped_missing_epoch = true;
      result.audit.warnings.push_back(
          "country " + country + " skipped: missing " +
          (early.empty() ? "early" : "late") + "-epoch clusters");
      result.audit.countries.push_back(audit);
      continue;
    }

    std::vector<GeoPoint> early_pts, late_pts;
    early_pts.reserve(early.size());
    late_pts.reserve(late.size());
    for (const auto& c : early) early_pts.push_back(to_geo(c));
    for (const auto& c : late) late_pts.push_back(to_geo(c));

    DistanceMatrix dist = stage1_distance_matrix(
        early_pts, late_pts, options.caliper_multiplier, options.rho);
    AssignmentResult assignment = solve_assignment(dist);

    std::vector<ClusterPair> matched;
    int m = static_cast<int>(assignment.assign.size());
    for (int i = 0; i < m; ++i) {
      int e_idx = assignment.transposed ? assignment.assign[i] : i;
      int l_idx = assignment.transposed ? i : assignment.assign[i];
      double km = spherical_distance_km(early_pts[e_idx], late_pts[l_idx]);
      matched.push_back(ClusterPair::make(
          pair_id_for(country, static_cast<int>(matched.size())),
          early[e_idx], late[l_idx], km));
    }
    audit.matched = static_cast<int>(matched.size());

    std::vector<ClusterPair> kept;
    for (auto& p : matched) {
      if (p.distance_km > options.max_km) {
        ++audit.distance_dropped;
        continue;
      }
      kept.push_back(std::move(p));
    }
    std::vector<ClusterPair> kept2;
    for (auto& p : kept) {
      if (p.z_early == 0.0 && p.z_late == 0.0) {
        ++audit.zero_pfpr_dropped;
        continue;
      }
      kept2.push_back(std::move(p));
    }
    audit.retained = static_cast<int>(kept2.size());
    for (auto& p : kept2) result.pairs.push_back(std::move(p));
    result.audit.countries.push_back(audit);
  }

  for (const auto& a : result.audit.countries) {
    result.audit.matched_total += a.matched;
    result.audit.distance_dropped_total += a.distance_dropped;
    result.audit.zero_pfpr_dropped_total += a.zero_pfpr_dropped;
    result.audit.retained_total += a.retained;
  }
  return result;
}

Stage1Diagnostics stage1_diagnostics(std::span<const ClusterPair> pairs) {
  if (pairs.size() < 2)
    throw Error("stage1_diagnostics: need at least 2 pairs");
  std::size_t n = pairs.size();
  std::vector<double> lon_e(n), lon_l(n), lat_e(n), lat_l(n), dist(n),
      abs_elev(n), z_e(n), z_l(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ClusterPair& p = pairs[i];
    lon_e[i] = p.early.longitude_deg;
    lon_l[i] = p.late.longitude_deg;
    lat_e[i] = p.early.latitude_deg;
    lat_l[i] = p.late.latitude_deg;
    dist[i] = p.distance_km;
    abs_elev[i] = std::fabs(p.elevation_diff_m);
    z_e[i] = p.z_early;
    z_l[i] = p.z_late;
  }
  auto corr = [](const std::vector<double>& a, const std::vector<double>& b) {
    double sa = sample_sd(a), sb = sample_sd(b);
    if (sa == 0.0 || sb == 0.0) return a == b ? 1.0 : 0.0;
    return pearson_correlation(a, b);
  };
  Stage1Diagnostics d;
  d.n_pairs = static_cast<int>(n);
  d.corr_longitude = corr(lon_e, lon_l);
  d.corr_latitude = corr(lat_e, lat_l);
  d.mean_distance_km = mean(dist);
  d.mean_abs_elevation_diff_m = mean(abs_elev);
  d.mean_longitude_early = mean(lon_e);
  d.mean_latitude_early = mean(lat_e);
  d.mean_longitude_late = mean(lon_l);
  d.mean_latitude_late = mean(lat_l);
  d.mean_pfpr_early = mean(z_e);
  d.mean_pfpr_late = mean(z_l);
  return d;
}

void write_pairs_csv(std::span<const ClusterPair> pairs,
                     const std::string& path) {
  CsvWriter w(path);
  w.write_row({"pair_id", "early_cluster_id", "late_cluster_id",
               "distance_km", "z_early", "z_late", "z_diff"});
  for (const ClusterPair& p : pairs)
    w.write_row({p.pair_id, p.early.cluster_id, p.late.cluster_id,
                 format_double(p.distance_km), format_double(p.z_early),
                 format_double(p.z_late), format_double(p.z_diff)});
  w.close();
}

std::vector<ClusterPair> load_pairs_csv(
    const std::string& path,
    const std::map<std::string, ClusterRecord>& clusters) {
  CsvTable t = read_csv(path);
  int c_id = t.require_column("pair_id");
  int c_early = t.require_column("early_cluster_id");
  int c_late = t.require_column("late_cluster_id");
  int c_km = t.require_column("distance_km");
  int c_zdiff = t.require_column("z_diff");

  std::vector<ClusterPair> pairs;
  pairs.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto early_it = clusters.find(row[c_early]);
    auto late_it = clusters.find(row[c_late]);
    if (early_it == clusters.end() || late_it == clusters.end())
      throw ValidationError(path + ": row " + std::to_string(r + 2) +
                            ": unknown cluster id");
    ClusterPair p = ClusterPair::make(
        row[c_id], early_it->second, late_it->second,
        parse_double_field(row[c_km], "distance_km", r + 2));
    double z_diff_file = parse_double_field(row[c_zdiff], "z_diff", r + 2);
    if (std::fabs(z_diff_file - p.z_diff) > 1e-12)
      throw ValidationError(path + ": row " + std::to_string(r + 2) +
                            ": z_diff inconsistent with cluster PfPR values");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace popmatch
