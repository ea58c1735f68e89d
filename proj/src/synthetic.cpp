#include "popmatch/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "popmatch/error.hpp"
#include "popmatch/rng.hpp"
#include "popmatch/stats.hpp"

namespace popmatch {

void SyntheticConfig::validate() const {
  if (n_countries <= 0 || clusters_per_country_early <= 0 ||
      clusters_per_country_late <= 0 || individuals_per_cluster <= 0)
    throw ValidationError("synthetic: counts must be positive");
  if (missingness_rate_target < 0.0 || missingness_rate_target > 1.0)
    throw ValidationError("synthetic: missingness_rate_target outside [0, 1]");
  if (spatial_smoothness <= 0.0)
    throw ValidationError("synthetic: spatial_smoothness must be positive");
}

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBoxHalfDeg = 1.5;
constexpr double kKmPerDeg = 111.19;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Low-order random trigonometric surface; smoothness scales wavelengths.
struct SmoothField {
  struct Wave {
    double amp, kx, ky, phase;
  };
  std::vector<Wave> waves;
  double offset = 0.0;

  double operator()(double lon, double lat) const {
    double v = offset;
    for (const Wave& w : waves)
      v += w.amp * std::sin(w.kx * lon + w.ky * lat + w.phase);
    return v;
  }

  static SmoothField random(Rng& rng, double smoothness, double amplitude,
                            double offset) {
    SmoothField f;
    f.offset = offset;
    int n_waves = 4;
    for (int k = 0; k < n_waves; ++k) {
      double wavelength = (1.2 + 2.0 * rng.uniform()) * smoothness;  // deg
      double freq = 2.0 * kPi / wavelength;
      double theta = rng.uniform(0.0, 2.0 * kPi);
      Wave w;
      w.amp = amplitude * (0.6 + 0.4 * rng.uniform()) / std::sqrt(n_waves);
      w.kx = freq * std::cos(theta);
      w.ky = freq * std::sin(theta);
      w.phase = rng.uniform(0.0, 2.0 * kPi);
      f.waves.push_back(w);
    }
    return f;
  }
};

struct CountrySurfaces {
  double lon_center, lat_center;
  SmoothField pfpr_early;    // logit scale
  SmoothField decline;       // logit scale
  SmoothField zero_zone;     // hard-zero PfPR indicator
  SmoothField elevation;
  SmoothField wealth;
  SmoothField urbanicity;
  SmoothField services;      // education / electricity / antenatal access
  SmoothField outcome;       // residual spatial effect on birthweight
  double country_effect;
};

struct ClusterDraw {
  ClusterMeta meta;
  double decline_value = 0.0;
  // Latent covariate propensities at this location.
  double wealth_mu = 0.0, urban_p = 0.0, services_level = 0.0;
};

int multinomial3(Rng& rng, double p0, double p1) {
  double u = rng.uniform();
  if (u < p0) return 0;
  if (u < p0 + p1) return 1;
  return 2;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticConfig& config,
                                 const GeneratorTuning& tuning) {
  config.validate();
  Rng rng(substream_seed(config.seed, "synth"));

  SyntheticData data;
  data.truth.true_beta1 = config.true_beta1;

  // Country layout on a grid across the study region.
  std::vector<CountrySurfaces> countries;
  for (int c = 0; c < config.n_countries; ++c) {
    CountrySurfaces s;
    s.lon_center = -12.0 + 4.0 * (c % 8);
    s.lat_center = -18.0 + 5.0 * (c / 8);
    double smooth = config.spatial_smoothness;
    s.pfpr_early = SmoothField::random(rng, smooth, 1.6, rng.uniform(-0.8, 0.2));
    s.decline = SmoothField::random(rng, smooth, 2.2, rng.uniform(-1.0, 0.6));
    s.zero_zone = SmoothField::random(rng, smooth, 1.0, 0.0);
    s.elevation = SmoothField::random(rng, smooth * 2.0, 500.0, 900.0);
    s.wealth = SmoothField::random(rng, smooth, 0.9, 0.0);
    s.urbanicity = SmoothField::random(rng, smooth, 1.2, -0.6);
    s.services = SmoothField::random(rng, smooth, 0.8, 0.0);
    s.outcome = SmoothField::random(rng, smooth, 30.0, 0.0);
    s.country_effect = rng.normal(0.0, 30.0);
    countries.push_back(std::move(s));
  }

  // The zero-zone threshold makes roughly zero_pfpr_fraction of locations
  // malaria-free in both epochs.
  double zero_cut = normal_quantile(
      std::clamp(1.0 - tuning.zero_pfpr_fraction, 1e-6, 1.0 - 1e-6));

  auto pfpr_at = [&](const CountrySurfaces& s, double lon, double lat,
                     Epoch epoch) {
    if (s.zero_zone(lon, lat) > zero_cut * 0.8) return 0.0;
    double early = 0.88 * sigmoid(s.pfpr_early(lon, lat)) + 0.02;
    if (epoch == Epoch::early) return early;
    double decline = sigmoid(s.decline(lon, lat));
    return early * (1.0 - 0.92 * decline);
  };

  std::vector<ClusterDraw> clusters;
  char buf[64];
  for (int c = 0; c < config.n_countries; ++c) {
    const CountrySurfaces& s = countries[c];
    std::snprintf(buf, sizeof(buf), "C%02d", c);
    std::string country = buf;

    std::vector<std::pair<double, double>> early_pos;
    for (int i = 0; i < config.clusters_per_country_early; ++i)
      early_pos.emplace_back(
          s.lon_center + rng.uniform(-kBoxHalfDeg, kBoxHalfDeg),
          s.lat_center + rng.uniform(-kBoxHalfDeg, kBoxHalfDeg));

    std::vector<std::pair<double, double>> late_pos;
    for (int i = 0; i < config.clusters_per_country_late; ++i) {
      if (i < static_cast<int>(early_pos.size())) {
        if (rng.uniform() < tuning.far_pair_fraction) {
          // Displaced beyond the 100 km filter.
          double km = rng.uniform(115.0, 170.0);
          double theta = rng.uniform(0.0, 2.0 * kPi);
          late_pos.emplace_back(
              early_pos[i].first + km * std::sin(theta) / kKmPerDeg,
              early_pos[i].second + km * std::cos(theta) / kKmPerDeg);
        } else {
          // Surveyed near the same community, ~GPS-jitter scale apart.
          late_pos.emplace_back(
              early_pos[i].first + rng.normal(0.0, 4.0 / kKmPerDeg),
              early_pos[i].second + rng.normal(0.0, 4.0 / kKmPerDeg));
        }
      } else {
        late_pos.emplace_back(
            s.lon_center + rng.uniform(-kBoxHalfDeg, kBoxHalfDeg),
            s.lat_center + rng.uniform(-kBoxHalfDeg, kBoxHalfDeg));
      }
    }

    auto add_cluster = [&](Epoch epoch, int index, double lon, double lat) {
      ClusterDraw d;
      std::snprintf(buf, sizeof(buf), "%s-%c%03d", country.c_str(),
                    epoch == Epoch::early ? 'e' : 'l', index);
      d.meta.cluster_id = buf;
      d.meta.country = country;
      d.meta.epoch = epoch;
      d.meta.longitude_deg = lon;
      d.meta.latitude_deg = std::clamp(lat, -89.0, 89.0);
      d.meta.elevation_m = std::max(0.0, s.elevation(lon, lat));
      d.meta.pfpr = pfpr_at(s, lon, lat, epoch);
      d.decline_value = sigmoid(s.decline(lon, lat));
      // Wealthier, better-served areas saw larger declines: the covariates
      // are confounded with the exposure change.
      double conf = tuning.confounding_strength * (d.decline_value - 0.5);
      d.wealth_mu = 3.0 + 0.8 * s.wealth(lon, lat) + 0.9 * conf;
      d.urban_p = sigmoid(s.urbanicity(lon, lat) + 0.8 * conf);
      d.services_level = s.services(lon, lat) + 1.1 * conf +
                         (epoch == Epoch::late ? 0.35 : 0.0);
      clusters.push_back(std::move(d));
      return static_cast<int>(clusters.size()) - 1;
    };

    for (int i = 0; i < config.clusters_per_country_early; ++i)
      add_cluster(Epoch::early, i, early_pos[i].first, early_pos[i].second);
    for (int i = 0; i < config.clusters_per_country_late; ++i)
      add_cluster(Epoch::late, i, late_pos[i].first, late_pos[i].second);
  }

  // Individual records with true outcomes; missingness handled afterwards
  // so the logistic intercept can be calibrated on the realized sample.
  double g = config.covariate_effect_scale;
  std::vector<double> missing_score;  // logistic linear term minus intercept
  long long record_counter = 0;

  auto country_of = [&](const std::string& country_code) -> const CountrySurfaces& {
    int idx = std::stoi(country_code.substr(1));
    return countries[idx];
  };
  std::vector<IndividualRecord>& individuals = data.individuals;
  for (ClusterDraw& d : clusters) {
    const CountrySurfaces& s = country_of(d.meta.country);
    bool cluster_urban = rng.bernoulli(d.urban_p);
    double cluster_noise = rng.normal(0.0, tuning.cluster_noise_sd);
    double latent_cluster_sum = 0.0;

    for (int i = 0; i < config.individuals_per_cluster; ++i) {
      IndividualRecord r;
      std::snprintf(buf, sizeof(buf), "r%08lld", record_counter++);
      r.record_id = buf;
      r.cluster_id = d.meta.cluster_id;
      r.multiple_birth = rng.bernoulli(tuning.twin_rate);

      double age = std::clamp(rng.normal(28.5, 6.8), 15.0, 49.0);
      int order;
      if (age < 22.0)
        order = multinomial3(rng, 0.60, 0.35) + 1;
      else if (age < 32.0)
        order = multinomial3(rng, 0.25, 0.55) + 1;
      else
        order = multinomial3(rng, 0.10, 0.45) + 1;
      int wealth =
          std::clamp(static_cast<int>(std::lround(rng.normal(d.wealth_mu, 1.1))),
                     1, 5);
      double serv = d.services_level;
      int education = multinomial3(rng, sigmoid(0.1 - serv), 0.45);
      int sex = rng.bernoulli(0.512) ? 1 : 0;
      int marital = rng.bernoulli(0.85) ? 1 : 0;
      int antenatal = rng.bernoulli(sigmoid(0.5 + 0.9 * serv)) ? 1 : 0;
      int contraception = rng.bernoulli(sigmoid(-0.2 + 0.7 * serv)) ? 1 : 0;
      int electricity =
          rng.bernoulli(sigmoid(-1.2 + 0.55 * (wealth - 3) + 0.8 * serv)) ? 1 : 0;
      int floor = std::clamp(1 + (wealth >= 3 ? 1 : 0) + (wealth >= 4 ? 1 : 0) +
                                 (rng.bernoulli(0.15) ? 1 : 0),
                             1, 3);
      int toilet = rng.bernoulli(sigmoid(-0.4 + 0.5 * (wealth - 3))) ? 1 : 0;

      r.mother_age_years = age;
      r.birth_order = order;
      r.wealth_index = wealth;
      r.urban = cluster_urban ? 1 : 0;
      r.mother_education = education;
      r.child_sex = sex;
      r.marital_status = marital;
      r.antenatal_care = antenatal;
      r.modern_contraception = contraception;
      r.electricity = electricity;
      r.floor_material = floor;
      r.toilet_facility = toilet;

      double latent =
          3060.0 + s.country_effect +
          s.outcome(d.meta.longitude_deg, d.meta.latitude_deg) +
          (d.meta.epoch == Epoch::late ? tuning.time_shock : 0.0) +
          config.true_beta1 * d.meta.pfpr + cluster_noise +
          g * (8.1 * (age - 28.5) - 0.17 * (age - 28.5) * (age - 28.5) +
               52.33 * order - 2.69 * order * order + 10.0 * (wealth - 3) -
               20.0 * (cluster_urban ? 1 : 0) + 50.0 * education + 61.0 * sex -
               24.0 * marital - 40.0 * antenatal + 15.0 * electricity +
               10.0 * (floor - 2) + 12.0 * toilet + 8.0 * contraception);
      if (r.multiple_birth) latent -= 650.0;
      double bw =
          std::clamp(latent + rng.normal(0.0, tuning.individual_noise_sd),
                     450.0, 9200.0);
      r.birthweight_g = bw;
      latent_cluster_sum += latent;

      // Mother's size report derives from the true birthweight.
      if (!rng.bernoulli(tuning.size_missing_rate)) {
        double perceived = bw + rng.normal(0.0, tuning.size_report_noise_sd);
        if (perceived < 2950.0)
          r.reported_birth_size = BirthSize::low;
        else if (perceived > 3550.0)
          r.reported_birth_size = BirthSize::large;
        else
          r.reported_birth_size = BirthSize::average;
      }

      // Sporadic missing covariate cells.
      if (tuning.covariate_cell_missing_rate > 0.0) {
        auto maybe_drop = [&](std::optional<int>& field) {
          if (rng.bernoulli(tuning.covariate_cell_missing_rate))
            field.reset();
        };
        maybe_drop(r.wealth_index);
        maybe_drop(r.mother_education);
        maybe_drop(r.electricity);
        maybe_drop(r.floor_material);
        maybe_drop(r.toilet_facility);
        maybe_drop(r.modern_contraception);
      }

      // Missingness model score on the imputation-model covariates (MAR).
      double score =
          tuning.missingness_slope_scale *
          (-0.22 * (wealth - 3) - 0.30 * education + 0.45 * (1 - antenatal) +
           0.18 * (cluster_urban ? 1 : 0) + 0.012 * (age - 28.5) +
           0.15 * (order - 2) - 0.08 * marital);
      missing_score.push_back(score);

      individuals.push_back(std::move(r));
    }
    data.truth.cluster_latent_mean_g[d.meta.cluster_id] =
        latent_cluster_sum / config.individuals_per_cluster;
  }

  // Calibrate the logistic intercept so the expected missingness over the
  // realized sample hits the target, then draw the flags.
  double target = config.missingness_rate_target;
  std::size_t n_missing = 0;
  if (target >= 1.0) {
    for (auto& r : individuals) r.birthweight_g.reset();
    n_missing = individuals.size();
  } else if (target > 0.0) {
    double lo = -25.0, hi = 25.0;
    for (int it = 0; it < 80; ++it) {
      double a0 = 0.5 * (lo + hi);
      double sum = 0.0;
      for (double s : missing_score) sum += sigmoid(a0 + s);
      (sum / missing_score.size() < target ? lo : hi) = a0;
    }
    double a0 = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < individuals.size(); ++i) {
      if (rng.bernoulli(sigmoid(a0 + missing_score[i]))) {
        individuals[i].birthweight_g.reset();
        ++n_missing;
      }
    }
  }

  data.clusters.reserve(clusters.size());
  for (auto& d : clusters) data.clusters.push_back(d.meta);
  data.truth.n_clusters = static_cast<int>(clusters.size());
  data.truth.n_individuals = static_cast<int>(individuals.size());
  data.truth.realized_missingness_rate =
      individuals.empty() ? 0.0
                          : static_cast<double>(n_missing) / individuals.size();
  std::size_t twins = 0;
  for (const auto& r : individuals) twins += r.multiple_birth ? 1 : 0;
  data.truth.realized_twin_rate =
      individuals.empty() ? 0.0 : static_cast<double>(twins) / individuals.size();
  return data;
}

}  // namespace popmatch
