#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "popmatch/error.hpp"

namespace popmatch {

enum class Epoch { early, late };

inline std::string_view epoch_name(Epoch e) {
  return e == Epoch::early ? "early" : "late";
}

inline Epoch parse_epoch(const std::string& s) {
  if (s == "early") return Epoch::early;
  if (s == "late") return Epoch::late;
  throw ValidationError("unknown epoch '" + s + "' (expected early|late)");
}

/// Mother's report of the child's size at birth. "average" is the reference
/// level; low/large become the two indicator columns of the imputation model.
enum class BirthSize : int { low = 0, average = 1, large = 2 };

/// The 12 cluster-level covariates, in canonical schema order. Every
/// 12-vector in the project uses this order; the 24-vectors used by
/// stage-two matching are [early covariates..., late covariates...].
inline constexpr std::array<std::string_view, 12> kClusterCovariates = {
    "electricity",   "floor_material", "toilet_facility", "urban",
    "mother_education", "modern_contraception", "mother_age", "birth_order",
    "wealth_index",  "child_sex",      "marital_status",  "antenatal_care",
};

inline constexpr int kNumClusterCovariates = 12;

/// One child's survey row. Covariate cells may be individually missing
/// (rare in practice); aggregation uses available-case means.
struct IndividualRecord {
  std::string record_id;
  std::string cluster_id;
  std::optional<double> birthweight_g;
  std::optional<BirthSize> reported_birth_size;
  bool multiple_birth = false;
  std::optional<double> mother_age_years;
  std::optional<int> birth_order;           // 1..3
  std::optional<int> wealth_index;          // 1..5
  std::optional<int> urban;                 // 0/1
  std::optional<int> mother_education;      // 0..2
  std::optional<int> child_sex;             // 0/1
  std::optional<int> marital_status;        // 0/1
  std::optional<int> antenatal_care;        // 0/1
  std::optional<int> modern_contraception;  // 0/1
  std::optional<int> electricity;           // 0/1
  std::optional<int> floor_material;        // 1..3
  std::optional<int> toilet_facility;       // 0/1

  /// Covariate value by kClusterCovariates index, absent if the cell is
  /// missing.
  std::optional<double> covariate(int index) const {
    auto opt = [](const std::optional<int>& v) -> std::optional<double> {
      if (!v) return std::nullopt;
      return static_cast<double>(*v);
    };
    switch (index) {
      case 0: return opt(electricity);
      case 1: return opt(floor_material);
      case 2: return opt(toilet_facility);
      case 3: return opt(urban);
      case 4: return opt(mother_education);
      case 5: return opt(modern_contraception);
      case 6: return mother_age_years;
      case 7: return opt(birth_order);
      case 8: return opt(wealth_index);
      case 9: return opt(child_sex);
      case 10: return opt(marital_status);
      case 11: return opt(antenatal_care);
      default: throw Error("covariate index out of range");
    }
  }
};

/// One survey cluster-year with aggregated covariates.
struct ClusterRecord {
  std::string cluster_id;
  std::string country;
  Epoch epoch = Epoch::early;
  double longitude_deg = 0.0;
  double latitude_deg = 0.0;
  double elevation_m = 0.0;
  double pfpr = 0.0;
  std::array<double, kNumClusterCovariates> covariates{};  // schema order
  std::optional<double> mean_birthweight_g;
  int n_individuals = 0;
};

/// Stage-one matched early/late cluster pair.
struct ClusterPair {
  std::string pair_id;
  ClusterRecord early;
  ClusterRecord late;
  double distance_km = 0.0;
  double elevation_diff_m = 0.0;  // late minus early, signed
  double z_early = 0.0;
  double z_late = 0.0;
  double z_diff = 0.0;  // always z_late - z_early
  std::optional<double> y_early;
  std::optional<double> y_late;

  static ClusterPair make(std::string pair_id, ClusterRecord early,
                          ClusterRecord late, double distance_km);

  /// [early covariates..., late covariates...] in schema order.
  std::array<double, 2 * kNumClusterCovariates> covariates_24() const {
    std::array<double, 2 * kNumClusterCovariates> out{};
    for (int k = 0; k < kNumClusterCovariates; ++k) {
      out[k] = early.covariates[k];
      out[k + kNumClusterCovariates] = late.covariates[k];
    }
    return out;
  }
};

/// Stage-two matched pair of ClusterPairs. BEC = bigger exposure change
/// (more negative z_diff), SEC = smaller exposure change.
struct QuadMatch {
  std::string quad_id;
  ClusterPair bec;
  ClusterPair sec;
  double distance = 0.0;  // matched edge weight
};

}  // namespace popmatch
