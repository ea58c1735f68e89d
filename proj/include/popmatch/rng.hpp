#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace popmatch {

/// Deterministic random source. All sampling goes through hand-rolled
/// transforms on top of mt19937_64 so that a given seed yields the same
/// stream on every platform and standard library (std::normal_distribution
/// and friends are implementation-defined and would break byte-identical
/// artifact reproduction).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection sampling avoids modulo bias.
    std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 handled by the
  /// usual boost step.
  double gamma(double shape) {
    if (shape < 1.0) {
      double u;
      do {
        u = uniform();
      } while (u <= 0.0);
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v;
    }
  }

  /// Inverse-gamma(shape, scale).
  double inverse_gamma(double shape, double scale) {
    double g;
    do {
      g = gamma(shape);
    } while (g <= 0.0);
    return scale / g;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace detail

/// Named substream derivation: every stage draws from its own stream so
/// that stages can be re-run independently without disturbing each other.
inline std::uint64_t substream_seed(std::uint64_t master,
                                    std::string_view name,
                                    std::uint64_t index = 0) {
  std::uint64_t h = detail::splitmix64(master ^ detail::fnv1a(name));
  return detail::splitmix64(h ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

}  // namespace popmatch
