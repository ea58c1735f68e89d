#include <doctest.h>

#include <cmath>

#include "popmatch/geo.hpp"
#include "popmatch/rng.hpp"

using namespace popmatch;

TEST_CASE("spherical distance closed forms") {
  GeoPoint origin{0.0, 0.0, 0.0};
  CHECK(spherical_distance_km(origin, origin) == 0.0);

  GeoPoint north_pole{0.0, 90.0, 0.0};
  CHECK(spherical_distance_km(origin, north_pole) ==
        doctest::Approx(10007.543398).epsilon(0).scale(1).epsilon(1e-7));
  // quarter circle: (pi/2) * 6371
  CHECK(std::fabs(spherical_distance_km(origin, north_pole) -
                  M_PI / 2.0 * 6371.0) < 1e-3);

  GeoPoint antipode{180.0, 0.0, 0.0};
  CHECK(std::fabs(spherical_distance_km(origin, antipode) - M_PI * 6371.0) <
        1e-3);
}

TEST_CASE("spherical distance is symmetric and positive") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    GeoPoint a{rng.uniform(-180, 180), rng.uniform(-90, 90), 0.0};
    GeoPoint b{rng.uniform(-180, 180), rng.uniform(-90, 90), 0.0};
    double ab = spherical_distance_km(a, b);
    double ba = spherical_distance_km(b, a);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("triangle inequality on random triples") {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    GeoPoint a{rng.uniform(-180, 180), rng.uniform(-90, 90), 0.0};
    GeoPoint b{rng.uniform(-180, 180), rng.uniform(-90, 90), 0.0};
    GeoPoint c{rng.uniform(-180, 180), rng.uniform(-90, 90), 0.0};
    double ab = spherical_distance_km(a, b);
    double bc = spherical_distance_km(b, c);
    double ac = spherical_distance_km(a, c);
    CHECK(ac <= ab + bc + 1e-9 * (ab + bc + 1.0));
  }
}

TEST_CASE("max_rank examples") {
  CHECK(max_rank(std::vector<double>{3.2, 1.1, 5.0}) ==
        std::vector<int>{2, 1, 3});
  CHECK(max_rank(std::vector<double>{2, 2, 1}) == std::vector<int>{3, 3, 1});
  CHECK(max_rank(std::vector<double>{7}) == std::vector<int>{1});
}

TEST_CASE("max_rank matches the indicator-sum definition") {
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    std::size_t n = 1 + rng.uniform_index(20);
    std::vector<double> x(n);
    for (auto& v : x) v = std::floor(rng.uniform(-5, 5));  // force ties
    auto ranks = max_rank(x);
    for (std::size_t i = 0; i < n; ++i) {
      int count = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (x[i] >= x[j]) ++count;
      CHECK(ranks[i] == count);
    }
  }
}

TEST_CASE("max_rank is invariant under strictly increasing transforms") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    std::size_t n = 2 + rng.uniform_index(15);
    std::vector<double> x(n), tx(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-10, 10);
      tx[i] = std::exp(0.3 * x[i]) + 5.0 * x[i];  // strictly increasing
    }
    CHECK(max_rank(x) == max_rank(tx));
  }
}
