#include "spdelab/paths.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "spdelab/stats.hpp"

using namespace spdelab;

TEST_CASE("brownian sample: starts at zero, deterministic per seed") {
  const DrivingPath p = sample_brownian(2, 1.0, 64, 777);
  double z[2];
  p.eval(0.0, z);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);

  const DrivingPath q = sample_brownian(2, 1.0, 64, 777);
  for (std::size_t k = 0; k < p.knot_count(); ++k)
    for (int d = 0; d < 2; ++d) CHECK(p.knot_value(k, d) == q.knot_value(k, d));

  const DrivingPath r = sample_brownian(2, 1.0, 64, 778);
  bool different = false;
  for (std::size_t k = 0; k < p.knot_count(); ++k)
    if (p.knot_value(k, 0) != r.knot_value(k, 0)) different = true;
  CHECK(different);
}

TEST_CASE("brownian variance: MC mean of z(1)^2 is 1") {
  const int n = 10000;
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) {
    const DrivingPath p = sample_brownian(1, 1.0, 16, derive_seed(4242, i));
    double z[2];
    p.eval(1.0, z);
    sq[i] = z[0] * z[0];
  }
  CHECK(mean(sq) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("brownian scaling: z(4t)/2 matches z(t) in two moments") {
  const int n = 2000;
  std::vector<double> a(n), b(n), a2(n), b2(n);
  for (int i = 0; i < n; ++i) {
    const DrivingPath p = sample_brownian(1, 4.0, 64, derive_seed(9000, i));
    double z4[2], z1[2];
    p.eval(4.0 * 0.25, z1);
    p.eval(4.0, z4);
    a[i] = z1[0];
    b[i] = 0.5 * z4[0];
    a2[i] = z1[0] * z1[0];
    b2[i] = 0.25 * z4[0] * z4[0];
  }
  const double se1 = std::sqrt(std_error(a) * std_error(a) + std_error(b) * std_error(b));
  const double se2 = std::sqrt(std_error(a2) * std_error(a2) + std_error(b2) * std_error(b2));
  CHECK(std::abs(mean(a) - mean(b)) <= 3.0 * se1 + 1e-12);
  CHECK(std::abs(mean(a2) - mean(b2)) <= 3.0 * se2);
}

TEST_CASE("two-sided extension evaluates for negative t") {
  const DrivingPath p = sample_brownian(1, 1.0, 32, 123);
  CHECK(p.has_negative_branch());
  double z[2];
  p.eval_two_sided(0.0, z);
  CHECK(z[0] == 0.0);
  p.eval_two_sided(-0.5, z);
  CHECK(std::isfinite(z[0]));
}

TEST_CASE("dyadic linearization: identity at native resolution, nested nodes") {
  const DrivingPath p = sample_brownian(1, 1.0, 64, 55);  // 64 knots = 2^6
  const DrivingPath same = dyadic_linearization(p, 6);
  CHECK(same.knot_count() == p.knot_count());
  for (std::size_t k = 0; k < p.knot_count(); ++k)
    CHECK(same.knot_value(k, 0) == p.knot_value(k, 0));

  for (int l : {2, 3, 5}) {
    const DrivingPath zl = dyadic_linearization(p, l);
    CHECK(zl.knot_count() == (std::size_t{1} << l) + 1);
    for (std::size_t k = 0; k < zl.knot_count(); ++k) {
      double a[2], b[2];
      zl.eval(zl.knot_times()[k], a);
      p.eval(zl.knot_times()[k], b);
      CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-15));
    }
  }
  CHECK_THROWS_AS(dyadic_linearization(p, 7), std::invalid_argument);
}

TEST_CASE("dyadic linearization is a projection") {
  const DrivingPath p = sample_brownian(1, 1.0, 256, 1234);
  const DrivingPath once = dyadic_linearization(p, 4);
  const DrivingPath twice = dyadic_linearization(once, 4);
  for (std::size_t k = 0; k < once.knot_count(); ++k)
    CHECK(once.knot_value(k, 0) == twice.knot_value(k, 0));
}

TEST_CASE("dyadic refinement shrinks the sup distance at rate ~ 2^(-1/2)") {
  std::vector<double> ratios;
  for (int i = 0; i < 100; ++i) {
    const DrivingPath p = sample_brownian(1, 1.0, 1024, derive_seed(31337, i));
    double prev = -1.0;
    for (int l : {4, 5, 6, 7}) {
      const double d = sup_distance(p, dyadic_linearization(p, l), 0.0, 1.0);
      if (prev > 0.0) ratios.push_back(d / prev);
      prev = d;
    }
  }
  const double med = median(ratios);
  CHECK(med > 0.6);
  CHECK(med < 0.8);
}

TEST_CASE("sup_distance basics") {
  const DrivingPath a = make_linear_path(1, 1.0, 1.0);
  const DrivingPath b = make_linear_path(1, 1.0, 2.0);
  CHECK(sup_distance(a, a, 0.0, 1.0) == 0.0);
  CHECK(sup_distance(a, b, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sup_distance(a, b, 0.7, 0.2), std::invalid_argument);
}

TEST_CASE("sup_distance against a dense-evaluation oracle") {
  const DrivingPath p = sample_brownian(1, 1.0, 512, 2024);
  const DrivingPath zl = dyadic_linearization(p, 5);
  const double exact = sup_distance(p, zl, 0.0, 1.0);
  double dense = 0.0;
  for (int i = 0; i <= 5120; ++i) {
    const double t = static_cast<double>(i) / 5120.0;
    double a[2], b[2];
    p.eval(t, a);
    zl.eval(t, b);
    dense = std::max(dense, std::abs(a[0] - b[0]));
  }
  CHECK(dense <= exact + 1e-12);
  CHECK(exact <= dense + 1e-12 + 1e-3);  // dense grid contains the knot set here
}

TEST_CASE("sup_distance triangle inequality on sampled triples") {
  for (int i = 0; i < 20; ++i) {
    const DrivingPath a = sample_brownian(1, 1.0, 64, derive_seed(1, i));
    const DrivingPath b = sample_brownian(1, 1.0, 64, derive_seed(2, i));
    const DrivingPath c = sample_brownian(1, 1.0, 64, derive_seed(3, i));
    const double ab = sup_distance(a, b, 0.0, 1.0);
    const double bc = sup_distance(b, c, 0.0, 1.0);
    const double ac = sup_distance(a, c, 0.0, 1.0);
    CHECK(ac <= ab + bc + 1e-12);
  }
}

TEST_CASE("csv round trip") {
  const DrivingPath p = sample_brownian(2, 0.5, 32, 99);
  std::stringstream ss;
  dump_path_csv(p, ss);
  const DrivingPath q = load_path_csv(ss);
  CHECK(q.dim() == 2);
  CHECK(q.knot_count() == p.knot_count());
  for (std::size_t k = 0; k < p.knot_count(); ++k)
    for (int d = 0; d < 2; ++d)
      CHECK(q.knot_value(k, d) == doctest::Approx(p.knot_value(k, d)).epsilon(1e-15));
}

TEST_CASE("path validation") {
  CHECK_THROWS_AS(DrivingPath(1, {0.0, 1.0}, {1.0, 2.0}), std::invalid_argument);  // z(0) != 0
  CHECK_THROWS_AS(DrivingPath(1, {0.5, 1.0}, {0.0, 1.0}), std::invalid_argument);  // t0 != 0
  CHECK_THROWS_AS(DrivingPath(1, {0.0, 0.0}, {0.0, 1.0}), std::invalid_argument);  // not increasing
  CHECK_THROWS_AS(sample_brownian(1, 1.0, 1, 5), std::invalid_argument);
}
