#include "spdelab/model.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "spdelab/quadrature.hpp"

using namespace spdelab;

TEST_CASE("burgers: zero diffusion forces sigma and beta to zero") {
  const FluxModel m = make_burgers(2);
  CHECK(m.f(0, 1.7) == doctest::Approx(1.7));
  CHECK(m.f(1, -0.3) == doctest::Approx(-0.3));
  CHECK(m.F(0, 2.0) == doctest::Approx(2.0));
  CHECK(m.A(1.0).is_zero());
  CHECK(m.sigma(0.5).is_zero());
  CHECK(m.beta(0, 0, 1.0) == 0.0);
  CHECK(m.Bprim(1, 1, -2.0) == 0.0);
  CHECK(m.p1 == 0.0);
  CHECK(m.p2 == 0.0);
}

TEST_CASE("porous medium m=2: closed forms against the quadrature oracle") {
  const FluxModel m = make_porous_medium(2.0);
  CHECK(m.A(1.5).a11 == doctest::Approx(3.0));  // a = 2|xi|
  CHECK(m.A(-1.5).a11 == doctest::Approx(3.0));
  CHECK(m.sigma(2.0).a11 == doctest::Approx(2.0));  // sqrt(2*2)
  // beta(xi) = int_0^xi sqrt(2|s|) ds = (2 sqrt2 / 3) |xi|^{3/2} sgn(xi)
  for (double xi : {0.25, 1.0, 2.0, -1.0, -0.5}) {
    const double oracle =
        integrate([&](double s) { return std::sqrt(2.0 * std::abs(s)); }, 0.0, xi, 1e-12);
    CHECK(m.beta(0, 0, xi) == doctest::Approx(oracle).epsilon(1e-8));
    const double closed =
        2.0 * std::sqrt(2.0) / 3.0 * std::pow(std::abs(xi), 1.5) * (xi > 0 ? 1.0 : -1.0);
    CHECK(m.beta(0, 0, xi) == doctest::Approx(closed).epsilon(1e-12));
  }
  // B'(xi) = a(xi): B(xi) = |xi| xi
  CHECK(m.Bprim(0, 0, 2.0) == doctest::Approx(4.0));
  CHECK(m.Bprim(0, 0, -2.0) == doctest::Approx(-4.0));
  CHECK(m.p1 == doctest::Approx(0.0));  // m - 2
  CHECK_THROWS_AS(make_porous_medium(1.0), std::invalid_argument);
}

TEST_CASE("porous medium with burgers flux keeps both parts") {
  auto flux = std::make_shared<FluxModel>(make_burgers(1));
  const FluxModel m = make_porous_medium(2.0, 1, flux);
  CHECK(m.f(0, 0.7) == doctest::Approx(0.7));
  CHECK(m.A(0.7).a11 == doctest::Approx(1.4));
  CHECK_FALSE(m.zero_flux);
  CHECK_FALSE(m.zero_diffusion);
}

TEST_CASE("power flux: derivative and growth exponent") {
  const FluxModel m = make_power_flux({2.0});
  CHECK(m.f(0, 0.5) == doctest::Approx(0.25));
  CHECK(m.f(0, -0.5) == doctest::Approx(-0.25));
  CHECK(m.F(0, 0.5) == doctest::Approx(std::pow(0.5, 3.0) / 3.0));
  CHECK(m.p2 == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_power_flux({0.5}), std::invalid_argument);
}

TEST_CASE("sigma sigma^T = A on random xi, diagonal and full") {
  const FluxModel por = make_porous_medium(2.5);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> xi_dist(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double xi = xi_dist(rng);
    const SymMat a = por.A(xi), s = por.sigma(xi);
    CHECK(std::abs(s.a11 * s.a11 - a.a11) < 1e-10);
  }
  // full 2x2 from a custom spec
  ModelSpec spec;
  spec.dim = 2;
  spec.A = [](double xi) {
    const double c = 1.0 + xi * xi;
    return SymMat{2.0 * c, 1.5 * c, 0.5 * c};
  };
  const FluxModel m = make_custom(spec);
  for (int i = 0; i < 1000; ++i) {
    const double xi = xi_dist(rng);
    const SymMat a = m.A(xi), s = m.sigma(xi);
    CHECK(std::abs(s.a11 * s.a11 + s.a12 * s.a12 - a.a11) < 1e-6);
    CHECK(std::abs(s.a12 * (s.a11 + s.a22) - a.a12) < 1e-6);
    CHECK(std::abs(s.a22 * s.a22 + s.a12 * s.a12 - a.a22) < 1e-6);
  }
  // derived beta consistent with quadrature of the exposed (tabulated) sigma;
  // the quadrature is node-aligned trapezoid, exact for the interpolant
  for (double xi : {0.5, -1.25, 2.0}) {
    const int steps = 1 << 15;
    const double h = xi / steps;
    double oracle = 0.5 * (m.sigma(0.0).a11 + m.sigma(xi).a11);
    for (int j = 1; j < steps; ++j) oracle += m.sigma(j * h).a11;
    oracle *= h;
    CHECK(m.beta(0, 0, xi) == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("make_custom rejects indefinite A") {
  ModelSpec spec;
  spec.dim = 1;
  spec.A = [](double xi) { return SymMat{xi, 0.0, 0.0}; };  // negative for xi < 0
  CHECK_THROWS_AS(make_custom(spec), std::invalid_argument);
}

TEST_CASE("beta is nondecreasing where sigma is nonnegative") {
  const FluxModel m = make_porous_medium(3.0);
  double prev = m.beta(0, 0, -2.0);
  for (int i = 1; i <= 100; ++i) {
    const double xi = -2.0 + 4.0 * i / 100.0;
    const double b = m.beta(0, 0, xi);
    CHECK(b >= prev - 1e-12);
    prev = b;
  }
}

TEST_CASE("regularize: zero diffusion becomes eps I") {
  const FluxModel burgers = make_burgers(1);
  const RegularizedModel reg = regularize(burgers, 0.1, 0.05);
  for (double xi : {-1.0, 0.0, 0.7}) CHECK(reg.A_eps(xi).a11 == doctest::Approx(0.1));
  CHECK(reg.Bprim_eps(0, 0, 2.0) == doctest::Approx(0.2));
  CHECK_THROWS_AS(regularize(burgers, -1.0, 0.05), std::invalid_argument);
}

TEST_CASE("regularize porous: mollified value exceeds pointwise, monotone in width") {
  const FluxModel por = make_porous_medium(2.0);
  const double eps = 0.01;
  double prev = 1e300;
  // a*phi_w(1) decreases to a(1) = 2 as the width shrinks (a is convex)
  for (double w : {0.5, 0.25, 0.1, 0.05}) {
    const RegularizedModel reg = regularize(por, eps, w);
    const double val = reg.A_eps(1.0).a11;
    CHECK(val >= 2.0 + eps - 1e-9);
    CHECK(val <= prev + 1e-12);
    prev = val;
  }
  const RegularizedModel fine = regularize(por, eps, 0.01);
  CHECK(fine.A_eps(1.0).a11 == doctest::Approx(2.0 + eps).epsilon(1e-3));

  // uniform ellipticity on sampled xi
  for (int i = 0; i <= 1000; ++i) {
    const double xi = -3.0 + 6.0 * i / 1000.0;
    CHECK(fine.A_eps(xi).min_eig(1) >= eps - 1e-12);
  }
}

TEST_CASE("regularize: ordering in eps") {
  const FluxModel por = make_porous_medium(2.0);
  const RegularizedModel r1 = regularize(por, 0.01, 0.1);
  const RegularizedModel r2 = regularize(por, 0.05, 0.1);
  for (int i = 0; i <= 100; ++i) {
    const double xi = -2.0 + 4.0 * i / 100.0;
    CHECK(r1.A_eps(xi).a11 <= r2.A_eps(xi).a11 + 1e-12);
  }
}

TEST_CASE("sublevel_measure: burgers closed form 2 sqrt(eps)") {
  const FluxModel m = make_burgers(1);
  const double meas = sublevel_measure(m, {1.0}, {0.0}, 0.01, -2.0, 2.0, 4000);
  CHECK(meas == doctest::Approx(0.2).epsilon(0.02));
  CHECK_THROWS_AS(sublevel_measure(m, {2.0}, {0.0}, 0.01, -2.0, 2.0, 4000),
                  std::invalid_argument);
  CHECK_THROWS_AS(sublevel_measure(m, {1.0}, {0.0}, 0.01, 2.0, -2.0, 4000),
                  std::invalid_argument);
  CHECK_THROWS_AS(sublevel_measure(m, {1.0}, {0.0}, 0.01, -2.0, 2.0, 10), std::invalid_argument);
}

TEST_CASE("sublevel_measure: linear flux saturates the window") {
  ModelSpec spec;
  spec.dim = 1;
  spec.F = [](int, double xi) { return xi; };
  spec.f = [](int, double) { return 1.0; };
  const FluxModel m = make_custom(spec);
  // z = c sigma = 1: the whole window satisfies the inequality
  const double meas = sublevel_measure(m, {1.0}, {1.0}, 1e-6, -2.0, 2.0, 4000);
  CHECK(meas == doctest::Approx(4.0));
}

TEST_CASE("sublevel_measure: porous m=2 with F=0 gives eps") {
  const FluxModel m = make_porous_medium(2.0);
  const double meas = sublevel_measure(m, {1.0}, {0.0}, 0.01, -2.0, 2.0, 4000);
  CHECK(meas == doctest::Approx(0.01).epsilon(0.15));
}

TEST_CASE("sublevel_measure symmetry under (sigma, z) -> (-sigma, -z)") {
  auto flux = std::make_shared<FluxModel>(make_burgers(1));
  const FluxModel m = make_porous_medium(2.0, 1, flux);
  for (double z : {0.0, 0.3, -0.7})
    for (double eps : {0.01, 0.1}) {
      const double a = sublevel_measure(m, {1.0}, {z}, eps, -2.0, 2.0, 4000);
      const double b = sublevel_measure(m, {-1.0}, {-z}, eps, -2.0, 2.0, 4000);
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("estimate_theta: burgers fits theta ~ 1") {
  const FluxModel m = make_burgers(1);
  std::vector<double> ladder;
  for (int i = 0; i < 7; ++i) ladder.push_back(1e-4 * std::pow(10.0, i / 2.0));
  const ThetaEstimate est = estimate_theta(m, 8, 41, ladder, -2.0, 2.0);
  CHECK(est.theta_hat == doctest::Approx(1.0).epsilon(0.1));
  CHECK(est.fit_r2 > 0.99);
  CHECK(est.zbox_is_default);
}

TEST_CASE("estimate_theta: linear flux raises the degeneracy error") {
  ModelSpec spec;
  spec.dim = 1;
  spec.F = [](int, double xi) { return xi; };
  spec.f = [](int, double) { return 1.0; };
  const FluxModel m = make_custom(spec);
  std::vector<double> ladder;
  for (int i = 0; i < 7; ++i) ladder.push_back(1e-4 * std::pow(10.0, i / 2.0));
  CHECK_THROWS_AS(estimate_theta(m, 8, 41, ladder, -2.0, 2.0), ThetaDegenerateError);
}

TEST_CASE("estimate_theta: porous m=2 clamps to 1 with the flag set") {
  const FluxModel m = make_porous_medium(2.0);
  std::vector<double> ladder;
  for (int i = 0; i < 7; ++i) ladder.push_back(1e-3 * std::pow(10.0, i / 2.0));
  const ThetaEstimate est = estimate_theta(m, 8, 41, ladder, -2.0, 2.0);
  CHECK(est.theta_hat == 1.0);
  CHECK(est.clamped);
}

TEST_CASE("estimate_theta input validation") {
  const FluxModel m = make_burgers(1);
  CHECK_THROWS_AS(estimate_theta(m, 8, 41, {1e-3, 1e-2, 1e-1}, -2.0, 2.0),
                  std::invalid_argument);  // too few points
  CHECK_THROWS_AS(estimate_theta(m, 8, 41, {1e-3, 2e-3, 3e-3, 4e-3, 5e-3}, -2.0, 2.0),
                  std::invalid_argument);  // less than two decades
}
