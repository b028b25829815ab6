#include <cmath>
#include <numbers>

#include "doctest.h"
#include "frozen_values.hpp"
#include "rellevy/quadrature.hpp"
#include "rellevy/specfun.hpp"

using namespace rellevy;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("bessel_k matches frozen high-precision values") {
  CHECK(rel(bessel_k(1.0, 1.0), frozen::K1_1) < 1e-14);
  CHECK(rel(bessel_k(0.0, 1.0), frozen::K0_1) < 1e-14);
  CHECK(rel(bessel_k(0.3, 0.7), frozen::K03_07) < 1e-14);
  CHECK(rel(bessel_k(2.5, 1e-6), frozen::K25_1em6) < 1e-14);
  CHECK(rel(bessel_k(2.0, 400.0), frozen::K2_400) < 1e-13);
  CHECK(rel(bessel_k(1.0, 1e-6), frozen::K1_1em6) < 1e-14);
  CHECK(rel(bessel_k(0.1, 1e-4), frozen::K01_1em4) < 1e-14);
}

TEST_CASE("bessel_k agrees with std::cyl_bessel_k over a grid") {
  for (double nu : {0.0, 0.1, 0.25, 0.49, 0.5, 1.0, 1.5, 2.0, 2.5, 3.7, 4.5}) {
    for (double x = 1e-3; x < 60.0; x *= 1.37) {
      CAPTURE(nu);
      CAPTURE(x);
      CHECK(rel(bessel_k(nu, x), std::cyl_bessel_k(nu, x)) < 1e-12);
    }
  }
}

TEST_CASE("half-integer closed forms") {
  const double pi = std::numbers::pi;
  for (double x : {1e-4, 0.3, 1.0, 7.0, 40.0}) {
    const double k12 = std::sqrt(pi / (2 * x)) * std::exp(-x);
    CHECK(rel(bessel_k(0.5, x), k12) < 1e-14);
    CHECK(rel(bessel_k(1.5, x), k12 * (1 + 1 / x)) < 1e-14);
    CHECK(rel(bessel_k(2.5, x), k12 * (1 + 3 / x + 3 / (x * x))) < 1e-13);
  }
}

TEST_CASE("scaled Bessel stays finite where K underflows") {
  CHECK(bessel_k(1.0, 800.0) == 0.0);
  const double s = bessel_k_scaled(1.0, 800.0);
  CHECK(std::isfinite(s));
  CHECK(rel(s, std::sqrt(std::numbers::pi / 1600.0) * (1 + 3.0 / 6400.0)) < 1e-5);
  CHECK(rel(bessel_k_scaled(0.3, 2.0), std::exp(2.0) * bessel_k(0.3, 2.0)) < 1e-14);
}

TEST_CASE("small-argument bound e^t t^nu K_nu(t) <= 2^{nu-1} Gamma(nu)") {
  for (double nu : {0.1, 0.25, 0.49}) {
    const double bound = std::pow(2.0, nu - 1) * gamma_fn(nu);
    for (int i = 0; i < 200; ++i) {
      const double t = 1e-4 * std::pow(50.0 / 1e-4, i / 199.0);
      CHECK(std::pow(t, nu) * bessel_k_scaled(nu, t) <= bound);
    }
  }
}

TEST_CASE("bessel_k domain errors") {
  CHECK_THROWS_AS(bessel_k(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k(1.0, NAN), std::domain_error);
}

TEST_CASE("gamma_fn") {
  CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-15));
  CHECK(rel(gamma_fn(0.5), std::sqrt(std::numbers::pi)) < 1e-15);
  CHECK_THROWS(gamma_fn(0.0));
}

TEST_CASE("bessel tail integrals against frozen values") {
  CHECK(rel(bessel_tail_integral(1, 1.0, 1.0), frozen::bessel_tail_1_1_1) < 1e-10);
  CHECK(rel(bessel_tail_integral(3, 0.5, 2.0), frozen::bessel_tail_3_05_2) < 1e-10);
  CHECK(rel(bessel_tail_integral(1, 1.0, 30.0), frozen::bessel_tail_1_1_30) < 1e-10);
  CHECK(rel(std::exp(log_bessel_tail_integral(1, 1.0, 30.0)), frozen::bessel_tail_1_1_30) < 1e-10);
  const double far = log_bessel_tail_integral(1, 1.0, 2000.0);
  CHECK(std::isfinite(far));
  CHECK(far < -1999.0);
}

TEST_CASE("adaptive quadrature") {
  auto r = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
  auto e = integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0);
  CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));
  QuadratureSpec tight;
  tight.rel_tol = 1e-15;
  tight.max_intervals = 4;
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, tight), QuadratureError);
}
