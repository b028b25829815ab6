#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "frozen_values.hpp"
#include "rellevy/levy.hpp"

using namespace rellevy;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
constexpr double kPi = std::numbers::pi;
}  // namespace

TEST_CASE("characteristic exponent") {
  const std::vector<double> xi{3.0};
  CHECK(char_exponent(xi, {1, 4.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(char_exponent(xi, {1, 0.0}) == 3.0);
  // no cancellation for |xi| << m
  CHECK(rel(char_exponent_radial(1e-9, {1, 1.0}), 0.5e-18) < 1e-12);
  const std::vector<double> xi3{1.0, 2.0, 2.0};
  CHECK(char_exponent(xi3, {3, 0.0}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(char_exponent(xi3, {1, 0.0}), std::invalid_argument);
}

TEST_CASE("sphere area and Cauchy constant") {
  CHECK(sphere_area(1) == doctest::Approx(2.0));
  CHECK(sphere_area(2) == doctest::Approx(2 * kPi));
  CHECK(sphere_area(3) == doctest::Approx(4 * kPi));
  CHECK(sphere_area(4) == doctest::Approx(2 * kPi * kPi));
  CHECK(cauchy_constant(1) == doctest::Approx(1 / kPi));
}

TEST_CASE("Levy density") {
  CHECK(rel(levy_density_radial(1.0, {1, 1.0}), frozen::levy_density_1_1_1) < 1e-14);
  CHECK(levy_density_radial(2.0, {3, 0.0}) == doctest::Approx(1 / (16 * kPi * kPi)).epsilon(1e-14));
  // m -> 0 continuity
  CHECK(rel(levy_density_radial(0.7, {2, 1e-9}), levy_density_radial(0.7, {2, 0.0})) < 1e-8);
  CHECK(levy_density_radial(1e4, {1, 1.0}) == 0.0);
  CHECK_THROWS_AS(levy_density_radial(0.0, {1, 1.0}), std::domain_error);
  const std::vector<double> zero{0.0};
  CHECK_THROWS_AS(levy_density(zero, {1, 0.0}), std::domain_error);
}

TEST_CASE("transition kernel") {
  CHECK(rel(transition_kernel_radial(0.0, 1.0, {1, 1.0}), frozen::kernel_1_1_0_1) < 1e-14);
  CHECK(rel(transition_kernel_radial(1.5, 0.7, {3, 0.5}), frozen::kernel_3_05_15_07) < 1e-13);
  CHECK(transition_kernel_radial(0.0, 1.0, {1, 0.0}) == doctest::Approx(1 / kPi));
  CHECK(transition_kernel_radial(0.0, 1.0, {3, 0.0}) == doctest::Approx(1 / (kPi * kPi)));
  CHECK(std::isfinite(transition_kernel_radial(1e3, 1.0, {1, 5.0})));
  CHECK_THROWS_AS(transition_kernel_radial(1.0, 0.0, {1, 1.0}), std::domain_error);
}

TEST_CASE("tail mass and its inverse") {
  CHECK(rel(tail_mass(1.0, {1, 1.0}), frozen::tail_mass_1_1_1) < 1e-10);
  CHECK(rel(tail_mass(0.8, {3, 0.5}), frozen::tail_mass_3_05_08) < 1e-10);
  CHECK(tail_mass(1.0, {1, 0.0}) == doctest::Approx(2 / kPi));
  for (double m : {0.0, 0.1, 1.0, 5.0})
    for (double r : {1e-3, 0.5, 4.0}) {
      const ModelParams p{2, m};
      CHECK(rel(radial_tail_inverse(tail_mass(r, p), p, 1e-4), r) < 1e-9);
    }
  CHECK_THROWS_AS(radial_tail_inverse(1e9, {1, 1.0}, 1e-3), std::domain_error);
}

TEST_CASE("small-jump moments") {
  CHECK(rel(small_jump_second_moment(0.1, {1, 1.0}), frozen::m2_d1_m1_eps01) < 1e-10);
  CHECK(small_jump_second_moment(0.1, {1, 0.0}) == doctest::Approx(0.2 / kPi));
  CHECK(rel(small_ball_char_integral(1.0, 0.1, {1, 0.0}), frozen::trunc_resid_d1_m0_xi1_eps01) < 1e-10);
  // M2 grows as m shrinks
  CHECK(small_jump_second_moment(0.1, {3, 1.0}) < small_jump_second_moment(0.1, {3, 0.1}));
}

TEST_CASE("Levy-Khintchine residual is tiny") {
  for (int d : {1, 3})
    for (double m : {0.0, 1.0})
      for (double k : {0.5, 5.0}) {
        std::vector<double> xi(d, 0.0);
        xi[0] = k;
        CHECK(levy_khintchine_residual(xi, {d, m}) < 1e-6);
      }
}

TEST_CASE("absolute moments") {
  CHECK(rel(kernel_abs_moment(0.75, 0.5, {1, 0.1}), frozen::abs_moment_075_m01_t05) < 1e-9);
  CHECK(rel(kernel_abs_moment(0.75, 0.5, {1, 1.0}), frozen::abs_moment_075_m1_t05) < 1e-9);
  // Cauchy: E|X|^beta = t^beta / cos(pi beta / 2) in d = 1
  CHECK(rel(kernel_abs_moment(0.5, 2.0, {1, 0.0}), std::sqrt(2.0) / std::cos(kPi / 4)) < 1e-13);
}

TEST_CASE("one-dimensional CDF") {
  CHECK(kernel_cdf_1d(0.0, 1.0, 1.0) == 0.5);
  CHECK(kernel_cdf_1d(1.0, 1.0, 0.0) == doctest::Approx(0.75));
  for (double m : {0.03, 1.0})
    for (double x : {-30.0, -1.0, 0.2, 3.0, 50.0}) {
      CHECK(kernel_cdf_1d(x, 1.0, m) + kernel_cdf_1d(-x, 1.0, m) == doctest::Approx(1.0).epsilon(1e-12));
    }
  CHECK(kernel_cdf_1d(1.0, 1.0, 1.0) > kernel_cdf_1d(1.0, 1.0, 0.0));
}

TEST_CASE("sphere cosine average") {
  CHECK(one_minus_sphere_cos(1, 0.5) == doctest::Approx(1 - std::cos(0.5)).epsilon(1e-15));
  CHECK(one_minus_sphere_cos(3, 3.0) == doctest::Approx(1 - std::sin(3.0) / 3.0).epsilon(1e-15));
  CHECK(one_minus_sphere_cos(3, 1e-8) == doctest::Approx(1e-16 / 6).epsilon(1e-12));
}
