#include "rellevy/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rellevy/specfun.hpp"

namespace rellevy {
namespace {

constexpr double kPi = std::numbers::pi;

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_dim(std::span<const double> v, const ModelParams& params, const char* what) {
  if (static_cast<int>(v.size()) != params.d)
    throw std::invalid_argument(std::string(what) + ": vector length does not match dimension");
}

// log of 2 (m / 2 pi)^{(d+1)/2}, the m > 0 prefactor of the density and kernel.
double log_bessel_prefactor(const ModelParams& p) {
  return std::log(2.0) + p.nu() * std::log(p.m / (2.0 * kPi));
}

}  // namespace

void ModelParams::validate() const {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("ModelParams: dimension must be in [1, 8]");
  if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("ModelParams: mass must be finite and >= 0");
}

double sphere_area(int d) {
  if (d < 1) throw std::domain_error("sphere_area: dimension must be >= 1");
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

double cauchy_constant(int d) {
  const double nu = 0.5 * (d + 1);
  return std::tgamma(nu) * std::pow(kPi, -nu);
}

double char_exponent_radial(double k, const ModelParams& params) {
  if (!std::isfinite(k)) throw std::domain_error("char_exponent: non-finite frequency");
  k = std::abs(k);
  if (params.m == 0.0) return k;
  // sqrt(k^2 + m^2) - m without cancellation.
  return k * k / (std::hypot(k, params.m) + params.m);
}

double char_exponent(std::span<const double> xi, const ModelParams& params) {
  check_dim(xi, params, "char_exponent");
  return char_exponent_radial(norm(xi), params);
}

double levy_density_radial(double r, const ModelParams& params) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("levy_density: |y| must be positive");
  const int d = params.d;
  if (params.m == 0.0) return cauchy_constant(d) * std::pow(r, -(d + 1.0));
  const double nu = params.nu();
  const double mr = params.m * r;
  if (mr > kBesselKUnderflow) return 0.0;
  return std::exp(log_bessel_prefactor(params) - mr - nu * std::log(r)) * bessel_k_scaled(nu, mr);
}

double levy_density(std::span<const double> y, const ModelParams& params) {
  check_dim(y, params, "levy_density");
  const double r = norm(y);
  if (r == 0.0) throw std::domain_error("levy_density: density is singular at the origin");
  return levy_density_radial(r, params);
}

double transition_kernel_radial(double r, double t, const ModelParams& params) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::domain_error("transition_kernel: t must be positive");
  if (!(r >= 0.0)) throw std::domain_error("transition_kernel: radius must be non-negative");
  const int d = params.d;
  const double rho = std::hypot(r, t);
  if (params.m == 0.0) return cauchy_constant(d) * t * std::pow(rho, -(d + 1.0));
  const double nu = params.nu();
  const double m = params.m;
  // e^{m t} K(m rho) = e^{-m (rho - t)} eK(m rho), rho - t = r^2 / (rho + t).
  const double excess = m * r * r / (rho + t);
  const double log_val = log_bessel_prefactor(params) + std::log(t) - excess - nu * std::log(rho);
  return std::exp(log_val) * bessel_k_scaled(nu, m * rho);
}

double transition_kernel(std::span<const double> y, double t, const ModelParams& params) {
  check_dim(y, params, "transition_kernel");
  return transition_kernel_radial(norm(y), t, params);
}

double log_tail_mass(double r, const ModelParams& params, const QuadratureSpec& quad) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("tail_mass: radius must be positive");
  const int d = params.d;
  if (params.m == 0.0) return std::log(sphere_area(d) * cauchy_constant(d) / r);
  return std::log(sphere_area(d)) + log_bessel_prefactor(params) +
         log_bessel_tail_integral(d, params.m, r, quad);
}

double tail_mass(double r, const ModelParams& params, const QuadratureSpec& quad) {
  return std::exp(log_tail_mass(r, params, quad));
}

double radial_tail_inverse(double p, const ModelParams& params, double r_min, const QuadratureSpec& quad) {
  if (!(r_min > 0.0)) throw std::domain_error("radial_tail_inverse: r_min must be positive");
  if (!(p > 0.0) || !std::isfinite(p)) throw std::domain_error("radial_tail_inverse: p must be positive");
  const double log_p = std::log(p);
  const double log_top = log_tail_mass(r_min, params, quad);
  if (log_p > log_top + 1e-12) throw std::domain_error("radial_tail_inverse: p exceeds tail_mass(r_min)");
  if (log_p >= log_top) return r_min;
  const double c0 = sphere_area(params.d) * cauchy_constant(params.d);
  if (params.m == 0.0) return std::max(r_min, c0 / p);
  // tail_m <= tail_0, so the root lies in [r_min, c0 / p].
  double lo = std::log(r_min);
  double hi = std::log(std::max(r_min, c0 / p));
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double r = std::exp(u);
    const double f = log_tail_mass(r, params, quad) - log_p;
    if (std::abs(f) < 1e-12) return r;
    if (f > 0.0) lo = u; else hi = u;
    // d/du log tail = -|S| n(r) r^d / tail(r)
    const double slope = -sphere_area(params.d) * levy_density_radial(r, params) *
                         std::pow(r, params.d) / std::exp(f + log_p);
    double next = u - f / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) < 1e-15 * std::max(1.0, std::abs(u))) return std::exp(next);
    u = next;
  }
  throw std::runtime_error("radial_tail_inverse: no convergence");
}

double small_jump_second_moment(double eps, const ModelParams& params, const QuadratureSpec& quad) {
  if (!(eps > 0.0)) throw std::domain_error("small_jump_second_moment: eps must be positive");
  const int d = params.d;
  const double area = sphere_area(d);
  if (params.m == 0.0) return area * cauchy_constant(d) * eps;
  auto f = [&](double r) { return levy_density_radial(r, params) * std::pow(r, d + 1.0); };
  return area * integrate(f, 0.0, eps, quad).value;
}

double one_minus_sphere_cos(int d, double x) {
  x = std::abs(x);
  if (x < 2.0) {
    // sum_{k>=1} (-1)^{k+1} x^{2k} Gamma(d/2) / (4^k k! Gamma(d/2 + k))
    const double h = 0.5 * d;
    double term = x * x / (4.0 * h);
    double sum = term;
    for (int k = 1; k < 60; ++k) {
      term *= -x * x / (4.0 * (k + 1) * (h + k));
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  if (d == 1) return 1.0 - std::cos(x);
  if (d == 3) return 1.0 - std::sin(x) / x;
  const double order = 0.5 * d - 1.0;
  return 1.0 - std::tgamma(0.5 * d) * std::pow(2.0 / x, order) * std::cyl_bessel_j(order, x);
}

double small_ball_char_integral(double k, double eps, const ModelParams& params, const QuadratureSpec& quad) {
  if (!(eps > 0.0)) throw std::domain_error("small_ball_char_integral: eps must be positive");
  k = std::abs(k);
  if (k == 0.0) return 0.0;
  const int d = params.d;
  const double area = sphere_area(d);
  auto f = [&](double r) {
    return area * levy_density_radial(r, params) * std::pow(r, d - 1.0) * one_minus_sphere_cos(d, k * r);
  };
  return integrate(f, 0.0, eps, quad).value;
}

double levy_khintchine_residual(std::span<const double> xi, const ModelParams& params, const QuadratureSpec& quad) {
  check_dim(xi, params, "levy_khintchine_residual");
  const double k = norm(xi);
  if (k == 0.0) return 0.0;
  const int d = params.d;
  const double area = sphere_area(d);
  const double half = kPi / k;

  // Near part: (1 - <cos>) n^m r^{d-1} is bounded on (0, half].
  const double near = small_ball_char_integral(k, half, params, quad);

  // Far part: tail_mass(half) minus the oscillatory integral of <cos> n^m r^{d-1},
  // accumulated over half periods until the envelope bound is negligible.
  auto osc = [&](double r) {
    return area * levy_density_radial(r, params) * std::pow(r, d - 1.0) *
           (1.0 - one_minus_sphere_cos(d, k * r));
  };
  QuadratureSpec panel_quad = quad;
  panel_quad.abs_tol = std::max(quad.abs_tol, 1e-15);
  double sum = 0.0;
  double prev = 0.0;
  double r = half;
  for (long panel = 0; panel < 4000000; ++panel) {
    prev = sum;
    sum += integrate(osc, r, r + half, panel_quad).value;
    r += half;
    const double envelope = area * levy_density_radial(r, params) * std::pow(r, d - 1.0);
    if (4.0 * envelope / k < 1e-10) break;
  }
  // Partial sums at half-period boundaries straddle the limit.
  const double osc_total = 0.5 * (sum + prev);
  const double integral = near + tail_mass(half, params, quad) - osc_total;
  return std::abs(char_exponent_radial(k, params) - integral);
}

double kernel_abs_moment(double beta, double t, const ModelParams& params, const QuadratureSpec& quad) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("kernel_abs_moment: beta must lie in (0, 1)");
  if (!(t > 0.0)) throw std::domain_error("kernel_abs_moment: t must be positive");
  const int d = params.d;
  if (params.m == 0.0) {
    // Multivariate Cauchy with scale t.
    return std::pow(t, beta) * std::tgamma(0.5 * (d + beta)) * std::tgamma(0.5 * (1.0 - beta)) /
           (std::tgamma(0.5 * d) * std::sqrt(kPi));
  }
  const double area = sphere_area(d);
  auto f = [&](double r) {
    return area * std::pow(r, beta + d - 1.0) * transition_kernel_radial(r, t, params);
  };
  return integrate_to_infinity(f, 0.0, quad, t + 1.0 / params.m).value;
}

double kernel_cdf_1d(double x, double t, double m, const QuadratureSpec& quad) {
  if (!(t > 0.0)) throw std::domain_error("kernel_cdf_1d: t must be positive");
  if (m == 0.0) return 0.5 + std::atan(x / t) / kPi;
  const ModelParams p{1, m};
  const double ax = std::abs(x);
  if (ax == 0.0) return 0.5;
  auto f = [&](double y) { return transition_kernel_radial(y, t, p); };
  double half_mass;
  if (ax <= 4.0 * t + 4.0 / m) {
    half_mass = integrate(f, 0.0, ax, quad).value;
  } else {
    half_mass = 0.5 - integrate_to_infinity(f, ax, quad, t + 1.0 / m).value;
  }
  return x > 0 ? 0.5 + half_mass : 0.5 - half_mass;
}

}  // namespace rellevy
