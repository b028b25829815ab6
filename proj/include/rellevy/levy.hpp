#pragma once

#include <span>

#include "rellevy/quadrature.hpp"

namespace rellevy {

/// Largest spatial dimension supported by the fixed-size path buffers.
inline constexpr int kMaxDim = 8;

/// Dimension d and mass m of the process with exponent sqrt(|xi|^2 + m^2) - m.
/// m = 0 is the Cauchy process.
struct ModelParams {
  int d = 1;
  double m = 0.0;

  void validate() const;
  double nu() const { return 0.5 * (d + 1); }
};

/// Surface measure |S^{d-1}| of the unit sphere: 2, 2 pi, 4 pi, ...
double sphere_area(int d);

/// Gamma((d+1)/2) pi^{-(d+1)/2}, the normalising constant of the Cauchy law.
double cauchy_constant(int d);

double char_exponent(std::span<const double> xi, const ModelParams& params);
/// Exponent as a function of |xi|.
double char_exponent_radial(double k, const ModelParams& params);

/// Density n^m(|y|) of the Levy measure; y must be non-zero.
double levy_density(std::span<const double> y, const ModelParams& params);
double levy_density_radial(double r, const ModelParams& params);

/// Transition density k_0^m(y, t) of X(t).
double transition_kernel(std::span<const double> y, double t, const ModelParams& params);
double transition_kernel_radial(double r, double t, const ModelParams& params);

/// n^m(|y| >= r) = |S^{d-1}| \int_r^\infty n^m(u) u^{d-1} du.
double tail_mass(double r, const ModelParams& params, const QuadratureSpec& quad = {});
double log_tail_mass(double r, const ModelParams& params, const QuadratureSpec& quad = {});

/// Radius r >= r_min with tail_mass(r) = p. Closed form at m = 0.
double radial_tail_inverse(double p, const ModelParams& params, double r_min,
                           const QuadratureSpec& quad = {});

/// M_2(eps) = \int_{|y| < eps} |y|^2 n^m(dy).
double small_jump_second_moment(double eps, const ModelParams& params, const QuadratureSpec& quad = {});

/// \int_{|y| < eps} (1 - cos xi.y) n^m(dy) for |xi| = k.
double small_ball_char_integral(double k, double eps, const ModelParams& params,
                                const QuadratureSpec& quad = {});

/// |psi(xi) - \int (1 - cos xi.y) n^m(dy)|: the symmetrised Levy-Khintchine
/// identity, with the odd part of the integrand cancelled analytically.
double levy_khintchine_residual(std::span<const double> xi, const ModelParams& params,
                                const QuadratureSpec& quad = {});

/// E|X(t)|^beta = \int |y|^beta k_0^m(y, t) dy, 0 < beta < 1.
double kernel_abs_moment(double beta, double t, const ModelParams& params, const QuadratureSpec& quad = {});

/// Distribution function of one coordinate of X(t). The projection of the
/// isotropic law onto an axis is the d = 1 law with the same mass.
double kernel_cdf_1d(double x, double t, double m, const QuadratureSpec& quad = {});

/// 1 - E[cos(x w_1)] for w uniform on S^{d-1}; accurate for small x.
double one_minus_sphere_cos(int d, double x);

}  // namespace rellevy
