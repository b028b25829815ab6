#pragma once

#include "rellevy/quadrature.hpp"

namespace rellevy {

/// Arguments above which K_nu(x) is reported as exactly zero: the value is
/// below the smallest normal double once x exceeds roughly 705.
inline constexpr double kBesselKUnderflow = 705.0;

/// Modified Bessel function of the third kind K_nu(x), nu >= 0, x > 0.
///
/// Half-integer orders use the terminating closed form. Other orders use
/// Temme's series for x < 2 and Steed's continued fraction for x >= 2 on the
/// reduced order |mu| <= 1/2, followed by upward recurrence.
double bessel_k(double nu, double x);

/// e^x K_nu(x); finite for every x > 0.
double bessel_k_scaled(double nu, double x);

/// Gamma function on x > 0.
double gamma_fn(double x);

/// \int_r^\infty u^{(d-3)/2} K_{(d+1)/2}(m u) du for d >= 1, m > 0, r > 0.
double bessel_tail_integral(int d, double m, double r, const QuadratureSpec& quad = {});

/// Natural log of bessel_tail_integral; stays finite where the integral
/// itself underflows (large m r).
double log_bessel_tail_integral(int d, double m, double r, const QuadratureSpec& quad = {});

}  // namespace rellevy
