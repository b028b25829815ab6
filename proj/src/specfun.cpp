#include "rellevy/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rellevy {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = 1e-16;

// Taylor coefficients of 1/Gamma(z) = sum_k c[k] z^k.
constexpr std::array<double, 27> kRecipGamma = {
    0.0,
    1.0,
    0.5772156649015328606065,
    -0.655878071520253881077,
    -0.042002635034095235529,
    0.1665386113822914895017,
    -0.04219773455554433674821,
    -0.009621971527876973562115,
    0.007218943246663099542395,
    -0.001165167591859065112114,
    -0.0002152416741149509728157,
    0.0001280502823881161861532,
    -0.00002013485478078823865569,
    -0.000001250493482142670657345,
    0.000001133027231981695882374,
    -2.05633841697760710345e-7,
    6.116095104481415817862e-9,
    5.002007644469222930056e-9,
    -1.181274570487020144588e-9,
    1.043426711691100510492e-10,
    7.78226343990507125405e-12,
    -3.696805618642205708188e-12,
    5.100370287454475979015e-13,
    -2.058326053566506783222e-14,
    -5.34812253942301798237e-15,
    1.226778628238260790159e-15,
    -1.181259301697458769514e-16,
};

struct TemmeGammas {
  double gam1, gam2, gampl, gammi;
};

// gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2.
TemmeGammas temme_gammas(double mu) {
  const double mu2 = mu * mu;
  double even = 0.0;
  double odd = 0.0;
  double pw = 1.0;
  for (std::size_t k = 1; k + 1 < kRecipGamma.size(); k += 2) {
    odd += kRecipGamma[k] * pw;
    even += kRecipGamma[k + 1] * pw;
    pw *= mu2;
  }
  const double gam1 = -even;
  const double gam2 = odd;
  return {gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1};
}

void check_args(double nu, double x) {
  if (!std::isfinite(nu) || !std::isfinite(x)) throw std::domain_error("bessel_k: non-finite argument");
  if (nu < 0.0) throw std::domain_error("bessel_k: order must be non-negative");
  if (!(x > 0.0)) throw std::domain_error("bessel_k: argument must be positive");
}

bool is_half_integer(double nu) {
  const double twice = 2.0 * nu;
  return twice == std::floor(twice) && static_cast<long>(twice) % 2 == 1 && nu < 50.0;
}

// e^x K_{n+1/2}(x) = sqrt(pi/(2x)) sum_k (n+k)! / (k! (n-k)!) (2x)^{-k}.
double half_integer_scaled(double nu, double x) {
  const int n = static_cast<int>(nu - 0.5);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= n; ++k) {
    term *= static_cast<double>((n + k) * (n - k + 1)) / (static_cast<double>(k) * 2.0 * x);
    sum += term;
  }
  return std::sqrt(kPi / (2.0 * x)) * sum;
}

// Returns e^x K_mu(x) and e^x K_{mu+1}(x) for |mu| <= 1/2.
std::pair<double, double> temme_scaled(double mu, double x) {
  const double mu2 = mu * mu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  if (x < 2.0) {
    const auto g = temme_gammas(mu);
    const double x2 = 0.5 * x;
    const double pimu = kPi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    for (int i = 1; i < 10000; ++i) {
      const double di = i;
      ff = (di * ff + p + q) / (di * di - mu2);
      c *= d / di;
      p /= (di - mu);
      q /= (di + mu);
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - di * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    const double scale = std::exp(x);
    return {sum * scale, sum1 * xi2 * scale};
  }
  // Steed's method for the continued fraction CF2 (Thompson-Barnett form).
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i < 10000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h = a1 * h;
  const double kmu = std::sqrt(kPi / (2.0 * x)) / s;
  const double k1 = kmu * (mu + x + 0.5 - h) * xi;
  return {kmu, k1};
}

}  // namespace

double bessel_k_scaled(double nu, double x) {
  check_args(nu, x);
  if (is_half_integer(nu)) return half_integer_scaled(nu, x);
  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;
  auto [kmu, k1] = temme_scaled(mu, x);
  const double xi2 = 2.0 / x;
  for (int i = 1; i <= nl; ++i) {
    const double next = (mu + i) * xi2 * k1 + kmu;
    kmu = k1;
    k1 = next;
  }
  return kmu;
}

double bessel_k(double nu, double x) {
  check_args(nu, x);
  if (x > kBesselKUnderflow) return 0.0;
  return bessel_k_scaled(nu, x) * std::exp(-x);
}

double gamma_fn(double x) {
  if (!std::isfinite(x) || !(x > 0.0)) throw std::domain_error("gamma_fn: argument must be positive and finite");
  return std::tgamma(x);
}

namespace {

// log of \int_a^\infty tau^p K_nu(tau) d tau.
double log_tail_tau(double nu, double p, double a, const QuadratureSpec& quad) {
  // Scaled tail above b >= 1: e^b \int_b^\infty = \int_0^\infty e^{-s} (b+s)^p eK(b+s) ds.
  auto scaled_tail = [&](double b) {
    auto f = [&](double s) {
      const double tau = b + s;
      return std::exp(-s) * std::pow(tau, p) * bessel_k_scaled(nu, tau);
    };
    return integrate_to_infinity(f, 0.0, quad, 1.0).value;
  };
  if (a >= 1.0) return std::log(scaled_tail(a)) - a;
  // Below 1 the integrand behaves like 2^{nu-1} Gamma(nu) tau^{-2}; integrate the
  // remainder in log tau and add the singular part in closed form.
  const double lead = std::pow(2.0, nu - 1.0) * gamma_fn(nu);
  auto remainder = [&](double w) {
    const double tau = std::exp(w);
    return (std::pow(tau, p) * bessel_k(nu, tau) - lead / (tau * tau)) * tau;
  };
  QuadratureSpec inner = quad;
  inner.abs_tol = std::max(quad.abs_tol, quad.rel_tol * lead / a * 1e-3);
  const double rem = integrate(remainder, std::log(a), 0.0, inner).value;
  const double total = lead * (1.0 / a - 1.0) + rem + std::exp(-1.0) * scaled_tail(1.0);
  return std::log(total);
}

void check_tail_args(int d, double m, double r) {
  if (d < 1) throw std::domain_error("bessel_tail_integral: dimension must be >= 1");
  if (!(m > 0.0) || !std::isfinite(m)) throw std::domain_error("bessel_tail_integral: mass must be positive");
  if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("bessel_tail_integral: radius must be positive");
}

}  // namespace

double log_bessel_tail_integral(int d, double m, double r, const QuadratureSpec& quad) {
  check_tail_args(d, m, r);
  const double nu = 0.5 * (d + 1);
  const double p = 0.5 * (d - 3);
  // u = tau / m: \int_r^\infty u^p K(m u) du = m^{-(p+1)} \int_{m r}^\infty tau^p K(tau) d tau.
  return log_tail_tau(nu, p, m * r, quad) - (p + 1.0) * std::log(m);
}

double bessel_tail_integral(int d, double m, double r, const QuadratureSpec& quad) {
  return std::exp(log_bessel_tail_integral(d, m, r, quad));
}

}  // namespace rellevy
