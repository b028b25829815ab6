#include "rellevy/radial_map.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rellevy/specfun.hpp"

namespace rellevy {
namespace {

struct LogLAndSlope {
  double log_l;
  double slope;  // d log l / d log r
};

// log of 2^{(d-1)/2} Gamma((d+1)/2).
double log_map_constant(int d) { return 0.5 * (d - 1) * std::log(2.0) + std::lgamma(0.5 * (d + 1)); }

// In tau = m r: l = const / (m J(tau)) with J(tau) = \int_tau^\infty s^p K_nu(s) ds,
// and d log l / d log r = tau^{p+1} K_nu(tau) / J(tau).
LogLAndSlope direct_pair(double r, const ModelParams& params, const QuadratureSpec& quad) {
  const int d = params.d;
  const double m = params.m;
  const double p = 0.5 * (d - 3);
  const double tau = m * r;
  const double log_j = log_bessel_tail_integral(d, m, r, quad) + (p + 1.0) * std::log(m);
  const double log_l = log_map_constant(d) - std::log(m) - log_j;
  const double log_slope = (p + 1.0) * std::log(tau) + std::log(bessel_k_scaled(params.nu(), tau)) - tau - log_j;
  return {log_l, std::exp(log_slope)};
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double log_radial_l(double r, const ModelParams& params, const QuadratureSpec& quad) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("radial_l: radius must be positive");
  params.validate();
  if (params.m == 0.0) return std::log(r);
  return direct_pair(r, params, quad).log_l;
}

double radial_l(double r, const ModelParams& params, const QuadratureSpec& quad) {
  return std::exp(log_radial_l(r, params, quad));
}

RadialMap RadialMap::identity(int d) {
  RadialMap map;
  map.params_ = {d, 0.0};
  map.params_.validate();
  return map;
}

RadialMap RadialMap::build(const ModelParams& params, double r_lo, double r_hi, int nodes,
                           const QuadratureSpec& quad) {
  params.validate();
  if (params.m == 0.0) return identity(params.d);
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw std::invalid_argument("RadialMap::build: need 0 < r_lo < r_hi");
  if (nodes < 64) throw std::invalid_argument("RadialMap::build: need at least 64 nodes");

  RadialMap map;
  map.params_ = params;
  map.quad_ = quad;
  map.r_lo_ = r_lo;
  map.r_hi_ = r_hi;
  const double u0 = std::log(r_lo);
  map.du_ = (std::log(r_hi) - u0) / (nodes - 1);
  map.log_r_.resize(nodes);
  map.log_l_.resize(nodes);
  map.slope_.resize(nodes);
  for (int k = 0; k < nodes; ++k) map.log_r_[k] = u0 + k * map.du_;
  map.fill_mr();

  const int d = params.d;
  const double m = params.m;
  const double nu = params.nu();
  const double p = 0.5 * (d - 3);
  const double log_const = log_map_constant(d);

  // log J at the top node directly, then accumulate J downward node by node:
  // J_k = J_{k+1} + e^{-tau_k} \int_{tau_k}^{tau_{k+1}} e^{tau_k - s} s^p eK(s) ds.
  std::vector<double> log_j(nodes);
  const double r_top = std::exp(map.log_r_[nodes - 1]);
  log_j[nodes - 1] = log_bessel_tail_integral(d, m, r_top, quad) + (p + 1.0) * std::log(m);
  for (int k = nodes - 2; k >= 0; --k) {
    const double a = m * std::exp(map.log_r_[k]);
    const double b = m * std::exp(map.log_r_[k + 1]);
    auto f = [&](double s) { return std::exp(a - s) * std::pow(s, p) * bessel_k_scaled(nu, s); };
    const double piece = integrate(f, a, b, quad).value;
    log_j[k] = -a + std::log(std::exp(log_j[k + 1] + a) + piece);
  }
  for (int k = 0; k < nodes; ++k) {
    const double tau = m * std::exp(map.log_r_[k]);
    map.log_l_[k] = log_const - std::log(m) - log_j[k];
    map.slope_[k] = std::exp((p + 1.0) * std::log(tau) + std::log(bessel_k_scaled(nu, tau)) - tau - log_j[k]);
  }

  for (int k = 0; k < nodes; ++k) {
    if (!(map.slope_[k] > 0.0) || !std::isfinite(map.log_l_[k]))
      throw std::runtime_error("RadialMap::build: non-finite or non-positive tabulation");
    if (k > 0 && !(map.log_l_[k] > map.log_l_[k - 1]))
      throw std::runtime_error("RadialMap::build: tabulated l_m is not strictly increasing");
  }
  // Spot-check the interpolant against direct evaluation at segment midpoints.
  const int stride = std::max(1, (nodes - 1) / 64);
  for (int k = 0; k + 1 < nodes; k += stride) {
    const double u = map.log_r_[k] + 0.5 * map.du_;
    const double direct = direct_pair(std::exp(u), params, quad).log_l;
    if (std::abs(map.hermite(k, u) - direct) > 1e-8)
      throw std::runtime_error("RadialMap::build: interpolation error above 1e-8 at a mid-node");
  }
  return map;
}

// The interpolated quantity is q = log l - m r, which stays close to linear in
// log r at both ends; log l itself curves like e^u once m r >> 1.
double RadialMap::hermite(int seg, double u) const {
  const double t = (u - log_r_[seg]) / du_;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  const double q0 = log_l_[seg] - mr_[seg];
  const double q1 = log_l_[seg + 1] - mr_[seg + 1];
  const double dq0 = slope_[seg] - mr_[seg];
  const double dq1 = slope_[seg + 1] - mr_[seg + 1];
  return h00 * q0 + h10 * du_ * dq0 + h01 * q1 + h11 * du_ * dq1 + params_.m * std::exp(u);
}

double RadialMap::hermite_slope(int seg, double u) const {
  const double t = (u - log_r_[seg]) / du_;
  const double t2 = t * t;
  const double d00 = 6 * t2 - 6 * t;
  const double d10 = 3 * t2 - 4 * t + 1;
  const double d01 = -6 * t2 + 6 * t;
  const double d11 = 3 * t2 - 2 * t;
  const double q0 = log_l_[seg] - mr_[seg];
  const double q1 = log_l_[seg + 1] - mr_[seg + 1];
  const double dq0 = slope_[seg] - mr_[seg];
  const double dq1 = slope_[seg + 1] - mr_[seg + 1];
  return (d00 * q0 + d01 * q1) / du_ + d10 * dq0 + d11 * dq1 + params_.m * std::exp(u);
}

void RadialMap::fill_mr() {
  mr_.resize(log_r_.size());
  for (std::size_t k = 0; k < log_r_.size(); ++k) mr_[k] = params_.m * std::exp(log_r_[k]);
}

double RadialMap::direct_log_l(double r) const { return direct_pair(r, params_, quad_).log_l; }

double RadialMap::log_l(double r) const {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("RadialMap::l: radius must be positive");
  const double u = std::log(r);
  if (is_identity()) return u;
  const int nodes = static_cast<int>(log_r_.size());
  if (u < log_r_.front() || u > log_r_.back()) return direct_log_l(r);
  const int seg = std::clamp(static_cast<int>((u - log_r_.front()) / du_), 0, nodes - 2);
  return hermite(seg, u);
}

double RadialMap::l(double r) const { return std::exp(log_l(r)); }

double RadialMap::direct_inverse_log(double w) const {
  // l(r) >= r, so the root lies at or below w; l(r) ~ r as r -> 0.
  double hi = std::min(w, w < log_l_.front() ? log_r_.front() : w);
  double lo = w < log_l_.front() ? w - 1.0 : log_r_.back();
  while (direct_log_l(std::exp(lo)) > w) lo -= 1.0;
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto [val, slope] = direct_pair(std::exp(u), params_, quad_);
    const double f = val - w;
    if (f > 0.0) hi = u; else lo = u;
    double next = u - f / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) < 1e-15 * std::max(1.0, std::abs(u)) || hi - lo < 1e-15) return next;
    u = next;
  }
  throw std::runtime_error("RadialMap: inverse did not converge outside the table");
}

double RadialMap::l_inverse(double z) const {
  if (!(z > 0.0) || !std::isfinite(z)) throw std::domain_error("RadialMap::l_inverse: radius must be positive");
  if (is_identity()) return z;
  const double w = std::log(z);
  if (w < log_l_.front() || w > log_l_.back()) return std::exp(direct_inverse_log(w));
  const auto it = std::upper_bound(log_l_.begin(), log_l_.end(), w);
  const int nodes = static_cast<int>(log_l_.size());
  const int seg = std::clamp(static_cast<int>(it - log_l_.begin()) - 1, 0, nodes - 2);
  double lo = log_r_[seg];
  double hi = log_r_[seg + 1];
  const double span_v = log_l_[seg + 1] - log_l_[seg];
  double u = lo + (w - log_l_[seg]) / span_v * du_;
  for (int iter = 0; iter < 60; ++iter) {
    const double f = hermite(seg, u) - w;
    if (f > 0.0) hi = u; else lo = u;
    const double slope = hermite_slope(seg, u);
    double next = slope > 0.0 ? u - f / slope : 0.5 * (lo + hi);
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-15 * std::max(1.0, std::abs(u))) {
      u = next;
      break;
    }
    u = next;
  }
  return std::exp(u);
}

void RadialMap::phi(std::span<const double> z, std::span<double> out) const {
  if (static_cast<int>(z.size()) != dim() || out.size() != z.size())
    throw std::invalid_argument("RadialMap::phi: dimension mismatch");
  const double r = norm(z);
  if (r == 0.0) throw std::domain_error("RadialMap::phi: z must be non-zero");
  if (is_identity()) {
    std::copy(z.begin(), z.end(), out.begin());
    return;
  }
  const double scale = l_inverse(r) / r;
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] * scale;
}

void RadialMap::phi_inverse(std::span<const double> z, std::span<double> out) const {
  if (static_cast<int>(z.size()) != dim() || out.size() != z.size())
    throw std::invalid_argument("RadialMap::phi_inverse: dimension mismatch");
  const double r = norm(z);
  if (r == 0.0) throw std::domain_error("RadialMap::phi_inverse: z must be non-zero");
  if (is_identity()) {
    std::copy(z.begin(), z.end(), out.begin());
    return;
  }
  const double scale = l(r) / r;
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] * scale;
}

void RadialMap::save(std::ostream& os) const {
  char buf[128];
  os << "rellevy-radial-map " << kFormatVersion << '\n';
  os << "d " << params_.d << '\n';
  std::snprintf(buf, sizeof buf, "m %.17g\n", params_.m);
  os << buf;
  std::snprintf(buf, sizeof buf, "range %.17g %.17g\n", r_lo_, r_hi_);
  os << buf;
  std::snprintf(buf, sizeof buf, "quad %.17g %d\n", quad_.rel_tol, quad_.max_depth);
  os << buf;
  os << "nodes " << log_r_.size() << '\n';
  for (std::size_t k = 0; k < log_r_.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", log_r_[k], log_l_[k], slope_[k]);
    os << buf;
  }
}

RadialMap RadialMap::load(std::istream& is) {
  auto expect = [&](const std::string& key) {
    std::string got;
    if (!(is >> got) || got != key) throw std::runtime_error("RadialMap::load: expected '" + key + "'");
  };
  expect("rellevy-radial-map");
  int version = 0;
  is >> version;
  if (version != kFormatVersion) throw std::runtime_error("RadialMap::load: unsupported format version");
  RadialMap map;
  expect("d");
  is >> map.params_.d;
  expect("m");
  is >> map.params_.m;
  expect("range");
  is >> map.r_lo_ >> map.r_hi_;
  expect("quad");
  is >> map.quad_.rel_tol >> map.quad_.max_depth;
  expect("nodes");
  std::size_t nodes = 0;
  is >> nodes;
  if (!is) throw std::runtime_error("RadialMap::load: malformed header");
  map.params_.validate();
  if (map.params_.m == 0.0) return identity(map.params_.d);
  if (nodes < 2) throw std::runtime_error("RadialMap::load: too few nodes");
  map.log_r_.resize(nodes);
  map.log_l_.resize(nodes);
  map.slope_.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    if (!(is >> map.log_r_[k] >> map.log_l_[k] >> map.slope_[k]))
      throw std::runtime_error("RadialMap::load: truncated table");
    if (k > 0 && !(map.log_l_[k] > map.log_l_[k - 1] && map.log_r_[k] > map.log_r_[k - 1]))
      throw std::runtime_error("RadialMap::load: table is not strictly increasing");
  }
  map.du_ = (map.log_r_.back() - map.log_r_.front()) / static_cast<double>(nodes - 1);
  map.fill_mr();
  return map;
}

}  // namespace rellevy
