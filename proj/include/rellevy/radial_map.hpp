#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "rellevy/levy.hpp"
#include "rellevy/quadrature.hpp"

namespace rellevy {

/// l_m(r) by direct quadrature:
///   2^{(d-1)/2} Gamma((d+1)/2) / (m^{(d+1)/2} \int_r^\infty u^{(d-3)/2} K_{(d+1)/2}(m u) du).
/// Returns r itself at m = 0.
double radial_l(double r, const ModelParams& params, const QuadratureSpec& quad = {});
double log_radial_l(double r, const ModelParams& params, const QuadratureSpec& quad = {});

/// Tabulated radial transport l_m with its inverse. phi(z) = l_m^{-1}(|z|) z/|z|
/// pushes n^0 forward to n^m; phi_inverse(z) = l_m(|z|) z/|z| goes back.
///
/// The table stores log l_m against log r on a geometric grid, together with
/// the exact slope d log l / d log r from the defining ODE, and interpolates
/// log l - m r with cubic Hermite segments. Outside the grid the map falls back to
/// direct quadrature plus bisection. m = 0 gives the identity map.
class RadialMap {
 public:
  static constexpr double kDefaultRLo = 1e-6;
  static constexpr double kDefaultRHi = 1e3;
  static constexpr int kDefaultNodes = 2048;
  static constexpr int kFormatVersion = 1;

  static RadialMap identity(int d);
  static RadialMap build(const ModelParams& params, double r_lo = kDefaultRLo, double r_hi = kDefaultRHi,
                         int nodes = kDefaultNodes, const QuadratureSpec& quad = {});

  const ModelParams& params() const noexcept { return params_; }
  int dim() const noexcept { return params_.d; }
  double mass() const noexcept { return params_.m; }
  bool is_identity() const noexcept { return params_.m == 0.0; }
  double r_lo() const noexcept { return r_lo_; }
  double r_hi() const noexcept { return r_hi_; }
  std::span<const double> log_radii() const noexcept { return log_r_; }
  std::span<const double> log_values() const noexcept { return log_l_; }

  double l(double r) const;
  double log_l(double r) const;
  double l_inverse(double z) const;

  /// Writes phi(z) into out; |z| must be non-zero.
  void phi(std::span<const double> z, std::span<double> out) const;
  void phi_inverse(std::span<const double> z, std::span<double> out) const;

  /// Versioned text table: header lines then "log_r log_l slope" rows.
  void save(std::ostream& os) const;
  static RadialMap load(std::istream& is);

 private:
  RadialMap() = default;
  double hermite(int seg, double u) const;
  double hermite_slope(int seg, double u) const;
  double direct_log_l(double r) const;
  double direct_inverse_log(double log_z) const;
  void fill_mr();

  ModelParams params_{};
  QuadratureSpec quad_{};
  double r_lo_ = 0.0;
  double r_hi_ = 0.0;
  double du_ = 0.0;
  std::vector<double> log_r_;
  std::vector<double> log_l_;
  std::vector<double> slope_;
  std::vector<double> mr_;
};

}  // namespace rellevy
