#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rellevy/levy.hpp"

namespace rellevy {

/// Periodic box [-L, L)^d with N nodes per axis at x_j = -L + j h, h = 2L/N.
struct Grid {
  int d = 1;
  double L = 20.0;
  int N = 1024;

  void validate() const;
  double h() const { return 2.0 * L / N; }
  std::size_t size() const;
  double coord(int j) const { return -L + j * h(); }
  /// Coordinates of the node with flat (row-major) index.
  std::vector<double> point(std::size_t index) const;
};

/// Default half-width max(8 support, 20 t).
double default_box_half_width(double support_radius, double t);

using GridFunction = std::vector<double>;

GridFunction sample_on_grid(const Grid& grid, const std::function<double(std::span<const double>)>& f);

enum class ConvolveRoute { spectral, direct };

/// Periodic convolution of g with k_0^m(., t) on the box. The spectral route
/// multiplies the discrete transform by e^{-t psi(xi)}; the direct route sums
/// h^d k_per(x_i - x_j) g_j against the periodized kernel, O(N^{2d}).
GridFunction convolve_kernel(const GridFunction& g, double t, const ModelParams& params, const Grid& grid,
                             ConvolveRoute route = ConvolveRoute::spectral);

/// Bound on |periodic result - whole-space result| at points with |x|_inf <= x_max
/// for data supported in |y|_inf <= support with L1 norm g_l1.
double aliasing_bound(double t, const ModelParams& params, const Grid& grid, double g_l1, double support,
                      double x_max);

/// Strang splitting of e^{-t(psi(D) + V)} with n_steps steps. V is shifted to
/// V - min V internally and the result rescaled by e^{-t min V}.
GridFunction split_step(const GridFunction& g, double t, int n_steps, const ModelParams& params,
                        const GridFunction& V, const Grid& grid);

struct GridNorms {
  double sup = 0.0;
  double l2 = 0.0;  // (h^d sum |u - v|^2)^{1/2}
};

GridNorms grid_norms(const GridFunction& u, const GridFunction& v, const Grid& grid);

/// h^d sum |u|.
double grid_l1(const GridFunction& u, const Grid& grid);

/// P(|X(t)| >= rho).
double kernel_radial_tail(double rho, double t, const ModelParams& params);

/// CSV with coordinate columns x (or x,y) followed by the named columns.
void write_grid_csv(std::ostream& os, const Grid& grid, std::span<const std::string> names,
                    std::span<const GridFunction> columns);

}  // namespace rellevy
