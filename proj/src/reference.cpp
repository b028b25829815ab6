#include "rellevy/reference.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace rellevy {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kImageRange = 8;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Real-to-complex transform pair on the grid; FFTW's forward sign is e^{-i x.xi}.
class RealFft {
 public:
  explicit RealFft(const Grid& grid) : grid_(grid) {
    n_real_ = grid.size();
    n_complex_ = (grid.d == 1 ? 1 : static_cast<std::size_t>(grid.N)) * (grid.N / 2 + 1);
    real_ = fftw_alloc_real(n_real_);
    cplx_ = fftw_alloc_complex(n_complex_);
    if (!real_ || !cplx_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (grid.d == 1) {
      fwd_ = fftw_plan_dft_r2c_1d(grid.N, real_, cplx_, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_c2r_1d(grid.N, cplx_, real_, FFTW_ESTIMATE);
    } else {
      fwd_ = fftw_plan_dft_r2c_2d(grid.N, grid.N, real_, cplx_, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_c2r_2d(grid.N, grid.N, cplx_, real_, FFTW_ESTIMATE);
    }
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(cplx_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // Multiplier values in the r2c layout.
  std::vector<double> multiplier(double tau, const ModelParams& params) const {
    const int N = grid_.N;
    const int half = N / 2 + 1;
    const double dk = kPi / grid_.L;
    auto freq = [&](int j) { return (j <= N / 2 ? j : j - N) * dk; };
    std::vector<double> out(n_complex_);
    if (grid_.d == 1) {
      for (int k = 0; k < half; ++k) out[k] = std::exp(-tau * char_exponent_radial(k * dk, params));
    } else {
      for (int i = 0; i < N; ++i)
        for (int k = 0; k < half; ++k)
          out[static_cast<std::size_t>(i) * half + k] =
              std::exp(-tau * char_exponent_radial(std::hypot(freq(i), k * dk), params));
    }
    return out;
  }

  void apply(GridFunction& u, const std::vector<double>& mult) {
    std::copy(u.begin(), u.end(), real_);
    fftw_execute(fwd_);
    const double norm = 1.0 / static_cast<double>(n_real_);
    for (std::size_t i = 0; i < n_complex_; ++i) {
      cplx_[i][0] *= mult[i] * norm;
      cplx_[i][1] *= mult[i] * norm;
    }
    fftw_execute(bwd_);
    std::copy(real_, real_ + n_real_, u.begin());
  }

 private:
  Grid grid_;
  std::size_t n_real_ = 0, n_complex_ = 0;
  double* real_ = nullptr;
  fftw_complex* cplx_ = nullptr;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

void check_function(const GridFunction& u, const Grid& grid, const char* what) {
  if (u.size() != grid.size()) throw std::invalid_argument(std::string(what) + ": grid function size mismatch");
}

double unit_ball_volume(int d) { return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

// Periodized kernel at offset z: closed form for the d = 1 Cauchy kernel,
// otherwise images within |n|_inf <= kImageRange plus the far lattice
// approximated by the tail integral over the cell density.
double periodized_kernel(std::span<const double> z, double t, const ModelParams& params, const Grid& grid) {
  const double L = grid.L;
  if (params.d == 1 && params.m == 0.0) {
    const double a = kPi * t / L;
    return std::sinh(a) / (2.0 * L * (std::cosh(a) - std::cos(kPi * z[0] / L)));
  }
  double sum = 0.0;
  const int P = kImageRange;
  if (params.d == 1) {
    for (int n = -P; n <= P; ++n) sum += transition_kernel_radial(std::abs(z[0] + 2.0 * L * n), t, params);
  } else {
    for (int n1 = -P; n1 <= P; ++n1)
      for (int n2 = -P; n2 <= P; ++n2)
        sum += transition_kernel_radial(std::hypot(z[0] + 2.0 * L * n1, z[1] + 2.0 * L * n2), t, params);
  }
  const double cell = std::pow(2.0 * L, params.d);
  const double rho = std::pow(std::pow((2 * P + 1) * 2.0 * L, params.d) / unit_ball_volume(params.d), 1.0 / params.d);
  return sum + kernel_radial_tail(rho, t, params) / cell;
}

}  // namespace

void Grid::validate() const {
  if (d != 1 && d != 2) throw std::invalid_argument("Grid: reference solvers support d = 1 or 2");
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("Grid: half-width must be positive");
  if (N < 64 || (N & (N - 1)) != 0) throw std::invalid_argument("Grid: N must be a power of two >= 64");
}

std::size_t Grid::size() const {
  std::size_t n = 1;
  for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(N);
  return n;
}

std::vector<double> Grid::point(std::size_t index) const {
  std::vector<double> x(d);
  for (int k = d - 1; k >= 0; --k) {
    x[k] = coord(static_cast<int>(index % N));
    index /= N;
  }
  return x;
}

double default_box_half_width(double support_radius, double t) { return std::max(8.0 * support_radius, 20.0 * t); }

GridFunction sample_on_grid(const Grid& grid, const std::function<double(std::span<const double>)>& f) {
  grid.validate();
  GridFunction u(grid.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f(grid.point(i));
  return u;
}

double kernel_radial_tail(double rho, double t, const ModelParams& params) {
  if (!(rho > 0.0)) return 1.0;
  if (params.d == 1 && params.m == 0.0) return 1.0 - 2.0 / kPi * std::atan(rho / t);
  const double area = sphere_area(params.d);
  auto f = [&](double r) { return area * std::pow(r, params.d - 1.0) * transition_kernel_radial(r, t, params); };
  QuadratureSpec quad;
  quad.rel_tol = 1e-9;
  return integrate_to_infinity(f, rho, quad, rho + t).value;
}

GridFunction convolve_kernel(const GridFunction& g, double t, const ModelParams& params, const Grid& grid,
                             ConvolveRoute route) {
  grid.validate();
  params.validate();
  if (params.d != grid.d) throw std::invalid_argument("convolve_kernel: dimension mismatch");
  if (!(t > 0.0)) throw std::invalid_argument("convolve_kernel: t must be positive");
  check_function(g, grid, "convolve_kernel");
  if (route == ConvolveRoute::spectral) {
    RealFft fft(grid);
    GridFunction u = g;
    fft.apply(u, fft.multiplier(t, params));
    return u;
  }
  const int N = grid.N;
  const double h = grid.h();
  const double w = std::pow(h, grid.d);
  GridFunction out(grid.size(), 0.0);
  if (grid.d == 1) {
    std::vector<double> kper(N);
    for (int o = 0; o < N; ++o) {
      const double z = o * h;
      kper[o] = periodized_kernel(std::span<const double>(&z, 1), t, params, grid);
    }
    for (int i = 0; i < N; ++i) {
      double s = 0.0;
      for (int j = 0; j < N; ++j) s += kper[(i - j + N) % N] * g[j];
      out[i] = w * s;
    }
  } else {
    std::vector<double> kper(static_cast<std::size_t>(N) * N);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        const double z[2] = {a * h, b * h};
        kper[static_cast<std::size_t>(a) * N + b] = periodized_kernel(z, t, params, grid);
      }
    for (int i1 = 0; i1 < N; ++i1)
      for (int i2 = 0; i2 < N; ++i2) {
        double s = 0.0;
        for (int j1 = 0; j1 < N; ++j1) {
          const std::size_t row = static_cast<std::size_t>((i1 - j1 + N) % N) * N;
          for (int j2 = 0; j2 < N; ++j2) s += kper[row + (i2 - j2 + N) % N] * g[static_cast<std::size_t>(j1) * N + j2];
        }
        out[static_cast<std::size_t>(i1) * N + i2] = w * s;
      }
  }
  return out;
}

double aliasing_bound(double t, const ModelParams& params, const Grid& grid, double g_l1, double support,
                      double x_max) {
  grid.validate();
  const double L = grid.L;
  const double reach = x_max + support;
  if (!(2.0 * L - reach > 0.0)) return INFINITY;
  const int d = grid.d;
  const int P = kImageRange;
  double sum = 0.0;
  for (int j = 1; j <= P; ++j) {
    const double count = std::pow(2.0 * j + 1.0, d) - std::pow(2.0 * j - 1.0, d);
    sum += count * transition_kernel_radial(2.0 * L * j - reach, t, params);
  }
  const double far = 2.0 * L * P - reach - 2.0 * L * std::sqrt(static_cast<double>(d));
  sum += kernel_radial_tail(far, t, params) / std::pow(2.0 * L, d);
  return g_l1 * sum;
}

GridFunction split_step(const GridFunction& g, double t, int n_steps, const ModelParams& params,
                        const GridFunction& V, const Grid& grid) {
  grid.validate();
  params.validate();
  if (params.d != grid.d) throw std::invalid_argument("split_step: dimension mismatch");
  if (!(t > 0.0)) throw std::invalid_argument("split_step: t must be positive");
  if (n_steps < 4) throw std::invalid_argument("split_step: need at least 4 steps");
  check_function(g, grid, "split_step");
  check_function(V, grid, "split_step");
  const double v_min = *std::min_element(V.begin(), V.end());
  const double tau = t / n_steps;
  std::vector<double> half(V.size());
  for (std::size_t i = 0; i < V.size(); ++i) half[i] = std::exp(-0.5 * tau * (V[i] - v_min));
  RealFft fft(grid);
  const auto mult = fft.multiplier(tau, params);
  GridFunction u = g;
  for (int s = 0; s < n_steps; ++s) {
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= half[i];
    fft.apply(u, mult);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= half[i];
  }
  const double rescale = std::exp(-t * v_min);
  for (auto& v : u) v *= rescale;
  return u;
}

GridNorms grid_norms(const GridFunction& u, const GridFunction& v, const Grid& grid) {
  grid.validate();
  check_function(u, grid, "grid_norms");
  check_function(v, grid, "grid_norms");
  GridNorms n;
  double s2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double e = std::abs(u[i] - v[i]);
    n.sup = std::max(n.sup, e);
    s2 += e * e;
  }
  n.l2 = std::sqrt(s2 * std::pow(grid.h(), grid.d));
  return n;
}

double grid_l1(const GridFunction& u, const Grid& grid) {
  check_function(u, grid, "grid_l1");
  double s = 0.0;
  for (double v : u) s += std::abs(v);
  return s * std::pow(grid.h(), grid.d);
}

void write_grid_csv(std::ostream& os, const Grid& grid, std::span<const std::string> names,
                    std::span<const GridFunction> columns) {
  if (names.size() != columns.size()) throw std::invalid_argument("write_grid_csv: names and columns differ in count");
  for (const auto& c : columns) check_function(c, grid, "write_grid_csv");
  os << (grid.d == 1 ? "x" : "x,y");
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.point(i);
    for (int k = 0; k < grid.d; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", x[k]);
      os << (k ? "," : "") << buf;
    }
    for (const auto& c : columns) {
      std::snprintf(buf, sizeof buf, "%.17g", c[i]);
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace rellevy
