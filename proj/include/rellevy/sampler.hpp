#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "rellevy/levy.hpp"
#include "rellevy/radial_map.hpp"
#include "rellevy/rng.hpp"

namespace rellevy {

/// Piecewise-constant path X(t) = sum_{s_i <= t} y_i on [0, horizon], with
/// every retained jump of radius >= cutoff.
struct JumpPath {
  ModelParams params{};
  double horizon = 0.0;
  double cutoff = 0.0;
  std::vector<double> times;
  std::vector<double> jumps;  // row-major, size() x d

  int dim() const noexcept { return params.d; }
  std::size_t size() const noexcept { return times.size(); }
  std::span<const double> jump(std::size_t i) const {
    return {jumps.data() + i * static_cast<std::size_t>(params.d), static_cast<std::size_t>(params.d)};
  }
  /// X(t), right-continuous.
  std::vector<double> position(double t) const;
  std::vector<double> endpoint() const { return position(horizon); }

  /// Throws std::logic_error on unsorted times, jumps below the cutoff or
  /// inconsistent sizes.
  void validate() const;
};

struct CoupledPair {
  JumpPath base;
  JumpPath transformed;
  double mass = 0.0;
};

/// Truncated Levy-Ito path on (0, T] keeping jumps with |y| >= eps. The jump
/// count is Poisson(T n^m(|y| >= eps)); for m > 0 each jump is phi applied to
/// an m = 0 jump drawn above l_m(eps).
JumpPath sample_path(double T, double eps, const RadialMap& map, RngStream& rng);

/// Applies phi jumpwise to an m = 0 path, keeping the jump times.
/// The transformed cutoff is l_m^{-1}(base cutoff).
CoupledPair transform_path(const JumpPath& base, const RadialMap& map);

/// sup_{t <= T} |a(t) - b(t)|, exact for piecewise-constant paths.
double sup_distance(const JumpPath& a, const JumpPath& b, double T);

/// One exact draw of X(t) as a Gaussian with subordinated variance: inverse
/// Gaussian time change for m > 0, one-sided 1/2-stable for m = 0.
std::vector<double> sample_increment(double t, const ModelParams& params, RngStream& rng);

/// |psi(xi) - \int_{|y| >= eps} (1 - cos xi.y) n^m(dy)|, the small-ball part.
double truncation_char_residual(std::span<const double> xi, double eps, const ModelParams& params,
                                const QuadratureSpec& quad = {});

/// Path dump: one CSV record per path with space-separated time and jump lists.
///   path,d,mass,horizon,cutoff,n_jumps,times,jumps
void write_path_dump(std::ostream& os, std::span<const JumpPath> paths);
std::vector<JumpPath> read_path_dump(std::istream& is);

}  // namespace rellevy
