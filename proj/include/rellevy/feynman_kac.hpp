#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rellevy/levy.hpp"
#include "rellevy/radial_map.hpp"
#include "rellevy/sampler.hpp"

namespace rellevy {

/// Sup norms used by the truncation budget. Gradient and Hessian norms are
/// operator norms; an absent bound is +inf.
struct FieldNorms {
  double a_sup = 0.0;
  double da_sup = 0.0;
  double v_sup = 0.0;
  double v_inf = 0.0;  // inf V, <= 0 for compactly supported V
  double v_grad_sup = 0.0;
  double v_hess_sup = 0.0;
  double g_sup = 0.0;
  double g_grad_sup = 0.0;
  double g_hess_sup = 0.0;
};

/// Fields A, DA, V, g on R^d. Empty A / V mean zero fields. DA is written
/// row-major with out[i * d + j] = d_j A_i.
struct FieldSpec {
  using VectorField = std::function<void(std::span<const double>, std::span<double>)>;
  using ScalarField = std::function<double(std::span<const double>)>;

  int d = 1;
  double support_radius = 0.0;  // A = V = 0 outside |x| <= support_radius
  VectorField A;
  VectorField DA;
  ScalarField V;
  ScalarField g;
  FieldNorms norms;

  bool has_A() const { return static_cast<bool>(A); }
  bool has_V() const { return static_cast<bool>(V); }

  /// Largest relative mismatch between DA and central differences of A
  /// at n pseudo-random points in the support.
  double jacobian_check(int n = 64, std::uint64_t seed = 1) const;

  /// Same fields with A replaced by A + c.
  FieldSpec with_constant_shift(std::span<const double> c) const;
};

/// a exp(-1 / (1 - |x - c|^2 / R^2)) on |x - c| < R, zero outside.
struct BumpSpec {
  double amplitude = 0.0;
  double radius = 1.0;
  std::vector<double> center;  // empty means the origin
};

enum class InitialKind { bump, box };

struct FieldConfig {
  int d = 1;
  BumpSpec a;       // vector potential a f(.) e_axis
  int a_axis = 0;
  BumpSpec v;
  InitialKind g_kind = InitialKind::bump;
  BumpSpec g{1.0, 1.0, {}};  // for box: amplitude on the cube |x_i - c_i| <= radius
};

FieldSpec make_fields(const FieldConfig& config);

double bump_value(const BumpSpec& b, std::span<const double> x);

struct ActionValue {
  double Y = 0.0;
  double VInt = 0.0;
  std::complex<double> S() const { return {VInt, Y}; }
};

struct ActionParts {
  double S1 = 0.0;         // retained-jump phase
  double S2 = 0.0;         // sub-cutoff martingale, not simulated
  double S2_budget = 0.0;  // (1/2) |DA| t M_2(eps)
  double S3 = 0.0;         // compensator correction
  double S4 = 0.0;         // \int_0^t (V - inf V)(x + X(s)) ds
};

/// S = iY + VInt on [0, path.horizon]. Y sums A(x + X(s-) + y/2).y over the
/// retained jumps; with correction it adds (M_2 / 2d) \int div A(x + X(s)) ds.
/// second_moment < 0 computes M_2 at the path's cutoff and mass.
ActionValue action(const JumpPath& path, std::span<const double> x, const FieldSpec& fields, bool correction = true,
                   double second_moment = -1.0);

ActionParts action_decomposition(const JumpPath& path, std::span<const double> x, const FieldSpec& fields,
                                 bool correction = true, double second_moment = -1.0);

/// e^{-S} g(x + X(t)) including the e^{-t inf V} factor from the shift.
std::complex<double> path_integrand(const JumpPath& path, std::span<const double> x, const FieldSpec& fields,
                                    bool correction = true, double second_moment = -1.0);

struct MCEstimate {
  std::complex<double> mean{};
  double stderr_re = 0.0;
  double stderr_im = 0.0;
  long n = 0;
  std::uint64_t config_hash = 0;

  double stderr_abs() const { return std::hypot(stderr_re, stderr_im); }
};

struct EstimateOptions {
  double eps = 1e-3;
  long paths = 100000;
  std::uint64_t seed = 1;
  std::uint64_t experiment_id = 0;
  int threads = 1;
  bool correction = true;
  std::uint64_t config_hash = 0;
};

/// Paths per reduction block; blocks are merged in a fixed pairwise tree.
inline constexpr long kBlockPaths = 256;

/// u^m(x, t) at every point of xs (each of length d), sharing paths across x.
std::vector<MCEstimate> estimate_u(std::span<const std::vector<double>> xs, double t, const FieldSpec& fields,
                                   const RadialMap& map, const EstimateOptions& opts);

struct CoupledEstimate {
  std::vector<double> masses;
  std::vector<std::vector<MCEstimate>> u;     // [mass][x]
  std::vector<std::vector<MCEstimate>> diff;  // [mass][x], u^m - u^0 paired per path
};

/// Every mass evaluated on phi-transforms of the same m = 0 base paths.
/// maps[i] must have mass masses[i]; the last mass must be 0.
CoupledEstimate estimate_u_coupled(std::span<const std::vector<double>> xs, double t, const FieldSpec& fields,
                                   std::span<const RadialMap> maps, const EstimateOptions& opts);

struct TruncationBudget {
  double path_term = 0.0;         // second-order effect of dropped jumps on V and g
  double phase_term = 0.0;        // (1/2) |A|^2 t M_2 |g|
  double compensator_term = 0.0;  // (1/2) |DA| t M_2 |g|, only without correction
  double total() const { return path_term + phase_term + compensator_term; }
};

TruncationBudget truncation_budget(const FieldSpec& fields, const ModelParams& params, double eps, double t,
                                   bool correction = true, const QuadratureSpec& quad = {});

}  // namespace rellevy
