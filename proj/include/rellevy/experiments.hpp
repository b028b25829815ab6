#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rellevy/feynman_kac.hpp"

namespace rellevy {

enum class ExperimentKind {
  kernel_check,
  lk_check,
  sample_stats,
  weak_convergence,
  couple_distance,
  map_check,
  fk_oracle,
  sup_convergence,
  l2_convergence,
  selftest,
  certify_eps,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);
const std::vector<std::string>& experiment_names();

/// Thrown for invalid configurations (CLI exit code 2).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::selftest;
  int d = 1;
  std::vector<double> masses{1.0, 0.3, 0.1, 0.03, 0.0};
  double horizon = 1.0;
  double eps = 1e-3;
  long paths = 100000;
  int grid_n = 2048;
  double box_l = 0.0;  // 0 selects max(8 support, 20 t)
  int x_points = 41;
  double x_max = 2.0;
  double a_amp = 0.5, a_radius = 1.0;
  double v_amp = 1.0, v_radius = 1.0;
  std::string g_kind = "bump";
  double g_amp = 1.0, g_radius = 1.5;
  bool correction = true;
  double target = 1e-2;
  int split_steps = 256;
  double beta = 0.75;
  std::uint64_t seed = 20240611;
  int threads = 1;
  std::string out_dir = "out";

  /// Throws ConfigError.
  void validate() const;
  FieldConfig field_config() const;
  /// Canonical JSON of every field that can change an emitted number
  /// (threads and out_dir excluded).
  std::string canonical_json() const;
  std::uint64_t hash() const;
};

std::uint64_t fnv1a64(const std::string& bytes);

enum class RunStatus { ok, invariant_violation, numerical_failure };

struct RunManifest {
  std::uint64_t config_hash = 0;
  std::string config_json;
  std::string version;
  double wall_seconds = 0.0;
  RunStatus status = RunStatus::ok;
  std::string message;
  std::string summary_json;
  std::vector<std::string> files;
};

/// Runs one experiment, writes its CSV files and manifest.json into
/// config.out_dir, and returns the manifest. Module errors are caught and
/// reported as numerical_failure with a partial manifest.
RunManifest run(const RunConfig& config);

struct CertifyStep {
  double eps = 0.0;
  double m2 = 0.0;
  TruncationBudget budget;
  double char_residual = 0.0;  // at |xi| = 1
  bool certified = false;
};

struct CertifyReport {
  double eps = 0.0;
  TruncationBudget budget;
  std::vector<CertifyStep> steps;
};

/// Halves eps from eps_start until the truncation budget for (fields, params, t)
/// drops below target; throws std::runtime_error below eps_floor.
CertifyReport certify_epsilon(const FieldSpec& fields, const ModelParams& params, double t, double target,
                              bool correction = true, double eps_start = 0.1, double eps_floor = 1e-6);

const char* library_version();

/// First coordinates of X(t) for paths 0..n-1 of stream (seed, experiment_id).
std::vector<double> sample_endpoints(const RadialMap& map, double t, double eps, long n, std::uint64_t seed,
                                     std::uint64_t experiment_id, int threads = 1);

/// First coordinates of exact subordinated draws of X(t).
std::vector<double> sample_increments(const ModelParams& params, double t, long n, std::uint64_t seed,
                                      std::uint64_t experiment_id, int threads = 1);

struct MomentCheck {
  double joint = 0.0;  // E |X(s) - X(r)|^beta |X(t) - X(s)|^beta
  double joint_stderr = 0.0;
  double single_first = 0.0;  // quadrature of E |X(s - r)|^beta
  double single_second = 0.0;
  double product() const { return single_first * single_second; }
};

MomentCheck moment_factorization(const RadialMap& map, double beta, double r, double s, double t, double eps, long n,
                                 std::uint64_t seed, std::uint64_t experiment_id, int threads = 1);

/// sup_{t <= T} |Phi_m(X) - X| per base path, one row per map: [map][path].
std::vector<std::vector<double>> coupling_distances(std::span<const RadialMap> maps, double T, double eps, long n,
                                                    std::uint64_t seed, std::uint64_t experiment_id,
                                                    int threads = 1);

/// Sup over x of the first-coordinate density derivative of X(t), by
/// central differences on a fine grid; used for the KS truncation allowance.
double marginal_density_slope_sup(double t, double m);

}  // namespace rellevy
