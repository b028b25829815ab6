#include "rellevy/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "rellevy/parallel.hpp"
#include "rellevy/reference.hpp"
#include "rellevy/specfun.hpp"
#include "rellevy/stats.hpp"

namespace rellevy {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;

const std::vector<std::pair<ExperimentKind, std::string>>& kind_table() {
  static const std::vector<std::pair<ExperimentKind, std::string>> table = {
      {ExperimentKind::kernel_check, "kernel-check"},
      {ExperimentKind::lk_check, "lk-check"},
      {ExperimentKind::sample_stats, "sample-stats"},
      {ExperimentKind::weak_convergence, "weak-convergence"},
      {ExperimentKind::couple_distance, "couple-distance"},
      {ExperimentKind::map_check, "map-check"},
      {ExperimentKind::fk_oracle, "fk-oracle"},
      {ExperimentKind::sup_convergence, "sup-convergence"},
      {ExperimentKind::l2_convergence, "l2-convergence"},
      {ExperimentKind::selftest, "selftest"},
      {ExperimentKind::certify_eps, "certify-eps"},
  };
  return table;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string hex64(std::uint64_t x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

struct Table {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw std::logic_error("Table: row width does not match header for " + file);
    rows.push_back(std::move(row));
  }
  std::string render() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += '\n';
    }
    return out;
  }
};

struct Outcome {
  std::vector<Table> tables;
  json summary = json::object();
  std::vector<std::string> violations;
};

void write_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os << bytes;
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<double> positive_masses(const RunConfig& c) {
  std::vector<double> out;
  for (double m : c.masses)
    if (m > 0.0) out.push_back(m);
  return out;
}

RadialMap map_for(int d, double m) { return m == 0.0 ? RadialMap::identity(d) : RadialMap::build({d, m}); }

// Evaluation points along the first axis.
std::vector<std::vector<double>> line_points(int d, int n, double x_max) {
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(d, 0.0);
    x[0] = -x_max + 2.0 * x_max * i / (n - 1);
    xs.push_back(x);
  }
  return xs;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return NAN;
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(v.size() - 1, lo + 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---------------------------------------------------------------- experiments

Outcome run_kernel_check(const RunConfig& c) {
  Outcome out;
  Table kern{"kernel.csv", {"m", "t", "r", "kernel", "levy_density"}, {}};
  Table norm{"kernel_norm.csv", {"m", "t", "integral", "abs_error"}, {}};
  const double t = c.horizon;
  std::vector<double> rs;
  for (int i = 0; i <= 40; ++i) rs.push_back(std::pow(10.0, -2.0 + 4.0 * i / 40.0));
  std::vector<std::vector<double>> values;
  for (double m : c.masses) {
    const ModelParams p{c.d, m};
    std::vector<double> row;
    for (double r : rs) {
      const double k = transition_kernel_radial(r, t, p);
      row.push_back(k);
      kern.add({num(m), num(t), num(r), num(k), num(levy_density_radial(r, p))});
    }
    values.push_back(row);
    const double area = sphere_area(c.d);
    auto f = [&](double r) { return area * std::pow(r, c.d - 1.0) * transition_kernel_radial(r, t, p); };
    QuadratureSpec q;
    q.rel_tol = 1e-11;
    const double total = integrate_to_infinity(f, 0.0, q, t + (m > 0 ? 1.0 / m : t)).value;
    norm.add({num(m), num(t), num(total), num(std::abs(total - 1.0))});
    if (std::abs(total - 1.0) > 1e-6) out.violations.push_back("kernel mass differs from 1 at m=" + num(m));
  }
  long inversions = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    for (std::size_t i = 0; i < rs.size(); ++i)
      if (values[k][i] < values[k - 1][i]) ++inversions;
  out.tables = {kern, norm};
  out.summary["tail_order_inversions"] = inversions;
  out.summary["masses"] = c.masses;
  return out;
}

Outcome run_lk_check(const RunConfig& c) {
  Outcome out;
  Table t{"lk.csv", {"d", "m", "xi", "psi", "residual"}, {}};
  double worst = 0.0;
  for (double m : c.masses)
    for (double xi : {0.5, 1.0, 2.0, 5.0}) {
      const ModelParams p{c.d, m};
      std::vector<double> v(c.d, 0.0);
      v[0] = xi;
      const double res = levy_khintchine_residual(v, p);
      worst = std::max(worst, res);
      t.add({std::to_string(c.d), num(m), num(xi), num(char_exponent(v, p)), num(res)});
      if (!(res < 1e-6)) out.violations.push_back("Levy-Khintchine residual above 1e-6 at m=" + num(m) + " xi=" + num(xi));
    }
  out.tables = {t};
  out.summary["max_residual"] = worst;
  return out;
}

Outcome run_sample_stats(const RunConfig& c) {
  Outcome out;
  Table t{"sample_stats.csv",
          {"m", "eps", "n", "mean_jumps", "jumps_stderr", "expected_jumps", "ks_path", "ks_subordination",
           "ks_critical"},
          {}};
  Table mt{"moments.csv",
           {"m", "beta", "r", "s", "t", "joint", "joint_stderr", "single_first", "single_second", "product", "z"},
           {}};
  const double T = c.horizon;
  for (std::size_t k = 0; k < c.masses.size(); ++k) {
    const double m = c.masses[k];
    const ModelParams p{c.d, m};
    const RadialMap map = map_for(c.d, m);

    const auto n_blocks = static_cast<std::size_t>((c.paths + kBlockPaths - 1) / kBlockPaths);
    std::vector<RunningStats> counts(n_blocks);
    std::vector<double> ends(c.paths);
    parallel_blocks(n_blocks, c.threads, [&](std::size_t b) {
      const long lo = static_cast<long>(b) * kBlockPaths;
      const long hi = std::min(c.paths, lo + kBlockPaths);
      for (long i = lo; i < hi; ++i) {
        RngStream rng(c.seed, 100 + k, static_cast<std::uint64_t>(i));
        const JumpPath path = sample_path(T, c.eps, map, rng);
        counts[b].add(static_cast<double>(path.size()));
        ends[i] = path.endpoint()[0];
      }
    });
    const RunningStats jc = pairwise_reduce(std::move(counts), [](RunningStats& a, const RunningStats& o) { a.merge(o); });
    const double expected = T * tail_mass(c.eps, p);
    auto cdf = [&](double x) { return kernel_cdf_1d(x, T, m); };
    const double ks_path = ks_distance(ends, cdf);
    const double ks_sub = ks_distance(sample_increments(p, T, c.paths, c.seed, 200 + k, c.threads), cdf);
    const double m2 = small_jump_second_moment(c.eps, p);
    const double allowance = 0.5 * T * m2 / c.d * marginal_density_slope_sup(T, m);
    const double critical = 1.95 / std::sqrt(static_cast<double>(c.paths));
    t.add({num(m), num(c.eps), std::to_string(c.paths), num(jc.mean), num(jc.stderr_mean()), num(expected), num(ks_path),
           num(ks_sub), num(critical)});
    if (std::abs(jc.mean - expected) > 4.0 * jc.stderr_mean())
      out.violations.push_back("jump count mean off by more than 4 stderr at m=" + num(m));
    if (ks_path > critical + allowance) out.violations.push_back("endpoint KS above critical value at m=" + num(m));
    if (ks_sub > critical) out.violations.push_back("subordination KS above critical value at m=" + num(m));

    const MomentCheck mc = moment_factorization(map, c.beta, 0.0, 0.5 * T, T, c.eps, c.paths, c.seed, 300 + k, c.threads);
    const double z = (mc.joint - mc.product()) / mc.joint_stderr;
    mt.add({num(m), num(c.beta), num(0.0), num(0.5 * T), num(T), num(mc.joint), num(mc.joint_stderr),
            num(mc.single_first), num(mc.single_second), num(mc.product()), num(z)});
    if (m > 0.0 && std::abs(z) > 3.0) out.violations.push_back("moment factorization beyond 3 stderr at m=" + num(m));
  }
  out.tables = {t, mt};
  return out;
}

Outcome run_weak_convergence(const RunConfig& c) {
  Outcome out;
  Table t{"weak_convergence.csv", {"m", "ks", "mc_error", "n", "eps"}, {}};
  const double T = c.horizon;
  auto cauchy = [&](double x) { return kernel_cdf_1d(x, T, 0.0); };
  std::vector<double> ks_pos;
  for (std::size_t k = 0; k < c.masses.size(); ++k) {
    const double m = c.masses[k];
    const auto ends = sample_endpoints(map_for(c.d, m), T, c.eps, c.paths, c.seed, 600 + k, c.threads);
    const double ks = ks_distance(ends, cauchy);
    if (m > 0.0) ks_pos.push_back(ks);
    t.add({num(m), num(ks), num(0.8687 / std::sqrt(static_cast<double>(c.paths))), std::to_string(c.paths), num(c.eps)});
  }
  if (!strictly_decreasing(ks_pos)) out.violations.push_back("KS distance not strictly decreasing along the mass ladder");
  out.tables = {t};
  out.summary["ks"] = ks_pos;
  return out;
}

Outcome run_couple_distance(const RunConfig& c) {
  Outcome out;
  Table t{"coupling.csv", {"m", "n", "median", "q25", "q75", "mean"}, {}};
  Table samples{"coupling_samples.csv", {"path", "m", "sup_distance"}, {}};
  const auto masses = positive_masses(c);
  std::vector<RadialMap> maps;
  for (double m : masses) maps.push_back(RadialMap::build({c.d, m}));
  const auto dist = coupling_distances(maps, c.horizon, c.eps, c.paths, c.seed, 700, c.threads);
  std::vector<double> medians;
  for (std::size_t k = 0; k < masses.size(); ++k) {
    std::vector<double> v = dist[k];
    std::sort(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    medians.push_back(quantile_sorted(v, 0.5));
    t.add({num(masses[k]), std::to_string(v.size()), num(medians.back()), num(quantile_sorted(v, 0.25)),
           num(quantile_sorted(v, 0.75)), num(mean)});
    for (std::size_t p = 0; p < dist[k].size(); ++p) samples.add({std::to_string(p), num(masses[k]), num(dist[k][p])});
  }
  // Per-jump displacement |phi_m(z) - z| = |z| - l_m^{-1}(|z|) shrinks as m decreases.
  long jump_violations = 0;
  for (double z : {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
    double prev = INFINITY;
    for (const auto& map : maps) {
      const double disp = z - map.l_inverse(z);
      if (disp > prev * (1.0 + 1e-12)) ++jump_violations;
      prev = disp;
    }
  }
  long path_inversions = 0;
  for (std::size_t k = 1; k < masses.size(); ++k)
    for (std::size_t p = 0; p < dist[k].size(); ++p)
      if (dist[k][p] > dist[k - 1][p] * (1.0 + 1e-12)) ++path_inversions;
  if (jump_violations) out.violations.push_back("per-jump displacement increased as m decreased");
  if (!strictly_decreasing(medians)) out.violations.push_back("median coupling distance not decreasing in m");
  out.tables = {t, samples};
  out.summary["medians"] = medians;
  out.summary["per_path_sup_inversions"] = path_inversions;
  return out;
}

Outcome run_map_check(const RunConfig& c) {
  Outcome out;
  Table t{"map_check.csv", {"d", "m", "r", "l", "l_over_r_minus_1"}, {}};
  Table push{"pushforward.csv", {"d", "m", "a", "b", "direct", "pullback", "rel_err"}, {}};
  const auto masses = positive_masses(c);
  std::vector<double> rs;
  for (int i = 0; i <= 18; ++i) rs.push_back(std::pow(10.0, -6.0 + i / 2.0));
  std::vector<std::vector<double>> ls;
  const double c0 = sphere_area(c.d) * cauchy_constant(c.d);
  double worst_push = 0.0;
  for (double m : masses) {
    const ModelParams p{c.d, m};
    const RadialMap map = RadialMap::build(p);
    const auto lv = map.log_values();
    const auto lr = map.log_radii();
    for (std::size_t k = 0; k < lv.size(); ++k) {
      if (k > 0 && !(lv[k] > lv[k - 1])) out.violations.push_back("tabulated l_m not increasing at m=" + num(m));
      if (!(lv[k] > lr[k])) out.violations.push_back("l_m(r) <= r at a node for m=" + num(m));
    }
    std::vector<double> row;
    for (double r : rs) {
      const double l = map.l(r);
      row.push_back(l);
      t.add({std::to_string(c.d), num(m), num(r), num(l), num(std::expm1(map.log_l(r) - std::log(r)))});
    }
    ls.push_back(row);
    const double area = sphere_area(c.d);
    for (int i = 0; i < 20; ++i) {
      const double a = std::pow(10.0, -2.0 + 4.0 * i / 20.0);
      const double b = std::pow(10.0, -2.0 + 4.0 * (i + 1) / 20.0);
      auto f = [&](double r) { return area * levy_density_radial(r, p) * std::pow(r, c.d - 1.0); };
      QuadratureSpec q;
      q.rel_tol = 1e-12;
      const double direct = integrate(f, a, b, q).value;
      // n^0(l(a) <= |z| < l(b)) = c0 (1/l(a) - 1/l(b))
      const double pull = c0 * std::exp(-map.log_l(a)) * -std::expm1(map.log_l(a) - map.log_l(b));
      const double rel = std::abs(direct - pull) / direct;
      worst_push = std::max(worst_push, rel);
      push.add({std::to_string(c.d), num(m), num(a), num(b), num(direct), num(pull), num(rel)});
      if (!(rel < 1e-6)) out.violations.push_back("pushforward mismatch above 1e-6 at m=" + num(m));
    }
  }
  for (std::size_t k = 1; k < ls.size(); ++k)
    for (std::size_t i = 0; i < rs.size(); ++i)
      if (!(ls[k][i] < ls[k - 1][i])) out.violations.push_back("l_m(r) not decreasing in m at r=" + num(rs[i]));
  out.tables = {t, push};
  out.summary["max_pushforward_rel_err"] = worst_push;
  return out;
}

struct OracleGrid {
  Grid grid;
  std::vector<std::size_t> nodes;
  std::vector<std::vector<double>> xs;
};

OracleGrid oracle_points(const RunConfig& c, const FieldSpec& fields) {
  OracleGrid og;
  const double g_reach = c.g_radius;
  const double support = std::max({fields.support_radius, g_reach, c.x_max});
  og.grid = {c.d, c.box_l > 0.0 ? c.box_l : default_box_half_width(support, c.horizon), c.grid_n};
  og.grid.validate();
  const Grid& g = og.grid;
  for (const auto& x : line_points(c.d, c.x_points, c.x_max)) {
    const int j = static_cast<int>(std::lround((x[0] + g.L) / g.h()));
    std::size_t idx = static_cast<std::size_t>(j);
    if (c.d == 2) idx = static_cast<std::size_t>(j) * g.N + static_cast<std::size_t>(g.N / 2);
    og.nodes.push_back(idx);
    og.xs.push_back(g.point(idx));
  }
  return og;
}

// sup of |Laplacian u| over nodes with |x|_inf <= reach, second differences.
double laplacian_sup(const GridFunction& u, const Grid& g, double reach) {
  const double h2 = g.h() * g.h();
  const auto n = static_cast<std::size_t>(g.N);
  double worst = 0.0;
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    const auto x = g.point(idx);
    bool inside = true;
    for (double v : x) inside = inside && std::abs(v) <= reach;
    if (!inside) continue;
    double lap = 0.0;
    std::size_t stride = 1;
    for (int axis = g.d - 1; axis >= 0; --axis) {
      const std::size_t j = (idx / stride) % n;
      const std::size_t up = idx - j * stride + ((j + 1) % n) * stride;
      const std::size_t dn = idx - j * stride + ((j + n - 1) % n) * stride;
      lap += (u[up] - 2.0 * u[idx] + u[dn]) / h2;
      stride *= n;
    }
    worst = std::max(worst, std::abs(lap));
  }
  return worst;
}

Outcome run_fk_oracle(const RunConfig& c) {
  if (c.d > 2) throw ConfigError("fk-oracle: reference solvers support d = 1 or 2");
  Outcome out;
  RunConfig cc = c;
  cc.a_amp = 0.0;
  const FieldSpec fields = make_fields(cc.field_config());
  const double T = c.horizon;

  double eps = c.eps;
  if (c.target > 0.0) {
    eps = INFINITY;
    for (double m : c.masses) eps = std::min(eps, certify_epsilon(fields, {c.d, m}, T, c.target, c.correction).eps);
  }
  const OracleGrid og = oracle_points(c, fields);
  const Grid& grid = og.grid;
  const GridFunction g0 = sample_on_grid(grid, fields.g);
  const GridFunction V = fields.has_V() ? sample_on_grid(grid, fields.V) : GridFunction(grid.size(), 0.0);
  const double g_l1 = grid_l1(g0, grid);
  const bool closed_form = c.d == 1 && !fields.has_V() && c.g_kind == "box";

  Table t{"fk_oracle.csv",
          {"m", "x", "eps", "mc_re", "mc_im", "stderr_re", "reference", "abs_diff", "trunc_budget", "split_budget",
           "alias_bound", "tolerance", "pass"},
          {}};
  long failures = 0;
  bool surrogate_budget = false;
  for (std::size_t k = 0; k < c.masses.size(); ++k) {
    const double m = c.masses[k];
    const ModelParams p{c.d, m};
    const RadialMap map = map_for(c.d, m);
    GridFunction ref;
    GridFunction split_err(grid.size(), 0.0);
    if (!fields.has_V()) {
      ref = convolve_kernel(g0, T, p, grid);
    } else {
      ref = split_step(g0, T, c.split_steps, p, V, grid);
      const GridFunction coarse = split_step(g0, T, c.split_steps / 2, p, V, grid);
      for (std::size_t i = 0; i < ref.size(); ++i) split_err[i] = std::abs(ref[i] - coarse[i]) / 3.0;
    }
    const double alias = closed_form && m == 0.0 ? 0.0 : aliasing_bound(T, p, grid, g_l1, c.g_radius, c.x_max);
    EstimateOptions opts;
    opts.eps = eps;
    opts.paths = c.paths;
    opts.seed = c.seed;
    opts.experiment_id = 400 + k;
    opts.threads = c.threads;
    opts.correction = c.correction;
    opts.config_hash = c.hash();
    const auto est = estimate_u(og.xs, T, fields, map, opts);
    double budget = truncation_budget(fields, p, eps, T, c.correction).total();
    if (!std::isfinite(budget)) {
      // box g: curvature of the reference solution stands in for |g''|
      budget = 0.5 * T * small_jump_second_moment(eps, p) / c.d * laplacian_sup(ref, grid, c.x_max + 1.0);
      surrogate_budget = true;
    }
    for (std::size_t i = 0; i < og.xs.size(); ++i) {
      const double x = og.xs[i][0];
      double reference = ref[og.nodes[i]];
      if (closed_form && m == 0.0)
        reference = c.g_amp * (std::atan((c.g_radius - x) / T) + std::atan((c.g_radius + x) / T)) / kPi;
      const double diff = std::abs(est[i].mean.real() - reference);
      const double tol = 3.0 * est[i].stderr_re + budget + split_err[og.nodes[i]] + alias;
      const bool pass = diff <= tol;
      if (!pass) ++failures;
      t.add({num(m), num(x), num(eps), num(est[i].mean.real()), num(est[i].mean.imag()), num(est[i].stderr_re),
             num(reference), num(diff), num(budget), num(split_err[og.nodes[i]]), num(alias), num(tol),
             pass ? "1" : "0"});
    }
  }
  if (failures) out.violations.push_back(std::to_string(failures) + " oracle comparisons outside tolerance");
  out.tables = {t};
  out.summary["eps"] = eps;
  out.summary["closed_form_reference"] = closed_form;
  out.summary["curvature_surrogate_budget"] = surrogate_budget;
  out.summary["A_forced_zero"] = c.a_amp != 0.0;
  out.summary["box_half_width"] = grid.L;
  return out;
}

Outcome run_convergence(const RunConfig& c, bool l2_primary) {
  if (c.masses.back() != 0.0) throw ConfigError("convergence experiments need a mass ladder ending in 0");
  Outcome out;
  const FieldSpec fields = make_fields(c.field_config());
  std::vector<RadialMap> maps;
  for (double m : c.masses) maps.push_back(map_for(c.d, m));
  const auto xs = line_points(c.d, c.x_points, c.x_max);
  EstimateOptions opts;
  opts.eps = c.eps;
  opts.paths = c.paths;
  opts.seed = c.seed;
  opts.experiment_id = 500;
  opts.threads = c.threads;
  opts.correction = c.correction;
  opts.config_hash = c.hash();
  const CoupledEstimate est = estimate_u_coupled(xs, c.horizon, fields, maps, opts);
  const std::string stem = l2_primary ? "l2_convergence" : "sup_convergence";
  Table conv{stem + ".csv", {"m", "sup_diff", "sup_stderr", "argmax_x", "l2_diff", "l2_stderr"}, {}};
  Table prof{stem + "_profile.csv",
             {"m", "x", "u_re", "u_im", "u_stderr_re", "u_stderr_im", "diff_re", "diff_im", "diff_stderr_re",
              "diff_stderr_im"},
             {}};
  const double hx = 2.0 * c.x_max / (c.x_points - 1);
  std::vector<double> sups, l2s;
  for (std::size_t k = 0; k < c.masses.size(); ++k) {
    double sup = -1.0, sup_se = 0.0, arg = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const MCEstimate& u = est.u[k][i];
      const MCEstimate& dd = est.diff[k][i];
      const double a = std::abs(dd.mean);
      if (a > sup) {
        sup = a;
        sup_se = dd.stderr_abs();
        arg = xs[i][0];
      }
      s2 += a * a;
      prof.add({num(c.masses[k]), num(xs[i][0]), num(u.mean.real()), num(u.mean.imag()), num(u.stderr_re),
                num(u.stderr_im), num(dd.mean.real()), num(dd.mean.imag()), num(dd.stderr_re), num(dd.stderr_im)});
    }
    const double l2 = std::sqrt(hx * s2);
    double l2_var = 0.0;
    if (l2 > 0.0)
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = hx * std::abs(est.diff[k][i].mean) / l2;
        l2_var += w * w * std::pow(est.diff[k][i].stderr_abs(), 2);
      }
    conv.add({num(c.masses[k]), num(sup), num(sup_se), num(arg), num(l2), num(std::sqrt(l2_var))});
    if (c.masses[k] > 0.0) {
      sups.push_back(sup);
      l2s.push_back(l2);
    }
  }
  const auto& primary = l2_primary ? l2s : sups;
  if (!strictly_decreasing(primary))
    out.violations.push_back(std::string(l2_primary ? "L2" : "sup") + " difference not decreasing along masses");
  out.tables = {conv, prof};
  out.summary["sup_diff"] = sups;
  out.summary["l2_diff"] = l2s;
  return out;
}

Outcome run_selftest(const RunConfig& c) {
  Outcome out;
  Table t{"selftest.csv", {"check", "value", "expected", "abs_error", "tolerance", "pass"}, {}};
  auto check = [&](const std::string& name, double value, double expected, double tol) {
    const double err = std::abs(value - expected);
    const bool pass = err <= tol;
    t.add({name, num(value), num(expected), num(err), num(tol), pass ? "1" : "0"});
    if (!pass) out.violations.push_back("selftest " + name);
  };
  const double one[1] = {1.0};
  const double three[1] = {3.0};
  const double zero3[3] = {0.0, 0.0, 0.0};
  const double two3[3] = {2.0, 0.0, 0.0};
  check("char_exponent_origin", char_exponent(std::span<const double>(zero3, 3), {3, 1.0}), 0.0, 0.0);
  check("char_exponent_m0", char_exponent(one, {1, 0.0}), 1.0, 1e-15);
  check("char_exponent_3_4", char_exponent(three, {1, 4.0}), 1.0, 1e-15);
  check("gamma_1", gamma_fn(1.0), 1.0, 1e-15);
  check("gamma_half", gamma_fn(0.5), std::sqrt(kPi), 1e-15);
  check("gamma_3", gamma_fn(3.0), 2.0, 1e-14);
  check("bessel_k_half_1", bessel_k(0.5, 1.0), std::sqrt(kPi / 2.0) * std::exp(-1.0), 1e-15);
  check("bessel_k_3half_2", bessel_k(1.5, 2.0), std::sqrt(kPi / 4.0) * std::exp(-2.0) * 1.5, 1e-15);
  check("sphere_area_1", sphere_area(1), 2.0, 1e-15);
  check("sphere_area_2", sphere_area(2), 2.0 * kPi, 1e-14);
  check("sphere_area_3", sphere_area(3), 4.0 * kPi, 1e-14);
  check("levy_density_d1_m0", levy_density(one, {1, 0.0}), 1.0 / kPi, 1e-16);
  check("levy_density_d3_m0", levy_density(std::span<const double>(two3, 3), {3, 0.0}), 1.0 / (16.0 * kPi * kPi), 1e-16);
  check("kernel_d1_m0", transition_kernel_radial(0.0, 1.0, {1, 0.0}), 1.0 / kPi, 1e-16);
  check("kernel_d3_m0", transition_kernel_radial(0.0, 1.0, {3, 0.0}), 1.0 / (kPi * kPi), 1e-16);
  check("tail_mass_r1", tail_mass(1.0, {1, 0.0}), 2.0 / kPi, 1e-15);
  check("tail_mass_r2", tail_mass(2.0, {1, 0.0}), 1.0 / kPi, 1e-15);
  check("tail_inverse_2pi", radial_tail_inverse(2.0 / kPi, {1, 0.0}, 1e-3), 1.0, 1e-12);
  check("tail_inverse_1pi", radial_tail_inverse(1.0 / kPi, {1, 0.0}, 1e-3), 2.0, 1e-12);
  check("tail_inverse_roundtrip", radial_tail_inverse(tail_mass(1.5, {1, 1.0}), {1, 1.0}, 1e-3), 1.5, 1e-9);
  const double origin[1] = {0.0};
  check("lk_origin", levy_khintchine_residual(origin, {1, 1.0}), 0.0, 0.0);

  const RadialMap map = RadialMap::build({c.d, 0.5}, 1e-4, 1e2, 256);
  std::vector<double> z(c.d, 0.3), y(c.d), back(c.d);
  map.phi(z, y);
  map.phi_inverse(y, back);
  check("phi_roundtrip", back[0], z[0], 1e-8 * std::abs(z[0]));
  const RadialMap ident = RadialMap::identity(c.d);
  ident.phi(z, y);
  check("phi_identity_m0", y[0], z[0], 0.0);

  const Grid g{1, 10.0, 64};
  GridFunction u(g.size(), 0.0), v(g.size(), 0.0);
  check("grid_norms_equal", grid_norms(u, u, g).sup + grid_norms(u, u, g).l2, 0.0, 0.0);
  for (int i = 10; i < 15; ++i) u[i] = 1.0;
  const GridNorms gn = grid_norms(u, v, g);
  check("grid_norms_sup", gn.sup, 1.0, 0.0);
  check("grid_norms_l2", gn.l2, std::sqrt(5.0 * g.h()), 1e-15);

  RngStream rng(c.seed, 900, 0);
  const JumpPath path = sample_path(1.0, 0.05, RadialMap::identity(c.d), rng);
  check("sup_distance_identical", sup_distance(path, path, 1.0), 0.0, 0.0);
  FieldConfig fc;
  fc.d = c.d;
  const FieldSpec zero_fields = make_fields(fc);
  const std::vector<double> x0(c.d, 0.0);
  const ActionValue av = action(path, x0, zero_fields);
  check("action_zero_fields", std::abs(av.S()), 0.0, 0.0);
  FieldConfig fv = fc;
  fv.v = {1.0, 1e6, {}};
  const FieldSpec vconst = make_fields(fv);
  const JumpPath still{{c.d, 0.0}, 1.0, 0.1, {}, {}};
  check("action_constant_V", action(still, x0, vconst).VInt, std::exp(-1.0) * 1.0, 1e-15);
  out.tables = {t};
  return out;
}

Outcome run_certify(const RunConfig& c) {
  Outcome out;
  const FieldSpec fields = make_fields(c.field_config());
  Table t{"certify.csv",
          {"m", "eps", "m2", "path_term", "phase_term", "compensator_term", "total", "char_residual", "certified"},
          {}};
  double eps = INFINITY;
  for (double m : c.masses) {
    const CertifyReport rep = certify_epsilon(fields, {c.d, m}, c.horizon, c.target, c.correction);
    eps = std::min(eps, rep.eps);
    for (const auto& s : rep.steps)
      t.add({num(m), num(s.eps), num(s.m2), num(s.budget.path_term), num(s.budget.phase_term),
             num(s.budget.compensator_term), num(s.budget.total()), num(s.char_residual), s.certified ? "1" : "0"});
  }
  out.tables = {t};
  out.summary["recommended_eps"] = eps;
  return out;
}

Outcome dispatch(const RunConfig& c) {
  switch (c.kind) {
    case ExperimentKind::kernel_check: return run_kernel_check(c);
    case ExperimentKind::lk_check: return run_lk_check(c);
    case ExperimentKind::sample_stats: return run_sample_stats(c);
    case ExperimentKind::weak_convergence: return run_weak_convergence(c);
    case ExperimentKind::couple_distance: return run_couple_distance(c);
    case ExperimentKind::map_check: return run_map_check(c);
    case ExperimentKind::fk_oracle: return run_fk_oracle(c);
    case ExperimentKind::sup_convergence: return run_convergence(c, false);
    case ExperimentKind::l2_convergence: return run_convergence(c, true);
    case ExperimentKind::selftest: return run_selftest(c);
    case ExperimentKind::certify_eps: return run_certify(c);
  }
  throw ConfigError("unknown experiment kind");
}

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::invariant_violation: return "invariant_violation";
    case RunStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

}  // namespace

const char* library_version() { return "0.1.0"; }

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kind_table())
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (const auto& [k, n] : kind_table())
    if (n == name) return k;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& kv : kind_table()) v.push_back(kv.second);
    return v;
  }();
  return names;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (d < 1 || d > kMaxDim) fail("dim must be in [1, 8]");
  if (masses.empty()) fail("mass ladder is empty");
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(masses[i] >= 0.0) || !std::isfinite(masses[i])) fail("masses must be finite and >= 0");
    if (i > 0 && !(masses[i] < masses[i - 1])) fail("masses must be strictly decreasing");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("horizon must be positive");
  if (!(eps > 0.0) || !std::isfinite(eps)) fail("eps must be positive");
  if (paths < 2) fail("paths must be >= 2");
  if (grid_n < 64 || (grid_n & (grid_n - 1)) != 0) fail("grid-n must be a power of two >= 64");
  if (!(box_l >= 0.0)) fail("box-l must be >= 0");
  if (x_points < 2) fail("x-points must be >= 2");
  if (!(x_max > 0.0)) fail("x-max must be positive");
  if (!(a_radius > 0.0 && v_radius > 0.0 && g_radius > 0.0)) fail("field radii must be positive");
  if (g_kind != "bump" && g_kind != "box") fail("g-kind must be 'bump' or 'box'");
  if (!(target >= 0.0)) fail("target must be >= 0");
  if (split_steps < 4 || split_steps % 2 != 0) fail("split-steps must be even and >= 4");
  if (!(beta > 0.0 && beta < 1.0)) fail("beta must lie in (0, 1)");
  if (threads < 1) fail("threads must be >= 1");
  if (kind == ExperimentKind::fk_oracle && d > 2) fail("fk-oracle supports dim 1 or 2");
  if (kind == ExperimentKind::certify_eps && !(target > 0.0)) fail("certify-eps needs a positive target");
  if ((kind == ExperimentKind::sup_convergence || kind == ExperimentKind::l2_convergence) && masses.back() != 0.0)
    fail("convergence experiments need a mass ladder ending in 0");
}

FieldConfig RunConfig::field_config() const {
  FieldConfig f;
  f.d = d;
  f.a = {a_amp, a_radius, {}};
  f.v = {v_amp, v_radius, {}};
  f.g_kind = g_kind == "box" ? InitialKind::box : InitialKind::bump;
  f.g = {g_amp, g_radius, {}};
  return f;
}

std::string RunConfig::canonical_json() const {
  json j;
  j["kind"] = to_string(kind);
  j["dim"] = d;
  j["masses"] = masses;
  j["horizon"] = horizon;
  j["eps"] = eps;
  j["paths"] = paths;
  j["grid_n"] = grid_n;
  j["box_l"] = box_l;
  j["x_points"] = x_points;
  j["x_max"] = x_max;
  j["a_amp"] = a_amp;
  j["a_radius"] = a_radius;
  j["v_amp"] = v_amp;
  j["v_radius"] = v_radius;
  j["g_kind"] = g_kind;
  j["g_amp"] = g_amp;
  j["g_radius"] = g_radius;
  j["correction"] = correction;
  j["target"] = target;
  j["split_steps"] = split_steps;
  j["beta"] = beta;
  j["seed"] = seed;
  return j.dump();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical_json()); }

RunManifest run(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunManifest man;
  man.config_hash = config.hash();
  man.config_json = config.canonical_json();
  man.version = library_version();
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);

  json summary = json::object();
  try {
    Outcome res = dispatch(config);
    for (const Table& t : res.tables) {
      write_atomic(dir / t.file, t.render());
      man.files.push_back(t.file);
    }
    summary = res.summary;
    summary["violations"] = res.violations;
    if (!res.violations.empty()) {
      man.status = RunStatus::invariant_violation;
      man.message = res.violations.front();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    man.status = RunStatus::numerical_failure;
    man.message = e.what();
  }
  man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  man.summary_json = summary.dump();

  json mj;
  mj["config_hash"] = hex64(man.config_hash);
  mj["config"] = json::parse(man.config_json);
  mj["threads"] = config.threads;
  mj["library_version"] = man.version;
  mj["wall_seconds"] = man.wall_seconds;
  mj["status"] = status_name(man.status);
  mj["message"] = man.message;
  mj["summary"] = summary;
  mj["files"] = man.files;
  write_atomic(dir / "manifest.json", mj.dump(2) + "\n");
  return man;
}

CertifyReport certify_epsilon(const FieldSpec& fields, const ModelParams& params, double t, double target,
                              bool correction, double eps_start, double eps_floor) {
  if (!(target > 0.0)) throw std::invalid_argument("certify_epsilon: target must be positive");
  if (!(eps_start > eps_floor && eps_floor > 0.0)) throw std::invalid_argument("certify_epsilon: bad eps range");
  CertifyReport rep;
  std::vector<double> xi(params.d, 0.0);
  xi[0] = 1.0;
  for (double eps = eps_start; eps >= eps_floor; eps *= 0.5) {
    CertifyStep step;
    step.eps = eps;
    step.m2 = small_jump_second_moment(eps, params);
    step.budget = truncation_budget(fields, params, eps, t, correction);
    step.char_residual = truncation_char_residual(xi, eps, params);
    step.certified = step.budget.total() < target;
    rep.steps.push_back(step);
    if (step.certified) {
      rep.eps = eps;
      rep.budget = step.budget;
      return rep;
    }
  }
  throw std::runtime_error("certify_epsilon: target unreachable above eps = " + num(eps_floor));
}

std::vector<double> sample_endpoints(const RadialMap& map, double t, double eps, long n, std::uint64_t seed,
                                     std::uint64_t experiment_id, int threads) {
  std::vector<double> out(n);
  const auto n_blocks = static_cast<std::size_t>((n + kBlockPaths - 1) / kBlockPaths);
  parallel_blocks(n_blocks, threads, [&](std::size_t b) {
    const long lo = static_cast<long>(b) * kBlockPaths;
    const long hi = std::min(n, lo + kBlockPaths);
    for (long i = lo; i < hi; ++i) {
      RngStream rng(seed, experiment_id, static_cast<std::uint64_t>(i));
      out[i] = sample_path(t, eps, map, rng).endpoint()[0];
    }
  });
  return out;
}

std::vector<double> sample_increments(const ModelParams& params, double t, long n, std::uint64_t seed,
                                      std::uint64_t experiment_id, int threads) {
  std::vector<double> out(n);
  const auto n_blocks = static_cast<std::size_t>((n + kBlockPaths - 1) / kBlockPaths);
  parallel_blocks(n_blocks, threads, [&](std::size_t b) {
    const long lo = static_cast<long>(b) * kBlockPaths;
    const long hi = std::min(n, lo + kBlockPaths);
    for (long i = lo; i < hi; ++i) {
      RngStream rng(seed, experiment_id, static_cast<std::uint64_t>(i));
      out[i] = sample_increment(t, params, rng)[0];
    }
  });
  return out;
}

MomentCheck moment_factorization(const RadialMap& map, double beta, double r, double s, double t, double eps, long n,
                                 std::uint64_t seed, std::uint64_t experiment_id, int threads) {
  if (!(0.0 <= r && r < s && s < t)) throw std::invalid_argument("moment_factorization: need 0 <= r < s < t");
  auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s2);
  };
  const auto n_blocks = static_cast<std::size_t>((n + kBlockPaths - 1) / kBlockPaths);
  std::vector<RunningStats> blocks(n_blocks);
  parallel_blocks(n_blocks, threads, [&](std::size_t b) {
    const long lo = static_cast<long>(b) * kBlockPaths;
    const long hi = std::min(n, lo + kBlockPaths);
    for (long i = lo; i < hi; ++i) {
      RngStream rng(seed, experiment_id, static_cast<std::uint64_t>(i));
      const JumpPath path = sample_path(t, eps, map, rng);
      const auto xr = path.position(r);
      const auto xs = path.position(s);
      const auto xt = path.position(t);
      blocks[b].add(std::pow(dist(xs, xr), beta) * std::pow(dist(xt, xs), beta));
    }
  });
  const RunningStats st = pairwise_reduce(std::move(blocks), [](RunningStats& a, const RunningStats& o) { a.merge(o); });
  MomentCheck mc;
  mc.joint = st.mean;
  mc.joint_stderr = st.stderr_mean();
  mc.single_first = kernel_abs_moment(beta, s - r, map.params());
  mc.single_second = kernel_abs_moment(beta, t - s, map.params());
  return mc;
}

std::vector<std::vector<double>> coupling_distances(std::span<const RadialMap> maps, double T, double eps, long n,
                                                    std::uint64_t seed, std::uint64_t experiment_id, int threads) {
  if (maps.empty()) throw std::invalid_argument("coupling_distances: no maps");
  const int d = maps.front().dim();
  const RadialMap base_map = RadialMap::identity(d);
  std::vector<std::vector<double>> out(maps.size(), std::vector<double>(n));
  const auto n_blocks = static_cast<std::size_t>((n + kBlockPaths - 1) / kBlockPaths);
  parallel_blocks(n_blocks, threads, [&](std::size_t b) {
    const long lo = static_cast<long>(b) * kBlockPaths;
    const long hi = std::min(n, lo + kBlockPaths);
    for (long i = lo; i < hi; ++i) {
      RngStream rng(seed, experiment_id, static_cast<std::uint64_t>(i));
      const JumpPath base = sample_path(T, eps, base_map, rng);
      for (std::size_t k = 0; k < maps.size(); ++k) {
        const CoupledPair pair = transform_path(base, maps[k]);
        out[k][i] = sup_distance(pair.transformed, pair.base, T);
      }
    }
  });
  return out;
}

double marginal_density_slope_sup(double t, double m) {
  const ModelParams p{1, m};
  const double h = 1e-4 * t;
  double worst = 0.0;
  for (int i = 1; i <= 4000; ++i) {
    const double x = 10.0 * t * i / 4000.0;
    const double slope = (transition_kernel_radial(x + h, t, p) - transition_kernel_radial(std::abs(x - h), t, p)) / (2 * h);
    worst = std::max(worst, std::abs(slope));
  }
  return worst * 1.01;
}

}  // namespace rellevy
