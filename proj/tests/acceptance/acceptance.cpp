// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rellevy/experiments.hpp"
#include "rellevy/feynman_kac.hpp"
#include "rellevy/levy.hpp"
#include "rellevy/radial_map.hpp"
#include "rellevy/sampler.hpp"
#include "rellevy/specfun.hpp"
#include "rellevy/stats.hpp"

using namespace rellevy;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double time_limit;  // seconds
  std::function<Verdict()> body;
};

int g_threads = 1;
fs::path g_out;

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

using Table = std::vector<std::map<std::string, std::string>>;

Table read_csv(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  std::vector<std::string> head;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) head.push_back(cell);
  Table rows;
  while (std::getline(is, line)) {
    std::stringstream ls(line);
    std::map<std::string, std::string> row;
    std::size_t i = 0;
    for (std::string cell; std::getline(ls, cell, ',') && i < head.size(); ++i) row[head[i]] = cell;
    rows.push_back(row);
  }
  return rows;
}

double num(const std::map<std::string, std::string>& row, const std::string& key) { return std::stod(row.at(key)); }

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig base_config(ExperimentKind kind, const std::string& dir) {
  RunConfig c;
  c.kind = kind;
  c.threads = g_threads;
  c.out_dir = (g_out / dir).string();
  return c;
}

Verdict special_functions() {
  Verdict v;
  for (double nu : {0.1, 0.25, 0.49}) {
    const double bound = std::pow(2.0, nu - 1) * gamma_fn(nu);
    for (int i = 0; i < 200; ++i) {
      const double t = 1e-4 * std::pow(50.0 / 1e-4, i / 199.0);
      if (!(std::pow(t, nu) * bessel_k_scaled(nu, t) <= bound)) v.pass = false;
    }
  }
  double worst = 0.0;
  for (double x = 1e-4; x < 100.0; x *= 1.3) {
    const double k12 = std::sqrt(kPi / (2 * x)) * std::exp(-x);
    const double forms[] = {k12, k12 * (1 + 1 / x), k12 * (1 + 3 / x + 3 / (x * x)),
                            k12 * (1 + 6 / x + 15 / (x * x) + 15 / (x * x * x))};
    for (int n = 0; n < 4; ++n)
      if (forms[n] > 1e-300) worst = std::max(worst, rel(bessel_k(n + 0.5, x), forms[n]));
  }
  if (!(worst < 1e-12)) v.pass = false;
  v.detail = "half-integer max rel err " + fmt("%.2e", worst);
  return v;
}

Verdict lk_residual() {
  Verdict v;
  double worst = 0.0;
  for (int d : {1, 3})
    for (double m : {0.0, 0.5, 1.0})
      for (double k : {0.5, 1.0, 2.0, 5.0}) {
        std::vector<double> xi(d, 0.0);
        xi[0] = k;
        worst = std::max(worst, levy_khintchine_residual(xi, {d, m}));
      }
  v.pass = worst < 1e-6;
  v.detail = "max residual " + fmt("%.2e", worst);
  return v;
}

Verdict pushforward() {
  Verdict v;
  double worst = 0.0;
  for (int d : {1, 3})
    for (double m : {0.1, 1.0}) {
      const ModelParams p{d, m};
      const RadialMap map = RadialMap::build(p);
      const double c0 = sphere_area(d) * cauchy_constant(d);
      for (int i = 0; i < 20; ++i) {
        const double a = std::pow(10.0, -2.0 + 4.0 * i / 20.0);
        const double b = std::pow(10.0, -2.0 + 4.0 * (i + 1) / 20.0);
        QuadratureSpec q;
        q.rel_tol = 1e-12;
        const double direct =
            integrate([&](double r) { return sphere_area(d) * levy_density_radial(r, p) * std::pow(r, d - 1.0); }, a,
                      b, q)
                .value;
        const double pulled = c0 * std::exp(-map.log_l(a)) * -std::expm1(map.log_l(a) - map.log_l(b));
        worst = std::max(worst, std::abs(direct - pulled) / direct);
      }
    }
  v.pass = worst < 1e-6;
  v.detail = "max rel err " + fmt("%.2e", worst) + " over 80 annuli";
  return v;
}

Verdict radial_map_limit() {
  Verdict v;
  const std::vector<double> masses{1.0, 0.3, 0.1, 0.03, 0.01};
  std::vector<RadialMap> maps;
  for (double m : masses) maps.push_back(RadialMap::build({1, m}));
  bool increasing = true, above = true, ordered = true;
  for (const auto& map : maps) {
    const auto lv = map.log_values();
    const auto lr = map.log_radii();
    for (std::size_t i = 0; i < lv.size(); ++i) {
      if (i > 0 && !(lv[i] > lv[i - 1])) increasing = false;
      if (!(lv[i] > lr[i])) above = false;
    }
  }
  std::string ratios;
  bool close = true;
  for (double r : {0.1, 1.0, 10.0}) {
    for (std::size_t k = 1; k < maps.size(); ++k)
      if (!(maps[k].l(r) < maps[k - 1].l(r))) ordered = false;
    const double ratio = maps.back().l(r) / r - 1.0;
    if (!(ratio < 0.05)) close = false;
    ratios += " r=" + fmt("%g", r) + ":" + fmt("%.4f", ratio);
  }
  v.pass = increasing && above && ordered && close;
  v.detail = std::string(increasing ? "" : "not increasing; ") + (above ? "" : "l<=r somewhere; ") +
             (ordered ? "" : "not ordered in m; ") + "l_0.01(r)/r-1" + ratios;
  return v;
}

Verdict sampler_law() {
  Verdict v;
  const long n = 100000;
  auto cauchy = [](double x) { return 0.5 + std::atan(x) / kPi; };
  const double ks_path = ks_distance(sample_endpoints(RadialMap::identity(1), 1.0, 1e-3, n, 20240611, 1001, g_threads), cauchy);
  const double ks_sub = ks_distance(sample_increments({1, 0.0}, 1.0, n, 20240611, 1002, g_threads), cauchy);
  v.pass = ks_path < 0.015 && ks_sub < 0.015;
  v.detail = "KS path " + fmt("%.4f", ks_path) + ", subordination " + fmt("%.4f", ks_sub);
  return v;
}

Verdict weak_convergence_trend() {
  Verdict v;
  RunConfig c = base_config(ExperimentKind::weak_convergence, "weak_convergence");
  c.masses = {1.0, 0.3, 0.1, 0.03};
  const RunManifest man = run(c);
  const Table t = read_csv(fs::path(c.out_dir) / "weak_convergence.csv");
  std::vector<double> ks;
  for (const auto& row : t) ks.push_back(num(row, "ks"));
  bool dec = ks.size() == 4;
  for (std::size_t i = 1; i < ks.size(); ++i) dec = dec && ks[i] < ks[i - 1];
  v.pass = man.status == RunStatus::ok && dec && ks.back() < 0.02;
  v.detail = "KS";
  for (double k : ks) v.detail += " " + fmt("%.4f", k);
  return v;
}

Verdict moment_structure() {
  Verdict v;
  for (double m : {0.1, 1.0}) {
    const RadialMap map = RadialMap::build({1, m});
    const MomentCheck mc = moment_factorization(map, 0.75, 0.0, 0.5, 1.0, 1e-3, 100000, 20240611,
                                                static_cast<std::uint64_t>(1100 + 10 * m), g_threads);
    const double z = (mc.joint - mc.product()) / mc.joint_stderr;
    if (!(std::abs(z) <= 3.0)) v.pass = false;
    v.detail += "m=" + fmt("%g", m) + " joint " + fmt("%.5f", mc.joint) + " product " + fmt("%.5f", mc.product()) +
                " z " + fmt("%.2f", z) + "; ";
  }
  return v;
}

Verdict coupling_trend() {
  Verdict v;
  RunConfig c = base_config(ExperimentKind::couple_distance, "coupling");
  c.masses = {1.0, 0.3, 0.1, 0.03};
  c.paths = 1000;
  const RunManifest man = run(c);
  const Table t = read_csv(fs::path(c.out_dir) / "coupling.csv");
  std::vector<double> med;
  for (const auto& row : t) med.push_back(num(row, "median"));
  bool dec = med.size() == 4;
  for (std::size_t i = 1; i < med.size(); ++i) dec = dec && med[i] < med[i - 1];
  const double frac = med.back() / med.front();
  v.pass = man.status == RunStatus::ok && dec && frac < 0.25;
  v.detail = "medians";
  for (double x : med) v.detail += " " + fmt("%.4f", x);
  v.detail += ", last/first " + fmt("%.3f", frac);
  return v;
}

Verdict fk_oracle() {
  Verdict v;
  RunConfig c = base_config(ExperimentKind::fk_oracle, "fk_oracle");
  c.masses = {1.0, 0.0};
  c.a_amp = 0.0;
  c.x_points = 11;
  c.target = 1e-2;
  const RunManifest man = run(c);
  const Table t = read_csv(fs::path(c.out_dir) / "fk_oracle.csv");
  double worst = 0.0;
  for (const auto& row : t) {
    const double allowed = 3.0 * num(row, "stderr_re") + num(row, "trunc_budget");
    worst = std::max(worst, num(row, "abs_diff") / allowed);
  }
  v.pass = man.status == RunStatus::ok && t.size() == 22 && worst <= 1.0;
  v.detail = "eps " + fmt("%g", num(t.front(), "eps")) + ", budget " + fmt("%.2e", num(t.front(), "trunc_budget")) +
             ", max |MC-ref|/(3 stderr + budget) " + fmt("%.3f", worst);
  return v;
}

Verdict closed_form() {
  Verdict v;
  RunConfig c = base_config(ExperimentKind::fk_oracle, "closed_form");
  c.masses = {0.0};
  c.a_amp = 0.0;
  c.v_amp = 0.0;
  c.g_kind = "box";
  c.target = 0.0;
  c.x_points = 5;
  const RunManifest man = run(c);
  const Table t = read_csv(fs::path(c.out_dir) / "fk_oracle.csv");
  double worst = 0.0;
  for (const auto& row : t) worst = std::max(worst, num(row, "abs_diff") / (3.0 * num(row, "stderr_re")));
  v.pass = man.status == RunStatus::ok && t.size() == 5 && worst <= 1.0;
  v.detail = "max |MC-arctan|/(3 stderr) " + fmt("%.3f", worst);
  return v;
}

Verdict constant_gauge() {
  Verdict v;
  double worst = 0.0;
  for (int d : {1, 3}) {
    FieldConfig fc;
    fc.d = d;
    fc.a = {0.5, 1.0, {}};
    fc.v = {1.0, 1.0, {}};
    fc.g = {1.0, 1.5, {}};
    const FieldSpec f = make_fields(fc);
    std::vector<double> shift(d);
    for (int k = 0; k < d; ++k) shift[k] = 0.3 + 0.2 * k;
    const FieldSpec g = f.with_constant_shift(shift);
    const RadialMap map = RadialMap::build({d, 0.5});
    for (int i = 0; i < 1000; ++i) {
      RngStream rng(20240611, 1200 + d, i);
      const JumpPath p = sample_path(1.0, 1e-2, map, rng);
      std::vector<double> x(d);
      for (auto& xi : x) xi = 2.0 * rng.uniform() - 1.0;
      const auto end = p.endpoint();
      double cx = 0.0;
      for (int k = 0; k < d; ++k) cx += shift[k] * end[k];
      const auto expected = std::exp(std::complex<double>(0.0, -cx)) * path_integrand(p, x, f);
      const auto got = path_integrand(p, x, g);
      if (std::abs(expected) > 0.0) worst = std::max(worst, std::abs(got - expected) / std::abs(expected));
    }
  }
  v.pass = worst < 1e-12;
  v.detail = "max rel err " + fmt("%.2e", worst);
  return v;
}

Verdict semigroup_trend() {
  Verdict v;
  RunConfig c = base_config(ExperimentKind::sup_convergence, "semigroup");
  c.masses = {1.0, 0.3, 0.1, 0.0};
  const RunManifest man = run(c);
  const Table t = read_csv(fs::path(c.out_dir) / "sup_convergence.csv");
  std::vector<double> sup, l2;
  for (const auto& row : t)
    if (num(row, "m") > 0.0) {
      sup.push_back(num(row, "sup_diff"));
      l2.push_back(num(row, "l2_diff"));
      v.detail += "m=" + fmt("%g", num(row, "m")) + " sup " + fmt("%.4f", sup.back()) + "+-" +
                  fmt("%.4f", num(row, "sup_stderr")) + " L2 " + fmt("%.4f", l2.back()) + "+-" +
                  fmt("%.4f", num(row, "l2_stderr")) + "; ";
    }
  bool ok = sup.size() == 3;
  for (std::size_t i = 1; i < sup.size(); ++i) ok = ok && sup[i] < sup[i - 1] && l2[i] < l2[i - 1];
  v.pass = man.status == RunStatus::ok && ok && sup.back() < 0.5 * sup.front();
  return v;
}

Verdict determinism() {
  Verdict v;
  std::vector<RunConfig> configs;
  {
    RunConfig c = base_config(ExperimentKind::weak_convergence, "");
    c.paths = 20000;
    configs.push_back(c);
  }
  {
    RunConfig c = base_config(ExperimentKind::sup_convergence, "");
    c.paths = 4000;
    c.x_points = 11;
    configs.push_back(c);
  }
  {
    RunConfig c = base_config(ExperimentKind::fk_oracle, "");
    c.masses = {1.0, 0.0};
    c.a_amp = 0.0;
    c.paths = 4000;
    c.x_points = 5;
    configs.push_back(c);
  }
  {
    RunConfig c = base_config(ExperimentKind::couple_distance, "");
    c.masses = {1.0, 0.1};
    c.paths = 2000;
    configs.push_back(c);
  }
  int files = 0;
  for (RunConfig c : configs) {
    const std::string stem = "determinism_" + to_string(c.kind);
    c.threads = 1;
    c.out_dir = (g_out / (stem + "_t1")).string();
    run(c);
    RunConfig c4 = c;
    c4.threads = 4;
    c4.out_dir = (g_out / (stem + "_t4")).string();
    run(c4);
    for (const auto& e : fs::directory_iterator(c.out_dir)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      if (slurp(e.path()) != slurp(fs::path(c4.out_dir) / e.path().filename())) {
        v.pass = false;
        v.detail += e.path().filename().string() + " differs; ";
      }
    }
  }
  v.detail += std::to_string(files) + " CSV files compared at 1 vs 4 threads";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  g_out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "rellevy-acceptance";
  if (argc > 2) g_threads = std::max(1, std::atoi(argv[2]));
  fs::create_directories(g_out);

  const std::vector<Criterion> criteria = {
      {"special-functions", 1.0, special_functions},
      {"levy-khintchine", 30.0, lk_residual},
      {"pushforward", 30.0, pushforward},
      {"radial-map-limit", 60.0, radial_map_limit},
      {"sampler-law", 120.0, sampler_law},
      {"weak-convergence-trend", 300.0, weak_convergence_trend},
      {"increment-moments", 300.0, moment_structure},
      {"coupling-distance-trend", 300.0, coupling_trend},
      {"fk-oracle", 600.0, fk_oracle},
      {"closed-form", 120.0, closed_form},
      {"constant-gauge", 60.0, constant_gauge},
      {"semigroup-trend", 1800.0, semigroup_trend},
      {"determinism", 1e9, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.time_limit) {
      v.pass = false;
      v.detail += " (over the " + fmt("%g", c.time_limit) + " s limit)";
    }
    if (!v.pass) ++failed;
    std::printf("%s %-24s %8.2fs  %s\n", v.pass ? "PASS" : "FAIL", c.name.c_str(), secs, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
