#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rellevy/experiments.hpp"
#include "rellevy/reference.hpp"
#include "rellevy/specfun.hpp"

namespace py = pybind11;
using namespace rellevy;

namespace {

py::array_t<double> jumps_array(const JumpPath& p) {
  py::array_t<double> out({static_cast<py::ssize_t>(p.size()), static_cast<py::ssize_t>(p.dim())});
  std::copy(p.jumps.begin(), p.jumps.end(), out.mutable_data());
  return out;
}

py::dict manifest_dict(const RunManifest& m) {
  py::dict d;
  auto json = py::module_::import("json");
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(m.config_hash));
  d["config_hash"] = std::string(hash);
  d["config"] = json.attr("loads")(m.config_json);
  d["library_version"] = m.version;
  d["wall_seconds"] = m.wall_seconds;
  d["status"] = m.status == RunStatus::ok ? "ok"
                : m.status == RunStatus::invariant_violation ? "invariant_violation"
                                                              : "numerical_failure";
  d["message"] = m.message;
  d["summary"] = json.attr("loads")(m.summary_json);
  d["files"] = m.files;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Relativistic Levy process sampler, Feynman-Kac estimator and reference solvers";
  mod.attr("__version__") = library_version();

  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);

  py::class_<ModelParams>(mod, "ModelParams")
      .def(py::init([](int d, double m) {
             ModelParams p{d, m};
             p.validate();
             return p;
           }),
           py::arg("d") = 1, py::arg("m") = 0.0)
      .def_readonly("d", &ModelParams::d)
      .def_readonly("m", &ModelParams::m)
      .def("__repr__", [](const ModelParams& p) {
        return "ModelParams(d=" + std::to_string(p.d) + ", m=" + std::to_string(p.m) + ")";
      });

  mod.def("bessel_k", &bessel_k, py::arg("nu"), py::arg("x"));
  mod.def("bessel_k_scaled", &bessel_k_scaled, py::arg("nu"), py::arg("x"));
  mod.def("gamma_fn", &gamma_fn, py::arg("x"));
  mod.def("sphere_area", &sphere_area, py::arg("d"));
  mod.def(
      "char_exponent", [](const std::vector<double>& xi, const ModelParams& p) { return char_exponent(xi, p); },
      py::arg("xi"), py::arg("params"));
  mod.def(
      "levy_density", [](const std::vector<double>& y, const ModelParams& p) { return levy_density(y, p); },
      py::arg("y"), py::arg("params"));
  mod.def(
      "transition_kernel",
      [](const std::vector<double>& y, double t, const ModelParams& p) { return transition_kernel(y, t, p); },
      py::arg("y"), py::arg("t"), py::arg("params"));
  mod.def(
      "tail_mass", [](double r, const ModelParams& p) { return tail_mass(r, p); }, py::arg("r"), py::arg("params"));
  mod.def(
      "small_jump_second_moment", [](double eps, const ModelParams& p) { return small_jump_second_moment(eps, p); },
      py::arg("eps"), py::arg("params"));
  mod.def(
      "levy_khintchine_residual",
      [](const std::vector<double>& xi, const ModelParams& p) { return levy_khintchine_residual(xi, p); },
      py::arg("xi"), py::arg("params"));
  mod.def(
      "kernel_cdf_1d", [](double x, double t, double m) { return kernel_cdf_1d(x, t, m); }, py::arg("x"),
      py::arg("t"), py::arg("m"));

  py::class_<RadialMap>(mod, "RadialMap")
      .def_static("identity", &RadialMap::identity, py::arg("d"))
      .def_static(
          "build",
          [](const ModelParams& p, double r_lo, double r_hi, int nodes) { return RadialMap::build(p, r_lo, r_hi, nodes); },
          py::arg("params"), py::arg("r_lo") = RadialMap::kDefaultRLo, py::arg("r_hi") = RadialMap::kDefaultRHi,
          py::arg("nodes") = RadialMap::kDefaultNodes)
      .def_property_readonly("params", &RadialMap::params)
      .def_property_readonly("mass", &RadialMap::mass)
      .def("l", &RadialMap::l, py::arg("r"))
      .def("log_l", &RadialMap::log_l, py::arg("r"))
      .def("l_inverse", &RadialMap::l_inverse, py::arg("z"))
      .def(
          "phi",
          [](const RadialMap& m, const std::vector<double>& z) {
            std::vector<double> out(z.size());
            m.phi(z, out);
            return out;
          },
          py::arg("z"))
      .def(
          "phi_inverse",
          [](const RadialMap& m, const std::vector<double>& z) {
            std::vector<double> out(z.size());
            m.phi_inverse(z, out);
            return out;
          },
          py::arg("z"))
      .def("dumps",
           [](const RadialMap& m) {
             std::ostringstream os;
             m.save(os);
             return os.str();
           })
      .def_static(
          "loads",
          [](const std::string& s) {
            std::istringstream is(s);
            return RadialMap::load(is);
          },
          py::arg("text"));

  py::class_<JumpPath>(mod, "JumpPath")
      .def_readonly("params", &JumpPath::params)
      .def_readonly("horizon", &JumpPath::horizon)
      .def_readonly("cutoff", &JumpPath::cutoff)
      .def_property_readonly("times",
                             [](const JumpPath& p) { return py::array_t<double>(p.times.size(), p.times.data()); })
      .def_property_readonly("jumps", &jumps_array)
      .def("position", &JumpPath::position, py::arg("t"))
      .def("endpoint", &JumpPath::endpoint)
      .def("validate", &JumpPath::validate)
      .def("__len__", &JumpPath::size);

  mod.def(
      "sample_path",
      [](double T, double eps, const RadialMap& map, std::uint64_t seed, std::uint64_t experiment_id,
         std::uint64_t path_index) {
        RngStream rng(seed, experiment_id, path_index);
        return sample_path(T, eps, map, rng);
      },
      py::arg("T"), py::arg("eps"), py::arg("map"), py::arg("seed") = 1, py::arg("experiment_id") = 0,
      py::arg("path_index") = 0);
  mod.def(
      "transform_path", [](const JumpPath& base, const RadialMap& map) { return transform_path(base, map).transformed; },
      py::arg("base"), py::arg("map"));
  mod.def("sup_distance", &sup_distance, py::arg("a"), py::arg("b"), py::arg("T"));
  mod.def(
      "sample_endpoints",
      [](const RadialMap& map, double t, double eps, long n, std::uint64_t seed, std::uint64_t experiment_id,
         int threads) {
        const auto v = sample_endpoints(map, t, eps, n, seed, experiment_id, threads);
        return py::array_t<double>(v.size(), v.data());
      },
      py::arg("map"), py::arg("t"), py::arg("eps"), py::arg("n"), py::arg("seed") = 1, py::arg("experiment_id") = 0,
      py::arg("threads") = 1);
  mod.def(
      "sample_increments",
      [](const ModelParams& p, double t, long n, std::uint64_t seed, std::uint64_t experiment_id, int threads) {
        const auto v = sample_increments(p, t, n, seed, experiment_id, threads);
        return py::array_t<double>(v.size(), v.data());
      },
      py::arg("params"), py::arg("t"), py::arg("n"), py::arg("seed") = 1, py::arg("experiment_id") = 0,
      py::arg("threads") = 1);
  mod.def(
      "dumps_paths",
      [](const std::vector<JumpPath>& paths) {
        std::ostringstream os;
        write_path_dump(os, paths);
        return os.str();
      },
      py::arg("paths"));
  mod.def(
      "loads_paths",
      [](const std::string& s) {
        std::istringstream is(s);
        return read_path_dump(is);
      },
      py::arg("text"));

  py::class_<FieldSpec>(mod, "FieldSpec")
      .def_readonly("d", &FieldSpec::d)
      .def("A",
           [](const FieldSpec& f, const std::vector<double>& x) {
             std::vector<double> out(x.size(), 0.0);
             if (f.has_A()) f.A(x, out);
             return out;
           })
      .def("V", [](const FieldSpec& f, const std::vector<double>& x) { return f.has_V() ? f.V(x) : 0.0; })
      .def("g", [](const FieldSpec& f, const std::vector<double>& x) { return f.g(x); })
      .def(
          "with_constant_shift",
          [](const FieldSpec& f, const std::vector<double>& c) { return f.with_constant_shift(c); }, py::arg("c"));
  mod.def(
      "make_fields",
      [](int d, double a_amp, double a_radius, double v_amp, double v_radius, const std::string& g_kind, double g_amp,
         double g_radius) {
        FieldConfig fc;
        fc.d = d;
        fc.a = {a_amp, a_radius, {}};
        fc.v = {v_amp, v_radius, {}};
        fc.g_kind = g_kind == "box" ? InitialKind::box : InitialKind::bump;
        fc.g = {g_amp, g_radius, {}};
        return make_fields(fc);
      },
      py::arg("d") = 1, py::arg("a_amp") = 0.0, py::arg("a_radius") = 1.0, py::arg("v_amp") = 0.0,
      py::arg("v_radius") = 1.0, py::arg("g_kind") = "bump", py::arg("g_amp") = 1.0, py::arg("g_radius") = 1.0);
  mod.def(
      "path_integrand",
      [](const JumpPath& p, const std::vector<double>& x, const FieldSpec& f, bool correction) {
        return path_integrand(p, x, f, correction);
      },
      py::arg("path"), py::arg("x"), py::arg("fields"), py::arg("correction") = true);
  mod.def(
      "estimate_u",
      [](const std::vector<std::vector<double>>& xs, double t, const FieldSpec& f, const RadialMap& map, double eps,
         long paths, std::uint64_t seed, int threads) {
        EstimateOptions o;
        o.eps = eps;
        o.paths = paths;
        o.seed = seed;
        o.threads = threads;
        py::list out;
        for (const auto& e : estimate_u(xs, t, f, map, o)) {
          py::dict d;
          d["mean"] = e.mean;
          d["stderr_re"] = e.stderr_re;
          d["stderr_im"] = e.stderr_im;
          d["n"] = e.n;
          out.append(d);
        }
        return out;
      },
      py::arg("xs"), py::arg("t"), py::arg("fields"), py::arg("map"), py::arg("eps") = 1e-3, py::arg("paths") = 10000,
      py::arg("seed") = 1, py::arg("threads") = 1);
  mod.def(
      "truncation_budget",
      [](const FieldSpec& f, const ModelParams& p, double eps, double t, bool correction) {
        const auto b = truncation_budget(f, p, eps, t, correction);
        py::dict d;
        d["path_term"] = b.path_term;
        d["phase_term"] = b.phase_term;
        d["compensator_term"] = b.compensator_term;
        d["total"] = b.total();
        return d;
      },
      py::arg("fields"), py::arg("params"), py::arg("eps"), py::arg("t"), py::arg("correction") = true);
  mod.def(
      "certify_epsilon",
      [](const FieldSpec& f, const ModelParams& p, double t, double target) {
        return certify_epsilon(f, p, t, target).eps;
      },
      py::arg("fields"), py::arg("params"), py::arg("t"), py::arg("target"));

  py::class_<Grid>(mod, "Grid")
      .def(py::init([](int d, double L, int N) {
             Grid g{d, L, N};
             g.validate();
             return g;
           }),
           py::arg("d") = 1, py::arg("L") = 20.0, py::arg("N") = 1024)
      .def_readonly("d", &Grid::d)
      .def_readonly("L", &Grid::L)
      .def_readonly("N", &Grid::N)
      .def_property_readonly("h", &Grid::h)
      .def("coords", [](const Grid& g) {
        std::vector<double> c(g.N);
        for (int j = 0; j < g.N; ++j) c[j] = g.coord(j);
        return c;
      });
  mod.def(
      "convolve_kernel",
      [](const std::vector<double>& g, double t, const ModelParams& p, const Grid& grid) {
        return convolve_kernel(g, t, p, grid);
      },
      py::arg("g"), py::arg("t"), py::arg("params"), py::arg("grid"));
  mod.def("split_step", &split_step, py::arg("g"), py::arg("t"), py::arg("n_steps"), py::arg("params"),
          py::arg("V"), py::arg("grid"));

  mod.def("experiment_names", &experiment_names);
  mod.def(
      "run",
      [](const std::string& kind, const std::string& out_dir, const py::dict& overrides) {
        RunConfig c;
        c.kind = parse_kind(kind);
        c.out_dir = out_dir;
        for (const auto& [k, v] : overrides) {
          const auto key = py::str(k).cast<std::string>();
          if (key == "dim") c.d = v.cast<int>();
          else if (key == "masses") c.masses = v.cast<std::vector<double>>();
          else if (key == "horizon") c.horizon = v.cast<double>();
          else if (key == "eps") c.eps = v.cast<double>();
          else if (key == "paths") c.paths = v.cast<long>();
          else if (key == "grid_n") c.grid_n = v.cast<int>();
          else if (key == "box_l") c.box_l = v.cast<double>();
          else if (key == "x_points") c.x_points = v.cast<int>();
          else if (key == "x_max") c.x_max = v.cast<double>();
          else if (key == "a_amp") c.a_amp = v.cast<double>();
          else if (key == "a_radius") c.a_radius = v.cast<double>();
          else if (key == "v_amp") c.v_amp = v.cast<double>();
          else if (key == "v_radius") c.v_radius = v.cast<double>();
          else if (key == "g_kind") c.g_kind = v.cast<std::string>();
          else if (key == "g_amp") c.g_amp = v.cast<double>();
          else if (key == "g_radius") c.g_radius = v.cast<double>();
          else if (key == "correction") c.correction = v.cast<bool>();
          else if (key == "target") c.target = v.cast<double>();
          else if (key == "split_steps") c.split_steps = v.cast<int>();
          else if (key == "beta") c.beta = v.cast<double>();
          else if (key == "seed") c.seed = v.cast<std::uint64_t>();
          else if (key == "threads") c.threads = v.cast<int>();
          else throw ConfigError("unknown config key '" + key + "'");
        }
        RunManifest m;
        {
          py::gil_scoped_release release;
          m = run(c);
        }
        return manifest_dict(m);
      },
      py::arg("kind"), py::arg("out_dir"), py::arg("config") = py::dict());
}
