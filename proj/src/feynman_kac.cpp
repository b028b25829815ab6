#include "rellevy/feynman_kac.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rellevy/parallel.hpp"
#include "rellevy/rng.hpp"
#include "rellevy/stats.hpp"

namespace rellevy {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// f(s) = exp(-1 / (1 - s^2)) and its first two derivatives.
double profile(double s) { return s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

double profile_d1(double s) {
  if (s >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  return profile(s) * (-2.0 * s / (w * w));
}

double profile_d2(double s) {
  if (s >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  return profile(s) * (6.0 * s * s * s * s - 2.0) / (w * w * w * w);
}

struct ProfileMaxima {
  double d1 = 0.0;       // max |f'|
  double d2 = 0.0;       // max |f''|
  double d1_over_s = 0.0;  // max |f'(s) / s|
};

const ProfileMaxima& profile_maxima() {
  static const ProfileMaxima maxima = [] {
    ProfileMaxima m;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double s = static_cast<double>(i) / n;
      m.d1 = std::max(m.d1, std::abs(profile_d1(s)));
      m.d2 = std::max(m.d2, std::abs(profile_d2(s)));
      const double w = 1.0 - s * s;
      m.d1_over_s = std::max(m.d1_over_s, 2.0 * profile(s) / (w * w));
    }
    // Grid maxima of smooth functions; pad by a relative margin.
    m.d1 *= 1.0 + 1e-6;
    m.d2 *= 1.0 + 1e-6;
    m.d1_over_s *= 1.0 + 1e-6;
    return m;
  }();
  return maxima;
}

double dist_to_center(const BumpSpec& b, std::span<const double> x) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = b.center.empty() ? 0.0 : b.center[i];
    r2 += (x[i] - c) * (x[i] - c);
  }
  return std::sqrt(r2);
}

double center_norm(const BumpSpec& b) {
  double r2 = 0.0;
  for (double c : b.center) r2 += c * c;
  return std::sqrt(r2);
}

void check_bump(const BumpSpec& b, int d, const char* what) {
  if (!(b.radius > 0.0) || !std::isfinite(b.amplitude))
    throw std::invalid_argument(std::string(what) + ": bump needs a positive radius and finite amplitude");
  if (!b.center.empty() && static_cast<int>(b.center.size()) != d)
    throw std::invalid_argument(std::string(what) + ": bump center has the wrong dimension");
}

double hess_factor(int d) {
  const auto& pm = profile_maxima();
  return d > 1 ? std::max(pm.d2, pm.d1_over_s) : pm.d2;
}

struct PathWork {
  double Y_jumps = 0.0;
  double div_int = 0.0;
  double v_int = 0.0;
  std::array<double, kMaxDim> end{};
};

PathWork walk(const JumpPath& path, std::span<const double> x, const FieldSpec& fields, bool want_div) {
  const int d = fields.d;
  if (path.dim() != d || static_cast<int>(x.size()) != d)
    throw std::invalid_argument("action: dimension mismatch between path, point and fields");
  std::array<double, kMaxDim> pos{};
  std::array<double, kMaxDim> mid{};
  std::array<double, kMaxDim> a{};
  std::array<double, kMaxDim * kMaxDim> da{};
  std::copy(x.begin(), x.end(), pos.begin());
  const std::span<const double> pos_span(pos.data(), d);
  NeumaierSum Y, divs, vint;
  const bool has_A = fields.has_A();
  const bool has_V = fields.has_V();
  const double v_shift = fields.norms.v_inf;

  auto hold = [&](double dt) {
    if (dt <= 0.0) return;
    if (has_V) vint.add((fields.V(pos_span) - v_shift) * dt);
    if (want_div) {
      fields.DA(pos_span, std::span<double>(da.data(), d * d));
      double tr = 0.0;
      for (int k = 0; k < d; ++k) tr += da[k * d + k];
      divs.add(tr * dt);
    }
  };

  double prev = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double s = path.times[i];
    hold(s - prev);
    const double* y = path.jumps.data() + i * d;
    if (has_A) {
      for (int k = 0; k < d; ++k) mid[k] = pos[k] + 0.5 * y[k];
      fields.A(std::span<const double>(mid.data(), d), std::span<double>(a.data(), d));
      double dot = 0.0;
      for (int k = 0; k < d; ++k) dot += a[k] * y[k];
      Y.add(dot);
    }
    for (int k = 0; k < d; ++k) pos[k] += y[k];
    prev = s;
  }
  hold(path.horizon - prev);

  PathWork out;
  out.Y_jumps = Y.value();
  out.div_int = divs.value();
  out.v_int = vint.value();
  out.end = pos;
  return out;
}

double resolve_m2(const JumpPath& path, double second_moment) {
  return second_moment >= 0.0 ? second_moment : small_jump_second_moment(path.cutoff, path.params);
}

}  // namespace

double bump_value(const BumpSpec& b, std::span<const double> x) {
  return b.amplitude * profile(dist_to_center(b, x) / b.radius);
}

FieldSpec make_fields(const FieldConfig& cfg) {
  const int d = cfg.d;
  ModelParams{d, 0.0}.validate();
  FieldSpec f;
  f.d = d;
  const auto& pm = profile_maxima();
  const double peak = std::exp(-1.0);

  if (cfg.a.amplitude != 0.0) {
    check_bump(cfg.a, d, "make_fields(A)");
    if (cfg.a_axis < 0 || cfg.a_axis >= d) throw std::invalid_argument("make_fields: A axis out of range");
    const BumpSpec a = cfg.a;
    const int axis = cfg.a_axis;
    f.A = [a, axis](std::span<const double> x, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      out[axis] = bump_value(a, x);
    };
    f.DA = [a, axis, d](std::span<const double> x, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      const double r = dist_to_center(a, x);
      if (r == 0.0 || r >= a.radius) return;
      const double g = a.amplitude * profile_d1(r / a.radius) / (a.radius * r);
      for (int j = 0; j < d; ++j) out[axis * d + j] = g * (x[j] - (a.center.empty() ? 0.0 : a.center[j]));
    };
    f.norms.a_sup = std::abs(a.amplitude) * peak;
    f.norms.da_sup = std::abs(a.amplitude) * pm.d1 / a.radius;
    f.support_radius = std::max(f.support_radius, center_norm(a) + a.radius);
  }

  if (cfg.v.amplitude != 0.0) {
    check_bump(cfg.v, d, "make_fields(V)");
    const BumpSpec v = cfg.v;
    f.V = [v](std::span<const double> x) { return bump_value(v, x); };
    f.norms.v_sup = std::abs(v.amplitude) * peak;
    f.norms.v_inf = std::min(0.0, v.amplitude * peak);
    f.norms.v_grad_sup = std::abs(v.amplitude) * pm.d1 / v.radius;
    f.norms.v_hess_sup = std::abs(v.amplitude) * hess_factor(d) / (v.radius * v.radius);
    f.support_radius = std::max(f.support_radius, center_norm(v) + v.radius);
  }

  check_bump(cfg.g, d, "make_fields(g)");
  const BumpSpec g = cfg.g;
  if (cfg.g_kind == InitialKind::bump) {
    f.g = [g](std::span<const double> x) { return bump_value(g, x); };
    f.norms.g_sup = std::abs(g.amplitude) * peak;
    f.norms.g_grad_sup = std::abs(g.amplitude) * pm.d1 / g.radius;
    f.norms.g_hess_sup = std::abs(g.amplitude) * hess_factor(d) / (g.radius * g.radius);
  } else {
    f.g = [g](std::span<const double> x) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = g.center.empty() ? 0.0 : g.center[i];
        if (std::abs(x[i] - c) > g.radius) return 0.0;
      }
      return g.amplitude;
    };
    f.norms.g_sup = std::abs(g.amplitude);
    f.norms.g_grad_sup = kInf;
    f.norms.g_hess_sup = kInf;
  }
  return f;
}

double FieldSpec::jacobian_check(int n, std::uint64_t seed) const {
  if (!has_A()) return 0.0;
  RngStream rng(seed, 0x6a6163ULL, 0);
  const double box = std::max(support_radius, 1.0);
  const double h = 1e-5 * box;
  std::vector<double> x(d), xp(d), xm(d), ap(d), am(d), da(d * d);
  double worst = 0.0;
  for (int it = 0; it < n; ++it) {
    for (auto& c : x) c = box * (2.0 * rng.uniform() - 1.0);
    DA(x, da);
    for (int j = 0; j < d; ++j) {
      xp = x;
      xm = x;
      xp[j] += h;
      xm[j] -= h;
      A(xp, ap);
      A(xm, am);
      for (int i = 0; i < d; ++i) {
        const double fd = (ap[i] - am[i]) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - da[i * d + j]));
      }
    }
  }
  return norms.da_sup > 0.0 ? worst / norms.da_sup : worst;
}

FieldSpec FieldSpec::with_constant_shift(std::span<const double> c) const {
  if (static_cast<int>(c.size()) != d) throw std::invalid_argument("with_constant_shift: dimension mismatch");
  FieldSpec out = *this;
  const std::vector<double> shift(c.begin(), c.end());
  const VectorField base = A;
  out.A = [base, shift](std::span<const double> x, std::span<double> a) {
    if (base)
      base(x, a);
    else
      std::fill(a.begin(), a.end(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += shift[i];
  };
  if (!DA) out.DA = [](std::span<const double>, std::span<double> m) { std::fill(m.begin(), m.end(), 0.0); };
  double c2 = 0.0;
  for (double v : shift) c2 += v * v;
  out.norms.a_sup += std::sqrt(c2);
  return out;
}

ActionValue action(const JumpPath& path, std::span<const double> x, const FieldSpec& fields, bool correction,
                   double second_moment) {
  const bool want_div = correction && fields.has_A();
  const PathWork w = walk(path, x, fields, want_div);
  ActionValue v;
  v.Y = w.Y_jumps;
  if (want_div) v.Y += resolve_m2(path, second_moment) / (2.0 * fields.d) * w.div_int;
  v.VInt = w.v_int;
  return v;
}

ActionParts action_decomposition(const JumpPath& path, std::span<const double> x, const FieldSpec& fields,
                                 bool correction, double second_moment) {
  const bool want_div = correction && fields.has_A();
  const PathWork w = walk(path, x, fields, want_div);
  ActionParts parts;
  parts.S1 = w.Y_jumps;
  if (fields.has_A()) {
    const double m2 = resolve_m2(path, second_moment);
    parts.S2_budget = 0.5 * fields.norms.da_sup * path.horizon * m2;
    if (want_div) parts.S3 = m2 / (2.0 * fields.d) * w.div_int;
  }
  parts.S4 = w.v_int;
  return parts;
}

std::complex<double> path_integrand(const JumpPath& path, std::span<const double> x, const FieldSpec& fields,
                                    bool correction, double second_moment) {
  const bool want_div = correction && fields.has_A();
  const PathWork w = walk(path, x, fields, want_div);
  double Y = w.Y_jumps;
  if (want_div) Y += resolve_m2(path, second_moment) / (2.0 * fields.d) * w.div_int;
  const double gv = fields.g(std::span<const double>(w.end.data(), fields.d));
  if (gv == 0.0) return {0.0, 0.0};
  const double weight = std::exp(-w.v_int - path.horizon * fields.norms.v_inf) * gv;
  return {weight * std::cos(Y), -weight * std::sin(Y)};
}

namespace {

struct ComplexStats {
  RunningStats re, im;
  void add(std::complex<double> z) {
    re.add(z.real());
    im.add(z.imag());
  }
  void merge(const ComplexStats& o) {
    re.merge(o.re);
    im.merge(o.im);
  }
  MCEstimate estimate(std::uint64_t hash) const {
    MCEstimate e;
    e.mean = {re.mean, im.mean};
    e.stderr_re = re.stderr_mean();
    e.stderr_im = im.stderr_mean();
    e.n = re.n;
    e.config_hash = hash;
    return e;
  }
};

void check_options(const EstimateOptions& opts, double t, std::span<const std::vector<double>> xs, int d) {
  if (!(t > 0.0)) throw std::invalid_argument("estimate_u: t must be positive");
  if (opts.paths < 2) throw std::invalid_argument("estimate_u: need at least two paths");
  if (!(opts.eps > 0.0)) throw std::invalid_argument("estimate_u: eps must be positive");
  for (const auto& x : xs)
    if (static_cast<int>(x.size()) != d) throw std::invalid_argument("estimate_u: evaluation point has wrong dimension");
}

}  // namespace

std::vector<MCEstimate> estimate_u(std::span<const std::vector<double>> xs, double t, const FieldSpec& fields,
                                   const RadialMap& map, const EstimateOptions& opts) {
  check_options(opts, t, xs, fields.d);
  if (map.dim() != fields.d) throw std::invalid_argument("estimate_u: map dimension does not match fields");
  const std::size_t nx = xs.size();
  const double m2 = small_jump_second_moment(opts.eps, map.params());
  const auto n_blocks = static_cast<std::size_t>((opts.paths + kBlockPaths - 1) / kBlockPaths);
  std::vector<std::vector<ComplexStats>> blocks(n_blocks, std::vector<ComplexStats>(nx));

  parallel_blocks(n_blocks, opts.threads, [&](std::size_t b) {
    const long lo = static_cast<long>(b) * kBlockPaths;
    const long hi = std::min(opts.paths, lo + kBlockPaths);
    for (long p = lo; p < hi; ++p) {
      RngStream rng(opts.seed, opts.experiment_id, static_cast<std::uint64_t>(p));
      const JumpPath path = sample_path(t, opts.eps, map, rng);
      for (std::size_t i = 0; i < nx; ++i) blocks[b][i].add(path_integrand(path, xs[i], fields, opts.correction, m2));
    }
  });

  auto merged = pairwise_reduce(std::move(blocks), [](std::vector<ComplexStats>& a, const std::vector<ComplexStats>& o) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i].merge(o[i]);
  });
  std::vector<MCEstimate> out(nx);
  for (std::size_t i = 0; i < nx; ++i) out[i] = merged[i].estimate(opts.config_hash);
  return out;
}

CoupledEstimate estimate_u_coupled(std::span<const std::vector<double>> xs, double t, const FieldSpec& fields,
                                   std::span<const RadialMap> maps, const EstimateOptions& opts) {
  check_options(opts, t, xs, fields.d);
  if (maps.empty() || maps.back().mass() != 0.0)
    throw std::invalid_argument("estimate_u_coupled: the mass list must end with 0");
  for (std::size_t k = 0; k < maps.size(); ++k) {
    if (maps[k].dim() != fields.d) throw std::invalid_argument("estimate_u_coupled: map dimension mismatch");
    if (k > 0 && !(maps[k].mass() < maps[k - 1].mass()))
      throw std::invalid_argument("estimate_u_coupled: masses must be strictly decreasing");
  }
  const std::size_t nm = maps.size();
  const std::size_t nx = xs.size();
  const RadialMap base_map = RadialMap::identity(fields.d);
  std::vector<double> m2(nm);
  for (std::size_t k = 0; k < nm; ++k) {
    const double cut = maps[k].is_identity() ? opts.eps : maps[k].l_inverse(opts.eps);
    m2[k] = small_jump_second_moment(cut, maps[k].params());
  }

  struct Block {
    std::vector<ComplexStats> u, diff;  // [k * nx + i]
  };
  const auto n_blocks = static_cast<std::size_t>((opts.paths + kBlockPaths - 1) / kBlockPaths);
  std::vector<Block> blocks(n_blocks, Block{std::vector<ComplexStats>(nm * nx), std::vector<ComplexStats>(nm * nx)});

  parallel_blocks(n_blocks, opts.threads, [&](std::size_t b) {
    const long lo = static_cast<long>(b) * kBlockPaths;
    const long hi = std::min(opts.paths, lo + kBlockPaths);
    std::vector<std::complex<double>> vals(nm * nx);
    for (long p = lo; p < hi; ++p) {
      RngStream rng(opts.seed, opts.experiment_id, static_cast<std::uint64_t>(p));
      const JumpPath base = sample_path(t, opts.eps, base_map, rng);
      for (std::size_t k = 0; k < nm; ++k) {
        if (maps[k].is_identity()) {
          for (std::size_t i = 0; i < nx; ++i) vals[k * nx + i] = path_integrand(base, xs[i], fields, opts.correction, m2[k]);
        } else {
          const JumpPath moved = transform_path(base, maps[k]).transformed;
          for (std::size_t i = 0; i < nx; ++i) vals[k * nx + i] = path_integrand(moved, xs[i], fields, opts.correction, m2[k]);
        }
      }
      const std::size_t zero = (nm - 1) * nx;
      for (std::size_t k = 0; k < nm; ++k)
        for (std::size_t i = 0; i < nx; ++i) {
          blocks[b].u[k * nx + i].add(vals[k * nx + i]);
          blocks[b].diff[k * nx + i].add(vals[k * nx + i] - vals[zero + i]);
        }
    }
  });

  Block merged = pairwise_reduce(std::move(blocks), [](Block& a, const Block& o) {
    for (std::size_t i = 0; i < a.u.size(); ++i) {
      a.u[i].merge(o.u[i]);
      a.diff[i].merge(o.diff[i]);
    }
  });
  CoupledEstimate out;
  out.u.assign(nm, std::vector<MCEstimate>(nx));
  out.diff.assign(nm, std::vector<MCEstimate>(nx));
  for (std::size_t k = 0; k < nm; ++k) {
    out.masses.push_back(maps[k].mass());
    for (std::size_t i = 0; i < nx; ++i) {
      out.u[k][i] = merged.u[k * nx + i].estimate(opts.config_hash);
      out.diff[k][i] = merged.diff[k * nx + i].estimate(opts.config_hash);
    }
  }
  return out;
}

TruncationBudget truncation_budget(const FieldSpec& fields, const ModelParams& params, double eps, double t,
                                   bool correction, const QuadratureSpec& quad) {
  if (!(t > 0.0)) throw std::invalid_argument("truncation_budget: t must be positive");
  if (params.d != fields.d) throw std::invalid_argument("truncation_budget: dimension mismatch");
  const double m2 = small_jump_second_moment(eps, params, quad);
  const FieldNorms& n = fields.norms;
  const double shift = std::exp(-t * n.v_inf);
  auto prod = [](double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; };
  double h = n.g_hess_sup;
  h += 2.0 * t * prod(n.v_grad_sup, n.g_grad_sup);
  h += prod(t * t * n.v_grad_sup * n.v_grad_sup + t * n.v_hess_sup, n.g_sup);
  TruncationBudget b;
  b.path_term = 0.5 * t * m2 * h * shift;
  if (fields.has_A()) {
    b.phase_term = 0.5 * n.a_sup * n.a_sup * t * m2 * n.g_sup * shift;
    if (!correction) b.compensator_term = 0.5 * n.da_sup * t * m2 * n.g_sup * shift;
  }
  return b;
}

}  // namespace rellevy
