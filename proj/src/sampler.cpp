#include "rellevy/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rellevy/stats.hpp"

namespace rellevy {
namespace {

void random_direction(int d, RngStream& rng, double* out) {
  for (;;) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      out[i] = rng.normal();
      s += out[i] * out[i];
    }
    if (s > 0.0) {
      const double inv = 1.0 / std::sqrt(s);
      for (int i = 0; i < d; ++i) out[i] *= inv;
      return;
    }
  }
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> parse_list(const std::string& field) {
  std::vector<double> out;
  std::istringstream in(field);
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw std::runtime_error("read_path_dump: malformed number list");
  return out;
}

}  // namespace

std::vector<double> JumpPath::position(double t) const {
  const int d = params.d;
  std::vector<NeumaierSum> acc(d);
  for (std::size_t i = 0; i < times.size() && times[i] <= t; ++i)
    for (int k = 0; k < d; ++k) acc[k].add(jumps[i * d + k]);
  std::vector<double> x(d);
  for (int k = 0; k < d; ++k) x[k] = acc[k].value();
  return x;
}

void JumpPath::validate() const {
  params.validate();
  if (!(horizon > 0.0) || !(cutoff > 0.0)) throw std::logic_error("JumpPath: horizon and cutoff must be positive");
  if (jumps.size() != times.size() * static_cast<std::size_t>(params.d))
    throw std::logic_error("JumpPath: jump storage does not match the number of times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0 && times[i] <= horizon)) throw std::logic_error("JumpPath: jump time outside (0, T]");
    if (i > 0 && !(times[i] > times[i - 1])) throw std::logic_error("JumpPath: jump times not strictly increasing");
    double r2 = 0.0;
    for (double c : jump(i)) r2 += c * c;
    if (std::sqrt(r2) < cutoff) throw std::logic_error("JumpPath: retained jump below the cutoff");
  }
}

JumpPath sample_path(double T, double eps, const RadialMap& map, RngStream& rng) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("sample_path: horizon must be positive");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("sample_path: cutoff must be positive");
  const int d = map.dim();
  JumpPath path;
  path.params = map.params();
  path.horizon = T;
  path.cutoff = eps;

  // n^0(|z| >= a) = c0 / a, and z = a / U has exactly that normalized tail.
  const double base_cut = map.is_identity() ? eps : map.l(eps);
  const double c0 = sphere_area(d) * cauchy_constant(d);
  const long n = rng.poisson(T * c0 / base_cut);

  path.times.resize(n);
  for (auto& s : path.times) s = T * (1.0 - rng.uniform());
  std::sort(path.times.begin(), path.times.end());

  path.jumps.resize(static_cast<std::size_t>(n) * d);
  for (long i = 0; i < n; ++i) {
    const double z = base_cut / rng.uniform();
    const double r = map.is_identity() ? z : std::max(eps, map.l_inverse(z));
    double* y = path.jumps.data() + i * d;
    random_direction(d, rng, y);
    for (int k = 0; k < d; ++k) y[k] *= r;
  }
  return path;
}

CoupledPair transform_path(const JumpPath& base, const RadialMap& map) {
  if (base.params.m != 0.0) throw std::invalid_argument("transform_path: base path must be sampled at m = 0");
  if (base.dim() != map.dim()) throw std::invalid_argument("transform_path: dimension mismatch");
  CoupledPair pair;
  pair.base = base;
  pair.mass = map.mass();
  JumpPath& out = pair.transformed;
  out.params = map.params();
  out.horizon = base.horizon;
  out.times = base.times;
  out.jumps.resize(base.jumps.size());
  if (map.is_identity()) {
    out.cutoff = base.cutoff;
    out.jumps = base.jumps;
    return pair;
  }
  out.cutoff = map.l_inverse(base.cutoff);
  const int d = base.dim();
  for (std::size_t i = 0; i < base.size(); ++i)
    map.phi(base.jump(i), std::span<double>(out.jumps.data() + i * d, d));
  return pair;
}

double sup_distance(const JumpPath& a, const JumpPath& b, double T) {
  if (a.dim() != b.dim()) throw std::invalid_argument("sup_distance: dimension mismatch");
  if (a.horizon < T || b.horizon < T) throw std::invalid_argument("sup_distance: paths shorter than T");
  const int d = a.dim();
  std::vector<double> diff(d, 0.0);
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  for (;;) {
    const double ta = i < a.size() ? a.times[i] : INFINITY;
    const double tb = j < b.size() ? b.times[j] : INFINITY;
    const double t = std::min(ta, tb);
    if (!(t <= T)) break;
    while (i < a.size() && a.times[i] == t) {
      for (int k = 0; k < d; ++k) diff[k] += a.jumps[i * d + k];
      ++i;
    }
    while (j < b.size() && b.times[j] == t) {
      for (int k = 0; k < d; ++k) diff[k] -= b.jumps[j * d + k];
      ++j;
    }
    double s = 0.0;
    for (double c : diff) s += c * c;
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

std::vector<double> sample_increment(double t, const ModelParams& params, RngStream& rng) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("sample_increment: t must be positive");
  params.validate();
  double s;
  if (params.m == 0.0) {
    // Levy law with E e^{-uS} = e^{-t sqrt(2u)}.
    const double z = rng.normal();
    s = t * t / (z * z);
  } else {
    // Inverse Gaussian(mu = t/m, lambda = t^2), Michael-Schucany-Haas.
    const double mu = t / params.m;
    const double lambda = t * t;
    const double nz = rng.normal();
    const double y = nz * nz;
    const double root = std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
    const double denom = mu * y + root;
    double x = denom > 0.0 ? 4.0 * mu * mu * lambda * y / (denom * denom) : mu;
    if (!(x > 0.0)) x = mu;
    s = rng.uniform() <= mu / (mu + x) ? x : mu * mu / x;
  }
  std::vector<double> out(params.d);
  const double scale = std::sqrt(s);
  for (auto& v : out) v = scale * rng.normal();
  return out;
}

double truncation_char_residual(std::span<const double> xi, double eps, const ModelParams& params,
                                const QuadratureSpec& quad) {
  if (static_cast<int>(xi.size()) != params.d)
    throw std::invalid_argument("truncation_char_residual: vector length does not match dimension");
  if (!(eps > 0.0)) throw std::domain_error("truncation_char_residual: eps must be positive");
  double k2 = 0.0;
  for (double v : xi) k2 += v * v;
  return small_ball_char_integral(std::sqrt(k2), eps, params, quad);
}

void write_path_dump(std::ostream& os, std::span<const JumpPath> paths) {
  os << "path,d,mass,horizon,cutoff,n_jumps,times,jumps\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const JumpPath& path = paths[p];
    os << p << ',' << path.params.d << ',' << fmt(path.params.m) << ',' << fmt(path.horizon) << ','
       << fmt(path.cutoff) << ',' << path.size() << ',';
    for (std::size_t i = 0; i < path.times.size(); ++i) os << (i ? " " : "") << fmt(path.times[i]);
    os << ',';
    for (std::size_t i = 0; i < path.jumps.size(); ++i) os << (i ? " " : "") << fmt(path.jumps[i]);
    os << '\n';
  }
}

std::vector<JumpPath> read_path_dump(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "path,d,mass,horizon,cutoff,n_jumps,times,jumps")
    throw std::runtime_error("read_path_dump: missing or unexpected header");
  std::vector<JumpPath> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (line.back() == ',') fields.emplace_back();
    if (fields.size() != 8) throw std::runtime_error("read_path_dump: expected 8 fields per record");
    JumpPath path;
    path.params.d = std::stoi(fields[1]);
    path.params.m = std::stod(fields[2]);
    path.horizon = std::stod(fields[3]);
    path.cutoff = std::stod(fields[4]);
    const auto n = std::stoul(fields[5]);
    path.times = parse_list(fields[6]);
    path.jumps = parse_list(fields[7]);
    if (path.times.size() != n) throw std::runtime_error("read_path_dump: jump count does not match times");
    path.validate();
    out.push_back(std::move(path));
  }
  return out;
}

}  // namespace rellevy
