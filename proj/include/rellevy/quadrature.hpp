#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace rellevy {

/// Adaptive Gauss-Kronrod (7/15) integration settings.
///
/// The scheme is global adaptive subdivision: the interval with the largest
/// error estimate is bisected until the summed estimate drops below
/// max(abs_tol, rel_tol * |integral|). No interval is split more than
/// max_depth times.
struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_depth = 40;
  int max_intervals = 4000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_depth < 1 || max_intervals < 1)
      throw std::invalid_argument("QuadratureSpec: need rel_tol > 0, abs_tol >= 0, max_depth >= 1");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Raised when the requested tolerance is not reached; carries the partial
/// estimate so callers can report it.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadratureResult partial)
      : std::runtime_error(what), partial_(partial) {}
  const QuadratureResult& partial() const noexcept { return partial_; }

 private:
  QuadratureResult partial_;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (and the centre).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  int depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod15(const F& f, double a, double b, int depth) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kKronrodNodes[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kronrod += kKronrodWeights[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1 + f2);
  }
  kronrod *= h;
  gauss *= h;
  return {a, b, kronrod, std::abs(kronrod - gauss), depth};
}

}  // namespace detail

/// Integrates f over the finite interval [a, b].
template <class F>
QuadratureResult integrate(const F& f, double a, double b, const QuadratureSpec& spec = {}) {
  spec.validate();
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::domain_error("integrate: interval end points must be finite");
  if (a == b) return {};
  std::priority_queue<detail::Panel> heap;
  auto first = detail::gauss_kronrod15(f, a, b, 0);
  double total = first.value;
  double total_err = first.error;
  int evals = 15;
  heap.push(first);
  bool depth_hit = false;
  while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    if (static_cast<int>(heap.size()) >= spec.max_intervals || depth_hit) {
      throw QuadratureError("integrate: tolerance not reached within subdivision limits",
                            {total, total_err, evals});
    }
    auto worst = heap.top();
    heap.pop();
    if (worst.depth >= spec.max_depth) {
      depth_hit = true;
      heap.push(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gauss_kronrod15(f, worst.a, mid, worst.depth + 1);
    auto right = detail::gauss_kronrod15(f, mid, worst.b, worst.depth + 1);
    evals += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    // Re-sum occasionally so the running total does not drift.
    if (evals % 3000 == 0) {
      auto copy = heap;
      total = 0.0;
      total_err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        total_err += copy.top().error;
        copy.pop();
      }
    }
  }
  return {total, total_err, evals};
}

/// Integrates f over [a, inf) through the map x = a + scale * s / (1 - s).
template <class F>
QuadratureResult integrate_to_infinity(const F& f, double a, const QuadratureSpec& spec = {},
                                       double scale = 1.0) {
  if (!(scale > 0.0)) throw std::domain_error("integrate_to_infinity: scale must be positive");
  auto g = [&](double s) {
    if (s >= 1.0) return 0.0;
    const double one_minus = 1.0 - s;
    const double x = a + scale * s / one_minus;
    if (!std::isfinite(x)) return 0.0;
    return f(x) * scale / (one_minus * one_minus);
  };
  return integrate(g, 0.0, 1.0, spec);
}

}  // namespace rellevy
