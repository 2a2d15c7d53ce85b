#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <span>
#include <vector>

#include "angcorr/errors.hpp"
#include "angcorr/units.hpp"

namespace angcorr::quad {

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

// Newton iteration in the angle variable t (x = cos t).  Working in t keeps
// 1 - x^2 = sin^2 t accurate for nodes crowding the endpoints at large n.
inline GaussRule compute_gauss_rule(std::size_t n) {
  GaussRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const auto nd = static_cast<double>(n);
  for (std::size_t k = 0; k < (n + 1) / 2; ++k) {
    double t = pi * (static_cast<double>(k) + 0.75) / (nd + 0.5);
    double dp_dt = 0.0;
    bool polish = false;
    for (int iter = 0; iter < 50; ++iter) {
      const double x = std::cos(t);
      const double s = std::sin(t);
      double p_prev = 1.0;
      double p = x;
      for (std::size_t l = 2; l <= n; ++l) {
        const auto ld = static_cast<double>(l);
        const double p_next = ((2.0 * ld - 1.0) * x * p - (ld - 1.0) * p_prev) / ld;
        p_prev = p;
        p = p_next;
      }
      if (n == 1) {
        p_prev = 1.0;
        p = x;
      }
      // dP_n/dt = -sin t P_n'(x) = -n (P_{n-1} - x P_n) / sin t
      dp_dt = -nd * (p_prev - x * p) / s;
      const double step = p / dp_dt;
      t -= step;
      // One extra iteration once converged to polish the last bits.
      if (polish) break;
      if (std::abs(step) < 1e-11) polish = true;
    }
    const double x = std::cos(t);
    const double w = 2.0 / (dp_dt * dp_dt);
    // k counts from x = +1 downwards.
    rule.nodes[n - 1 - k] = x;
    rule.weights[n - 1 - k] = w;
    rule.nodes[k] = -x;
    rule.weights[k] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace detail

/// Cached Gauss-Legendre rule.  Safe to call concurrently; the returned
/// reference stays valid for the life of the process.
inline const GaussRule& gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("gauss_legendre: n must be positive");
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<const GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<const GaussRule>(detail::compute_gauss_rule(n))).first;
  }
  return *it->second;
}

template <class F>
double integrate_gauss(F&& f, double a, double b, std::size_t n) {
  const GaussRule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

/// Sorted, de-duplicated copy of `points` restricted to the open interval (a, b),
/// with a and b prepended/appended.
inline std::vector<double> segment_edges(double a, double b, std::span<const double> points) {
  std::vector<double> edges{a};
  std::vector<double> inner;
  for (double p : points) {
    if (p > a && p < b) inner.push_back(p);
  }
  std::sort(inner.begin(), inner.end());
  const double eps = 1e-14 * std::max(std::abs(a), std::abs(b));
  for (double p : inner) {
    if (p - edges.back() > eps) edges.push_back(p);
  }
  if (b - edges.back() > eps) {
    edges.push_back(b);
  } else {
    edges.back() = b;
  }
  if (edges.size() == 1) edges.push_back(b);
  return edges;
}

/// Gauss-Legendre with `n` nodes on every segment between consecutive `breaks`
/// inside [a, b].
template <class F>
double integrate_piecewise(F&& f, double a, double b, std::span<const double> breaks, std::size_t n) {
  const auto edges = segment_edges(a, b, breaks);
  double sum = 0.0;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) sum += integrate_gauss(f, edges[s], edges[s + 1], n);
  return sum;
}

struct AdaptiveOptions {
  double rel_tol = 1e-6;
  double abs_tol = 0.0;
  std::size_t max_intervals = 4000;
};

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
};

namespace detail {

struct Gk15 {
  double value;
  double error;
};

template <class F>
Gk15 gauss_kronrod_15(F& f, double a, double b) {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  const double fc = f(mid);
  double kron = fc * wgk[7];
  double gauss = fc * wg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * xgk[j];
    const double fsum = f(mid - dx) + f(mid + dx);
    kron += wgk[j] * fsum;
    if (j % 2 == 1) gauss += wg[j / 2] * fsum;
  }
  return {kron * half, std::abs((kron - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration over the union of the
/// segments between consecutive `edges`: the interval with the largest error
/// estimate is bisected until the total error estimate meets
/// max(abs_tol, rel_tol * |value|).  Integrable endpoint singularities are
/// resolved by repeated bisection toward them.
template <class F>
AdaptiveResult integrate_adaptive(F&& f, std::span<const double> edges, const AdaptiveOptions& opts = {}) {
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  AdaptiveResult result;
  std::priority_queue<Piece> pieces;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    if (!(edges[s + 1] > edges[s])) continue;
    auto first = detail::gauss_kronrod_15(f, edges[s], edges[s + 1]);
    pieces.push({edges[s], edges[s + 1], first.value, first.error});
    total += first.value;
    total_err += first.error;
  }
  if (pieces.empty()) return result;
  while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (pieces.size() >= opts.max_intervals) {
      throw ConvergenceError("integrate_adaptive: tolerance not reached", total, total_err, pieces.size());
    }
    Piece worst = pieces.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval can no longer be split in floating point; accept what we have.
      break;
    }
    pieces.pop();
    auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    pieces.push({worst.a, mid, left.value, left.error});
    pieces.push({mid, worst.b, right.value, right.error});
  }
  // Re-sum to shed accumulated rounding from the running updates.
  result.intervals = pieces.size();
  while (!pieces.empty()) {
    result.value += pieces.top().value;
    result.error += pieces.top().error;
    pieces.pop();
  }
  if (!std::isfinite(result.value)) throw EvaluationError("integrate_adaptive: non-finite integral");
  return result;
}

template <class F>
AdaptiveResult integrate_adaptive(F&& f, double a, double b, const AdaptiveOptions& opts = {}) {
  const std::array<double, 2> edges{a, b};
  return integrate_adaptive(f, std::span<const double>(edges), opts);
}

}  // namespace angcorr::quad
