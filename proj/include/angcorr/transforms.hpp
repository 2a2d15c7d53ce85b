#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "angcorr/errors.hpp"
#include "angcorr/parallel.hpp"
#include "angcorr/quadrature.hpp"
#include "angcorr/special.hpp"
#include "angcorr/types.hpp"
#include "angcorr/units.hpp"

namespace angcorr {

/// Anything evaluable as C(theta) for theta in [0, pi].
template <class C>
concept AngularFunction = requires(const C& c, double t) {
  { c(t) } -> std::convertible_to<double>;
};

/// An angular function that also reports where its derivatives jump.
template <class C>
concept HasBreakpoints = requires(const C& c) {
  { c.breakpoints() } -> std::convertible_to<std::vector<double>>;
};

struct TransformOptions {
  /// Gauss-Legendre nodes per smooth segment of [0, pi].
  std::size_t nodes = 4096;
  unsigned threads = 1;
  /// Only used for tabulated input.
  Extrapolation extrapolation = Extrapolation::Error;
};

namespace detail {

// Work is cut into a fixed number of chunks so that the reduction order, and
// therefore every bit of the result, is independent of the thread count.
inline constexpr std::size_t transform_chunks = 64;

struct WeightedNodes {
  std::vector<double> theta;
  std::vector<double> weight;  // quadrature weight times sin(theta)
};

inline WeightedNodes sphere_nodes(std::span<const double> breakpoints, std::size_t n) {
  const auto edges = quad::segment_edges(0.0, pi, breakpoints);
  const quad::GaussRule& rule = quad::gauss_legendre(n);
  WeightedNodes out;
  out.theta.reserve((edges.size() - 1) * n);
  out.weight.reserve((edges.size() - 1) * n);
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double half = 0.5 * (edges[s + 1] - edges[s]);
    const double mid = 0.5 * (edges[s + 1] + edges[s]);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = mid + half * rule.nodes[i];
      out.theta.push_back(t);
      out.weight.push_back(half * rule.weights[i] * std::sin(t));
    }
  }
  return out;
}

template <class C>
std::vector<double> breakpoints_of(const C& corr) {
  if constexpr (HasBreakpoints<C>) {
    return corr.breakpoints();
  } else {
    return {};
  }
}

template <class F>
std::vector<double> sample(const F& corr, std::span<const double> theta) {
  std::vector<double> values(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    values[i] = corr(theta[i]);
    if (!std::isfinite(values[i])) {
      throw EvaluationError("non-finite correlation value at theta=" + std::to_string(theta[i]));
    }
  }
  return values;
}

inline std::vector<double> tabulated_breakpoints(const TabulatedCorrelation& corr, Extrapolation policy) {
  if (policy == Extrapolation::Error) return {};
  return {corr.theta.front(), corr.theta.back()};
}

inline void check_coverage(const TabulatedCorrelation& corr, Extrapolation policy) {
  corr.validate();
  if (policy == Extrapolation::Error && !corr.covers_sphere()) {
    throw ExtrapolationError(
        "tabulated correlation must cover [0, 180] deg for the exact transform "
        "(or allow zero extrapolation beyond the grid)");
  }
}

}  // namespace detail

/// C_l = 2 pi Int_0^pi C(theta) P_l(cos theta) sin(theta) dtheta for l = 0..ell_max.
/// The interval is split at every reported breakpoint and each piece gets its
/// own Gauss-Legendre rule.
template <AngularFunction C>
PowerSpectrum legendre_coefficients(const C& corr, int ell_max, const TransformOptions& opts = {}) {
  if (ell_max < 0) throw DomainError("legendre_coefficients: ell_max must be >= 0");
  const auto bps = detail::breakpoints_of(corr);
  const auto nodes = detail::sphere_nodes(bps, opts.nodes);
  const auto values = detail::sample(corr, nodes.theta);
  const auto L = static_cast<std::size_t>(ell_max) + 1;
  const std::size_t n = nodes.theta.size();
  const std::size_t chunks = std::min(detail::transform_chunks, n);

  std::vector<std::vector<double>> partial(chunks, std::vector<double>(L, 0.0));
  parallel_for(chunks, opts.threads, [&](std::size_t c) {
    auto& acc = partial[c];
    const std::size_t begin = c * n / chunks;
    const std::size_t end = (c + 1) * n / chunks;
    for (std::size_t i = begin; i < end; ++i) {
      const double g = values[i] * nodes.weight[i];
      const double x = std::cos(nodes.theta[i]);
      double p_prev = 1.0;
      double p = x;
      acc[0] += g;
      if (L > 1) acc[1] += g * x;
      for (std::size_t l = 2; l < L; ++l) {
        const auto ld = static_cast<double>(l);
        const double p_next = ((2.0 * ld - 1.0) * x * p - (ld - 1.0) * p_prev) / ld;
        p_prev = p;
        p = p_next;
        acc[l] += g * p;
      }
    }
  });

  PowerSpectrum out;
  out.kind = GridKind::Multipole;
  out.grid.resize(L);
  out.values.assign(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) out.grid[l] = static_cast<double>(l);
  for (const auto& acc : partial) {
    for (std::size_t l = 0; l < L; ++l) out.values[l] += acc[l];
  }
  for (double& v : out.values) v *= two_pi;
  return out;
}

/// Tabulated input is interpolated (local cubic); it must cover [0, pi]
/// unless opts.extrapolation allows zero beyond the grid.
inline PowerSpectrum legendre_coefficients(const TabulatedCorrelation& corr, int ell_max,
                                           const TransformOptions& opts = {}) {
  detail::check_coverage(corr, opts.extrapolation);
  struct Interp {
    const TabulatedCorrelation& c;
    Extrapolation policy;
    std::vector<double> bps;
    double operator()(double t) const { return c.interpolate(t, policy); }
    std::vector<double> breakpoints() const { return bps; }
  } interp{corr, opts.extrapolation, detail::tabulated_breakpoints(corr, opts.extrapolation)};
  return legendre_coefficients(interp, ell_max, opts);
}

/// C(theta) = (1/4 pi) sum_l (2l+1) C_l P_l(cos theta) at a single angle.
inline double legendre_series(const PowerSpectrum& spec, double theta) {
  const double x = std::cos(theta);
  double sum = 0.0;
  double p_prev = 1.0;
  double p = x;
  for (std::size_t l = 0; l < spec.size(); ++l) {
    double pl;
    if (l == 0) {
      pl = 1.0;
    } else if (l == 1) {
      pl = x;
    } else {
      const auto ld = static_cast<double>(l);
      const double p_next = ((2.0 * ld - 1.0) * x * p - (ld - 1.0) * p_prev) / ld;
      p_prev = p;
      p = p_next;
      pl = p;
    }
    sum += (2.0 * static_cast<double>(l) + 1.0) * spec.values[l] * pl;
  }
  return sum / four_pi;
}

/// Functor view of a band-limited spectrum as C(theta).
struct LegendreSeries {
  const PowerSpectrum& spec;
  double operator()(double theta) const { return legendre_series(spec, theta); }
};

inline TabulatedCorrelation correlation_from_spectrum(const PowerSpectrum& spec, std::span<const double> theta_grid) {
  if (spec.size() == 0) throw DomainError("correlation_from_spectrum: empty spectrum");
  spec.validate();
  if (!spec.is_contiguous_multipole()) {
    throw DomainError("correlation_from_spectrum: spectrum must be given on l = 0, 1, ..., l_max");
  }
  TabulatedCorrelation out;
  out.theta.assign(theta_grid.begin(), theta_grid.end());
  out.values.reserve(theta_grid.size());
  for (double t : theta_grid) out.values.push_back(legendre_series(spec, t));
  out.validate();
  return out;
}

/// Flat-sky (Hankel) approximation P(k) = 2 pi Int C(theta) J0(k theta) sin(theta) dtheta.
/// Only meaningful when C is negligible beyond a few degrees; see
/// small_angle_tail_fraction.
template <AngularFunction C>
PowerSpectrum small_angle_spectrum(const C& corr, std::span<const double> k_grid, const TransformOptions& opts = {}) {
  const auto bps = detail::breakpoints_of(corr);
  const auto nodes = detail::sphere_nodes(bps, opts.nodes);
  const auto values = detail::sample(corr, nodes.theta);
  PowerSpectrum out;
  out.kind = GridKind::Frequency;
  out.grid.assign(k_grid.begin(), k_grid.end());
  out.values.assign(k_grid.size(), 0.0);
  parallel_for(k_grid.size(), opts.threads, [&](std::size_t j) {
    const double k = k_grid[j];
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum += values[i] * nodes.weight[i] * special::bessel_j0(k * nodes.theta[i]);
    }
    out.values[j] = two_pi * sum;
  });
  return out;
}

inline PowerSpectrum small_angle_spectrum(const TabulatedCorrelation& corr, std::span<const double> k_grid,
                                          const TransformOptions& opts = {}) {
  detail::check_coverage(corr, opts.extrapolation);
  struct Interp {
    const TabulatedCorrelation& c;
    Extrapolation policy;
    std::vector<double> bps;
    double operator()(double t) const { return c.interpolate(t, policy); }
    std::vector<double> breakpoints() const { return bps; }
  } interp{corr, opts.extrapolation, detail::tabulated_breakpoints(corr, opts.extrapolation)};
  return small_angle_spectrum(interp, k_grid, opts);
}

/// Fraction of Int |C| sin(theta) dtheta carried by theta > theta_cut.
template <AngularFunction C>
double small_angle_tail_fraction(const C& corr, double theta_cut, std::size_t nodes = 4096) {
  auto bps = detail::breakpoints_of(corr);
  bps.push_back(theta_cut);
  const auto w = detail::sphere_nodes(bps, nodes);
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < w.theta.size(); ++i) {
    const double a = std::abs(corr(w.theta[i])) * w.weight[i];
    total += a;
    if (w.theta[i] > theta_cut) tail += a;
  }
  return total > 0.0 ? tail / total : 0.0;
}

/// Multipoles l = 0..ell_max identified with k = l + 1/2.
inline std::vector<double> multipole_frequencies(int ell_max) {
  std::vector<double> k(static_cast<std::size_t>(std::max(ell_max, -1) + 1));
  for (std::size_t l = 0; l < k.size(); ++l) k[l] = static_cast<double>(l) + 0.5;
  return k;
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw DomainError("log_spaced: need 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  return out;
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (n < 2) throw DomainError("linear_grid: n must be >= 2");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

// ---------------------------------------------------------------------------
// One-dimensional Fourier machinery
// ---------------------------------------------------------------------------

/// Location and order of a derivative discontinuity (order 0 = jump in value).
struct Discontinuity {
  int order = 0;
  double location = 0.0;
};

/// Real profile f(x) on [lo, hi], zero outside.
struct Profile1D {
  std::function<double(double)> evaluator;
  double lo = 0.0;
  double hi = 1.0;
  /// Interior points where f or a derivative jumps; quadrature panels split there.
  std::vector<double> breakpoints;
  std::optional<Discontinuity> discontinuity;

  double operator()(double x) const { return (x < lo || x > hi) ? 0.0 : evaluator(x); }
};

namespace profiles {

/// Height-1 box on [-R, R]; jump in value at |x| = R.
inline Profile1D box(double R) {
  if (!(R > 0.0)) throw DomainError("box: R must be > 0");
  return {[](double) { return 1.0; }, -R, R, {}, Discontinuity{0, R}};
}

/// 1 - |x|/x0 on [-x0, x0]; first derivative jumps at +-x0 (and at 0).
inline Profile1D triangle(double x0) {
  if (!(x0 > 0.0)) throw DomainError("triangle: x0 must be > 0");
  return {[x0](double x) { return 1.0 - std::abs(x) / x0; }, -x0, x0, {0.0}, Discontinuity{1, x0}};
}

/// Quadratic B-spline (three boxes of width 2 x0/3 convolved) on [-x0, x0];
/// C^1 with second-derivative jumps at the knots +-x0/3, +-x0.
inline Profile1D quadratic_bspline(double x0) {
  if (!(x0 > 0.0)) throw DomainError("quadratic_bspline: x0 must be > 0");
  const double w = 2.0 * x0 / 3.0;
  auto f = [x0, w](double x) {
    const double u = (x + x0) / w;
    if (u < 0.0 || u > 3.0) return 0.0;
    if (u < 1.0) return 0.5 * u * u;
    if (u < 2.0) return 0.5 * (-2.0 * u * u + 6.0 * u - 3.0);
    return 0.5 * (3.0 - u) * (3.0 - u);
  };
  return {f, -x0, x0, {-x0 / 3.0, x0 / 3.0}, Discontinuity{2, x0}};
}

}  // namespace profiles

struct FtOptions {
  std::size_t nodes_per_panel = 20;
  /// Largest k * panel_width; bounds the oscillations seen by one panel.
  double max_phase_per_panel = 2.0;
  /// Geometric refinement of the panels touching each segment end, where
  /// derivative singularities (e.g. sqrt edges) live.
  int grading_levels = 12;
  double grading_ratio = 0.15;
};

namespace detail {

inline void graded_panels(double a, double b, bool grade_left, bool grade_right, const FtOptions& opts,
                          std::vector<std::pair<double, double>>& out) {
  if (!grade_left && !grade_right) {
    out.emplace_back(a, b);
    return;
  }
  if (grade_left && grade_right) {
    const double m = 0.5 * (a + b);
    graded_panels(a, m, true, false, opts, out);
    graded_panels(m, b, false, true, opts, out);
    return;
  }
  const double h = b - a;
  std::vector<double> cuts;
  double frac = 1.0;
  for (int l = 0; l < opts.grading_levels; ++l) {
    frac *= opts.grading_ratio;
    cuts.push_back(frac);
  }
  // cuts are fractions of h measured from the graded end, decreasing.
  if (grade_left) {
    double prev = a;
    for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) {
      const double x = a + *it * h;
      out.emplace_back(prev, x);
      prev = x;
    }
    out.emplace_back(prev, b);
  } else {
    double prev = a;
    for (double c : cuts) {
      const double x = b - c * h;
      out.emplace_back(prev, x);
      prev = x;
    }
    out.emplace_back(prev, b);
  }
}

}  // namespace detail

/// f~(k) = Int f(x) exp(-i k x) dx by composite Gauss-Legendre quadrature on
/// panels split at the profile breakpoints, sized to the largest requested k
/// and graded toward every segment end.
inline std::vector<std::complex<double>> ft_1d(const Profile1D& profile, std::span<const double> k_grid,
                                               const FtOptions& opts = {}) {
  if (!(profile.hi > profile.lo)) throw DomainError("ft_1d: empty support");
  double k_max = 0.0;
  for (double k : k_grid) k_max = std::max(k_max, std::abs(k));

  const auto edges = quad::segment_edges(profile.lo, profile.hi, profile.breakpoints);
  std::vector<std::pair<double, double>> panels;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double a = edges[s];
    const double b = edges[s + 1];
    const auto m = static_cast<std::size_t>(
        std::max(2.0, std::ceil(k_max * (b - a) / opts.max_phase_per_panel)));
    const double h = (b - a) / static_cast<double>(m);
    for (std::size_t p = 0; p < m; ++p) {
      const double pa = a + h * static_cast<double>(p);
      const double pb = p + 1 == m ? b : a + h * static_cast<double>(p + 1);
      detail::graded_panels(pa, pb, p == 0, p + 1 == m, opts, panels);
    }
  }

  const quad::GaussRule& rule = quad::gauss_legendre(opts.nodes_per_panel);
  std::vector<double> xs;
  std::vector<double> fw;
  xs.reserve(panels.size() * rule.size());
  fw.reserve(panels.size() * rule.size());
  for (const auto& [a, b] : panels) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double x = mid + half * rule.nodes[i];
      const double v = profile.evaluator(x);
      if (!std::isfinite(v)) throw EvaluationError("ft_1d: non-finite profile value");
      xs.push_back(x);
      fw.push_back(v * half * rule.weights[i]);
    }
  }

  std::vector<std::complex<double>> out(k_grid.size());
  for (std::size_t j = 0; j < k_grid.size(); ++j) {
    const double k = k_grid[j];
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      re += fw[i] * std::cos(k * xs[i]);
      im -= fw[i] * std::sin(k * xs[i]);
    }
    out[j] = {re, im};
  }
  return out;
}

/// |f~(k)| as a frequency-grid spectrum, for envelope analysis.
inline PowerSpectrum ft_magnitude(const Profile1D& profile, std::span<const double> k_grid, const FtOptions& opts = {}) {
  const auto ft = ft_1d(profile, k_grid, opts);
  PowerSpectrum out;
  out.kind = GridKind::Frequency;
  out.grid.assign(k_grid.begin(), k_grid.end());
  out.values.reserve(ft.size());
  for (const auto& z : ft) out.values.push_back(std::abs(z));
  return out;
}

/// Fourier transform of the unit-integral d-ball of radius R, as a function of
/// |k|: sin(x)/x, 2 J1(x)/x, 3 (sin x - x cos x)/x^3 with x = kR; 1 at k = 0.
inline double spherical_box_ft(int d, double R, double k) {
  if (d < 1 || d > 3) throw DomainError("spherical_box_ft: d must be 1, 2 or 3");
  if (!(R > 0.0)) throw DomainError("spherical_box_ft: R must be > 0");
  if (!(k >= 0.0)) throw DomainError("spherical_box_ft: k must be >= 0");
  const double x = k * R;
  const double x2 = x * x;
  switch (d) {
    case 1:
      return x < 1e-4 ? 1.0 - x2 / 6.0 : std::sin(x) / x;
    case 2:
      return x < 1e-4 ? 1.0 - x2 / 8.0 : 2.0 * special::bessel_j1(x) / x;
    default:
      // sin x - x cos x cancels catastrophically for small x.
      if (x < 0.05) return 1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0;
      return 3.0 * (std::sin(x) - x * std::cos(x)) / (x2 * x);
  }
}

}  // namespace angcorr
