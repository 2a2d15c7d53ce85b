#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "angcorr/units.hpp"

namespace angcorr::special {

/// P_l(x) by the three-term upward recurrence.
inline double legendre_p(int l, double x) noexcept {
  if (l == 0) return 1.0;
  double p_prev = 1.0;
  double p = x;
  for (int k = 2; k <= l; ++k) {
    const double p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
    p_prev = p;
    p = p_next;
  }
  return p;
}

/// Fills out[l] = P_l(x) for l = 0 .. out.size()-1.
inline void legendre_table(double x, std::span<double> out) noexcept {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = x;
  for (std::size_t l = 2; l < out.size(); ++l) {
    const auto ld = static_cast<double>(l);
    out[l] = ((2.0 * ld - 1.0) * x * out[l - 1] - (ld - 1.0) * out[l - 2]) / ld;
  }
}

namespace detail {

// Below this argument the power series is summed directly (worst-case
// cancellation ~1e-12); above it the Hankel asymptotic expansion is used,
// whose smallest term is ~exp(-2x).
inline constexpr double bessel_split = 12.0;

inline double bessel_series(int order, double x) noexcept {
  const double half = 0.5 * x;
  const double q = -half * half;
  double term = 1.0;
  for (int k = 1; k <= order; ++k) term *= half / k;
  double sum = term;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<double>(m) * (m + order));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

inline double bessel_asymptotic(int order, double x) noexcept {
  const double mu = 4.0 * order * order;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (8.0 * k * x);
    if (std::abs(next) > std::abs(last)) break;  // series starts diverging
    term = next;
    last = next;
    // k odd -> Q, k even -> P; signs alternate in pairs
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      default: p += term; break;
    }
    if (std::abs(term) < 1e-17) break;
  }
  const double chi = x - (0.5 * order + 0.25) * pi;
  return std::sqrt(2.0 / (pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

/// Bessel function of the first kind, order 0.
inline double bessel_j0(double x) noexcept {
  const double ax = std::abs(x);
  return ax < detail::bessel_split ? detail::bessel_series(0, ax) : detail::bessel_asymptotic(0, ax);
}

/// Bessel function of the first kind, order 1.
inline double bessel_j1(double x) noexcept {
  const double ax = std::abs(x);
  const double v = ax < detail::bessel_split ? detail::bessel_series(1, ax) : detail::bessel_asymptotic(1, ax);
  return x < 0.0 ? -v : v;
}

}  // namespace angcorr::special
