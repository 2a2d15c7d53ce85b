#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "angcorr/errors.hpp"
#include "angcorr/units.hpp"

namespace angcorr {

/// What to do when a tabulated correlation is evaluated off its grid.
enum class Extrapolation {
  Error,       ///< throw ExtrapolationError
  ZeroBeyond,  ///< zero above the last node, first value held below the first node
};

/// C(theta) sampled on a strictly increasing grid of angles (radians).
struct TabulatedCorrelation {
  std::vector<double> theta;
  std::vector<double> values;
  std::optional<std::vector<double>> sigma;

  std::size_t size() const noexcept { return theta.size(); }

  void validate() const {
    if (theta.empty()) throw DomainError("TabulatedCorrelation: empty grid");
    if (values.size() != theta.size()) throw DomainError("TabulatedCorrelation: values/theta size mismatch");
    if (theta.front() < 0.0) throw DomainError("TabulatedCorrelation: theta must be >= 0");
    if (theta.back() > pi * (1.0 + 1e-12)) throw DomainError("TabulatedCorrelation: theta must be <= pi");
    for (std::size_t i = 1; i < theta.size(); ++i) {
      if (!(theta[i] > theta[i - 1])) throw DomainError("TabulatedCorrelation: theta grid not strictly increasing");
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw DomainError("TabulatedCorrelation: non-finite value");
    }
    if (sigma) {
      if (sigma->size() != theta.size()) throw DomainError("TabulatedCorrelation: sigma size mismatch");
      for (double s : *sigma) {
        if (!(s >= 0.0)) throw DomainError("TabulatedCorrelation: sigma must be >= 0");
      }
    }
  }

  /// True when the grid spans [0, pi] up to rounding of a degree round trip.
  bool covers_sphere() const noexcept {
    return !theta.empty() && theta.front() <= 1e-12 && theta.back() >= pi * (1.0 - 1e-12);
  }

  /// Local cubic (4-point Lagrange) interpolation.
  double interpolate(double t, Extrapolation policy = Extrapolation::Error) const {
    const std::size_t n = theta.size();
    const double tol = 1e-12 * std::max(1.0, std::abs(t));
    if (t < theta.front() - tol || t > theta.back() + tol) {
      if (policy == Extrapolation::Error) {
        throw ExtrapolationError("TabulatedCorrelation: theta=" + std::to_string(t) + " outside grid [" +
                                 std::to_string(theta.front()) + ", " + std::to_string(theta.back()) + "]");
      }
      return t > theta.back() ? 0.0 : values.front();
    }
    if (n == 1) return values.front();
    if (n < 4) {
      const auto hi = static_cast<std::size_t>(
          std::clamp<std::ptrdiff_t>(std::upper_bound(theta.begin(), theta.end(), t) - theta.begin(), 1,
                                     static_cast<std::ptrdiff_t>(n - 1)));
      const double u = (t - theta[hi - 1]) / (theta[hi] - theta[hi - 1]);
      return values[hi - 1] + u * (values[hi] - values[hi - 1]);
    }
    const auto upper = static_cast<std::ptrdiff_t>(std::upper_bound(theta.begin(), theta.end(), t) - theta.begin());
    const auto first = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(upper - 2, 0, static_cast<std::ptrdiff_t>(n - 4)));
    double sum = 0.0;
    for (std::size_t i = first; i < first + 4; ++i) {
      double basis = 1.0;
      for (std::size_t j = first; j < first + 4; ++j) {
        if (j != i) basis *= (t - theta[j]) / (theta[i] - theta[j]);
      }
      sum += basis * values[i];
    }
    return sum;
  }
};

enum class GridKind {
  Multipole,  ///< integer l >= 0
  Frequency,  ///< continuous k (small-angle identification k = l + 1/2)
};

/// C_l or P(k) sampled on a strictly increasing grid.
struct PowerSpectrum {
  GridKind kind = GridKind::Multipole;
  std::vector<double> grid;
  std::vector<double> values;

  std::size_t size() const noexcept { return grid.size(); }

  void validate() const {
    if (grid.size() != values.size()) throw DomainError("PowerSpectrum: grid/values size mismatch");
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (!(grid[i] > grid[i - 1])) throw DomainError("PowerSpectrum: grid not strictly increasing");
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw DomainError("PowerSpectrum: non-finite value");
    }
    if (kind == GridKind::Multipole) {
      for (double g : grid) {
        if (g < 0.0 || g != std::floor(g)) throw DomainError("PowerSpectrum: multipole grid must hold integers >= 0");
      }
    }
  }

  /// True when the grid is exactly l = 0, 1, ..., size()-1.
  bool is_contiguous_multipole() const noexcept {
    if (kind != GridKind::Multipole) return false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] != static_cast<double>(i)) return false;
    }
    return true;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  /// Values more negative than -rel_tol * max|value|.  Quadrature noise stays
  /// inside the tolerance; anything beyond it is a property of the input.
  bool negative_beyond_tolerance(double rel_tol = 1e-9) const noexcept {
    const double floor = -rel_tol * max_abs();
    return std::any_of(values.begin(), values.end(), [floor](double v) { return v < floor; });
  }
};

}  // namespace angcorr
