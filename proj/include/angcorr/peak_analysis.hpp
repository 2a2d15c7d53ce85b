#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "angcorr/errors.hpp"
#include "angcorr/types.hpp"
#include "angcorr/units.hpp"

namespace angcorr {

struct Peak {
  double location = 0.0;
  double height = 0.0;
  double prominence = 0.0;
};

struct PeakOptions {
  /// Centered moving-average width in samples (1 disables smoothing).
  int smoothing_window = 5;
  /// Minimum prominence as a fraction of (max - min) of the smoothed spectrum.
  double prominence_frac = 0.01;
  /// Verdict threshold on 1 - dispersion / mean spacing.
  double regularity_threshold = 0.5;
  int min_peaks = 3;
};

struct QuasiPeriod {
  double mean = 0.0;
  double dispersion = 0.0;
};

struct EnvelopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  std::size_t n_peaks = 0;
};

struct OscillationVerdict {
  bool detected = false;
  double score = 0.0;
  double regularity = 0.0;
  std::size_t n_peaks = 0;
};

struct PeakReport {
  std::vector<Peak> peaks;
  std::optional<QuasiPeriod> quasi_period;
  std::optional<EnvelopeFit> envelope;
  OscillationVerdict verdict;
};

/// Centered moving average; the window shrinks symmetrically near the ends.
inline std::vector<double> moving_average(const std::vector<double>& y, int window) {
  if (window < 1) throw DomainError("moving_average: window must be >= 1");
  const auto n = static_cast<std::ptrdiff_t>(y.size());
  const std::ptrdiff_t half = window / 2;
  std::vector<double> out(y.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
    double sum = 0.0;
    for (std::ptrdiff_t j = i - h; j <= i + h; ++j) sum += y[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(2 * h + 1);
  }
  return out;
}

/// D_l = l (l + 1) C_l / (2 pi) for a multipole spectrum.
inline PowerSpectrum band_power(const PowerSpectrum& spec) {
  if (spec.kind != GridKind::Multipole) throw DomainError("band_power: needs a multipole spectrum");
  PowerSpectrum out = spec;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= out.grid[i] * (out.grid[i] + 1.0) / two_pi;
  return out;
}

/// Local maxima of the smoothed spectrum whose prominence clears the
/// threshold, refined by a parabola through the three samples around each.
/// Endpoints never count; peaks with non-positive height are dropped.
inline std::vector<Peak> find_peaks(const PowerSpectrum& spec, const PeakOptions& opts = {}) {
  spec.validate();
  if (spec.size() < 16) throw DomainError("find_peaks: spectrum needs at least 16 points");
  const auto& x = spec.grid;
  const auto y = moving_average(spec.values, opts.smoothing_window);
  const std::size_t n = y.size();
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double range = *hi_it - *lo_it;
  const double threshold = opts.prominence_frac * range;
  std::vector<Peak> peaks;
  if (!(range > 0.0)) return peaks;

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1])) continue;
    // Plateaus: the peak is the last sample before the descent.
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 >= n || !(y[j + 1] < y[i])) {
      i = j;
      continue;
    }
    // Prominence: descend on each side until the signal rises above the peak.
    double left_min = y[i];
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] > y[i]) break;
      left_min = std::min(left_min, y[k]);
    }
    double right_min = y[i];
    for (std::size_t k = j + 1; k < n; ++k) {
      if (y[k] > y[i]) break;
      right_min = std::min(right_min, y[k]);
    }
    const double prominence = y[i] - std::max(left_min, right_min);
    if (prominence >= threshold && prominence > 0.0) {
      double loc = x[i];
      double height = y[i];
      if (j == i) {
        // Vertex of the parabola through (x[i-1..i+1], y[i-1..i+1]).
        const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
        const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
        const double d01 = (y1 - y0) / (x1 - x0);
        const double d12 = (y2 - y1) / (x2 - x1);
        const double a = (d12 - d01) / (x2 - x0);
        if (a < 0.0) {
          const double b = d01 - a * (x0 + x1);
          const double v = -b / (2.0 * a);
          if (v > x0 && v < x2) {
            loc = v;
            height = y0 + (v - x0) * (d01 + a * (v - x1));
          }
        }
      } else {
        loc = 0.5 * (x[i] + x[j]);
      }
      if (height > 0.0) peaks.push_back({loc, height, prominence});
    }
    i = j;
  }
  return peaks;
}

/// Mean and standard deviation of consecutive peak spacings.
inline QuasiPeriod quasi_period(const std::vector<Peak>& peaks) {
  if (peaks.size() < 3) {
    throw InsufficientPeaksError("quasi_period: need at least 3 peaks, got " + std::to_string(peaks.size()));
  }
  std::vector<double> gaps;
  for (std::size_t i = 1; i < peaks.size(); ++i) gaps.push_back(peaks[i].location - peaks[i - 1].location);
  double mean = 0.0;
  for (double g : gaps) mean += g;
  mean /= static_cast<double>(gaps.size());
  double ss = 0.0;
  for (double g : gaps) ss += (g - mean) * (g - mean);
  return {mean, std::sqrt(ss / static_cast<double>(gaps.size() - 1))};
}

/// Least-squares slope of log(height) against log(location) for the peaks in
/// [k_lo, k_hi].  By default the window starts at 3x the first peak.
inline EnvelopeFit envelope_decay_exponent(const std::vector<Peak>& peaks, std::optional<double> k_lo = std::nullopt,
                                           std::optional<double> k_hi = std::nullopt) {
  if (peaks.empty()) throw InsufficientPeaksError("envelope_decay_exponent: no peaks");
  const double lo = k_lo.value_or(3.0 * peaks.front().location);
  const double hi = k_hi.value_or(std::numeric_limits<double>::infinity());
  std::vector<double> lx;
  std::vector<double> ly;
  for (const Peak& p : peaks) {
    if (p.location >= lo && p.location <= hi && p.location > 0.0 && p.height > 0.0) {
      lx.push_back(std::log(p.location));
      ly.push_back(std::log(p.height));
    }
  }
  if (lx.size() < 4) {
    throw InsufficientPeaksError("envelope_decay_exponent: need at least 4 peaks in the fit window, got " +
                                 std::to_string(lx.size()));
  }
  const auto n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientPeaksError("envelope_decay_exponent: degenerate peak locations");
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (my + slope * (lx[i] - mx));
    ssr += r * r;
  }
  return {slope, std::sqrt(ssr / (n - 2.0) / sxx), lx.size()};
}

inline OscillationVerdict oscillation_verdict(const std::vector<Peak>& peaks, const PeakOptions& opts = {}) {
  OscillationVerdict v;
  v.n_peaks = peaks.size();
  if (peaks.size() >= 3) {
    const auto qp = quasi_period(peaks);
    v.regularity = qp.mean > 0.0 ? std::max(0.0, 1.0 - qp.dispersion / qp.mean) : 0.0;
  }
  v.score = static_cast<double>(v.n_peaks) * v.regularity;
  v.detected = v.n_peaks >= static_cast<std::size_t>(std::max(opts.min_peaks, 3)) &&
               v.regularity >= opts.regularity_threshold;
  return v;
}

/// Score = (number of peaks) x regularity; detected when there are at least
/// three peaks and regularity >= the threshold.
inline OscillationVerdict oscillation_score(const PowerSpectrum& spec, const PeakOptions& opts = {}) {
  return oscillation_verdict(find_peaks(spec, opts), opts);
}

/// Everything at once; statistics that need more peaks are left empty.
inline PeakReport analyze_peaks(const PowerSpectrum& spec, const PeakOptions& opts = {}) {
  PeakReport report;
  report.peaks = find_peaks(spec, opts);
  if (report.peaks.size() >= 3) report.quasi_period = quasi_period(report.peaks);
  try {
    report.envelope = envelope_decay_exponent(report.peaks);
  } catch (const InsufficientPeaksError&) {
  }
  report.verdict = oscillation_verdict(report.peaks, opts);
  return report;
}

}  // namespace angcorr
