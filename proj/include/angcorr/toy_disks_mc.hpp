#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "angcorr/errors.hpp"
#include "angcorr/parallel.hpp"
#include "angcorr/types.hpp"
#include "angcorr/units.hpp"

// Monte Carlo disk fields on a flat square patch [0, L)^2 and their pair-count
// correlation estimate.  Lengths are radians.
//
// Disk points falling outside the patch are wrapped back in (torus), and the
// hard-core rule uses the torus metric, so each realization is a stationary
// field seen through the square window.  Pair separations are plain Euclidean
// distances inside the window; the analytic RR below accounts for the edges.

namespace angcorr {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Disk {
  Point2 center;
  double radius = 0.0;
};

enum class FieldKind {
  Disks,    ///< N_p points in each of N_c disks
  Uniform,  ///< N_c * N_p independent uniform points (estimator null test)
};

struct DiskEnsembleConfig {
  int N_c = 80;
  /// Disk radius; ignored when radius_range is set.
  double R = deg_to_rad(1.0);
  /// Radii drawn uniformly from [first, second] when present.
  std::optional<std::pair<double, double>> radius_range;
  int N_p = 100;
  double L_patch = 1.0;
  bool hard_core = false;
  int n_realizations = 50;
  std::uint64_t seed = 0;
  FieldKind field = FieldKind::Disks;
  int n_bins = 64;
  /// Upper edge of the last bin; 0 selects 4 * (largest radius).
  double theta_max = 0.0;
  /// Hard-core feasibility: N_c pi (2R)^2 < packing_limit L^2.
  double packing_limit = 1.6;
  /// Dart-throwing budget per disk.
  double max_attempts_per_disk = 1e6;

  double max_radius() const { return radius_range ? radius_range->second : R; }
  double resolved_theta_max() const { return theta_max > 0.0 ? theta_max : 4.0 * max_radius(); }

  void validate() const {
    if (N_c < 1) throw DomainError("DiskEnsembleConfig: N_c must be >= 1");
    if (N_p < 1) throw DomainError("DiskEnsembleConfig: N_p must be >= 1");
    if (n_realizations < 1) throw DomainError("DiskEnsembleConfig: n_realizations must be >= 1");
    if (n_bins < 1) throw DomainError("DiskEnsembleConfig: n_bins must be >= 1");
    if (!(L_patch > 0.0) || !std::isfinite(L_patch)) throw DomainError("DiskEnsembleConfig: L_patch must be > 0");
    if (radius_range) {
      const auto [lo, hi] = *radius_range;
      if (!(lo > 0.0) || !(hi > lo)) throw DomainError("DiskEnsembleConfig: radius range needs 0 < R_min < R_max");
    } else if (!(R > 0.0) || !std::isfinite(R)) {
      throw DomainError("DiskEnsembleConfig: R must be > 0");
    }
    if (!(2.0 * max_radius() < L_patch)) throw DomainError("DiskEnsembleConfig: disks must be smaller than the patch");
    if (!(resolved_theta_max() > 0.0) || !(resolved_theta_max() < 0.5 * L_patch)) {
      throw DomainError("DiskEnsembleConfig: bins must lie within (0, L_patch/2)");
    }
  }

  /// Throws PackingInfeasibleError when hard-core placement cannot work.
  void check_packing() const {
    if (!hard_core || field != FieldKind::Disks) return;
    const double r = max_radius();
    const double covered = static_cast<double>(N_c) * pi * 4.0 * r * r;
    if (!(covered < packing_limit * L_patch * L_patch)) {
      throw PackingInfeasibleError("hard-core packing infeasible: N_c pi (2R)^2 = " + std::to_string(covered) +
                                   " >= " + std::to_string(packing_limit) + " L^2");
    }
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Own conversion so the stream of doubles does not depend on the standard
// library's distribution implementation.
inline double uniform01(std::mt19937_64& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double wrap(double x, double L) noexcept {
  double r = std::fmod(x, L);
  if (r < 0.0) r += L;
  return r >= L ? 0.0 : r;
}

inline double torus_dist2(const Point2& a, const Point2& b, double L) noexcept {
  double dx = std::abs(a.x - b.x);
  double dy = std::abs(a.y - b.y);
  dx = std::min(dx, L - dx);
  dy = std::min(dy, L - dy);
  return dx * dx + dy * dy;
}

}  // namespace detail

/// Generator for realization `index` of a run seeded with `seed`.
inline std::mt19937_64 realization_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(detail::splitmix64(seed ^ index));
}

/// Disk centers (and radii) uniform in [0, L)^2; with hard_core, darts are
/// rejected until every pair is at least R_a + R_b apart.
inline std::vector<Disk> sample_centers(const DiskEnsembleConfig& config, std::mt19937_64& rng) {
  config.validate();
  config.check_packing();
  const double L = config.L_patch;
  auto draw_radius = [&] {
    if (!config.radius_range) return config.R;
    const auto [lo, hi] = *config.radius_range;
    return lo + (hi - lo) * detail::uniform01(rng);
  };
  std::vector<Disk> disks;
  disks.reserve(static_cast<std::size_t>(config.N_c));
  if (!config.hard_core) {
    for (int i = 0; i < config.N_c; ++i) {
      const double x = L * detail::uniform01(rng);
      const double y = L * detail::uniform01(rng);
      disks.push_back({{x, y}, draw_radius()});
    }
    return disks;
  }
  const auto budget = static_cast<std::uint64_t>(config.max_attempts_per_disk * config.N_c);
  std::uint64_t attempts = 0;
  while (disks.size() < static_cast<std::size_t>(config.N_c)) {
    if (attempts++ >= budget) {
      throw PackingInfeasibleError("hard-core placement gave up after " + std::to_string(budget) + " attempts with " +
                                   std::to_string(disks.size()) + " of " + std::to_string(config.N_c) + " disks");
    }
    const double x = L * detail::uniform01(rng);
    const double y = L * detail::uniform01(rng);
    const double r = draw_radius();
    const Point2 p{x, y};
    const bool clear = std::none_of(disks.begin(), disks.end(), [&](const Disk& d) {
      const double m = d.radius + r;
      return detail::torus_dist2(d.center, p, L) < m * m;
    });
    if (clear) disks.push_back({p, r});
  }
  return disks;
}

/// N_p area-uniform points inside each disk, wrapped into the patch.
inline std::vector<Point2> sample_disk_points(const std::vector<Disk>& disks, const DiskEnsembleConfig& config,
                                              std::mt19937_64& rng) {
  const double L = config.L_patch;
  std::vector<Point2> pts;
  pts.reserve(disks.size() * static_cast<std::size_t>(config.N_p));
  for (const Disk& d : disks) {
    for (int k = 0; k < config.N_p; ++k) {
      const double r = d.radius * std::sqrt(detail::uniform01(rng));
      const double a = two_pi * detail::uniform01(rng);
      pts.push_back({detail::wrap(d.center.x + r * std::cos(a), L), detail::wrap(d.center.y + r * std::sin(a), L)});
    }
  }
  return pts;
}

inline std::vector<Point2> sample_uniform_points(std::size_t n, double L, std::mt19937_64& rng) {
  std::vector<Point2> pts(n);
  for (auto& p : pts) {
    p.x = L * detail::uniform01(rng);
    p.y = L * detail::uniform01(rng);
  }
  return pts;
}

/// Linear bins (0, theta_max] as n + 1 edges.
inline std::vector<double> linear_bin_edges(double theta_max, int n) {
  if (!(theta_max > 0.0) || n < 1) throw DomainError("linear_bin_edges: need theta_max > 0 and n >= 1");
  std::vector<double> edges(static_cast<std::size_t>(n) + 1);
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = theta_max * static_cast<double>(i) / n;
  return edges;
}

/// P(|a - b| <= r) for a, b independent and uniform in an L x L square, r <= L.
inline double square_distance_cdf(double r, double L) {
  if (r <= 0.0) return 0.0;
  if (r > L) throw DomainError("square_distance_cdf: r must be <= L");
  const double s = r / L;
  return pi * s * s - (8.0 / 3.0) * s * s * s + 0.5 * s * s * s * s;
}

/// Unordered pair counts per bin (edges ascending, separations in (edges.front(), edges.back()]).
inline std::vector<std::uint64_t> count_pairs(const std::vector<Point2>& pts, const std::vector<double>& edges,
                                              double L) {
  const std::size_t nb = edges.size() - 1;
  std::vector<std::uint64_t> counts(nb, 0);
  const double rmax = edges.back();
  const double rmin = edges.front();
  const auto ncell = static_cast<std::size_t>(std::max(1.0, std::floor(L / rmax)));
  const double cell = L / static_cast<double>(ncell);
  std::vector<std::vector<std::uint32_t>> cells(ncell * ncell);
  auto cell_of = [&](double v) {
    return std::min(ncell - 1, static_cast<std::size_t>(std::max(0.0, v / cell)));
  };
  for (std::uint32_t i = 0; i < pts.size(); ++i) cells[cell_of(pts[i].y) * ncell + cell_of(pts[i].x)].push_back(i);

  const double rmax2 = rmax * rmax;
  const double width = (rmax - rmin) / static_cast<double>(nb);
  const bool uniform_bins = [&] {
    for (std::size_t b = 0; b <= nb; ++b) {
      if (std::abs(edges[b] - (rmin + width * static_cast<double>(b))) > 1e-12 * rmax) return false;
    }
    return true;
  }();
  auto bin_of = [&](double r) -> std::ptrdiff_t {
    if (r <= rmin || r > rmax) return -1;
    std::size_t b;
    if (uniform_bins) {
      b = std::min(nb - 1, static_cast<std::size_t>((r - rmin) / width));
      // Correct for rounding at the edges: bins are (lo, hi].
      while (b > 0 && r <= edges[b]) --b;
      while (b + 1 < nb && r > edges[b + 1]) ++b;
    } else {
      b = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), r) - edges.begin()) - 1;
    }
    return static_cast<std::ptrdiff_t>(b);
  };
  auto tally = [&](const Point2& a, const Point2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 > rmax2) return;
    const auto bin = bin_of(std::sqrt(d2));
    if (bin >= 0) ++counts[static_cast<std::size_t>(bin)];
  };
  for (std::size_t cy = 0; cy < ncell; ++cy) {
    for (std::size_t cx = 0; cx < ncell; ++cx) {
      const auto& here = cells[cy * ncell + cx];
      for (std::size_t i = 0; i < here.size(); ++i) {
        for (std::size_t j = i + 1; j < here.size(); ++j) tally(pts[here[i]], pts[here[j]]);
      }
      // Forward half of the neighbourhood so each unordered cell pair is seen once.
      static constexpr int offsets[4][2] = {{1, 0}, {-1, 1}, {0, 1}, {1, 1}};
      for (const auto& o : offsets) {
        const auto nx = static_cast<std::ptrdiff_t>(cx) + o[0];
        const auto ny = static_cast<std::ptrdiff_t>(cy) + o[1];
        if (nx < 0 || ny < 0 || nx >= static_cast<std::ptrdiff_t>(ncell) || ny >= static_cast<std::ptrdiff_t>(ncell)) {
          continue;
        }
        const auto& there = cells[static_cast<std::size_t>(ny) * ncell + static_cast<std::size_t>(nx)];
        for (auto i : here) {
          for (auto j : there) tally(pts[i], pts[j]);
        }
      }
    }
  }
  return counts;
}

/// Binned estimate and raw counts of one point set.
struct BinnedEstimate {
  std::vector<double> edges;
  std::vector<std::optional<double>> values;  ///< missing where DD = 0
  std::vector<std::uint64_t> pairs;
};

/// xi = DD / RR - 1 with RR the expected pair count of the same number of
/// uniform points in the square.
inline BinnedEstimate estimate_correlation(const std::vector<Point2>& pts, const std::vector<double>& edges,
                                           double L) {
  if (pts.size() < 2) throw DomainError("estimate_correlation: need at least 2 points");
  if (edges.size() < 2) throw DomainError("estimate_correlation: need at least one bin");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw DomainError("estimate_correlation: bin edges must increase");
  }
  if (edges.front() < 0.0 || !(edges.back() < 0.5 * L)) {
    throw DomainError("estimate_correlation: bins must lie within (0, L/2)");
  }
  BinnedEstimate out;
  out.edges = edges;
  out.pairs = count_pairs(pts, edges, L);
  const double n = static_cast<double>(pts.size());
  const double total_pairs = 0.5 * n * (n - 1.0);
  out.values.resize(out.pairs.size());
  for (std::size_t b = 0; b < out.pairs.size(); ++b) {
    if (out.pairs[b] == 0) continue;
    const double rr = total_pairs * (square_distance_cdf(edges[b + 1], L) - square_distance_cdf(edges[b], L));
    out.values[b] = static_cast<double>(out.pairs[b]) / rr - 1.0;
  }
  return out;
}

inline std::vector<Point2> sample_realization(const DiskEnsembleConfig& config, std::uint64_t index) {
  auto rng = realization_rng(config.seed, index);
  if (config.field == FieldKind::Uniform) {
    config.validate();
    return sample_uniform_points(static_cast<std::size_t>(config.N_c) * static_cast<std::size_t>(config.N_p),
                                 config.L_patch, rng);
  }
  const auto disks = sample_centers(config, rng);
  return sample_disk_points(disks, config, rng);
}

struct RealizationStats {
  std::vector<double> edges;
  std::vector<std::optional<double>> mean;
  /// Sample standard deviation across realizations; missing with < 2 values.
  std::vector<std::optional<double>> rms;
  /// rms / sqrt(count).
  std::vector<std::optional<double>> sem;
  std::vector<std::uint64_t> pairs;  ///< summed over realizations
  std::vector<std::vector<std::optional<double>>> per_realization;

  std::size_t n_bins() const noexcept { return edges.empty() ? 0 : edges.size() - 1; }
  double bin_center(std::size_t b) const { return 0.5 * (edges[b] + edges[b + 1]); }
};

/// Runs all realizations; realization i uses realization_rng(seed, i), and the
/// reduction is done in index order, so results do not depend on `threads`.
inline RealizationStats run_ensemble(const DiskEnsembleConfig& config, unsigned threads = 1) {
  config.validate();
  config.check_packing();
  const auto edges = linear_bin_edges(config.resolved_theta_max(), config.n_bins);
  const auto nr = static_cast<std::size_t>(config.n_realizations);
  std::vector<BinnedEstimate> results(nr);
  parallel_for(nr, threads, [&](std::size_t i) {
    results[i] = estimate_correlation(sample_realization(config, i), edges, config.L_patch);
  });

  RealizationStats stats;
  stats.edges = edges;
  const std::size_t nb = edges.size() - 1;
  stats.mean.resize(nb);
  stats.rms.resize(nb);
  stats.sem.resize(nb);
  stats.pairs.assign(nb, 0);
  stats.per_realization.reserve(nr);
  for (auto& r : results) {
    for (std::size_t b = 0; b < nb; ++b) stats.pairs[b] += r.pairs[b];
    stats.per_realization.push_back(std::move(r.values));
  }
  for (std::size_t b = 0; b < nb; ++b) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : stats.per_realization) {
      if (r[b]) {
        sum += *r[b];
        ++n;
      }
    }
    if (n == 0) continue;
    const double m = sum / static_cast<double>(n);
    stats.mean[b] = m;
    if (n < 2) continue;
    double ss = 0.0;
    for (const auto& r : stats.per_realization) {
      if (r[b]) ss += (*r[b] - m) * (*r[b] - m);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    stats.rms[b] = sd;
    stats.sem[b] = sd / std::sqrt(static_cast<double>(n));
  }
  return stats;
}

}  // namespace angcorr
