#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "angcorr/errors.hpp"
#include "angcorr/parallel.hpp"
#include "angcorr/quadrature.hpp"
#include "angcorr/types.hpp"
#include "angcorr/units.hpp"

// Two-point correlation of a field of equal disks with a radial temperature
// profile, evaluated in the flat-sky limit.  Angles are radians.

namespace angcorr {

/// Radial profile f(r) on [0, R]; zero outside the disk.
struct DiskProfile {
  std::function<double(double)> f;
  double R = 0.0;
  /// Radii where f itself jumps (quadrature splits there).
  std::vector<double> breakpoints;

  double operator()(double r) const {
    if (r < 0.0 || r > R) return 0.0;
    const double v = f(r);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("DiskProfile: f must be finite and >= 0 (r=" + std::to_string(r) + ")");
    }
    return v;
  }

  void validate() const {
    if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("DiskProfile: R must be > 0");
    if (!f) throw DomainError("DiskProfile: missing profile function");
  }

  static DiskProfile uniform(double R) { return {[](double) { return 1.0; }, R, {}}; }

  static DiskProfile exponential(double R, double scale) {
    if (!(scale > 0.0)) throw DomainError("DiskProfile: scale must be > 0");
    return {[scale](double r) { return std::exp(-r / scale); }, R, {}};
  }
};

/// Two-point correlation omega(theta) of the disk centers.
struct CenterCorrelation {
  enum class Kind { Poisson, HardCore, General };

  Kind kind = Kind::Poisson;
  /// HardCore: omega = -1 below this separation, 0 above.
  double exclusion = 0.0;
  /// General: omega(theta), with the separations where it jumps.
  std::function<double(double)> omega;
  std::vector<double> jumps;

  static CenterCorrelation poisson() { return {}; }

  static CenterCorrelation hard_core(double min_separation) {
    if (!(min_separation > 0.0)) throw DomainError("CenterCorrelation: exclusion distance must be > 0");
    return {Kind::HardCore, min_separation, {}, {}};
  }

  static CenterCorrelation general(std::function<double(double)> w, std::vector<double> jumps = {}) {
    if (!w) throw DomainError("CenterCorrelation: missing omega");
    return {Kind::General, 0.0, std::move(w), std::move(jumps)};
  }

  double operator()(double theta) const {
    switch (kind) {
      case Kind::Poisson: return 0.0;
      case Kind::HardCore: return theta < exclusion ? -1.0 : 0.0;
      case Kind::General: break;
    }
    const double w = omega(theta);
    if (!(w >= -1.0) || !std::isfinite(w)) {
      throw DomainError("CenterCorrelation: omega must be finite and >= -1 (theta=" + std::to_string(theta) + ")");
    }
    return w;
  }

  std::vector<double> discontinuities() const {
    if (kind == Kind::HardCore) return {exclusion};
    if (kind == Kind::General) return jumps;
    return {};
  }
};

/// At most two real roots of the distance constraint.
struct ThetaJRoots {
  std::array<double, 2> values{};
  int count = 0;

  const double* begin() const noexcept { return values.data(); }
  const double* end() const noexcept { return values.data() + count; }
};

/// Radii theta_j (from the center of the disk holding point j) at which a
/// point j at polar angle phi_j lies exactly theta away from point i.  Point i
/// sits at (theta_i, 0) in the frame of its own disk; the other disk's center
/// is at (theta_o, phi_o).  Roots outside [0, R] are dropped.
inline ThetaJRoots theta_j_roots(double theta, double theta_i, double phi_j, double theta_o, double phi_o,
                                 double R) {
  if (theta < 0.0 || theta_i < 0.0 || theta_o < 0.0) throw DomainError("theta_j_roots: angles must be >= 0");
  if (!(R > 0.0)) throw DomainError("theta_j_roots: R must be > 0");
  const double b = theta_o * std::cos(phi_o - phi_j) - theta_i * std::cos(phi_j);
  const double dx = theta_o * std::cos(phi_o) - theta_i;
  const double dy = theta_o * std::sin(phi_o);
  const double delta = b * b - (dx * dx + dy * dy) + theta * theta;
  ThetaJRoots out;
  if (delta < 0.0) return out;
  const double s = std::sqrt(delta);
  auto keep = [&](double r) {
    if (r >= 0.0 && r <= R) out.values[static_cast<std::size_t>(out.count++)] = r;
  };
  keep(-b + s);
  if (s > 0.0) keep(-b - s);
  return out;
}

struct Toy1Options {
  /// Relative tolerance of the outer (theta_i, u) integrals.
  double rel_tol = 1e-6;
  /// Relative tolerance of the ring and center-weight integrals.
  double inner_rel_tol = 1e-8;
  unsigned threads = 1;
};

namespace detail {

inline void add_if_inside(std::vector<double>& pts, double x, double lo, double hi) {
  if (x > lo && x < hi) pts.push_back(x);
}

template <class F>
double adaptive_sum(F&& f, std::span<const double> edges, double rel_tol) {
  quad::AdaptiveOptions opts;
  opts.rel_tol = rel_tol;
  return quad::integrate_adaptive(f, edges, opts).value;
}

}  // namespace detail

/// Ring integral: Int over the circle of radius theta around a point that lies
/// a distance d from a disk's center, of f at the crossing radius, in the
/// root/Jacobian form Int dphi_j sum_roots theta_j f(theta_j) theta / sqrt(Delta).
/// This equals theta * Int dpsi f(|x + theta e_psi|) over the ring.
inline double ring_integral(double theta, double d, const DiskProfile& profile, double rel_tol = 1e-8) {
  const double R = profile.R;
  if (theta <= 0.0) return 0.0;
  if (d == 0.0) return theta <= R ? two_pi * theta * profile(theta) : 0.0;
  if (theta > d + R || d > theta + R) return 0.0;

  const double diff2 = (d - theta) * (d + theta);  // product of the two roots
  // Integrand on phi in [0, pi]; symmetric about phi = 0 so the full circle is
  // twice this.  gap = theta - d sin(phi) is passed in so the caller can supply
  // it without cancellation near the tangent angle.
  auto contrib = [&](double phi, double gap) {
    const double dc = d * std::cos(phi);
    const double delta = gap * (theta + d * std::sin(phi));
    if (delta <= 0.0) return 0.0;
    const double s = std::sqrt(delta);
    // The smaller-magnitude root comes from the product to avoid cancellation.
    const double big = dc >= 0.0 ? dc + s : dc - s;
    const double small = big != 0.0 ? diff2 / big : 0.0;
    double sum = 0.0;
    for (const double r : {big, small}) {
      if (r >= 0.0 && r <= R) sum += r * profile(r);
    }
    return sum * theta / s;
  };

  double phi_max = pi;
  bool singular_end = false;
  if (theta < d) {
    phi_max = std::asin(theta / d);
    singular_end = true;
  }
  std::vector<double> pts;
  // Where a root crosses R (or a profile jump radius).
  std::vector<double> radii = profile.breakpoints;
  radii.push_back(R);
  for (double b : radii) {
    const double c = (b * b + d * d - theta * theta) / (2.0 * b * d);
    if (c > -1.0 && c < 1.0) detail::add_if_inside(pts, std::acos(c), 0.0, phi_max);
  }
  if (theta >= d) detail::add_if_inside(pts, 0.5 * pi, 0.0, phi_max);
  const auto edges = quad::segment_edges(0.0, phi_max, pts);

  // On the last segment [a, b] of the singular case, phi = b - w v^2 with
  // v = (b - t) / w turns the 1/sqrt(Delta) end into a regular one
  // (dphi = 2 v dt), and theta - d sin(phi) = 2 d cos(b - e/2) sin(e/2), e = w v^2.
  const double sing_a = edges[edges.size() - 2];
  const double w = phi_max - sing_a;
  auto g = [&](double t) {
    if (singular_end && t > sing_a) {
      const double v = (phi_max - t) / w;
      const double e = w * v * v;
      const double gap = 2.0 * d * std::cos(phi_max - 0.5 * e) * std::sin(0.5 * e);
      return contrib(phi_max - e, gap) * 2.0 * v;
    }
    return contrib(t, theta - d * std::sin(t));
  };
  quad::AdaptiveOptions opts;
  opts.rel_tol = rel_tol;
  return 2.0 * quad::integrate_adaptive(g, edges, opts).value;
}

/// Same-disk term I_s(theta, theta_i).
inline double integrate_Is(double theta, double theta_i, const DiskProfile& profile, double rel_tol = 1e-8) {
  if (theta_i < 0.0 || theta_i > profile.R) throw DomainError("integrate_Is: theta_i must lie in [0, R]");
  if (theta > 2.0 * profile.R) return 0.0;
  return ring_integral(theta, theta_i, profile, rel_tol);
}

/// Other-disk term I_o(theta, theta_i) by the direct nested integral over the
/// other center's position (theta_o, phi_o) with weight
/// P(theta_o) = N_c / (4 pi) (1 + omega(theta_o)).  Accurate but slow; the
/// correlation itself uses other_disk_integral.
inline double integrate_Io(double theta, double theta_i, const DiskProfile& profile, const CenterCorrelation& omega,
                           double N_c, double rel_tol = 1e-6) {
  const double R = profile.R;
  if (theta_i < 0.0 || theta_i > R) throw DomainError("integrate_Io: theta_i must lie in [0, R]");
  if (!(N_c > 0.0)) throw DomainError("integrate_Io: N_c must be > 0");
  if (theta <= 0.0) return 0.0;
  const double density = N_c / four_pi;
  const double d_lo = std::max(0.0, theta - R);
  const double d_hi = theta + R;
  const double top = theta + theta_i + R;
  const double inner_tol = rel_tol * 1e-2;

  // d(theta_o, phi_o) is the distance from point i to the other center.
  auto over_phi = [&](double theta_o) {
    const double weight = density * (1.0 + omega(theta_o));
    if (weight == 0.0 || theta_o == 0.0) return 0.0;
    auto g = [&](double phi_o) {
      const double d2 = theta_i * theta_i + theta_o * theta_o - 2.0 * theta_i * theta_o * std::cos(phi_o);
      return ring_integral(theta, std::sqrt(std::max(0.0, d2)), profile, inner_tol);
    };
    std::vector<double> pts;
    if (theta_i > 0.0) {
      for (double dd : {d_lo, d_hi, R - theta}) {
        if (dd <= 0.0) continue;
        const double c = (theta_i * theta_i + theta_o * theta_o - dd * dd) / (2.0 * theta_i * theta_o);
        if (c > -1.0 && c < 1.0) detail::add_if_inside(pts, std::acos(c), 0.0, pi);
      }
    }
    const auto edges = quad::segment_edges(0.0, pi, pts);
    return 2.0 * weight * theta_o * detail::adaptive_sum(g, edges, inner_tol * 10.0);
  };

  std::vector<double> pts;
  for (double b : omega.discontinuities()) detail::add_if_inside(pts, b, 0.0, top);
  for (double dd : {d_lo, d_hi, R - theta}) {
    if (dd <= 0.0) continue;
    detail::add_if_inside(pts, theta_i + dd, 0.0, top);
    detail::add_if_inside(pts, std::abs(theta_i - dd), 0.0, top);
  }
  const auto edges = quad::segment_edges(0.0, top, pts);
  return detail::adaptive_sum(over_phi, edges, rel_tol);
}

/// Q(theta_i, u) = Int_0^{2 pi} dalpha P(|x_i + u e_alpha|): the center
/// weight integrated over the circle of radius u around point i.
inline double center_weight_ring(double theta_i, double u, const CenterCorrelation& omega, double N_c,
                                 double rel_tol = 1e-8) {
  const double density = N_c / four_pi;
  switch (omega.kind) {
    case CenterCorrelation::Kind::Poisson:
      return two_pi * density;
    case CenterCorrelation::Kind::HardCore: {
      const double b = omega.exclusion;
      if (theta_i * u == 0.0) return std::max(theta_i, u) >= b ? two_pi * density : 0.0;
      const double c = (b * b - theta_i * theta_i - u * u) / (2.0 * theta_i * u);
      return 2.0 * density * std::acos(std::clamp(c, -1.0, 1.0));
    }
    case CenterCorrelation::Kind::General:
      break;
  }
  if (theta_i * u == 0.0) return two_pi * density * (1.0 + omega(std::max(theta_i, u)));
  auto g = [&](double alpha) {
    const double r2 = theta_i * theta_i + u * u + 2.0 * theta_i * u * std::cos(alpha);
    return density * (1.0 + omega(std::sqrt(std::max(0.0, r2))));
  };
  std::vector<double> pts;
  for (double b : omega.jumps) {
    const double c = (b * b - theta_i * theta_i - u * u) / (2.0 * theta_i * u);
    if (c > -1.0 && c < 1.0) detail::add_if_inside(pts, std::acos(c), 0.0, pi);
  }
  const auto edges = quad::segment_edges(0.0, pi, pts);
  return 2.0 * detail::adaptive_sum(g, edges, rel_tol);
}

/// I_o(theta, theta_i) with the other center written as x_i + u: the angular
/// integrals separate into ring_integral(theta, u) * center_weight_ring(theta_i, u).
inline double other_disk_integral(double theta, double theta_i, const DiskProfile& profile,
                                  const CenterCorrelation& omega, double N_c, const Toy1Options& opts = {}) {
  const double R = profile.R;
  if (theta <= 0.0) return 0.0;
  const double lo = std::max(0.0, theta - R);
  const double hi = theta + R;
  std::vector<double> pts{std::abs(theta - R)};
  for (double b : omega.discontinuities()) {
    pts.push_back(std::abs(b - theta_i));
    pts.push_back(b + theta_i);
  }
  const auto edges = quad::segment_edges(lo, hi, pts);
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double q = center_weight_ring(theta_i, u, omega, N_c, opts.inner_rel_tol);
    if (q == 0.0) return 0.0;
    return u * q * ring_integral(theta, u, profile, opts.inner_rel_tol);
  };
  return detail::adaptive_sum(g, edges, opts.rel_tol);
}

/// F = Int over the disk of f.
inline double profile_flux(const DiskProfile& profile) {
  profile.validate();
  std::vector<double> edges{0.0};
  for (double b : profile.breakpoints) detail::add_if_inside(edges, b, 0.0, profile.R);
  const auto e = quad::segment_edges(0.0, profile.R, edges);
  auto g = [&](double r) { return two_pi * r * profile(r); };
  return detail::adaptive_sum(g, e, 1e-12);
}

/// (N_c F / 4 pi)^2: the large-separation limit of C for centers without
/// long-range correlation.
inline double uncorrelated_baseline(const DiskProfile& profile, double N_c) {
  const double m = N_c * profile_flux(profile) / four_pi;
  return m * m;
}

/// C(theta) = N_c / (4 pi 2 pi theta) * 2 pi Int_0^R dtheta_i theta_i f(theta_i) [I_s + I_o].
inline double correlation_toy1_at(double theta, const DiskProfile& profile, const CenterCorrelation& omega, double N_c,
                                  const Toy1Options& opts = {}) {
  profile.validate();
  if (!(N_c > 0.0)) throw DomainError("correlation_toy1: N_c must be > 0");
  if (!(theta > 0.0)) throw DomainError("correlation_toy1: theta must be > 0");
  const double R = profile.R;
  std::vector<double> pts{std::abs(R - theta)};
  for (double b : profile.breakpoints) pts.push_back(b);
  for (double b : omega.discontinuities()) {
    for (double s : {theta + R, std::abs(theta - R)}) {
      pts.push_back(std::abs(b - s));
      pts.push_back(b + s);
    }
  }
  const auto edges = quad::segment_edges(0.0, R, pts);
  auto g = [&](double ti) {
    if (ti <= 0.0) return 0.0;
    const double f = profile(ti);
    if (f == 0.0) return 0.0;
    const double is = theta <= 2.0 * R ? ring_integral(theta, ti, profile, opts.inner_rel_tol) : 0.0;
    const double io = other_disk_integral(theta, ti, profile, omega, N_c, opts);
    return ti * f * (is + io);
  };
  const double outer = detail::adaptive_sum(g, edges, opts.rel_tol);
  return N_c / (four_pi * two_pi * theta) * two_pi * outer;
}

inline TabulatedCorrelation correlation_toy1(std::span<const double> theta_grid, const DiskProfile& profile,
                                             const CenterCorrelation& omega, double N_c,
                                             const Toy1Options& opts = {}) {
  if (theta_grid.empty()) throw DomainError("correlation_toy1: empty theta grid");
  for (double t : theta_grid) {
    if (!(t > 0.0)) throw DomainError("correlation_toy1: theta grid must be > 0");
  }
  TabulatedCorrelation out;
  out.theta.assign(theta_grid.begin(), theta_grid.end());
  out.values.assign(theta_grid.size(), 0.0);
  parallel_for(theta_grid.size(), opts.threads,
               [&](std::size_t i) { out.values[i] = correlation_toy1_at(theta_grid[i], profile, omega, N_c, opts); });
  out.validate();
  return out;
}

/// Profile and center process of one of the four reference cases:
///   a  uniform disks, Poisson centers
///   b  uniform disks, hard-core centers (no overlaps)
///   c  uniform disks, omega = 2 exp(-theta/R) - 1
///   d  f = exp(-theta/R), omega as in c
struct Toy1Case {
  char label = 'a';
  DiskProfile profile;
  CenterCorrelation omega;
  double N_c = 1000.0;
};

inline Toy1Case toy1_case(char label, double R = deg_to_rad(1.0), double N_c = 1000.0) {
  if (!(R > 0.0)) throw DomainError("toy1_case: R must be > 0");
  if (!(N_c > 0.0)) throw DomainError("toy1_case: N_c must be > 0");
  auto clustered = CenterCorrelation::general([R](double t) { return 2.0 * std::exp(-t / R) - 1.0; });
  switch (label) {
    case 'a': return {label, DiskProfile::uniform(R), CenterCorrelation::poisson(), N_c};
    case 'b': return {label, DiskProfile::uniform(R), CenterCorrelation::hard_core(2.0 * R), N_c};
    case 'c': return {label, DiskProfile::uniform(R), clustered, N_c};
    case 'd': return {label, DiskProfile::exponential(R, R), clustered, N_c};
    default: break;
  }
  throw DomainError(std::string("unknown toy1 case '") + label + "' (expected a, b, c or d)");
}

}  // namespace angcorr
