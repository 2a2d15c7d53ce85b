#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "angcorr/corr_models.hpp"
#include "angcorr/quadrature.hpp"
#include "angcorr/special.hpp"
#include "angcorr/transforms.hpp"

using namespace angcorr;

namespace {

struct Constant {
  double operator()(double) const { return 1.0; }
};

struct P3 {
  double operator()(double t) const { return std::legendre(3, std::cos(t)); }
};

// Overlap area of two flat disks of radius R whose centers are t apart.
struct DiskOverlap {
  double R;
  double operator()(double t) const {
    if (t >= 2.0 * R) return 0.0;
    const double h = t / (2.0 * R);
    return 2.0 * R * R * (std::acos(h) - h * std::sqrt(1.0 - h * h));
  }
  std::vector<double> breakpoints() const { return {2.0 * R}; }
};

double golden_max(auto f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST(LegendreCoefficients, ConstantHasOnlyMonopole) {
  const auto s = legendre_coefficients(Constant{}, 8);
  EXPECT_NEAR(s.values[0], 4.0 * pi, 1e-12);
  for (int l = 1; l <= 8; ++l) EXPECT_NEAR(s.values[l], 0.0, 1e-12) << l;
}

TEST(LegendreCoefficients, SingleLegendrePolynomial) {
  const auto s = legendre_coefficients(P3{}, 10);
  for (int l = 0; l <= 10; ++l) EXPECT_NEAR(s.values[l], l == 3 ? 4.0 * pi / 7.0 : 0.0, 1e-12) << l;
}

TEST(LegendreCoefficients, RoundTripOfRandomSpectra) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    PowerSpectrum s;
    for (int l = 0; l <= 32; ++l) {
      s.grid.push_back(l);
      s.values.push_back(u(rng) / (1.0 + l));
    }
    const auto back = legendre_coefficients(LegendreSeries{s}, 32);
    const double scale = s.max_abs();
    for (int l = 0; l <= 32; ++l) EXPECT_NEAR(back.values[l], s.values[l], 1e-10 * scale);
  }
}

TEST(LegendreCoefficients, IndependentOfThreadCount) {
  const auto model = default_paper_params(ModelKind::BrokenExp);
  TransformOptions one, many;
  many.threads = 8;
  const auto a = legendre_coefficients(model, 500, one);
  const auto b = legendre_coefficients(model, 500, many);
  EXPECT_EQ(a.values, b.values);
}

TEST(LegendreCoefficients, ModelRecoveredFromSeries) {
  const auto model = default_paper_params(ModelKind::DoubleExp);
  const auto s = legendre_coefficients(model, 4000);
  for (double deg : {2.0, 5.0, 20.0, 60.0, 120.0}) {
    const double t = deg_to_rad(deg);
    EXPECT_NEAR(legendre_series(s, t), model(t), 1e-3 * model(0.0)) << deg;
  }
}

TEST(LegendreCoefficients, TabulatedInputMustCoverSphere) {
  TabulatedCorrelation t;
  t.theta = {0.0, 0.1, 0.2, 0.3};
  t.values = {1.0, 0.5, 0.2, 0.1};
  EXPECT_THROW(legendre_coefficients(t, 10), ExtrapolationError);
  TransformOptions zero;
  zero.extrapolation = Extrapolation::ZeroBeyond;
  EXPECT_NO_THROW(legendre_coefficients(t, 10, zero));
}

TEST(LegendreCoefficients, TabulatedMatchesAnalytic) {
  const auto model = default_paper_params(ModelKind::DoubleExp);
  TabulatedCorrelation t;
  for (int i = 0; i <= 20000; ++i) {
    t.theta.push_back(pi * i / 20000.0);
    t.values.push_back(model(t.theta.back()));
  }
  const auto a = legendre_coefficients(model, 100);
  const auto b = legendre_coefficients(t, 100);
  for (int l = 0; l <= 100; ++l) EXPECT_NEAR(b.values[l], a.values[l], 1e-6 * a.values[0]) << l;
}

TEST(LegendreCoefficients, RejectsNegativeEllMax) { EXPECT_THROW(legendre_coefficients(Constant{}, -1), DomainError); }

TEST(CorrelationFromSpectrum, RequiresContiguousGrid) {
  PowerSpectrum s;
  s.grid = {0, 2, 3};
  s.values = {1, 1, 1};
  const std::vector<double> th{0.1};
  EXPECT_THROW(correlation_from_spectrum(s, th), DomainError);
}

TEST(SmallAngle, DiskOverlapMatchesSquaredAiry) {
  const double R = deg_to_rad(1.0);
  const DiskOverlap c{R};
  std::vector<double> ks;
  for (double x = 0.5; x < 12.0; x += 0.5) ks.push_back(x / R);
  const auto s = small_angle_spectrum(c, ks);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double x = ks[i] * R;
    const double disk = pi * R * R * 2.0 * std::cyl_bessel_j(1.0, x) / x;
    EXPECT_NEAR(s.values[i], disk * disk, 2e-3 * pi * pi * R * R * R * R) << x;
  }
}

TEST(SmallAngle, FirstZeroOfDiskSpectrum) {
  const double R = deg_to_rad(1.0);
  const DiskOverlap c{R};
  auto p = [&](double x) {
    const std::vector<double> k{x / R};
    return -std::abs(small_angle_spectrum(c, k).values[0]);
  };
  EXPECT_NEAR(golden_max(p, 3.5, 4.2), 3.8317, 0.02);
}

TEST(SmallAngle, TailFractionOfCompactModel) {
  const auto model = default_paper_params(ModelKind::Toy2Uniform);
  EXPECT_EQ(small_angle_tail_fraction(model, deg_to_rad(5.0)), 0.0);
  const auto c1 = default_paper_params(ModelKind::DoubleExp);
  EXPECT_GT(small_angle_tail_fraction(c1, deg_to_rad(5.0)), 0.01);
}

TEST(Grids, LogAndLinear) {
  const auto g = log_spaced(1.0, 100.0, 3);
  EXPECT_NEAR(g[1], 10.0, 1e-12);
  const auto l = linear_grid(0.0, 1.0, 5);
  EXPECT_DOUBLE_EQ(l[2], 0.5);
  EXPECT_THROW(log_spaced(0.0, 1.0, 4), DomainError);
  EXPECT_EQ(multipole_frequencies(2), (std::vector<double>{0.5, 1.5, 2.5}));
}

TEST(Ft1d, BoxMatchesClosedForm) {
  const double R = 0.7;
  const auto prof = profiles::box(R);
  std::vector<double> ks{0.0};
  for (double k = 0.3; k < 300.0; k *= 1.37) ks.push_back(k);
  const auto ft = ft_1d(prof, ks);
  EXPECT_NEAR(ft[0].real(), 2.0 * R, 1e-13);
  for (std::size_t i = 1; i < ks.size(); ++i) {
    EXPECT_NEAR(ft[i].real(), 2.0 * std::sin(ks[i] * R) / ks[i], 1e-12) << ks[i];
    EXPECT_NEAR(ft[i].imag(), 0.0, 1e-12);
  }
}

TEST(Ft1d, TriangleMatchesClosedForm) {
  const double x0 = 1.3;
  const auto prof = profiles::triangle(x0);
  std::vector<double> ks;
  for (double k = 0.2; k < 200.0; k *= 1.5) ks.push_back(k);
  const auto ft = ft_1d(prof, ks);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double s = std::sin(ks[i] * x0 / 2.0) / (ks[i] * x0 / 2.0);
    EXPECT_NEAR(ft[i].real(), x0 * s * s, 1e-12);
  }
}

TEST(Ft1d, BsplineIntegratesToArea) {
  const double x0 = 1.5;
  const std::vector<double> k0{0.0};
  // Three unit-width pieces scaled by w = 2 x0 / 3 integrate to w.
  EXPECT_NEAR(ft_1d(profiles::quadratic_bspline(x0), k0)[0].real(), 2.0 * x0 / 3.0, 1e-13);
}

TEST(Ft1d, ProfileIsZeroOutsideSupport) {
  const auto prof = profiles::box(1.0);
  EXPECT_EQ(prof(1.5), 0.0);
  EXPECT_EQ(prof(0.5), 1.0);
}

TEST(SphericalBox, SmallArgumentBranchesAreContinuous) {
  for (int d = 1; d <= 3; ++d) {
    for (double x : {1e-5, 0.049999, 0.05, 0.050001, 1e-4, 1.0001e-4}) {
      const double series = spherical_box_ft(d, 1.0, x);
      double exact = 0.0;
      if (d == 1) exact = std::sin(x) / x;
      if (d == 2) exact = 2.0 * std::cyl_bessel_j(1.0, x) / x;
      if (d == 3) {
        // 3 (sin x - x cos x) / x^3 = sum_{n>=1} (-1)^(n+1) 6n x^(2n-2) / (2n+1)!
        double term_fact = 6.0;
        for (int m = 1; m <= 10; ++m) {
          if (m > 1) term_fact *= (2.0 * m) * (2.0 * m + 1.0);
          exact += (m % 2 ? 1.0 : -1.0) * 6.0 * m * std::pow(x, 2 * m - 2) / term_fact;
        }
      }
      EXPECT_NEAR(series, exact, 1e-12) << d << " " << x;
    }
  }
}

TEST(SphericalBox, ValuesBoundedAndDecaying) {
  for (int d = 1; d <= 3; ++d) {
    EXPECT_DOUBLE_EQ(spherical_box_ft(d, 2.0, 0.0), 1.0);
    for (double k = 0.01; k < 1e4; k *= 1.1) EXPECT_LE(std::abs(spherical_box_ft(d, 1.0, k)), 1.0 + 1e-15);
    EXPECT_LT(std::abs(spherical_box_ft(d, 1.0, 1e6)), 1e-5);
  }
}

TEST(SphericalBox, FirstZeros) {
  auto root = [](int d, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (spherical_box_ft(d, 1.0, lo) * spherical_box_ft(d, 1.0, mid) <= 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  };
  EXPECT_NEAR(root(1, 2.0, 4.0), pi, 1e-12);
  EXPECT_NEAR(root(2, 3.0, 4.5), 3.8317, 1e-4);
  // tan x = x, first positive root.
  double lo = 4.0, hi = 4.7;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((std::tan(lo) - lo) * (std::tan(mid) - mid) <= 0.0 ? hi : lo) = mid;
  }
  EXPECT_NEAR(root(3, 4.0, 4.7), 0.5 * (lo + hi), 1e-10);
  EXPECT_NEAR(root(3, 4.0, 4.7), 4.4934, 1e-4);
}

TEST(SphericalBox, ProjectionSliceAgreement) {
  // The d-ball transform along one axis is the 1-D transform of its slice
  // measure: 1, 2 sqrt(R^2 - x^2), pi (R^2 - x^2).
  const double R = 0.8;
  const std::vector<double> ks{0.0, 0.5, 3.0, 17.0, 60.0};
  for (int d = 1; d <= 3; ++d) {
    Profile1D slice{[R, d](double x) {
                      const double q = R * R - x * x;
                      if (d == 1) return 1.0;
                      if (d == 2) return 2.0 * std::sqrt(std::max(0.0, q));
                      return pi * q;
                    },
                    -R, R, {}, std::nullopt};
    const double vol = d == 1 ? 2.0 * R : d == 2 ? pi * R * R : 4.0 / 3.0 * pi * R * R * R;
    const auto ft = ft_1d(slice, ks);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      EXPECT_NEAR(ft[i].real() / vol, spherical_box_ft(d, R, ks[i]), 1e-8) << d << " " << ks[i];
    }
  }
}

TEST(SphericalBox, RejectsBadArguments) {
  EXPECT_THROW(spherical_box_ft(4, 1.0, 1.0), DomainError);
  EXPECT_THROW(spherical_box_ft(0, 1.0, 1.0), DomainError);
  EXPECT_THROW(spherical_box_ft(2, 0.0, 1.0), DomainError);
  EXPECT_THROW(spherical_box_ft(2, 1.0, -1.0), DomainError);
}
