#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "angcorr/corr_models.hpp"
#include "angcorr/peak_analysis.hpp"
#include "angcorr/transforms.hpp"

using namespace angcorr;

namespace {

PowerSpectrum sampled(double lo, double hi, std::size_t n, auto f) {
  PowerSpectrum s;
  s.kind = GridKind::Frequency;
  s.grid = linear_grid(lo, hi, n);
  for (double k : s.grid) s.values.push_back(f(k));
  return s;
}

double airy(double x) {
  const double v = 2.0 * std::cyl_bessel_j(1.0, x) / x;
  return v * v;
}

double golden_max(auto f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 200; ++i) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return 0.5 * (a + b);
}

PeakOptions raw() {
  PeakOptions o;
  o.smoothing_window = 1;
  o.prominence_frac = 1e-6;
  return o;
}

}  // namespace

TEST(FindPeaks, AirySideLobes) {
  const auto s = sampled(0.5, 13.0, 2000, airy);
  const auto peaks = find_peaks(s, raw());
  ASSERT_GE(peaks.size(), 3u);
  const double expect[] = {golden_max(airy, 4.5, 6.0), golden_max(airy, 7.5, 9.0), golden_max(airy, 11.0, 12.5)};
  EXPECT_NEAR(expect[0], 5.1356, 1e-3);
  EXPECT_NEAR(expect[1], 8.4172, 1e-3);
  EXPECT_NEAR(expect[2], 11.6198, 1e-3);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(peaks[i].location, expect[i], 1e-3);
}

TEST(FindPeaks, MonotoneAndConstantSpectraHaveNone) {
  EXPECT_TRUE(find_peaks(sampled(1, 10, 100, [](double k) { return 1.0 / k; })).empty());
  EXPECT_TRUE(find_peaks(sampled(1, 10, 100, [](double) { return 2.0; })).empty());
}

TEST(FindPeaks, TooShortSpectrum) {
  EXPECT_THROW(find_peaks(sampled(1, 2, 10, [](double k) { return k; })), DomainError);
}

TEST(FindPeaks, ScaleEquivariant) {
  const auto f = [](double k) { return (1.5 + std::sin(k)) / k; };
  const auto a = find_peaks(sampled(1, 60, 3000, f));
  const auto b = find_peaks(sampled(1, 60, 3000, [&](double k) { return 37.0 * f(k); }));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(b[i].location, a[i].location, 1e-12 * a[i].location);
    EXPECT_NEAR(b[i].height, 37.0 * a[i].height, 1e-12 * b[i].height);
  }
}

TEST(FindPeaks, StableUnderGridRefinement) {
  const auto f = [](double k) { return (1.2 + std::cos(k)) / (1.0 + 0.01 * k * k); };
  const auto coarse = find_peaks(sampled(0.5, 40, 800, f), raw());
  const auto fine = find_peaks(sampled(0.5, 40, 1600, f), raw());
  ASSERT_EQ(coarse.size(), fine.size());
  const double h = 39.5 / 799;
  for (std::size_t i = 0; i < coarse.size(); ++i) EXPECT_NEAR(coarse[i].location, fine[i].location, h);
}

TEST(QuasiPeriod, SquaredSine) {
  const double x0 = 0.3;
  const auto s = sampled(1, 200, 8000, [&](double k) { auto v = std::sin(k * x0); return v * v; });
  const auto qp = quasi_period(find_peaks(s, raw()));
  EXPECT_NEAR(qp.mean, pi / x0, 0.01 * pi / x0);
  EXPECT_LT(qp.dispersion, 0.01 * qp.mean);
}

TEST(QuasiPeriod, NeedsThreePeaks) {
  std::vector<Peak> two{{1, 1, 1}, {2, 1, 1}};
  EXPECT_THROW(quasi_period(two), InsufficientPeaksError);
}

TEST(Envelope, OneDimensionalDecayLaws) {
  const double x0 = 1.0;
  const auto ks = linear_grid(1.0, 250.0, 20000);
  const struct {
    Profile1D p;
    double slope;
  } cases[] = {{profiles::box(x0), -1.0}, {profiles::triangle(x0), -2.0}, {profiles::quadratic_bspline(x0), -3.0}};
  for (const auto& c : cases) {
    const auto peaks = find_peaks(ft_magnitude(c.p, ks), raw());
    const auto fit = envelope_decay_exponent(peaks, 20.0 / x0, 200.0 / x0);
    EXPECT_NEAR(fit.slope, c.slope, 0.15);
    EXPECT_GE(fit.n_peaks, 4u);
  }
}

TEST(Envelope, DiskSpectrumDecaysAsCube) {
  const auto s = sampled(1.0, 200.0, 40000, airy);
  const auto fit = envelope_decay_exponent(find_peaks(s, raw()), 20.0, 200.0);
  EXPECT_NEAR(fit.slope, -3.0, 0.2);
}

TEST(Envelope, ExactPowerLaw) {
  std::vector<Peak> peaks;
  for (double k = 1; k <= 10; ++k) peaks.push_back({k, 5.0 * std::pow(k, -2.5), 1.0});
  const auto fit = envelope_decay_exponent(peaks, 0.0);
  EXPECT_NEAR(fit.slope, -2.5, 1e-12);
  EXPECT_NEAR(fit.std_error, 0.0, 1e-12);
  EXPECT_THROW(envelope_decay_exponent(std::vector<Peak>(peaks.begin(), peaks.begin() + 3), 0.0),
               InsufficientPeaksError);
}

TEST(Verdict, RegularPeaksDetected) {
  std::vector<Peak> peaks;
  for (int i = 0; i < 6; ++i) peaks.push_back({100.0 * (i + 1), 1.0, 1.0});
  const auto v = oscillation_verdict(peaks);
  EXPECT_TRUE(v.detected);
  EXPECT_DOUBLE_EQ(v.regularity, 1.0);
  EXPECT_DOUBLE_EQ(v.score, 6.0);
  EXPECT_FALSE(oscillation_verdict({peaks.begin(), peaks.begin() + 2}).detected);
}

TEST(Verdict, IrregularPeaksRejected) {
  const std::vector<Peak> peaks{{1, 1, 1}, {2, 1, 1}, {30, 1, 1}, {31, 1, 1}};
  const auto v = oscillation_verdict(peaks);
  EXPECT_FALSE(v.detected);
  EXPECT_LT(v.regularity, 0.5);
}

TEST(Verdict, ModelSpectra) {
  auto verdict = [](ModelKind kind) {
    return oscillation_score(band_power(legendre_coefficients(default_paper_params(kind), 2000)));
  };
  EXPECT_FALSE(verdict(ModelKind::DoubleExp).detected);
  EXPECT_TRUE(verdict(ModelKind::BrokenExp).detected);
  EXPECT_TRUE(verdict(ModelKind::Toy2Uniform).detected);
  EXPECT_TRUE(verdict(ModelKind::Toy2Distance).detected);
}

TEST(Verdict, RawDoubleExpSpectrumHasNoPeaks) {
  EXPECT_TRUE(find_peaks(legendre_coefficients(default_paper_params(ModelKind::DoubleExp), 2000)).empty());
}

TEST(PeakSpacing, BrokenExpFollowsBreakpoint) {
  // A kink of C at theta* modulates C_l by cos(l theta*): spacing 2 pi / theta*.
  const double theta_star = deg_to_rad(1.03);
  const auto peaks = find_peaks(band_power(legendre_coefficients(default_paper_params(ModelKind::BrokenExp), 2000)));
  ASSERT_GE(peaks.size(), 4u);
  const std::vector<Peak> tail(peaks.begin() + 1, peaks.end());
  EXPECT_NEAR(quasi_period(tail).mean, two_pi / theta_star, 0.05 * two_pi / theta_star);
}

TEST(BandPower, Definition) {
  PowerSpectrum s;
  s.grid = {0, 1, 2};
  s.values = {3, 3, 3};
  const auto d = band_power(s);
  EXPECT_DOUBLE_EQ(d.values[0], 0.0);
  EXPECT_DOUBLE_EQ(d.values[2], 6.0 * 3.0 / two_pi);
  s.kind = GridKind::Frequency;
  EXPECT_THROW(band_power(s), DomainError);
}

TEST(MovingAverage, ShrinksAtEdges) {
  const auto y = moving_average({1, 2, 3, 4, 5}, 3);
  EXPECT_EQ(y, (std::vector<double>{1, 2, 3, 4, 5}));
  const auto z = moving_average({0, 3, 0, 3, 0}, 3);
  EXPECT_DOUBLE_EQ(z[2], 2.0);
  EXPECT_THROW(moving_average({1.0}, 0), DomainError);
}
