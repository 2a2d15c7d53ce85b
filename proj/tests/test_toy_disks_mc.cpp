#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "angcorr/toy_disks_mc.hpp"

using namespace angcorr;

namespace {

DiskEnsembleConfig small_config() {
  DiskEnsembleConfig c;
  c.N_c = 40;
  c.N_p = 50;
  c.n_realizations = 6;
  c.n_bins = 16;
  c.seed = 9;
  return c;
}

}  // namespace

TEST(SampleCenters, SingleDiskInsidePatch) {
  auto c = small_config();
  c.N_c = 1;
  auto rng = realization_rng(1, 0);
  const auto d = sample_centers(c, rng);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_GE(d[0].center.x, 0.0);
  EXPECT_LT(d[0].center.x, c.L_patch);
  EXPECT_GE(d[0].center.y, 0.0);
  EXPECT_LT(d[0].center.y, c.L_patch);
}

TEST(SampleCenters, HardCoreKeepsDisksApart) {
  auto c = small_config();
  c.N_c = 200;
  c.hard_core = true;
  c.R = deg_to_rad(1.2);
  auto rng = realization_rng(4, 0);
  const auto d = sample_centers(c, rng);
  ASSERT_EQ(d.size(), 200u);
  double closest = 1e9;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      double dx = std::abs(d[i].center.x - d[j].center.x);
      double dy = std::abs(d[i].center.y - d[j].center.y);
      dx = std::min(dx, c.L_patch - dx);
      dy = std::min(dy, c.L_patch - dy);
      closest = std::min(closest, std::hypot(dx, dy));
    }
  }
  EXPECT_GE(closest, 2.0 * c.R);
}

TEST(SampleCenters, VariableRadiiHardCore) {
  auto c = small_config();
  c.N_c = 100;
  c.hard_core = true;
  c.radius_range = {deg_to_rad(1.0), deg_to_rad(2.0)};
  auto rng = realization_rng(4, 1);
  const auto d = sample_centers(c, rng);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_GE(d[i].radius, deg_to_rad(1.0));
    EXPECT_LE(d[i].radius, deg_to_rad(2.0));
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      EXPECT_GE(std::sqrt(detail::torus_dist2(d[i].center, d[j].center, c.L_patch)), d[i].radius + d[j].radius);
    }
  }
}

TEST(SampleCenters, PackingChecks) {
  auto c = small_config();
  c.hard_core = true;
  c.N_c = 10000;
  EXPECT_THROW(c.check_packing(), PackingInfeasibleError);
  // Feasible by the area bound but far too dense for dart throwing.
  c.N_c = 1100;
  c.R = deg_to_rad(1.5);
  c.packing_limit = 10.0;
  c.max_attempts_per_disk = 20;
  auto rng = realization_rng(0, 0);
  EXPECT_THROW(sample_centers(c, rng), PackingInfeasibleError);
}

TEST(SampleDiskPoints, AreaUniformRadialDistribution) {
  auto c = small_config();
  c.N_c = 1;
  c.N_p = 20000;
  const std::vector<Disk> disks{{{0.5, 0.5}, c.R}};
  auto rng = realization_rng(2, 0);
  const auto pts = sample_disk_points(disks, c, rng);
  std::vector<double> u;
  for (const auto& p : pts) {
    const double r = std::hypot(p.x - 0.5, p.y - 0.5);
    ASSERT_LE(r, c.R * (1 + 1e-12));
    u.push_back(r * r / (c.R * c.R));
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    ks = std::max({ks, std::abs(u[i] - static_cast<double>(i) / u.size()),
                   std::abs(u[i] - static_cast<double>(i + 1) / u.size())});
  }
  EXPECT_LT(ks, 0.02);
}

TEST(SampleDiskPoints, WrapIntoPatch) {
  auto c = small_config();
  c.N_p = 500;
  const std::vector<Disk> disks{{{0.001, 0.999}, c.R}};
  auto rng = realization_rng(2, 1);
  for (const auto& p : sample_disk_points(disks, c, rng)) {
    EXPECT_GE(p.x, 0.0);
    EXPECT_LT(p.x, c.L_patch);
    EXPECT_GE(p.y, 0.0);
    EXPECT_LT(p.y, c.L_patch);
  }
}

TEST(SampleDiskPoints, OnePointPerDisk) {
  auto c = small_config();
  c.N_p = 1;
  EXPECT_EQ(sample_realization(c, 0).size(), static_cast<std::size_t>(c.N_c));
}

TEST(SquareDistanceCdf, AgreesWithSampledPairs) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 2000000;
  const std::vector<double> rs{0.05, 0.2, 0.5};
  std::vector<int> below(rs.size(), 0);
  for (int i = 0; i < n; ++i) {
    const double d = std::hypot(u(rng) - u(rng), u(rng) - u(rng));
    for (std::size_t k = 0; k < rs.size(); ++k) below[k] += d <= rs[k];
  }
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const double p = square_distance_cdf(rs[k], 1.0);
    EXPECT_NEAR(static_cast<double>(below[k]) / n, p, 4.0 * std::sqrt(p * (1 - p) / n)) << rs[k];
  }
}

TEST(CountPairs, MatchesBruteForce) {
  std::mt19937_64 rng(8);
  const auto pts = sample_uniform_points(1500, 1.0, rng);
  const auto edges = linear_bin_edges(0.2, 10);
  const auto got = count_pairs(pts, edges, 1.0);
  std::vector<std::uint64_t> ref(10, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
      if (d <= 0.0 || d > 0.2) continue;
      const auto b = static_cast<std::size_t>(std::ceil(d / 0.02)) - 1;
      if (b < 10 && d > edges[b] && d <= edges[b + 1]) ++ref[b];
    }
  }
  EXPECT_EQ(got, ref);
}

TEST(Estimator, UniformPointsGiveZero) {
  std::mt19937_64 rng(12);
  const auto pts = sample_uniform_points(20000, 1.0, rng);
  const auto est = estimate_correlation(pts, linear_bin_edges(0.1, 10), 1.0);
  for (const auto& v : est.values) {
    ASSERT_TRUE(v);
    EXPECT_NEAR(*v, 0.0, 0.02);
  }
}

TEST(Ensemble, DeterministicAndThreadIndependent) {
  const auto c = small_config();
  const auto a = run_ensemble(c, 1);
  const auto b = run_ensemble(c, 4);
  const auto again = run_ensemble(c, 1);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.rms, b.rms);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_EQ(a.mean, again.mean);
}

TEST(Ensemble, SeedChangesResult) {
  auto c = small_config();
  const auto a = run_ensemble(c);
  c.seed = 10;
  EXPECT_NE(a.mean, run_ensemble(c).mean);
}

TEST(Ensemble, SingleRealizationHasNoSpread) {
  auto c = small_config();
  c.n_realizations = 1;
  const auto s = run_ensemble(c);
  for (std::size_t b = 0; b < s.n_bins(); ++b) {
    EXPECT_FALSE(s.rms[b]);
    EXPECT_FALSE(s.sem[b]);
  }
}

TEST(Ensemble, StandardErrorShrinksWithRealizations) {
  auto c = small_config();
  c.N_c = 60;
  c.n_bins = 12;
  c.n_realizations = 12;
  const auto few = run_ensemble(c, 4);
  c.n_realizations = 48;
  c.seed = 1234;
  const auto many = run_ensemble(c, 4);
  std::vector<double> ratios;
  for (std::size_t b = 0; b < few.n_bins(); ++b) {
    if (few.sem[b] && many.sem[b] && *many.sem[b] > 0.0) ratios.push_back(*few.sem[b] / *many.sem[b]);
  }
  ASSERT_FALSE(ratios.empty());
  const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
  EXPECT_NEAR(mean, 2.0, 0.5);
}

TEST(Ensemble, MorePointsPerDiskKeepsTheSignal) {
  auto c = small_config();
  c.n_realizations = 10;
  const auto a = run_ensemble(c, 4);
  c.N_p = 100;
  const auto b = run_ensemble(c, 4);
  // Smallest-separation bin: same disks statistics, denser sampling.
  ASSERT_TRUE(a.mean[0] && b.mean[0] && a.rms[0]);
  EXPECT_NEAR(*b.mean[0], *a.mean[0], 3.0 * *a.rms[0]);
}

TEST(Config, Validation) {
  auto c = small_config();
  c.N_c = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = small_config();
  c.theta_max = 0.6;
  EXPECT_THROW(c.validate(), DomainError);
  c = small_config();
  c.radius_range = {0.02, 0.01};
  EXPECT_THROW(c.validate(), DomainError);
  EXPECT_DOUBLE_EQ(small_config().resolved_theta_max(), 4.0 * deg_to_rad(1.0));
}
