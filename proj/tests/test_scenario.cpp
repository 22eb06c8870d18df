#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hapsris/scenario.hpp"
#include "oracles.hpp"

using namespace hapsris;

TEST(GenerateUes, SingleUeInsideArea) {
  NetworkConfig c;
  c.num_ues = 1;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng = make_stream(seed, {kStreamUes});
    const auto ues = generate_ues(c, rng);
    ASSERT_EQ(ues.size(), 1u);
    EXPECT_GE(ues[0].x, 0.0);
    EXPECT_LE(ues[0].x, c.area_side_m);
    EXPECT_GE(ues[0].y, 0.0);
    EXPECT_LE(ues[0].y, c.area_side_m);
    EXPECT_EQ(ues[0].h, c.ue_height_m);
  }
}

TEST(GenerateUes, AllPairsRespectMinimumSeparation) {
  NetworkConfig c;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng = make_stream(seed, {kStreamUes});
    const auto ues = generate_ues(c, rng);
    ASSERT_EQ(ues.size(), 100u);
    int pairs = 0;
    for (std::size_t i = 0; i < ues.size(); ++i)
      for (std::size_t j = i + 1; j < ues.size(); ++j, ++pairs) ASSERT_GE(distance_2d(ues[i], ues[j]), 100.0);
    EXPECT_EQ(pairs, 4950);
  }
}

TEST(GenerateUes, MeanCoordinateMatchesUniformMoment) {
  NetworkConfig c;
  double sum = 0.0;
  int n = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    Rng rng = make_stream(seed, {kStreamUes});
    for (const auto& u : generate_ues(c, rng)) {
      sum += u.x;
      ++n;
    }
  }
  const double band = 3.0 * c.area_side_m / std::sqrt(12.0 * 100 * 1000);
  EXPECT_NEAR(sum / n, 5000.0, band);
}

TEST(GenerateUes, SameSeedSameDrop) {
  NetworkConfig c;
  Rng a = make_stream(42, {kStreamUes}), b = make_stream(42, {kStreamUes});
  EXPECT_EQ(generate_ues(c, a), generate_ues(c, b));
}

TEST(GenerateUes, GivesUpWhenPackingIsHopeless) {
  NetworkConfig c;
  c.num_ues = 50;
  c.area_side_m = 300;  // passes the disc-area check but cannot be packed
  c.min_ue_separation_m = 60;
  Rng rng = make_stream(1, {kStreamUes});
  EXPECT_THROW(generate_ues(c, rng), PackingInfeasible);
}

TEST(Lloyd, FourCornersOneSiteAtCentre) {
  std::vector<Position> pts{{0, 0, 1.5}, {10, 0, 1.5}, {0, 10, 1.5}, {10, 10, 1.5}};
  Rng rng = make_stream(1, {kStreamLloyd});
  const auto r = lloyd_kmeans(pts, 1, rng);
  ASSERT_EQ(r.centroids.size(), 1u);
  EXPECT_NEAR(r.centroids[0].x, 5.0, 1e-12);
  EXPECT_NEAR(r.centroids[0].y, 5.0, 1e-12);
}

TEST(Lloyd, OneSitePerUeHasZeroObjective) {
  NetworkConfig c;
  c.num_ues = 12;
  Rng urng = make_stream(3, {kStreamUes});
  const auto ues = generate_ues(c, urng);
  Rng rng = make_stream(3, {kStreamLloyd});
  const auto r = lloyd_kmeans(ues, 12, rng);
  EXPECT_NEAR(r.objective_history.back(), 0.0, 1e-9);
  for (const auto& u : ues) {
    double best = 1e300;
    for (const auto& s : r.centroids) best = std::min(best, distance_2d(u, s));
    EXPECT_NEAR(best, 0.0, 1e-9);
  }
}

TEST(Lloyd, LineSplitsIntoTwoGroups) {
  std::vector<Position> pts;
  for (double x : {0.0, 1.0, 2.0, 10.0, 11.0, 12.0}) pts.push_back({x, 0.0, 1.5});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng = make_stream(seed, {kStreamLloyd});
    auto r = lloyd_kmeans(pts, 2, rng);
    std::vector<double> xs{r.centroids[0].x, r.centroids[1].x};
    std::sort(xs.begin(), xs.end());
    EXPECT_NEAR(xs[0], 1.0, 1e-12);
    EXPECT_NEAR(xs[1], 11.0, 1e-12);
    EXPECT_NEAR(r.objective_history.back(), oracle::best_two_partition(pts), 1e-9);
  }
}

TEST(Lloyd, ObjectiveNeverIncreases) {
  NetworkConfig c;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng urng = make_stream(seed, {kStreamUes});
    const auto ues = generate_ues(c, urng);
    Rng rng = make_stream(seed, {kStreamLloyd});
    const auto r = lloyd_kmeans(ues, 6, rng);
    for (std::size_t i = 1; i < r.objective_history.size(); ++i)
      EXPECT_LE(r.objective_history[i], r.objective_history[i - 1] * (1 + 1e-12));
    EXPECT_TRUE(oracle::is_lloyd_fixed_point(ues, r));
  }
}

TEST(Lloyd, RejectsBadClusterCount) {
  std::vector<Position> pts{{0, 0, 0}, {1, 1, 0}};
  Rng rng(1);
  EXPECT_THROW(lloyd_kmeans(pts, 0, rng), std::invalid_argument);
  EXPECT_THROW(lloyd_kmeans(pts, 3, rng), std::invalid_argument);
}

TEST(Lloyd, DuplicatePointsStillYieldKSites) {
  std::vector<Position> pts(8, Position{5, 5, 0});
  pts.push_back({100, 100, 0});
  Rng rng = make_stream(9, {kStreamLloyd});
  const auto r = lloyd_kmeans(pts, 3, rng);
  EXPECT_EQ(r.centroids.size(), 3u);
  for (int a : r.assignment) EXPECT_TRUE(a >= 0 && a < 3);
}

TEST(PlaceBs, SitesAtBsHeight) {
  NetworkConfig c;
  const auto t = generate_topology(c, 11);
  ASSERT_EQ(t.bs_sites.size(), 4u);
  for (const auto& s : t.bs_sites) EXPECT_EQ(s.h, c.bs_height_m);
  EXPECT_EQ(t.haps_pos, (Position{5000, 5000, 20000}));
  EXPECT_EQ(t.cs_pos, (Position{5000, 5000, 0}));
}

TEST(PlaceBs, ZeroSitesWhenNoBs) {
  NetworkConfig c;
  c.num_bs = 0;
  EXPECT_TRUE(generate_topology(c, 1).bs_sites.empty());
}

TEST(Topology, PureFunctionOfConfigAndSeed) {
  NetworkConfig c;
  const auto a = generate_topology(c, 5), b = generate_topology(c, 5);
  EXPECT_EQ(a.ues, b.ues);
  EXPECT_EQ(a.bs_sites, b.bs_sites);
  EXPECT_NE(a.ues, generate_topology(c, 6).ues);
}

TEST(Distance3d, Examples) {
  EXPECT_DOUBLE_EQ(distance_3d({0, 0, 0}, {0, 0, 20000}), 20000.0);
  EXPECT_DOUBLE_EQ(distance_3d({0, 0, 0}, {3, 4, 0}), 5.0);
  EXPECT_DOUBLE_EQ(distance_3d({5000, 5000, 1.5}, {5000, 5000, 20000}), 19998.5);
}

TEST(Distance3d, SymmetricAndAtLeastHeightGap) {
  Rng rng(7);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int i = 0; i < 1000; ++i) {
    Position a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    EXPECT_EQ(distance_3d(a, b), distance_3d(b, a));
    EXPECT_GE(distance_3d(a, b), std::abs(a.h - b.h));
  }
}
