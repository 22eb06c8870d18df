#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "hapsris/association.hpp"
#include "hapsris/scenario.hpp"

using namespace hapsris;

namespace {

/// Channel set with explicit gains, row-major [ue][bs].
ChannelSet make_gains(std::size_t ues, std::size_t bss, const std::vector<double>& g) {
  ChannelSet cs;
  cs.num_ues = ues;
  cs.num_bs = bss;
  for (std::size_t k = 0; k < ues; ++k)
    for (std::size_t l = 0; l < bss; ++l) {
      TerrestrialLink t;
      t.ue_index = k;
      t.bs_index = l;
      t.gain_lin = g[k * bss + l];
      cs.links.push_back(t);
    }
  return cs;
}

void expect_partition_invariants(const Partition& p, const NetworkConfig& c, std::size_t K) {
  std::vector<int> seen(K, 0);
  for (const auto& d : p.k1) {
    EXPECT_GE(d.rate_bps, c.r_min_bps);
    ++seen[d.ue_index];
  }
  for (auto k : p.k2) ++seen[k];
  for (int s : seen) EXPECT_EQ(s, 1);
  for (int load : p.per_bs_load) EXPECT_LE(load, c.subcarriers_per_bs());
  EXPECT_TRUE(std::is_sorted(p.k2.begin(), p.k2.end()));
}

}  // namespace

TEST(Sinr, NoiseEqualSignalGivesUnity) {
  const auto g = make_gains(1, 1, {2e-15});
  EXPECT_DOUBLE_EQ(sinr_within_cell(0, 0, g, 1.0, 2e-15), 1.0);
}

TEST(Sinr, EqualGainsBoundedByOne) {
  const double p = 3.16, h = 1e-12, n = 8e-15;
  const auto g = make_gains(1, 2, {h, h});
  const double s = sinr_within_cell(0, 0, g, p, n);
  EXPECT_DOUBLE_EQ(s, p * h / (p * h + n));
  EXPECT_LT(s, 1.0);
}

TEST(Sinr, GoldenValueRecomputedFromStoredGains) {
  NetworkConfig c;
  const auto topo = generate_topology(c, 1);
  const auto ch = compute_channels(topo, c, 1);
  const double p = std::pow(10.0, (c.p_bs_dbm - 30) / 10);
  const double n = std::pow(10.0, (c.noise_psd_dbm_hz - 30) / 10) * c.bw_ue_hz;
  double interf = 0.0;
  for (std::size_t l = 1; l < ch.num_bs; ++l) interf += p * ch.gain(0, l);
  EXPECT_NEAR(sinr_within_cell(0, 0, ch, c.bs_power_watts(), c.noise_watts()), p * ch.gain(0, 0) / (interf + n),
              1e-12 * p * ch.gain(0, 0) / (interf + n));
}

TEST(Rate, Examples) {
  EXPECT_DOUBLE_EQ(rate_bps(3, 2e6), 4e6);
  EXPECT_DOUBLE_EQ(rate_bps(0, 2e6), 0.0);
  EXPECT_DOUBLE_EQ(rate_bps(1, 1), 1.0);
}

TEST(Associate, AllBelowThresholdGoesToK2) {
  NetworkConfig c;
  const auto g = make_gains(5, 2, std::vector<double>(10, 1e-20));
  const auto rates = within_cell_rates(g, c);
  const auto p = associate(rates, g, c);
  EXPECT_TRUE(p.k1.empty());
  EXPECT_EQ(p.k2, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Associate, LoadCapKeepsStrongest) {
  NetworkConfig c;
  std::vector<double> gains(30);
  for (std::size_t k = 0; k < 30; ++k) gains[k] = 1e-9 * (1.0 + std::fmod(k * 7.0, 30.0));
  const auto g = make_gains(30, 1, gains);
  const auto p = associate(within_cell_rates(g, c), g, c);
  // Sort oracle: the 25 largest gains stay.
  std::vector<std::size_t> order(30);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return gains[a] > gains[b]; });
  std::vector<std::size_t> evicted(order.begin() + 25, order.end());
  std::sort(evicted.begin(), evicted.end());
  EXPECT_EQ(p.k1.size(), 25u);
  EXPECT_EQ(p.k2, evicted);
  expect_partition_invariants(p, c, 30);
  // Subcarriers are handed out in descending gain order.
  for (const auto& d : p.k1) {
    const auto pos = std::find(order.begin(), order.end(), d.ue_index) - order.begin();
    EXPECT_EQ(d.subcarrier, static_cast<std::size_t>(pos));
  }
}

TEST(Associate, EvictionTieKeepsLowerIndex) {
  NetworkConfig c;
  const auto g = make_gains(27, 1, std::vector<double>(27, 1e-9));
  const auto p = associate(within_cell_rates(g, c), g, c);
  EXPECT_EQ(p.k2, (std::vector<std::size_t>{25, 26}));
}

TEST(Associate, PicksArgmaxRateBrute) {
  NetworkConfig c;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto topo = generate_topology(c, seed);
    const auto ch = compute_channels(topo, c, seed);
    const auto rates = within_cell_rates(ch, c);
    const auto p = associate(rates, ch, c);
    expect_partition_invariants(p, c, ch.num_ues);
    for (const auto& d : p.k1) {
      std::size_t best = 0;
      for (std::size_t l = 1; l < ch.num_bs; ++l)
        if (rates(d.ue_index, l) > rates(d.ue_index, best)) best = l;
      EXPECT_EQ(d.bs_index, best);
    }
    // A UE with a qualifying BS lands in K2 only through eviction from its argmax cell.
    for (auto k : p.k2) {
      std::size_t best = ch.num_bs;
      for (std::size_t l = 0; l < ch.num_bs; ++l)
        if (rates(k, l) >= c.r_min_bps && (best == ch.num_bs || rates(k, l) > rates(k, best))) best = l;
      if (best != ch.num_bs) EXPECT_EQ(p.per_bs_load[best], c.subcarriers_per_bs());
    }
  }
}

TEST(Associate, Deterministic) {
  NetworkConfig c;
  auto run = [&] {
    const auto topo = generate_topology(c, 77);
    const auto ch = compute_channels(topo, c, 77);
    return associate(within_cell_rates(ch, c), ch, c);
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.k2, b.k2);
  ASSERT_EQ(a.k1.size(), b.k1.size());
  for (std::size_t i = 0; i < a.k1.size(); ++i) {
    EXPECT_EQ(a.k1[i].ue_index, b.k1[i].ue_index);
    EXPECT_EQ(a.k1[i].bs_index, b.k1[i].bs_index);
    EXPECT_EQ(a.k1[i].rate_bps, b.k1[i].rate_bps);
  }
}

TEST(Associate, TotalSplitPowerServesFewer) {
  NetworkConfig per, split;
  split.bs_power_mode = BsPowerMode::total_split;
  EXPECT_NEAR(split.bs_power_watts() * 25, per.bs_power_watts(), 1e-12);
  int k1_per = 0, k1_split = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto topo = generate_topology(per, seed);
    const auto ch = compute_channels(topo, per, seed);
    k1_per += static_cast<int>(associate(within_cell_rates(ch, per), ch, per).k1.size());
    k1_split += static_cast<int>(associate(within_cell_rates(ch, split), ch, split).k1.size());
  }
  EXPECT_LE(k1_split, k1_per);
}
