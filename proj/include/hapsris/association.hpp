#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "hapsris/channel.hpp"
#include "hapsris/config.hpp"

namespace hapsris {

/// Shannon rate in bit/s.
inline double rate_bps(double gamma, double bw_hz) { return bw_hz * std::log2(1.0 + gamma); }

/// Downlink SINR of UE `k` served by BS `l`. Every other BS is treated as
/// transmitting on the same subcarrier at the same per-subcarrier power.
inline double sinr_within_cell(std::size_t k, std::size_t l, const ChannelSet& gains, double p_watts,
                               double noise_watts) {
  double interference = 0.0;
  for (std::size_t j = 0; j < gains.num_bs; ++j)
    if (j != l) interference += p_watts * gains.gain(k, j);
  return p_watts * gains.gain(k, l) / (interference + noise_watts);
}

/// K x L rate matrix, row-major.
struct RateMatrix {
  std::size_t num_ues = 0;
  std::size_t num_bs = 0;
  std::vector<double> bps;

  double operator()(std::size_t k, std::size_t l) const { return bps[k * num_bs + l]; }
};

inline RateMatrix within_cell_rates(const ChannelSet& gains, const NetworkConfig& config) {
  RateMatrix m{gains.num_ues, gains.num_bs, {}};
  m.bps.reserve(m.num_ues * m.num_bs);
  const double p = config.bs_power_watts();
  const double noise = config.noise_watts();
  for (std::size_t k = 0; k < gains.num_ues; ++k)
    for (std::size_t l = 0; l < gains.num_bs; ++l)
      m.bps.push_back(rate_bps(sinr_within_cell(k, l, gains, p, noise), config.bw_ue_hz));
  return m;
}

struct DirectLink {
  std::size_t ue_index = 0;
  std::size_t bs_index = 0;
  std::size_t subcarrier = 0;
  double rate_bps = 0.0;
};

/// K1 (served by a BS) / K2 (handed to the HAPS-RIS) split.
struct Partition {
  std::vector<DirectLink> k1;   // sorted by ue_index
  std::vector<std::size_t> k2;  // ascending
  std::vector<int> per_bs_load;
};

/// Association rule:
///  1. Each UE picks the highest-rate BS among those meeting R_min
///     (lowest BS index on ties).
///  2. A BS with more candidates than subcarriers keeps its highest-gain
///     members; the rest go to K2. Equal gains keep the lower UE index.
///  3. UEs with no BS meeting R_min go to K2.
/// Subcarriers are handed out per cell in descending serving-gain order.
inline Partition associate(const RateMatrix& rates, const ChannelSet& gains, const NetworkConfig& config) {
  const std::size_t K = rates.num_ues, L = rates.num_bs;
  const auto cap = static_cast<std::size_t>(config.subcarriers_per_bs());

  std::vector<std::vector<std::size_t>> members(L);
  std::vector<bool> direct(K, false);
  for (std::size_t k = 0; k < K; ++k) {
    std::size_t best = L;
    for (std::size_t l = 0; l < L; ++l) {
      if (rates(k, l) < config.r_min_bps) continue;
      if (best == L || rates(k, l) > rates(k, best)) best = l;
    }
    if (best != L) members[best].push_back(k);
  }

  Partition p;
  p.per_bs_load.assign(L, 0);
  for (std::size_t l = 0; l < L; ++l) {
    auto& m = members[l];
    std::stable_sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) {
      const double ga = gains.gain(a, l), gb = gains.gain(b, l);
      if (ga != gb) return ga > gb;
      return a < b;
    });
    if (m.size() > cap) m.resize(cap);
    for (std::size_t s = 0; s < m.size(); ++s) {
      p.k1.push_back(DirectLink{m[s], l, s, rates(m[s], l)});
      direct[m[s]] = true;
    }
    p.per_bs_load[l] = static_cast<int>(m.size());
  }
  std::sort(p.k1.begin(), p.k1.end(), [](const DirectLink& a, const DirectLink& b) { return a.ue_index < b.ue_index; });
  for (std::size_t k = 0; k < K; ++k)
    if (!direct[k]) p.k2.push_back(k);
  return p;
}

}  // namespace hapsris
