#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "hapsris/config.hpp"
#include "hapsris/rng.hpp"
#include "hapsris/scenario.hpp"
#include "hapsris/units.hpp"

namespace hapsris {

class ModelValidityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// --- propagation building blocks -------------------------------------------

/// Free-space path loss in dB: 20 log10(d) + 20 log10(f) - 147.55.
inline double fspl_db(double d_m, double f_hz) {
  return 20.0 * std::log10(d_m) + 20.0 * std::log10(f_hz) - 147.55;
}

/// UMa LoS probability (3GPP TR 38.901 Table 7.4.2-1, h_UT <= 13 m).
inline double los_probability(double d_2d) {
  if (d_2d <= 18.0) return 1.0;
  return 18.0 / d_2d + std::exp(-d_2d / 63.0) * (1.0 - 18.0 / d_2d);
}

inline constexpr double kUmaMinDistance2d = 10.0;

/// UMa path loss in dB (TR 38.901 Table 7.4.1-1) with effective environment
/// height fixed at 1 m. d_2d below 10 m is clamped to 10 m; d_3d is rebuilt
/// from the clamped horizontal distance in that case.
inline double uma_pathloss_db(double d_2d, double d_3d, double f_hz, bool los, double h_bs, double h_ut) {
  if (f_hz < 0.5e9 || f_hz > 100e9) throw ModelValidityError("model validity: UMa needs 0.5 <= f <= 100 GHz");
  if (d_2d < kUmaMinDistance2d) {
    d_2d = kUmaMinDistance2d;
    d_3d = std::hypot(d_2d, h_bs - h_ut);
  }
  const double f_ghz = f_hz / 1e9;
  const double d_bp = 4.0 * (h_bs - 1.0) * (h_ut - 1.0) * f_hz / kSpeedOfLight;
  double pl_los = 0.0;
  if (d_2d <= d_bp) {
    pl_los = 28.0 + 22.0 * std::log10(d_3d) + 20.0 * std::log10(f_ghz);
  } else {
    pl_los = 28.0 + 40.0 * std::log10(d_3d) + 20.0 * std::log10(f_ghz) -
             9.0 * std::log10(d_bp * d_bp + (h_bs - h_ut) * (h_bs - h_ut));
  }
  if (los) return pl_los;
  const double pl_nlos = 13.54 + 39.08 * std::log10(d_3d) + 20.0 * std::log10(f_ghz) - 0.6 * (h_ut - 1.5);
  return std::max(pl_los, pl_nlos);
}

// --- terrestrial links --------------------------------------------------------

struct TerrestrialLink {
  std::size_t ue_index = 0;
  std::size_t bs_index = 0;
  double d_2d = 0.0;
  double d_3d = 0.0;
  bool los = false;
  double pathloss_db = 0.0;
  double shadow_db = 0.0;
  double gain_lin = 0.0;  // |h_kl|^2
};

/// Link-level draws, kept apart from geometry so tests can pin them.
struct LinkDraws {
  bool los = false;
  double shadow_db = 0.0;
};

inline LinkDraws draw_link_state(double d_2d, double shadow_sigma_db, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  LinkDraws d;
  d.los = u01(rng) < los_probability(d_2d);
  d.shadow_db = shadow_sigma_db * normal(rng);
  return d;
}

inline TerrestrialLink terrestrial_link(const Position& bs, const Position& ue, const NetworkConfig& config,
                                        const LinkDraws& draws) {
  TerrestrialLink l;
  l.d_2d = distance_2d(bs, ue);
  l.d_3d = distance_3d(bs, ue);
  l.los = draws.los;
  l.shadow_db = draws.shadow_db;
  l.pathloss_db = uma_pathloss_db(l.d_2d, l.d_3d, config.carrier_freq_hz, l.los, bs.h, ue.h);
  l.gain_lin = db_to_linear(config.g_bs_db + config.g_ue_db - l.pathloss_db - l.shadow_db);
  return l;
}

/// Draws LoS state and shadowing from `rng`, then composes |h_kl|^2.
inline TerrestrialLink terrestrial_gain(const Position& bs, const Position& ue, const NetworkConfig& config,
                                        Rng& rng) {
  const auto draws = draw_link_state(distance_2d(bs, ue), config.shadow_sigma_db, rng);
  return terrestrial_link(bs, ue, config, draws);
}

// --- RIS reflection -------------------------------------------------------------

struct RisGainModel {
  double rho = 1.0;
  std::optional<int> phase_bits;  // empty: continuous
};

/// Largest residual phase error of a b-bit phase shifter: pi / 2^b.
inline double max_phase_error(int bits) { return std::numbers::pi / std::ldexp(1.0, bits); }

/// |Phi_k|: coherent sum of n_k unit reflections. With continuous phases the
/// residuals are zero and the result is rho*n_k. With `phase_errors` the sum is
/// evaluated directly, each error clamped to the quantizer's range.
inline double ris_reflection_gain(double n_k, const RisGainModel& model,
                                  std::optional<std::span<const double>> phase_errors = std::nullopt) {
  if (n_k < 1.0) throw std::invalid_argument("ris_reflection_gain: n_k >= 1 required");
  if (!phase_errors || !model.phase_bits) return model.rho * n_k;
  const double lim = max_phase_error(*model.phase_bits);
  std::complex<double> sum{0.0, 0.0};
  for (double e : *phase_errors) {
    const double d = std::clamp(e, -lim, lim);
    sum += std::polar(model.rho, -d);
  }
  return std::abs(sum);
}

/// Residual phase after rounding an ideal phase to the b-bit grid {0, 2pi/2^b, ...}.
inline double quantization_residual(double ideal_phase, int bits) {
  const double step = 2.0 * std::numbers::pi / std::ldexp(1.0, bits);
  const double q = std::round(ideal_phase / step) * step;
  return std::remainder(ideal_phase - q, 2.0 * std::numbers::pi);
}

// --- beyond-cell links ------------------------------------------------------------

/// Cosecant-scaled zenith attenuation.
inline double atmospheric_attenuation_db(double f_hz, double elevation_rad, const NetworkConfig& config) {
  if (elevation_rad <= 0.0) throw std::domain_error("below horizon");
  if (elevation_rad > std::numbers::pi / 2.0 + 1e-12) throw std::domain_error("elevation above zenith");
  return config.zenith_atten_at(f_hz) / std::sin(elevation_rad);
}

inline double elevation_rad(const Position& ground, const Position& air) {
  return std::atan2(air.h - ground.h, distance_2d(ground, air));
}

struct BeyondCellLink {
  std::size_t ue_index = 0;
  double d_cs_haps = 0.0;
  double d_haps_ue = 0.0;
  double pl_cascaded_db = 0.0;  // FSPL(CS-HAPS) + FSPL(HAPS-UE)
  double atten_db = 0.0;        // both legs
  double gain_lin = 0.0;        // |h_k|^2
};

/// Effective CS -> HAPS -> UE gain, LoS on both legs, no fading draw.
inline BeyondCellLink beyond_cell_gain(std::size_t ue_index, const Topology& topo, const NetworkConfig& config) {
  const auto& ue = topo.ues.at(ue_index);
  BeyondCellLink l;
  l.ue_index = ue_index;
  l.d_cs_haps = distance_3d(topo.cs_pos, topo.haps_pos);
  l.d_haps_ue = distance_3d(topo.haps_pos, ue);
  l.pl_cascaded_db = fspl_db(l.d_cs_haps, config.carrier_freq_hz) + fspl_db(l.d_haps_ue, config.carrier_freq_hz);
  l.atten_db = atmospheric_attenuation_db(config.carrier_freq_hz, elevation_rad(topo.cs_pos, topo.haps_pos), config) +
               atmospheric_attenuation_db(config.carrier_freq_hz, elevation_rad(ue, topo.haps_pos), config);
  l.gain_lin = db_to_linear(config.g_cs_db + config.g_ue_db - l.pl_cascaded_db - l.atten_db);
  return l;
}

// --- channel snapshot -------------------------------------------------------------

/// Static channel snapshot of one scenario.
struct ChannelSet {
  std::size_t num_ues = 0;
  std::size_t num_bs = 0;
  std::vector<TerrestrialLink> links;  // row-major [ue][bs]
  std::vector<BeyondCellLink> beyond;  // per UE

  const TerrestrialLink& link(std::size_t ue, std::size_t bs) const { return links[ue * num_bs + bs]; }
  double gain(std::size_t ue, std::size_t bs) const { return link(ue, bs).gain_lin; }
};

/// Every link draws from the substream keyed by (seed, ue, bs), so the result
/// does not depend on evaluation order.
inline ChannelSet compute_channels(const Topology& topo, const NetworkConfig& config, std::uint64_t seed) {
  ChannelSet cs;
  cs.num_ues = topo.ues.size();
  cs.num_bs = topo.bs_sites.size();
  cs.links.reserve(cs.num_ues * cs.num_bs);
  for (std::size_t k = 0; k < cs.num_ues; ++k) {
    for (std::size_t l = 0; l < cs.num_bs; ++l) {
      Rng rng = make_stream(seed, {kStreamLinks, k, l});
      auto link = terrestrial_gain(topo.bs_sites[l], topo.ues[k], config, rng);
      link.ue_index = k;
      link.bs_index = l;
      cs.links.push_back(link);
    }
  }
  cs.beyond.reserve(cs.num_ues);
  for (std::size_t k = 0; k < cs.num_ues; ++k) cs.beyond.push_back(beyond_cell_gain(k, topo, config));
  return cs;
}

}  // namespace hapsris
