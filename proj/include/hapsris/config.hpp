#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hapsris/units.hpp"

namespace hapsris {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class BsPowerMode { per_subcarrier, total_split };
enum class ProportionalWeighting { inverse_amplitude, inverse_power };

/// Every scenario, channel and solver parameter of a run. Units are carried in
/// the field names; dBm/dB fields are converted at the point of use.
struct NetworkConfig {
  // scenario
  double area_side_m = 10'000.0;
  int num_ues = 100;
  double min_ue_separation_m = 100.0;
  int num_bs = 4;
  int l_max = 4;
  double bs_height_m = 25.0;
  double ue_height_m = 1.5;
  double haps_altitude_m = 20'000.0;
  std::optional<double> cs_x_m;  // unset: area centre, below the HAPS
  std::optional<double> cs_y_m;
  double cs_height_m = 0.0;

  // radio
  double carrier_freq_hz = 2e9;
  double bw_bs_hz = 50e6;
  double bw_ue_hz = 2e6;
  double noise_psd_dbm_hz = -174.0;
  double g_ue_db = 0.0;

  // terrestrial
  double p_bs_dbm = 35.0;
  BsPowerMode bs_power_mode = BsPowerMode::per_subcarrier;
  double g_bs_db = 8.0;
  double shadow_sigma_db = 8.0;
  double r_min_bps = 2e6;

  // beyond-cell
  double g_cs_db = 43.2;
  double rho = 1.0;
  std::optional<int> phase_bits;  // unset: continuous phases
  /// Zenith dry-air attenuation per carrier frequency, computed from the ITU-R
  /// P.676 approximate dry-air model for the mean annual global reference
  /// atmosphere at sea level (1013.25 hPa, 15 C).
  std::map<double, double> zenith_atten_db = default_zenith_table();

  // allocation
  double r_th_bps = 2e6;
  double p_cs_max_dbm = 33.0;
  double p_k_min_dbm = 15.0;
  double p_k_max_dbm = 20.0;
  double n_max = 200'000.0;
  double n_k_min = 1'000.0;
  double n_k_max = 10'000.0;
  ProportionalWeighting proportional_weighting = ProportionalWeighting::inverse_amplitude;

  std::uint64_t seed = 1;

  static std::map<double, double> default_zenith_table() {
    return {{0.5e9, 0.015913}, {1e9, 0.028041},  {2e9, 0.034714},  {3.5e9, 0.036910},
            {6e9, 0.038422},   {10e9, 0.041268}, {15e9, 0.047527}, {20e9, 0.058467},
            {28e9, 0.093370},  {30e9, 0.107727}, {40e9, 0.265921}};
  }

  double cs_x() const { return cs_x_m.value_or(area_side_m / 2.0); }
  double cs_y() const { return cs_y_m.value_or(area_side_m / 2.0); }

  int subcarriers_per_bs() const { return static_cast<int>(std::lround(bw_bs_hz / bw_ue_hz)); }

  /// Per-subcarrier terrestrial transmit power in watts.
  double bs_power_watts() const {
    const double total = dbm_to_watts(p_bs_dbm);
    return bs_power_mode == BsPowerMode::per_subcarrier ? total : total / subcarriers_per_bs();
  }

  double noise_watts() const { return dbm_to_watts(noise_psd_dbm_hz) * bw_ue_hz; }

  /// Zenith attenuation at `freq_hz`, linear in frequency between table entries.
  double zenith_atten_at(double freq_hz) const {
    if (zenith_atten_db.empty()) return 0.0;
    auto hi = zenith_atten_db.lower_bound(freq_hz);
    if (hi != zenith_atten_db.end() && hi->first == freq_hz) return hi->second;
    if (hi == zenith_atten_db.begin() || hi == zenith_atten_db.end())
      throw ConfigError("zenith_atten_db has no entry bracketing " + std::to_string(freq_hz) + " Hz");
    auto lo = std::prev(hi);
    const double w = (freq_hz - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
  }

  /// All violated invariants, empty when the config is usable.
  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    auto need = [&](bool ok, const std::string& msg) {
      if (!ok) out.push_back(msg);
    };
    need(area_side_m > 0, "area_side_m must be > 0");
    need(num_ues > 0, "num_ues must be > 0");
    need(min_ue_separation_m > 0, "min_ue_separation_m must be > 0");
    need(num_bs >= 0, "num_bs must be >= 0");
    need(l_max > 0, "l_max must be > 0");
    need(num_bs <= l_max, "num_bs must be <= l_max");
    need(num_bs <= num_ues, "num_bs must be <= num_ues");
    need(bs_height_m > 0 && ue_height_m > 0 && haps_altitude_m > 0, "heights must be > 0");
    need(cs_height_m >= 0 && cs_height_m < haps_altitude_m, "cs_height_m must be in [0, haps_altitude_m)");
    need(carrier_freq_hz > 0, "carrier_freq_hz must be > 0");
    need(bw_bs_hz > 0 && bw_ue_hz > 0, "bandwidths must be > 0");
    if (bw_bs_hz > 0 && bw_ue_hz > 0) {
      const double ratio = bw_bs_hz / bw_ue_hz;
      need(ratio >= 1 && std::abs(ratio - std::round(ratio)) < 1e-9,
           "bw_bs_hz / bw_ue_hz must be a positive integer");
    }
    need(shadow_sigma_db >= 0, "shadow_sigma_db must be >= 0");
    need(r_min_bps >= 0 && r_th_bps >= 0, "rate thresholds must be >= 0");
    need(rho > 0 && rho <= 1, "rho must be in (0, 1]");
    need(!phase_bits || *phase_bits >= 1, "phase_bits must be >= 1 when set");
    need(p_k_min_dbm <= p_k_max_dbm, "p_k_min_dbm must be <= p_k_max_dbm");
    need(n_max > 0, "n_max must be > 0");
    need(n_k_min > 0 && n_k_min <= n_k_max, "need 0 < n_k_min <= n_k_max");
    for (const auto& [f, a] : zenith_atten_db)
      need(f > 0 && a >= 0, "zenith_atten_db entries need frequency > 0 and attenuation >= 0");
    const double disc = num_ues * std::numbers::pi * std::pow(min_ue_separation_m / 2.0, 2);
    need(disc < area_side_m * area_side_m, "UE packing infeasible: K*pi*(sep/2)^2 >= area");
    return out;
  }

  void validate() const {
    auto p = problems();
    if (p.empty()) return;
    std::ostringstream os;
    os << "invalid config:";
    for (const auto& s : p) os << "\n  " << s;
    throw ConfigError(os.str());
  }
};

// ---------------------------------------------------------------------------
// JSON (de)serialization. The file is sectioned; every key is optional and
// falls back to the default, but unknown keys are rejected.

namespace detail {

inline std::string freq_key(double f) {
  std::ostringstream os;
  os.precision(17);
  os << f;
  return os.str();
}

template <typename Json, typename T>
void read_opt(const Json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).template get<T>();
}

inline std::map<std::string, std::vector<std::string>> config_schema() {
  return {
      {"scenario",
       {"area_side_m", "num_ues", "min_ue_separation_m", "num_bs", "l_max", "bs_height_m",
        "ue_height_m", "haps_altitude_m", "cs_x_m", "cs_y_m", "cs_height_m"}},
      {"radio", {"carrier_freq_hz", "bw_bs_hz", "bw_ue_hz", "noise_psd_dbm_hz", "g_ue_db"}},
      {"terrestrial", {"p_bs_dbm", "bs_power_mode", "g_bs_db", "shadow_sigma_db", "r_min_bps"}},
      {"beyond_cell", {"g_cs_db", "rho", "phase_bits", "zenith_atten_db"}},
      {"allocation",
       {"r_th_bps", "p_cs_max_dbm", "p_k_min_dbm", "p_k_max_dbm", "n_max", "n_k_min", "n_k_max",
        "proportional_weighting"}},
  };
}

}  // namespace detail

inline const char* to_string(BsPowerMode m) {
  return m == BsPowerMode::per_subcarrier ? "per_subcarrier" : "total_split";
}
inline const char* to_string(ProportionalWeighting w) {
  return w == ProportionalWeighting::inverse_amplitude ? "inverse_amplitude" : "inverse_power";
}

namespace detail {

template <typename Json>
void read_enum(const Json& j, const char* key, BsPowerMode& dst) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).template get<std::string>();
  if (v == "per_subcarrier") dst = BsPowerMode::per_subcarrier;
  else if (v == "total_split") dst = BsPowerMode::total_split;
  else throw ConfigError(std::string(key) + ": expected per_subcarrier|total_split, got '" + v + "'");
}

template <typename Json>
void read_enum(const Json& j, const char* key, ProportionalWeighting& dst) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).template get<std::string>();
  if (v == "inverse_amplitude") dst = ProportionalWeighting::inverse_amplitude;
  else if (v == "inverse_power") dst = ProportionalWeighting::inverse_power;
  else throw ConfigError(std::string(key) + ": expected inverse_amplitude|inverse_power, got '" + v + "'");
}

}  // namespace detail

/// Canonical form: every field materialized, sections and keys in a fixed order.
inline nlohmann::ordered_json to_json(const NetworkConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  auto& s = j["scenario"];
  s["area_side_m"] = c.area_side_m;
  s["num_ues"] = c.num_ues;
  s["min_ue_separation_m"] = c.min_ue_separation_m;
  s["num_bs"] = c.num_bs;
  s["l_max"] = c.l_max;
  s["bs_height_m"] = c.bs_height_m;
  s["ue_height_m"] = c.ue_height_m;
  s["haps_altitude_m"] = c.haps_altitude_m;
  s["cs_x_m"] = c.cs_x();
  s["cs_y_m"] = c.cs_y();
  s["cs_height_m"] = c.cs_height_m;
  auto& r = j["radio"];
  r["carrier_freq_hz"] = c.carrier_freq_hz;
  r["bw_bs_hz"] = c.bw_bs_hz;
  r["bw_ue_hz"] = c.bw_ue_hz;
  r["noise_psd_dbm_hz"] = c.noise_psd_dbm_hz;
  r["g_ue_db"] = c.g_ue_db;
  auto& t = j["terrestrial"];
  t["p_bs_dbm"] = c.p_bs_dbm;
  t["bs_power_mode"] = to_string(c.bs_power_mode);
  t["g_bs_db"] = c.g_bs_db;
  t["shadow_sigma_db"] = c.shadow_sigma_db;
  t["r_min_bps"] = c.r_min_bps;
  auto& b = j["beyond_cell"];
  b["g_cs_db"] = c.g_cs_db;
  b["rho"] = c.rho;
  b["phase_bits"] = c.phase_bits ? nlohmann::ordered_json(*c.phase_bits) : nlohmann::ordered_json(nullptr);
  auto& z = b["zenith_atten_db"];
  z = nlohmann::ordered_json::object();
  for (const auto& [f, a] : c.zenith_atten_db) z[detail::freq_key(f)] = a;
  auto& a = j["allocation"];
  a["r_th_bps"] = c.r_th_bps;
  a["p_cs_max_dbm"] = c.p_cs_max_dbm;
  a["p_k_min_dbm"] = c.p_k_min_dbm;
  a["p_k_max_dbm"] = c.p_k_max_dbm;
  a["n_max"] = c.n_max;
  a["n_k_min"] = c.n_k_min;
  a["n_k_max"] = c.n_k_max;
  a["proportional_weighting"] = to_string(c.proportional_weighting);
  return j;
}

/// Parses a sectioned config. Throws ConfigError listing every unknown key,
/// and on any type or invariant violation.
template <typename Json>
NetworkConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  const auto schema = detail::config_schema();
  std::vector<std::string> unknown;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "seed") continue;
    auto sec = schema.find(it.key());
    if (sec == schema.end()) {
      unknown.push_back(it.key());
      continue;
    }
    if (!it.value().is_object()) throw ConfigError("section '" + it.key() + "' must be an object");
    for (auto kt = it.value().begin(); kt != it.value().end(); ++kt) {
      const auto& keys = sec->second;
      if (std::find(keys.begin(), keys.end(), kt.key()) == keys.end())
        unknown.push_back(it.key() + "." + kt.key());
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }

  NetworkConfig c;
  const Json empty = Json::object();
  auto section = [&](const char* name) -> const Json& { return j.contains(name) ? j.at(name) : empty; };
  try {
    detail::read_opt(j, "seed", c.seed);
    const auto& s = section("scenario");
    detail::read_opt(s, "area_side_m", c.area_side_m);
    detail::read_opt(s, "num_ues", c.num_ues);
    detail::read_opt(s, "min_ue_separation_m", c.min_ue_separation_m);
    detail::read_opt(s, "num_bs", c.num_bs);
    detail::read_opt(s, "l_max", c.l_max);
    detail::read_opt(s, "bs_height_m", c.bs_height_m);
    detail::read_opt(s, "ue_height_m", c.ue_height_m);
    detail::read_opt(s, "haps_altitude_m", c.haps_altitude_m);
    if (s.contains("cs_x_m") && !s.at("cs_x_m").is_null()) c.cs_x_m = s.at("cs_x_m").template get<double>();
    if (s.contains("cs_y_m") && !s.at("cs_y_m").is_null()) c.cs_y_m = s.at("cs_y_m").template get<double>();
    detail::read_opt(s, "cs_height_m", c.cs_height_m);
    const auto& r = section("radio");
    detail::read_opt(r, "carrier_freq_hz", c.carrier_freq_hz);
    detail::read_opt(r, "bw_bs_hz", c.bw_bs_hz);
    detail::read_opt(r, "bw_ue_hz", c.bw_ue_hz);
    detail::read_opt(r, "noise_psd_dbm_hz", c.noise_psd_dbm_hz);
    detail::read_opt(r, "g_ue_db", c.g_ue_db);
    const auto& t = section("terrestrial");
    detail::read_opt(t, "p_bs_dbm", c.p_bs_dbm);
    detail::read_enum(t, "bs_power_mode", c.bs_power_mode);
    detail::read_opt(t, "g_bs_db", c.g_bs_db);
    detail::read_opt(t, "shadow_sigma_db", c.shadow_sigma_db);
    detail::read_opt(t, "r_min_bps", c.r_min_bps);
    const auto& b = section("beyond_cell");
    detail::read_opt(b, "g_cs_db", c.g_cs_db);
    detail::read_opt(b, "rho", c.rho);
    if (b.contains("phase_bits") && !b.at("phase_bits").is_null())
      c.phase_bits = b.at("phase_bits").template get<int>();
    if (b.contains("zenith_atten_db")) {
      c.zenith_atten_db.clear();
      const auto& z = b.at("zenith_atten_db");
      if (!z.is_object()) throw ConfigError("beyond_cell.zenith_atten_db must be an object");
      for (auto it = z.begin(); it != z.end(); ++it) {
        std::size_t used = 0;
        const double f = std::stod(it.key(), &used);
        if (used != it.key().size()) throw ConfigError("bad frequency key '" + it.key() + "'");
        c.zenith_atten_db[f] = it.value().template get<double>();
      }
    }
    const auto& a = section("allocation");
    detail::read_opt(a, "r_th_bps", c.r_th_bps);
    detail::read_opt(a, "p_cs_max_dbm", c.p_cs_max_dbm);
    detail::read_opt(a, "p_k_min_dbm", c.p_k_min_dbm);
    detail::read_opt(a, "p_k_max_dbm", c.p_k_max_dbm);
    detail::read_opt(a, "n_max", c.n_max);
    detail::read_opt(a, "n_k_min", c.n_k_min);
    detail::read_opt(a, "n_k_max", c.n_k_max);
    detail::read_enum(a, "proportional_weighting", c.proportional_weighting);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError(std::string("config value error: ") + e.what());
  }
  c.validate();
  return c;
}

inline NetworkConfig parse_config(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

inline std::string serialize_config(const NetworkConfig& c) { return to_json(c).dump(2) + "\n"; }

/// 64-bit FNV-1a over the canonical serialization, as 16 hex digits.
inline std::string config_hash(const NetworkConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hapsris
