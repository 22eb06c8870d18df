#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hapsris/allocator.hpp"
#include "hapsris/association.hpp"
#include "hapsris/channel.hpp"
#include "hapsris/config.hpp"
#include "hapsris/scenario.hpp"

namespace hapsris {

/// Everything produced for one (config, seed): the intermediate objects are
/// kept so callers can inspect them; reports only use the metrics.
struct ScenarioState {
  Topology topology;
  ChannelSet channels;
  RateMatrix rates;
  Partition partition;
  AllocationProblem problem;
};

inline ScenarioState build_scenario(const NetworkConfig& config, std::uint64_t seed) {
  ScenarioState s;
  s.topology = generate_topology(config, seed);
  s.channels = compute_channels(s.topology, config, seed);
  s.rates = within_cell_rates(s.channels, config);
  s.partition = associate(s.rates, s.channels, config);
  s.problem = make_allocation_problem(s.channels, s.partition.k2, config);
  return s;
}

struct ObjectiveResult {
  Objective objective = Objective::sum_rate;
  std::string status;  // optimal | infeasible | max_iter | benchmark | no_k2
  int solver_iters = 0;
  double sum_rate_bps = 0.0;
  double mean_rate_bps = 0.0;
  double worst_rate_bps = 0.0;
  double total_n_units = 0.0;
  double total_p_watts = 0.0;
  int served_k2 = 0;
  double served_pct = 0.0;
  std::string message;

  bool has_rates() const { return status == "optimal" || status == "benchmark"; }
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::optional<double> axis_value;
  std::string config_hash;
  int num_ues = 0;
  int k1_count = 0;
  int k2_count = 0;
  double coverage_pct = 0.0;
  double k1_mean_rate_bps = 0.0;
  double k1_worst_rate_bps = 0.0;
  std::vector<ObjectiveResult> results;
};

inline ObjectiveResult summarize(const AllocationProblem& ap, const Allocation& a, Objective kind, int num_ues,
                                 int k1_count) {
  ObjectiveResult r;
  r.objective = kind;
  r.message = a.solver_diag.message;
  r.solver_iters = a.solver_diag.iterations;
  if (ap.size() == 0) {
    r.status = "no_k2";
  } else if (kind == Objective::proportional && a.ok()) {
    r.status = "benchmark";
  } else {
    r.status = gp::to_string(a.solver_diag.status);
  }
  if (r.has_rates()) {
    r.sum_rate_bps = a.sum_rate();
    r.mean_rate_bps = r.sum_rate_bps / static_cast<double>(ap.size());
    r.worst_rate_bps = a.worst_rate();
    r.total_n_units = a.total_n();
    r.total_p_watts = a.total_p();
    for (double rate : a.rates_bps)
      if (rate >= ap.r_th) ++r.served_k2;
  }
  r.served_pct = 100.0 * static_cast<double>(k1_count + r.served_k2) / static_cast<double>(num_ues);
  return r;
}

/// scenario -> channels -> partition -> allocation for each objective.
/// Infeasibility is recorded per objective, never thrown.
inline RunRecord run_scenario(const NetworkConfig& config, std::uint64_t seed, std::span<const Objective> objectives,
                              const gp::SolverOptions& opt = {}) {
  const auto s = build_scenario(config, seed);
  RunRecord rec;
  rec.seed = seed;
  rec.config_hash = config_hash(config);
  rec.num_ues = config.num_ues;
  rec.k1_count = static_cast<int>(s.partition.k1.size());
  rec.k2_count = static_cast<int>(s.partition.k2.size());
  rec.coverage_pct = 100.0 * rec.k1_count / static_cast<double>(rec.num_ues);
  if (!s.partition.k1.empty()) {
    double sum = 0.0, worst = std::numeric_limits<double>::infinity();
    for (const auto& d : s.partition.k1) {
      sum += d.rate_bps;
      worst = std::min(worst, d.rate_bps);
    }
    rec.k1_mean_rate_bps = sum / static_cast<double>(s.partition.k1.size());
    rec.k1_worst_rate_bps = worst;
  }
  for (Objective o : objectives) {
    const auto a = solve(s.problem, o, opt);
    rec.results.push_back(summarize(s.problem, a, o, rec.num_ues, rec.k1_count));
  }
  return rec;
}

// --- sweeps ----------------------------------------------------------------------------

enum class SweepAxis { bs_count, carrier_freq, n_max, r_min, p_cs_max };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::bs_count: return "bs-count";
    case SweepAxis::carrier_freq: return "carrier-freq";
    case SweepAxis::n_max: return "n-max";
    case SweepAxis::r_min: return "r-min";
    case SweepAxis::p_cs_max: return "p-cs-max";
  }
  return "?";
}

inline std::optional<SweepAxis> axis_from_string(const std::string& s) {
  for (auto a : {SweepAxis::bs_count, SweepAxis::carrier_freq, SweepAxis::n_max, SweepAxis::r_min, SweepAxis::p_cs_max})
    if (s == to_string(a)) return a;
  return std::nullopt;
}

/// Config at one sweep point. Units: count, Hz, units, bit/s, dBm.
/// The r-min axis moves the beyond-cell floor r_th; the terrestrial
/// association threshold stays put so the K2 set is shared across points.
inline NetworkConfig apply_axis(NetworkConfig c, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::bs_count:
      if (value < 0 || value != std::floor(value)) throw ConfigError("bs-count values must be non-negative integers");
      c.num_bs = static_cast<int>(value);
      c.l_max = std::max(c.l_max, c.num_bs);
      break;
    case SweepAxis::carrier_freq: c.carrier_freq_hz = value; break;
    case SweepAxis::n_max: c.n_max = value; break;
    case SweepAxis::r_min: c.r_th_bps = value; break;
    case SweepAxis::p_cs_max: c.p_cs_max_dbm = value; break;
  }
  c.validate();
  return c;
}

struct SweepSpec {
  SweepAxis axis = SweepAxis::bs_count;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  std::vector<Objective> objectives;

  void validate() const {
    if (values.empty() || seeds.empty() || objectives.empty())
      throw ConfigError("sweep needs non-empty values, seeds and objectives");
  }
};

/// Seeds 1..20: the default Monte-Carlo set.
inline std::vector<std::uint64_t> default_seeds(std::uint64_t base = 1, int count = 20) {
  std::vector<std::uint64_t> s;
  for (int i = 0; i < count; ++i) s.push_back(base + static_cast<std::uint64_t>(i));
  return s;
}

/// Default values per axis for the reproduction runs.
inline std::vector<double> default_axis_values(SweepAxis axis) {
  std::vector<double> v;
  switch (axis) {
    case SweepAxis::bs_count:
      for (int l = 1; l <= 24; ++l) v.push_back(l);
      break;
    case SweepAxis::carrier_freq: v = {2e9, 10e9, 20e9}; break;
    case SweepAxis::n_max:
      for (double n = 200'000; n <= 600'000; n += 50'000) v.push_back(n);
      break;
    case SweepAxis::r_min:
      for (int r = 1; r <= 10; ++r) v.push_back(r * 1e6);
      break;
    case SweepAxis::p_cs_max:
      for (int p = 30; p <= 36; ++p) v.push_back(p);
      break;
  }
  return v;
}

struct Stat {
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Mean and sample standard deviation; summation in sorted order so the
/// result does not depend on the order of `xs`.
inline Stat stat_of(std::vector<double> xs) {
  Stat s;
  s.count = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / s.count;
  if (s.count > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (s.count - 1));
  }
  return s;
}

struct AggregateRow {
  double axis_value = 0.0;
  Objective objective = Objective::sum_rate;
  int runs = 0;
  int solved = 0;  // runs with rates (optimal or benchmark)
  Stat coverage_pct, served_pct, sum_rate_bps, mean_rate_bps, worst_rate_bps, total_n_units, total_p_watts;
  Stat k1_mean_rate_bps, k1_worst_rate_bps;
};

struct Report {
  std::optional<SweepAxis> axis;
  std::vector<RunRecord> records;  // ordered by (axis index, seed)
  std::vector<AggregateRow> aggregates;
};

inline std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records, std::span<const double> values,
                                           std::span<const Objective> objectives) {
  std::vector<AggregateRow> rows;
  for (double v : values) {
    for (std::size_t oi = 0; oi < objectives.size(); ++oi) {
      AggregateRow row;
      row.axis_value = v;
      row.objective = objectives[oi];
      std::vector<double> cov, srv, sum, mean, worst, tn, tp, k1m, k1w;
      for (const auto& r : records) {
        if (!r.axis_value || *r.axis_value != v) continue;
        const auto& o = r.results.at(oi);
        ++row.runs;
        cov.push_back(r.coverage_pct);
        srv.push_back(o.served_pct);
        if (r.k1_count > 0) {
          k1m.push_back(r.k1_mean_rate_bps);
          k1w.push_back(r.k1_worst_rate_bps);
        }
        if (!o.has_rates()) continue;
        ++row.solved;
        sum.push_back(o.sum_rate_bps);
        mean.push_back(o.mean_rate_bps);
        worst.push_back(o.worst_rate_bps);
        tn.push_back(o.total_n_units);
        tp.push_back(o.total_p_watts);
      }
      row.coverage_pct = stat_of(cov);
      row.served_pct = stat_of(srv);
      row.sum_rate_bps = stat_of(sum);
      row.mean_rate_bps = stat_of(mean);
      row.worst_rate_bps = stat_of(worst);
      row.total_n_units = stat_of(tn);
      row.total_p_watts = stat_of(tp);
      row.k1_mean_rate_bps = stat_of(k1m);
      row.k1_worst_rate_bps = stat_of(k1w);
      rows.push_back(row);
    }
  }
  return rows;
}

/// values x seeds, each cell running every objective. Cells are independent
/// and may run on up to `jobs` threads; output order is fixed.
inline Report sweep(const SweepSpec& spec, const NetworkConfig& base, int jobs = 1,
                    const gp::SolverOptions& opt = {}) {
  spec.validate();
  struct Cell {
    double value;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  std::vector<NetworkConfig> configs;
  for (double v : spec.values) configs.push_back(apply_axis(base, spec.axis, v));
  for (double v : spec.values)
    for (auto s : spec.seeds) cells.push_back({v, s});

  Report rep;
  rep.axis = spec.axis;
  rep.records.resize(cells.size());
  auto run_cell = [&](std::size_t i) {
    const auto vi = i / spec.seeds.size();
    auto r = run_scenario(configs[vi], cells[i].seed, spec.objectives, opt);
    r.axis_value = cells[i].value;
    rep.records[i] = std::move(r);
  };
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> workers;
    for (int w = 0; w < jobs; ++w)
      workers.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
      }));
    for (auto& f : workers) f.get();
  }
  rep.aggregates = aggregate(rep.records, spec.values, spec.objectives);
  return rep;
}

}  // namespace hapsris
