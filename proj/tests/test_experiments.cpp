#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hapsris/hapsris.hpp"

using namespace hapsris;

namespace {
const std::vector<Objective> kAll{Objective::sum_rate, Objective::max_min, Objective::min_ris, Objective::proportional};
}

TEST(RunScenario, NoBaseStationsMeansNoCoverage) {
  NetworkConfig c;
  c.num_bs = 0;
  const auto r = run_scenario(c, 1, kAll);
  EXPECT_EQ(r.k1_count, 0);
  EXPECT_EQ(r.k2_count, 100);
  EXPECT_EQ(r.coverage_pct, 0.0);
}

TEST(RunScenario, UnitBudgetBelowFloorsIsInfeasibleForAll) {
  NetworkConfig c;
  c.n_max = 5000;  // fewer than n_k_min for every K2 UE
  const auto r = run_scenario(c, 1, kAll);
  ASSERT_GT(r.k2_count, 5);
  for (const auto& o : r.results) EXPECT_EQ(o.status, "infeasible") << to_string(o.objective);
}

TEST(RunScenario, CoverageIsK1Share) {
  NetworkConfig c;
  const auto r = run_scenario(c, 4, std::vector<Objective>{Objective::min_ris});
  EXPECT_EQ(r.k1_count + r.k2_count, c.num_ues);
  EXPECT_DOUBLE_EQ(r.coverage_pct, 100.0 * r.k1_count / c.num_ues);
  const auto& o = r.results.at(0);
  ASSERT_EQ(o.status, "optimal");
  EXPECT_DOUBLE_EQ(o.served_pct, 100.0);  // min-ris meets every floor
}

TEST(RunScenario, Deterministic) {
  NetworkConfig c;
  const auto a = run_scenario(c, 3, kAll), b = run_scenario(c, 3, kAll);
  ASSERT_EQ(a.results.size(), b.results.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    EXPECT_EQ(a.results[i].sum_rate_bps, b.results[i].sum_rate_bps);
    EXPECT_EQ(a.results[i].total_n_units, b.results[i].total_n_units);
    EXPECT_EQ(a.results[i].solver_iters, b.results[i].solver_iters);
  }
  EXPECT_EQ(a.config_hash, b.config_hash);
}

TEST(Sweep, CoverageGrowsWithBsCountAndFallsWithFrequency) {
  SweepSpec spec;
  spec.axis = SweepAxis::bs_count;
  spec.values = {1, 2, 4, 8, 12};
  spec.seeds = default_seeds(1, 6);
  spec.objectives = {};
  NetworkConfig base;
  std::map<double, std::vector<double>> cov_by_freq;
  for (double f : {2e9, 10e9, 20e9}) {
    base.carrier_freq_hz = f;
    spec.objectives = {Objective::proportional};
    const auto rep = sweep(spec, base, 4);
    double prev = -1;
    for (const auto& row : rep.aggregates) {
      EXPECT_GE(row.coverage_pct.mean, prev);
      prev = row.coverage_pct.mean;
      cov_by_freq[row.axis_value].push_back(row.coverage_pct.mean);
    }
  }
  for (const auto& [l, covs] : cov_by_freq) {
    EXPECT_GE(covs[0], covs[1]) << "L=" << l;
    EXPECT_GE(covs[1], covs[2]) << "L=" << l;
  }
}

TEST(Sweep, SumRateRisesWithUnitBudget) {
  SweepSpec spec;
  spec.axis = SweepAxis::n_max;
  spec.values = default_axis_values(SweepAxis::n_max);
  spec.seeds = {1, 3, 4, 5};
  spec.objectives = {Objective::sum_rate};
  const auto rep = sweep(spec, NetworkConfig{}, 4);
  double prev = 0;
  for (const auto& row : rep.aggregates) {
    ASSERT_EQ(row.solved, 4);
    EXPECT_GE(row.mean_rate_bps.mean, prev * (1 - 1e-9));
    prev = row.mean_rate_bps.mean;
  }
}

TEST(Sweep, MinRisUnitsRiseWithRateFloor) {
  SweepSpec spec;
  spec.axis = SweepAxis::r_min;
  spec.values = {1e6, 1.5e6, 2e6, 2.5e6};
  spec.seeds = {1, 5};
  spec.objectives = {Objective::min_ris};
  NetworkConfig base;
  base.n_max = 600000;
  const auto rep = sweep(spec, base, 2);
  double prev = 0;
  for (const auto& row : rep.aggregates) {
    ASSERT_EQ(row.solved, 2) << row.axis_value;
    EXPECT_GT(row.total_n_units.mean, prev);
    prev = row.total_n_units.mean;
  }
}

TEST(Sweep, JobsDoNotChangeResults) {
  SweepSpec spec;
  spec.axis = SweepAxis::p_cs_max;
  spec.values = {30, 33};
  spec.seeds = {1, 2, 3};
  spec.objectives = {Objective::sum_rate, Objective::proportional};
  const auto a = sweep(spec, NetworkConfig{}, 1), b = sweep(spec, NetworkConfig{}, 3);
  RunManifest m;
  EXPECT_EQ(to_csv(a), to_csv(b));
  EXPECT_EQ(to_json(a, m).dump(), to_json(b, m).dump());
}

TEST(Aggregate, PermutationInvariantInSeedOrder) {
  SweepSpec spec;
  spec.axis = SweepAxis::carrier_freq;
  spec.values = {2e9};
  spec.seeds = {1, 2, 3, 4, 5, 6};
  spec.objectives = {Objective::proportional};
  auto rep = sweep(spec, NetworkConfig{}, 2);
  auto shuffled = rep.records;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto a = aggregate(rep.records, spec.values, spec.objectives);
  const auto b = aggregate(shuffled, spec.values, spec.objectives);
  EXPECT_EQ(a[0].coverage_pct.mean, b[0].coverage_pct.mean);
  EXPECT_EQ(a[0].coverage_pct.stddev, b[0].coverage_pct.stddev);
  EXPECT_EQ(a[0].sum_rate_bps.mean, b[0].sum_rate_bps.mean);
}

TEST(Aggregate, StatOfKnownSample) {
  const auto s = stat_of({2, 4, 4, 4, 5, 5, 7, 9});
  EXPECT_EQ(s.count, 8);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_NEAR(s.stddev, std::sqrt(32.0 / 7), 1e-12);
}

TEST(ApplyAxis, UnitsAndValidation) {
  NetworkConfig c;
  EXPECT_EQ(apply_axis(c, SweepAxis::bs_count, 9).num_bs, 9);
  EXPECT_EQ(apply_axis(c, SweepAxis::bs_count, 9).l_max, 9);
  EXPECT_EQ(apply_axis(c, SweepAxis::carrier_freq, 10e9).carrier_freq_hz, 10e9);
  EXPECT_EQ(apply_axis(c, SweepAxis::r_min, 3e6).r_th_bps, 3e6);
  EXPECT_EQ(apply_axis(c, SweepAxis::r_min, 3e6).r_min_bps, c.r_min_bps);
  EXPECT_THROW(apply_axis(c, SweepAxis::bs_count, 2.5), ConfigError);
  EXPECT_THROW(apply_axis(c, SweepAxis::n_max, -1), ConfigError);
}

TEST(Config, RoundTripIsCanonical) {
  NetworkConfig c;
  c.num_bs = 3;
  c.phase_bits = 2;
  c.bs_power_mode = BsPowerMode::total_split;
  const auto text = serialize_config(c);
  const auto back = parse_config(text);
  EXPECT_EQ(serialize_config(back), text);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(back.phase_bits, 2);
  EXPECT_EQ(back.zenith_atten_db, c.zenith_atten_db);
}

TEST(Config, PartialFileMaterializesDefaults) {
  const auto c = parse_config(R"({"scenario": {"num_bs": 2}, "seed": 9})");
  EXPECT_EQ(c.num_bs, 2);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.num_ues, 100);
  EXPECT_EQ(c.p_cs_max_dbm, 33.0);
}

TEST(Config, UnknownKeysAreListed) {
  try {
    parse_config(R"({"scenario": {"num_bss": 2}, "radios": {}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("scenario.num_bss"), std::string::npos);
    EXPECT_NE(msg.find("radios"), std::string::npos);
  }
}

TEST(Config, BadValuesRejected) {
  EXPECT_THROW(parse_config(R"({"terrestrial": {"bs_power_mode": "total"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"beyond_cell": {"rho": 1.5}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"radio": {"bw_ue_hz": 3e6}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"scenario": {"num_ues": "many"}})"), ConfigError);
  EXPECT_THROW(parse_config("not json"), ConfigError);
}

TEST(Report, CsvHasFixedColumnsAndOneRowPerObjective) {
  Report rep;
  rep.records.push_back(run_scenario(NetworkConfig{}, 1, kAll));
  const auto csv = to_csv(rep);
  const auto header = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(header,
            "seed,axis_value,objective,k1_count,k2_count,coverage_pct,served_pct,sum_rate_bps,mean_rate_bps,"
            "worst_rate_bps,total_n_units,total_p_watts,solver_status,solver_iters");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_NE(csv.find("e+07"), std::string::npos);  // full-precision scientific floats
}
