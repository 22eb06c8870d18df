// Plans one network drop with the default configuration and prints, per
// objective, what the beyond-cell UEs get.
//
//   plan_one_drop [seed]

#include <cstdio>
#include <cstdlib>

#include "hapsris/hapsris.hpp"

int main(int argc, char** argv) {
  using namespace hapsris;
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  const NetworkConfig config;

  const auto s = build_scenario(config, seed);
  std::printf("seed %llu: %zu UEs served by %d base stations, %zu beyond-cell\n",
              static_cast<unsigned long long>(seed), s.partition.k1.size(), config.num_bs, s.partition.k2.size());
  if (s.problem.size() == 0) return 0;
  if (!s.problem.feasible()) {
    std::printf("beyond-cell set cannot be served: %s\n", s.problem.infeasibility_reason().c_str());
    return 0;
  }

  for (auto kind : {Objective::sum_rate, Objective::max_min, Objective::min_ris, Objective::proportional}) {
    const auto a = solve(s.problem, kind);
    if (a.rates_bps.empty()) {
      std::printf("%-13s %s\n", to_string(kind), a.solver_diag.message.c_str());
      continue;
    }
    std::printf("%-13s sum %7.2f Mb/s  worst %5.2f Mb/s  units %8.0f  power %.3f W\n", to_string(kind),
                a.sum_rate() / 1e6, a.worst_rate() / 1e6, a.total_n(), a.total_p());
  }
  return 0;
}
