#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hapsris/association.hpp"
#include "hapsris/channel.hpp"
#include "hapsris/config.hpp"
#include "hapsris/gp.hpp"
#include "hapsris/units.hpp"

namespace hapsris {

enum class Objective { sum_rate, max_min, min_ris, proportional };

inline const char* to_string(Objective o) {
  switch (o) {
    case Objective::sum_rate: return "sum-rate";
    case Objective::max_min: return "max-min";
    case Objective::min_ris: return "min-ris";
    case Objective::proportional: return "proportional";
  }
  return "?";
}

/// Human-readable objective label used in reports.
inline const char* objective_label(Objective o) {
  switch (o) {
    case Objective::sum_rate: return "sum-rate (prod gamma maximized)";
    case Objective::max_min: return "max-min (t maximized)";
    case Objective::min_ris: return "min-ris (sum N minimized)";
    case Objective::proportional: return "proportional benchmark";
  }
  return "?";
}

inline std::optional<Objective> objective_from_string(const std::string& s) {
  if (s == "sum-rate") return Objective::sum_rate;
  if (s == "max-min") return Objective::max_min;
  if (s == "min-ris") return Objective::min_ris;
  if (s == "proportional") return Objective::proportional;
  return std::nullopt;
}

/// Beyond-cell SNR with coherent RIS gain: p * |h|^2 * (rho n)^2 / noise.
inline double snr_beyond_cell(double p_watts, double n_units, double gain, const RisGainModel& model,
                              double noise_watts) {
  const double phi = model.rho * n_units;
  return p_watts * gain * phi * phi / noise_watts;
}

/// Resource-allocation instance over the K2 set. Powers in watts.
struct AllocationProblem {
  std::vector<double> gains;  // |h_k|^2
  double rho = 1.0;
  double n_max = 0.0;
  double n_k_min = 0.0;
  double n_k_max = 0.0;
  double p_k_min = 0.0;
  double p_k_max = 0.0;
  double p_cs_max = 0.0;
  double r_th = 0.0;
  double b_ue = 0.0;
  double noise = 0.0;
  ProportionalWeighting weighting = ProportionalWeighting::inverse_amplitude;

  std::size_t size() const { return gains.size(); }
  RisGainModel ris() const { return RisGainModel{rho, std::nullopt}; }

  /// SNR needed for r_th under the exact Shannon rate.
  double gamma_min() const { return std::exp2(r_th / b_ue) - 1.0; }

  double snr(std::size_t k, double p, double n) const { return snr_beyond_cell(p, n, gains[k], ris(), noise); }

  /// Necessary conditions for feasibility; empty string when they hold.
  std::string infeasibility_reason() const {
    const auto K = static_cast<double>(size());
    if (K * n_k_min > n_max) return "sum of n_k_min exceeds n_max";
    if (K * p_k_min > p_cs_max) return "sum of p_k_min exceeds p_cs_max";
    for (std::size_t k = 0; k < size(); ++k)
      if (rate_bps(snr(k, p_k_max, n_k_max), b_ue) < r_th)
        return "UE " + std::to_string(k) + " cannot reach r_th at (p_k_max, n_k_max)";
    return {};
  }
  bool feasible() const { return infeasibility_reason().empty(); }
};

inline AllocationProblem make_allocation_problem(const ChannelSet& channels, const std::vector<std::size_t>& k2,
                                                 const NetworkConfig& config) {
  AllocationProblem ap;
  for (auto k : k2) ap.gains.push_back(channels.beyond.at(k).gain_lin);
  ap.rho = config.rho;
  ap.n_max = config.n_max;
  ap.n_k_min = config.n_k_min;
  ap.n_k_max = config.n_k_max;
  ap.p_k_min = dbm_to_watts(config.p_k_min_dbm);
  ap.p_k_max = dbm_to_watts(config.p_k_max_dbm);
  ap.p_cs_max = dbm_to_watts(config.p_cs_max_dbm);
  ap.r_th = config.r_th_bps;
  ap.b_ue = config.bw_ue_hz;
  ap.noise = config.noise_watts();
  ap.weighting = config.proportional_weighting;
  return ap;
}

/// Solver summary carried alongside an allocation.
struct SolverDiag {
  gp::SolveStatus status = gp::SolveStatus::optimal;
  int iterations = 0;
  double kkt_residual = 0.0;
  double objective_value = 0.0;  // GP objective (log-domain value in log_objective)
  double log_objective = 0.0;
  std::string message;
};

struct Allocation {
  Objective objective_kind = Objective::sum_rate;
  std::vector<double> p_k_watts;
  std::vector<double> n_k_units;       // integers after rounding
  std::vector<double> n_k_continuous;  // solver output before rounding
  std::vector<double> snr;
  std::vector<double> rates_bps;         // exact B log2(1 + gamma)
  std::vector<double> approx_rates_bps;  // high-SNR B log2(gamma)
  SolverDiag solver_diag;

  bool ok() const { return solver_diag.status == gp::SolveStatus::optimal; }
  double total_n() const { return std::accumulate(n_k_units.begin(), n_k_units.end(), 0.0); }
  double total_p() const { return std::accumulate(p_k_watts.begin(), p_k_watts.end(), 0.0); }
  double sum_rate() const { return std::accumulate(rates_bps.begin(), rates_bps.end(), 0.0); }
  double worst_rate() const {
    return rates_bps.empty() ? 0.0 : *std::min_element(rates_bps.begin(), rates_bps.end());
  }
};

// --- GP builders ---------------------------------------------------------------
// Variables: p<k>, n<k> per UE, plus t for max-min. Per-UE boxes are the
// variable bounds; gamma_k is the monomial c_k p_k n_k^2 with
// c_k = |h_k|^2 rho^2 / noise.

namespace detail {

inline std::string pvar(std::size_t k) { return "p" + std::to_string(k); }
inline std::string nvar(std::size_t k) { return "n" + std::to_string(k); }

inline double log_snr_coeff(const AllocationProblem& ap, std::size_t k) {
  return std::log(ap.gains[k]) + 2.0 * std::log(ap.rho) - std::log(ap.noise);
}

inline gp::GpProgram base_program(const AllocationProblem& ap) {
  if (const auto why = ap.infeasibility_reason(); !why.empty())
    throw std::domain_error("allocation problem infeasible: " + why);
  gp::GpProgram g;
  for (std::size_t k = 0; k < ap.size(); ++k) {
    g.variables.push_back(pvar(k));
    g.variables.push_back(nvar(k));
    g.bounds[pvar(k)] = {ap.p_k_min, ap.p_k_max};
    g.bounds[nvar(k)] = {ap.n_k_min, ap.n_k_max};
  }
  const double gmin = ap.gamma_min();
  if (gmin > 0.0) {
    for (std::size_t k = 0; k < ap.size(); ++k) {
      // gamma_min / gamma_k <= 1
      g.constraints.push_back(gp::Posynomial{gp::Monomial::from_log(
          std::log(gmin) - log_snr_coeff(ap, k), {{pvar(k), -1.0}, {nvar(k), -2.0}})});
      g.constraint_labels.push_back("rate floor UE " + std::to_string(k));
    }
  }
  gp::Posynomial units, power;
  for (std::size_t k = 0; k < ap.size(); ++k) {
    units.terms.push_back(gp::Monomial::make(1.0 / ap.n_max, {{nvar(k), 1.0}}));
    power.terms.push_back(gp::Monomial::make(1.0 / ap.p_cs_max, {{pvar(k), 1.0}}));
  }
  g.constraints.push_back(std::move(units));
  g.constraint_labels.push_back("sum N <= N_max");
  g.constraints.push_back(std::move(power));
  g.constraint_labels.push_back("sum P <= P_max");
  return g;
}

}  // namespace detail

/// minimize prod_k 1/gamma_k (maximizes the high-SNR sum rate).
inline gp::GpProgram build_sum_rate_problem(const AllocationProblem& ap) {
  auto g = detail::base_program(ap);
  gp::Monomial obj;
  for (std::size_t k = 0; k < ap.size(); ++k) {
    obj.log_coefficient -= detail::log_snr_coeff(ap, k);
    obj.exponents[detail::pvar(k)] = -1.0;
    obj.exponents[detail::nvar(k)] = -2.0;
  }
  g.objective = gp::Posynomial{obj};
  return g;
}

/// minimize 1/t s.t. t/gamma_k <= 1; t is the common SNR level.
inline gp::GpProgram build_max_min_problem(const AllocationProblem& ap) {
  auto g = detail::base_program(ap);
  double hi = 0.0, lo = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ap.size(); ++k) {
    hi = std::max(hi, ap.snr(k, ap.p_k_max, ap.n_k_max));
    lo = std::min(lo, ap.snr(k, ap.p_k_min, ap.n_k_min));
  }
  // t never binds at these bounds: any allocation has min gamma in [lo, hi].
  g.variables.push_back("t");
  g.bounds["t"] = {0.5 * lo, 2.0 * hi};
  for (std::size_t k = 0; k < ap.size(); ++k) {
    g.constraints.push_back(gp::Posynomial{gp::Monomial::from_log(
        -detail::log_snr_coeff(ap, k), {{"t", 1.0}, {detail::pvar(k), -1.0}, {detail::nvar(k), -2.0}})});
    g.constraint_labels.push_back("t <= gamma UE " + std::to_string(k));
  }
  g.objective = gp::Posynomial{gp::Monomial::make(1.0, {{"t", -1.0}})};
  return g;
}

/// Second stage of max-min: among allocations whose SNRs all reach
/// `t_floor`, pick the one maximizing the high-SNR sum rate. The max-min
/// optimum alone leaves every non-worst UE's resources undetermined.
inline gp::GpProgram build_max_min_refinement(const AllocationProblem& ap, double t_floor) {
  auto g = build_sum_rate_problem(ap);
  for (std::size_t k = 0; k < ap.size(); ++k) {
    g.constraints.push_back(gp::Posynomial{gp::Monomial::from_log(
        std::log(t_floor) - detail::log_snr_coeff(ap, k), {{detail::pvar(k), -1.0}, {detail::nvar(k), -2.0}})});
    g.constraint_labels.push_back("gamma UE " + std::to_string(k) + " >= t*");
  }
  return g;
}

/// minimize sum_k n_k with the same constraint set.
inline gp::GpProgram build_min_ris_problem(const AllocationProblem& ap) {
  auto g = detail::base_program(ap);
  gp::Posynomial obj;
  for (std::size_t k = 0; k < ap.size(); ++k) obj.terms.push_back(gp::Monomial::make(1.0, {{detail::nvar(k), 1.0}}));
  g.objective = std::move(obj);
  return g;
}

inline gp::GpProgram build_problem(const AllocationProblem& ap, Objective kind) {
  switch (kind) {
    case Objective::sum_rate: return build_sum_rate_problem(ap);
    case Objective::max_min: return build_max_min_problem(ap);
    case Objective::min_ris: return build_min_ris_problem(ap);
    case Objective::proportional: break;
  }
  throw std::invalid_argument("proportional allocation has no GP form");
}

// --- evaluation and rounding ------------------------------------------------------

inline void evaluate_rates(const AllocationProblem& ap, Allocation& a) {
  a.snr.assign(ap.size(), 0.0);
  a.rates_bps.assign(ap.size(), 0.0);
  a.approx_rates_bps.assign(ap.size(), 0.0);
  for (std::size_t k = 0; k < ap.size(); ++k) {
    a.snr[k] = ap.snr(k, a.p_k_watts[k], a.n_k_units[k]);
    a.rates_bps[k] = rate_bps(a.snr[k], ap.b_ue);
    a.approx_rates_bps[k] = ap.b_ue * std::log2(a.snr[k]);
  }
}

/// Ceiling of each n_k; if that overshoots n_max, units are taken back one at
/// a time from the UE with the largest rate margin above r_th.
inline std::vector<double> round_units(const AllocationProblem& ap, const std::vector<double>& n_cont,
                                       const std::vector<double>& p) {
  std::vector<double> n(n_cont.size());
  for (std::size_t k = 0; k < n.size(); ++k) n[k] = std::min(std::ceil(n_cont[k]), std::floor(ap.n_k_max));
  double total = std::accumulate(n.begin(), n.end(), 0.0);
  while (total > ap.n_max) {
    std::size_t best = n.size();
    double best_slack = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n.size(); ++k) {
      if (n[k] - 1.0 < ap.n_k_min) continue;
      const double slack = rate_bps(ap.snr(k, p[k], n[k] - 1.0), ap.b_ue) - ap.r_th;
      if (slack > best_slack) {
        best_slack = slack;
        best = k;
      }
    }
    if (best == n.size()) break;
    n[best] -= 1.0;
    total -= 1.0;
  }
  return n;
}

// --- benchmark ----------------------------------------------------------------------

/// Units in proportion to 1/|h_k| (or 1/|h_k|^2), so the weakest UE gets the
/// most; floors then box-clamping, leftover units to the weakest UEs first.
/// Power is split equally and clamped to the per-UE box.
inline Allocation proportional_allocation(const AllocationProblem& ap) {
  Allocation a;
  a.objective_kind = Objective::proportional;
  const std::size_t K = ap.size();
  if (K == 0) return a;
  if (K * ap.n_k_min > ap.n_max || K * ap.p_k_min > ap.p_cs_max) {
    a.solver_diag.status = gp::SolveStatus::infeasible;
    a.solver_diag.message = "per-UE minimums exceed the shared budget";
    return a;
  }

  std::vector<double> w(K);
  for (std::size_t k = 0; k < K; ++k)
    w[k] = ap.weighting == ProportionalWeighting::inverse_amplitude ? 1.0 / std::sqrt(ap.gains[k]) : 1.0 / ap.gains[k];
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);

  std::vector<std::size_t> weakest_first(K);
  std::iota(weakest_first.begin(), weakest_first.end(), 0);
  std::stable_sort(weakest_first.begin(), weakest_first.end(),
                   [&](std::size_t i, std::size_t j) { return ap.gains[i] < ap.gains[j]; });

  const double lo = std::ceil(ap.n_k_min), hi = std::floor(ap.n_k_max);
  std::vector<double> n(K);
  // Shares that are integral up to roundoff stay integral.
  for (std::size_t k = 0; k < K; ++k) n[k] = std::clamp(std::floor(ap.n_max * w[k] / wsum * (1 + 1e-12)), lo, hi);
  double total = std::accumulate(n.begin(), n.end(), 0.0);
  // Raising to n_k_min may overshoot: take back from the strongest UEs.
  for (auto it = weakest_first.rbegin(); it != weakest_first.rend() && total > ap.n_max; ++it) {
    const double take = std::min(n[*it] - lo, total - ap.n_max);
    n[*it] -= take;
    total -= take;
  }
  for (std::size_t k : weakest_first) {
    if (total >= ap.n_max) break;
    const double give = std::min(hi - n[k], std::floor(ap.n_max - total));
    n[k] += give;
    total += give;
  }

  const double p_each = std::clamp(ap.p_cs_max / static_cast<double>(K), ap.p_k_min, ap.p_k_max);
  a.p_k_watts.assign(K, p_each);
  a.n_k_units = n;
  a.n_k_continuous = n;
  evaluate_rates(ap, a);
  a.solver_diag.status = gp::SolveStatus::optimal;
  return a;
}

// --- dispatcher -----------------------------------------------------------------------

/// Builds and solves the GP for `kind`, rounds n_k up, re-evaluates exact rates.
inline Allocation solve(const AllocationProblem& ap, Objective kind, const gp::SolverOptions& opt = {}) {
  if (kind == Objective::proportional) return proportional_allocation(ap);
  Allocation a;
  a.objective_kind = kind;
  if (ap.size() == 0) return a;
  if (const auto why = ap.infeasibility_reason(); !why.empty()) {
    a.solver_diag.status = gp::SolveStatus::infeasible;
    a.solver_diag.message = why;
    return a;
  }
  const auto program = build_problem(ap, kind);
  const auto sol = gp::gp_solve(program, opt);
  a.solver_diag.status = sol.status;
  a.solver_diag.iterations = sol.iterations;
  a.solver_diag.kkt_residual = sol.kkt_residual;
  a.solver_diag.objective_value = sol.objective_value;
  a.solver_diag.log_objective = sol.log_objective;
  if (sol.status == gp::SolveStatus::infeasible) {
    a.solver_diag.message = "no strictly feasible point";
    if (sol.violated_constraint && *sol.violated_constraint < program.constraint_labels.size())
      a.solver_diag.message += "; most violated: " + program.constraint_labels[*sol.violated_constraint];
    return a;
  }
  auto values = sol.values;
  if (kind == Objective::max_min && sol.status == gp::SolveStatus::optimal) {
    constexpr double kFloorSlack = 1e-6;  // relative give on t* so the stage-2 set has an interior
    const auto stage2 = gp::gp_solve(build_max_min_refinement(ap, values.at("t") * (1.0 - kFloorSlack)), opt);
    a.solver_diag.iterations += stage2.iterations;
    if (stage2.status == gp::SolveStatus::optimal) values = stage2.values;
  }
  for (std::size_t k = 0; k < ap.size(); ++k) {
    a.p_k_watts.push_back(values.at(detail::pvar(k)));
    a.n_k_continuous.push_back(values.at(detail::nvar(k)));
  }
  a.n_k_units = round_units(ap, a.n_k_continuous, a.p_k_watts);
  evaluate_rates(ap, a);
  return a;
}

}  // namespace hapsris
