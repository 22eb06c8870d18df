#pragma once

// Geometric programming: monomial/posynomial model, the log change of
// variables that makes a GP convex, and a log-barrier interior-point solver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hapsris::gp {

class GpModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// c * prod_j x_j^a_j with c > 0. The coefficient is held as log(c) so that
/// products of many channel constants stay representable.
struct Monomial {
  double log_coefficient = 0.0;
  std::map<std::string, double> exponents;

  static Monomial make(double coefficient, std::map<std::string, double> exponents = {}) {
    if (!(coefficient > 0.0) || !std::isfinite(coefficient))
      throw GpModelError("monomial coefficient must be positive and finite");
    return Monomial{std::log(coefficient), std::move(exponents)};
  }
  static Monomial from_log(double log_coefficient, std::map<std::string, double> exponents = {}) {
    if (!std::isfinite(log_coefficient)) throw GpModelError("monomial log-coefficient must be finite");
    return Monomial{log_coefficient, std::move(exponents)};
  }

  double coefficient() const { return std::exp(log_coefficient); }

  double log_value(const std::map<std::string, double>& x) const {
    double v = log_coefficient;
    for (const auto& [name, a] : exponents) v += a * std::log(x.at(name));
    return v;
  }
  double evaluate(const std::map<std::string, double>& x) const { return std::exp(log_value(x)); }
};

struct Posynomial {
  std::vector<Monomial> terms;

  Posynomial() = default;
  Posynomial(std::initializer_list<Monomial> t) : terms(t) {}
  explicit Posynomial(std::vector<Monomial> t) : terms(std::move(t)) {}

  double log_value(const std::map<std::string, double>& x) const {
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> v;
    v.reserve(terms.size());
    for (const auto& t : terms) {
      v.push_back(t.log_value(x));
      m = std::max(m, v.back());
    }
    double s = 0.0;
    for (double e : v) s += std::exp(e - m);
    return m + std::log(s);
  }
  double evaluate(const std::map<std::string, double>& x) const { return std::exp(log_value(x)); }
};

struct VariableBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// minimize objective(x) s.t. constraints[i](x) <= 1, lower <= x <= upper.
struct GpProgram {
  std::vector<std::string> variables;
  Posynomial objective;
  std::vector<Posynomial> constraints;
  std::vector<std::string> constraint_labels;  // optional, same length as constraints
  std::map<std::string, VariableBounds> bounds;

  void validate() const {
    auto known = [&](const std::string& v) {
      return std::find(variables.begin(), variables.end(), v) != variables.end();
    };
    auto check = [&](const Posynomial& p, const std::string& what) {
      if (p.terms.empty()) throw GpModelError(what + " has no terms");
      for (const auto& t : p.terms)
        for (const auto& [name, a] : t.exponents) {
          if (!known(name)) throw GpModelError(what + " uses undeclared variable '" + name + "'");
          if (!std::isfinite(a)) throw GpModelError(what + " has a non-finite exponent");
        }
    };
    check(objective, "objective");
    for (std::size_t i = 0; i < constraints.size(); ++i) check(constraints[i], "constraint " + std::to_string(i));
    if (!constraint_labels.empty() && constraint_labels.size() != constraints.size())
      throw GpModelError("constraint_labels size mismatch");
    for (const auto& v : variables) {
      auto it = bounds.find(v);
      if (it == bounds.end()) throw GpModelError("variable '" + v + "' has no bounds");
      const auto& b = it->second;
      if (!(b.lower > 0.0) || !(b.lower <= b.upper) || !std::isfinite(b.upper))
        throw GpModelError("variable '" + v + "' needs 0 < lower <= upper < inf");
    }
  }
};

enum class SolveStatus { optimal, infeasible, max_iter };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max_iter";
  }
  return "?";
}

struct GpSolution {
  std::map<std::string, double> values;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  double log_objective = std::numeric_limits<double>::quiet_NaN();
  SolveStatus status = SolveStatus::infeasible;
  int iterations = 0;  // Newton steps over both phases
  double kkt_residual = std::numeric_limits<double>::infinity();
  double duality_gap = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> violated_constraint;  // set when infeasible
};

// ---------------------------------------------------------------------------
// Log domain. With x = exp(y) a posynomial becomes exp(LSE(A y + b)), so
// log p(exp(y)) is convex in y.

/// f(y) = log(sum_i exp(a_i . y + b_i)) + lin . y. With no rows, f is linear.
struct LseFunction {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd lin;

  double value(const Eigen::VectorXd& y) const {
    double v = lin.size() ? lin.dot(y) : 0.0;
    if (A.rows() == 0) return v;
    const Eigen::VectorXd u = A * y + b;
    const double m = u.maxCoeff();
    return v + m + std::log((u.array() - m).exp().sum());
  }

  /// Value, gradient and (optionally) Hessian.
  double eval(const Eigen::VectorXd& y, Eigen::VectorXd& grad, Eigen::MatrixXd* hess) const {
    const auto n = y.size();
    grad = lin.size() ? lin : Eigen::VectorXd::Zero(n);
    double v = lin.size() ? lin.dot(y) : 0.0;
    if (hess) hess->setZero(n, n);
    if (A.rows() == 0) return v;
    const Eigen::VectorXd u = A * y + b;
    const double m = u.maxCoeff();
    Eigen::VectorXd w = (u.array() - m).exp().matrix();
    const double s = w.sum();
    w /= s;
    grad.noalias() += A.transpose() * w;
    if (hess) {
      const Eigen::VectorXd aw = A.transpose() * w;
      hess->noalias() += A.transpose() * w.asDiagonal() * A;
      hess->noalias() -= aw * aw.transpose();
    }
    return v + m + std::log(s);
  }
};

struct LogConvexProgram {
  std::vector<std::string> variables;  // y_j = log(x_j)
  LseFunction objective;
  std::vector<LseFunction> constraints;  // each <= 0
  std::vector<std::string> constraint_labels;
  Eigen::VectorXd lower;  // log bounds
  Eigen::VectorXd upper;
};

namespace detail {

inline LseFunction lse_from_posynomial(const Posynomial& p, const std::map<std::string, Eigen::Index>& index) {
  LseFunction f;
  const auto n = static_cast<Eigen::Index>(index.size());
  f.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.terms.size()), n);
  f.b = Eigen::VectorXd(static_cast<Eigen::Index>(p.terms.size()));
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    f.b(r) = p.terms[i].log_coefficient;
    for (const auto& [name, a] : p.terms[i].exponents) f.A(r, index.at(name)) += a;
  }
  f.lin = Eigen::VectorXd::Zero(n);
  return f;
}

}  // namespace detail

inline LogConvexProgram to_log_convex(const GpProgram& p) {
  p.validate();
  std::map<std::string, Eigen::Index> index;
  for (std::size_t j = 0; j < p.variables.size(); ++j) index[p.variables[j]] = static_cast<Eigen::Index>(j);
  LogConvexProgram lc;
  lc.variables = p.variables;
  lc.objective = detail::lse_from_posynomial(p.objective, index);
  for (const auto& c : p.constraints) lc.constraints.push_back(detail::lse_from_posynomial(c, index));
  lc.constraint_labels = p.constraint_labels;
  const auto n = static_cast<Eigen::Index>(p.variables.size());
  lc.lower.resize(n);
  lc.upper.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& b = p.bounds.at(p.variables[static_cast<std::size_t>(j)]);
    lc.lower(j) = std::log(b.lower);
    lc.upper(j) = std::log(b.upper);
  }
  return lc;
}

/// Plain-text audit listing of a log-domain program.
inline std::string dump(const LogConvexProgram& lc) {
  std::ostringstream os;
  os.precision(12);
  auto row = [&](const LseFunction& f) {
    if (f.A.rows() == 0) {
      os << "    linear";
      for (Eigen::Index j = 0; j < f.lin.size(); ++j)
        if (f.lin(j) != 0.0) os << " " << f.lin(j) << "*y[" << lc.variables[static_cast<std::size_t>(j)] << "]";
      os << "\n";
      return;
    }
    os << "    log-sum-exp of " << f.A.rows() << " affine term(s):\n";
    for (Eigen::Index r = 0; r < f.A.rows(); ++r) {
      os << "      " << f.b(r);
      for (Eigen::Index j = 0; j < f.A.cols(); ++j)
        if (f.A(r, j) != 0.0) os << " + " << f.A(r, j) << "*y[" << lc.variables[static_cast<std::size_t>(j)] << "]";
      os << "\n";
    }
  };
  os << "log-convex program: " << lc.variables.size() << " variable(s), " << lc.constraints.size()
     << " constraint(s)\n";
  os << "variables (y = log x):\n";
  for (std::size_t j = 0; j < lc.variables.size(); ++j) {
    const auto e = static_cast<Eigen::Index>(j);
    os << "  y[" << lc.variables[j] << "] in [" << lc.lower(e) << ", " << lc.upper(e) << "]\n";
  }
  os << "minimize:\n";
  row(lc.objective);
  for (std::size_t i = 0; i < lc.constraints.size(); ++i) {
    os << "subject to (" << i;
    if (i < lc.constraint_labels.size() && !lc.constraint_labels[i].empty()) os << ": " << lc.constraint_labels[i];
    os << ") <= 0:\n";
    row(lc.constraints[i]);
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Barrier method

struct SolverOptions {
  double duality_gap_tol = 1e-8;
  double kkt_tol = 1e-6;
  int max_outer_iterations = 500;
  int max_newton_per_centering = 200;
  double t_initial = 1.0;
  double t_growth = 20.0;
  double newton_tol = 1e-12;  // half squared Newton decrement
  double feasibility_margin = 1e-9;
};

namespace detail {

/// minimize f0(z) s.t. f_i(z) <= 0 and lo <= z <= hi (infinite ends allowed).
struct BarrierProblem {
  LseFunction objective;
  std::vector<LseFunction> constraints;
  Eigen::VectorXd lo, hi;

  int num_barrier_terms() const {
    int m = static_cast<int>(constraints.size());
    for (Eigen::Index j = 0; j < lo.size(); ++j) {
      if (std::isfinite(lo(j))) ++m;
      if (std::isfinite(hi(j))) ++m;
    }
    return m;
  }

  bool strictly_inside(const Eigen::VectorXd& z) const {
    for (Eigen::Index j = 0; j < z.size(); ++j)
      if (!(z(j) > lo(j)) || !(z(j) < hi(j))) return false;
    for (const auto& c : constraints)
      if (!(c.value(z) < 0.0)) return false;
    return true;
  }

  /// t*f0 - sum log(-f_i) - sum log(bound slacks); +inf outside the domain.
  double phi(const Eigen::VectorXd& z, double t) const {
    if (!strictly_inside(z)) return std::numeric_limits<double>::infinity();
    double v = t * objective.value(z);
    for (const auto& c : constraints) v -= std::log(-c.value(z));
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      if (std::isfinite(lo(j))) v -= std::log(z(j) - lo(j));
      if (std::isfinite(hi(j))) v -= std::log(hi(j) - z(j));
    }
    return v;
  }

  void derivatives(const Eigen::VectorXd& z, double t, Eigen::VectorXd& g, Eigen::MatrixXd& H) const {
    const auto n = z.size();
    Eigen::VectorXd gi;
    Eigen::MatrixXd Hi;
    objective.eval(z, g, &H);
    g *= t;
    H *= t;
    for (const auto& c : constraints) {
      const double f = c.eval(z, gi, &Hi);
      const double s = -f;
      g += gi / s;
      H += Hi / s;
      H.noalias() += (gi * gi.transpose()) / (s * s);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::isfinite(lo(j))) {
        const double s = z(j) - lo(j);
        g(j) -= 1.0 / s;
        H(j, j) += 1.0 / (s * s);
      }
      if (std::isfinite(hi(j))) {
        const double s = hi(j) - z(j);
        g(j) += 1.0 / s;
        H(j, j) += 1.0 / (s * s);
      }
    }
  }

  /// KKT residual at z: max of stationarity and complementarity, with
  /// nonnegative multipliers refit by least squares on the constraints whose
  /// slack is below `active_slack`. Barrier-implied multipliers 1/(t s) are
  /// unusable this close to the boundary: s carries absolute roundoff of the
  /// order of one ulp of the LSE value, which is a large relative error.
  double kkt_residual(const Eigen::VectorXd& z, double active_slack = 1e-4) const {
    const auto n = z.size();
    Eigen::VectorXd g0;
    objective.eval(z, g0, nullptr);
    std::vector<Eigen::VectorXd> grads;
    std::vector<double> slacks;
    Eigen::VectorXd gi;
    for (const auto& c : constraints) {
      const double f = c.eval(z, gi, nullptr);
      if (-f <= active_slack) {
        grads.push_back(gi);
        slacks.push_back(-f);
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::isfinite(lo(j)) && z(j) - lo(j) <= active_slack) {
        grads.push_back(-Eigen::VectorXd::Unit(n, j));
        slacks.push_back(z(j) - lo(j));
      }
      if (std::isfinite(hi(j)) && hi(j) - z(j) <= active_slack) {
        grads.push_back(Eigen::VectorXd::Unit(n, j));
        slacks.push_back(hi(j) - z(j));
      }
    }
    // Active-set NNLS: drop the most negative multiplier until all are >= 0.
    std::vector<std::size_t> keep(grads.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    Eigen::VectorXd lambda;
    while (true) {
      if (keep.empty()) {
        lambda.resize(0);
        break;
      }
      Eigen::MatrixXd J(n, static_cast<Eigen::Index>(keep.size()));
      for (std::size_t i = 0; i < keep.size(); ++i) J.col(static_cast<Eigen::Index>(i)) = grads[keep[i]];
      lambda = J.colPivHouseholderQr().solve(-g0);
      Eigen::Index worst = 0;
      if (lambda.minCoeff(&worst) >= 0.0) break;
      keep.erase(keep.begin() + worst);
    }
    Eigen::VectorXd r = g0;
    double comp = 0.0;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const double l = lambda(static_cast<Eigen::Index>(i));
      r += l * grads[keep[i]];
      comp = std::max(comp, l * slacks[keep[i]]);
    }
    return std::max(n > 0 ? r.cwiseAbs().maxCoeff() : 0.0, comp);
  }
};

struct CenteringResult {
  int newton_steps = 0;
  bool stopped_early = false;
};

inline CenteringResult center(const BarrierProblem& bp, Eigen::VectorXd& z, double t, const SolverOptions& opt,
                              const std::function<bool(const Eigen::VectorXd&)>& early_stop) {
  CenteringResult res;
  const auto n = z.size();
  Eigen::VectorXd g, dz;
  Eigen::MatrixXd H;
  double prev_decrement2 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opt.max_newton_per_centering; ++k) {
    bp.derivatives(z, t, g, H);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    dz = ldlt.solve(-g);
    if (ldlt.info() != Eigen::Success || !dz.allFinite() || g.dot(dz) >= 0.0) {
      // Hessian numerically indefinite; regularize.
      const double reg = 1e-10 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      dz = (H + reg * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(-g);
    }
    const double decrement2 = -g.dot(dz);
    if (!(decrement2 > 2.0 * opt.newton_tol)) break;

    const double phi0 = bp.phi(z, t);
    // Roundoff allowance: at large t the barrier value carries absolute error
    // of order eps * t * |f0|, which can exceed the predicted decrease.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(phi0) + t);
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls, step *= 0.5) {
      const Eigen::VectorXd cand = z + step * dz;
      const double phi1 = bp.phi(cand, t);
      if (phi1 <= phi0 - 0.25 * step * decrement2 + slack) {
        accepted = cand != z;  // a step below one ulp cannot improve anything
        z = cand;
        break;
      }
    }
    ++res.newton_steps;
    if (!accepted) break;  // no resolvable decrease left at this t
    // A full step that fails to halve the decrement means quadratic
    // convergence has hit the rounding floor.
    if (step == 1.0 && decrement2 < 1e-3 && decrement2 > 0.5 * prev_decrement2) break;
    prev_decrement2 = decrement2;
    if (early_stop && early_stop(z)) {
      res.stopped_early = true;
      break;
    }
  }
  return res;
}

struct BarrierResult {
  Eigen::VectorXd z;
  double t = 0.0;
  int newton_steps = 0;
  int outer = 0;
  bool stopped_early = false;
  bool converged = false;
};

inline BarrierResult barrier(const BarrierProblem& bp, Eigen::VectorXd z, const SolverOptions& opt,
                             const std::function<bool(const Eigen::VectorXd&)>& early_stop = {}) {
  BarrierResult r;
  const int m = bp.num_barrier_terms();
  double t = opt.t_initial;
  for (r.outer = 0; r.outer < opt.max_outer_iterations; ++r.outer) {
    const auto c = center(bp, z, t, opt, early_stop);
    r.newton_steps += c.newton_steps;
    if (c.stopped_early) {
      r.stopped_early = true;
      break;
    }
    if (m == 0 || m / t < opt.duality_gap_tol) {
      r.converged = true;
      break;
    }
    t *= opt.t_growth;
  }
  r.z = std::move(z);
  r.t = t;
  return r;
}

}  // namespace detail

/// Solves a GP to a certified optimum (duality gap and KKT residual) or
/// reports infeasibility with the most-violated constraint.
///
/// Starts from the log-midpoint of the bounds. If that point violates a
/// constraint, a phase-1 barrier solve on (y, s) minimizing s with
/// f_i(y) <= s looks for a strictly feasible point first. Variables with
/// lower == upper are held fixed. The whole procedure is deterministic.
inline GpSolution gp_solve(const GpProgram& program, const SolverOptions& opt = {}) {
  const LogConvexProgram lc = to_log_convex(program);
  const auto n_all = static_cast<Eigen::Index>(lc.variables.size());

  // Eliminate fixed variables.
  std::vector<Eigen::Index> free_idx;
  Eigen::VectorXd y_full = 0.5 * (lc.lower + lc.upper);
  for (Eigen::Index j = 0; j < n_all; ++j)
    if (lc.upper(j) > lc.lower(j)) free_idx.push_back(j);
  const auto n = static_cast<Eigen::Index>(free_idx.size());

  auto reduce = [&](const LseFunction& f) {
    LseFunction r;
    r.A.resize(f.A.rows(), n);
    r.b = f.b;
    if (f.A.rows() > 0) r.b += f.A * y_full;
    for (Eigen::Index c = 0; c < n; ++c) {
      r.A.col(c) = f.A.col(free_idx[static_cast<std::size_t>(c)]);
      if (f.A.rows() > 0) r.b -= f.A.col(free_idx[static_cast<std::size_t>(c)]) * y_full(free_idx[static_cast<std::size_t>(c)]);
    }
    r.lin = Eigen::VectorXd::Zero(n);
    for (Eigen::Index c = 0; c < n; ++c) r.lin(c) = f.lin(free_idx[static_cast<std::size_t>(c)]);
    return r;
  };

  detail::BarrierProblem bp;
  bp.objective = reduce(lc.objective);
  for (const auto& c : lc.constraints) bp.constraints.push_back(reduce(c));
  bp.lo.resize(n);
  bp.hi.resize(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto j = free_idx[static_cast<std::size_t>(c)];
    bp.lo(c) = lc.lower(j);
    bp.hi(c) = lc.upper(j);
    y(c) = y_full(j);
  }

  GpSolution sol;
  // Fixed variables are reported as given, not as exp(log(value)).
  auto store_values = [&] {
    for (Eigen::Index j = 0; j < n_all; ++j) {
      const auto& name = lc.variables[static_cast<std::size_t>(j)];
      sol.values[name] = lc.upper(j) > lc.lower(j) ? std::exp(y_full(j)) : program.bounds.at(name).lower;
    }
  };
  auto max_constraint = [&](const Eigen::VectorXd& z, std::size_t* arg) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bp.constraints.size(); ++i) {
      const double v = bp.constraints[i].value(z);
      if (v > worst) {
        worst = v;
        if (arg) *arg = i;
      }
    }
    return worst;
  };

  // Phase 1.
  if (!bp.constraints.empty() && max_constraint(y, nullptr) >= -opt.feasibility_margin) {
    detail::BarrierProblem p1;
    p1.objective.lin = Eigen::VectorXd::Zero(n + 1);
    p1.objective.lin(n) = 1.0;
    for (const auto& c : bp.constraints) {
      LseFunction f;
      f.A = Eigen::MatrixXd::Zero(c.A.rows(), n + 1);
      f.A.leftCols(n) = c.A;
      f.b = c.b;
      f.lin = Eigen::VectorXd::Zero(n + 1);
      f.lin.head(n) = c.lin;
      f.lin(n) = -1.0;
      p1.constraints.push_back(std::move(f));
    }
    p1.lo.resize(n + 1);
    p1.hi.resize(n + 1);
    p1.lo.head(n) = bp.lo;
    p1.hi.head(n) = bp.hi;
    p1.lo(n) = -1.0;
    p1.hi(n) = std::numeric_limits<double>::infinity();
    Eigen::VectorXd z(n + 1);
    z.head(n) = y;
    z(n) = std::max(max_constraint(y, nullptr), 0.0) + 1.0;
    auto feasible = [&](const Eigen::VectorXd& zz) {
      return max_constraint(zz.head(n), nullptr) < -opt.feasibility_margin;
    };
    const auto r1 = detail::barrier(p1, z, opt, feasible);
    sol.iterations += r1.newton_steps;
    if (!r1.stopped_early) {
      std::size_t arg = 0;
      max_constraint(r1.z.head(n), &arg);
      sol.status = SolveStatus::infeasible;
      sol.violated_constraint = arg;
      for (Eigen::Index c = 0; c < n; ++c) y_full(free_idx[static_cast<std::size_t>(c)]) = r1.z(c);
      store_values();
      return sol;
    }
    y = r1.z.head(n);
  }

  // Phase 2.
  const auto r2 = detail::barrier(bp, y, opt);
  sol.iterations += r2.newton_steps;
  y = r2.z;
  for (Eigen::Index c = 0; c < n; ++c) y_full(free_idx[static_cast<std::size_t>(c)]) = y(c);
  store_values();

  const int m = bp.num_barrier_terms();
  sol.duality_gap = m / r2.t;
  sol.kkt_residual = std::max(bp.kkt_residual(y), sol.duality_gap);
  sol.log_objective = lc.objective.value(y_full);
  sol.objective_value = std::exp(sol.log_objective);
  sol.status = (r2.converged && sol.kkt_residual <= opt.kkt_tol) ? SolveStatus::optimal : SolveStatus::max_iter;
  return sol;
}

}  // namespace hapsris::gp
