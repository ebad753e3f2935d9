#pragma once

// Robust control synthesis.
//
// The outer loop propagates the uncertainty boxes under the current control,
// measures the worst-case robustness of the interval trajectory, and asks the
// inner solver for a minimum-effort control whose nominal trajectory clears a
// robustness margin. If the margin delta_max cannot be met, the accumulated
// deficit zeta is used instead.
//
// The inner problem
//     min ||u||^2  s.t.  rho(x*(u), phi, 0) >= target,  0 <= u <= u_max
// is solved in scaled variables z = u / u_max with an exterior quadratic
// penalty on a log-sum-exp smoothing of rho, continuation over (sharpness,
// penalty) pairs, and a spectral projected gradient method. Gradients are
// propagated backwards through the analytic step Jacobians.

#include "mtlseir/errors.hpp"
#include "mtlseir/formula.hpp"
#include "mtlseir/model.hpp"
#include "mtlseir/reach.hpp"
#include "mtlseir/robustness.hpp"
#include "mtlseir/smooth.hpp"
#include "mtlseir/state.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <future>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mtlseir {

struct SolverConfig {
  std::vector<double> beta_schedule{10.0, 100.0, 1000.0, 10000.0};
  std::vector<double> penalty_schedule{1e1, 1e2, 1e3, 1e4};
  std::size_t max_inner_iterations = 400; // per continuation stage
  // Spectral projected gradient: step clamp, nonmonotone memory, Armijo factor.
  double step_min = 1e-12;
  double step_max = 1e12;
  std::size_t line_search_memory = 10;
  double sufficient_decrease = 1e-4;
  double gradient_tolerance = 1e-10;
  double feasibility_tolerance = 1e-6;
  std::size_t iter_max = 100;
  std::size_t restarts = 4;
  std::size_t multiplier_rounds = 8;
  std::size_t polish_rounds = 8;
  std::size_t backtracks = 6; // target halvings after an infeasible zeta solve
  bool approximate_population = false;
  std::size_t substeps = 1;
  InclusionMode inclusion_mode = InclusionMode::Centered;
  std::size_t reach_partitions = 64; // uncertainty-box pieces for the enclosure
  std::size_t verification_samples = 1000;

  void validate() const {
    auto increasing = [](const std::vector<double>& v) {
      if (v.empty()) return false;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) return false;
        if (i > 0 && !(v[i] > v[i - 1])) return false;
      }
      return true;
    };
    if (!increasing(beta_schedule)) throw std::invalid_argument("beta_schedule must be nonempty, positive and increasing");
    if (!increasing(penalty_schedule))
      throw std::invalid_argument("penalty_schedule must be nonempty, positive and increasing");
    if (max_inner_iterations == 0) throw std::invalid_argument("max_inner_iterations must be at least 1");
    if (!(step_min > 0.0) || !(step_max >= step_min)) throw std::invalid_argument("invalid step clamp");
    if (line_search_memory == 0) throw std::invalid_argument("line_search_memory must be at least 1");
    if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0))
      throw std::invalid_argument("sufficient_decrease must lie in (0, 1)");
    if (!(feasibility_tolerance >= 0.0)) throw std::invalid_argument("feasibility_tolerance must be non-negative");
    if (iter_max == 0) throw std::invalid_argument("iter_max must be at least 1");
    if (multiplier_rounds == 0) throw std::invalid_argument("multiplier_rounds must be at least 1");
    if (restarts == 0) throw std::invalid_argument("restarts must be at least 1");
    if (substeps == 0) throw std::invalid_argument("substeps must be at least 1");
    if (reach_partitions == 0) throw std::invalid_argument("reach_partitions must be at least 1");
    if (verification_samples == 0) throw std::invalid_argument("verification_samples must be at least 1");
  }
};

struct Scenario {
  ControlKind kind = ControlKind::Vaccination;
  StateBox X0;
  ParamBox params;
  Formula spec = Formula::truth();
  std::size_t T = 0;
  double u_max = 1.0;
  SolverConfig solver;
  std::uint64_t seed = 0;

  void validate() const {
    X0.validate();
    params.validate();
    solver.validate();
    if (spec.horizon() > T)
      throw std::invalid_argument("horizon " + std::to_string(T) + " is shorter than the specification horizon " +
                                  std::to_string(spec.horizon()));
    if (!(u_max > 0.0) || !std::isfinite(u_max)) throw std::invalid_argument("u_max must be positive and finite");
  }

  StepOptions step_options() const { return {solver.substeps, solver.approximate_population}; }
  ControlSignal zero_control() const { return ControlSignal::zeros(kind, T, u_max); }
};

/// l2 norm of the control values.
inline double control_effort(const ControlSignal& u) {
  double s = 0.0;
  for (double v : u.values) s += v * v;
  return std::sqrt(s);
}

enum class InnerStatus { Feasible, Infeasible };

constexpr std::string_view to_string(InnerStatus s) { return s == InnerStatus::Feasible ? "feasible" : "infeasible"; }

struct InnerResult {
  ControlSignal u;
  InnerStatus status = InnerStatus::Infeasible;
  double robustness = 0.0; // exact nominal robustness of u
  double effort = 0.0;
  std::size_t restart = 0; // index of the selected restart
};

namespace detail {

// Nominal trajectory and penalized objective as functions of z = u / u_max.
class NominalProblem {
public:
  explicit NominalProblem(const Scenario& s)
      : x0_(s.X0.mid()), params_(s.params.mid()), kind_(s.kind), T_(s.T), u_max_(s.u_max), opt_(s.step_options()),
        program_(s.spec, 0) {}

  std::size_t size() const { return T_; }

  ControlSignal control(const std::vector<double>& z) const {
    ControlSignal u{kind_, std::vector<double>(T_), u_max_};
    for (std::size_t k = 0; k < T_; ++k) u.values[k] = std::clamp(z[k] * u_max_, 0.0, u_max_);
    return u;
  }

  Trajectory trajectory(const std::vector<double>& z) const { return simulate(x0_, control(z), params_, T_, opt_); }

  double exact_robustness(const std::vector<double>& z) const { return program_.exact(trajectory(z)); }

  struct Value {
    double f = 0.0;
    double smooth = 0.0;
    std::vector<double> grad;
  };

  // Objective ||z||^2 + penalty * (max(0, target - smooth_rho)^2 + sum of
  // squared negative state entries) and its gradient. The second term keeps
  // the nominal trajectory inside the model's domain: the equations as written
  // keep rewarding vaccination after S reaches zero. Returns nullopt when the
  // dynamics cannot be evaluated.
  std::optional<Value> evaluate(const std::vector<double>& z, double beta, double penalty, double target) const {
    const ControlSignal u = control(z);
    Trajectory xi;
    try {
      xi = simulate(x0_, u, params_, T_, opt_);
    } catch (const ModelDomainError&) {
      return std::nullopt;
    }
    std::vector<State> g;
    Value v;
    v.smooth = program_.evaluate(xi, beta, &g);
    const double gap = std::max(0.0, target - v.smooth);
    v.f = penalty * gap * gap;
    bool active = gap > 0.0;
    for (std::size_t k = 0; k <= T_; ++k)
      for (std::size_t i = 0; i < kStateDim; ++i) {
        const double neg = std::max(0.0, -xi[k][i]);
        v.f += penalty * neg * neg;
        g[k][i] *= -2.0 * penalty * gap;
        if (neg > 0.0) {
          g[k][i] -= 2.0 * penalty * neg;
          active = true;
        }
      }
    v.grad.assign(T_, 0.0);
    for (std::size_t k = 0; k < T_; ++k) {
      v.f += z[k] * z[k];
      v.grad[k] = 2.0 * z[k];
    }
    if (!std::isfinite(v.f)) return std::nullopt;
    if (active) {
      auto back = pullback(xi, u, g);
      if (!back) return std::nullopt;
      for (std::size_t k = 0; k < T_; ++k) v.grad[k] += (*back)[k];
    }
    for (double d : v.grad)
      if (!std::isfinite(d)) return std::nullopt;
    return v;
  }

  // d smooth_rho / d z, used by tests.
  std::vector<double> smooth_gradient(const std::vector<double>& z, double beta) const {
    const ControlSignal u = control(z);
    const Trajectory xi = simulate(x0_, u, params_, T_, opt_);
    std::vector<State> g;
    program_.evaluate(xi, beta, &g);
    auto back = pullback(xi, u, g);
    if (!back) throw ModelDomainError("nominal trajectory left the model domain");
    return *back;
  }

  double smooth_robustness(const std::vector<double>& z, double beta) const {
    return program_.evaluate(trajectory(z), beta);
  }

  // Smallest entry of the nominal trajectory.
  double min_state(const std::vector<double>& z) const {
    double m = kInf;
    for (const auto& x : trajectory(z).states)
      for (double v : x) m = std::min(m, v);
    return m;
  }

private:
  // Given seeds g_k = d F / d x_k, returns d F / d z_k through the dynamics:
  // lam_T = g_T, lam_k = g_k + A_k^T lam_{k+1}, d F / d u_k = lam_{k+1} . b_k.
  std::optional<std::vector<double>> pullback(const Trajectory& xi, const ControlSignal& u,
                                              const std::vector<State>& g) const {
    std::vector<double> out(T_, 0.0);
    State lam = g[T_];
    for (std::size_t k = T_; k-- > 0;) {
      StepJacobians J;
      try {
        J = jacobians(xi[k], u[k], params_, kind_, opt_);
      } catch (const ModelDomainError&) {
        return std::nullopt;
      }
      double d = 0.0;
      for (std::size_t i = 0; i < kStateDim; ++i) d += lam[i] * J.du[i];
      out[k] = u_max_ * d;
      State next = g[k];
      for (std::size_t j = 0; j < kStateDim; ++j)
        for (std::size_t i = 0; i < kStateDim; ++i) next[j] += J.dx[i][j] * lam[i];
      lam = next;
    }
    return out;
  }

  State x0_;
  ModelParams params_;
  ControlKind kind_;
  std::size_t T_;
  double u_max_;
  StepOptions opt_;
  SmoothRobustness program_;
};

inline void project_unit_box(std::vector<double>& z) {
  for (double& v : z) v = std::clamp(v, 0.0, 1.0);
}

// Spectral projected gradient with a nonmonotone Armijo line search
// (Birgin, Martinez and Raydan). Minimizes over [0, 1]^T starting from z.
inline void spectral_projected_gradient(const NominalProblem& prob, std::vector<double>& z, double beta, double penalty,
                                        double target, const SolverConfig& cfg) {
  const std::size_t n = z.size();
  project_unit_box(z);
  auto cur = prob.evaluate(z, beta, penalty, target);
  if (!cur) throw SolverError("objective is not finite at the initial iterate");

  auto pg_norm = [&](const std::vector<double>& x, const std::vector<double>& g) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(std::clamp(x[i] - g[i], 0.0, 1.0) - x[i]));
    return m;
  };

  double pg = pg_norm(z, cur->grad);
  double alpha = pg > 0.0 ? std::clamp(1.0 / pg, cfg.step_min, cfg.step_max) : 1.0;
  std::deque<double> history{cur->f};
  std::vector<double> d(n), trial(n);

  for (std::size_t it = 0; it < cfg.max_inner_iterations; ++it) {
    if (pg <= cfg.gradient_tolerance) break;
    double gd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = std::clamp(z[i] - alpha * cur->grad[i], 0.0, 1.0) - z[i];
      gd += cur->grad[i] * d[i];
    }
    if (!(gd < 0.0)) break;
    const double fmax = *std::max_element(history.begin(), history.end());

    double lambda = 1.0;
    std::optional<NominalProblem::Value> next;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = std::clamp(z[i] + lambda * d[i], 0.0, 1.0);
      next = prob.evaluate(trial, beta, penalty, target);
      if (next && next->f <= fmax + cfg.sufficient_decrease * lambda * gd) break;
      double shrink = 0.5 * lambda;
      if (next) {
        const double denom = next->f - cur->f - lambda * gd;
        if (denom > 0.0) {
          const double t = -0.5 * lambda * lambda * gd / denom;
          if (t >= 0.1 * lambda && t <= 0.9 * lambda) shrink = t;
        }
      }
      lambda = shrink;
      if (lambda < 1e-16) {
        next.reset();
        break;
      }
    }
    if (!next) break;

    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = trial[i] - z[i];
      const double y = next->grad[i] - cur->grad[i];
      ss += s * s;
      sy += s * y;
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, cfg.step_min, cfg.step_max) : cfg.step_max;
    z = trial;
    cur = std::move(next);
    history.push_back(cur->f);
    if (history.size() > cfg.line_search_memory) history.pop_front();
    pg = pg_norm(z, cur->grad);
    if (ss == 0.0) break;
  }
}

struct Candidate {
  std::vector<double> z;
  double robustness = -kInf;
  double effort = 0.0;
  bool valid = false; // nominal states non-negative within tolerance
  bool feasible = false;
};

// Feasible before infeasible, then lower effort; among infeasible ones valid
// before invalid, then higher robustness.
inline bool preferred(const Candidate& a, const Candidate& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) return a.effort < b.effort;
  if (a.valid != b.valid) return a.valid;
  return a.robustness > b.robustness;
}

inline Candidate run_restart(const NominalProblem& prob, std::vector<double> z, double target, const Scenario& s) {
  const auto& cfg = s.solver;
  const std::size_t stages = std::max(cfg.beta_schedule.size(), cfg.penalty_schedule.size());
  auto pick = [](const std::vector<double>& v, std::size_t i) { return v[std::min(i, v.size() - 1)]; };
  // Each stage is a shifted-penalty (augmented Lagrangian) loop: the smooth
  // target is raised by the current multiplier estimate, so moderate penalties
  // suffice and the inner problems stay well conditioned.
  double shift = 0.0;
  for (std::size_t st = 0; st < stages; ++st) {
    const double beta = pick(cfg.beta_schedule, st), penalty = pick(cfg.penalty_schedule, st);
    shift = 0.0;
    for (std::size_t r = 0; r < cfg.multiplier_rounds; ++r) {
      spectral_projected_gradient(prob, z, beta, penalty, target + shift, cfg);
      const double next = std::max(0.0, shift + target - prob.smooth_robustness(z, beta));
      const bool settled = std::abs(next - shift) <= cfg.feasibility_tolerance;
      shift = next;
      if (settled) break;
    }
  }

  // Polish at the sharpest stage by shifting the smooth target until the
  // exact robustness clears the requested level.
  const double beta = cfg.beta_schedule.back();
  const double penalty = cfg.penalty_schedule.back();
  double shifted = target + shift;
  Candidate best;
  auto consider = [&](const std::vector<double>& cand) {
    Candidate c;
    c.z = cand;
    c.robustness = prob.exact_robustness(cand);
    c.effort = control_effort(prob.control(cand));
    c.valid = prob.min_state(cand) >= -cfg.feasibility_tolerance;
    c.feasible = c.valid && c.robustness >= target - cfg.feasibility_tolerance;
    if (best.z.empty() || preferred(c, best)) best = c;
  };
  consider(z);
  for (std::size_t r = 0; r < cfg.polish_rounds; ++r) {
    const double rho = prob.exact_robustness(z);
    if (rho >= target && prob.min_state(z) >= -cfg.feasibility_tolerance) break;
    shifted += std::max(0.0, target - rho) + cfg.feasibility_tolerance;
    spectral_projected_gradient(prob, z, beta, penalty, shifted, cfg);
    consider(z);
  }
  return best;
}

} // namespace detail

/// Minimum-effort control whose nominal trajectory (midpoint state and
/// parameters) reaches robustness `target`. `warm_start`, when given, seeds
/// restart 0; the next restart starts from zero and the rest from seeded
/// random points. Feasible candidates are ranked by effort, otherwise by
/// robustness; ties go to the lower restart index.
inline InnerResult solve_inner(const Scenario& s, double target, const ControlSignal* warm_start = nullptr) {
  s.validate();
  if (!std::isfinite(target)) throw std::invalid_argument("robustness target must be finite");
  const detail::NominalProblem prob(s);
  const std::size_t T = s.T;

  std::vector<std::vector<double>> starts;
  if (warm_start) {
    if (warm_start->size() < T) throw std::invalid_argument("warm start is shorter than the horizon");
    std::vector<double> z(T);
    for (std::size_t k = 0; k < T; ++k) z[k] = warm_start->values[k] / s.u_max;
    starts.push_back(std::move(z));
  }
  if (starts.size() < s.solver.restarts) starts.emplace_back(T, 0.0);
  for (std::size_t r = starts.size(); r < s.solver.restarts; ++r) {
    auto rng = detail::sample_stream(s.seed ^ 0x5eedc0de5eedc0deULL, r);
    std::vector<double> z(T);
    for (double& v : z) v = 0.5 * detail::unit_uniform(rng);
    starts.push_back(std::move(z));
  }

  std::vector<std::future<detail::Candidate>> jobs;
  jobs.reserve(starts.size());
  for (auto& z0 : starts)
    jobs.push_back(std::async(std::launch::async, [&prob, &s, target, z0] { return detail::run_restart(prob, z0, target, s); }));
  std::vector<detail::Candidate> done;
  for (auto& j : jobs) done.push_back(j.get());

  std::size_t chosen = 0;
  for (std::size_t r = 1; r < done.size(); ++r)
    if (detail::preferred(done[r], done[chosen])) chosen = r;

  InnerResult out;
  out.u = prob.control(done[chosen].z);
  out.robustness = done[chosen].robustness;
  out.effort = control_effort(out.u);
  out.status = done[chosen].feasible ? InnerStatus::Feasible : InnerStatus::Infeasible;
  out.restart = chosen;
  return out;
}

struct IterationRecord {
  std::size_t iteration = 0;
  double zeta = 0.0;
  double delta_target = 0.0;  // delta_max offered to the inner solver first
  bool relaxed = false;       // the delta_max attempt failed and zeta was used
  std::size_t backtracks = 0; // targets tried between the previous target and zeta
  double target_used = 0.0;   // target of the solve whose control was adopted
  InnerStatus status = InnerStatus::Infeasible;
  double nominal_robustness = 0.0;
  RobustnessInterval interval_robustness; // after adopting the new control
  double delta_max = 0.0;                 // after adopting the new control
  double effort = 0.0;
};

struct SynthesisResult {
  ControlSignal u;
  bool success = false;
  bool certified = false;
  RobustnessInterval interval_robustness;
  double delta_max = 0.0;
  double control_effort = 0.0;
  double nominal_robustness = 0.0; // exact robustness of the nominal dynamic trajectory
  std::vector<IterationRecord> iterations;
  // Robustness-0 nominal solve used to seed the loop when zero control is not
  // already robust (see the README).
  std::optional<InnerResult> initialization;
  IntervalTrajectory reach;
};

namespace detail {

struct Assessment {
  IntervalTrajectory reach;
  RobustnessInterval rho;
  double delta_max = 0.0;
};

// Rounds every value to the nine significant digits used by the control CSV,
// so a written control re-verifies exactly as it was certified.
inline ControlSignal quantized(ControlSignal u) {
  char buf[32];
  for (double& v : u.values) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    v = std::min(std::strtod(buf, nullptr), u.u_max);
  }
  return u;
}

inline Assessment assess(const Scenario& s, const ControlSignal& u) {
  Assessment a;
  a.reach = propagate(s.X0, u, s.params, s.T, s.solver.inclusion_mode, s.solver.substeps,
                      s.solver.reach_partitions);
  a.rho = interval_robustness(a.reach, s.spec, 0);
  a.delta_max = delta_profile(a.reach).delta_max;
  return a;
}

} // namespace detail

/// Outer verification loop. Starts from zero control; if that is not already
/// robust, the loop is seeded with a minimum-effort control whose nominal
/// trajectory merely satisfies the specification, so that the first deficit
/// reflects uncertainty rather than the uncontrolled epidemic.
inline SynthesisResult synthesize(const Scenario& s) {
  s.validate();
  SynthesisResult res;
  res.u = s.zero_control();
  auto cur = detail::assess(s, res.u);

  if (cur.rho.lo < 0.0) {
    res.initialization = solve_inner(s, 0.0);
    res.u = detail::quantized(res.initialization->u);
    cur = detail::assess(s, res.u);
  }

  double zeta = 0.0;
  double adopted_target = 0.0;
  for (std::size_t iter = 0; cur.rho.lo < 0.0 && iter < s.solver.iter_max; ++iter) {
    IterationRecord rec;
    rec.iteration = iter + 1;
    rec.delta_target = cur.delta_max;
    InnerResult inner = solve_inner(s, cur.delta_max, &res.u);
    rec.target_used = cur.delta_max;
    if (inner.status == InnerStatus::Infeasible) {
      zeta -= cur.rho.lo;
      rec.relaxed = true;
      rec.target_used = zeta;
      inner = solve_inner(s, zeta, &res.u);
      // zeta itself can be out of reach when one atom caps the nominal
      // robustness. Walk the target back toward the last adopted one and take
      // the first level the solver meets; keep the most robust attempt if none.
      for (std::size_t j = 1; inner.status == InnerStatus::Infeasible && j <= s.solver.backtracks; ++j) {
        const double t = adopted_target + (zeta - adopted_target) / std::ldexp(1.0, static_cast<int>(j));
        InnerResult retry = solve_inner(s, t, &res.u);
        ++rec.backtracks;
        if (retry.status == InnerStatus::Feasible) {
          inner = std::move(retry);
          rec.target_used = t;
        }
      }
    }
    adopted_target = std::max(adopted_target, rec.target_used);
    rec.zeta = zeta;
    rec.status = inner.status;
    rec.nominal_robustness = inner.robustness;
    rec.effort = inner.effort;
    res.u = detail::quantized(inner.u);
    cur = detail::assess(s, res.u);
    rec.interval_robustness = cur.rho;
    rec.delta_max = cur.delta_max;
    res.iterations.push_back(rec);
  }

  res.certified = cur.rho.lo >= 0.0;
  res.success = res.certified;
  res.interval_robustness = cur.rho;
  res.delta_max = cur.delta_max;
  res.control_effort = control_effort(res.u);
  res.nominal_robustness = robustness(nominal_dynamic(s.X0, res.u, s.params, s.T, {s.solver.substeps, false}), s.spec, 0);
  res.reach = std::move(cur.reach);
  return res;
}

struct VerificationReport {
  RobustnessInterval interval_robustness;
  double delta_max = 0.0;
  double nominal_robustness = 0.0;  // nominal dynamic trajectory
  double midpoint_robustness = 0.0; // midpoint of the interval trajectory
  double sampled_min_robustness = kInf;
  std::size_t samples = 0;
  std::size_t samples_outside = 0;        // sampled trajectories escaping the boxes (tolerance 1e-9)
  double max_deviation_residual = -kInf;    // max |rho(xi) - rho(midpoint)| - delta_max over samples
  bool satisfied = false;                 // interval_robustness.lo >= 0
};

/// Recomputes the certification quantities for a given control, plus sampled
/// robustness over `samples` draws from the uncertainty boxes.
inline VerificationReport verify(const ControlSignal& u, const Scenario& s, std::size_t samples) {
  s.validate();
  u.validate();
  if (u.size() < s.T) throw std::invalid_argument("control signal is shorter than the horizon");
  if (u.kind != s.kind) throw std::invalid_argument("control kind does not match the scenario");
  VerificationReport r;
  const auto a = detail::assess(s, u);
  r.interval_robustness = a.rho;
  r.delta_max = a.delta_max;
  r.satisfied = a.rho.lo >= 0.0;
  const StepOptions exact{s.solver.substeps, false};
  r.nominal_robustness = robustness(nominal_dynamic(s.X0, u, s.params, s.T, exact), s.spec, 0);
  r.midpoint_robustness = robustness(nominal_midpoint(a.reach), s.spec, 0);
  r.samples = samples;
  if (samples == 0) return r;
  const auto trajs = sample_trajectories(s.X0, u, s.params, s.T, samples, s.seed, exact);
  for (const auto& xi : trajs) {
    const double rho = robustness(xi, s.spec, 0);
    r.sampled_min_robustness = std::min(r.sampled_min_robustness, rho);
    r.max_deviation_residual = std::max(r.max_deviation_residual, std::abs(rho - r.midpoint_robustness) - r.delta_max);
    if (!a.reach.contains(xi, 1e-9)) ++r.samples_outside;
  }
  return r;
}

inline VerificationReport verify(const ControlSignal& u, const Scenario& s) {
  return verify(u, s, s.solver.verification_samples);
}

} // namespace mtlseir
