#pragma once

// Box reachability for the Euler-discretized SEIR models under an initial
// state box and a time-invariant parameter box.
//
// Each Euler substep is enclosed by an inclusion function and then contracted
// with two facts every admissible trajectory satisfies:
//   * the compartment sum is conserved, so it stays in the initial box's sum;
//   * for small enough steps I, E, R, D (and S when no vaccine is withdrawn)
//     remain non-negative if they start that way.
// Without these the enclosure of the uncontrolled epidemic diverges within a
// few dozen days.

#include "mtlseir/errors.hpp"
#include "mtlseir/interval.hpp"
#include "mtlseir/model.hpp"
#include "mtlseir/state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace mtlseir {

/// Componentwise parameter bounds. lambda and mu share one interval and every
/// admissible parameter vector has lambda = mu.
struct ParamBox {
  ModelParams lower;
  ModelParams upper;

  static ParamBox point(const ModelParams& p) { return {p, p}; }

  void validate() const {
    lower.validate();
    upper.validate();
    if (lower.N0 != upper.N0 || lower.Ts != upper.Ts) throw std::invalid_argument("parameter box must fix N0 and Ts");
    const std::array<std::pair<double, double>, 6> pairs{{{lower.alpha, upper.alpha},
                                                          {lower.beta, upper.beta},
                                                          {lower.epsilon, upper.epsilon},
                                                          {lower.gamma, upper.gamma},
                                                          {lower.mu, upper.mu},
                                                          {lower.lambda, upper.lambda}}};
    for (const auto& [lo, hi] : pairs)
      if (!(lo <= hi)) throw std::invalid_argument("parameter box lower bound exceeds upper bound");
  }

  Interval alpha() const { return {lower.alpha, upper.alpha}; }
  Interval beta() const { return {lower.beta, upper.beta}; }
  Interval epsilon() const { return {lower.epsilon, upper.epsilon}; }
  Interval gamma() const { return {lower.gamma, upper.gamma}; }
  Interval mu() const { return {lower.mu, upper.mu}; }

  ModelParams mid() const {
    ModelParams m = lower;
    m.alpha = 0.5 * (lower.alpha + upper.alpha);
    m.beta = 0.5 * (lower.beta + upper.beta);
    m.epsilon = 0.5 * (lower.epsilon + upper.epsilon);
    m.gamma = 0.5 * (lower.gamma + upper.gamma);
    m.mu = 0.5 * (lower.mu + upper.mu);
    m.lambda = m.mu;
    return m;
  }

  bool contains(const ModelParams& p) const {
    return lower.alpha <= p.alpha && p.alpha <= upper.alpha && lower.beta <= p.beta && p.beta <= upper.beta &&
           lower.epsilon <= p.epsilon && p.epsilon <= upper.epsilon && lower.gamma <= p.gamma &&
           p.gamma <= upper.gamma && lower.mu <= p.mu && p.mu <= upper.mu && p.lambda == p.mu && p.N0 == lower.N0 &&
           p.Ts == lower.Ts;
  }
};

enum class InclusionMode { Natural, Centered };

constexpr std::string_view to_string(InclusionMode m) { return m == InclusionMode::Natural ? "natural" : "centered"; }

namespace detail {

inline Interval box_total(const StateBox& X) {
  Interval s{0.0};
  for (std::size_t i = 0; i < kStateDim; ++i) s = s + X[i];
  return s;
}

inline StateBox from_intervals(const std::array<Interval, kStateDim>& v) {
  StateBox b;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    b.lower[i] = v[i].lo;
    b.upper[i] = v[i].hi;
  }
  return b;
}

// Tightest box inside X whose points can still sum to a value in `total`.
inline StateBox contract_total(const StateBox& X, Interval total) {
  double lo_sum = 0.0, hi_sum = 0.0;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    lo_sum += X.lower[i];
    hi_sum += X.upper[i];
  }
  StateBox out = X;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    const Interval bound{total.lo - (hi_sum - X.upper[i]), total.hi - (lo_sum - X.lower[i])};
    const Interval r = meet(X[i], bound);
    out.lower[i] = r.lo;
    out.upper[i] = r.hi;
  }
  return out;
}

struct SubstepContext {
  double h = 1.0;
  double u = 0.0;
  ControlKind kind = ControlKind::Vaccination;
  Interval total; // conserved compartment sum
};

// Lower bounds that one Euler substep provably keeps at or above zero, given
// which inputs are already non-negative. Each case is a sum of non-negative
// terms under the stated step-size condition.
inline StateBox clip_nonnegative(StateBox b, const StateBox& in, const ParamBox& P, const SubstepContext& c) {
  const auto& p = P.upper;
  const double h = c.h;
  const bool I = in.lower[0] >= 0.0, E = in.lower[1] >= 0.0, S = in.lower[2] >= 0.0, R = in.lower[3] >= 0.0,
             D = in.lower[4] >= 0.0;
  const double V = c.kind == ControlKind::Vaccination ? c.u : 0.0;
  std::array<bool, kStateDim> keep{
      I && E && h * (p.gamma + p.mu + p.alpha) <= 1.0,
      E && I && S && R && h * (p.mu + p.epsilon) <= 1.0,
      // S' >= S (1 - h beta) because the incidence ratio is at most S beta.
      V == 0.0 && I && E && S && R && h * p.beta <= 1.0,
      R && I && h * p.mu <= 1.0,
      D && I,
  };
  for (std::size_t i = 0; i < kStateDim; ++i)
    if (keep[i]) {
      b.lower[i] = std::max(b.lower[i], 0.0);
      b.upper[i] = std::max(b.upper[i], b.lower[i]);
    }
  return b;
}

inline StateBox contract(const StateBox& out, const StateBox& in, const ParamBox& P, const SubstepContext& c) {
  return contract_total(clip_nonnegative(contract_total(out, c.total), in, P, c), c.total);
}

// Enclosure of S I / (N + chi R) over the box.
inline Interval incidence_ratio(const StateBox& X, const SubstepContext& c) {
  const Interval I = X[0], E = X[1], S = X[2], R = X[3], D = X[4];
  const double chi = c.kind == ControlKind::Shield ? c.u : 0.0;
  const Interval N = meet(I + E + S + R, c.total - D);
  const Interval den = N + Interval(chi) * R;

  const bool nonneg = I.lo >= 0.0 && E.lo >= 0.0 && S.lo >= 0.0 && R.lo >= 0.0;
  if (!nonneg) {
    if (!(den.lo > kDenominatorFloor)) throw ModelDomainError("transmission denominator interval reaches zero");
    return divide_positive(S * I, den, kDenominatorFloor);
  }

  // On the non-negative orthant the ratio increases in S and I and decreases
  // in E and R, so the extreme values sit at two opposite vertices.
  auto vertex = [&](double s, double e, double i, double r) {
    const double num = s * i;
    if (num == 0.0) return 0.0;
    return num / (s + e + i + (1.0 + chi) * r);
  };
  double lo = vertex(S.lo, E.hi, I.lo, R.hi);
  double hi = std::min({vertex(S.hi, E.lo, I.hi, R.lo), S.hi, I.hi});
  if (den.lo > kDenominatorFloor) {
    lo = std::max(lo, S.lo * I.lo / den.hi);
    hi = std::min(hi, S.hi * I.hi / den.lo);
  }
  return {lo, std::max(lo, hi)};
}

// Enclosure of I / (N + chi R), the per-susceptible infection pressure.
inline Interval infection_pressure(const StateBox& X, const SubstepContext& c) {
  const Interval I = X[0], E = X[1], S = X[2], R = X[3], D = X[4];
  const double chi = c.kind == ControlKind::Shield ? c.u : 0.0;
  const Interval den = meet(I + E + S + R, c.total - D) + Interval(chi) * R;
  if (!(den.lo > kDenominatorFloor)) throw ModelDomainError("transmission denominator interval reaches zero");
  Interval r = divide_positive(I, den, kDenominatorFloor);
  if (I.lo >= 0.0 && E.lo >= 0.0 && S.lo >= 0.0 && R.lo >= 0.0) {
    // Increasing in I, decreasing in the other compartments.
    auto vertex = [&](double i, double e, double s, double rr) {
      return i == 0.0 ? 0.0 : i / (i + e + s + (1.0 + chi) * rr);
    };
    r = meet(r, Interval(vertex(I.lo, E.hi, S.hi, R.hi), vertex(I.hi, E.lo, S.lo, R.lo)));
  }
  return r;
}

inline StateBox natural_substep(const StateBox& X, const ParamBox& P, const SubstepContext& c) {
  const Interval I = X[0], E = X[1], S = X[2], R = X[3], D = X[4];
  const Interval a = P.alpha(), b = P.beta(), e = P.epsilon(), g = P.gamma(), m = P.mu();
  const Interval h{c.h};
  const Interval V{c.kind == ControlKind::Vaccination ? c.u : 0.0};
  const Interval q = b * incidence_ratio(X, c);

  // lambda N - mu S = mu (E + I + R) because lambda = mu for every sample.
  std::array<Interval, kStateDim> y;
  y[0] = (Interval(1.0) - h * (g + m + a)) * I + h * e * E;
  y[1] = (Interval(1.0) - h * (m + e)) * E + h * q;
  // S keeps its correlation with the outflow when written as S times a factor.
  const Interval inflow = h * m * (E + I + R) - h * V;
  y[2] = meet(S + inflow - h * q, S * (Interval(1.0) - h * b * infection_pressure(X, c)) + inflow);
  y[3] = (Interval(1.0) - h * m) * R + h * g * I + h * V;
  y[4] = D + h * a * I;
  return contract(from_intervals(y), X, P, c);
}

using IntervalRow5 = std::array<Interval, kStateDim>;
using IntervalMatrix5 = std::array<IntervalRow5, kStateDim>;

// Interval enclosures of the substep map's derivatives over X and P: with
// respect to the state (Jx) and to (alpha, beta, epsilon, gamma, mu) (Jp), mu
// standing for the tied pair (lambda, mu). Returns false if the transmission
// denominator is not bounded away from zero on X.
inline bool substep_jacobians(const StateBox& X, const ParamBox& P, const SubstepContext& c, IntervalMatrix5& Jx,
                              IntervalMatrix5& Jp) {
  const Interval I = X[0], E = X[1], S = X[2], R = X[3];
  const double chi = c.kind == ControlKind::Shield ? c.u : 0.0;
  const Interval den = I + E + S + R + Interval(chi) * R;
  if (!(den.lo > kDenominatorFloor)) return false;

  const Interval a = P.alpha(), b = P.beta(), e = P.epsilon(), g = P.gamma(), m = P.mu();
  const Interval h{c.h};
  const Interval den2{den.lo * den.lo, den.hi * den.hi};
  const Interval SI = S * I;
  const Interval ratio = divide_positive(SI, den, kDenominatorFloor);
  // d ratio / d x, with d den / d S = 1 folded in analytically (den - S = E + I + (1 + chi) R).
  const Interval dq_dI = b * divide_positive(S * (S + E + Interval(1.0 + chi) * R), den2, 0.0);
  const Interval dq_dS = b * divide_positive(I * (E + I + Interval(1.0 + chi) * R), den2, 0.0);
  const Interval dq_dE = -(b * divide_positive(SI, den2, 0.0));
  const Interval dq_dR = Interval(1.0 + chi) * dq_dE;

  const Interval zero{0.0}, one{1.0};
  Jx = {{
      {one - h * (g + m + a), h * e, zero, zero, zero},
      {h * dq_dI, one + h * (dq_dE - (m + e)), h * dq_dS, h * dq_dR, zero},
      {h * (m - dq_dI), h * (m - dq_dE), one - h * dq_dS, h * (m - dq_dR), zero},
      {h * g, zero, zero, one - h * m, zero},
      {h * a, zero, zero, zero, one},
  }};
  Jp = {{
      {-(h * I), zero, h * E, -(h * I), -(h * I)},
      {zero, h * ratio, -(h * E), zero, -(h * E)},
      {zero, -(h * ratio), zero, zero, h * (E + I + R)},
      {zero, zero, zero, h * I, -(h * R)},
      {h * I, zero, zero, zero, zero},
  }};
  return true;
}

inline std::array<double, kStateDim> param_vector(const ModelParams& p) { return {p.alpha, p.beta, p.epsilon, p.gamma, p.mu}; }

// Mean-value enclosure of the multi-step map r -> x_k(r), r = (x0, theta):
//   x_k(r) in x_k(r_c) + S_k (R - r_c),
// where x_k(r_c) is the point trajectory from the box centres and S_k encloses
// d x_k / d r over the whole box, built by the chain rule
//   S_{k+1} = Jx(X_k, P) S_k + [0 | Jp(X_k, P)].
// Each result is intersected with the natural enclosure of the same step.
// Once the derivative enclosure cannot be formed the natural form continues
// alone.
class MeanValueEnclosure {
public:
  MeanValueEnclosure(const StateBox& X0, const ParamBox& P) : P_(P), box_(X0), centre_(X0.mid()), pc_(P.mid()) {
    const auto pc = param_vector(pc_);
    const auto plo = param_vector(P.lower), phi = param_vector(P.upper);
    for (std::size_t i = 0; i < kStateDim; ++i) {
      dev_[i] = Interval(X0.lower[i] - centre_[i], X0.upper[i] - centre_[i]);
      dev_[kStateDim + i] = Interval(plo[i] - pc[i], phi[i] - pc[i]);
      for (std::size_t j = 0; j < 2 * kStateDim; ++j) sens_[i][j] = Interval(i == j ? 1.0 : 0.0);
    }
  }

  const StateBox& box() const { return box_; }
  bool active() const { return active_; }

  /// Largest first-order contribution of each uncertain coordinate
  /// (x0 then alpha, beta, epsilon, gamma, mu) to the box widths seen so far.
  const std::array<double, 2 * kStateDim>& influence() const { return influence_; }

  void substep(const SubstepContext& c) {
    const StateBox natural = natural_substep(box_, P_, c);
    if (active_) active_ = advance(c);
    if (!active_) {
      box_ = natural;
      return;
    }
    std::array<Interval, kStateDim> y;
    for (std::size_t i = 0; i < kStateDim; ++i) {
      Interval acc{centre_[i]};
      for (std::size_t j = 0; j < 2 * kStateDim; ++j)
        if (dev_[j].lo != 0.0 || dev_[j].hi != 0.0) acc = acc + sens_[i][j] * dev_[j];
      y[i] = meet(acc, natural[i]);
    }
    box_ = contract(from_intervals(y), box_, P_, c);
  }

private:
  bool advance(const SubstepContext& c) {
    IntervalMatrix5 Jx, Jp;
    if (!substep_jacobians(box_, P_, c, Jx, Jp)) return false;
    State d;
    try {
      d = derivative(centre_, c.u, pc_, c.kind);
    } catch (const ModelDomainError&) {
      return false;
    }
    std::array<std::array<Interval, 2 * kStateDim>, kStateDim> next{};
    for (std::size_t i = 0; i < kStateDim; ++i)
      for (std::size_t j = 0; j < 2 * kStateDim; ++j) {
        Interval acc = j >= kStateDim ? Jp[i][j - kStateDim] : Interval(0.0);
        for (std::size_t l = 0; l < kStateDim; ++l)
          if (!Jx[i][l].is_point() || Jx[i][l].lo != 0.0) acc = acc + Jx[i][l] * sens_[l][j];
        next[i][j] = acc;
      }
    sens_ = next;
    for (std::size_t j = 0; j < 2 * kStateDim; ++j) {
      double w = 0.0;
      for (std::size_t i = 0; i < kStateDim; ++i) w += magnitude(sens_[i][j]);
      influence_[j] = std::max(influence_[j], w * dev_[j].width());
    }
    for (std::size_t i = 0; i < kStateDim; ++i) centre_[i] += c.h * d[i];
    return true;
  }

  ParamBox P_;
  StateBox box_;
  State centre_;
  ModelParams pc_;
  std::array<Interval, 2 * kStateDim> dev_{};
  std::array<std::array<Interval, 2 * kStateDim>, kStateDim> sens_{};
  std::array<double, 2 * kStateDim> influence_{};
  bool active_ = true;
};

inline SubstepContext make_context(double u, const ParamBox& P, ControlKind kind, std::size_t substeps, Interval total) {
  if (!std::isfinite(u) || u < 0.0) throw ModelDomainError("control value must be finite and non-negative");
  SubstepContext c;
  c.h = P.lower.Ts / static_cast<double>(substeps);
  c.u = u;
  c.kind = kind;
  c.total = total;
  return c;
}

inline void check_finite(const StateBox& Y) {
  for (std::size_t i = 0; i < kStateDim; ++i)
    if (!std::isfinite(Y.lower[i]) || !std::isfinite(Y.upper[i])) throw ModelDomainError("enclosure became non-finite");
}

} // namespace detail

/// Box containing step(x, u, theta) for every x in X and theta in P. Natural
/// mode evaluates the grouped update terms in interval arithmetic; centered
/// mode adds the mean-value form about the box and parameter midpoints and
/// keeps the intersection.
inline StateBox interval_step(const StateBox& X, double u, const ParamBox& P, ControlKind kind,
                              InclusionMode mode = InclusionMode::Natural, std::size_t substeps = 1) {
  X.validate();
  P.validate();
  const auto c = detail::make_context(u, P, kind, substeps, detail::box_total(X));
  StateBox Y = X;
  if (mode == InclusionMode::Natural) {
    for (std::size_t s = 0; s < substeps; ++s) Y = detail::natural_substep(Y, P, c);
  } else {
    detail::MeanValueEnclosure mv(X, P);
    for (std::size_t s = 0; s < substeps; ++s) mv.substep(c);
    Y = mv.box();
  }
  detail::check_finite(Y);
  return Y;
}

namespace detail {

// Sampling coordinates: 0..4 state, 5..9 alpha, beta, epsilon, gamma, mu.
inline std::array<double, 10> lower_vector(const StateBox& X, const ParamBox& P) {
  return {X.lower[0], X.lower[1], X.lower[2], X.lower[3], X.lower[4],
          P.lower.alpha, P.lower.beta, P.lower.epsilon, P.lower.gamma, P.lower.mu};
}

inline std::array<double, 10> upper_vector(const StateBox& X, const ParamBox& P) {
  return {X.upper[0], X.upper[1], X.upper[2], X.upper[3], X.upper[4],
          P.upper.alpha, P.upper.beta, P.upper.epsilon, P.upper.gamma, P.upper.mu};
}

struct Piece {
  StateBox X0;
  ParamBox P;
  IntervalTrajectory reach;
  std::array<double, 2 * kStateDim> influence{};
  double spread = 0.0; // largest summed box width over the horizon
};

inline void run_piece(Piece& piece, const ControlSignal& u, std::size_t T, InclusionMode mode, std::size_t substeps) {
  const Interval total = box_total(piece.X0);
  auto& out = piece.reach;
  out.lower.step = out.upper.step = piece.P.lower.Ts;
  out.lower.states.assign(1, piece.X0.lower);
  out.upper.states.assign(1, piece.X0.upper);
  out.lower.states.reserve(T + 1);
  out.upper.states.reserve(T + 1);
  StateBox X = piece.X0;
  MeanValueEnclosure mv(piece.X0, piece.P);
  piece.spread = 0.0;
  for (std::size_t k = 0; k < T; ++k) {
    try {
      const auto c = make_context(u[k], piece.P, u.kind, substeps, total);
      for (std::size_t s = 0; s < substeps; ++s) {
        if (mode == InclusionMode::Natural) X = natural_substep(X, piece.P, c);
        else mv.substep(c);
      }
      if (mode == InclusionMode::Centered) X = mv.box();
      check_finite(X);
    } catch (const ModelDomainError& e) {
      throw ModelDomainError(std::string(e.what()) + " at day " + std::to_string(k), k);
    }
    double w = 0.0;
    for (std::size_t i = 0; i < kStateDim; ++i) w += X.upper[i] - X.lower[i];
    piece.spread = std::max(piece.spread, w);
    out.lower.states.push_back(X.lower);
    out.upper.states.push_back(X.upper);
  }
  piece.influence = mv.influence();
  if (mode == InclusionMode::Natural || !mv.active()) {
    // No derivative information: rank coordinates by relative width instead.
    const auto lo = lower_vector(piece.X0, piece.P), hi = upper_vector(piece.X0, piece.P);
    for (std::size_t j = 0; j < lo.size(); ++j) {
      const double scale = std::max(std::abs(lo[j]), std::abs(hi[j]));
      piece.influence[j] = scale > 0.0 ? (hi[j] - lo[j]) / scale : 0.0;
    }
  }
}

inline double& param_coordinate(ModelParams& p, std::size_t j) {
  switch (j) {
  case 0: return p.alpha;
  case 1: return p.beta;
  case 2: return p.epsilon;
  case 3: return p.gamma;
  default: return p.mu;
  }
}

// Halves the piece along coordinate j (x0 components first, then parameters).
inline std::pair<Piece, Piece> bisect(const Piece& piece, std::size_t j) {
  Piece a{piece.X0, piece.P, {}, {}, 0.0}, b = a;
  if (j < kStateDim) {
    const double m = 0.5 * (piece.X0.lower[j] + piece.X0.upper[j]);
    a.X0.upper[j] = m;
    b.X0.lower[j] = m;
  } else {
    const std::size_t q = j - kStateDim;
    const double m = 0.5 * (param_coordinate(a.P.lower, q) + param_coordinate(a.P.upper, q));
    param_coordinate(a.P.upper, q) = m;
    param_coordinate(b.P.lower, q) = m;
    if (q == 4) {
      a.P.upper.lambda = m;
      b.P.lower.lambda = m;
    }
  }
  return {a, b};
}

} // namespace detail

/// Interval trajectory over T days; element 0 is X0. In centered mode the
/// mean-value form is applied to the whole map from (x0, theta) to day k
/// rather than re-centred every day, which avoids most of the wrapping that
/// day-by-day boxes suffer.
///
/// With `partitions` > 1 the uncertainty box is split greedily: the piece
/// whose enclosure is widest is bisected along the coordinate contributing
/// most to its width, until there are `partitions` pieces. The result is the
/// hull of the pieces' enclosures.
inline IntervalTrajectory propagate(const StateBox& X0, const ControlSignal& u, const ParamBox& P, std::size_t T,
                                    InclusionMode mode = InclusionMode::Natural, std::size_t substeps = 1,
                                    std::size_t partitions = 1) {
  X0.validate();
  P.validate();
  if (u.size() < T) throw std::invalid_argument("control signal is shorter than the horizon");
  if (partitions == 0) throw std::invalid_argument("partitions must be positive");
  std::vector<detail::Piece> pieces{{X0, P, {}, {}, 0.0}};
  detail::run_piece(pieces[0], u, T, mode, substeps);
  while (pieces.size() < partitions) {
    auto widest = std::max_element(pieces.begin(), pieces.end(),
                                   [](const auto& a, const auto& b) { return a.spread < b.spread; });
    const auto& inf = widest->influence;
    const auto j = static_cast<std::size_t>(std::max_element(inf.begin(), inf.end()) - inf.begin());
    if (!(inf[j] > 0.0)) break;
    auto [a, b] = detail::bisect(*widest, j);
    detail::run_piece(a, u, T, mode, substeps);
    detail::run_piece(b, u, T, mode, substeps);
    *widest = std::move(a);
    pieces.push_back(std::move(b));
  }
  IntervalTrajectory out = std::move(pieces[0].reach);
  for (std::size_t p = 1; p < pieces.size(); ++p)
    for (std::size_t k = 0; k <= T; ++k)
      for (std::size_t i = 0; i < kStateDim; ++i) {
        out.lower.states[k][i] = std::min(out.lower.states[k][i], pieces[p].reach.lower[k][i]);
        out.upper.states[k][i] = std::max(out.upper.states[k][i], pieces[p].reach.upper[k][i]);
      }
  return out;
}

/// Per-index midpoint of an interval trajectory.
inline Trajectory nominal_midpoint(const IntervalTrajectory& box) {
  Trajectory mid;
  mid.step = box.lower.step;
  mid.states.resize(box.size());
  for (std::size_t k = 0; k < box.size(); ++k) mid.states[k] = box.box(k).mid();
  return mid;
}

/// Trajectory simulated from the midpoint state and midpoint parameters.
inline Trajectory nominal_dynamic(const StateBox& X0, const ControlSignal& u, const ParamBox& P, std::size_t T,
                                  const StepOptions& opt = {}) {
  return simulate(X0.mid(), u, P.mid(), T, opt);
}

struct DeltaProfile {
  std::vector<double> delta_k;
  double delta_max = 0.0;
};

/// delta_k = largest half-width of box k; delta_max = max_k delta_k.
inline DeltaProfile delta_profile(const IntervalTrajectory& box) {
  DeltaProfile d;
  d.delta_k.resize(box.size(), 0.0);
  for (std::size_t k = 0; k < box.size(); ++k) {
    for (std::size_t i = 0; i < kStateDim; ++i)
      d.delta_k[k] = std::max(d.delta_k[k], 0.5 * (box.upper[k][i] - box.lower[k][i]));
    d.delta_max = std::max(d.delta_max, d.delta_k[k]);
  }
  return d;
}

namespace detail {

// Runs body(i) for i in [0, n) on up to hardware_concurrency threads.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Independent stream per (seed, sample index).
inline std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Uniform on [0, 1) from the top 53 bits, identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace detail

/// One draw of an initial state and parameter vector.
struct SampledInstance {
  State x0{};
  ModelParams params;
};

/// n draws of (x0, theta): first every corner of the non-degenerate box
/// dimensions (in binary order, as many as fit), then uniform draws. Draw i
/// depends only on (seed, i).
inline std::vector<SampledInstance> sample_instances(const StateBox& X0, const ParamBox& P, std::size_t n,
                                                     std::uint64_t seed) {
  X0.validate();
  P.validate();
  if (n == 0) throw std::invalid_argument("sample count must be at least 1");
  const auto lo = detail::lower_vector(X0, P);
  const auto hi = detail::upper_vector(X0, P);
  std::vector<std::size_t> free;
  for (std::size_t d = 0; d < lo.size(); ++d)
    if (lo[d] < hi[d]) free.push_back(d);
  const std::size_t corners = std::size_t{1} << free.size();

  std::vector<SampledInstance> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::array<double, 10> v = lo;
    if (s < corners) {
      for (std::size_t b = 0; b < free.size(); ++b)
        if ((s >> b) & 1U) v[free[b]] = hi[free[b]];
    } else {
      auto rng = detail::sample_stream(seed, s);
      for (std::size_t d : free) v[d] = std::min(hi[d], lo[d] + (hi[d] - lo[d]) * detail::unit_uniform(rng));
    }
    auto& inst = out[s];
    for (std::size_t i = 0; i < kStateDim; ++i) inst.x0[i] = v[i];
    inst.params = P.lower;
    inst.params.alpha = v[5];
    inst.params.beta = v[6];
    inst.params.epsilon = v[7];
    inst.params.gamma = v[8];
    inst.params.mu = v[9];
    inst.params.lambda = v[9];
  }
  return out;
}

/// Simulations for `sample_instances(X0, P, n, seed)`, in the same order.
inline std::vector<Trajectory> sample_trajectories(const StateBox& X0, const ControlSignal& u, const ParamBox& P,
                                                   std::size_t T, std::size_t n, std::uint64_t seed,
                                                   const StepOptions& opt = {}) {
  const auto inst = sample_instances(X0, P, n, seed);
  std::vector<Trajectory> out(n);
  detail::parallel_for(n, [&](std::size_t i) { out[i] = simulate(inst[i].x0, u, inst[i].params, T, opt); });
  return out;
}

} // namespace mtlseir
