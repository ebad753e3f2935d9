#pragma once

// SEIR dynamics with a vaccination input V or a shield-immunity strength chi,
// discretized with explicit Euler.
//
//   I' = eps E - (gamma + mu + alpha) I
//   E' = q - (mu + eps) E
//   S' = lambda N - mu S - q - V
//   R' = gamma I - mu R + V
//   D' = -(I' + E' + S' + R')
//
// with N = S + E + I + R and q = beta S I / N (vaccination) or
// q = beta S I / (N + chi R) (shield, V = 0). The equations are used verbatim:
// nothing is clamped, and states that go negative are reported, not repaired.

#include "mtlseir/errors.hpp"
#include "mtlseir/state.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mtlseir {

enum class ControlKind { Vaccination, Shield };

constexpr std::string_view to_string(ControlKind k) { return k == ControlKind::Vaccination ? "vaccination" : "shield"; }

/// Rates are per day, populations in millions, Ts in days.
struct ModelParams {
  double alpha = 0.0;   // fatality
  double beta = 0.0;    // transmission
  double epsilon = 0.0; // incubation exit
  double gamma = 0.0;   // recovery
  double mu = 0.0;      // natural death
  double lambda = 0.0;  // birth
  double N0 = 1.0;
  double Ts = 1.0;

  void validate() const {
    for (double r : {alpha, beta, epsilon, gamma, mu, lambda})
      if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("model rates must be finite and non-negative");
    if (!(N0 > 0.0) || !std::isfinite(N0)) throw std::invalid_argument("N0 must be positive");
    if (!(Ts > 0.0) || !std::isfinite(Ts)) throw std::invalid_argument("Ts must be positive");
    if (lambda != mu) throw std::invalid_argument("birth rate lambda must equal natural death rate mu");
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct StepOptions {
  std::size_t substeps = 1;
  // Replace N by N0 in the transmission denominator (solver-side simplification).
  bool approximate_population = false;
};

/// Per-day control values u[0..T-1]; V in millions/day or dimensionless chi.
struct ControlSignal {
  ControlKind kind = ControlKind::Vaccination;
  std::vector<double> values;
  double u_max = 1.0;

  static ControlSignal zeros(ControlKind kind, std::size_t T, double u_max) { return {kind, std::vector<double>(T, 0.0), u_max}; }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }

  void validate() const {
    if (!(u_max > 0.0) || !std::isfinite(u_max)) throw std::invalid_argument("u_max must be positive and finite");
    for (std::size_t k = 0; k < values.size(); ++k)
      if (!(values[k] >= 0.0 && values[k] <= u_max))
        throw std::invalid_argument("control value at day " + std::to_string(k) + " is outside [0, u_max]");
  }

  friend bool operator==(const ControlSignal&, const ControlSignal&) = default;
};

/// Smallest admissible transmission denominator N (+ chi R).
inline constexpr double kDenominatorFloor = 1e-12;

namespace detail {

inline double denominator(const State& x, double u, const ModelParams& p, ControlKind kind, bool approx) {
  const double N = approx ? p.N0 : x[0] + x[1] + x[2] + x[3];
  return kind == ControlKind::Shield ? N + u * x[3] : N;
}

inline void check_inputs(const State& x, double u) {
  if (!all_finite(x)) throw ModelDomainError("non-finite state");
  if (!std::isfinite(u) || u < 0.0) throw ModelDomainError("control value must be finite and non-negative");
}

} // namespace detail

/// Right-hand side (I', E', S', R', D') in millions per day.
inline State derivative(const State& x, double u, const ModelParams& p, ControlKind kind, bool approximate_population = false) {
  detail::check_inputs(x, u);
  const double I = x[0], E = x[1], S = x[2], R = x[3];
  const double N = I + E + S + R;
  const double den = detail::denominator(x, u, p, kind, approximate_population);
  if (!(den > kDenominatorFloor)) throw ModelDomainError("transmission denominator is not positive");
  const double q = p.beta * S * I / den;
  const double V = kind == ControlKind::Vaccination ? u : 0.0;
  State d{};
  d[0] = p.epsilon * E - (p.gamma + p.mu + p.alpha) * I;
  d[1] = q - (p.mu + p.epsilon) * E;
  d[2] = p.lambda * N - p.mu * S - q - V;
  d[3] = p.gamma * I - p.mu * R + V;
  d[4] = -(d[0] + d[1] + d[2] + d[3]);
  return d;
}

/// One sample period: `substeps` Euler updates of length Ts / substeps.
inline State step(const State& x, double u, const ModelParams& p, ControlKind kind, const StepOptions& opt = {}) {
  const double h = p.Ts / static_cast<double>(opt.substeps);
  State y = x;
  for (std::size_t s = 0; s < opt.substeps; ++s) {
    const State d = derivative(y, u, p, kind, opt.approximate_population);
    for (std::size_t i = 0; i < kStateDim; ++i) y[i] += h * d[i];
  }
  return y;
}

using Matrix5 = std::array<std::array<double, kStateDim>, kStateDim>;

struct StepJacobians {
  Matrix5 dx{}; // d step / d x
  State du{};   // d step / d u
};

namespace detail {

// Jacobian of the right-hand side at x.
inline StepJacobians rhs_jacobians(const State& x, double u, const ModelParams& p, ControlKind kind, bool approx) {
  const double I = x[0], S = x[2], R = x[3];
  const double den = denominator(x, u, p, kind, approx);
  if (!(den > kDenominatorFloor)) throw ModelDomainError("transmission denominator is not positive");
  const double chi = kind == ControlKind::Shield ? u : 0.0;
  const double num = p.beta * S * I;
  const double d2 = den * den;

  // dq/dx in order I, E, S, R, D. d den/dx_j is 1 for I, E, S and 1 + chi for
  // R when N is recomputed; with N fixed only chi R remains.
  std::array<double, kStateDim> dden{1.0, 1.0, 1.0, 1.0 + chi, 0.0};
  if (approx) dden = {0.0, 0.0, 0.0, chi, 0.0};
  std::array<double, kStateDim> dq{};
  for (std::size_t j = 0; j < kStateDim; ++j) dq[j] = -num * dden[j] / d2;
  dq[0] += p.beta * S / den;
  dq[2] += p.beta * I / den;
  const double dq_du = kind == ControlKind::Shield ? -num * R / d2 : 0.0;

  StepJacobians J;
  auto& A = J.dx;
  A[0][0] = -(p.gamma + p.mu + p.alpha);
  A[0][1] = p.epsilon;
  for (std::size_t j = 0; j < kStateDim; ++j) {
    A[1][j] = dq[j];
    A[2][j] = -dq[j];
  }
  A[1][1] -= p.mu + p.epsilon;
  for (std::size_t j = 0; j < 4; ++j) A[2][j] += p.lambda;
  A[2][2] -= p.mu;
  A[3][0] = p.gamma;
  A[3][3] = -p.mu;
  for (std::size_t j = 0; j < kStateDim; ++j) A[4][j] = -(A[0][j] + A[1][j] + A[2][j] + A[3][j]);

  auto& b = J.du;
  if (kind == ControlKind::Vaccination) {
    b = {0.0, 0.0, -1.0, 1.0, 0.0};
  } else {
    b = {0.0, dq_du, -dq_du, 0.0, 0.0};
  }
  b[4] = -(b[0] + b[1] + b[2] + b[3]);
  return J;
}

} // namespace detail

/// Analytic Jacobians of `step` with respect to the state and the control.
inline StepJacobians jacobians(const State& x, double u, const ModelParams& p, ControlKind kind, const StepOptions& opt = {}) {
  detail::check_inputs(x, u);
  const double h = p.Ts / static_cast<double>(opt.substeps);
  StepJacobians total;
  for (std::size_t i = 0; i < kStateDim; ++i) total.dx[i][i] = 1.0;
  State y = x;
  for (std::size_t s = 0; s < opt.substeps; ++s) {
    const StepJacobians f = detail::rhs_jacobians(y, u, p, kind, opt.approximate_population);
    // Substep map g(y) = y + h f(y): G = Id + h Fx, g_u = h Fu.
    Matrix5 G{};
    for (std::size_t i = 0; i < kStateDim; ++i)
      for (std::size_t j = 0; j < kStateDim; ++j) G[i][j] = (i == j ? 1.0 : 0.0) + h * f.dx[i][j];
    StepJacobians next;
    for (std::size_t i = 0; i < kStateDim; ++i) {
      double bu = h * f.du[i];
      for (std::size_t j = 0; j < kStateDim; ++j) {
        double a = 0.0;
        for (std::size_t l = 0; l < kStateDim; ++l) a += G[i][l] * total.dx[l][j];
        next.dx[i][j] = a;
        bu += G[i][j] * total.du[j];
      }
      next.du[i] = bu;
    }
    total = next;
    const State d = derivative(y, u, p, kind, opt.approximate_population);
    for (std::size_t i = 0; i < kStateDim; ++i) y[i] += h * d[i];
  }
  return total;
}

/// A (day, compartment) pair at which a simulated state went negative.
struct NegativeState {
  std::size_t day = 0;
  Compartment compartment = Compartment::I;
  double value = 0.0;
};

struct ValidityReport {
  std::vector<NegativeState> negatives;
  bool valid() const { return negatives.empty(); }
};

inline ValidityReport check_validity(const Trajectory& xi) {
  ValidityReport r;
  for (std::size_t k = 0; k < xi.size(); ++k)
    for (auto c : kCompartments)
      if (at(xi[k], c) < 0.0) r.negatives.push_back({k, c, at(xi[k], c)});
  return r;
}

/// Iterates `step` T times from x0. Throws ModelDomainError carrying the day
/// index if a state becomes non-finite.
inline Trajectory simulate(const State& x0, const ControlSignal& u, const ModelParams& p, std::size_t T,
                           const StepOptions& opt = {}, ValidityReport* report = nullptr) {
  if (u.size() < T) throw std::invalid_argument("control signal is shorter than the horizon");
  Trajectory xi;
  xi.step = p.Ts;
  xi.states.reserve(T + 1);
  xi.states.push_back(x0);
  for (std::size_t k = 0; k < T; ++k) {
    State next;
    try {
      next = step(xi.states.back(), u[k], p, u.kind, opt);
    } catch (const ModelDomainError& e) {
      throw ModelDomainError(std::string(e.what()) + " at day " + std::to_string(k), k);
    }
    if (!all_finite(next)) throw ModelDomainError("state became non-finite at day " + std::to_string(k + 1), k + 1);
    xi.states.push_back(next);
  }
  if (report) *report = check_validity(xi);
  return xi;
}

} // namespace mtlseir
