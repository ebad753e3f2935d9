#pragma once

#include "mtlseir/errors.hpp"
#include "mtlseir/formula.hpp"
#include "mtlseir/interval.hpp"
#include "mtlseir/state.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>

namespace mtlseir {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Bracket [lo, hi] on the robustness of every trajectory inside an interval
/// trajectory. `lo` is the certified worst case.
struct RobustnessInterval {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const RobustnessInterval&, const RobustnessInterval&) = default;
};

namespace detail {

inline void check_horizon(std::size_t length, const Formula& phi, std::size_t k) {
  const std::size_t h = phi.horizon();
  if (length == 0 || k + h >= length)
    throw HorizonError("trajectory of length " + std::to_string(length) + " is too short to evaluate a formula of horizon " +
                       std::to_string(h) + " at index " + std::to_string(k));
}

// The three evaluators below share one recursion over the formula; only the
// value domain differs (bool, double, interval of doubles).

inline bool holds(const Trajectory& xi, const Formula& phi, std::size_t k) {
  switch (phi.kind()) {
  case FormulaKind::True: return true;
  case FormulaKind::Atomic: {
    const auto& p = phi.predicate();
    const double v = at(xi[k], p.coordinate);
    return p.relation == Relation::LE ? v <= p.threshold : v >= p.threshold;
  }
  case FormulaKind::Not: return !holds(xi, phi.child(), k);
  case FormulaKind::And: return holds(xi, phi.left(), k) && holds(xi, phi.right(), k);
  case FormulaKind::Or: return holds(xi, phi.left(), k) || holds(xi, phi.right(), k);
  case FormulaKind::Eventually: {
    const auto b = phi.bound();
    for (std::size_t j = k + b.lo; j <= k + b.hi; ++j)
      if (holds(xi, phi.child(), j)) return true;
    return false;
  }
  case FormulaKind::Always: {
    const auto b = phi.bound();
    for (std::size_t j = k + b.lo; j <= k + b.hi; ++j)
      if (!holds(xi, phi.child(), j)) return false;
    return true;
  }
  case FormulaKind::Until: {
    const auto b = phi.bound();
    bool prefix = true; // phi1 on [k, j)
    for (std::size_t j = k; j <= k + b.hi; ++j) {
      if (j >= k + b.lo && prefix && holds(xi, phi.right(), j)) return true;
      prefix = prefix && holds(xi, phi.left(), j);
      if (!prefix) return false;
    }
    return false;
  }
  }
  return false;
}

inline double rho(const Trajectory& xi, const Formula& phi, std::size_t k) {
  switch (phi.kind()) {
  case FormulaKind::True: return kInf;
  case FormulaKind::Atomic: return phi.predicate().robustness(xi[k]);
  case FormulaKind::Not: return -rho(xi, phi.child(), k);
  case FormulaKind::And: return std::min(rho(xi, phi.left(), k), rho(xi, phi.right(), k));
  case FormulaKind::Or: return std::max(rho(xi, phi.left(), k), rho(xi, phi.right(), k));
  case FormulaKind::Eventually: {
    const auto b = phi.bound();
    double r = -kInf;
    for (std::size_t j = k + b.lo; j <= k + b.hi; ++j) r = std::max(r, rho(xi, phi.child(), j));
    return r;
  }
  case FormulaKind::Always: {
    const auto b = phi.bound();
    double r = kInf;
    for (std::size_t j = k + b.lo; j <= k + b.hi; ++j) r = std::min(r, rho(xi, phi.child(), j));
    return r;
  }
  case FormulaKind::Until: {
    const auto b = phi.bound();
    double best = -kInf;
    double prefix = kInf; // min of phi1 over [k, j)
    for (std::size_t j = k; j <= k + b.hi; ++j) {
      if (j >= k + b.lo) best = std::max(best, std::min(rho(xi, phi.right(), j), prefix));
      if (j < k + b.hi) prefix = std::min(prefix, rho(xi, phi.left(), j));
    }
    return best;
  }
  }
  return 0.0;
}

inline Interval rho_box(const IntervalTrajectory& box, const Formula& phi, std::size_t k) {
  switch (phi.kind()) {
  case FormulaKind::True: return {kInf, kInf};
  case FormulaKind::Atomic: {
    const auto& p = phi.predicate();
    const double lo = at(box.lower[k], p.coordinate);
    const double hi = at(box.upper[k], p.coordinate);
    if (p.relation == Relation::LE) return {p.threshold - hi, p.threshold - lo};
    return {lo - p.threshold, hi - p.threshold};
  }
  case FormulaKind::Not: return -rho_box(box, phi.child(), k);
  case FormulaKind::And: return min(rho_box(box, phi.left(), k), rho_box(box, phi.right(), k));
  case FormulaKind::Or: return max(rho_box(box, phi.left(), k), rho_box(box, phi.right(), k));
  case FormulaKind::Eventually: {
    const auto b = phi.bound();
    Interval r{-kInf, -kInf};
    for (std::size_t j = k + b.lo; j <= k + b.hi; ++j) r = max(r, rho_box(box, phi.child(), j));
    return r;
  }
  case FormulaKind::Always: {
    const auto b = phi.bound();
    Interval r{kInf, kInf};
    for (std::size_t j = k + b.lo; j <= k + b.hi; ++j) r = min(r, rho_box(box, phi.child(), j));
    return r;
  }
  case FormulaKind::Until: {
    const auto b = phi.bound();
    Interval best{-kInf, -kInf};
    Interval prefix{kInf, kInf};
    for (std::size_t j = k; j <= k + b.hi; ++j) {
      if (j >= k + b.lo) best = max(best, min(rho_box(box, phi.right(), j), prefix));
      if (j < k + b.hi) prefix = min(prefix, rho_box(box, phi.left(), j));
    }
    return best;
  }
  }
  return {};
}

} // namespace detail

/// Boolean satisfaction of `phi` by `xi` at index `k`.
inline bool eval_boolean(const Trajectory& xi, const Formula& phi, std::size_t k = 0) {
  detail::check_horizon(xi.size(), phi, k);
  return detail::holds(xi, phi, k);
}

/// Quantitative robustness degree. Atoms score `threshold - x_i` for `<=` and
/// `x_i - threshold` for `>=`; negation flips the sign, disjunction and the
/// outer Until aggregation take maxima, conjunction and the Until prefix take
/// minima. `true` scores +infinity.
inline double robustness(const Trajectory& xi, const Formula& phi, std::size_t k = 0) {
  detail::check_horizon(xi.size(), phi, k);
  return detail::rho(xi, phi, k);
}

/// Robustness bracket over every trajectory whose k-th state lies in the k-th
/// box. The lower end is sound for any formula and exact when, at each time
/// index, the atoms read there use distinct coordinates with one polarity each.
inline RobustnessInterval interval_robustness(const IntervalTrajectory& box, const Formula& phi, std::size_t k = 0) {
  box.validate();
  detail::check_horizon(box.size(), phi, k);
  const Interval r = detail::rho_box(box, phi, k);
  return {r.lo, r.hi};
}

} // namespace mtlseir
