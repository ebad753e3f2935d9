#pragma once

#include "mtlseir/interval.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace mtlseir {

inline constexpr std::size_t kStateDim = 5;

// Compartment order follows x = [I, E, S, R, D]. Units are millions of persons.
enum class Compartment : std::size_t { I = 0, E = 1, S = 2, R = 3, D = 4 };

inline constexpr std::array<Compartment, kStateDim> kCompartments{
    Compartment::I, Compartment::E, Compartment::S, Compartment::R, Compartment::D};

constexpr std::size_t index(Compartment c) { return static_cast<std::size_t>(c); }

constexpr std::string_view name(Compartment c) {
  constexpr std::array<std::string_view, kStateDim> names{"I", "E", "S", "R", "D"};
  return names[index(c)];
}

inline std::optional<Compartment> compartment_from_name(std::string_view s) {
  for (auto c : kCompartments)
    if (name(c) == s) return c;
  return std::nullopt;
}

using State = std::array<double, kStateDim>;

inline double& at(State& x, Compartment c) { return x[index(c)]; }
inline double at(const State& x, Compartment c) { return x[index(c)]; }

inline double total(const State& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

inline bool all_finite(const State& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Time-indexed state sequence sampled every `step` days.
struct Trajectory {
  std::vector<State> states;
  double step = 1.0;

  std::size_t size() const { return states.size(); }
  const State& operator[](std::size_t k) const { return states[k]; }
  State& operator[](std::size_t k) { return states[k]; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Axis-aligned box of states.
struct StateBox {
  State lower{};
  State upper{};

  static StateBox point(const State& x) { return {x, x}; }

  static StateBox centered(const State& center, const State& halfwidth) {
    StateBox b;
    for (std::size_t i = 0; i < kStateDim; ++i) {
      b.lower[i] = center[i] - halfwidth[i];
      b.upper[i] = center[i] + halfwidth[i];
    }
    b.validate();
    return b;
  }

  void validate() const {
    for (std::size_t i = 0; i < kStateDim; ++i)
      if (!(lower[i] <= upper[i]))
        throw std::invalid_argument("state box lower bound exceeds upper bound");
  }

  Interval operator[](std::size_t i) const { return {lower[i], upper[i]}; }
  Interval operator[](Compartment c) const { return (*this)[index(c)]; }

  State mid() const {
    State m{};
    for (std::size_t i = 0; i < kStateDim; ++i) m[i] = 0.5 * (lower[i] + upper[i]);
    return m;
  }

  bool contains(const State& x, double tol = 0.0) const {
    for (std::size_t i = 0; i < kStateDim; ++i)
      if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    return true;
  }

  bool contains(const StateBox& o) const {
    for (std::size_t i = 0; i < kStateDim; ++i)
      if (o.lower[i] < lower[i] || o.upper[i] > upper[i]) return false;
    return true;
  }

  friend bool operator==(const StateBox&, const StateBox&) = default;
};

/// Per-step boxes [lower_k, upper_k].
struct IntervalTrajectory {
  Trajectory lower;
  Trajectory upper;

  std::size_t size() const { return lower.size(); }

  StateBox box(std::size_t k) const { return {lower[k], upper[k]}; }

  void validate() const {
    if (lower.size() != upper.size() || lower.step != upper.step)
      throw std::invalid_argument("interval trajectory bounds differ in length or step");
    for (std::size_t k = 0; k < lower.size(); ++k)
      for (std::size_t i = 0; i < kStateDim; ++i)
        if (!(lower[k][i] <= upper[k][i]))
          throw std::invalid_argument("interval trajectory has lower > upper at index " +
                                      std::to_string(k));
  }

  bool contains(const Trajectory& xi, double tol = 0.0) const {
    if (xi.size() > size()) return false;
    for (std::size_t k = 0; k < xi.size(); ++k)
      if (!box(k).contains(xi[k], tol)) return false;
    return true;
  }

  static IntervalTrajectory point(const Trajectory& xi) { return {xi, xi}; }
};

} // namespace mtlseir
