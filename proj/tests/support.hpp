#pragma once

#include "mtlseir/parser.hpp"
#include "mtlseir/scenario_io.hpp"
#include "mtlseir/synthesis.hpp"

#include <algorithm>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace testing_support {

using namespace mtlseir;

inline std::string scenario_path(const std::string& name) { return std::string(MTLSEIR_SCENARIO_DIR) + "/" + name + ".scn"; }

inline const std::vector<std::string>& bundled_names() {
  static const std::vector<std::string> names{"vaccination_1", "vaccination_2", "vaccination_3",
                                              "shield_1",      "shield_2",      "shield_3"};
  return names;
}

inline ModelParams midpoint_params() {
  ModelParams p;
  p.alpha = 0.006;
  p.beta = 0.75;
  p.epsilon = 0.2;
  p.gamma = 0.2;
  p.mu = p.lambda = 1.0 / 30295.0;
  p.N0 = 10.0;
  p.Ts = 1.0;
  return p;
}

inline ParamBox reference_box() {
  ModelParams lo = midpoint_params(), hi = lo;
  for (double ModelParams::*f : {&ModelParams::alpha, &ModelParams::beta, &ModelParams::epsilon, &ModelParams::gamma}) {
    lo.*f -= 0.001;
    hi.*f += 0.001;
  }
  return {lo, hi};
}

inline State initial_midpoint() { return {0.001, 0.02, 9.979, 0.0, 0.0}; }

inline StateBox initial_box() { return StateBox::centered(initial_midpoint(), {0.001, 0.001, 0.001, 0.0, 0.0}); }

inline Scenario make_scenario(ControlKind kind, const std::string& spec, std::size_t T = 100) {
  Scenario s;
  s.kind = kind;
  s.X0 = initial_box();
  s.params = reference_box();
  s.spec = parse(spec);
  s.T = T;
  s.u_max = kind == ControlKind::Vaccination ? 1.0 : 10000.0;
  s.seed = 1;
  return s;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Trajectory random_trajectory(std::mt19937_64& rng, std::size_t length, double lo = 0.0, double hi = 1.0) {
  Trajectory xi;
  xi.states.resize(length);
  for (auto& x : xi.states)
    for (double& v : x) v = uniform(rng, lo, hi);
  return xi;
}

// Random formula of the given depth whose horizon is at most `budget`.
inline Formula random_formula(std::mt19937_64& rng, std::size_t depth, std::size_t budget) {
  auto atom = [&] {
    const auto c = kCompartments[uniform_index(rng, 0, kStateDim - 1)];
    const auto r = uniform_index(rng, 0, 1) ? Relation::LE : Relation::GE;
    return Formula::atom(c, r, uniform(rng, 0.0, 1.0));
  };
  if (depth == 0) return uniform_index(rng, 0, 19) == 0 ? Formula::truth() : atom();
  auto bound = [&] {
    const std::size_t a = uniform_index(rng, 0, budget);
    const std::size_t b = uniform_index(rng, a, budget);
    return TimeBound{a, b};
  };
  switch (uniform_index(rng, 0, 7)) {
  case 0: return atom();
  case 1: return Formula::negation(random_formula(rng, depth - 1, budget));
  case 2: return Formula::conjunction(random_formula(rng, depth - 1, budget), random_formula(rng, depth - 1, budget));
  case 3: return Formula::disjunction(random_formula(rng, depth - 1, budget), random_formula(rng, depth - 1, budget));
  case 4: {
    const auto b = bound();
    const std::size_t rest = budget - b.hi;
    return Formula::until(random_formula(rng, depth - 1, rest), random_formula(rng, depth - 1, rest), b);
  }
  case 5: {
    const auto b = bound();
    return Formula::eventually(random_formula(rng, depth - 1, budget - b.hi), b);
  }
  default: {
    const auto b = bound();
    return Formula::always(random_formula(rng, depth - 1, budget - b.hi), b);
  }
  }
}

// Random admissible control: a random level times per-day uniform draws.
inline ControlSignal random_control(std::mt19937_64& rng, ControlKind kind, std::size_t T, double u_max) {
  ControlSignal u = ControlSignal::zeros(kind, T, u_max);
  const double level = uniform(rng, 0.0, 1.0);
  for (double& v : u.values) v = level * uniform(rng, 0.0, u_max);
  return u;
}

// Random control of at most `scale` whose midpoint trajectory keeps a small
// margin of susceptibles, so vaccination never withdraws more than the pool holds.
inline ControlSignal admissible_control(std::mt19937_64& rng, const Scenario& s, double scale) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    ControlSignal u = random_control(rng, s.kind, s.T, scale);
    u.u_max = s.u_max;
    const auto xi = simulate(s.X0.mid(), u, s.params.mid(), s.T);
    bool ok = true;
    for (const auto& x : xi.states) ok = ok && x[2] >= 0.05 && *std::min_element(x.begin(), x.end()) >= 0.0;
    if (ok) return u;
  }
  throw std::runtime_error("no admissible control found");
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

} // namespace testing_support
