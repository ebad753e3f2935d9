#pragma once

// Scenario files and run artifacts.
//
// A scenario file is a sectioned key/value document; docs/scenario-format.md
// has the full grammar. Uncertain quantities are written `centre +- halfwidth`
// (or with the ± sign), and any number may be a ratio such as 1/30295.
//
//   [model]          kind, Ts, N0, substeps
//   [params]         alpha, beta, epsilon, gamma, mu, lambda
//   [initial_state]  I, E, S, R, D
//   [spec]           formula
//   [horizon]        days
//   [control]        kind, u_max
//   [solver]         SolverConfig fields
//   [seed]           value

#include "mtlseir/model.hpp"
#include "mtlseir/parser.hpp"
#include "mtlseir/reach.hpp"
#include "mtlseir/state.hpp"
#include "mtlseir/synthesis.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mtlseir {

/// Malformed scenario or artifact file. `line()` is 1-based, 0 when the
/// problem is not tied to a line.
class FormatError : public std::invalid_argument {
public:
  FormatError(const std::string& what, std::size_t line = 0)
      : std::invalid_argument(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

// number | number '/' number
inline double parse_number(std::string_view s, std::size_t line) {
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) {
    if (auto v = to_double(s); v && std::isfinite(*v)) return *v;
    throw FormatError("expected a number, got '" + std::string(trim(s)) + "'", line);
  }
  const auto num = to_double(s.substr(0, slash)), den = to_double(s.substr(slash + 1));
  if (!num || !den || !std::isfinite(*num) || !std::isfinite(*den) || *den == 0.0)
    throw FormatError("expected a ratio of finite numbers, got '" + std::string(trim(s)) + "'", line);
  return *num / *den;
}

inline Interval parse_uncertain(std::string_view s, std::size_t line) {
  std::size_t pos = s.find("+-"), len = 2;
  if (pos == std::string_view::npos) {
    pos = s.find("±");
    len = std::string_view("±").size();
  }
  if (pos == std::string_view::npos) return Interval(parse_number(s, line));
  const double c = parse_number(s.substr(0, pos), line);
  const double h = parse_number(s.substr(pos + len), line);
  if (h < 0.0) throw FormatError("halfwidth must be non-negative", line);
  return {c - h, c + h};
}

inline std::vector<double> parse_list(std::string_view s, std::size_t line) {
  std::vector<double> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_number(s.substr(0, comma), line));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

inline std::size_t parse_count(std::string_view s, std::size_t line) {
  s = trim(s);
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw FormatError("expected a non-negative integer, got '" + std::string(s) + "'", line);
  return v;
}

inline bool parse_bool(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s == "true") return true;
  if (s == "false") return false;
  throw FormatError("expected true or false, got '" + std::string(s) + "'", line);
}

inline ControlKind parse_kind(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s == "vaccination") return ControlKind::Vaccination;
  if (s == "shield") return ControlKind::Shield;
  throw FormatError("control kind must be vaccination or shield, got '" + std::string(s) + "'", line);
}

inline InclusionMode parse_mode(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s == "natural") return InclusionMode::Natural;
  if (s == "centered") return InclusionMode::Centered;
  throw FormatError("inclusion mode must be natural or centered, got '" + std::string(s) + "'", line);
}

struct Entry {
  std::string value;
  std::size_t line = 0;
};

using Document = std::map<std::string, std::map<std::string, Entry>>;

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"kind", "Ts", "N0", "substeps"}},
      {"params", {"alpha", "beta", "epsilon", "gamma", "mu", "lambda"}},
      {"initial_state", {"I", "E", "S", "R", "D"}},
      {"spec", {"formula"}},
      {"horizon", {"days"}},
      {"control", {"kind", "u_max"}},
      {"solver",
       {"beta_schedule", "penalty_schedule", "max_inner_iterations", "step_min", "step_max", "line_search_memory",
        "sufficient_decrease", "gradient_tolerance", "feasibility_tolerance", "iter_max", "restarts",
        "multiplier_rounds", "polish_rounds", "backtracks", "approximate_population", "inclusion_mode",
        "reach_partitions", "verification_samples"}},
      {"seed", {"value"}},
  };
  return keys;
}

inline Document read_document(std::istream& in) {
  Document doc;
  std::string section;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw FormatError("unterminated section header", line);
      section = std::string(trim(s.substr(1, s.size() - 2)));
      if (!known_keys().count(section)) throw FormatError("unknown section [" + section + "]", line);
      if (doc.count(section)) throw FormatError("duplicate section [" + section + "]", line);
      doc[section];
      continue;
    }
    if (section.empty()) throw FormatError("key outside of any section", line);
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected key = value", line);
    const std::string key(trim(s.substr(0, eq)));
    if (!known_keys().at(section).count(key)) throw FormatError("unknown key '" + key + "' in [" + section + "]", line);
    auto& slot = doc[section];
    if (slot.count(key)) throw FormatError("duplicate key '" + key + "' in [" + section + "]", line);
    slot[key] = {std::string(trim(s.substr(eq + 1))), line};
  }
  return doc;
}

inline const Entry* find(const Document& doc, const std::string& section, const std::string& key) {
  const auto s = doc.find(section);
  if (s == doc.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

inline const Entry& require(const Document& doc, const std::string& section, const std::string& key) {
  if (const Entry* e = find(doc, section, key)) return *e;
  throw FormatError("missing key '" + key + "' in [" + section + "]");
}

inline void apply_solver(const Document& doc, SolverConfig& c) {
  const auto s = doc.find("solver");
  if (s == doc.end()) return;
  for (const auto& [key, e] : s->second) {
    const std::string_view v = e.value;
    const std::size_t l = e.line;
    if (key == "beta_schedule") c.beta_schedule = parse_list(v, l);
    else if (key == "penalty_schedule") c.penalty_schedule = parse_list(v, l);
    else if (key == "max_inner_iterations") c.max_inner_iterations = parse_count(v, l);
    else if (key == "step_min") c.step_min = parse_number(v, l);
    else if (key == "step_max") c.step_max = parse_number(v, l);
    else if (key == "line_search_memory") c.line_search_memory = parse_count(v, l);
    else if (key == "sufficient_decrease") c.sufficient_decrease = parse_number(v, l);
    else if (key == "gradient_tolerance") c.gradient_tolerance = parse_number(v, l);
    else if (key == "feasibility_tolerance") c.feasibility_tolerance = parse_number(v, l);
    else if (key == "iter_max") c.iter_max = parse_count(v, l);
    else if (key == "restarts") c.restarts = parse_count(v, l);
    else if (key == "multiplier_rounds") c.multiplier_rounds = parse_count(v, l);
    else if (key == "polish_rounds") c.polish_rounds = parse_count(v, l);
    else if (key == "backtracks") c.backtracks = parse_count(v, l);
    else if (key == "approximate_population") c.approximate_population = parse_bool(v, l);
    else if (key == "inclusion_mode") c.inclusion_mode = parse_mode(v, l);
    else if (key == "reach_partitions") c.reach_partitions = parse_count(v, l);
    else if (key == "verification_samples") c.verification_samples = parse_count(v, l);
  }
}

} // namespace detail

/// Default u_max when the scenario does not set one.
constexpr double default_u_max(ControlKind k) { return k == ControlKind::Vaccination ? 1.0 : 10000.0; }

/// Parses and validates a scenario document.
inline Scenario read_scenario(std::istream& in) {
  using namespace detail;
  const Document doc = read_document(in);

  const Entry* model_kind = find(doc, "model", "kind");
  const Entry* control_kind = find(doc, "control", "kind");
  if (!model_kind && !control_kind) throw FormatError("missing control kind ([model] kind or [control] kind)");
  Scenario s;
  s.kind = parse_kind(model_kind ? model_kind->value : control_kind->value,
                      model_kind ? model_kind->line : control_kind->line);
  if (model_kind && control_kind && parse_kind(control_kind->value, control_kind->line) != s.kind)
    throw FormatError("[model] kind and [control] kind disagree", control_kind->line);

  ModelParams lo, hi;
  const Entry& n0 = require(doc, "model", "N0");
  lo.N0 = hi.N0 = parse_number(n0.value, n0.line);
  if (const Entry* ts = find(doc, "model", "Ts")) lo.Ts = hi.Ts = parse_number(ts->value, ts->line);
  if (const Entry* sub = find(doc, "model", "substeps")) s.solver.substeps = parse_count(sub->value, sub->line);

  auto rate = [&](const char* key, double& l, double& h) {
    const Entry& e = require(doc, "params", key);
    const Interval v = parse_uncertain(e.value, e.line);
    l = v.lo;
    h = v.hi;
  };
  rate("alpha", lo.alpha, hi.alpha);
  rate("beta", lo.beta, hi.beta);
  rate("epsilon", lo.epsilon, hi.epsilon);
  rate("gamma", lo.gamma, hi.gamma);
  rate("mu", lo.mu, hi.mu);
  rate("lambda", lo.lambda, hi.lambda);
  if (lo.lambda != lo.mu || hi.lambda != hi.mu)
    throw FormatError("lambda must equal mu", require(doc, "params", "lambda").line);
  s.params = {lo, hi};

  for (auto c : kCompartments) {
    const Entry& e = require(doc, "initial_state", std::string(name(c)));
    const Interval v = parse_uncertain(e.value, e.line);
    s.X0.lower[index(c)] = v.lo;
    s.X0.upper[index(c)] = v.hi;
  }

  const Entry& f = require(doc, "spec", "formula");
  try {
    s.spec = parse(f.value);
  } catch (const ParseError& e) {
    throw FormatError(std::string("formula: ") + e.what(), f.line);
  }
  const Entry& days = require(doc, "horizon", "days");
  s.T = parse_count(days.value, days.line);

  s.u_max = default_u_max(s.kind);
  if (const Entry* u = find(doc, "control", "u_max")) s.u_max = parse_number(u->value, u->line);
  if (const Entry* seed = find(doc, "seed", "value")) s.seed = parse_count(seed->value, seed->line);

  apply_solver(doc, s.solver);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return s;
}

inline Scenario read_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  return read_scenario(static_cast<std::istream&>(in));
}

/// Artifact number format: 9 significant digits.
inline std::string format9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// Shortest decimal that reads back as exactly v.
inline std::string format_exact(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline void write_control_csv(std::ostream& out, const ControlSignal& u) {
  out << "day,u\n";
  for (std::size_t k = 0; k < u.size(); ++k) out << k << ',' << format9(u[k]) << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = line.find(',');
    out.emplace_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

inline Table read_table(std::istream& in) {
  Table t;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = trim(raw);
    if (s.empty()) continue;
    if (t.header.empty()) {
      t.header = split_csv(s);
      continue;
    }
    const auto cells = split_csv(s);
    if (cells.size() != t.header.size())
      throw FormatError("expected " + std::to_string(t.header.size()) + " fields, got " + std::to_string(cells.size()), line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, line));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw FormatError("empty CSV file");
  return t;
}

} // namespace detail

/// Reads a `day,u` CSV written by write_control_csv. The file must hold
/// exactly `length` rows with days 0..length-1 and values in [0, u_max].
inline ControlSignal read_control_csv(std::istream& in, ControlKind kind, double u_max, std::size_t length) {
  const auto t = detail::read_table(in);
  const auto day = t.column("day"), val = t.column("u");
  if (!day || !val) throw FormatError("control CSV needs columns day and u");
  if (t.rows.size() != length)
    throw FormatError("control CSV has " + std::to_string(t.rows.size()) + " rows; the horizon needs " +
                      std::to_string(length));
  ControlSignal u{kind, std::vector<double>(length), u_max};
  for (std::size_t k = 0; k < length; ++k) {
    if (t.rows[k][*day] != static_cast<double>(k)) throw FormatError("control CSV days must run 0, 1, 2, ...", k + 2);
    u.values[k] = t.rows[k][*val];
  }
  try {
    u.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return u;
}

/// Point trajectory: day, the five compartments and their sum.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& xi) {
  out << "day,I,E,S,R,D,total\n";
  for (std::size_t k = 0; k < xi.size(); ++k) {
    out << k;
    for (double v : xi[k]) out << ',' << format9(v);
    out << ',' << format9(total(xi[k])) << '\n';
  }
}

/// Interval trajectory with the nominal trajectory between the bounds.
inline void write_interval_csv(std::ostream& out, const IntervalTrajectory& box, const Trajectory& nominal) {
  if (nominal.size() != box.size()) throw std::invalid_argument("nominal and interval trajectories differ in length");
  out << "day";
  for (auto c : kCompartments)
    for (const char* part : {"_lower", "_nominal", "_upper"}) out << ',' << name(c) << part;
  out << '\n';
  for (std::size_t k = 0; k < box.size(); ++k) {
    out << k;
    for (std::size_t i = 0; i < kStateDim; ++i)
      out << ',' << format9(box.lower[k][i]) << ',' << format9(nominal[k][i]) << ',' << format9(box.upper[k][i]);
    out << '\n';
  }
}

/// Reads a point trajectory from columns named I, E, S, R, D, or from the
/// `<C>_nominal` columns of an interval trajectory file.
inline Trajectory read_trajectory_csv(std::istream& in) {
  const auto t = detail::read_table(in);
  std::array<std::size_t, kStateDim> col{};
  for (auto c : kCompartments) {
    const std::string n(name(c));
    auto i = t.column(n);
    if (!i) i = t.column(n + "_nominal");
    if (!i) throw FormatError("trajectory CSV has no column " + n);
    col[index(c)] = *i;
  }
  Trajectory xi;
  xi.states.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    State x{};
    for (std::size_t i = 0; i < kStateDim; ++i) x[i] = row[col[i]];
    xi.states.push_back(x);
  }
  return xi;
}

/// JSON number with 9 significant digits; non-finite values become null.
inline nlohmann::json json9(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format9(v));
}

inline nlohmann::json to_json(const RobustnessInterval& r) { return {{"lo", json9(r.lo)}, {"hi", json9(r.hi)}}; }

inline nlohmann::json to_json(const IterationRecord& it) {
  return {{"iteration", it.iteration},
          {"zeta", json9(it.zeta)},
          {"delta_target", json9(it.delta_target)},
          {"relaxed", it.relaxed},
          {"backtracks", it.backtracks},
          {"target_used", json9(it.target_used)},
          {"inner_status", std::string(to_string(it.status))},
          {"nominal_robustness", json9(it.nominal_robustness)},
          {"interval_robustness", to_json(it.interval_robustness)},
          {"delta_max", json9(it.delta_max)},
          {"control_effort", json9(it.effort)}};
}

inline nlohmann::json to_json(const SynthesisResult& r) {
  nlohmann::json j{{"certified", r.certified},
                   {"success", r.success},
                   {"control_effort", json9(r.control_effort)},
                   {"interval_robustness", to_json(r.interval_robustness)},
                   {"delta_max", json9(r.delta_max)},
                   {"nominal_robustness", json9(r.nominal_robustness)},
                   {"iterations", nlohmann::json::array()}};
  for (const auto& it : r.iterations) j["iterations"].push_back(to_json(it));
  if (r.initialization)
    j["initialization"] = {{"inner_status", std::string(to_string(r.initialization->status))},
                           {"nominal_robustness", json9(r.initialization->robustness)},
                           {"control_effort", json9(r.initialization->effort)}};
  return j;
}

inline nlohmann::json to_json(const VerificationReport& r) {
  return {{"satisfied", r.satisfied},
          {"interval_robustness", to_json(r.interval_robustness)},
          {"delta_max", json9(r.delta_max)},
          {"nominal_robustness", json9(r.nominal_robustness)},
          {"midpoint_robustness", json9(r.midpoint_robustness)},
          {"samples", r.samples},
          {"sampled_min_robustness", json9(r.sampled_min_robustness)},
          {"samples_outside", r.samples_outside},
          {"max_deviation_residual", json9(r.max_deviation_residual)}};
}

} // namespace mtlseir
