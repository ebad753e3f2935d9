// Command-line front end: synthesize, verify, simulate, robustness.
//
// Exit codes: 0 when the answer is yes (certified, satisfied, valid), 2 when
// the tool ran but the answer is no, 1 on any error.

#include "mtlseir/scenario_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace mtlseir;

namespace {

constexpr int kYes = 0;
constexpr int kError = 1;
constexpr int kNo = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::size_t> samples;
};

Scenario load(const std::string& path, const GlobalOptions& g) {
  Scenario s = read_scenario(path);
  if (g.seed) s.seed = *g.seed;
  if (g.mode) s.solver.inclusion_mode = *g.mode == "natural" ? InclusionMode::Natural : InclusionMode::Centered;
  return s;
}

ControlSignal load_control(const std::string& path, const Scenario& s) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open control file " + path);
  return read_control_csv(in, s.kind, s.u_max, s.T);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

nlohmann::json scenario_json(const std::string& path, const Scenario& s) {
  return {{"file", path},
          {"kind", std::string(to_string(s.kind))},
          {"formula", s.spec.to_string()},
          {"horizon", s.T},
          {"u_max", json9(s.u_max)},
          {"seed", s.seed},
          {"inclusion_mode", std::string(to_string(s.solver.inclusion_mode))}};
}

// Writes the report to dir/name, or to stdout when no directory was given.
void emit_json(const std::string& dir, const char* name, const nlohmann::json& j) {
  if (dir.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  fs::create_directories(dir);
  write_file(fs::path(dir) / name, j.dump(2) + "\n");
}

int cmd_synthesize(const std::string& path, const std::string& dir, const GlobalOptions& g) {
  const Scenario s = load(path, g);
  const auto t0 = std::chrono::steady_clock::now();
  const SynthesisResult r = synthesize(s);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(dir);
  std::ostringstream control, traj;
  write_control_csv(control, r.u);
  write_interval_csv(traj, r.reach, nominal_dynamic(s.X0, r.u, s.params, s.T, {s.solver.substeps, false}));
  write_file(fs::path(dir) / "control.csv", control.str());
  write_file(fs::path(dir) / "trajectory.csv", traj.str());

  nlohmann::json report{{"command", "synthesize"}, {"scenario", scenario_json(path, s)}, {"result", to_json(r)}};
  if (g.samples) report["verification"] = to_json(verify(r.u, s, *g.samples));
  report["timing"] = {{"wall_clock_seconds", json9(secs)}};
  write_file(fs::path(dir) / "report.json", report.dump(2) + "\n");

  std::printf("%s: effort %s, robustness [%s, %s], delta_max %s, %zu iteration(s)\n",
              r.certified ? "certified" : "not certified", format9(r.control_effort).c_str(),
              format9(r.interval_robustness.lo).c_str(), format9(r.interval_robustness.hi).c_str(),
              format9(r.delta_max).c_str(), r.iterations.size());
  return r.certified ? kYes : kNo;
}

int cmd_verify(const std::string& path, const std::string& control, const std::string& dir, const GlobalOptions& g) {
  const Scenario s = load(path, g);
  const ControlSignal u = load_control(control, s);
  const VerificationReport r = verify(u, s, g.samples.value_or(s.solver.verification_samples));
  nlohmann::json report{{"command", "verify"}, {"scenario", scenario_json(path, s)}, {"control", control},
                        {"report", to_json(r)}};
  emit_json(dir, "verify.json", report);
  return r.satisfied ? kYes : kNo;
}

int cmd_simulate(const std::string& path, const std::string& control, bool zero, const std::string& dir,
                 const GlobalOptions& g) {
  const Scenario s = load(path, g);
  if (zero == !control.empty()) throw std::invalid_argument("simulate needs exactly one of -u <csv> or --zero");
  const ControlSignal u = zero ? s.zero_control() : load_control(control, s);
  ValidityReport validity;
  const StepOptions exact{s.solver.substeps, false};
  const Trajectory xi = simulate(s.X0.mid(), u, s.params.mid(), s.T, exact, &validity);

  std::ostringstream csv;
  write_trajectory_csv(csv, xi);
  nlohmann::json report{{"command", "simulate"}, {"scenario", scenario_json(path, s)}, {"valid", validity.valid()},
                        {"robustness", json9(robustness(xi, s.spec))}, {"negative_states", nlohmann::json::array()}};
  for (const auto& n : validity.negatives)
    report["negative_states"].push_back(
        {{"day", n.day}, {"compartment", std::string(name(n.compartment))}, {"value", json9(n.value)}});
  if (dir.empty()) {
    std::cout << csv.str();
    std::cerr << report.dump(2) << '\n';
  } else {
    fs::create_directories(dir);
    write_file(fs::path(dir) / "simulation.csv", csv.str());
    write_file(fs::path(dir) / "simulation.json", report.dump(2) + "\n");
  }
  return validity.valid() ? kYes : kNo;
}

int cmd_robustness(const std::string& spec, const std::string& path, std::size_t at) {
  const Formula phi = parse(spec);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file " + path);
  const Trajectory xi = read_trajectory_csv(in);
  const double rho = robustness(xi, phi, at);
  std::printf("%s\n", format_exact(rho).c_str());
  return eval_boolean(xi, phi, at) ? kYes : kNo;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust epidemic control synthesis from temporal logic specifications"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed = 0;
  std::string mode;
  std::size_t samples = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed");
  auto* mode_opt = app.add_option("--mode", mode, "Inclusion mode for reachability")
                       ->check(CLI::IsMember({"natural", "centered"}));
  auto* samples_opt = app.add_option("--samples", samples, "Monte-Carlo samples for verification");

  std::string scenario, out_dir, control, spec, traj;
  bool zero = false;
  std::size_t at = 0;

  auto* syn = app.add_subcommand("synthesize", "Run robust synthesis and write control, trajectory and report");
  syn->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  syn->add_option("-o,--output", out_dir, "Output directory")->required();

  auto* ver = app.add_subcommand("verify", "Certify a given control signal");
  ver->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  ver->add_option("-u,--control", control, "Control CSV (day,u)")->required()->check(CLI::ExistingFile);
  ver->add_option("-o,--output", out_dir, "Output directory (default: print the report)");

  auto* sim = app.add_subcommand("simulate", "Simulate the nominal trajectory");
  sim->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  auto* sim_u = sim->add_option("-u,--control", control, "Control CSV (day,u)")->check(CLI::ExistingFile);
  sim->add_flag("--zero", zero, "Use the zero control")->excludes(sim_u);
  sim->add_option("-o,--output", out_dir, "Output directory (default: CSV to stdout, report to stderr)");

  auto* rob = app.add_subcommand("robustness", "Robustness of a trajectory CSV");
  rob->add_option("-s,--spec", spec, "Formula text")->required();
  rob->add_option("-t,--trajectory", traj, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  rob->add_option("--at", at, "Evaluation index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }
  if (*seed_opt) g.seed = seed;
  if (*mode_opt) g.mode = mode;
  if (*samples_opt) g.samples = samples;

  try {
    if (*syn) return cmd_synthesize(scenario, out_dir, g);
    if (*ver) return cmd_verify(scenario, control, out_dir, g);
    if (*sim) return cmd_simulate(scenario, control, zero, out_dir, g);
    if (*rob) return cmd_robustness(spec, traj, at);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  }
  return kError;
}
