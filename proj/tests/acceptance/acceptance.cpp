// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "mtlseir/scenario_io.hpp"
#include "oracle/literal_semantics.hpp"
#include "support.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace mtlseir;
using namespace testing_support;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Scenario bundled(const std::string& name) { return read_scenario(scenario_path(name)); }

// Vaccination draws are scaled to what the susceptible pool can supply.
ControlSignal admissible_control(std::mt19937_64& rng, const Scenario& s) {
  return testing_support::admissible_control(rng, s, s.kind == ControlKind::Vaccination ? 0.1 : s.u_max);
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::size_t pairs = 0, mismatches = 0, sign_errors = 0;
  double worst = 0.0;
  for (; pairs < 1000; ++pairs) {
    const Formula f = random_formula(rng, 3, 12);
    const Trajectory xi = random_trajectory(rng, f.horizon() + 1 + uniform_index(rng, 0, 3));
    const std::size_t k = uniform_index(rng, 0, xi.size() - 1 - f.horizon());
    const double r = robustness(xi, f, k), o = oracle::rho(xi, f, k);
    const double err = r == o ? 0.0 : std::abs(r - o);
    worst = std::max(worst, err);
    if (!(err <= 1e-12)) ++mismatches;
    if (std::abs(r) > 1e-12 && (r > 0.0) != eval_boolean(xi, f, k)) ++sign_errors;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && sign_errors == 0 && secs < 5.0,
          fmt("%zu pairs, max |diff| %.3g, %zu mismatches, %zu sign disagreements, %.2f s", pairs, worst, mismatches,
              sign_errors, secs)};
}

Outcome deviation_bound() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  std::size_t checks = 0, violations = 0, controls = 0;
  double worst = -kInf;
  for (const std::string prefix : {"vaccination_", "shield_"}) {
    std::vector<Scenario> group;
    for (int i = 1; i <= 3; ++i) group.push_back(bundled(prefix + std::to_string(i)));
    const Scenario& base = group.front();
    for (int c = 0; c < 100; ++c, ++controls) {
      const ControlSignal u = admissible_control(rng, base);
      const auto box = propagate(base.X0, u, base.params, base.T, base.solver.inclusion_mode, base.solver.substeps,
                                 base.solver.reach_partitions);
      const auto mid = nominal_midpoint(box);
      const double dmax = delta_profile(box).delta_max;
      const auto samples = sample_trajectories(base.X0, u, base.params, base.T, 500, 2000 + c);
      for (const auto& s : group) {
        const double ref = robustness(mid, s.spec, 0);
        for (const auto& xi : samples) {
          const double residual = std::abs(robustness(xi, s.spec, 0) - ref) - dmax;
          worst = std::max(worst, residual);
          violations += !(residual <= 1e-9);
          ++checks;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 300.0,
          fmt("6 formulas x 100 controls x 500 samples = %zu checks, %zu violations, max residual %.3g, %.1f s", checks,
              violations, worst, secs)};
}

Outcome reach_soundness() {
  std::mt19937_64 rng(1003);
  std::size_t outside = 0, trajectories = 0;
  std::string widths;
  for (const char* name : {"vaccination_1", "shield_1"}) {
    const Scenario s = bundled(name);
    for (const ControlSignal& u : {s.zero_control(), admissible_control(rng, s)}) {
      const auto samples = sample_trajectories(s.X0, u, s.params, s.T, 1000, s.seed);
      for (auto mode : {InclusionMode::Natural, InclusionMode::Centered}) {
        const auto box = propagate(s.X0, u, s.params, s.T, mode, s.solver.substeps, s.solver.reach_partitions);
        for (const auto& xi : samples) outside += !box.contains(xi, 1e-9);
        trajectories += samples.size();
      }
    }
  }
  return {outside == 0, fmt("%zu trajectory checks (2 models x 2 controls x 2 modes x 1000), %zu outside", trajectories,
                            outside)};
}

Outcome conservation() {
  std::mt19937_64 rng(1004);
  double worst = 0.0;
  std::size_t runs = 0;
  for (const auto& name : bundled_names()) {
    const Scenario s = bundled(name);
    const double N0 = s.params.lower.N0;
    std::vector<ControlSignal> controls{s.zero_control()};
    for (int i = 0; i < 5; ++i) controls.push_back(admissible_control(rng, s));
    for (const auto& u : controls)
      for (const auto& xi : sample_trajectories(s.X0, u, s.params, s.T, 40, s.seed)) {
        const double start = total(xi[0]);
        for (const auto& x : xi.states) worst = std::max(worst, std::abs(total(x) - start) / N0);
        ++runs;
      }
  }
  return {worst <= 1e-9, fmt("%zu trajectories of 100 steps, max drift %.3g x N0", runs, worst)};
}

Outcome derivative_checks() {
  std::mt19937_64 rng(1005);
  std::size_t jac_bad = 0, grad_bad = 0, softmin_bad = 0;
  double jac_worst = 0.0, grad_worst = 0.0;
  const int n = 200;
  for (int t = 0; t < n; ++t) {
    State x;
    for (double& v : x) v = uniform(rng, 0.0, 5.0);
    ModelParams p = midpoint_params();
    p.beta = uniform(rng, 0.1, 1.0);
    p.Ts = uniform(rng, 0.2, 1.0);
    const ControlKind kind = t % 2 ? ControlKind::Shield : ControlKind::Vaccination;
    const double u = kind == ControlKind::Shield ? uniform(rng, 0.0, 50.0) : uniform(rng, 0.0, 1.0);
    const auto J = jacobians(x, u, p, kind);
    double err = 0.0, scale = 0.0;
    for (std::size_t j = 0; j <= kStateDim; ++j) {
      State a = x, b = x;
      double ua = u, ub = u, h = 1e-7;
      if (j < kStateDim) {
        a[j] += h;
        b[j] -= h;
      } else {
        h = kind == ControlKind::Shield ? 1e-4 : 1e-7;
        ua += h;
        ub -= h;
      }
      const State fa = step(a, ua, p, kind), fb = step(b, ub, p, kind);
      for (std::size_t i = 0; i < kStateDim; ++i) {
        const double analytic = j < kStateDim ? J.dx[i][j] : J.du[i];
        err = std::max(err, std::abs((fa[i] - fb[i]) / (2 * h) - analytic));
        scale = std::max(scale, std::abs(analytic));
      }
    }
    const double rel = err / scale;
    jac_worst = std::max(jac_worst, rel);
    jac_bad += !(rel <= 1e-5);
  }
  int grads = 0;
  while (grads < n) {
    const Formula f = random_formula(rng, 3, 12);
    Trajectory xi = random_trajectory(rng, f.horizon() + 1);
    const SmoothRobustness program(f, 0);
    std::vector<State> g;
    if (!std::isfinite(program.evaluate(xi, 1e3, &g))) continue;
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k)
      for (std::size_t i = 0; i < kStateDim; ++i) {
        const double v = xi[k][i];
        xi[k][i] = v + 1e-6;
        const double up = program.evaluate(xi, 1e3);
        xi[k][i] = v - 1e-6;
        const double down = program.evaluate(xi, 1e3);
        xi[k][i] = v;
        err = std::max(err, std::abs((up - down) / 2e-6 - g[k][i]));
        scale = std::max(scale, std::abs(g[k][i]));
      }
    const double rel = err / std::max(scale, 1e-12);
    grad_worst = std::max(grad_worst, rel);
    grad_bad += !(rel <= 1e-5);
    ++grads;
  }
  for (int t = 0; t < n; ++t) {
    const std::size_t m = uniform_index(rng, 1, 200);
    const double beta = std::pow(10.0, uniform(rng, 0.0, 4.0));
    std::vector<double> v(m);
    for (double& e : v) e = uniform(rng, -5.0, 5.0);
    const double lo = *std::min_element(v.begin(), v.end());
    const double gap = std::abs(softmin(v, beta) - lo);
    softmin_bad += !(gap <= std::log(static_cast<double>(m)) / beta + 1e-12);
  }
  return {jac_bad == 0 && grad_bad == 0 && softmin_bad == 0,
          fmt("Jacobians %d points (max rel %.2g, %zu bad); gradients %d points (max rel %.2g, %zu bad); softmin %d "
              "aggregations (%zu bad)",
              n, jac_worst, jac_bad, n, grad_worst, grad_bad, n, softmin_bad)};
}

struct Run {
  SynthesisResult result;
  double seconds = 0.0;
};

std::map<std::string, Run>& runs() {
  static std::map<std::string, Run> r;
  return r;
}

const Run& synthesized(const std::string& name) {
  auto it = runs().find(name);
  if (it != runs().end()) return it->second;
  const Scenario s = bundled(name);
  const auto t0 = Clock::now();
  Run r{synthesize(s), 0.0};
  r.seconds = seconds_since(t0);
  return runs().emplace(name, std::move(r)).first->second;
}

Outcome vaccination() {
  bool ok = true;
  std::string detail;
  double previous = -1.0;
  for (int i = 1; i <= 3; ++i) {
    const auto& r = synthesized("vaccination_" + std::to_string(i));
    const auto& res = r.result;
    const bool good = res.certified && res.iterations.size() <= 3 && r.seconds <= 120.0 && res.control_effort > previous;
    ok = ok && good;
    previous = res.control_effort;
    detail += fmt("%sV%d certified=%d iterations=%zu effort=%.4g lo=%.3g %.1fs", i > 1 ? "; " : "", i, res.certified,
                  res.iterations.size(), res.control_effort, res.interval_robustness.lo, r.seconds);
  }
  return {ok, detail};
}

Outcome shield() {
  bool ok = true;
  std::string detail;
  double previous = -1.0;
  for (int i = 1; i <= 3; ++i) {
    const auto& res = synthesized("shield_" + std::to_string(i)).result;
    const auto& v = res.u.values;
    const auto peak = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    const bool good = res.certified && res.control_effort > previous && peak >= 15 && peak <= 50;
    ok = ok && good;
    previous = res.control_effort;
    detail += fmt("%sS%d certified=%d effort=%.4g peak day=%zu lo=%.3g", i > 1 ? "; " : "", i, res.certified,
                  res.control_effort, peak, res.interval_robustness.lo);
  }
  return {ok, detail};
}

Outcome negative_control() {
  const Scenario s = bundled("vaccination_1");
  const auto r = verify(s.zero_control(), s, 0);
  return {r.interval_robustness.lo < 0.0 && !r.satisfied,
          fmt("zero control interval robustness [%.4g, %.4g]", r.interval_robustness.lo, r.interval_robustness.hi)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("mtlseir_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<nlohmann::json> reports;
  std::vector<std::string> controls, trajectories;
  for (int i = 0; i < 2; ++i) {
    const fs::path dir = root / std::to_string(i);
    const std::string cmd = std::string(MTLSEIR_CLI) + " --seed 1 synthesize " + scenario_path("vaccination_1") +
                            " -o " + dir.string() + " > /dev/null";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, fmt("CLI run %d exited with %d", i, status)};
    controls.push_back(slurp(dir / "control.csv"));
    trajectories.push_back(slurp(dir / "trajectory.csv"));
    auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    j.erase("timing");
    j["scenario"].erase("file");
    reports.push_back(std::move(j));
  }
  // The in-process run must agree with the CLI too.
  std::ostringstream lib;
  write_control_csv(lib, synthesized("vaccination_1").result.u);
  fs::remove_all(root);
  const bool same = controls[0] == controls[1] && trajectories[0] == trajectories[1] && reports[0] == reports[1] &&
                    lib.str() == controls[0];
  return {same, fmt("two CLI runs of V1: control.csv %s, trajectory.csv %s, report.json (minus timing) %s, "
                    "library run %s",
                    controls[0] == controls[1] ? "identical" : "differ",
                    trajectories[0] == trajectories[1] ? "identical" : "differ",
                    reports[0] == reports[1] ? "equal" : "differ", lib.str() == controls[0] ? "identical" : "differs")};
}

} // namespace

int main() {
  const auto t0 = Clock::now();
  report(1, "semantics oracle equivalence", oracle_equivalence);
  report(2, "robustness deviation bound", deviation_bound);
  report(3, "reachability soundness", reach_soundness);
  report(4, "conservation", conservation);
  report(5, "Jacobian, gradient and softmin checks", derivative_checks);
  report(6, "vaccination synthesis", vaccination);
  report(7, "shield synthesis", shield);
  report(8, "zero-control verification", negative_control);
  report(9, "determinism", determinism);
  std::printf("%d failure(s), %.1f s total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
