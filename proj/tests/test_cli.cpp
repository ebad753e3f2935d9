#include "mtlseir/scenario_io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace mtlseir;

namespace {

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("mtlseir_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with stdout captured to a file; returns the exit status.
  int run(const std::string& args, std::string* out = nullptr) {
    const fs::path log = dir_ / "stdout.txt";
    const std::string cmd = std::string(MTLSEIR_CLI) + " " + args + " > " + log.string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    if (out) *out = slurp(log);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  // Bundled scenario with the formula and horizon replaced.
  fs::path variant(const std::string& name, const std::string& formula, std::size_t days,
                   const std::string& base = "vaccination_1") {
    std::string text = slurp(testing_support::scenario_path(base));
    const auto f = text.find("formula = ");
    text.replace(f, text.find('\n', f) - f, "formula = " + formula);
    const auto d = text.find("days = ");
    text.replace(d, text.find('\n', d) - d, "days = " + std::to_string(days));
    return write(name, text);
  }

  fs::path dir_;
};

} // namespace

TEST_F(Cli, SynthesizeWritesCertifiedArtifacts) {
  const auto scn = variant("short.scn", "G[0,30](I <= 0.03)", 30);
  const fs::path out = dir_ / "run";
  ASSERT_EQ(run("synthesize " + scn.string() + " -o " + out.string()), 0);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_TRUE(report["result"]["certified"].get<bool>());
  EXPECT_GE(report["result"]["interval_robustness"]["lo"].get<double>(), 0.0);
  std::ifstream control(out / "control.csv");
  EXPECT_NO_THROW(read_control_csv(control, ControlKind::Vaccination, 1.0, 30));
  std::ifstream traj(out / "trajectory.csv");
  EXPECT_EQ(read_trajectory_csv(traj).size(), 31u);

  EXPECT_EQ(run("verify " + scn.string() + " -u " + (out / "control.csv").string() + " -o " + out.string()), 0);
  const auto verified = nlohmann::json::parse(slurp(out / "verify.json"));
  EXPECT_TRUE(verified["report"]["satisfied"].get<bool>());
}

TEST_F(Cli, MalformedInputsExitWithOne) {
  const auto bad_formula = variant("bad.scn", "G[0,30](I < 0.02)", 30);
  EXPECT_EQ(run("synthesize " + bad_formula.string() + " -o " + (dir_ / "x").string()), 1);
  const auto short_horizon = variant("short.scn", "G[0,100](I <= 0.3)", 50);
  EXPECT_EQ(run("synthesize " + short_horizon.string() + " -o " + (dir_ / "y").string()), 1);
  EXPECT_EQ(run("synthesize " + (dir_ / "missing.scn").string() + " -o " + (dir_ / "z").string()), 1);
  EXPECT_EQ(run("frobnicate"), 1);
}

TEST_F(Cli, VerifyZeroControlIsNotSatisfied) {
  std::ostringstream csv;
  write_control_csv(csv, ControlSignal::zeros(ControlKind::Vaccination, 100, 1.0));
  const auto u = write("zero.csv", csv.str());
  std::string out;
  EXPECT_EQ(run("--samples 50 verify " + testing_support::scenario_path("vaccination_1") + " -u " + u.string(), &out),
            2);
  const auto report = nlohmann::json::parse(out);
  EXPECT_LT(report["report"]["interval_robustness"]["lo"].get<double>(), 0.0);
  EXPECT_EQ(report["report"]["samples"].get<std::size_t>(), 50u);
}

TEST_F(Cli, VerifyRejectsTruncatedControl) {
  std::ostringstream csv;
  write_control_csv(csv, ControlSignal::zeros(ControlKind::Vaccination, 99, 1.0));
  const auto u = write("short.csv", csv.str());
  EXPECT_EQ(run("verify " + testing_support::scenario_path("vaccination_1") + " -u " + u.string()), 1);
}

TEST_F(Cli, SimulateZeroControl) {
  const fs::path out = dir_ / "sim";
  ASSERT_EQ(run("simulate " + testing_support::scenario_path("vaccination_1") + " --zero -o " + out.string()), 0);
  std::ifstream in(out / "simulation.csv");
  const Trajectory xi = read_trajectory_csv(in);
  ASSERT_EQ(xi.size(), 101u);
  double peak = 0.0;
  for (const auto& x : xi.states) {
    peak = std::max(peak, x[0]);
    EXPECT_NEAR(total(x), 10.0, 1e-6);
  }
  EXPECT_GT(peak, 0.3);
  const auto report = nlohmann::json::parse(slurp(out / "simulation.json"));
  EXPECT_TRUE(report["valid"].get<bool>());
  EXPECT_LT(report["robustness"].get<double>(), 0.0);
}

TEST_F(Cli, SimulateDiseaseFreeStaysAtZero) {
  std::string text = slurp(testing_support::scenario_path("shield_1"));
  const auto at = text.find("I = 0.001 +- 0.001");
  text.replace(at, std::string("I = 0.001 +- 0.001").size(), "I = 0");
  const auto e = text.find("E = 0.02 +- 0.001");
  text.replace(e, std::string("E = 0.02 +- 0.001").size(), "E = 0");
  const auto scn = write("free.scn", text);
  std::string out;
  ASSERT_EQ(run("simulate " + scn.string() + " --zero", &out), 0);
  std::istringstream in(out);
  for (const auto& x : read_trajectory_csv(in).states) EXPECT_EQ(x[0], 0.0);
}

TEST_F(Cli, SimulateNeedsExactlyOneControlSource) {
  EXPECT_EQ(run("simulate " + testing_support::scenario_path("vaccination_1")), 1);
}

TEST_F(Cli, RobustnessOfConstantTrajectory) {
  Trajectory xi;
  xi.states.assign(11, State{0.2, 0.0, 9.8, 0.0, 0.0});
  std::ostringstream csv;
  write_trajectory_csv(csv, xi);
  const auto t = write("const.csv", csv.str());
  std::string out;
  EXPECT_EQ(run("robustness -s 'G[0,10](I <= 0.3)' -t " + t.string(), &out), 0);
  EXPECT_NEAR(std::stod(out), 0.1, 1e-12);
  EXPECT_EQ(std::stod(out), robustness(xi, parse("G[0,10](I <= 0.3)")));
  EXPECT_EQ(run("robustness -s 'G[0,10](I <= 0.1)' -t " + t.string()), 2);
  EXPECT_EQ(run("robustness -s 'G[0,11](I <= 0.3)' -t " + t.string()), 1);
  EXPECT_EQ(run("robustness -s 'G[0,10](I <=' -t " + t.string()), 1);
}

TEST_F(Cli, RobustnessMatchesLibraryOnRandomTrajectories) {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 5; ++i) {
    const Formula f = testing_support::random_formula(rng, 2, 6);
    const Trajectory xi = testing_support::random_trajectory(rng, f.horizon() + 1);
    std::ostringstream csv;
    write_trajectory_csv(csv, xi);
    const auto t = write("rand.csv", csv.str());
    std::ifstream back(t);
    const Trajectory read = read_trajectory_csv(back);
    std::string out;
    const int code = run("robustness -s '" + f.to_string() + "' -t " + t.string(), &out);
    ASSERT_NE(code, 1) << f.to_string();
    const double expected = robustness(read, f);
    if (std::isinf(expected)) continue;
    EXPECT_EQ(std::stod(out), expected) << f.to_string();
  }
}
