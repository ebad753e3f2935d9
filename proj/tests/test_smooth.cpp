#include "mtlseir/smooth.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mtlseir;
using testing_support::random_formula;
using testing_support::random_trajectory;

TEST(Softmin, BoundOnRandomAggregations) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 500; ++i) {
    const std::size_t m = testing_support::uniform_index(rng, 1, 200);
    const double beta = std::pow(10.0, testing_support::uniform(rng, 0.0, 4.0));
    std::vector<double> v(m);
    for (double& x : v) x = testing_support::uniform(rng, -5.0, 5.0);
    const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
    const double bound = std::log(static_cast<double>(m)) / beta;
    const double smin = softmin(v, beta), smax = softmax(v, beta);
    EXPECT_LE(smin, lo + 1e-12);
    EXPECT_GE(smin, lo - bound - 1e-12);
    EXPECT_GE(smax, hi - 1e-12);
    EXPECT_LE(smax, hi + bound + 1e-12);
  }
}

TEST(Softmin, EqualValuesHitTheBoundExactly) {
  const std::vector<double> v(8, 0.25);
  EXPECT_NEAR(softmin(v, 10.0), 0.25 - std::log(8.0) / 10.0, 1e-15);
  EXPECT_NEAR(softmax(v, 10.0), 0.25 + std::log(8.0) / 10.0, 1e-15);
  EXPECT_NEAR(softmin(v, 1e9), 0.25, 1e-8);
}

TEST(Softmin, NoOverflowAtLargeSharpness) {
  std::vector<double> v{-1000.0, 0.0, 1000.0};
  EXPECT_TRUE(std::isfinite(softmin(v, 1e6)));
  EXPECT_TRUE(std::isfinite(softmax(v, 1e6)));
  EXPECT_EQ(softmin(v, 1e6), -1000.0);
}

TEST(Softmin, WeightsAreTheGradient) {
  const std::vector<double> v{0.3, -0.1, 0.7, 0.2};
  std::vector<double> w;
  const double base = softmin(v, 5.0, &w);
  for (std::size_t j = 0; j < v.size(); ++j) {
    auto a = v, b = v;
    a[j] += 1e-6;
    b[j] -= 1e-6;
    EXPECT_NEAR((softmin(a, 5.0) - softmin(b, 5.0)) / 2e-6, w[j], 1e-8);
  }
  EXPECT_LT(base, -0.1);
}

TEST(SmoothRobustness, SingleAtomIsExact) {
  Trajectory xi;
  xi.states = {{0.12, 0.0, 0.0, 0.0, 0.0}};
  const auto r = smooth_robustness(xi, parse("I <= 0.3"), 0, 3.0);
  EXPECT_EQ(r.value, 0.3 - 0.12);
  ASSERT_EQ(r.gradient.size(), 1u);
  EXPECT_EQ(r.gradient[0], (State{-1.0, 0.0, 0.0, 0.0, 0.0}));
}

TEST(SmoothRobustness, ConstantTrajectoryBracket) {
  Trajectory xi;
  xi.states.assign(11, State{0.2, 0.0, 0.0, 0.0, 0.0});
  const Formula f = parse("G[0,10](I <= 0.3)");
  for (double beta : {1.0, 10.0, 1e3, 1e6}) {
    const double v = smooth_robustness(xi, f, 0, beta).value;
    EXPECT_NEAR(v, 0.1 - std::log(11.0) / beta, 1e-12);
  }
}

TEST(SmoothRobustness, WithinErrorBoundOfExact) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 300; ++i) {
    const Formula f = random_formula(rng, 3, 12);
    const Trajectory xi = random_trajectory(rng, f.horizon() + 1);
    const double beta = std::pow(10.0, testing_support::uniform(rng, 0.0, 4.0));
    const SmoothRobustness program(f, 0);
    const double exact = robustness(xi, f);
    EXPECT_EQ(program.exact(xi), exact);
    if (!std::isfinite(exact)) continue;
    const double v = program.evaluate(xi, beta);
    EXPECT_LE(std::abs(v - exact), program.error_bound(beta) + 1e-12) << f.to_string();
  }
}

// For one alternation the tree bound is ln(m)/beta with m the largest arity.
TEST(SmoothRobustness, BundledFormulaBoundIsLogArity) {
  const SmoothRobustness program(parse("G[0,100](I <= 0.3) & G[0,100](D <= 0.05) & F[40,60](R >= 8)"), 0);
  EXPECT_EQ(program.max_arity(), 203u);
  EXPECT_DOUBLE_EQ(program.error_bound(100.0), std::log(203.0) / 100.0);
}

TEST(SmoothRobustness, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(23);
  int checked = 0;
  while (checked < 150) {
    const Formula f = random_formula(rng, 3, 12);
    Trajectory xi = random_trajectory(rng, f.horizon() + 1);
    const SmoothRobustness program(f, 0);
    std::vector<State> grad;
    const double v = program.evaluate(xi, 1e3, &grad);
    if (!std::isfinite(v)) continue;
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k)
      for (std::size_t i = 0; i < kStateDim; ++i) {
        const double x = xi[k][i];
        xi[k][i] = x + 1e-6;
        const double up = program.evaluate(xi, 1e3);
        xi[k][i] = x - 1e-6;
        const double down = program.evaluate(xi, 1e3);
        xi[k][i] = x;
        const double fd = (up - down) / 2e-6;
        err = std::max(err, std::abs(fd - grad[k][i]));
        scale = std::max(scale, std::abs(grad[k][i]));
      }
    EXPECT_LE(err, 1e-5 * std::max(scale, 1e-12)) << f.to_string();
    ++checked;
  }
}

TEST(SmoothRobustness, RejectsBadInput) {
  Trajectory xi;
  xi.states.assign(3, State{});
  EXPECT_THROW(smooth_robustness(xi, parse("G[0,5](I <= 1)"), 0, 1.0), HorizonError);
  EXPECT_THROW(smooth_robustness(xi, parse("I <= 1"), 0, 0.0), std::invalid_argument);
}
