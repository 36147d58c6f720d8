// Copyright 2026 The driftplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "driftplan/batch_optimizer.hpp"
#include "driftplan/errors.hpp"
#include "support/gen.hpp"

namespace driftplan {
namespace {

using testing::for_all;
using testing::Gen;

TrajectorySamples samples3(std::vector<double> x, std::vector<double> y, std::vector<double> dx,
                           std::vector<double> dy, std::vector<double> ddx,
                           std::vector<double> ddy) {
  const auto v = [](const std::vector<double>& s) {
    return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  };
  TrajectorySamples t;
  t.x = v(x);
  t.y = v(y);
  t.dx = v(dx);
  t.dy = v(dy);
  t.ddx = v(ddx);
  t.ddy = v(ddy);
  return t;
}

ProblemSpec cruise(double y0 = 0.0) {
  ProblemSpec spec;
  spec.b0 = {0.0, y0, 10.0, 0.0, 0.0, 0.0};
  spec.v_des = 10.0;
  spec.v_max = 15.0;
  spec.a_max = 4.0;
  return spec;
}

ObstaclePrediction static_obstacle(double x, double y, double a, double b, int n = 100) {
  return {Eigen::VectorXd::Constant(n, x), Eigen::VectorXd::Constant(n, y), a, b};
}

TEST(PrimaryCost, ZeroAtOptimum) {
  auto spec = cruise();
  spec.features = {{10.0, 1.5, 1.0}, {20.0, 1.5, 1.0}};
  const auto s = samples3({0, 5, 10}, {1.5, 1.5, 1.5}, {10, 10, 10}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0});
  EXPECT_EQ(primary_cost(spec, s), 0.0);
}

TEST(PrimaryCost, TermByTermOracle) {
  auto spec = cruise();
  spec.v_des = 8.0;
  spec.weights = {0.5, 2.0, 3.0};
  spec.feature_gate = 10.0;
  // Unsorted on purpose; two anchors share s = 12 and the smaller |d| wins.
  spec.features = {{12.0, -2.0, 0.5}, {3.0, 1.0, 1.0}, {12.0, 2.5, 1.0}};
  const auto s = samples3({0.0, 4.0, 25.0}, {0.2, -0.4, 1.0}, {8.0, 6.0, 3.0}, {0.0, 8.0, -4.0},
                          {1.0, -2.0, 0.5}, {0.0, 3.0, -1.0});
  // Step 0: x=0, window [0,10] -> anchor s=3, d=1, w=1.
  // Step 1: x=4, window [4,14] -> s=12, tie -> d=-2, w=0.5.
  // Step 2: x=25, window [25,35] -> none.
  const double acc = (1.0 + 0.0) + (4.0 + 9.0) + (0.25 + 1.0);
  const double feat = 1.0 * (0.2 - 1.0) * (0.2 - 1.0) + 0.5 * (-0.4 + 2.0) * (-0.4 + 2.0);
  const double vel = 0.0 + (10.0 - 8.0) * (10.0 - 8.0) + (5.0 - 8.0) * (5.0 - 8.0);
  const double expected = 0.5 * acc + 2.0 * feat + 3.0 * vel;
  EXPECT_NEAR(primary_cost(spec, s), expected, 1e-9);
  EXPECT_NEAR(expected, 0.5 * 15.25 + 2.0 * 1.92 + 3.0 * 13.0, 1e-12);
}

TEST(PrimaryCost, LinearInWeights) {
  auto spec = cruise();
  spec.features = {{5.0, 2.0, 1.0}};
  const auto s = samples3({0, 1, 2}, {0, 0.5, 1}, {9, 11, 10}, {0, 1, 0}, {1, 2, 3}, {0, 1, 0});
  const double base = primary_cost(spec, s);
  auto doubled = spec;
  doubled.weights.acc *= 2.0;
  auto acc_only = spec;
  acc_only.weights = {1.0, 0.0, 0.0};
  EXPECT_NEAR(primary_cost(doubled, s) - base, primary_cost(acc_only, s), 1e-12);
}

TEST(PrimaryCost, NoFeaturesMeansNoFeatureTerm) {
  auto spec = cruise();
  spec.weights = {0.0, 5.0, 0.0};
  const auto s = samples3({0, 1, 2}, {3, 3, 3}, {9, 9, 9}, {0, 0, 0}, {1, 1, 1}, {0, 0, 0});
  EXPECT_EQ(primary_cost(spec, s), 0.0);
}

TEST(CollisionResidual, Ellipse) {
  auto spec = cruise();
  const double a = 5.0, b = 2.5;
  spec.obstacles = {static_obstacle(0.0, 0.0, a, b, 3)};
  const auto s = samples3({0.0, 0.0, 2 * a}, {0.0, b, 0.0}, {1, 1, 1}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0});
  const auto v = collision_residual(spec, s);
  ASSERT_EQ(v.rows(), 3);
  ASSERT_EQ(v.cols(), 1);
  EXPECT_EQ(v(0, 0), 1.0);
  EXPECT_EQ(v(1, 0), 0.0);
  EXPECT_EQ(v(2, 0), 0.0);
  const auto half = samples3({a / 2, 0, 0}, {0, 0, 0}, {1, 1, 1}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0});
  EXPECT_NEAR(collision_residual(spec, half)(0, 0), 0.75, 1e-15);
}

TEST(FeatureTargets, GateAndTies) {
  const std::vector<FeatureAnchor> fs{{5.0, 3.0, 1.0}, {5.0, -1.0, 0.2}, {50.0, 2.0, 1.0}};
  Eigen::VectorXd x(4);
  x << 0.0, 5.0, 10.0, 70.0;
  const auto ft = feature_targets(fs, 40.0, x);
  EXPECT_EQ(ft.d[0], -1.0);
  EXPECT_EQ(ft.weight[0], 0.2);
  EXPECT_EQ(ft.d[1], -1.0);
  EXPECT_EQ(ft.d[2], 2.0);
  EXPECT_EQ(ft.weight[3], 0.0);
}

TEST(ProblemSpec, Validation) {
  auto spec = cruise();
  spec.v_max = 0.0;
  EXPECT_THROW(spec.validate(100), InvalidArgument);
  spec = cruise();
  spec.obstacles = {static_obstacle(1, 1, 0.0, 1.0)};
  EXPECT_THROW(spec.validate(100), InvalidArgument);
  spec.obstacles = {static_obstacle(1, 1, 1.0, 1.0, 50)};
  EXPECT_THROW(spec.validate(100), ShapeError);
}

TEST(Solve, AlreadyOptimalConvergesFast) {
  auto spec = cruise();
  for (int s = 0; s <= 100; s += 5) spec.features.push_back({double(s), 0.0, 1.0});
  const BasisSpec basis;
  const auto init = straight_line(basis, 0.0, 0.0, 10.0, 0.0);
  const auto r = solve_single(spec, init, {}, basis);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 3);
  EXPECT_LT(r.primary_cost, 1e-9);
  EXPECT_LT((r.coeffs.cy - init.cy).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Solve, DetoursAroundStaticObstacle) {
  auto spec = cruise();
  spec.obstacles = {static_obstacle(30.0, -0.3, 5.0, 2.5)};
  const BasisSpec basis;
  const auto r = solve_single(spec, straight_line(basis, 0, 0, 10, 0), {}, basis);
  ASSERT_FALSE(r.failed()) << r.error;
  EXPECT_LE(r.residuals.collision, 1e-3);
  EXPECT_LE(r.residuals.boundary, 1e-6);
  const auto s = Basis(basis).evaluate(r.coeffs);
  EXPECT_GT(s.y.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Solve, Deterministic) {
  auto spec = cruise();
  spec.obstacles = {static_obstacle(30.0, -0.3, 5.0, 2.5)};
  spec.features = {{20.0, 2.0, 1.0}};
  Gen g(3);
  TrajectoryCoeffs init = straight_line({}, 0, 0, 10, 0);
  init.cy += g.vector(11, -2.0, 2.0);
  const auto a = solve_single(spec, init, {});
  const auto b = solve_single(spec, init, {});
  EXPECT_TRUE(a.coeffs.cx == b.coeffs.cx);
  EXPECT_TRUE(a.coeffs.cy == b.coeffs.cy);
  EXPECT_EQ(a.primary_cost, b.primary_cost);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Solve, NonFiniteInitIsDivergence) {
  auto init = straight_line({}, 0, 0, 10, 0);
  init.cy[5] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_single(cruise(), init, {}), DivergenceError);

  const std::vector<TrajectoryCoeffs> inits{straight_line({}, 0, 0, 10, 0), init};
  const auto rs = solve_batch(cruise(), inits, {});
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_FALSE(rs[0].failed());
  EXPECT_TRUE(rs[1].failed());
}

TEST(Solve, ShapeMismatch) {
  TrajectoryCoeffs bad{Eigen::VectorXd::Zero(9), Eigen::VectorXd::Zero(9)};
  EXPECT_THROW(solve_single(cruise(), bad, {}), ShapeError);
}

std::vector<TrajectoryCoeffs> random_inits(Gen& g, int n) {
  std::vector<TrajectoryCoeffs> inits;
  for (int i = 0; i < n; ++i) {
    auto c = straight_line({}, 0, 0, g.uniform(6.0, 12.0), 0);
    c.cy += g.vector(11, -3.0, 3.0);
    inits.push_back(c);
  }
  return inits;
}

ProblemSpec two_obstacles() {
  auto spec = cruise();
  spec.obstacles = {static_obstacle(25.0, -1.0, 5.0, 2.5), static_obstacle(45.0, 2.0, 5.0, 2.5)};
  spec.features = {{10.0, 2.0, 1.0}, {30.0, -2.0, 1.0}};
  return spec;
}

TEST(SolveBatch, MatchesSingleAndPreservesOrder) {
  Gen g(21);
  const auto spec = two_obstacles();
  auto inits = random_inits(g, 6);
  SolverSettings serial;
  serial.threads = 1;
  SolverSettings parallel;
  parallel.threads = 3;
  const BatchOptimizer opt(BasisSpec{}, spec, serial);
  const auto rs = opt.solve_batch(inits);
  const auto rp = BatchOptimizer(BasisSpec{}, spec, parallel).solve_batch(inits);
  ASSERT_EQ(rs.size(), inits.size());
  for (std::size_t i = 0; i < inits.size(); ++i) {
    const auto single = opt.solve(inits[i]);
    EXPECT_TRUE(rs[i].coeffs.cy == single.coeffs.cy) << i;
    EXPECT_TRUE(rp[i].coeffs.cy == single.coeffs.cy) << i;
    EXPECT_TRUE(rp[i].coeffs.cx == single.coeffs.cx) << i;
    EXPECT_EQ(rp[i].primary_cost, single.primary_cost) << i;
  }

  std::vector<TrajectoryCoeffs> reversed(inits.rbegin(), inits.rend());
  const auto rr = opt.solve_batch(reversed);
  for (std::size_t i = 0; i < inits.size(); ++i) {
    EXPECT_TRUE(rr[inits.size() - 1 - i].coeffs.cy == rs[i].coeffs.cy);
  }

  const std::vector<TrajectoryCoeffs> one{inits[0]};
  EXPECT_TRUE(opt.solve_batch(one)[0].coeffs.cy == rs[0].coeffs.cy);
}

TEST(SolveProperty, BoundaryHoldsForEveryResult) {
  for_all(4, 500, [](Gen& g) {
    auto spec = two_obstacles();
    spec.b0 = {0.0, g.uniform(-2, 2), g.uniform(5, 12), g.uniform(-1, 1), g.uniform(-1, 1),
               g.uniform(-1, 1)};
    SolverSettings settings;
    settings.max_iterations = g.integer(1, 100);
    const auto inits = random_inits(g, 8);
    for (const auto& r : solve_batch(spec, inits, settings)) {
      ASSERT_FALSE(r.failed()) << r.error;
      EXPECT_LE(r.residuals.boundary, 1e-6);
      EXPECT_GE(r.residuals.speed_bound, 0.0);
      EXPECT_GE(r.residuals.collision, 0.0);
      if (r.converged) {
        EXPECT_LE(r.residuals.max_inequality(), settings.tolerance);
        EXPECT_TRUE(std::isfinite(r.primary_cost));
      }
    }
  });
}

TEST(SolveProperty, NoWorseThanFeasibleInit) {
  const BasisSpec basis;
  const Basis b(basis);
  for_all(10, 600, [&](Gen& g) {
    auto spec = cruise(g.uniform(-1, 1));
    spec.features = {{g.uniform(5, 40), g.uniform(-3, 3), 1.0}};
    spec.v_max = 100.0;
    spec.a_max = 100.0;
    auto init = straight_line(basis, 0, spec.b0.y, 10, 0);
    init.cy += g.vector(11, -0.5, 0.5);
    const auto projected = project_to_boundary(init, spec, basis);
    const auto ps = b.evaluate(projected);
    ASSERT_EQ(evaluate_residuals(spec, ps).max_inequality(), 0.0);
    const auto r = solve_single(spec, init, {}, basis);
    EXPECT_LE(r.primary_cost, primary_cost(spec, ps) + 1e-9);
  });
}

TEST(Solve, AccelerationOnlyBeatsStraightInterpolant) {
  auto spec = cruise(0.5);
  spec.b0.ddy = 1.5;
  spec.b0.dy = 0.4;
  spec.weights = {1.0, 0.0, 0.0};
  const BasisSpec basis;
  const Basis b(basis);
  const auto line = project_to_boundary(straight_line(basis, 0, 0.5, 10, 0.4), spec, basis);
  const auto ls = b.evaluate(line);
  const double line_acc = (ls.ddx.array().square() + ls.ddy.array().square()).sum();
  const auto r = solve_single(spec, line, {}, basis);
  const auto rs = b.evaluate(r.coeffs);
  const double acc = (rs.ddx.array().square() + rs.ddy.array().square()).sum();
  EXPECT_LE(acc, line_acc);
  EXPECT_LE(r.residuals.boundary, 1e-6);
}

TEST(ProjectToBoundary, MeetsConditions) {
  auto spec = cruise(1.0);
  spec.b0 = {2.0, 1.0, 9.0, -0.5, 0.3, -0.7};
  spec.bf = {0.2, -0.1, 0.05};
  const BasisSpec basis;
  Gen g(9);
  TrajectoryCoeffs c{g.vector(11, 0, 60), g.vector(11, -3, 3)};
  const auto s = Basis(basis).evaluate(project_to_boundary(c, spec, basis));
  EXPECT_LE(evaluate_residuals(spec, s).boundary, 1e-9);
  EXPECT_THROW(project_to_boundary(c, spec, BasisSpec{4, 100, 0.06}), InvalidArgument);
}

}  // namespace
}  // namespace driftplan
