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


#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "driftplan/errors.hpp"
#include "driftplan/planner.hpp"
#include "driftplan/simulator.hpp"

namespace driftplan {
namespace {

PlannerConfig small_config(std::uint64_t seed = 1) {
  PlannerConfig cfg;
  cfg.cem.n_samples = 120;
  cfg.cem.n_elite = 20;
  cfg.cem.n_noise = 10;
  cfg.cem.seed = seed;
  cfg.solver.threads = 1;
  return cfg;
}

Scene straight_scene(double run = 60.0) {
  Scene s;
  s.centerline = Centerline::straight(400.0);
  s.run_length = run;
  return s;
}

std::vector<FeatureAnchor> lane_features(double d, double until = 300.0) {
  std::vector<FeatureAnchor> f;
  for (double s = 0.0; s <= until; s += 5.0) f.push_back({s, d, 1.0});
  return f;
}

TEST(Planner, FeatureLaneGivesStraightCruise) {
  const Scene scene = straight_scene();
  const PlannerConfig cfg = small_config();
  CemMpcPlanner planner(cfg, lane_features(0.0));
  const Command cmd = planner.plan(scene.start_state(), scene);
  // The analytic optimum (straight line at v_des on the feature lane) costs 0.
  EXPECT_LT(cmd.meta_cost, 1e-2);
  EXPECT_LT(cmd.samples.y.cwiseAbs().maxCoeff(), 0.05);
  EXPECT_LT((cmd.samples.dx.array() - scene.v_des).abs().maxCoeff(), 0.05);
}

TEST(Planner, ReturnedPlanMeetsConstraints) {
  Scene scene = straight_scene();
  scene.obstacles = {{30.0, -0.5, 0.0, 0.0}, {55.0, 2.0, -2.0, 0.0}};
  CemMpcPlanner planner(small_config(4), lane_features(2.0));
  const Command cmd = planner.plan(scene.start_state(), scene);
  const auto& out = *planner.last();
  EXPECT_LE(out.solve.residuals.boundary, 1e-6);
  EXPECT_LE(out.solve.residuals.max_inequality(), 1e-3);
  const ProblemSpec spec = build_problem(scene, scene.start_state(), lane_features(2.0), planner.config());
  const auto r = evaluate_residuals(spec, cmd.samples);
  EXPECT_LE(r.collision, 1e-3);
  EXPECT_LE(r.boundary, 1e-6);
  ASSERT_EQ(out.best_so_far.size(), 3u);
  for (std::size_t i = 1; i < out.best_so_far.size(); ++i) {
    EXPECT_LE(out.best_so_far[i], out.best_so_far[i - 1]);
  }
  EXPECT_EQ(out.meta_cost, out.best_so_far.back());
}

TEST(Planner, SeedReproducible) {
  Scene scene = straight_scene();
  scene.obstacles = {{30.0, -0.5, 0.0, 0.0}};
  CemMpcPlanner a(small_config(7), lane_features(-2.0));
  CemMpcPlanner b(small_config(7), lane_features(-2.0));
  const auto ca = a.plan(scene.start_state(), scene);
  const auto cb = b.plan(scene.start_state(), scene);
  EXPECT_TRUE(ca.coeffs.cy == cb.coeffs.cy);
  EXPECT_TRUE(ca.coeffs.cx == cb.coeffs.cx);
  EXPECT_EQ(ca.meta_cost, cb.meta_cost);
}

TEST(Planner, FailsWhenNothingIsFeasible) {
  Scene scene = straight_scene();
  scene.obstacles = {{0.0, 0.0, 10.0, 0.0}};  // sits on the ego
  CemMpcPlanner planner(small_config(), {});
  EXPECT_THROW(planner.plan(scene.start_state(), scene), PlanningFailure);
}

TEST(Mpc, SuccessivePlansAgreeOnEmptyRoad) {
  const Scene scene = straight_scene(200.0);
  CemMpcPlanner planner(small_config(2), {});
  EpisodeSettings settings;
  settings.execute_steps = 10;
  Episode ep(scene, settings);
  std::vector<Command> plans;
  for (int i = 0; i < 4; ++i) {
    plans.push_back(planner.plan(ep.ego(), scene));
    ++ep.log().plans;
    planner.on_executed(ep.execute(plans.back(), settings.execute_steps));
  }
  for (std::size_t p = 1; p < plans.size(); ++p) {
    const auto& prev = plans[p - 1].samples;
    const auto& cur = plans[p].samples;
    for (Eigen::Index k = 0; k + 10 < prev.size(); ++k) {
      EXPECT_NEAR(cur.x[k], prev.x[k + 10], 0.1);
      EXPECT_NEAR(cur.y[k], prev.y[k + 10], 0.1);
    }
  }
}

TEST(Mpc, FullHorizonIsOnePlan) {
  const Scene scene = straight_scene(50.0);
  CemMpcPlanner planner(small_config(), {});
  EpisodeSettings settings;
  settings.execute_steps = planner.config().basis.n_steps - 1;
  const SimLog log = run_episode(scene, planner, 0.06, settings);
  EXPECT_EQ(log.plans, 1);
  EXPECT_TRUE(log.reached_end);
}

TEST(Mpc, WarmStartNoWorseThanColdStart) {
  Scene scene = straight_scene(200.0);
  scene.obstacles = {{45.0, 0.0, 0.0, 0.0}};
  const auto features = lane_features(2.5);
  std::vector<double> diff;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CemMpcPlanner warm(small_config(seed), features);
    EpisodeSettings settings;
    Episode ep(scene, settings);
    ASSERT_EQ(mpc_step(warm, ep, 10), 10);
    CemMpcPlanner cold(small_config(seed + 1000), features);
    const double w = warm.plan(ep.ego(), scene).meta_cost;
    const double c = cold.plan(ep.ego(), scene).meta_cost;
    diff.push_back(w - c);
  }
  std::nth_element(diff.begin(), diff.begin() + 10, diff.end());
  EXPECT_LE(diff[10], 1e-6);
}

TEST(Mpc, WarmStartRefitsShiftedTail) {
  const Scene scene = straight_scene(200.0);
  CemMpcPlanner planner(small_config(), lane_features(1.0));
  const Command cmd = planner.plan(scene.start_state(), scene);
  planner.on_executed(10);
  ASSERT_TRUE(planner.distribution().has_value());
  const Basis basis(planner.config().basis);
  const Eigen::VectorXd mean_path = basis.P() * planner.distribution()->mu;
  for (Eigen::Index k = 0; k + 10 < cmd.samples.size(); ++k) {
    EXPECT_NEAR(mean_path[k], cmd.samples.y[k + 10], 1e-2);
  }

  PlannerConfig cold_cfg = small_config();
  cold_cfg.warm_start = false;
  CemMpcPlanner cold(cold_cfg, {});
  cold.plan(scene.start_state(), scene);
  cold.on_executed(10);
  EXPECT_FALSE(cold.distribution().has_value());
}

TEST(Baselines, SingleInitAndLaneKeeping) {
  Scene scene = straight_scene();
  scene.obstacles = {{30.0, 0.0, 0.0, 0.0}};
  scene.start_d = 1.0;
  SingleInitPlanner single(small_config(), {});
  const Command s = single.plan(scene.start_state(), scene);
  EXPECT_TRUE(std::isfinite(s.meta_cost));
  EXPECT_GE(s.meta_cost, single.last_result().primary_cost);

  BaselineController base(small_config());
  const Command b = base.plan(scene.start_state(), scene);
  // Ignores the obstacle, heads back to the centre line.
  EXPECT_LT(std::abs(b.samples.y[b.samples.size() - 1]), 0.2);
  EXPECT_NEAR(b.samples.dx[b.samples.size() - 1], scene.v_des, 0.2);
}

TEST(BuildProblem, CopiesSceneLimits) {
  Scene scene = straight_scene();
  scene.v_max = 12.0;
  scene.a_max = 3.0;
  scene.obstacles = {{20.0, 1.0, 1.0, 0.0, 2.0, 1.0}};
  EgoState ego{5.0, 0.5, 9.0, 0.1, 0.0, 0.0, 2.0};
  const PlannerConfig cfg = small_config();
  const auto spec = build_problem(scene, ego, {}, cfg);
  EXPECT_EQ(spec.v_max, 12.0);
  EXPECT_EQ(spec.a_max, 3.0);
  EXPECT_EQ(spec.b0.x, 5.0);
  EXPECT_EQ(spec.b0.dy, 0.1);
  ASSERT_EQ(spec.obstacles.size(), 1u);
  EXPECT_NEAR(spec.obstacles[0].x[0], 22.0, 1e-12);
  EXPECT_NEAR(spec.obstacles[0].a, 2.0 + 2.25 + 0.5, 1e-12);
  EXPECT_NEAR(spec.obstacles[0].b, 1.0 + 1.0 + 0.5, 1e-12);
}

}  // namespace
}  // namespace driftplan
