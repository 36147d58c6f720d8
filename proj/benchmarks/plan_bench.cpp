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
#include <filesystem>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "driftplan/batch_optimizer.hpp"
#include "driftplan/planner.hpp"
#include "driftplan/scene_io.hpp"

namespace {

using namespace driftplan;

const std::filesystem::path kScenes = DRIFTPLAN_SCENE_DIR;

// One full plan on the two-obstacle scene; arg = samples per cycle.
void BM_Plan(benchmark::State& state) {
  const Scene scene = load_scene(kScenes / "obstacle_wall.json");
  PlannerConfig cfg;
  cfg.cem.n_samples = static_cast<int>(state.range(0));
  cfg.cem.n_elite = std::max(2, cfg.cem.n_samples / 12);
  cfg.cem.n_noise = std::max(2, cfg.cem.n_samples / 50);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.cem.seed = seed++;
    CemMpcPlanner planner(cfg, scene.features);
    benchmark::DoNotOptimize(planner.plan(scene.start_state(), scene));
  }
  state.SetItemsProcessed(state.iterations() * cfg.cem.n_samples * cfg.cem.cem_iters);
}
BENCHMARK(BM_Plan)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

// Single trajectory solve from a straight-line guess.
void BM_Solve(benchmark::State& state) {
  const Scene scene = load_scene(kScenes / "obstacle_wall.json");
  const PlannerConfig cfg;
  const EgoState ego = scene.start_state();
  const ProblemSpec spec = build_problem(scene, ego, scene.features, cfg);
  const BatchOptimizer opt(cfg.basis, spec, cfg.solver);
  const TrajectoryCoeffs init = nominal_guess(ego, scene.v_des, cfg.basis);
  for (auto _ : state) benchmark::DoNotOptimize(opt.solve(init));
}
BENCHMARK(BM_Solve)->Unit(benchmark::kMicrosecond);

// Batch of solves from jittered guesses; arg = batch size.
void BM_SolveBatch(benchmark::State& state) {
  const Scene scene = load_scene(kScenes / "obstacle_wall.json");
  const PlannerConfig cfg;
  const EgoState ego = scene.start_state();
  const ProblemSpec spec = build_problem(scene, ego, scene.features, cfg);
  const BatchOptimizer opt(cfg.basis, spec, cfg.solver);
  std::mt19937_64 rng(0);
  std::normal_distribution<double> n01;
  std::vector<TrajectoryCoeffs> inits(static_cast<std::size_t>(state.range(0)),
                                      nominal_guess(ego, scene.v_des, cfg.basis));
  for (auto& c : inits) {
    for (Eigen::Index i = 3; i < c.cy.size(); ++i) c.cy[i] += n01(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(opt.solve_batch(inits));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SolveBatch)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
