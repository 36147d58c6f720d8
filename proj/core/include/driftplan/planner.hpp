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

#ifndef DRIFTPLAN_PLANNER_HPP_
#define DRIFTPLAN_PLANNER_HPP_

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "driftplan/batch_optimizer.hpp"
#include "driftplan/bernstein.hpp"
#include "driftplan/cem.hpp"
#include "driftplan/scene.hpp"
#include "driftplan/simulator.hpp"

namespace driftplan {

struct PlannerConfig {
  BasisSpec basis;
  CemConfig cem;
  SolverSettings solver;
  CostWeights weights;
  double feature_gate = 40.0;
  double w_curv = 10.0;
  double w_road = 10.0;
  /// Refit the previous best tail into the next plan's mean.
  bool warm_start = true;
};

/// Trajectory problem for the current ego state: boundary conditions from the
/// ego, limits from the scene, predicted obstacles with planning margin.
ProblemSpec build_problem(const Scene& scene, const EgoState& ego,
                          const std::vector<FeatureAnchor>& features, const PlannerConfig& cfg);

MetaCostParams meta_params(const Scene& scene, const PlannerConfig& cfg);

/// Straight constant-speed guess at the current lateral offset.
TrajectoryCoeffs nominal_guess(const EgoState& ego, double speed, const BasisSpec& basis);

struct PlanOutput {
  TrajectoryCoeffs best;
  TrajectorySamples samples;
  double meta_cost = 0.0;
  SolveResult solve;
  SamplingDistribution dist;
  /// Best-so-far meta-cost after each CEM cycle.
  std::vector<double> best_so_far;
  /// Samples per cycle that solved, met every constraint and got a finite score.
  std::vector<int> accepted;
};

/// One planning call: cfg.cem.cem_iters cycles of sample -> batch solve ->
/// meta-cost -> elites -> refit. Only results that meet the boundary and
/// inequality tolerances are ranked. Throws PlanningFailure when no sample
/// is accepted in any cycle.
PlanOutput plan(const ProblemSpec& spec, const SamplingDistribution& dist,
                const PlannerConfig& cfg, const MetaCostParams& meta,
                const TrajectoryCoeffs& nominal, std::mt19937_64& rng);

/// Receding-horizon CEM planner. Owns the sampling distribution and the random
/// generator so consecutive plans are reproducible for a fixed seed.
class CemMpcPlanner : public Controller {
 public:
  CemMpcPlanner(PlannerConfig cfg, std::vector<FeatureAnchor> features);

  std::string name() const override { return "cem-mpc"; }
  Command plan(const EgoState& ego, const Scene& scene) override;
  void on_executed(int k) override;

  /// Full output of the most recent plan.
  const std::optional<PlanOutput>& last() const noexcept { return last_; }
  /// Distribution the next plan starts from (empty before the first plan).
  const std::optional<SamplingDistribution>& distribution() const noexcept { return dist_; }
  const PlannerConfig& config() const noexcept { return cfg_; }
  /// Forget the carried-over distribution; the next plan cold-starts.
  void reset();

 private:
  SamplingDistribution cold_start(const EgoState& ego) const;

  PlannerConfig cfg_;
  std::vector<FeatureAnchor> features_;
  Basis basis_;
  std::mt19937_64 rng_;
  std::optional<SamplingDistribution> dist_;
  std::optional<PlanOutput> last_;
};

/// Standard MPC from one straight-line initial guess per plan.
class SingleInitPlanner : public Controller {
 public:
  SingleInitPlanner(PlannerConfig cfg, std::vector<FeatureAnchor> features);
  std::string name() const override { return "single-init"; }
  Command plan(const EgoState& ego, const Scene& scene) override;

  const SolveResult& last_result() const noexcept { return last_; }

 private:
  PlannerConfig cfg_;
  std::vector<FeatureAnchor> features_;
  Basis basis_;
  SolveResult last_;
};

/// Lane keeping at the desired speed: tracks the centerline and ignores
/// obstacles and features.
class BaselineController : public Controller {
 public:
  explicit BaselineController(PlannerConfig cfg);
  std::string name() const override { return "baseline"; }
  Command plan(const EgoState& ego, const Scene& scene) override;

 private:
  PlannerConfig cfg_;
  Basis basis_;
};

}  // namespace driftplan

#endif  // DRIFTPLAN_PLANNER_HPP_
