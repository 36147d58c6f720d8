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

#ifndef DRIFTPLAN_SIMULATOR_HPP_
#define DRIFTPLAN_SIMULATOR_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "driftplan/bernstein.hpp"
#include "driftplan/scene.hpp"

namespace driftplan {

/// A commanded trajectory in road coordinates, sampled every basis step.
struct Command {
  TrajectorySamples samples;
  TrajectoryCoeffs coeffs;
  double dt = 0.0;
  double meta_cost = 0.0;
};

/// Anything that can drive the ego: the CEM-MPC planner or a baseline.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  /// Trajectory starting at `ego` (sample 0 equals the current state).
  virtual Command plan(const EgoState& ego, const Scene& scene) = 0;
  /// Called after the simulator executed the first `k` steps of the last plan.
  virtual void on_executed(int /*k*/) {}
};

struct SimStep {
  EgoState state;  // road frame
  double gx = 0.0, gy = 0.0;    // global position
  double gdx = 0.0, gdy = 0.0;  // global velocity
  int plan_id = -1;
  double drift_increment = 0.0;
  double cumulative_drift = 0.0;
};

struct CollisionEvent {
  double t = 0.0;
  std::size_t obstacle = 0;
};

struct SimLog {
  /// steps.front() is the initial state (drift increment 0).
  std::vector<SimStep> steps;
  std::vector<CollisionEvent> collisions;
  /// Executed steps whose heading left the small-angle band.
  int heading_warnings = 0;
  int plans = 0;
  bool reached_end = false;
};

struct EpisodeSettings {
  /// Steps executed per plan.
  int execute_steps = 10;
  int max_steps = 100000;
  DriftModel drift;
};

/// Incremental simulation of one episode. The ego follows commanded samples
/// exactly; obstacles move at constant velocity; drift accrues per step.
class Episode {
 public:
  Episode(const Scene& scene, const EpisodeSettings& settings);

  const Scene& scene() const noexcept { return scene_; }
  const EgoState& ego() const noexcept { return log_.steps.back().state; }
  const SimLog& log() const noexcept { return log_; }
  SimLog& log() noexcept { return log_; }
  int executed_steps() const noexcept { return static_cast<int>(log_.steps.size()) - 1; }
  /// Run length reached, step budget exhausted or a collision occurred.
  bool done() const noexcept;

  /// Executes samples 1..k of the command (fewer when the episode ends first).
  /// Returns the number of steps actually executed.
  int execute(const Command& command, int k);

 private:
  void push_state(const EgoState& s, int plan_id);

  const Scene& scene_;
  EpisodeSettings settings_;
  SimLog log_;
  double s_end_;
};

/// Plans, executes up to `k` steps in the episode and notifies the controller.
/// Returns the number of executed steps.
int mpc_step(Controller& controller, Episode& episode, int k);

/// Runs an episode to the end of the road, the step budget or a collision.
/// The commanded step must match `dt`.
SimLog run_episode(const Scene& scene, Controller& controller, double dt,
                   const EpisodeSettings& settings);

struct EpisodeMetrics {
  double ape_proxy = 0.0;
  double drl_ratio = 0.0;
};

/// Throws InvalidArgument on an empty log.
EpisodeMetrics metrics(const SimLog& log, const Scene& scene);

/// t,x,y,dx,dy,drift_increment,cumulative_drift (global frame).
void write_simlog_csv(const SimLog& log, std::ostream& os);

}  // namespace driftplan

#endif  // DRIFTPLAN_SIMULATOR_HPP_
