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

#ifndef DRIFTPLAN_BATCH_OPTIMIZER_HPP_
#define DRIFTPLAN_BATCH_OPTIMIZER_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "driftplan/bernstein.hpp"

namespace driftplan {

/// Position, velocity and acceleration of the ego at the start of a plan, in
/// road coordinates (x along the centerline, y lateral).
struct BoundaryState {
  double x = 0.0, y = 0.0;
  double dx = 0.0, dy = 0.0;
  double ddx = 0.0, ddy = 0.0;
};

/// Terminal equality conditions. The terminal position is left free.
struct TerminalConditions {
  double dy = 0.0;
  double ddx = 0.0;
  double ddy = 0.0;
};

/// A drift-minimizing feature location in road coordinates.
struct FeatureAnchor {
  double s = 0.0;
  double d = 0.0;
  double weight = 1.0;
};

/// Predicted obstacle centers over the horizon and the semi-axes of the
/// (already inflated) axis-aligned ellipse around them.
struct ObstaclePrediction {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double a = 1.0;
  double b = 1.0;
};

struct CostWeights {
  double acc = 1.0;
  double feat = 2.0;
  double vel = 1.0;
};

struct ProblemSpec {
  BoundaryState b0;
  TerminalConditions bf;
  double v_max = 15.0;
  double a_max = 4.0;
  double v_des = 10.0;
  std::vector<FeatureAnchor> features;
  /// Longitudinal window [x_t, x_t + feature_gate] searched for the feature
  /// tracked at step t.
  double feature_gate = 40.0;
  std::vector<ObstaclePrediction> obstacles;
  CostWeights weights;

  /// Throws InvalidArgument/ShapeError when bounds, ellipse axes or obstacle
  /// prediction lengths are invalid for `n_steps` samples.
  void validate(int n_steps) const;
};

/// Per-constraint maximum violation. Speed and acceleration are in m/s and
/// m/s^2 above the bound; collision is the dimensionless ellipse violation.
struct Residuals {
  double boundary = 0.0;
  double speed_bound = 0.0;
  double accel_bound = 0.0;
  double collision = 0.0;

  double max_inequality() const noexcept;
};

struct SolverSettings {
  int max_iterations = 100;
  double penalty_init = 1.0;
  double penalty_growth = 1.5;
  /// Divides the penalty while the iterate is feasible, down to penalty_init.
  /// 1 keeps it fixed.
  double penalty_shrink = 1.2;
  double penalty_max = 1e6;
  /// Inequality tolerance for convergence.
  double tolerance = 1e-3;
  /// Largest coefficient change (m) between iterates that counts as stationary.
  double step_tolerance = 1e-2;
  /// Worker threads for solve_batch; 0 selects hardware concurrency.
  int threads = 0;
};

struct SolveResult {
  TrajectoryCoeffs coeffs;
  double primary_cost = 0.0;
  Residuals residuals;
  bool converged = false;
  int iterations = 0;
  /// Non-empty when the solve failed (for example, diverged); coeffs are then
  /// unspecified.
  std::string error;

  bool failed() const noexcept { return !error.empty(); }
};

/// Lateral target and weight of the feature tracked at each step; weight 0
/// where no feature lies inside the gate.
struct FeatureTargets {
  Eigen::VectorXd d;
  Eigen::VectorXd weight;
};

/// Nearest feature ahead of each x_t within the gate; ties go to smaller |d|.
/// `features` must be sorted by s.
FeatureTargets feature_targets(std::span<const FeatureAnchor> features, double gate,
                               const Eigen::VectorXd& x);

/// acc + feature + velocity terms of the trajectory objective.
double primary_cost(const ProblemSpec& spec, const TrajectorySamples& s);

/// n_steps x n_obstacles array of max(0, 1 - (dx/a)^2 - (dy/b)^2).
Eigen::MatrixXd collision_residual(const ProblemSpec& spec, const TrajectorySamples& s);

/// Residuals of a sampled trajectory against the spec.
Residuals evaluate_residuals(const ProblemSpec& spec, const TrajectorySamples& s);

/// Overwrites the boundary coefficients of `c` so the trajectory meets b0 and
/// bf exactly. Requires degree >= 5.
TrajectoryCoeffs project_to_boundary(const TrajectoryCoeffs& c, const ProblemSpec& spec,
                                     const BasisSpec& basis);

/// Solves many perturbations of one trajectory problem.
///
/// Boundary equalities are eliminated by fixing the first three and the
/// terminal Bernstein coefficients, so every iterate meets them exactly. The
/// remaining free coefficients are optimized by an augmented Lagrangian over
/// the speed, acceleration and collision inequalities. Each inner step
/// majorizes the speed-tracking term with a fixed direction and linearizes
/// every active constraint by projecting onto its feasible set, which leaves a
/// small block-diagonal (longitudinal / lateral) linear system per iteration.
///
/// Instances are immutable after construction; solve() and solve_batch() are
/// safe to call concurrently.
class BatchOptimizer {
 public:
  BatchOptimizer(const BasisSpec& basis, ProblemSpec spec, SolverSettings settings = {});
  ~BatchOptimizer();
  BatchOptimizer(BatchOptimizer&&) noexcept;
  BatchOptimizer& operator=(BatchOptimizer&&) noexcept;

  const Basis& basis() const noexcept;
  const ProblemSpec& spec() const noexcept;
  const SolverSettings& settings() const noexcept;

  /// Throws ShapeError on dimension mismatch and DivergenceError when an
  /// iterate becomes non-finite. Exhausting max_iterations is not an error:
  /// the best iterate is returned with converged = false.
  SolveResult solve(const TrajectoryCoeffs& init) const;

  /// Element i equals solve(inits[i]). Per-element errors are reported via
  /// SolveResult::error instead of being thrown.
  std::vector<SolveResult> solve_batch(std::span<const TrajectoryCoeffs> inits) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SolveResult solve_single(const ProblemSpec& spec, const TrajectoryCoeffs& init,
                         const SolverSettings& settings, const BasisSpec& basis = {});

std::vector<SolveResult> solve_batch(const ProblemSpec& spec,
                                     std::span<const TrajectoryCoeffs> inits,
                                     const SolverSettings& settings,
                                     const BasisSpec& basis = {});

}  // namespace driftplan

#endif  // DRIFTPLAN_BATCH_OPTIMIZER_HPP_
