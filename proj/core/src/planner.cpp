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

#include "driftplan/planner.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "driftplan/errors.hpp"

namespace driftplan {
namespace {

constexpr double kBoundaryTolerance = 1e-6;

Eigen::MatrixXd noise_covariance(const PlannerConfig& cfg, double scale) {
  const int nc = cfg.basis.n_coeffs();
  const Eigen::MatrixXd block = smoothness_covariance(nc, scale);
  if (!cfg.cem.sample_longitudinal) return block;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * nc, 2 * nc);
  cov.topLeftCorner(nc, nc) = block;
  cov.bottomRightCorner(nc, nc) = block;
  return cov;
}

Eigen::VectorXd stack(const TrajectoryCoeffs& c, bool longitudinal) {
  if (!longitudinal) return c.cy;
  Eigen::VectorXd v(c.cx.size() + c.cy.size());
  v << c.cx, c.cy;
  return v;
}

// Positions from step k onward, padded to the full horizon by extrapolating
// with the final velocity.
Eigen::VectorXd shifted_tail(const Eigen::VectorXd& pos, const Eigen::VectorXd& vel, int k,
                             double dt) {
  const Eigen::Index n = pos.size();
  Eigen::VectorXd out(n);
  const Eigen::Index keep = std::max<Eigen::Index>(0, n - k);
  out.head(keep) = pos.tail(keep);
  for (Eigen::Index i = keep; i < n; ++i) {
    out[i] = pos[n - 1] + vel[n - 1] * dt * static_cast<double>(i - keep + 1);
  }
  return out;
}

Command make_command(const Basis& basis, const TrajectoryCoeffs& coeffs, double meta) {
  Command c;
  c.coeffs = coeffs;
  c.samples = basis.evaluate(coeffs);
  c.dt = basis.spec().dt;
  c.meta_cost = meta;
  return c;
}

}  // namespace

ProblemSpec build_problem(const Scene& scene, const EgoState& ego,
                          const std::vector<FeatureAnchor>& features, const PlannerConfig& cfg) {
  ProblemSpec spec;
  spec.b0 = {ego.x, ego.y, ego.dx, ego.dy, ego.ddx, ego.ddy};
  spec.bf = {};
  spec.v_max = scene.v_max;
  spec.a_max = scene.a_max;
  spec.v_des = scene.v_des;
  spec.features = features;
  spec.feature_gate = cfg.feature_gate;
  spec.obstacles = predict_obstacles(scene, ego.t, cfg.basis.dt, cfg.basis.n_steps,
                                     scene.planning_margin);
  spec.weights = cfg.weights;
  return spec;
}

MetaCostParams meta_params(const Scene& scene, const PlannerConfig& cfg) {
  MetaCostParams p;
  p.kappa_max = scene.kappa_max;
  p.road_width = scene.road_width;
  p.w_curv = cfg.w_curv;
  p.w_road = cfg.w_road;
  return p;
}

TrajectoryCoeffs nominal_guess(const EgoState& ego, double speed, const BasisSpec& basis) {
  return straight_line(basis, ego.x, ego.y, speed, 0.0);
}

PlanOutput plan(const ProblemSpec& spec, const SamplingDistribution& dist,
                const PlannerConfig& cfg, const MetaCostParams& meta,
                const TrajectoryCoeffs& nominal, std::mt19937_64& rng) {
  meta.validate();
  const BatchOptimizer opt(cfg.basis, spec, cfg.solver);
  const Basis& basis = opt.basis();
  const bool longitudinal = cfg.cem.sample_longitudinal;
  const double tol = cfg.solver.tolerance;

  std::vector<std::vector<SolveResult>> cycles;
  std::vector<int> accepted;
  std::size_t failed = 0;
  std::size_t infeasible = 0;
  std::string first_error;

  const BatchEvaluator evaluate = [&](std::span<const Eigen::VectorXd> draws,
                                      std::vector<Eigen::VectorXd>& refined,
                                      std::vector<double>& scores) {
    const auto inits = to_inits(draws, nominal, spec, basis.spec(), longitudinal);
    auto results = opt.solve_batch(inits);
    int ok = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const SolveResult& r = results[i];
      refined[i] = draws[i];
      scores[i] = std::numeric_limits<double>::infinity();
      if (r.failed()) {
        ++failed;
        if (first_error.empty()) first_error = r.error;
        continue;
      }
      refined[i] = stack(r.coeffs, longitudinal);
      if (r.residuals.boundary > kBoundaryTolerance || r.residuals.max_inequality() > tol) {
        ++infeasible;
        continue;
      }
      try {
        scores[i] = meta_cost(r, basis.evaluate(r.coeffs), meta, spec);
        ++ok;
      } catch (const SingularCurvatureError& e) {
        ++failed;
        if (first_error.empty()) first_error = e.what();
      }
    }
    accepted.push_back(ok);
    cycles.push_back(std::move(results));
  };

  CemOutcome outcome = run_cem(dist, cfg.cem, noise_covariance(cfg, cfg.cem.noise_scale), rng,
                               evaluate);
  if (outcome.best_cycle < 0) {
    throw PlanningFailure("no trajectory met the constraints: " + std::to_string(failed) +
                          " failed, " + std::to_string(infeasible) + " infeasible" +
                          (first_error.empty() ? "" : "; first error: " + first_error));
  }
  PlanOutput out;
  out.solve = cycles[static_cast<std::size_t>(outcome.best_cycle)][outcome.best_index];
  out.best = out.solve.coeffs;
  out.samples = basis.evaluate(out.best);
  out.meta_cost = outcome.best_score;
  out.dist = std::move(outcome.dist);
  out.best_so_far = std::move(outcome.best_so_far);
  out.accepted = std::move(accepted);
  return out;
}

CemMpcPlanner::CemMpcPlanner(PlannerConfig cfg, std::vector<FeatureAnchor> features)
    : cfg_(std::move(cfg)),
      features_(std::move(features)),
      basis_(cfg_.basis),
      rng_(cfg_.cem.seed) {
  cfg_.cem.validate();
}

void CemMpcPlanner::reset() {
  dist_.reset();
  last_.reset();
}

SamplingDistribution CemMpcPlanner::cold_start(const EgoState& ego) const {
  const TrajectoryCoeffs nominal = nominal_guess(ego, ego.dx, cfg_.basis);
  return {stack(nominal, cfg_.cem.sample_longitudinal),
          noise_covariance(cfg_, cfg_.cem.init_scale)};
}

Command CemMpcPlanner::plan(const EgoState& ego, const Scene& scene) {
  const ProblemSpec spec = build_problem(scene, ego, features_, cfg_);
  const TrajectoryCoeffs nominal = nominal_guess(ego, scene.v_des, cfg_.basis);
  if (!dist_) dist_ = cold_start(ego);
  PlanOutput out = driftplan::plan(spec, *dist_, cfg_, meta_params(scene, cfg_), nominal, rng_);
  dist_ = out.dist;
  Command cmd;
  cmd.coeffs = out.best;
  cmd.samples = out.samples;
  cmd.dt = cfg_.basis.dt;
  cmd.meta_cost = out.meta_cost;
  last_ = std::move(out);
  return cmd;
}

void CemMpcPlanner::on_executed(int k) {
  if (!cfg_.warm_start || !last_) {
    dist_.reset();
    return;
  }
  if (!dist_ || k <= 0) return;
  const double dt = cfg_.basis.dt;
  const TrajectorySamples& s = last_->samples;
  const Eigen::VectorXd cy = basis_.fit_axis(shifted_tail(s.y, s.dy, k, dt));
  if (cfg_.cem.sample_longitudinal) {
    const Eigen::VectorXd cx = basis_.fit_axis(shifted_tail(s.x, s.dx, k, dt));
    dist_->mu << cx, cy;
  } else {
    dist_->mu = cy;
  }
}

SingleInitPlanner::SingleInitPlanner(PlannerConfig cfg, std::vector<FeatureAnchor> features)
    : cfg_(std::move(cfg)), features_(std::move(features)), basis_(cfg_.basis) {}

Command SingleInitPlanner::plan(const EgoState& ego, const Scene& scene) {
  const ProblemSpec spec = build_problem(scene, ego, features_, cfg_);
  const BatchOptimizer opt(cfg_.basis, spec, cfg_.solver);
  last_ = opt.solve(nominal_guess(ego, scene.v_des, cfg_.basis));
  const TrajectorySamples samples = basis_.evaluate(last_.coeffs);
  const double meta = meta_cost(last_, samples, meta_params(scene, cfg_), spec);
  return make_command(basis_, last_.coeffs, meta);
}

BaselineController::BaselineController(PlannerConfig cfg)
    : cfg_(std::move(cfg)), basis_(cfg_.basis) {}

Command BaselineController::plan(const EgoState& ego, const Scene& scene) {
  Scene lane = scene;
  lane.obstacles.clear();
  // Dense centerline anchors turn the feature term into lane keeping.
  std::vector<FeatureAnchor> centerline;
  const double reach = ego.x + scene.v_max * cfg_.basis.horizon() + cfg_.feature_gate;
  for (double s = std::floor(ego.x); s <= reach; s += 1.0) centerline.push_back({s, 0.0, 1.0});
  const ProblemSpec spec = build_problem(lane, ego, centerline, cfg_);
  const BatchOptimizer opt(cfg_.basis, spec, cfg_.solver);
  const SolveResult r = opt.solve(nominal_guess(ego, scene.v_des, cfg_.basis));
  return make_command(basis_, r.coeffs, r.primary_cost);
}

}  // namespace driftplan
