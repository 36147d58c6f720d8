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

#ifndef DRIFTPLAN_SCENE_HPP_
#define DRIFTPLAN_SCENE_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "driftplan/batch_optimizer.hpp"
#include "driftplan/frenet.hpp"

namespace driftplan {

/// A moving obstacle. Position and velocity are in road coordinates
/// (x = arc length, y = lateral offset) at t = 0.
struct Obstacle {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double half_length = 2.25;
  double half_width = 1.0;
};

/// Static roadside geometry seen by the synthetic LIDAR. Cylinders model
/// poles and trees, boxes model walls and platforms. Placed in road
/// coordinates; boxes are aligned with the local centerline direction.
struct Structure {
  enum class Kind { kCylinder, kBox };
  Kind kind = Kind::kCylinder;
  double s = 0.0;
  double d = 0.0;
  double radius = 0.3;
  double half_length = 0.5;
  double half_width = 0.5;
  double height = 4.0;
};

/// Ego state in road coordinates: x is arc length, y lateral offset.
struct EgoState {
  double x = 0.0, y = 0.0;
  double dx = 0.0, dy = 0.0;
  double ddx = 0.0, ddy = 0.0;
  double t = 0.0;
};

struct Scene {
  std::string name = "scene";
  Centerline centerline = Centerline::straight(1000.0);
  double road_width = 7.0;
  double run_length = 100.0;
  std::vector<FeatureAnchor> features;
  std::vector<Obstacle> obstacles;
  /// When empty, synthetic clouds place one pole per feature.
  std::vector<Structure> structures;
  double v_des = 10.0;
  double v_max = 15.0;
  double a_max = 4.0;
  double kappa_max = 0.2;
  double ego_half_length = 2.25;
  double ego_half_width = 1.0;
  /// Extra clearance added to both ellipse semi-axes for planning only.
  double planning_margin = 0.5;
  /// Initial ego pose (road coordinates) and speed along the road.
  double start_s = 0.0;
  double start_d = 0.0;
  double start_speed = 10.0;

  /// Throws InvalidArgument on a non-positive run length or road width,
  /// features outside |d| <= 25 m, or a run that leaves the centerline.
  void validate() const;

  EgoState start_state() const;
  /// Structures for the synthetic LIDAR (explicit ones, or one pole per feature).
  std::vector<Structure> lidar_structures() const;
};

/// Maximum |d| of a feature anchor accepted by Scene::validate.
inline constexpr double kFeatureBand = 25.0;

/// Constant-velocity obstacle centers at t0 + k * dt for k = 0 .. n - 1.
/// `margin` is added to both semi-axes on top of the ego + obstacle footprint.
std::vector<ObstaclePrediction> predict_obstacles(const Scene& scene, double t0, double dt, int n,
                                                  double margin);

struct DriftModel {
  double delta_min = 0.002;
  double delta_max = 0.02;
  double kernel_sigma = 2.0;
  double visibility_range = 40.0;

  void validate() const;
};

/// Per-step localization drift proxy. Feature richness is the weighted
/// Gaussian-kernel sum over features visible ahead, capped at 1; a fully rich
/// neighbourhood yields delta_min, an empty one delta_max.
double drift_increment(const EgoState& ego, const Scene& scene, const DriftModel& model);

}  // namespace driftplan

#endif  // DRIFTPLAN_SCENE_HPP_
