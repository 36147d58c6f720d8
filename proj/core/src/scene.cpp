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

#include "driftplan/scene.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftplan/errors.hpp"

namespace driftplan {

void Scene::validate() const {
  if (!(run_length > 0.0)) throw InvalidArgument("scene run_length must be positive");
  if (!(road_width > 0.0)) throw InvalidArgument("scene road_width must be positive");
  if (!(v_des > 0.0) || !(v_max > 0.0) || !(a_max > 0.0) || !(kappa_max > 0.0)) {
    throw InvalidArgument("scene speed, acceleration and curvature limits must be positive");
  }
  if (start_s < 0.0 || start_s + run_length > centerline.length()) {
    throw InvalidArgument("scene run [" + std::to_string(start_s) + ", " +
                          std::to_string(start_s + run_length) +
                          "] exceeds the centerline length " +
                          std::to_string(centerline.length()));
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (std::abs(features[i].d) > kFeatureBand) {
      throw InvalidArgument("feature " + std::to_string(i) + " lies outside |d| <= 25 m");
    }
    if (!(features[i].weight >= 0.0)) {
      throw InvalidArgument("feature " + std::to_string(i) + " has a negative weight");
    }
  }
  for (std::size_t j = 0; j < obstacles.size(); ++j) {
    if (!(obstacles[j].half_length > 0.0) || !(obstacles[j].half_width > 0.0)) {
      throw InvalidArgument("obstacle " + std::to_string(j) + " has a non-positive footprint");
    }
  }
}

EgoState Scene::start_state() const {
  EgoState e;
  e.x = start_s;
  e.y = start_d;
  e.dx = start_speed;
  return e;
}

std::vector<Structure> Scene::lidar_structures() const {
  if (!structures.empty()) return structures;
  std::vector<Structure> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    Structure s;
    s.kind = Structure::Kind::kCylinder;
    s.s = f.s;
    s.d = f.d;
    out.push_back(s);
  }
  return out;
}

std::vector<ObstaclePrediction> predict_obstacles(const Scene& scene, double t0, double dt, int n,
                                                  double margin) {
  if (n < 1) throw InvalidArgument("prediction horizon must be at least one step");
  std::vector<ObstaclePrediction> out;
  out.reserve(scene.obstacles.size());
  for (const auto& o : scene.obstacles) {
    ObstaclePrediction p;
    p.x.resize(n);
    p.y.resize(n);
    for (int k = 0; k < n; ++k) {
      const double t = t0 + k * dt;
      p.x[k] = o.x + o.vx * t;
      p.y[k] = o.y + o.vy * t;
    }
    p.a = o.half_length + scene.ego_half_length + margin;
    p.b = o.half_width + scene.ego_half_width + margin;
    out.push_back(std::move(p));
  }
  return out;
}

void DriftModel::validate() const {
  if (!(delta_min >= 0.0) || !(delta_min < delta_max)) {
    throw InvalidArgument("drift model needs 0 <= delta_min < delta_max");
  }
  if (!(kernel_sigma > 0.0) || !(visibility_range >= 0.0)) {
    throw InvalidArgument("drift model kernel_sigma must be positive");
  }
}

double drift_increment(const EgoState& ego, const Scene& scene, const DriftModel& model) {
  double richness = 0.0;
  const double inv = 1.0 / (2.0 * model.kernel_sigma * model.kernel_sigma);
  for (const auto& f : scene.features) {
    if (f.s < ego.x || f.s > ego.x + model.visibility_range) continue;
    const double e = ego.y - f.d;
    richness += f.weight * std::exp(-e * e * inv);
  }
  richness = std::clamp(richness, 0.0, 1.0);
  return std::clamp(model.delta_max - (model.delta_max - model.delta_min) * richness,
                    model.delta_min, model.delta_max);
}

}  // namespace driftplan
