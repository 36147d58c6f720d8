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

#include "driftplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <string>

#include "driftplan/errors.hpp"
#include "driftplan/planner.hpp"

namespace driftplan {
namespace {

// Road-to-global map that extends the centerline linearly past its ends, so a
// final step overshooting the road end still has a position.
Vec2 road_to_global(const Centerline& c, double s, double d) {
  if (s >= 0.0 && s <= c.length()) return c.to_global({s, d});
  const double clamped = s < 0.0 ? 0.0 : c.length();
  const Vec2 base = c.to_global({clamped, d});
  return base + (s - clamped) * c.tangent(clamped);
}

}  // namespace

Episode::Episode(const Scene& scene, const EpisodeSettings& settings)
    : scene_(scene), settings_(settings), s_end_(scene.start_s + scene.run_length) {
  scene_.validate();
  settings_.drift.validate();
  if (settings_.execute_steps < 1) throw InvalidArgument("execute_steps must be >= 1");
  push_state(scene_.start_state(), -1);
  log_.steps.back().drift_increment = 0.0;
  log_.steps.back().cumulative_drift = 0.0;
}

void Episode::push_state(const EgoState& s, int plan_id) {
  SimStep step;
  step.state = s;
  const Vec2 g = road_to_global(scene_.centerline, s.x, s.y);
  const double s_clamped = std::clamp(s.x, 0.0, scene_.centerline.length());
  const Vec2 tan = scene_.centerline.tangent(s_clamped);
  const Vec2 nor(-tan.y(), tan.x());
  const Vec2 v = s.dx * tan + s.dy * nor;
  step.gx = g.x();
  step.gy = g.y();
  step.gdx = v.x();
  step.gdy = v.y();
  step.plan_id = plan_id;
  if (!log_.steps.empty()) {
    step.drift_increment = drift_increment(s, scene_, settings_.drift);
    step.cumulative_drift = log_.steps.back().cumulative_drift + step.drift_increment;
  }
  log_.steps.push_back(step);
}

bool Episode::done() const noexcept {
  return log_.reached_end || !log_.collisions.empty() ||
         executed_steps() >= settings_.max_steps;
}

int Episode::execute(const Command& command, int k) {
  const auto& smp = command.samples;
  int executed = 0;
  for (int i = 1; i <= k && i < smp.size() && !done(); ++i) {
    EgoState s;
    s.x = smp.x[i];
    s.y = smp.y[i];
    s.dx = smp.dx[i];
    s.dy = smp.dy[i];
    s.ddx = smp.ddx[i];
    s.ddy = smp.ddy[i];
    s.t = ego().t + command.dt;
    push_state(s, log_.plans - 1);
    ++executed;
    if (!heading_within_assumption(s.dx, s.dy)) ++log_.heading_warnings;

    for (std::size_t j = 0; j < scene_.obstacles.size(); ++j) {
      const auto& o = scene_.obstacles[j];
      const double a = o.half_length + scene_.ego_half_length;
      const double b = o.half_width + scene_.ego_half_width;
      const double ex = (s.x - (o.x + o.vx * s.t)) / a;
      const double ey = (s.y - (o.y + o.vy * s.t)) / b;
      if (ex * ex + ey * ey < 1.0) log_.collisions.push_back({s.t, j});
    }
    if (s.x >= s_end_ - 1e-9) log_.reached_end = true;
  }
  return executed;
}

int mpc_step(Controller& controller, Episode& episode, int k) {
  if (k < 1) throw InvalidArgument("mpc_step needs k >= 1");
  const Command cmd = controller.plan(episode.ego(), episode.scene());
  ++episode.log().plans;
  const int executed = episode.execute(cmd, k);
  controller.on_executed(executed);
  return executed;
}

SimLog run_episode(const Scene& scene, Controller& controller, double dt,
                   const EpisodeSettings& settings) {
  if (!(dt > 0.0)) throw InvalidArgument("episode dt must be positive");
  Episode ep(scene, settings);
  while (!ep.done()) {
    const Command cmd = controller.plan(ep.ego(), ep.scene());
    if (std::abs(cmd.dt - dt) > 1e-12) {
      throw InvalidArgument("controller step " + std::to_string(cmd.dt) +
                            " differs from the episode step " + std::to_string(dt));
    }
    ++ep.log().plans;
    const int executed = ep.execute(cmd, settings.execute_steps);
    controller.on_executed(executed);
    if (executed == 0) break;
  }
  return ep.log();
}

EpisodeMetrics metrics(const SimLog& log, const Scene& scene) {
  if (log.steps.empty()) throw InvalidArgument("metrics of an empty log");
  EpisodeMetrics m;
  double path = 0.0;
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    m.ape_proxy += log.steps[i].drift_increment;
    if (i > 0) {
      path += std::hypot(log.steps[i].gx - log.steps[i - 1].gx,
                         log.steps[i].gy - log.steps[i - 1].gy);
    }
  }
  m.drl_ratio = path / scene.run_length;
  return m;
}

void write_simlog_csv(const SimLog& log, std::ostream& os) {
  os << "t,x,y,dx,dy,drift_increment,cumulative_drift\n";
  os << std::setprecision(10);
  for (const auto& s : log.steps) {
    os << s.state.t << ',' << s.gx << ',' << s.gy << ',' << s.gdx << ',' << s.gdy << ','
       << s.drift_increment << ',' << s.cumulative_drift << '\n';
  }
}

}  // namespace driftplan
