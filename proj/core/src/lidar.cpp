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

#include "driftplan/lidar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

#include "driftplan/errors.hpp"

namespace driftplan {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

double rad(double deg) { return deg * kDeg; }

Eigen::Vector2d rotate(const Eigen::Vector2d& v, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

// Entry distance of a ray (origin o, direction u) into a vertical cylinder
// standing on z = 0, or +inf.
double hit_cylinder(const Eigen::Vector3d& o, const Eigen::Vector3d& u, const Eigen::Vector2d& c,
                    double r, double height) {
  const double ox = o.x() - c.x(), oy = o.y() - c.y();
  const double a = u.x() * u.x() + u.y() * u.y();
  const double cc = ox * ox + oy * oy - r * r;
  if (a <= 0.0 || cc <= 0.0) return std::numeric_limits<double>::infinity();
  const double b = 2.0 * (ox * u.x() + oy * u.y());
  const double disc = b * b - 4.0 * a * cc;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double t = (-b - std::sqrt(disc)) / (2.0 * a);
  if (t <= 0.0) return std::numeric_limits<double>::infinity();
  const double z = o.z() + t * u.z();
  if (z < 0.0 || z > height) return std::numeric_limits<double>::infinity();
  return t;
}

// Slab test against a box with local half extents (hx, hy) and z in
// [0, height]; origin and direction are already in the box frame.
double hit_box(const Eigen::Vector3d& o, const Eigen::Vector3d& u, double hx, double hy,
               double height) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  const double lo[3] = {-hx, -hy, 0.0};
  const double hi[3] = {hx, hy, height};
  bool inside = true;
  for (int k = 0; k < 3; ++k) {
    if (o[k] < lo[k] || o[k] > hi[k]) inside = false;
    if (u[k] == 0.0) {
      if (o[k] < lo[k] || o[k] > hi[k]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double a = (lo[k] - o[k]) / u[k];
    double b = (hi[k] - o[k]) / u[k];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  if (inside || t0 > t1 || t0 <= 0.0) return std::numeric_limits<double>::infinity();
  return t0;
}

struct PlacedStructure {
  Structure::Kind kind;
  Eigen::Vector2d center;  // sensor frame
  double yaw = 0.0;        // box axis relative to the sensor
  Structure src;
};

}  // namespace

void LidarConfig::validate() const {
  if (w < 1 || h < 1) throw InvalidArgument("lidar image dimensions must be at least 1");
  if (!(fov_down < fov_up)) throw InvalidArgument("lidar fov_down must be below fov_up");
  if (!(max_range > 0.0)) throw InvalidArgument("lidar max_range must be positive");
  if (!std::isfinite(sensor_height)) throw InvalidArgument("lidar sensor_height must be finite");
}

double LidarConfig::fov_up_rad() const { return rad(fov_up); }
double LidarConfig::fov_down_rad() const { return rad(fov_down); }
double LidarConfig::fov_total_rad() const {
  return std::abs(fov_down_rad()) + std::abs(fov_up_rad());
}

RangeImage::RangeImage(int w_, int h_) : w(w_), h(h_) {
  if (w < 1 || h < 1) throw InvalidArgument("range image dimensions must be at least 1");
  depth.assign(static_cast<std::size_t>(w) * h, 0.0);
  valid.assign(depth.size(), 0);
}

std::size_t RangeImage::index(int x, int y) const {
  return static_cast<std::size_t>(y) * w + x;
}

std::size_t RangeImage::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 1));
}

ActivationMap::ActivationMap(int w_, int h_, double fill) : w(w_), h(h_) {
  if (w < 1 || h < 1) throw InvalidArgument("activation map dimensions must be at least 1");
  values.assign(static_cast<std::size_t>(w) * h, fill);
}

std::size_t ActivationMap::index(int x, int y) const {
  return static_cast<std::size_t>(y) * w + x;
}

void ActivationMap::validate() const {
  if (w < 1 || h < 1 || values.size() != static_cast<std::size_t>(w) * h) {
    throw ShapeError("activation map size does not match its dimensions");
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("activation outside [0, 1]");
  }
}

Spherical spherical_decompose(const Eigen::Vector3d& p) {
  const double r = p.norm();
  if (!(r > 0.0)) throw InvalidArgument("cannot decompose a degenerate point at the origin");
  double phi = std::atan2(p.y(), p.x());
  if (phi <= -kPi) phi = kPi;
  return {r, phi, std::asin(std::clamp(p.z() / r, -1.0, 1.0))};
}

Pixel pixel_of(double phi, double theta, const LidarConfig& cfg) {
  const double fx = std::floor(0.5 * (1.0 - phi / kPi) * cfg.w);
  const double fy =
      std::floor((1.0 - (theta + std::abs(cfg.fov_down_rad())) / cfg.fov_total_rad()) * cfg.h);
  return {static_cast<int>(std::clamp(fx, 0.0, static_cast<double>(cfg.w - 1))),
          static_cast<int>(std::clamp(fy, 0.0, static_cast<double>(cfg.h - 1)))};
}

RangeImage project(const PointCloud& cloud, const LidarConfig& cfg, ProjectionStats* stats) {
  cfg.validate();
  if (cloud.points.empty()) throw InvalidArgument("cannot project an empty point cloud");
  RangeImage img(cfg.w, cfg.h);
  ProjectionStats st;
  const double up = cfg.fov_up_rad(), down = cfg.fov_down_rad();
  for (const auto& p : cloud.points) {
    if (!p.allFinite()) throw InvalidArgument("point cloud contains a non-finite coordinate");
    const Spherical sp = spherical_decompose(p);
    if (sp.theta > up || sp.theta < down) {
      ++st.dropped;
      continue;
    }
    const Pixel px = pixel_of(sp.phi, sp.theta, cfg);
    const std::size_t i = img.index(px.x, px.y);
    if (!img.valid[i] || sp.r < img.depth[i]) {
      img.depth[i] = sp.r;
      img.valid[i] = 1;
    }
    ++st.projected;
  }
  if (stats) *stats = st;
  return img;
}

Eigen::Vector3d unproject(Pixel px, double depth, const LidarConfig& cfg) {
  if (px.x < 0 || px.x >= cfg.w || px.y < 0 || px.y >= cfg.h) {
    throw OutOfRangeError("pixel (" + std::to_string(px.x) + ", " + std::to_string(px.y) +
                          ") outside the image");
  }
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw InvalidArgument("unproject needs a positive finite depth");
  }
  const double phi = kPi * (1.0 - 2.0 * (px.x + 0.5) / cfg.w);
  const double theta =
      (1.0 - (px.y + 0.5) / cfg.h) * cfg.fov_total_rad() - std::abs(cfg.fov_down_rad());
  return depth * Eigen::Vector3d(std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi),
                                 std::sin(theta));
}

SensorPose pose_on_road(const Centerline& centerline, double s, double d) {
  const Vec2 p = centerline.to_global({s, d});
  return {p.x(), p.y(), centerline.heading(s)};
}

std::vector<FeatureAnchor> activation_to_features(const ActivationMap& act,
                                                  const RangeImage& img, const LidarConfig& cfg,
                                                  const Centerline& centerline,
                                                  const SensorPose& pose,
                                                  const ClusterSettings& cluster) {
  cfg.validate();
  act.validate();
  if (act.w != img.w || act.h != img.h || img.w != cfg.w || img.h != cfg.h ||
      img.depth.size() != act.values.size() || img.valid.size() != act.values.size()) {
    throw ShapeError("activation map, range image and lidar config dimensions differ");
  }
  if (!(cluster.threshold > 0.0 && cluster.threshold <= 1.0) || !(cluster.cell > 0.0)) {
    throw InvalidArgument("cluster threshold must be in (0, 1] and cell positive");
  }
  const double peak = *std::max_element(act.values.begin(), act.values.end());
  if (!(peak > 0.0)) return {};
  const double cut = cluster.threshold * peak;

  struct Hit {
    double s, d, a;
  };
  std::vector<Hit> hits;
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      const std::size_t i = img.index(x, y);
      if (!img.valid[i] || act.values[i] < cut) continue;
      const Eigen::Vector3d p = unproject({x, y}, img.depth[i], cfg);
      const Vec2 g = Vec2(pose.x, pose.y) + rotate(p.head<2>(), pose.yaw);
      try {
        const FrenetPose f = centerline.to_frenet(g);
        hits.push_back({f.s, f.d, act.values[i]});
      } catch (const OutOfRangeError&) {
        // Returns off the mapped road cannot serve as anchors.
      }
    }
  }

  // Union-find over occupied cells with 8-neighbour adjacency.
  using Cell = std::pair<long, long>;
  std::map<Cell, std::size_t> cell_id;
  std::vector<std::size_t> hit_cell(hits.size());
  for (std::size_t k = 0; k < hits.size(); ++k) {
    const Cell c{static_cast<long>(std::floor(hits[k].s / cluster.cell)),
                 static_cast<long>(std::floor(hits[k].d / cluster.cell))};
    const auto [it, fresh] = cell_id.try_emplace(c, cell_id.size());
    hit_cell[k] = it->second;
  }
  std::vector<std::size_t> parent(cell_id.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& [c, id] : cell_id) {
    for (long ds = -1; ds <= 1; ++ds) {
      for (long dd = -1; dd <= 1; ++dd) {
        const auto nb = cell_id.find({c.first + ds, c.second + dd});
        if (nb != cell_id.end()) parent[find(id)] = find(nb->second);
      }
    }
  }

  std::map<std::size_t, std::pair<std::size_t, Eigen::Vector3d>> sums;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    auto& [n, acc] = sums[find(hit_cell[k])];
    if (n == 0) acc.setZero();
    ++n;
    acc += Eigen::Vector3d(hits[k].s, hits[k].d, hits[k].a);
  }
  std::vector<FeatureAnchor> out;
  out.reserve(sums.size());
  for (const auto& [root, v] : sums) {
    const Eigen::Vector3d m = v.second / static_cast<double>(v.first);
    out.push_back({m.x(), m.y(), m.z()});
  }
  std::sort(out.begin(), out.end(), [](const FeatureAnchor& a, const FeatureAnchor& b) {
    return a.s != b.s ? a.s < b.s : a.d < b.d;
  });
  return out;
}

PointCloud synth_cloud(const Scene& scene, const SensorPose& pose, const LidarConfig& cfg) {
  cfg.validate();
  std::vector<PlacedStructure> placed;
  for (const Structure& st : scene.lidar_structures()) {
    const Vec2 g = scene.centerline.to_global({st.s, st.d});
    const Eigen::Vector2d c = rotate(g - Vec2(pose.x, pose.y), -pose.yaw);
    const double reach = st.kind == Structure::Kind::kCylinder
                             ? st.radius
                             : std::hypot(st.half_length, st.half_width);
    if (c.norm() - reach > cfg.max_range) continue;
    placed.push_back({st.kind, c, scene.centerline.heading(st.s) - pose.yaw, st});
  }
  PointCloud cloud;
  if (placed.empty()) return cloud;

  const Eigen::Vector3d origin(0.0, 0.0, cfg.sensor_height);
  for (int y = 0; y < cfg.h; ++y) {
    for (int x = 0; x < cfg.w; ++x) {
      const Eigen::Vector3d u = unproject({x, y}, 1.0, cfg);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : placed) {
        double t;
        if (p.kind == Structure::Kind::kCylinder) {
          t = hit_cylinder(origin, u, p.center, p.src.radius, p.src.height);
        } else {
          const Eigen::Vector2d o2 = rotate(-p.center, -p.yaw);
          const Eigen::Vector2d u2 = rotate(u.head<2>(), -p.yaw);
          t = hit_box({o2.x(), o2.y(), origin.z()}, {u2.x(), u2.y(), u.z()}, p.src.half_length,
                      p.src.half_width, p.src.height);
        }
        best = std::min(best, t);
      }
      if (best <= cfg.max_range) cloud.points.push_back(best * u);
    }
  }
  return cloud;
}

}  // namespace driftplan
