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

#include "driftplan/frenet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "driftplan/errors.hpp"

namespace driftplan {
namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

Vec2 left_normal(const Vec2& t) { return Vec2(-t.y(), t.x()); }

}  // namespace

Centerline::Centerline(std::vector<Vec2> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2) {
    throw InvalidArgument("centerline needs at least two waypoints");
  }
  arc_lengths_.reserve(waypoints_.size());
  arc_lengths_.push_back(0.0);
  std::vector<Vec2> seg_normals;
  seg_normals.reserve(waypoints_.size() - 1);
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    const Vec2 e = waypoints_[i] - waypoints_[i - 1];
    const double len = e.norm();
    if (!(len > 0.0) || !std::isfinite(len)) {
      throw InvalidArgument("centerline waypoints " + std::to_string(i - 1) + " and " +
                            std::to_string(i) + " coincide");
    }
    arc_lengths_.push_back(arc_lengths_.back() + len);
    seg_normals.push_back(left_normal(e / len));
  }
  vertex_normals_.resize(waypoints_.size());
  vertex_normals_.front() = seg_normals.front();
  vertex_normals_.back() = seg_normals.back();
  for (std::size_t i = 1; i + 1 < waypoints_.size(); ++i) {
    const Vec2 bisector = seg_normals[i - 1] + seg_normals[i];
    const double n = bisector.norm();
    if (n < 1e-9) {
      throw InvalidArgument("centerline reverses direction at waypoint " + std::to_string(i));
    }
    vertex_normals_[i] = bisector / n;
  }
}

Centerline Centerline::straight(double length, Vec2 origin, double heading) {
  if (!(length > 0.0)) throw InvalidArgument("straight centerline length must be positive");
  const Vec2 dir(std::cos(heading), std::sin(heading));
  return Centerline({origin, origin + length * dir});
}

Centerline Centerline::arc(double radius, double sweep, int segments, Vec2 origin,
                           double heading) {
  if (!(radius > 0.0) || !(sweep > 0.0) || segments < 1) {
    throw InvalidArgument("arc centerline needs radius > 0, sweep > 0 and segments >= 1");
  }
  // Center sits to the left of the initial heading.
  const Vec2 center = origin + radius * Vec2(-std::sin(heading), std::cos(heading));
  const double start_angle = heading - std::numbers::pi / 2.0;
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(segments) + 1);
  for (int k = 0; k <= segments; ++k) {
    const double a = start_angle + sweep * static_cast<double>(k) / segments;
    pts.emplace_back(center + radius * Vec2(std::cos(a), std::sin(a)));
  }
  return Centerline(std::move(pts));
}

std::size_t Centerline::segment_for(double s) const {
  const auto it = std::upper_bound(arc_lengths_.begin(), arc_lengths_.end(), s);
  const auto idx = static_cast<std::size_t>(std::distance(arc_lengths_.begin(), it));
  return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, waypoints_.size() - 2);
}

Vec2 Centerline::normal_at(std::size_t seg, double u) const {
  const Vec2 n = (1.0 - u) * vertex_normals_[seg] + u * vertex_normals_[seg + 1];
  return n.normalized();
}

FrenetPose Centerline::to_frenet(const Vec2& p) const {
  constexpr double kTol = 1e-12;
  FrenetPose best;
  double best_abs_d = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
    const Vec2 e = waypoints_[i + 1] - waypoints_[i];
    const Vec2 q = p - waypoints_[i];
    const Vec2& n0 = vertex_normals_[i];
    const Vec2 m = vertex_normals_[i + 1] - n0;
    // cross(n(u), q - u e) = 0 with n(u) = n0 + u m.
    const double a = -cross(m, e);
    const double b = cross(m, q) - cross(n0, e);
    const double c = cross(n0, q);

    double roots[2];
    int count = 0;
    if (std::abs(a) < 1e-14 * std::max(1.0, std::abs(b))) {
      if (b != 0.0) roots[count++] = -c / b;
    } else {
      const double disc = b * b - 4.0 * a * c;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        // Numerically stable pair.
        const double t = -0.5 * (b + std::copysign(sq, b));
        if (t != 0.0) roots[count++] = c / t;
        roots[count++] = t / a;
      }
    }
    for (int k = 0; k < count; ++k) {
      double u = roots[k];
      if (!(u >= -kTol && u <= 1.0 + kTol)) continue;
      u = std::clamp(u, 0.0, 1.0);
      const double d = (q - u * e).dot(normal_at(i, u));
      if (std::abs(d) < best_abs_d) {
        best_abs_d = std::abs(d);
        best.s = arc_lengths_[i] + u * (arc_lengths_[i + 1] - arc_lengths_[i]);
        best.d = d;
      }
    }
  }
  if (!std::isfinite(best_abs_d)) {
    throw OutOfRangeError("point does not project onto the centerline extent");
  }
  if (best_abs_d > kLateralCaptureBand) {
    throw OutOfRangeError("point lies outside the lateral capture band of the centerline");
  }
  return best;
}

Vec2 Centerline::to_global(const FrenetPose& fp) const {
  if (!(fp.s >= 0.0 && fp.s <= length())) {
    throw OutOfRangeError("arc length " + std::to_string(fp.s) + " outside [0, " +
                          std::to_string(length()) + "]");
  }
  const std::size_t i = segment_for(fp.s);
  const double len = arc_lengths_[i + 1] - arc_lengths_[i];
  const double u = std::clamp((fp.s - arc_lengths_[i]) / len, 0.0, 1.0);
  const Vec2 base = waypoints_[i] + u * (waypoints_[i + 1] - waypoints_[i]);
  return base + fp.d * normal_at(i, u);
}

Vec2 Centerline::tangent(double s) const {
  const std::size_t i = segment_for(std::clamp(s, 0.0, length()));
  return (waypoints_[i + 1] - waypoints_[i]).normalized();
}

double Centerline::heading(double s) const {
  const Vec2 t = tangent(s);
  return std::atan2(t.y(), t.x());
}

std::vector<double> curvature(std::span<const double> xs, std::span<const double> ys,
                              std::span<const double> dxs, std::span<const double> dys,
                              std::span<const double> ddxs, std::span<const double> ddys) {
  const std::size_t n = xs.size();
  if (ys.size() != n || dxs.size() != n || dys.size() != n || ddxs.size() != n ||
      ddys.size() != n) {
    throw ShapeError("curvature: position and derivative series differ in length");
  }
  std::vector<double> kappa(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double v2 = dxs[t] * dxs[t] + dys[t] * dys[t];
    if (!(v2 > kCurvatureSpeedFloor)) {
      throw SingularCurvatureError(t, "curvature undefined at step " + std::to_string(t) +
                                          ": speed is numerically zero");
    }
    kappa[t] = (dxs[t] * ddys[t] - dys[t] * ddxs[t]) / (v2 * std::sqrt(v2));
  }
  return kappa;
}

bool heading_within_assumption(double dx, double dy, double limit) {
  if (dx == 0.0 && dy == 0.0) return true;
  return std::abs(std::atan2(dy, dx)) <= limit;
}

}  // namespace driftplan
