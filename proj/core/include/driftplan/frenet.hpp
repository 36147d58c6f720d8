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

#ifndef DRIFTPLAN_FRENET_HPP_
#define DRIFTPLAN_FRENET_HPP_

#include <span>
#include <vector>

#include <Eigen/Core>

namespace driftplan {

using Vec2 = Eigen::Vector2d;

/// Road-frame coordinates: arc length `s` along the centerline and signed
/// lateral offset `d` (left of the travel direction is positive).
struct FrenetPose {
  double s = 0.0;
  double d = 0.0;
};

/// Maximum |d| accepted by Centerline::to_frenet.
inline constexpr double kLateralCaptureBand = 50.0;

/// Piecewise-linear road centerline.
///
/// The lateral direction is interpolated between per-vertex normals (the
/// bisector of the adjacent segment normals), which makes the road frame a
/// continuous, invertible map around convex and concave vertices alike. On a
/// polyline sampled from a circle every vertex lies on the circle and its
/// normal is exactly radial, so offsets measured there are exact.
class Centerline {
 public:
  /// Throws InvalidArgument when fewer than two waypoints are given or two
  /// consecutive waypoints coincide.
  explicit Centerline(std::vector<Vec2> waypoints);

  static Centerline straight(double length, Vec2 origin = Vec2::Zero(), double heading = 0.0);
  /// Counter-clockwise arc (left turn) starting at `origin` heading along
  /// `heading`. `segments` chords approximate the circle.
  static Centerline arc(double radius, double sweep, int segments, Vec2 origin = Vec2::Zero(),
                        double heading = 0.0);

  const std::vector<Vec2>& waypoints() const noexcept { return waypoints_; }
  const std::vector<double>& arc_lengths() const noexcept { return arc_lengths_; }
  double length() const noexcept { return arc_lengths_.back(); }

  /// Throws OutOfRangeError when the point does not project onto the
  /// centerline extent or lies farther than kLateralCaptureBand from it.
  FrenetPose to_frenet(const Vec2& p) const;
  /// Throws OutOfRangeError when s is outside [0, length()].
  Vec2 to_global(const FrenetPose& fp) const;

  /// Unit tangent at arc length s.
  Vec2 tangent(double s) const;
  /// Heading (rad) of the centerline at arc length s.
  double heading(double s) const;

 private:
  std::size_t segment_for(double s) const;
  Vec2 normal_at(std::size_t seg, double u) const;

  std::vector<Vec2> waypoints_;
  std::vector<double> arc_lengths_;
  std::vector<Vec2> vertex_normals_;
};

inline FrenetPose global_to_frenet(const Vec2& p, const Centerline& c) { return c.to_frenet(p); }
inline Vec2 frenet_to_global(const FrenetPose& fp, const Centerline& c) { return c.to_global(fp); }

/// Minimum squared speed accepted by curvature().
inline constexpr double kCurvatureSpeedFloor = 1e-9;

/// Signed curvature (dx*ddy - dy*ddx) / (dx^2 + dy^2)^(3/2) per step.
/// Throws ShapeError on unequal lengths and SingularCurvatureError naming the
/// first step whose squared speed is at or below kCurvatureSpeedFloor.
std::vector<double> curvature(std::span<const double> xs, std::span<const double> ys,
                              std::span<const double> dxs, std::span<const double> dys,
                              std::span<const double> ddxs, std::span<const double> ddys);

/// Default bound on the ego heading relative to the centerline (rad) under
/// which axis-aligned ellipse footprints stay tight (about 13 degrees).
inline constexpr double kHeadingAssumption = 13.0 * 3.14159265358979323846 / 180.0;

/// True when the velocity (dx, dy), expressed in the road frame, points within
/// `limit` radians of the centerline direction. Diagnostic only.
bool heading_within_assumption(double dx, double dy, double limit = kHeadingAssumption);

}  // namespace driftplan

#endif  // DRIFTPLAN_FRENET_HPP_
