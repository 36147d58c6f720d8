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

#ifndef DRIFTPLAN_LIDAR_HPP_
#define DRIFTPLAN_LIDAR_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "driftplan/frenet.hpp"
#include "driftplan/scene.hpp"

namespace driftplan {

/// Rotating multi-beam LIDAR. Angles in degrees.
struct LidarConfig {
  int w = 1800;
  int h = 16;
  double fov_up = 15.0;
  double fov_down = -15.0;
  double max_range = 100.0;
  /// Sensor height above the road surface, used by synth_cloud.
  double sensor_height = 1.8;

  void validate() const;
  double fov_up_rad() const;
  double fov_down_rad() const;
  double fov_total_rad() const;
};

struct PointCloud {
  std::vector<Eigen::Vector3d> points;  // sensor frame
};

/// Depth per pixel, row-major with h rows of w columns. Invalid pixels hold 0.
struct RangeImage {
  int w = 0;
  int h = 0;
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;

  RangeImage() = default;
  RangeImage(int w, int h);
  std::size_t index(int x, int y) const;
  std::size_t valid_count() const;
};

struct ActivationMap {
  int w = 0;
  int h = 0;
  std::vector<double> values;

  ActivationMap() = default;
  ActivationMap(int w, int h, double fill = 0.0);
  std::size_t index(int x, int y) const;
  /// Throws ShapeError on a size mismatch, InvalidArgument outside [0, 1].
  void validate() const;
};

struct Spherical {
  double r = 0.0;
  double phi = 0.0;    // azimuth in (-pi, pi]
  double theta = 0.0;  // elevation
};

struct Pixel {
  int x = 0;
  int y = 0;
  bool operator==(const Pixel&) const = default;
};

/// Throws InvalidArgument for the origin.
Spherical spherical_decompose(const Eigen::Vector3d& p);

/// Column and row for a direction, clamped to the image.
Pixel pixel_of(double phi, double theta, const LidarConfig& cfg);

struct ProjectionStats {
  std::size_t projected = 0;
  /// Points outside the vertical field of view.
  std::size_t dropped = 0;
};

/// The nearest return wins when several points share a pixel. Throws
/// InvalidArgument on an empty cloud.
RangeImage project(const PointCloud& cloud, const LidarConfig& cfg,
                   ProjectionStats* stats = nullptr);

/// Point at the pixel center direction. Throws OutOfRangeError for a pixel
/// outside the image and InvalidArgument for a non-positive depth.
Eigen::Vector3d unproject(Pixel px, double depth, const LidarConfig& cfg);

/// Sensor pose in the global frame.
struct SensorPose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

/// Sensor pose for an ego at road coordinates (s, d), facing along the road.
SensorPose pose_on_road(const Centerline& centerline, double s, double d);

struct ClusterSettings {
  /// Fraction of the maximum activation a pixel must reach.
  double threshold = 0.6;
  /// Grid cell in (s, d), metres.
  double cell = 2.0;
};

/// Hot pixels with valid depth are unprojected, moved into the global frame
/// and then to road coordinates, and grouped by connected grid cells. Each
/// group yields one anchor at its mean (s, d) with the mean activation as
/// weight. Sorted by s, then d.
std::vector<FeatureAnchor> activation_to_features(const ActivationMap& act,
                                                  const RangeImage& img, const LidarConfig& cfg,
                                                  const Centerline& centerline,
                                                  const SensorPose& pose,
                                                  const ClusterSettings& cluster = {});

/// One beam per pixel center, cast against the scene's structures (cylinders
/// and boxes standing on the road surface). Beams that hit nothing within
/// max_range produce no point.
PointCloud synth_cloud(const Scene& scene, const SensorPose& pose, const LidarConfig& cfg);

}  // namespace driftplan

#endif  // DRIFTPLAN_LIDAR_HPP_
