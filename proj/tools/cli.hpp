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

#ifndef DRIFTPLAN_TOOLS_CLI_HPP_
#define DRIFTPLAN_TOOLS_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "driftplan/lidar.hpp"
#include "driftplan/planner.hpp"
#include "driftplan/scene.hpp"
#include "driftplan/simulator.hpp"

namespace driftplan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitPlanningFailure = 3;

/// Feature source value that selects the scene's own feature list.
inline constexpr const char* kSceneTruth = "scene-truth";

struct RunConfig {
  std::filesystem::path scene;
  /// cem-mpc, baseline or single-init.
  std::string controller = "cem-mpc";
  /// kSceneTruth or a feature CSV path.
  std::string features = kSceneTruth;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  /// key=value pairs, see apply_override.
  std::vector<std::string> overrides;
  /// Trajectory samples per plan.
  std::optional<int> horizon;
  std::optional<int> n_samples;
};

/// Everything a run needs after files are read and overrides applied.
struct ResolvedRun {
  Scene scene;
  std::vector<FeatureAnchor> features;
  PlannerConfig planner;
  EpisodeSettings episode;
  std::vector<std::string> warnings;
};

/// Keys: cem.{n_samples,n_elite,n_noise,cem_iters,noise_scale,init_scale,
/// sample_longitudinal}, meta.{w_curv,w_road}, drift.{delta_min,delta_max,
/// kernel_sigma,visibility_range}, solver.{max_iterations,tolerance,
/// step_tolerance,penalty_init,penalty_growth,penalty_shrink,threads},
/// weights.{acc,feat,vel}, planner.{feature_gate,warm_start},
/// sim.{execute_steps,max_steps}. Throws InvalidArgument otherwise.
void apply_override(ResolvedRun& run, const std::string& key_value);

ResolvedRun resolve(const RunConfig& cfg);

std::unique_ptr<Controller> make_controller(const std::string& name, const ResolvedRun& run);

struct LatencyStats {
  int plans = 0;
  double mean_s = 0.0;
  double median_s = 0.0;
  double p95_s = 0.0;
  double max_s = 0.0;
};

LatencyStats latency_stats(std::vector<double> seconds);

struct RunOutcome {
  SimLog log;
  EpisodeMetrics metrics;
  std::vector<double> plan_seconds;
  bool planning_failed = false;
  std::string error;
  std::vector<std::string> warnings;
};

/// Runs one episode and writes simlog.csv, trajectories.csv, metrics.json and
/// latency.json into cfg.out. A planning failure stops the episode; the
/// partial log is still written and planning_failed is set.
RunOutcome run_scenario(const RunConfig& cfg);

/// Deterministic metrics document (no timing).
std::string metrics_json(const RunOutcome& outcome, const ResolvedRun& run,
                         const RunConfig& cfg);

struct CompareRow {
  std::string controller;
  double ape_proxy = 0.0;
  double drl_ratio = 0.0;
  /// Percent drift reduction relative to the first row.
  double drift_reduction_pct = 0.0;
  bool collided = false;
  bool planning_failed = false;
};

/// Runs every config (outputs in <out>/<index>-<controller>) and tabulates
/// them in config order. Throws InvalidArgument with fewer than two configs
/// or when the configs do not share a scene.
std::vector<CompareRow> compare(const std::vector<RunConfig>& configs);
void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& os);

struct DatasetConfig {
  std::vector<std::filesystem::path> scenes;
  std::vector<double> offsets;
  int poses = 20;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  LidarConfig lidar;
  DriftModel drift;
};

struct DatasetEntry {
  std::string file;
  int scene_id = 0;
  int pose_id = 0;
  double s = 0.0;
  double lateral_offset = 0.0;
  double drift_label = 0.0;
};

/// One range image per scene x pose x offset plus index.csv. Poses are spread
/// over each scene's run with a seeded jitter. Throws InvalidArgument with
/// fewer than three offsets.
std::vector<DatasetEntry> gen_dataset(const DatasetConfig& cfg);

struct ExtractConfig {
  std::filesystem::path scene;
  std::filesystem::path activation;
  std::filesystem::path range;
  double pose_s = 0.0;
  double pose_d = 0.0;
  LidarConfig lidar;
  ClusterSettings cluster;
  std::filesystem::path out;
};

std::vector<FeatureAnchor> extract_features(const ExtractConfig& cfg);

void write_dtl_fixture(int n_random, std::uint64_t seed, const std::filesystem::path& out);

}  // namespace driftplan::cli

#endif  // DRIFTPLAN_TOOLS_CLI_HPP_
