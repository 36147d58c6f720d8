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

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "driftplan/dtl_loss.hpp"
#include "driftplan/errors.hpp"
#include "driftplan/range_image_io.hpp"
#include "driftplan/scene_io.hpp"

namespace driftplan::cli {
namespace {

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) {
    throw InvalidArgument("override " + key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || out < std::numeric_limits<int>::min() ||
      out > std::numeric_limits<int>::max()) {
    throw InvalidArgument("override " + key + ": expected an integer, got '" + v + "'");
  }
  return static_cast<int>(out);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidArgument("override " + key + ": expected true or false, got '" + v + "'");
}

using Setter = std::function<void(ResolvedRun&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    auto num = [&m](const std::string& key, auto field) {
      m[key] = [field](ResolvedRun& r, const std::string& k, const std::string& v) {
        field(r) = parse_double(k, v);
      };
    };
    auto integer = [&m](const std::string& key, auto field) {
      m[key] = [field](ResolvedRun& r, const std::string& k, const std::string& v) {
        field(r) = parse_int(k, v);
      };
    };
    auto flag = [&m](const std::string& key, auto field) {
      m[key] = [field](ResolvedRun& r, const std::string& k, const std::string& v) {
        field(r) = parse_bool(k, v);
      };
    };
    integer("cem.n_samples", [](ResolvedRun& r) -> int& { return r.planner.cem.n_samples; });
    integer("cem.n_elite", [](ResolvedRun& r) -> int& { return r.planner.cem.n_elite; });
    integer("cem.n_noise", [](ResolvedRun& r) -> int& { return r.planner.cem.n_noise; });
    integer("cem.cem_iters", [](ResolvedRun& r) -> int& { return r.planner.cem.cem_iters; });
    num("cem.noise_scale", [](ResolvedRun& r) -> double& { return r.planner.cem.noise_scale; });
    num("cem.init_scale", [](ResolvedRun& r) -> double& { return r.planner.cem.init_scale; });
    flag("cem.sample_longitudinal",
         [](ResolvedRun& r) -> bool& { return r.planner.cem.sample_longitudinal; });
    num("meta.w_curv", [](ResolvedRun& r) -> double& { return r.planner.w_curv; });
    num("meta.w_road", [](ResolvedRun& r) -> double& { return r.planner.w_road; });
    num("drift.delta_min", [](ResolvedRun& r) -> double& { return r.episode.drift.delta_min; });
    num("drift.delta_max", [](ResolvedRun& r) -> double& { return r.episode.drift.delta_max; });
    num("drift.kernel_sigma",
        [](ResolvedRun& r) -> double& { return r.episode.drift.kernel_sigma; });
    num("drift.visibility_range",
        [](ResolvedRun& r) -> double& { return r.episode.drift.visibility_range; });
    integer("solver.max_iterations",
            [](ResolvedRun& r) -> int& { return r.planner.solver.max_iterations; });
    num("solver.tolerance", [](ResolvedRun& r) -> double& { return r.planner.solver.tolerance; });
    num("solver.step_tolerance",
        [](ResolvedRun& r) -> double& { return r.planner.solver.step_tolerance; });
    num("solver.penalty_init",
        [](ResolvedRun& r) -> double& { return r.planner.solver.penalty_init; });
    num("solver.penalty_growth",
        [](ResolvedRun& r) -> double& { return r.planner.solver.penalty_growth; });
    num("solver.penalty_shrink",
        [](ResolvedRun& r) -> double& { return r.planner.solver.penalty_shrink; });
    integer("solver.threads", [](ResolvedRun& r) -> int& { return r.planner.solver.threads; });
    num("weights.acc", [](ResolvedRun& r) -> double& { return r.planner.weights.acc; });
    num("weights.feat", [](ResolvedRun& r) -> double& { return r.planner.weights.feat; });
    num("weights.vel", [](ResolvedRun& r) -> double& { return r.planner.weights.vel; });
    num("planner.feature_gate",
        [](ResolvedRun& r) -> double& { return r.planner.feature_gate; });
    flag("planner.warm_start", [](ResolvedRun& r) -> bool& { return r.planner.warm_start; });
    integer("sim.execute_steps", [](ResolvedRun& r) -> int& { return r.episode.execute_steps; });
    integer("sim.max_steps", [](ResolvedRun& r) -> int& { return r.episode.max_steps; });
    return m;
  }();
  return table;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  return os;
}

// Times every plan and keeps the commands for the trajectory export.
class Recorder : public Controller {
 public:
  explicit Recorder(Controller& inner) : inner_(inner) {}
  std::string name() const override { return inner_.name(); }
  Command plan(const EgoState& ego, const Scene& scene) override {
    const auto t0 = std::chrono::steady_clock::now();
    Command c = inner_.plan(ego, scene);
    seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    starts.push_back(ego.t);
    commands.push_back(c);
    return c;
  }
  void on_executed(int k) override { inner_.on_executed(k); }

  std::vector<double> seconds;
  std::vector<double> starts;
  std::vector<Command> commands;

 private:
  Controller& inner_;
};

void write_trajectories_csv(const Recorder& rec, std::ostream& os) {
  std::ostringstream out;
  out.precision(10);
  out << "plan_id,k,t,x,y,dx,dy\n";
  for (std::size_t p = 0; p < rec.commands.size(); ++p) {
    const Command& c = rec.commands[p];
    for (Eigen::Index k = 0; k < c.samples.size(); ++k) {
      out << p << ',' << k << ',' << rec.starts[p] + static_cast<double>(k) * c.dt << ','
          << c.samples.x[k] << ',' << c.samples.y[k] << ',' << c.samples.dx[k] << ','
          << c.samples.dy[k] << '\n';
    }
  }
  os << out.str();
}

}  // namespace

void apply_override(ResolvedRun& run, const std::string& key_value) {
  const auto eq = key_value.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidArgument("override '" + key_value + "' is not key=value");
  }
  const std::string key = key_value.substr(0, eq);
  const auto it = setters().find(key);
  if (it == setters().end()) throw InvalidArgument("unknown override key '" + key + "'");
  it->second(run, key, key_value.substr(eq + 1));
}

ResolvedRun resolve(const RunConfig& cfg) {
  if (cfg.controller != "cem-mpc" && cfg.controller != "baseline" &&
      cfg.controller != "single-init") {
    throw InvalidArgument("unknown controller '" + cfg.controller +
                          "' (expected cem-mpc, baseline or single-init)");
  }
  ResolvedRun run;
  run.scene = load_scene(cfg.scene);
  if (cfg.features == kSceneTruth) {
    run.features = run.scene.features;
  } else {
    run.features = load_features_csv(cfg.features, &run.warnings);
  }
  run.planner.cem.seed = cfg.seed;
  if (cfg.horizon) run.planner.basis.n_steps = *cfg.horizon;
  if (cfg.n_samples) run.planner.cem.n_samples = *cfg.n_samples;
  for (const auto& kv : cfg.overrides) apply_override(run, kv);
  run.planner.basis.validate();
  run.planner.cem.validate();
  meta_params(run.scene, run.planner).validate();
  run.episode.drift.validate();
  if (run.episode.execute_steps < 1 || run.episode.execute_steps >= run.planner.basis.n_steps) {
    throw InvalidArgument("sim.execute_steps must be in [1, horizon - 1]");
  }
  return run;
}

std::unique_ptr<Controller> make_controller(const std::string& name, const ResolvedRun& run) {
  if (name == "cem-mpc") return std::make_unique<CemMpcPlanner>(run.planner, run.features);
  if (name == "single-init") return std::make_unique<SingleInitPlanner>(run.planner, run.features);
  if (name == "baseline") return std::make_unique<BaselineController>(run.planner);
  throw InvalidArgument("unknown controller '" + name + "'");
}

LatencyStats latency_stats(std::vector<double> s) {
  LatencyStats st;
  st.plans = static_cast<int>(s.size());
  if (s.empty()) return st;
  std::sort(s.begin(), s.end());
  double sum = 0.0;
  for (double v : s) sum += v;
  st.mean_s = sum / static_cast<double>(s.size());
  const std::size_t n = s.size();
  st.median_s = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
  st.p95_s = s[std::min(n - 1, static_cast<std::size_t>(std::ceil(0.95 * n)) - 1)];
  st.max_s = s.back();
  return st;
}

std::string metrics_json(const RunOutcome& o, const ResolvedRun& run, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["scene"] = run.scene.name;
  j["controller"] = cfg.controller;
  j["feature_source"] = cfg.features;
  j["seed"] = cfg.seed;
  j["ape_proxy"] = o.metrics.ape_proxy;
  j["drl_ratio"] = o.metrics.drl_ratio;
  j["collisions"] = o.log.collisions.size();
  j["reached_end"] = o.log.reached_end;
  j["planning_failed"] = o.planning_failed;
  j["steps"] = o.log.steps.size() - 1;
  j["plans"] = o.log.plans;
  j["heading_warnings"] = o.log.heading_warnings;
  const EgoState& last = o.log.steps.back().state;
  j["final"] = {{"s", last.x}, {"d", last.y}, {"t", last.t}};
  return j.dump(2) + "\n";
}

RunOutcome run_scenario(const RunConfig& cfg) {
  const ResolvedRun run = resolve(cfg);
  RunOutcome out;
  out.warnings = run.warnings;
  auto controller = make_controller(cfg.controller, run);
  Recorder rec(*controller);
  Episode ep(run.scene, run.episode);
  try {
    while (!ep.done()) {
      if (mpc_step(rec, ep, run.episode.execute_steps) == 0) break;
    }
  } catch (const PlanningFailure& e) {
    out.planning_failed = true;
    out.error = e.what();
  }
  out.log = ep.log();
  out.metrics = metrics(out.log, run.scene);
  out.plan_seconds = rec.seconds;

  std::filesystem::create_directories(cfg.out);
  {
    auto os = open_out(cfg.out / "simlog.csv");
    write_simlog_csv(out.log, os);
  }
  {
    auto os = open_out(cfg.out / "trajectories.csv");
    write_trajectories_csv(rec, os);
  }
  {
    auto os = open_out(cfg.out / "metrics.json");
    os << metrics_json(out, run, cfg);
  }
  {
    const LatencyStats st = latency_stats(out.plan_seconds);
    nlohmann::ordered_json j;
    j["plans"] = st.plans;
    j["mean_s"] = st.mean_s;
    j["median_s"] = st.median_s;
    j["p95_s"] = st.p95_s;
    j["max_s"] = st.max_s;
    auto os = open_out(cfg.out / "latency.json");
    os << j.dump(2) << "\n";
  }
  return out;
}

std::vector<CompareRow> compare(const std::vector<RunConfig>& configs) {
  if (configs.size() < 2) throw InvalidArgument("compare needs at least two configs");
  const std::string reference = scene_to_json(load_scene(configs.front().scene));
  for (std::size_t i = 1; i < configs.size(); ++i) {
    if (scene_to_json(load_scene(configs[i].scene)) != reference) {
      throw InvalidArgument("compare: config " + std::to_string(i) +
                            " uses a different scene than config 0");
    }
  }
  std::vector<CompareRow> rows;
  for (const auto& cfg : configs) {
    const RunOutcome o = run_scenario(cfg);
    CompareRow r;
    r.controller = cfg.controller;
    r.ape_proxy = o.metrics.ape_proxy;
    r.drl_ratio = o.metrics.drl_ratio;
    r.collided = !o.log.collisions.empty();
    r.planning_failed = o.planning_failed;
    rows.push_back(r);
  }
  const double ref = rows.front().ape_proxy;
  for (auto& r : rows) r.drift_reduction_pct = ref > 0.0 ? 100.0 * (ref - r.ape_proxy) / ref : 0.0;
  return rows;
}

void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& os) {
  std::ostringstream out;
  out.precision(10);
  out << "controller,ape_proxy,drl_ratio,drift_reduction_pct,collided,planning_failed\n";
  for (const auto& r : rows) {
    out << r.controller << ',' << r.ape_proxy << ',' << r.drl_ratio << ','
        << r.drift_reduction_pct << ',' << (r.collided ? 1 : 0) << ','
        << (r.planning_failed ? 1 : 0) << '\n';
  }
  os << out.str();
}

std::vector<DatasetEntry> gen_dataset(const DatasetConfig& cfg) {
  if (cfg.offsets.size() < 3) {
    throw InvalidArgument("gen-dataset needs at least three lateral offsets, got " +
                          std::to_string(cfg.offsets.size()));
  }
  if (cfg.poses < 1) throw InvalidArgument("gen-dataset needs at least one pose per scene");
  if (cfg.scenes.empty()) throw InvalidArgument("gen-dataset needs at least one scene");
  cfg.lidar.validate();
  cfg.drift.validate();
  std::filesystem::create_directories(cfg.out);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);
  std::vector<DatasetEntry> entries;
  for (std::size_t si = 0; si < cfg.scenes.size(); ++si) {
    const Scene scene = load_scene(cfg.scenes[si]);
    const double spacing = scene.run_length / cfg.poses;
    for (int p = 0; p < cfg.poses; ++p) {
      const double s = scene.start_s + spacing * (p + 0.5 + jitter(rng));
      for (std::size_t k = 0; k < cfg.offsets.size(); ++k) {
        const double d = cfg.offsets[k];
        const PointCloud cloud = synth_cloud(scene, pose_on_road(scene.centerline, s, d), cfg.lidar);
        const RangeImage img =
            cloud.points.empty() ? RangeImage(cfg.lidar.w, cfg.lidar.h) : project(cloud, cfg.lidar);
        std::ostringstream name;
        name << "s" << std::setw(2) << std::setfill('0') << si << "_p" << std::setw(3) << p
             << "_o" << k << ".rimg";
        save_range_image(cfg.out / name.str(), img);
        EgoState ego;
        ego.x = s;
        ego.y = d;
        ego.dx = scene.start_speed;
        entries.push_back({name.str(), static_cast<int>(si), p, s, d,
                           drift_increment(ego, scene, cfg.drift)});
      }
    }
  }
  auto os = open_out(cfg.out / "index.csv");
  std::ostringstream out;
  out.precision(17);
  out << "file,scene_id,pose_id,s,lateral_offset,drift_label\n";
  for (const auto& e : entries) {
    out << e.file << ',' << e.scene_id << ',' << e.pose_id << ',' << e.s << ','
        << e.lateral_offset << ',' << e.drift_label << '\n';
  }
  os << out.str();
  return entries;
}

std::vector<FeatureAnchor> extract_features(const ExtractConfig& cfg) {
  const Scene scene = load_scene(cfg.scene);
  const ActivationMap act = load_activation_map(cfg.activation);
  const RangeImage img = load_range_image(cfg.range);
  const auto anchors =
      activation_to_features(act, img, cfg.lidar, scene.centerline,
                             pose_on_road(scene.centerline, cfg.pose_s, cfg.pose_d), cfg.cluster);
  auto os = open_out(cfg.out);
  write_features_csv(anchors, os);
  return anchors;
}

void write_dtl_fixture(int n_random, std::uint64_t seed, const std::filesystem::path& out) {
  const auto rows = dtl_fixture(n_random, seed);
  auto os = open_out(out);
  write_dtl_fixture_csv(rows, os);
}

}  // namespace driftplan::cli
