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

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"
#include "driftplan/errors.hpp"

namespace cli = driftplan::cli;

namespace {

void add_run_flags(CLI::App* app, cli::RunConfig& cfg) {
  app->add_option("--features", cfg.features, "scene-truth or a feature CSV (s,d,weight)")
      ->capture_default_str();
  app->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app->add_option("--out", cfg.out, "output directory")->required();
  app->add_option("--override", cfg.overrides, "key=value, repeatable");
  app->add_option("--horizon", cfg.horizon, "trajectory samples per plan");
  app->add_option("--n-samples", cfg.n_samples, "CEM samples per cycle");
}

int report(const cli::RunOutcome& o, const std::filesystem::path& out) {
  for (const auto& w : o.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "ape_proxy " << o.metrics.ape_proxy << "  drl_ratio " << o.metrics.drl_ratio
            << "  collisions " << o.log.collisions.size() << "  plans " << o.log.plans
            << "  -> " << out.string() << "\n";
  if (o.planning_failed) {
    std::cerr << "error: planning failed: " << o.error << " (partial log written)\n";
    return cli::kExitPlanningFailure;
  }
  return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driftplan: drift-aware CEM-MPC planning on synthetic roads"};
  app.require_subcommand(1);

  cli::RunConfig run_cfg;
  auto* run = app.add_subcommand("run", "run one scenario and write logs and metrics");
  run->add_option("--scene", run_cfg.scene, "scene JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--controller", run_cfg.controller, "cem-mpc | baseline | single-init")
      ->capture_default_str();
  add_run_flags(run, run_cfg);

  cli::RunConfig cmp_cfg;
  std::vector<std::string> cmp_controllers;
  std::vector<std::filesystem::path> cmp_scenes;
  auto* cmp = app.add_subcommand("compare", "run several controllers and tabulate them");
  cmp->add_option("--scene", cmp_scenes, "scene JSON (once, or once per controller)")
      ->required()
      ->check(CLI::ExistingFile);
  cmp->add_option("--controller", cmp_controllers, "controllers in row order")->required();
  add_run_flags(cmp, cmp_cfg);

  cli::DatasetConfig ds_cfg;
  auto* ds = app.add_subcommand("gen-dataset", "synthesize range images with drift labels");
  ds->add_option("--scene", ds_cfg.scenes, "scene JSON, repeatable")
      ->required()
      ->check(CLI::ExistingFile);
  ds->add_option("--offsets", ds_cfg.offsets, "lateral offsets (m), at least three")
      ->required()
      ->delimiter(',');
  ds->add_option("--poses", ds_cfg.poses, "poses per scene")->capture_default_str();
  ds->add_option("--seed", ds_cfg.seed, "random seed")->capture_default_str();
  ds->add_option("--out", ds_cfg.out, "output directory")->required();

  cli::ExtractConfig ex_cfg;
  auto* ex = app.add_subcommand("extract-features", "turn an activation map into anchors");
  ex->add_option("--scene", ex_cfg.scene)->required()->check(CLI::ExistingFile);
  ex->add_option("--activation", ex_cfg.activation, "activation map file")
      ->required()
      ->check(CLI::ExistingFile);
  ex->add_option("--range", ex_cfg.range, "range image file")
      ->required()
      ->check(CLI::ExistingFile);
  ex->add_option("--pose-s", ex_cfg.pose_s, "sensor arc length (m)")->required();
  ex->add_option("--pose-d", ex_cfg.pose_d, "sensor lateral offset (m)")->capture_default_str();
  ex->add_option("--threshold", ex_cfg.cluster.threshold, "fraction of the peak activation")
      ->capture_default_str();
  ex->add_option("--cell", ex_cfg.cluster.cell, "cluster cell size (m)")->capture_default_str();
  ex->add_option("--out", ex_cfg.out, "feature CSV")->required();

  int fx_rows = 100;
  std::uint64_t fx_seed = 0;
  std::filesystem::path fx_out;
  auto* fx = app.add_subcommand("dtl-fixture", "write the loss parity fixture CSV");
  fx->add_option("--rows", fx_rows, "random rows after the fixed cases")->capture_default_str();
  fx->add_option("--seed", fx_seed)->capture_default_str();
  fx->add_option("--out", fx_out, "fixture CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return report(cli::run_scenario(run_cfg), run_cfg.out);

    if (*cmp) {
      if (cmp_scenes.size() != 1 && cmp_scenes.size() != cmp_controllers.size()) {
        throw driftplan::InvalidArgument("compare: give one --scene or one per --controller");
      }
      std::vector<cli::RunConfig> configs;
      for (std::size_t i = 0; i < cmp_controllers.size(); ++i) {
        cli::RunConfig c = cmp_cfg;
        c.controller = cmp_controllers[i];
        c.scene = cmp_scenes.size() == 1 ? cmp_scenes[0] : cmp_scenes[i];
        c.out = cmp_cfg.out / (std::to_string(i) + "-" + c.controller);
        configs.push_back(c);
      }
      const auto rows = cli::compare(configs);
      std::filesystem::create_directories(cmp_cfg.out);
      std::ofstream os(cmp_cfg.out / "compare.csv");
      cli::write_compare_csv(rows, os);
      cli::write_compare_csv(rows, std::cout);
      for (const auto& r : rows) {
        if (r.planning_failed) return cli::kExitPlanningFailure;
      }
      return cli::kExitOk;
    }

    if (*ds) {
      const auto entries = cli::gen_dataset(ds_cfg);
      std::cout << entries.size() << " samples indexed in " << (ds_cfg.out / "index.csv").string()
                << "\n";
      return cli::kExitOk;
    }

    if (*ex) {
      const auto anchors = cli::extract_features(ex_cfg);
      std::cout << anchors.size() << " anchors -> " << ex_cfg.out.string() << "\n";
      return cli::kExitOk;
    }

    if (*fx) {
      cli::write_dtl_fixture(fx_rows, fx_seed, fx_out);
      return cli::kExitOk;
    }
  } catch (const driftplan::PlanningFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitPlanningFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitError;
  }
  return cli::kExitOk;
}
