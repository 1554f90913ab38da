// Copyright 2026 The RideGym Authors
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

// ridegym: experiment runner.
//
//   ridegym run --scene 3 --method fca-rl,pdm-s --seeds 5 --out out/
//   ridegym train --scene 3 --target beta --seed 1 --out ckpt/
//   ridegym train-rl --scene 3 --episodes 200 --seed 1 --window 24 --out rl/
//   ridegym sweep --scene 3 --windows 1,6,12,24 --seeds 5 --out sweep/

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ridegym/bench.h"

#ifndef RIDEGYM_SCENES_DIR
#define RIDEGYM_SCENES_DIR "scenes"
#endif

namespace {

using namespace ridegym;

// "3" -> <scenes-dir>/scene3.json; anything else is a path.
ScenarioConfig ResolveScene(const std::string& scene,
                            const std::string& scenes_dir) {
  const bool numeric =
      !scene.empty() && scene.find_first_not_of("0123456789") == std::string::npos;
  const std::string path =
      numeric ? (std::filesystem::path(scenes_dir) / ("scene" + scene + ".json"))
                    .string()
              : scene;
  return LoadScenario(path);
}

bench::ExperimentConfig ResolveConfig(const std::string& path) {
  return path.empty() ? bench::ExperimentConfigFromJson(nlohmann::json::object())
                      : bench::LoadExperimentConfig(path);
}

std::vector<uint64_t> SeedRange(int count) {
  if (count < 1) throw ArgumentError("--seeds must be >= 1");
  std::vector<uint64_t> seeds(count);
  std::iota(seeds.begin(), seeds.end(), uint64_t{1});
  return seeds;
}

struct Common {
  std::string scenes_dir = RIDEGYM_SCENES_DIR;
  std::string config;
};

void AddCommon(CLI::App* app, Common& c) {
  app->add_option("--scenes-dir", c.scenes_dir,
                  "Directory holding scene<N>.json");
  app->add_option("--config", c.config, "Experiment config JSON");
}

int Run(const Common& common, const std::vector<std::string>& scene_args,
        const std::vector<std::string>& method_args, int num_seeds,
        const std::string& out, const std::string& checkpoints) {
  const bench::ExperimentConfig config = ResolveConfig(common.config);
  std::vector<ScenarioConfig> scenes;
  for (const std::string& s : scene_args) {
    scenes.push_back(ResolveScene(s, common.scenes_dir));
  }
  std::vector<bench::Method> methods;
  for (const std::string& m : method_args) {
    methods.push_back(bench::ParseMethod(m));
  }
  const bench::ExperimentResult result = bench::RunExperiment(
      scenes, methods, SeedRange(num_seeds), config, checkpoints);
  bench::WriteExperiment(out, result);
  bench::WriteSummaryCsv(std::cout, bench::Summarize(result.runs));
  for (const bench::CellFailure& f : result.failures) {
    std::cerr << "failed: " << f.method << " " << f.scene << " seed " << f.seed
              << ": " << f.message << '\n';
  }
  return result.failures.empty() ? 0 : 1;
}

int Train(const Common& common, const std::string& scene_arg,
          const std::string& target_arg, uint64_t seed,
          const std::string& out) {
  const ScenarioConfig scene = ResolveScene(scene_arg, common.scenes_dir);
  const bench::ExperimentConfig config = ResolveConfig(common.config);
  const est::Target target = est::ParseTarget(target_arg);
  std::filesystem::create_directories(out);
  const std::string path =
      (std::filesystem::path(out) /
       bench::EstimatorCheckpointName(scene.name, seed, target))
          .string();
  nn::SaveCheckpoint(path, bench::TrainEstimator(scene, config, seed, target));
  std::cout << path << '\n';
  return 0;
}

int TrainRl(const Common& common, const std::string& scene_arg, int episodes,
            uint64_t seed, int window, bool no_fca, const std::string& out,
            const std::string& checkpoints) {
  const ScenarioConfig scene = ResolveScene(scene_arg, common.scenes_dir);
  bench::ExperimentConfig config = ResolveConfig(common.config);
  config.rl_episodes = episodes;
  if (window > 0) config.window = window;
  const bench::Method method =
      no_fca ? bench::Method::kRlNoFca : bench::Method::kFcaRl;
  const bench::SceneModels models =
      bench::PrepareScene(scene, config, seed, checkpoints);

  std::filesystem::create_directories(out);
  const std::filesystem::path dir(out);
  const std::filesystem::path curve_path = dir / "curve.csv";
  const bool fresh = !std::filesystem::exists(curve_path);
  std::ofstream curve(curve_path, std::ios::app);
  if (fresh) rla::WriteCurveCsvHeader(curve);
  auto save = [&](const rla::Agent& agent, const std::string& tag) {
    nn::SaveCheckpoint((dir / bench::AgentCheckpointName(
                                  scene.name, seed, method, config.window, tag))
                           .string(),
                       agent.ToCheckpoint());
  };
  const bench::RlTraining trained = bench::TrainController(
      method, scene, models, config, seed, config.window,
      [&](const rla::EpisodeStats& stats, const rla::Agent& agent) {
        rla::WriteCurveCsvRow(curve, stats);
        curve.flush();
        if (stats.episode % 50 == 0) {
          save(agent, "ep" + std::to_string(stats.episode));
        }
      });
  save(*trained.agent, "final");

  const bench::MethodRun run = bench::RunMethod(
      method, scene, models, config, seed, trained.agent.get(), config.window);
  bench::WriteReportCsv(std::cout, {run});
  return 0;
}

int Sweep(const Common& common, const std::string& scene_arg,
          const std::vector<int>& windows, int num_seeds,
          const std::string& out) {
  const ScenarioConfig scene = ResolveScene(scene_arg, common.scenes_dir);
  const bench::ExperimentConfig config = ResolveConfig(common.config);
  const bench::ExperimentResult result =
      bench::RunWindowSweep(scene, windows, SeedRange(num_seeds), config);
  bench::WriteExperiment(out, result);
  bench::WriteSummaryCsv(std::cout, bench::Summarize(result.runs));
  return result.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RideGym coupon-allocation experiments"};
  app.require_subcommand(1);

  Common run_common;
  std::vector<std::string> run_scenes;
  std::vector<std::string> run_methods;
  int run_seeds = 5;
  std::string run_out = "out";
  std::string run_checkpoints;
  CLI::App* run = app.add_subcommand("run", "Evaluate methods on scenes");
  AddCommon(run, run_common);
  run->add_option("--scene", run_scenes, "Scene number or JSON path")
      ->required()
      ->delimiter(',');
  run->add_option("--method", run_methods,
                  "opt, pdm-a, pdm-s, fca-rl, rl-nofca")
      ->required()
      ->delimiter(',');
  run->add_option("--seeds", run_seeds, "Seeds 1..K")->check(CLI::PositiveNumber);
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--checkpoints", run_checkpoints,
                  "Load estimator and agent checkpoints instead of training");

  Common train_common;
  std::string train_scene;
  std::string train_target;
  uint64_t train_seed = 1;
  std::string train_out = "checkpoints";
  CLI::App* train = app.add_subcommand("train", "Train one estimator");
  AddCommon(train, train_common);
  train->add_option("--scene", train_scene)->required();
  train->add_option("--target", train_target, "w, f_in, z or beta")->required();
  train->add_option("--seed", train_seed);
  train->add_option("--out", train_out);

  Common rl_common;
  std::string rl_scene;
  int rl_episodes = 200;
  uint64_t rl_seed = 1;
  int rl_window = 0;
  bool rl_no_fca = false;
  std::string rl_out = "rl";
  std::string rl_checkpoints;
  CLI::App* train_rl = app.add_subcommand("train-rl", "Train a controller");
  AddCommon(train_rl, rl_common);
  train_rl->add_option("--scene", rl_scene)->required();
  train_rl->add_option("--episodes", rl_episodes)->check(CLI::NonNegativeNumber);
  train_rl->add_option("--seed", rl_seed);
  train_rl->add_option("--window", rl_window, "Tracker window (slots)")
      ->check(CLI::PositiveNumber);
  train_rl->add_flag("--no-fca", rl_no_fca, "Freeze the tracker at its priors");
  train_rl->add_option("--out", rl_out);
  train_rl->add_option("--checkpoints", rl_checkpoints,
                       "Load estimators instead of training");

  Common sweep_common;
  std::string sweep_scene;
  std::vector<int> sweep_windows = {1, 6, 12, 24};
  int sweep_seeds = 5;
  std::string sweep_out = "sweep";
  CLI::App* sweep = app.add_subcommand("sweep", "Tracker window sweep");
  AddCommon(sweep, sweep_common);
  sweep->add_option("--scene", sweep_scene)->required();
  sweep->add_option("--windows", sweep_windows)->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds)->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) {
      return Run(run_common, run_scenes, run_methods, run_seeds, run_out,
                 run_checkpoints);
    }
    if (*train) {
      return Train(train_common, train_scene, train_target, train_seed,
                   train_out);
    }
    if (*train_rl) {
      return TrainRl(rl_common, rl_scene, rl_episodes, rl_seed, rl_window,
                     rl_no_fca, rl_out, rl_checkpoints);
    }
    if (*sweep) {
      return Sweep(sweep_common, sweep_scene, sweep_windows, sweep_seeds,
                   sweep_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "ridegym: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
