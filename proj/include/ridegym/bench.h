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

// Experiment harness. For one (scene, seed) cell:
//   1. a stationary pretrain split is logged under random coupons and the
//      estimators, feature clusters and tracker priors are fit on it;
//   2. a train split fixes the static multipliers of the baselines and the
//      reference multiplier of the learned controllers;
//   3. learned controllers train on fresh episodes of the scene;
//   4. every method runs on the same test split and is scored against the
//      test split's hindsight optimum and a paired no-coupon run.

#ifndef RIDEGYM_BENCH_H_
#define RIDEGYM_BENCH_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ridegym/estimators.h"
#include "ridegym/fca.h"
#include "ridegym/metrics.h"
#include "ridegym/rla.h"
#include "ridegym/scenario.h"

namespace ridegym::bench {

enum class Method { kOpt, kPdmA, kPdmS, kFcaRl, kRlNoFca };

// "opt", "pdm-a", "pdm-s", "fca-rl", "rl-nofca".
Method ParseMethod(const std::string& name);
std::string MethodName(Method method);
bool IsLearned(Method method);

struct ExperimentConfig {
  std::vector<double> coupons = {0.0, 0.05, 0.10, 0.15, 0.20};
  double target_rate = 0.05;
  int num_clusters = fca::kDefaultClusters;
  int window = fca::kDefaultWindow;
  int rl_episodes = 200;
  // Beta predictor concentration; <= 0 means num_rsps + 1.
  double prior_concentration = 0.0;
  // The test split starts from the competitor prices the train split ended
  // with; learned controllers train on episodes after an equal burn-in.
  bool continuous_market = true;
  // Draw tracked in-range rates from their Beta posterior (else its mean).
  bool sample_in_range = false;
  // Reference lambda of the learned controllers: solved on the train split
  // with their own estimator (else with ground truth).
  bool own_estimator_reference = true;
  est::TrainConfig estimators;
  rla::RlConfig rl;
};

// Overrides from JSON keys: coupons, target_rate, num_clusters, window,
// rl_episodes, prior_concentration, estimators{...}, rl{...}.
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j,
                                          ExperimentConfig base = {});
ExperimentConfig LoadExperimentConfig(const std::string& path);

// Fitted backbone for one (scene, seed).
struct SceneModels {
  est::LogisticUpliftModel in_range;
  est::LogisticUpliftModel in_range_completion;
  est::LogisticUpliftModel completion;
  est::BetaParamModel beta;
  fca::FeatureClusterer clusterer;
  std::vector<Features> pretrain_features;
  rla::EpisodeReference train_reference;
  double lambda_pdm_a = 0.0;
  double lambda_pdm_s = 0.0;
  double lambda_learned = 0.0;
  // State scale for the learned controllers: train GMV per test episode.
  double gmv_scale = 1.0;
};

// Split seeds: pretrain ignores the change probability so scenes that differ
// only in it share pretrain data.
uint64_t PretrainSeed(const ScenarioConfig& scene, uint64_t seed);
uint64_t TrainSeed(const ScenarioConfig& scene, uint64_t seed);
uint64_t TestSeed(const ScenarioConfig& scene, uint64_t seed);
uint64_t RlSeed(const ScenarioConfig& scene, uint64_t seed);

Episode PretrainEpisode(const ScenarioConfig& scene, uint64_t seed);
Episode TrainEpisode(const ScenarioConfig& scene, uint64_t seed);
Episode TestEpisode(const ScenarioConfig& scene, uint64_t seed,
                    const ExperimentConfig& config);
std::vector<LoggedOrder> PretrainLog(const ScenarioConfig& scene,
                                     const ExperimentConfig& config,
                                     uint64_t seed);

// Trains one estimator on the pretrain log and returns it as a checkpoint.
nn::Checkpoint TrainEstimator(const ScenarioConfig& scene,
                              const ExperimentConfig& config, uint64_t seed,
                              est::Target target);

// Fits (or, with a directory, loads) estimators, then clusters and solves
// the train-split multipliers. Throws ConfigError when a checkpoint file is
// missing from `checkpoint_dir`.
SceneModels PrepareScene(const ScenarioConfig& scene,
                         const ExperimentConfig& config, uint64_t seed,
                         const std::string& checkpoint_dir = "");

fca::BetaTracker InitialTracker(const SceneModels& models,
                                const ExperimentConfig& config, int window);

// Trains the learned controller for `method`. `on_episode` sees every
// episode's statistics.
struct RlTraining {
  std::unique_ptr<rla::Agent> agent;
  std::vector<rla::EpisodeStats> curve;
};
RlTraining TrainController(
    Method method, const ScenarioConfig& scene, const SceneModels& models,
    const ExperimentConfig& config, uint64_t seed, int window,
    const std::function<void(const rla::EpisodeStats&, const rla::Agent&)>&
        on_episode = {});

struct ReportRow {
  std::string method;
  std::string scene;
  uint64_t seed = 0;
  int window = 0;
  double cre = 0.0;
  Direction direction = Direction::kUnder;
  double froi = 0.0;  // NaN when no coupon was spent
  double rlr = 0.0;
  double completions = 0.0;
  double cost = 0.0;
  double gmv = 0.0;
};

struct MethodRun {
  ReportRow row;
  std::vector<rla::SlotTrace> trace;
};

// Evaluates one method on the test split. Learned methods need `agent`.
MethodRun RunMethod(Method method, const ScenarioConfig& scene,
                    const SceneModels& models, const ExperimentConfig& config,
                    uint64_t seed, const rla::Agent* agent = nullptr,
                    int window = -1, std::ostream* tracker_csv = nullptr);

struct CellFailure {
  std::string method;
  std::string scene;
  uint64_t seed = 0;
  std::string message;
};

struct ExperimentResult {
  std::vector<MethodRun> runs;
  std::vector<CellFailure> failures;
};

// Every scene x method x seed. Cells that throw are recorded as failures.
ExperimentResult RunExperiment(const std::vector<ScenarioConfig>& scenes,
                               const std::vector<Method>& methods,
                               const std::vector<uint64_t>& seeds,
                               const ExperimentConfig& config,
                               const std::string& checkpoint_dir = "");

// Window sweep for the tracked controller on one scene.
ExperimentResult RunWindowSweep(const ScenarioConfig& scene,
                                const std::vector<int>& windows,
                                const std::vector<uint64_t>& seeds,
                                const ExperimentConfig& config);

struct SummaryRow {
  std::string method;
  std::string scene;
  int window = 0;
  int seeds = 0;
  double cre_mean = 0.0, cre_sd = 0.0;
  double froi_mean = 0.0, froi_sd = 0.0;
  double rlr_mean = 0.0, rlr_sd = 0.0;
  int over = 0;  // seeds whose rate exceeded the target
};

// Mean and sample standard deviation per (method, scene, window).
std::vector<SummaryRow> Summarize(const std::vector<MethodRun>& runs);

void WriteReportCsv(std::ostream& out, const std::vector<MethodRun>& runs);
void WriteTraceCsv(std::ostream& out, const std::vector<rla::SlotTrace>& trace);
void WriteSummaryCsv(std::ostream& out, const std::vector<SummaryRow>& rows);
void WriteFailuresCsv(std::ostream& out,
                      const std::vector<CellFailure>& failures);

// report.csv, summary.csv, trace_<scene>_<method>_<seed>.csv and, if any,
// failures.csv under `dir`.
void WriteExperiment(const std::string& dir, const ExperimentResult& result);

std::string EstimatorCheckpointName(const std::string& scene, uint64_t seed,
                                    est::Target target);
std::string AgentCheckpointName(const std::string& scene, uint64_t seed,
                                Method method, int window,
                                const std::string& tag);

}  // namespace ridegym::bench

#endif  // RIDEGYM_BENCH_H_
