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

#include "ridegym/bench.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <tuple>

namespace ridegym::bench {
namespace {

constexpr uint64_t kStreamPretrain = 11;
constexpr uint64_t kStreamTrain = 12;
constexpr uint64_t kStreamTest = 13;
constexpr uint64_t kStreamRl = 14;
constexpr uint64_t kStreamLog = 15;
constexpr uint64_t kStreamFit = 16;
constexpr uint64_t kStreamCluster = 17;
constexpr uint64_t kStreamEval = 18;

// Scene identity for seeding; the change probability is deliberately left
// out so paired scenes share everything else.
uint64_t SceneKey(const ScenarioConfig& scene) { return scene.seed; }

double PriorConcentration(const ScenarioConfig& scene,
                          const ExperimentConfig& config) {
  return config.prior_concentration > 0.0 ? config.prior_concentration
                                          : scene.num_rsps + 1.0;
}

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

nn::Checkpoint LoadRequired(const std::string& dir, const std::string& name) {
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  if (!std::filesystem::exists(path)) {
    throw ConfigError("missing checkpoint " + path.string());
  }
  return nn::LoadCheckpoint(path.string());
}

void ReadTrain(const nlohmann::json& j, est::TrainConfig& c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
}

void ReadRl(const nlohmann::json& j, rla::RlConfig& c) {
  c.eta = j.value("eta", c.eta);
  c.lower_factor = j.value("lower_factor", c.lower_factor);
  c.upper_factor = j.value("upper_factor", c.upper_factor);
  c.sigma_floor = j.value("sigma_floor", c.sigma_floor);
  c.initial_sigma = j.value("initial_sigma", c.initial_sigma);
  c.clip = j.value("clip", c.clip);
  c.hidden = j.value("hidden", c.hidden);
  c.actor_learning_rate = j.value("actor_learning_rate", c.actor_learning_rate);
  c.critic_learning_rate =
      j.value("critic_learning_rate", c.critic_learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.episodes_per_update = j.value("episodes_per_update", c.episodes_per_update);
  c.epochs = j.value("epochs", c.epochs);
  c.start_perturbation = j.value("start_perturbation", c.start_perturbation);
  c.normalize_advantages =
      j.value("normalize_advantages", c.normalize_advantages);
  c.nested_rollouts = j.value("nested_rollouts", c.nested_rollouts);
  c.held_lambda_suffix = j.value("held_lambda_suffix", c.held_lambda_suffix);
  c.paired_baseline = j.value("paired_baseline", c.paired_baseline);
  if (j.contains("denominator")) {
    const std::string d = j.at("denominator").get<std::string>();
    if (d == "gmv") {
      c.denominator = rla::RateDenominator::kGmv;
    } else if (d == "completions") {
      c.denominator = rla::RateDenominator::kCompletions;
    } else {
      throw ConfigError("rl.denominator must be 'gmv' or 'completions'");
    }
  }
}

std::vector<Method> kAllMethods = {Method::kOpt, Method::kPdmA, Method::kPdmS,
                                   Method::kFcaRl, Method::kRlNoFca};

}  // namespace

Method ParseMethod(const std::string& name) {
  for (Method m : kAllMethods) {
    if (MethodName(m) == name) return m;
  }
  throw ArgumentError("unknown method '" + name +
                      "' (expected opt, pdm-a, pdm-s, fca-rl, rl-nofca)");
}

std::string MethodName(Method method) {
  switch (method) {
    case Method::kOpt: return "opt";
    case Method::kPdmA: return "pdm-a";
    case Method::kPdmS: return "pdm-s";
    case Method::kFcaRl: return "fca-rl";
    case Method::kRlNoFca: return "rl-nofca";
  }
  return "";
}

bool IsLearned(Method method) {
  return method == Method::kFcaRl || method == Method::kRlNoFca;
}

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j,
                                          ExperimentConfig base) {
  try {
    if (j.contains("coupons")) {
      base.coupons = j.at("coupons").get<std::vector<double>>();
    }
    base.target_rate = j.value("target_rate", base.target_rate);
    base.num_clusters = j.value("num_clusters", base.num_clusters);
    base.window = j.value("window", base.window);
    base.rl_episodes = j.value("rl_episodes", base.rl_episodes);
    base.prior_concentration =
        j.value("prior_concentration", base.prior_concentration);
    base.continuous_market =
        j.value("continuous_market", base.continuous_market);
    base.sample_in_range = j.value("sample_in_range", base.sample_in_range);
    base.own_estimator_reference =
        j.value("own_estimator_reference", base.own_estimator_reference);
    if (j.contains("estimators")) ReadTrain(j.at("estimators"), base.estimators);
    if (j.contains("rl")) ReadRl(j.at("rl"), base.rl);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  if (base.coupons.empty() || base.coupons.front() != 0.0) {
    throw ConfigError("coupons must start with the zero coupon");
  }
  for (size_t k = 1; k < base.coupons.size(); ++k) {
    if (!(base.coupons[k] > base.coupons[k - 1]) || base.coupons[k] >= 1.0) {
      throw ConfigError("coupons must increase and stay below 1");
    }
  }
  if (!(base.target_rate > 0.0 && base.target_rate < 1.0)) {
    throw ConfigError("target_rate must lie in (0, 1)");
  }
  if (base.num_clusters < 1 || base.window < 1 || base.rl_episodes < 0) {
    throw ConfigError("num_clusters and window must be >= 1");
  }
  base.rl.target_rate = base.target_rate;
  return base;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed experiment config " + path + ": " + e.what());
  }
  return ExperimentConfigFromJson(j);
}

uint64_t PretrainSeed(const ScenarioConfig& scene, uint64_t seed) {
  return DeriveSeed(SceneKey(scene), {kStreamPretrain, seed});
}
uint64_t TrainSeed(const ScenarioConfig& scene, uint64_t seed) {
  return DeriveSeed(SceneKey(scene), {kStreamTrain, seed});
}
uint64_t TestSeed(const ScenarioConfig& scene, uint64_t seed) {
  return DeriveSeed(SceneKey(scene), {kStreamTest, seed});
}
uint64_t RlSeed(const ScenarioConfig& scene, uint64_t seed) {
  return DeriveSeed(SceneKey(scene), {kStreamRl, seed});
}

Episode PretrainEpisode(const ScenarioConfig& scene, uint64_t seed) {
  ScenarioConfig stationary = scene;
  stationary.change_probability = 0.0;
  return Episode(stationary, PretrainSeed(scene, seed), scene.slots_pretrain);
}

Episode TrainEpisode(const ScenarioConfig& scene, uint64_t seed) {
  return Episode(scene, TrainSeed(scene, seed), scene.slots_train);
}

Episode TestEpisode(const ScenarioConfig& scene, uint64_t seed,
                    const ExperimentConfig& config) {
  ScenarioConfig continued = scene;
  if (config.continuous_market && scene.slots_train > 0) {
    const Episode train = TrainEpisode(scene, seed);
    continued.initial_multipliers = train.multipliers(scene.slots_train - 1);
  }
  return Episode(continued, TestSeed(scene, seed), scene.slots_test);
}

std::vector<LoggedOrder> PretrainLog(const ScenarioConfig& scene,
                                     const ExperimentConfig& config,
                                     uint64_t seed) {
  const Episode pretrain = PretrainEpisode(scene, seed);
  return LogRandomPolicy(pretrain, config.coupons,
                         DeriveSeed(SceneKey(scene), {kStreamLog, seed}));
}

namespace {

nn::Checkpoint FitOnLog(const std::vector<LoggedOrder>& log,
                        const ScenarioConfig& scene,
                        const ExperimentConfig& config, uint64_t seed,
                        est::Target target) {
  est::TrainConfig train = config.estimators;
  train.seed = DeriveSeed(SceneKey(scene),
                          {kStreamFit, seed, static_cast<uint64_t>(target)});
  const std::vector<est::Sample> data = est::BuildDataset(log, target);
  if (target == est::Target::kBeta) {
    return est::FitBetaParamModel(data, train, PriorConcentration(scene, config))
        .ToCheckpoint();
  }
  return est::FitLogistic(data, train).ToCheckpoint(target);
}

}  // namespace

nn::Checkpoint TrainEstimator(const ScenarioConfig& scene,
                              const ExperimentConfig& config, uint64_t seed,
                              est::Target target) {
  return FitOnLog(PretrainLog(scene, config, seed), scene, config, seed,
                  target);
}

SceneModels PrepareScene(const ScenarioConfig& scene,
                         const ExperimentConfig& config, uint64_t seed,
                         const std::string& checkpoint_dir) {
  SceneModels m;
  const std::vector<LoggedOrder> log = PretrainLog(scene, config, seed);
  auto get = [&](est::Target target) {
    if (!checkpoint_dir.empty()) {
      return LoadRequired(checkpoint_dir,
                          EstimatorCheckpointName(scene.name, seed, target));
    }
    return FitOnLog(log, scene, config, seed, target);
  };
  m.in_range = est::LogisticUpliftModel::FromCheckpoint(get(est::Target::kInRange));
  m.in_range_completion =
      est::LogisticUpliftModel::FromCheckpoint(get(est::Target::kInRangeCompletion));
  m.completion =
      est::LogisticUpliftModel::FromCheckpoint(get(est::Target::kCompletion));
  m.beta = est::BetaParamModel::FromCheckpoint(get(est::Target::kBeta));

  m.pretrain_features.reserve(log.size());
  for (const LoggedOrder& o : log) m.pretrain_features.push_back(o.x);
  Rng cluster_rng = MakeRng(SceneKey(scene), {kStreamCluster, seed});
  m.clusterer = fca::FitFeatureClusterer(m.pretrain_features,
                                         config.num_clusters, cluster_rng);

  const Episode train = TrainEpisode(scene, seed);
  m.train_reference =
      rla::SolveReference(train, config.coupons, config.target_rate);
  m.lambda_pdm_a = dual::SolveLambda(rla::EpisodeProblem(
      train, rla::EndToEndEstimator(m.completion), config.coupons,
      config.target_rate));
  m.lambda_pdm_s = dual::SolveLambda(rla::EpisodeProblem(
      train, rla::DecomposedEstimator(m.in_range, m.in_range_completion),
      config.coupons, config.target_rate));
  if (config.own_estimator_reference) {
    const rla::TrackedEstimator tracked(m.beta, m.in_range_completion,
                                        config.sample_in_range);
    const fca::BetaTracker priors = InitialTracker(m, config, config.window);
    m.lambda_learned = dual::SolveLambda(rla::EpisodeProblem(
        train, tracked, config.coupons, config.target_rate,
        DeriveSeed(TrainSeed(scene, seed), {kStreamEval}), &m.clusterer,
        &priors));
  } else {
    m.lambda_learned = m.train_reference.lambda;
  }
  m.gmv_scale = m.train_reference.gmv * scene.slots_test /
                std::max(scene.slots_train, 1);
  if (!(m.gmv_scale > 0.0)) m.gmv_scale = 1.0;
  return m;
}

fca::BetaTracker InitialTracker(const SceneModels& models,
                                const ExperimentConfig& config, int window) {
  return fca::InitPriors(models.clusterer, models.beta,
                         models.pretrain_features, config.coupons, window);
}

namespace {

rla::Controller LearnedController(Method method, const SceneModels& models,
                                  const rla::CompletionEstimator& estimator,
                                  const fca::BetaTracker& tracker) {
  rla::Controller c;
  c.estimator = &estimator;
  c.clusterer = &models.clusterer;
  c.initial_tracker = &tracker;
  c.update_tracker = method == Method::kFcaRl;
  c.reference_lambda = models.lambda_learned;
  c.gmv_scale = models.gmv_scale;
  return c;
}

}  // namespace

RlTraining TrainController(
    Method method, const ScenarioConfig& scene, const SceneModels& models,
    const ExperimentConfig& config, uint64_t seed, int window,
    const std::function<void(const rla::EpisodeStats&, const rla::Agent&)>&
        on_episode) {
  if (!IsLearned(method)) {
    throw ArgumentError("TrainController: " + MethodName(method) +
                        " is not a learned method");
  }
  const rla::TrackedEstimator estimator(
      models.beta, models.in_range_completion, config.sample_in_range);
  const fca::BetaTracker tracker = InitialTracker(models, config, window);
  const rla::Controller controller =
      LearnedController(method, models, estimator, tracker);
  RlTraining out;
  const uint64_t rl_seed = RlSeed(scene, seed);
  out.agent = std::make_unique<rla::Agent>(
      rla::StateSize(static_cast<int>(config.coupons.size())), config.rl,
      rl_seed);
  rla::TrainingOptions options;
  options.scene = scene;
  options.num_slots = scene.slots_test;
  options.episodes = config.rl_episodes;
  options.seed = rl_seed;
  options.burn_in_slots = config.continuous_market ? scene.slots_train : 0;
  options.on_episode = on_episode;
  out.curve = rla::TrainAgent(*out.agent, controller, config.coupons, options);
  return out;
}

MethodRun RunMethod(Method method, const ScenarioConfig& scene,
                    const SceneModels& models, const ExperimentConfig& config,
                    uint64_t seed, const rla::Agent* agent, int window,
                    std::ostream* tracker_csv) {
  if (window < 0) window = config.window;
  const Episode test = TestEpisode(scene, seed, config);
  const rla::EpisodeReference reference =
      rla::SolveReference(test, config.coupons, config.target_rate);
  const rla::LedgerEntry zero = rla::ZeroCouponTotals(test, config.coupons);

  const rla::GroundTruthEstimator truth;
  const rla::EndToEndEstimator end_to_end(models.completion);
  const rla::DecomposedEstimator decomposed(models.in_range,
                                            models.in_range_completion);
  const rla::TrackedEstimator tracked(models.beta, models.in_range_completion,
                                      config.sample_in_range);
  const fca::BetaTracker tracker = InitialTracker(models, config, window);

  rla::Controller controller;
  rla::RolloutOptions options;
  options.seed = DeriveSeed(TestSeed(scene, seed), {kStreamEval});
  switch (method) {
    case Method::kOpt:
      controller.estimator = &truth;
      controller.reference_lambda = reference.lambda;
      break;
    case Method::kPdmA:
      controller.estimator = &end_to_end;
      controller.reference_lambda = models.lambda_pdm_a;
      break;
    case Method::kPdmS:
      controller.estimator = &decomposed;
      controller.reference_lambda = models.lambda_pdm_s;
      break;
    case Method::kFcaRl:
    case Method::kRlNoFca:
      if (agent == nullptr) {
        throw ArgumentError(MethodName(method) + " needs a trained controller");
      }
      controller = LearnedController(method, models, tracked, tracker);
      controller.policy = &agent->policy();
      options.tracker_csv = tracker_csv;
      break;
  }
  options.start_lambda = controller.reference_lambda;
  const rla::RolloutResult r = rla::Rollout(test, controller, reference,
                                            config.coupons, config.rl, options);

  MethodRun run;
  run.trace = r.trace;
  ReportRow& row = run.row;
  row.method = MethodName(method);
  row.scene = scene.name;
  row.seed = seed;
  row.window = IsLearned(method) ? window : 0;
  row.completions = r.totals.completions;
  row.cost = r.totals.cost;
  row.gmv = r.totals.gmv;
  const CreResult cre = MetricCre(row.cost, row.gmv, config.target_rate);
  row.cre = cre.error;
  row.direction = cre.direction;
  try {
    row.froi = MetricFroi(row.completions, zero.completions, row.cost,
                          row.gmv / row.completions,
                          zero.gmv / zero.completions);
  } catch (const UndefinedMetricError&) {
    row.froi = std::nan("");
  }
  row.rlr = MetricRlr(row.completions, reference.completions,
                      row.cost / row.gmv, config.target_rate);
  return run;
}

namespace {

struct CellSpec {
  const ScenarioConfig* scene;
  uint64_t seed;
};

// Runs `methods` for one (scene, seed); learned methods at each window.
void RunCell(const ScenarioConfig& scene, uint64_t seed,
             const std::vector<Method>& methods, const std::vector<int>& windows,
             const ExperimentConfig& config, const std::string& checkpoint_dir,
             ExperimentResult& out) {
  std::optional<SceneModels> models;
  try {
    models = PrepareScene(scene, config, seed, checkpoint_dir);
  } catch (const std::exception& e) {
    for (Method m : methods) {
      out.failures.push_back({MethodName(m), scene.name, seed, e.what()});
    }
    return;
  }
  for (Method m : methods) {
    for (int window : IsLearned(m) ? windows : std::vector<int>{config.window}) {
      try {
        std::unique_ptr<rla::Agent> agent;
        if (IsLearned(m)) {
          if (!checkpoint_dir.empty()) {
            agent = std::make_unique<rla::Agent>(rla::Agent::FromCheckpoint(
                LoadRequired(checkpoint_dir,
                             AgentCheckpointName(scene.name, seed, m, window,
                                                 "final")),
                config.rl));
          } else {
            agent = TrainController(m, scene, *models, config, seed, window)
                        .agent;
          }
        }
        out.runs.push_back(
            RunMethod(m, scene, *models, config, seed, agent.get(), window));
      } catch (const std::exception& e) {
        out.failures.push_back({MethodName(m), scene.name, seed, e.what()});
      }
    }
  }
}

ExperimentResult RunCells(const std::vector<CellSpec>& cells,
                          const std::vector<Method>& methods,
                          const std::vector<int>& windows,
                          const ExperimentConfig& config,
                          const std::string& checkpoint_dir) {
  std::vector<ExperimentResult> parts(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (size_t k = 0; k < cells.size(); ++k) {
    RunCell(*cells[k].scene, cells[k].seed, methods, windows, config,
            checkpoint_dir, parts[k]);
  }
  ExperimentResult result;
  for (ExperimentResult& p : parts) {
    for (MethodRun& r : p.runs) result.runs.push_back(std::move(r));
    for (CellFailure& f : p.failures) result.failures.push_back(std::move(f));
  }
  return result;
}

}  // namespace

ExperimentResult RunExperiment(const std::vector<ScenarioConfig>& scenes,
                               const std::vector<Method>& methods,
                               const std::vector<uint64_t>& seeds,
                               const ExperimentConfig& config,
                               const std::string& checkpoint_dir) {
  if (seeds.empty()) throw ArgumentError("RunExperiment: need >= 1 seed");
  std::vector<CellSpec> cells;
  for (const ScenarioConfig& s : scenes) {
    for (uint64_t seed : seeds) cells.push_back({&s, seed});
  }
  return RunCells(cells, methods, {config.window}, config, checkpoint_dir);
}

ExperimentResult RunWindowSweep(const ScenarioConfig& scene,
                                const std::vector<int>& windows,
                                const std::vector<uint64_t>& seeds,
                                const ExperimentConfig& config) {
  if (seeds.empty()) throw ArgumentError("RunWindowSweep: need >= 1 seed");
  std::vector<CellSpec> cells;
  for (uint64_t seed : seeds) cells.push_back({&scene, seed});
  return RunCells(cells, {Method::kFcaRl}, windows, config, "");
}

std::vector<SummaryRow> Summarize(const std::vector<MethodRun>& runs) {
  std::map<std::tuple<std::string, std::string, int>, std::vector<const ReportRow*>>
      groups;
  std::vector<std::tuple<std::string, std::string, int>> order;
  for (const MethodRun& r : runs) {
    const auto key = std::make_tuple(r.row.method, r.row.scene, r.row.window);
    if (!groups.contains(key)) order.push_back(key);
    groups[key].push_back(&r.row);
  }
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (v.empty()) {
      mean = sd = std::nan("");
      return;
    }
    for (double x : v) mean += x;
    mean /= v.size();
    if (v.size() > 1) {
      for (double x : v) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / (v.size() - 1));
    }
  };
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& rows = groups[key];
    SummaryRow s;
    std::tie(s.method, s.scene, s.window) = key;
    s.seeds = static_cast<int>(rows.size());
    std::vector<double> cre, froi, rlr;
    for (const ReportRow* r : rows) {
      cre.push_back(r->cre);
      rlr.push_back(r->rlr);
      if (std::isfinite(r->froi)) froi.push_back(r->froi);
      s.over += r->direction == Direction::kOver;
    }
    stats(cre, s.cre_mean, s.cre_sd);
    stats(froi, s.froi_mean, s.froi_sd);
    stats(rlr, s.rlr_mean, s.rlr_sd);
    out.push_back(s);
  }
  return out;
}

void WriteReportCsv(std::ostream& out, const std::vector<MethodRun>& runs) {
  out << "method,scene,seed,CRE,direction,FROI,RLR\n";
  for (const MethodRun& r : runs) {
    const ReportRow& row = r.row;
    out << row.method << ',' << row.scene << ',' << row.seed << ','
        << Fmt(row.cre) << ',' << DirectionName(row.direction) << ','
        << Fmt(row.froi) << ',' << Fmt(row.rlr) << '\n';
  }
}

void WriteTraceCsv(std::ostream& out,
                   const std::vector<rla::SlotTrace>& trace) {
  out << "slot,irr_mean,lambda,cost_rate,completions\n";
  for (const rla::SlotTrace& t : trace) {
    out << t.slot << ',' << Fmt(t.in_range_rate) << ',' << Fmt(t.lambda)
        << ',' << Fmt(t.cost_rate) << ',' << Fmt(t.completions) << '\n';
  }
}

void WriteSummaryCsv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "method,scene,window,seeds,CRE_mean,CRE_sd,FROI_mean,FROI_sd,"
         "RLR_mean,RLR_sd,over\n";
  for (const SummaryRow& s : rows) {
    out << s.method << ',' << s.scene << ',' << s.window << ',' << s.seeds
        << ',' << Fmt(s.cre_mean) << ',' << Fmt(s.cre_sd) << ','
        << Fmt(s.froi_mean) << ',' << Fmt(s.froi_sd) << ','
        << Fmt(s.rlr_mean) << ',' << Fmt(s.rlr_sd) << ',' << s.over << '\n';
  }
}

void WriteFailuresCsv(std::ostream& out,
                      const std::vector<CellFailure>& failures) {
  out << "method,scene,seed,message\n";
  for (const CellFailure& f : failures) {
    std::string msg = f.message;
    for (char& c : msg) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << f.method << ',' << f.scene << ',' << f.seed << ',' << msg << '\n';
  }
}

void WriteExperiment(const std::string& dir, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw ConfigError("cannot write " + (fs::path(dir) / name).string());
    return f;
  };
  {
    std::ofstream f = open("report.csv");
    WriteReportCsv(f, result.runs);
  }
  {
    std::ofstream f = open("summary.csv");
    WriteSummaryCsv(f, Summarize(result.runs));
  }
  for (const MethodRun& r : result.runs) {
    std::string name = "trace_" + r.row.scene + "_" + r.row.method;
    if (r.row.window > 0) name += "_w" + std::to_string(r.row.window);
    std::ofstream f = open(name + "_" + std::to_string(r.row.seed) + ".csv");
    WriteTraceCsv(f, r.trace);
  }
  if (!result.failures.empty()) {
    std::ofstream f = open("failures.csv");
    WriteFailuresCsv(f, result.failures);
  }
}

std::string EstimatorCheckpointName(const std::string& scene, uint64_t seed,
                                    est::Target target) {
  return scene + "_seed" + std::to_string(seed) + "_" + est::TargetName(target) +
         ".ckpt";
}

std::string AgentCheckpointName(const std::string& scene, uint64_t seed,
                                Method method, int window,
                                const std::string& tag) {
  return scene + "_seed" + std::to_string(seed) + "_" + MethodName(method) +
         "_w" + std::to_string(window) + "_" + tag + ".ckpt";
}

}  // namespace ridegym::bench
