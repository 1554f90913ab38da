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

#include "ridegym/estimators.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace ridegym::est {
namespace {

// log(e - 1): softplus of this is exactly 1.
constexpr double kUnitScaleRaw = 0.54132485461291800;

constexpr int kW1 = 0;
constexpr int kB1 = kNumFeatures;
constexpr int kW2 = kNumFeatures + 1;
constexpr int kB2 = 2 * kNumFeatures + 1;
constexpr int kC = 2 * kNumFeatures + 2;

void CheckTrainable(std::span<const Sample> data, const TrainConfig& config) {
  if (data.empty()) throw ArgumentError("training set is empty");
  if (!(config.learning_rate > 0.0) || config.epochs < 1 ||
      config.batch_size < 1) {
    throw ArgumentError("invalid training configuration");
  }
  std::set<double> levels;
  for (const Sample& s : data) {
    if (s.label != 0 && s.label != 1) throw ArgumentError("labels must be 0/1");
    levels.insert(s.treatment);
  }
  if (levels.size() < 2) {
    LogWarning("single coupon level in training data; uplift unidentifiable");
  }
}

// Shuffled mini-batch loop shared by both model kinds.
template <typename LossFn>
void MiniBatchTrain(std::span<const Sample> data, const TrainConfig& config,
                    std::span<double> params, LossFn loss, FitReport* report) {
  Rng rng = MakeRng(config.seed, {0x7472u});
  nn::Adam adam(params.size(), config.learning_rate);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Sample> batch;
  std::vector<double> grad(params.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (size_t k = start; k < end; ++k) batch.push_back(data[order[k]]);
      std::fill(grad.begin(), grad.end(), 0.0);
      const double value = loss(batch, grad);
      if (!std::isfinite(value)) throw NumericError("non-finite training loss");
      adam.Step(params, grad);
    }
    if (report) report->epoch_loss.push_back(loss(data, {}));
  }
}

}  // namespace

Target ParseTarget(const std::string& name) {
  if (name == "w") return Target::kInRange;
  if (name == "f_in") return Target::kInRangeCompletion;
  if (name == "z") return Target::kCompletion;
  if (name == "beta") return Target::kBeta;
  throw ArgumentError("unknown target: " + name);
}

std::string TargetName(Target target) {
  switch (target) {
    case Target::kInRange: return "w";
    case Target::kInRangeCompletion: return "f_in";
    case Target::kCompletion: return "z";
    case Target::kBeta: return "beta";
  }
  return "";
}

std::vector<Sample> BuildDataset(std::span<const LoggedOrder> log,
                                 Target target) {
  std::vector<Sample> data;
  data.reserve(log.size());
  for (const LoggedOrder& o : log) {
    switch (target) {
      case Target::kInRange:
      case Target::kBeta:
        data.push_back({o.x, o.coupon_value, o.in_range ? 1 : 0});
        break;
      case Target::kInRangeCompletion:
        if (o.in_range) data.push_back({o.x, o.coupon_value, o.completed ? 1 : 0});
        break;
      case Target::kCompletion:
        data.push_back({o.x, o.coupon_value, o.completed ? 1 : 0});
        break;
    }
  }
  return data;
}

Standardizer Standardizer::Fit(std::span<const Sample> data) {
  Standardizer s;
  if (data.empty()) return s;
  const double n = static_cast<double>(data.size());
  for (int f = 0; f < kNumFeatures; ++f) {
    double mean = 0.0;
    for (const Sample& d : data) mean += d.x[f];
    mean /= n;
    double var = 0.0;
    for (const Sample& d : data) var += (d.x[f] - mean) * (d.x[f] - mean);
    const double sd = std::sqrt(var / n);
    s.mean[f] = mean;
    s.scale[f] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Features Standardizer::Apply(const Features& x) const {
  Features out;
  for (int f = 0; f < kNumFeatures; ++f) out[f] = (x[f] - mean[f]) / scale[f];
  return out;
}

LogisticUpliftModel::LogisticUpliftModel() { params_[kC] = kUnitScaleRaw; }

double LogisticUpliftModel::scale() const { return Softplus(params_[kC]); }

double LogisticUpliftModel::Logit(const Features& x, double t) const {
  const Features xs = standardizer_.Apply(x);
  double a1 = params_[kB1];
  double a2 = params_[kB2];
  for (int f = 0; f < kNumFeatures; ++f) {
    a1 += params_[kW1 + f] * xs[f];
    a2 += params_[kW2 + f] * xs[f];
  }
  return scale() * Sigmoid(a1) * t + a2;
}

double LogisticUpliftModel::Predict(const Features& x, double t) const {
  return std::clamp(Sigmoid(Logit(x, t)), kProbabilityEpsilon,
                    1.0 - kProbabilityEpsilon);
}

double LogisticUpliftModel::Predict(std::span<const double> x,
                                    double t) const {
  if (x.size() != kNumFeatures) {
    throw ArgumentError("feature vector has the wrong dimension");
  }
  Features f;
  std::copy(x.begin(), x.end(), f.begin());
  return Predict(f, t);
}

std::vector<double> LogisticUpliftModel::PredictBatch(
    std::span<const Sample> data) const {
  std::vector<double> out;
  out.reserve(data.size());
  for (const Sample& s : data) out.push_back(Predict(s.x, s.treatment));
  return out;
}

double LogisticUpliftModel::Loss(std::span<const Sample> data,
                                 std::span<double> grad) const {
  if (!grad.empty() && grad.size() != kNumParams) {
    throw ArgumentError("gradient buffer has the wrong size");
  }
  const double n = static_cast<double>(data.size());
  const double c = scale();
  const double dc_raw = Sigmoid(params_[kC]);
  double total = 0.0;
  for (const Sample& s : data) {
    const Features xs = standardizer_.Apply(s.x);
    double a1 = params_[kB1];
    double a2 = params_[kB2];
    for (int f = 0; f < kNumFeatures; ++f) {
      a1 += params_[kW1 + f] * xs[f];
      a2 += params_[kW2 + f] * xs[f];
    }
    const double h = Sigmoid(a1);
    const double u = c * h * s.treatment + a2;
    // -log sigmoid(u) = softplus(-u); -log(1 - sigmoid(u)) = softplus(u).
    total += s.label ? Softplus(-u) : Softplus(u);
    if (grad.empty()) continue;
    const double du = (Sigmoid(u) - s.label) / n;
    const double da1 = du * c * s.treatment * h * (1.0 - h);
    for (int f = 0; f < kNumFeatures; ++f) {
      grad[kW1 + f] += da1 * xs[f];
      grad[kW2 + f] += du * xs[f];
    }
    grad[kB1] += da1;
    grad[kB2] += du;
    grad[kC] += du * h * s.treatment * dc_raw;
  }
  return total / n;
}

nn::Checkpoint LogisticUpliftModel::ToCheckpoint(Target target) const {
  nn::Checkpoint cp;
  cp.kind = "logistic_uplift/" + TargetName(target);
  auto vec = [](const Features& f) { return std::vector<double>(f.begin(), f.end()); };
  cp.arrays.push_back({"feature_mean", {kNumFeatures}, vec(standardizer_.mean)});
  cp.arrays.push_back({"feature_scale", {kNumFeatures}, vec(standardizer_.scale)});
  cp.arrays.push_back({"params", {kNumParams},
                       std::vector<double>(params_.begin(), params_.end())});
  return cp;
}

LogisticUpliftModel LogisticUpliftModel::FromCheckpoint(
    const nn::Checkpoint& cp) {
  if (cp.kind.rfind("logistic_uplift/", 0) != 0) {
    throw ConfigError("checkpoint is not a logistic uplift model: " + cp.kind);
  }
  LogisticUpliftModel m;
  const auto& mean = cp.Get("feature_mean").data;
  const auto& scale = cp.Get("feature_scale").data;
  const auto& params = cp.Get("params").data;
  if (mean.size() != kNumFeatures || scale.size() != kNumFeatures ||
      params.size() != kNumParams) {
    throw ConfigError("logistic checkpoint has unexpected shapes");
  }
  std::copy(mean.begin(), mean.end(), m.standardizer_.mean.begin());
  std::copy(scale.begin(), scale.end(), m.standardizer_.scale.begin());
  std::copy(params.begin(), params.end(), m.params_.begin());
  return m;
}

LogisticUpliftModel FitLogistic(std::span<const Sample> data,
                                const TrainConfig& config, FitReport* report) {
  CheckTrainable(data, config);
  LogisticUpliftModel model;
  model.standardizer() = Standardizer::Fit(data);
  MiniBatchTrain(
      data, config, model.params(),
      [&model](std::span<const Sample> batch, std::span<double> grad) {
        return model.Loss(batch, grad);
      },
      report);
  return model;
}

BetaParamModel::BetaParamModel(double prior_concentration,
                               double concentration_weight, Rng& rng)
    : net_({kNumFeatures + 1, kHidden, 2}, nn::Activation::kTanh, rng),
      prior_concentration_(prior_concentration),
      concentration_weight_(concentration_weight) {
  if (!(prior_concentration > 0.0) || !(concentration_weight >= 0.0)) {
    throw ArgumentError("invalid Beta concentration prior");
  }
}

std::array<double, kNumFeatures + 1> BetaParamModel::Input(const Features& x,
                                                           double d) const {
  const Features xs = standardizer_.Apply(x);
  std::array<double, kNumFeatures + 1> in;
  std::copy(xs.begin(), xs.end(), in.begin());
  in[kNumFeatures] = 10.0 * d;
  return in;
}

std::pair<double, double> BetaParamModel::Predict(const Features& x,
                                                  double d) const {
  const auto in = Input(x, d);
  const std::vector<double> out = net_.Forward(in);
  return {Softplus(out[0]) + kMinParam, Softplus(out[1]) + kMinParam};
}

double BetaParamModel::Mean(const Features& x, double d) const {
  const auto [a, b] = Predict(x, d);
  return a / (a + b);
}

double BetaParamModel::Loss(std::span<const Sample> data,
                            std::span<double> grad) const {
  if (!grad.empty() && grad.size() != net_.num_params()) {
    throw ArgumentError("gradient buffer has the wrong size");
  }
  const double n = static_cast<double>(data.size());
  const double log_k0 = std::log(prior_concentration_);
  nn::Mlp::Tape tape;
  double total = 0.0;
  for (const Sample& s : data) {
    const auto in = Input(s.x, s.treatment);
    const std::vector<double>& out = net_.Forward(in, tape);
    const double a = Softplus(out[0]) + kMinParam;
    const double b = Softplus(out[1]) + kMinParam;
    const double sum = a + b;
    const double log_sum = std::log(sum);
    const double gap = log_sum - log_k0;
    total += (s.label ? log_sum - std::log(a) : log_sum - std::log(b)) +
             concentration_weight_ * gap * gap;
    if (grad.empty()) continue;
    const double dreg = 2.0 * concentration_weight_ * gap / sum;
    const double da = (1.0 / sum - (s.label ? 1.0 / a : 0.0) + dreg) / n;
    const double db = (1.0 / sum - (s.label ? 0.0 : 1.0 / b) + dreg) / n;
    const double gout[2] = {da * Sigmoid(out[0]), db * Sigmoid(out[1])};
    net_.Backward(tape, gout, grad);
  }
  return total / n;
}

nn::Checkpoint BetaParamModel::ToCheckpoint() const {
  nn::Checkpoint cp;
  cp.kind = "beta_param";
  cp.arrays.push_back({"feature_mean", {kNumFeatures},
                       {standardizer_.mean.begin(), standardizer_.mean.end()}});
  cp.arrays.push_back({"feature_scale", {kNumFeatures},
                       {standardizer_.scale.begin(), standardizer_.scale.end()}});
  cp.arrays.push_back({"concentration_prior", {2},
                       {prior_concentration_, concentration_weight_}});
  nn::AppendMlp(cp, "net", net_);
  return cp;
}

BetaParamModel BetaParamModel::FromCheckpoint(const nn::Checkpoint& cp) {
  if (cp.kind != "beta_param") {
    throw ConfigError("checkpoint is not a Beta parameter model: " + cp.kind);
  }
  BetaParamModel m;
  const auto& mean = cp.Get("feature_mean").data;
  const auto& scale = cp.Get("feature_scale").data;
  const auto& prior = cp.Get("concentration_prior").data;
  if (mean.size() != kNumFeatures || scale.size() != kNumFeatures ||
      prior.size() != 2) {
    throw ConfigError("Beta checkpoint has unexpected shapes");
  }
  std::copy(mean.begin(), mean.end(), m.standardizer_.mean.begin());
  std::copy(scale.begin(), scale.end(), m.standardizer_.scale.begin());
  m.prior_concentration_ = prior[0];
  m.concentration_weight_ = prior[1];
  m.net_ = nn::ReadMlp(cp, "net", nn::Activation::kTanh);
  if (m.net_.input_size() != kNumFeatures + 1 || m.net_.output_size() != 2) {
    throw ConfigError("Beta checkpoint network has the wrong shape");
  }
  return m;
}

BetaParamModel FitBetaParamModel(std::span<const Sample> data,
                                 const TrainConfig& config,
                                 double prior_concentration,
                                 FitReport* report) {
  CheckTrainable(data, config);
  Rng init = MakeRng(config.seed, {0x6265u});
  BetaParamModel model(prior_concentration, 0.05, init);
  model.standardizer() = Standardizer::Fit(data);
  MiniBatchTrain(
      data, config, model.network().params(),
      [&model](std::span<const Sample> batch, std::span<double> grad) {
        return model.Loss(batch, grad);
      },
      report);
  return model;
}

double EvaluateAuc(std::span<const double> scores,
                   std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ArgumentError("scores and labels differ in length");
  }
  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  double positives = 0.0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (i + 1 + j);  // ranks i+1 .. j
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        positive_rank_sum += avg_rank;
        positives += 1.0;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw UndefinedMetricError("AUC needs both label classes");
  }
  return (positive_rank_sum - positives * (positives + 1.0) / 2.0) /
         (positives * negatives);
}

double EvaluateAuc(const LogisticUpliftModel& model,
                   std::span<const Sample> data) {
  std::vector<double> scores = model.PredictBatch(data);
  std::vector<int> labels;
  labels.reserve(data.size());
  for (const Sample& s : data) labels.push_back(s.label);
  return EvaluateAuc(scores, labels);
}

}  // namespace ridegym::est
