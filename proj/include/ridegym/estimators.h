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

// Backbone predictors trained on logged random-coupon data:
// * in-range probability w(x, d),
// * completion given in range f_in(x, d),
// * end-to-end completion z(x, d),
// * a Beta(alpha, beta) predictor for the in-range rate.
//
// The uplift models are
//   p(x, t) = sigmoid(C * sigmoid(W1 x + b1) * t + W2 x + b2),
// with t the coupon level and C > 0 a learned scale initialized at 1.

#ifndef RIDEGYM_ESTIMATORS_H_
#define RIDEGYM_ESTIMATORS_H_

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ridegym/nn.h"
#include "ridegym/simulator.h"

namespace ridegym::est {

enum class Target { kInRange, kInRangeCompletion, kCompletion, kBeta };

// "w", "f_in", "z", "beta".
Target ParseTarget(const std::string& name);
std::string TargetName(Target target);

struct Sample {
  Features x{};
  double treatment = 0.0;
  int label = 0;
};

// Labels logged orders for a target. f_in keeps only in-range orders; the
// Beta predictor uses in-range labels.
std::vector<Sample> BuildDataset(std::span<const LoggedOrder> log,
                                 Target target);

struct TrainConfig {
  double learning_rate = 0.02;
  int epochs = 50;
  int batch_size = 256;
  uint64_t seed = 1;
};

struct FitReport {
  std::vector<double> epoch_loss;  // full-dataset loss after each epoch
};

inline constexpr double kProbabilityEpsilon = 1e-6;

// Per-feature z-scoring with statistics from the training set.
struct Standardizer {
  Features mean{};
  Features scale{1.0, 1.0, 1.0, 1.0};

  static Standardizer Fit(std::span<const Sample> data);
  Features Apply(const Features& x) const;
};

class LogisticUpliftModel {
 public:
  // Parameter layout: W1[4], b1, W2[4], b2, c_raw with C = softplus(c_raw).
  static constexpr int kNumParams = 2 * kNumFeatures + 3;

  LogisticUpliftModel();

  // C * sigmoid(W1 x + b1) * t + W2 x + b2 on standardized x.
  double Logit(const Features& x, double t) const;
  // Sigmoid of Logit, clipped to [eps, 1 - eps].
  double Predict(const Features& x, double t) const;
  double Predict(std::span<const double> x, double t) const;
  std::vector<double> PredictBatch(std::span<const Sample> data) const;

  double scale() const;
  // Mean binary cross-entropy; adds the gradient into `grad` if non-empty.
  double Loss(std::span<const Sample> data, std::span<double> grad = {}) const;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  Standardizer& standardizer() { return standardizer_; }
  const Standardizer& standardizer() const { return standardizer_; }

  nn::Checkpoint ToCheckpoint(Target target) const;
  static LogisticUpliftModel FromCheckpoint(const nn::Checkpoint& checkpoint);

 private:
  Standardizer standardizer_;
  std::array<double, kNumParams> params_{};
};

LogisticUpliftModel FitLogistic(std::span<const Sample> data,
                                const TrainConfig& config,
                                FitReport* report = nullptr);

// (standardized x, d) -> 16 tanh units -> softplus -> (alpha, beta).
// Trained by Bernoulli likelihood of the mean alpha / (alpha + beta) plus a
// penalty pulling log(alpha + beta) toward log(prior_concentration); the
// labels alone do not identify the concentration.
class BetaParamModel {
 public:
  static constexpr int kHidden = 16;
  static constexpr double kMinParam = 1e-6;

  BetaParamModel() = default;
  BetaParamModel(double prior_concentration, double concentration_weight,
                 Rng& rng);

  std::pair<double, double> Predict(const Features& x, double d) const;
  double Mean(const Features& x, double d) const;
  double Loss(std::span<const Sample> data, std::span<double> grad = {}) const;

  nn::Mlp& network() { return net_; }
  const nn::Mlp& network() const { return net_; }
  Standardizer& standardizer() { return standardizer_; }
  double prior_concentration() const { return prior_concentration_; }

  nn::Checkpoint ToCheckpoint() const;
  static BetaParamModel FromCheckpoint(const nn::Checkpoint& checkpoint);

 private:
  std::array<double, kNumFeatures + 1> Input(const Features& x,
                                             double d) const;
  Standardizer standardizer_;
  nn::Mlp net_;
  double prior_concentration_ = 6.0;
  double concentration_weight_ = 0.05;
};

BetaParamModel FitBetaParamModel(std::span<const Sample> data,
                                 const TrainConfig& config,
                                 double prior_concentration,
                                 FitReport* report = nullptr);

// Rank-based AUC with average ranks for ties. Throws UndefinedMetricError
// unless both classes are present.
double EvaluateAuc(std::span<const double> scores, std::span<const int> labels);
double EvaluateAuc(const LogisticUpliftModel& model,
                   std::span<const Sample> data);

}  // namespace ridegym::est

#endif  // RIDEGYM_ESTIMATORS_H_
