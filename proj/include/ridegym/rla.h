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

// Multiplier controller. Each slot a Gaussian policy proposes a factor for
// the budget multiplier lambda, coupons are assigned by the dual decision
// rule under that lambda, and the simulator resolves the slot. Policy and
// critic are trained with a clipped PPO objective against the episode's
// full achievement (completions relative to a reference minus an
// over-budget penalty).

#ifndef RIDEGYM_RLA_H_
#define RIDEGYM_RLA_H_

#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "ridegym/dual_solver.h"
#include "ridegym/estimators.h"
#include "ridegym/fca.h"
#include "ridegym/nn.h"
#include "ridegym/simulator.h"

namespace ridegym::rla {

enum class RateDenominator { kGmv, kCompletions };

struct RlConfig {
  double target_rate = 0.05;
  double eta = 1.0;
  // lambda bounds as multiples of the reference lambda.
  double lower_factor = 0.05;
  double upper_factor = 10.0;
  double sigma_floor = 0.05;
  double initial_sigma = 0.15;
  double clip = 0.2;
  int hidden = 64;
  double actor_learning_rate = 3e-4;
  double critic_learning_rate = 1e-3;
  int batch_size = 256;
  int episodes_per_update = 4;
  int epochs = 8;
  // Start lambda is reference * (1 + U(-p, p)) during training.
  double start_perturbation = 0.1;
  bool normalize_advantages = true;
  RateDenominator denominator = RateDenominator::kGmv;
  // Re-simulate the suffix after every slot instead of reusing the rollout.
  bool nested_rollouts = false;
  // Score each action by holding its lambda, and the tracker it left behind,
  // over the rest of the episode under ground-truth expectations. Ignored
  // when nested_rollouts is set.
  bool held_lambda_suffix = true;
  // With held_lambda_suffix, baseline each action by the held score of the
  // policy mean on the same random numbers instead of the critic.
  bool paired_baseline = true;
};

// Multiplicative proposal clip(lambda * eta * action, lower, upper), damped
// by the previous step: lambda += (proposal - lambda) / (1 + |prev_delta|).
// Returns the new lambda and updates prev_delta.
double ApplyAction(dual::LambdaState& state, double action, double eta);

// Sums over one slot for the chosen coupon of each order; `z` is N x H.
double SlotReward(std::span<const double> z, std::span<const int> assignment);
double SlotPenalty(std::span<const double> z, std::span<const double> price,
                   std::span<const double> coupons,
                   std::span<const int> assignment);
double SlotGmv(std::span<const double> z, std::span<const double> price,
               std::span<const int> assignment);

struct LedgerEntry {
  double completions = 0.0;
  double cost = 0.0;
  double gmv = 0.0;
};

// Spend over the past (observed) plus future (estimated) slots, divided by
// GMV or by completions. Throws UndefinedMetricError on a zero denominator.
double ComputeCr(std::span<const LedgerEntry> past,
                 std::span<const LedgerEntry> future,
                 RateDenominator denominator = RateDenominator::kGmv);

// completions / reference - (exp(max(rate / target - 1, 0)) - 1).
double FullAchievement(double completions, double reference_completions,
                       double rate, double target_rate);

// Produces N x H completion estimates for one slot.
class CompletionEstimator {
 public:
  virtual ~CompletionEstimator() = default;
  // `clusters` and `tracker` are empty / null unless the controller tracks
  // in-range rates.
  virtual std::vector<double> Estimate(const Episode& episode, int slot,
                                       std::span<const double> coupons,
                                       std::span<const int> clusters,
                                       const fca::BetaTracker* tracker,
                                       Rng& rng) const = 0;
  // Estimate split into a tracker-independent part, computed once per slot,
  // and its combination with a tracker state. By default the whole estimate
  // is tracker-independent.
  virtual std::vector<double> Prepare(const Episode& episode, int slot,
                                      std::span<const double> coupons,
                                      Rng& rng) const {
    return Estimate(episode, slot, coupons, {}, nullptr, rng);
  }
  virtual std::vector<double> Finish(std::vector<double> prepared,
                                     std::span<const int> /*clusters*/,
                                     const fca::BetaTracker* /*tracker*/,
                                     Rng& /*rng*/) const {
    return prepared;
  }
};

class GroundTruthEstimator : public CompletionEstimator {
 public:
  std::vector<double> Estimate(const Episode& episode, int slot,
                               std::span<const double> coupons,
                               std::span<const int> clusters,
                               const fca::BetaTracker* tracker,
                               Rng& rng) const override;
};

// z(x, d) from a model trained on completion labels.
class EndToEndEstimator : public CompletionEstimator {
 public:
  explicit EndToEndEstimator(const est::LogisticUpliftModel& completion)
      : completion_(completion) {}
  std::vector<double> Estimate(const Episode& episode, int slot,
                               std::span<const double> coupons,
                               std::span<const int> clusters,
                               const fca::BetaTracker* tracker,
                               Rng& rng) const override;

 private:
  const est::LogisticUpliftModel& completion_;
};

// w(x, d) * f_in(x, d).
class DecomposedEstimator : public CompletionEstimator {
 public:
  DecomposedEstimator(const est::LogisticUpliftModel& in_range,
                      const est::LogisticUpliftModel& in_range_completion)
      : in_range_(in_range), in_range_completion_(in_range_completion) {}
  std::vector<double> Estimate(const Episode& episode, int slot,
                               std::span<const double> coupons,
                               std::span<const int> clusters,
                               const fca::BetaTracker* tracker,
                               Rng& rng) const override;

 private:
  const est::LogisticUpliftModel& in_range_;
  const est::LogisticUpliftModel& in_range_completion_;
};

// w ~ Beta(model (alpha, beta) + tracker cell), times f_in(x, d). With
// `sample` false the Beta mean replaces the draw.
class TrackedEstimator : public CompletionEstimator {
 public:
  TrackedEstimator(const est::BetaParamModel& beta,
                   const est::LogisticUpliftModel& in_range_completion,
                   bool sample = true)
      : beta_(beta),
        in_range_completion_(in_range_completion),
        sample_(sample) {}
  std::vector<double> Estimate(const Episode& episode, int slot,
                               std::span<const double> coupons,
                               std::span<const int> clusters,
                               const fca::BetaTracker* tracker,
                               Rng& rng) const override;
  // Prior alpha, beta and in-range completion per (order, coupon).
  std::vector<double> Prepare(const Episode& episode, int slot,
                              std::span<const double> coupons,
                              Rng& rng) const override;
  std::vector<double> Finish(std::vector<double> prepared,
                             std::span<const int> clusters,
                             const fca::BetaTracker* tracker,
                             Rng& rng) const override;

 private:
  const est::BetaParamModel& beta_;
  const est::LogisticUpliftModel& in_range_completion_;
  bool sample_;
};

// All slots of an episode stacked into one allocation problem. A tracker,
// if given, is read but not updated.
dual::AllocationProblem EpisodeProblem(
    const Episode& episode, const CompletionEstimator& estimator,
    std::span<const double> coupons, double budget_rate, uint64_t seed = 0,
    const fca::FeatureClusterer* clusterer = nullptr,
    const fca::BetaTracker* tracker = nullptr);

// Hindsight optimum on ground-truth completion probabilities: static lambda
// and the expected totals it achieves.
struct EpisodeReference {
  double lambda = 0.0;
  double completions = 0.0;
  double cost = 0.0;
  double gmv = 0.0;
};
EpisodeReference SolveReference(const Episode& episode,
                                std::span<const double> coupons,
                                double budget_rate);

// Realized totals with every order at coupon 0.
LedgerEntry ZeroCouponTotals(const Episode& episode,
                             std::span<const double> coupons);

// State layout: t / T, lambda / reference lambda, rate / target, signed
// spend gap, GMV progress, incremental-completion proxy, then
// log1p(mean alpha per coupon), log1p(mean beta per coupon).
inline constexpr int kBaseStateSize = 6;
inline int StateSize(int num_coupons) {
  return kBaseStateSize + 2 * num_coupons;
}

struct PolicyOutput {
  double mean = 1.0;
  double stddev = 1.0;
};

class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(int state_size, const RlConfig& config, Rng& rng);

  // mean = 1 + out0, stddev = floor + softplus(out1).
  PolicyOutput Evaluate(std::span<const double> state) const;
  static PolicyOutput FromRaw(double out0, double out1, double sigma_floor);
  static double LogProb(double action, const PolicyOutput& output);

  double sigma_floor() const { return sigma_floor_; }
  nn::Mlp& network() { return net_; }
  const nn::Mlp& network() const { return net_; }
  static GaussianPolicy FromNetwork(nn::Mlp net, double sigma_floor);

 private:
  nn::Mlp net_;
  double sigma_floor_ = 0.05;
};

// Q(state, action).
class Critic {
 public:
  Critic() = default;
  Critic(int state_size, const RlConfig& config, Rng& rng);

  double Value(std::span<const double> state, double action) const;
  nn::Mlp& network() { return net_; }
  const nn::Mlp& network() const { return net_; }
  static Critic FromNetwork(nn::Mlp net);

 private:
  nn::Mlp net_;
};

struct Transition {
  std::vector<double> state;
  double action = 1.0;
  double old_mean = 1.0;
  double old_stddev = 1.0;
  double old_log_prob = 0.0;
  double full_achievement = 0.0;
  // Score of the policy mean under the same suffix; NaN means the critic
  // provides the baseline.
  double baseline = std::numeric_limits<double>::quiet_NaN();
};

// Negated mean clipped surrogate as a function of raw policy outputs
// (batch x 2, row-major). Writes dL/draw into `grad_raw` when non-empty.
double PpoLoss(std::span<const double> raw, std::span<const Transition> batch,
               std::span<const double> advantages, double clip,
               double sigma_floor, std::span<double> grad_raw = {});
// Same loss through the policy network; adds dL/dparams into `grad`.
double PolicyLoss(const GaussianPolicy& policy,
                  std::span<const Transition> batch,
                  std::span<const double> advantages, double clip,
                  std::span<double> grad = {});
// Mean (F - Q(s, a))^2; adds dL/dparams into `grad`.
double CriticLoss(const Critic& critic, std::span<const Transition> batch,
                  std::span<double> grad = {});

struct UpdateStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
};

class Agent {
 public:
  Agent(int state_size, const RlConfig& config, uint64_t seed);

  // Advantages are F - Q(s, mean_old(s)), computed before any step. Throws
  // NumericError on a non-finite loss.
  UpdateStats Update(std::span<const Transition> batch, Rng& rng);

  const RlConfig& config() const { return config_; }
  GaussianPolicy& policy() { return policy_; }
  const GaussianPolicy& policy() const { return policy_; }
  Critic& critic() { return critic_; }
  const Critic& critic() const { return critic_; }

  nn::Checkpoint ToCheckpoint() const;
  static Agent FromCheckpoint(const nn::Checkpoint& checkpoint,
                              const RlConfig& config);

 private:
  RlConfig config_;
  GaussianPolicy policy_;
  Critic critic_;
  nn::Adam actor_opt_;
  nn::Adam critic_opt_;
};

// What a controller brings to an episode.
struct Controller {
  const CompletionEstimator* estimator = nullptr;
  // Optional in-range tracking.
  const fca::FeatureClusterer* clusterer = nullptr;
  const fca::BetaTracker* initial_tracker = nullptr;
  bool update_tracker = true;
  // Null holds lambda fixed at the start value.
  const GaussianPolicy* policy = nullptr;
  double reference_lambda = 1.0;
  // Scale for the GMV entries of the state.
  double gmv_scale = 1.0;
};

struct RolloutOptions {
  double start_lambda = 1.0;
  bool explore = false;
  uint64_t seed = 1;
  std::ostream* tracker_csv = nullptr;  // per-slot tracker snapshots
};

struct SlotTrace {
  int slot = 0;
  double lambda = 0.0;
  double action = 1.0;
  double in_range_rate = 0.0;
  double cost_rate = 0.0;  // cumulative cost / cumulative gmv
  int orders = 0;
  double completions = 0.0;
  double cost = 0.0;
  double gmv = 0.0;
};

struct RolloutResult {
  std::vector<Transition> transitions;  // filled when a policy is present
  std::vector<SlotTrace> trace;
  LedgerEntry totals;
  LedgerEntry expected_totals;  // ground-truth expectation of the choices
};

RolloutResult Rollout(const Episode& episode, const Controller& controller,
                      const EpisodeReference& reference,
                      std::span<const double> coupons, const RlConfig& config,
                      const RolloutOptions& options);

struct EpisodeStats {
  int episode = 0;
  double rlr = 0.0;
  double cre = 0.0;
  double froi = 0.0;
};

struct TrainingOptions {
  ScenarioConfig scene;
  int num_slots = 48;
  // Each training episode starts where an independent run of this many
  // slots left competitor prices.
  int burn_in_slots = 0;
  int episodes = 200;
  uint64_t seed = 1;
  // Called after every episode, and after any update it triggered.
  std::function<void(const EpisodeStats&, const Agent&)> on_episode;
};

// Trains `agent` in place. The controller's policy pointer is replaced by
// the agent's policy.
std::vector<EpisodeStats> TrainAgent(Agent& agent, Controller controller,
                                     std::span<const double> coupons,
                                     const TrainingOptions& options);

void WriteCurveCsvHeader(std::ostream& out);
void WriteCurveCsvRow(std::ostream& out, const EpisodeStats& stats);

}  // namespace ridegym::rla

#endif  // RIDEGYM_RLA_H_
