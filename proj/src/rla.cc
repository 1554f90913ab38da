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

#include "ridegym/rla.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>

#include "ridegym/metrics.h"

namespace ridegym::rla {
namespace {

constexpr uint64_t kStreamTrainEpisode = 31;
constexpr uint64_t kStreamTrainRollout = 32;
constexpr uint64_t kStreamTrainStart = 33;
constexpr uint64_t kStreamNested = 34;
constexpr uint64_t kStreamUpdate = 35;
constexpr uint64_t kStreamHeld = 36;

LedgerEntry Sum(std::span<const LedgerEntry> entries) {
  LedgerEntry total;
  for (const LedgerEntry& e : entries) {
    total.completions += e.completions;
    total.cost += e.cost;
    total.gmv += e.gmv;
  }
  return total;
}

std::vector<double> Prices(const std::vector<Opportunity>& orders) {
  std::vector<double> g(orders.size());
  for (size_t i = 0; i < orders.size(); ++i) g[i] = orders[i].base_price;
  return g;
}

double InverseSoftplus(double y) { return std::log(std::expm1(y)); }

void CheckAssignmentShape(std::span<const double> z,
                          std::span<const int> assignment) {
  if (assignment.empty() ? !z.empty() : z.size() % assignment.size() != 0) {
    throw ArgumentError("z must be N x H for N assigned orders");
  }
}

}  // namespace

double ApplyAction(dual::LambdaState& state, double action, double eta) {
  const double previous = state.lambda;
  const double proposal =
      std::clamp(previous * eta * action, state.lower, state.upper);
  double next =
      previous + (proposal - previous) / (1.0 + std::abs(state.prev_delta));
  next = std::clamp(next, state.lower, state.upper);
  state.prev_delta = next - previous;
  state.lambda = next;
  return next;
}

double SlotReward(std::span<const double> z, std::span<const int> assignment) {
  CheckAssignmentShape(z, assignment);
  if (assignment.empty()) return 0.0;
  const size_t h = z.size() / assignment.size();
  double total = 0.0;
  for (size_t i = 0; i < assignment.size(); ++i) {
    total += z[i * h + assignment[i]];
  }
  return total;
}

double SlotPenalty(std::span<const double> z, std::span<const double> price,
                   std::span<const double> coupons,
                   std::span<const int> assignment) {
  CheckAssignmentShape(z, assignment);
  const size_t h = coupons.size();
  double total = 0.0;
  for (size_t i = 0; i < assignment.size(); ++i) {
    const int j = assignment[i];
    total += z[i * h + j] * price[i] * coupons[j];
  }
  return total;
}

double SlotGmv(std::span<const double> z, std::span<const double> price,
               std::span<const int> assignment) {
  CheckAssignmentShape(z, assignment);
  if (assignment.empty()) return 0.0;
  const size_t h = z.size() / assignment.size();
  double total = 0.0;
  for (size_t i = 0; i < assignment.size(); ++i) {
    total += z[i * h + assignment[i]] * price[i];
  }
  return total;
}

double ComputeCr(std::span<const LedgerEntry> past,
                 std::span<const LedgerEntry> future,
                 RateDenominator denominator) {
  const LedgerEntry a = Sum(past);
  const LedgerEntry b = Sum(future);
  const double spend = a.cost + b.cost;
  const double base = denominator == RateDenominator::kGmv
                          ? a.gmv + b.gmv
                          : a.completions + b.completions;
  if (!(base > 0.0)) throw UndefinedMetricError("CR: zero denominator");
  return spend / base;
}

double FullAchievement(double completions, double reference_completions,
                       double rate, double target_rate) {
  return bench::MetricRlr(completions, reference_completions, rate,
                          target_rate);
}

std::vector<double> GroundTruthEstimator::Estimate(
    const Episode& episode, int slot, std::span<const double> coupons,
    std::span<const int>, const fca::BetaTracker*, Rng&) const {
  return episode.CompletionMatrix(slot, coupons);
}

std::vector<double> EndToEndEstimator::Estimate(
    const Episode& episode, int slot, std::span<const double> coupons,
    std::span<const int>, const fca::BetaTracker*, Rng&) const {
  const auto& orders = episode.orders(slot);
  const size_t h = coupons.size();
  std::vector<double> z(orders.size() * h);
  for (size_t i = 0; i < orders.size(); ++i) {
    for (size_t j = 0; j < h; ++j) {
      z[i * h + j] = completion_.Predict(orders[i].x, coupons[j]);
    }
  }
  return z;
}

std::vector<double> DecomposedEstimator::Estimate(
    const Episode& episode, int slot, std::span<const double> coupons,
    std::span<const int>, const fca::BetaTracker*, Rng&) const {
  const auto& orders = episode.orders(slot);
  const size_t h = coupons.size();
  std::vector<double> z(orders.size() * h);
  for (size_t i = 0; i < orders.size(); ++i) {
    for (size_t j = 0; j < h; ++j) {
      z[i * h + j] = in_range_.Predict(orders[i].x, coupons[j]) *
                     in_range_completion_.Predict(orders[i].x, coupons[j]);
    }
  }
  return z;
}

std::vector<double> TrackedEstimator::Estimate(
    const Episode& episode, int slot, std::span<const double> coupons,
    std::span<const int> clusters, const fca::BetaTracker* tracker,
    Rng& rng) const {
  if (tracker != nullptr && clusters.size() != episode.orders(slot).size()) {
    throw ArgumentError("TrackedEstimator: cluster labels required");
  }
  return Finish(Prepare(episode, slot, coupons, rng), clusters, tracker, rng);
}

std::vector<double> TrackedEstimator::Prepare(const Episode& episode, int slot,
                                              std::span<const double> coupons,
                                              Rng&) const {
  const auto& orders = episode.orders(slot);
  const size_t h = coupons.size();
  std::vector<double> prepared;
  prepared.reserve(3 * orders.size() * h);
  for (size_t i = 0; i < orders.size(); ++i) {
    for (size_t j = 0; j < h; ++j) {
      const auto [a, b] = beta_.Predict(orders[i].x, coupons[j]);
      prepared.push_back(a);
      prepared.push_back(b);
      prepared.push_back(in_range_completion_.Predict(orders[i].x, coupons[j]));
    }
  }
  return prepared;
}

std::vector<double> TrackedEstimator::Finish(std::vector<double> prepared,
                                             std::span<const int> clusters,
                                             const fca::BetaTracker* tracker,
                                             Rng& rng) const {
  const size_t cells = prepared.size() / 3;
  const size_t h = tracker != nullptr ? tracker->num_coupons() : 0;
  if (tracker != nullptr && clusters.size() * h != cells) {
    throw ArgumentError("TrackedEstimator: cluster labels required");
  }
  std::vector<double> z(cells);
  for (size_t k = 0; k < cells; ++k) {
    double a = prepared[3 * k];
    double b = prepared[3 * k + 1];
    if (tracker != nullptr) {
      std::tie(a, b) = tracker->Refine(clusters[k / h], static_cast<int>(k % h),
                                       a, b);
    }
    const double w = sample_ ? fca::SampleBeta(a, b, rng) : a / (a + b);
    z[k] = w * prepared[3 * k + 2];
  }
  return z;
}

dual::AllocationProblem EpisodeProblem(
    const Episode& episode, const CompletionEstimator& estimator,
    std::span<const double> coupons, double budget_rate, uint64_t seed,
    const fca::FeatureClusterer* clusterer, const fca::BetaTracker* tracker) {
  if (tracker != nullptr && clusterer == nullptr) {
    throw ArgumentError("EpisodeProblem: tracking needs a clusterer");
  }
  dual::AllocationProblem problem;
  problem.coupons.assign(coupons.begin(), coupons.end());
  problem.budget_rate = budget_rate;
  Rng rng(seed);
  for (int t = 0; t < episode.num_slots(); ++t) {
    std::vector<int> clusters;
    if (tracker != nullptr) clusters = clusterer->AssignAll(episode.orders(t));
    const std::vector<double> z =
        estimator.Estimate(episode, t, coupons, clusters, tracker, rng);
    problem.completion.insert(problem.completion.end(), z.begin(), z.end());
    for (const Opportunity& o : episode.orders(t)) {
      problem.base_price.push_back(o.base_price);
    }
  }
  return problem;
}

EpisodeReference SolveReference(const Episode& episode,
                                std::span<const double> coupons,
                                double budget_rate) {
  const dual::AllocationProblem problem = EpisodeProblem(
      episode, GroundTruthEstimator(), coupons, budget_rate);
  EpisodeReference ref;
  ref.lambda = dual::SolveLambda(problem);
  const dual::AssignmentTotals totals =
      dual::Evaluate(problem, dual::AssignCoupons(problem, ref.lambda));
  ref.completions = totals.completions;
  ref.cost = totals.cost;
  ref.gmv = totals.gmv;
  return ref;
}

LedgerEntry ZeroCouponTotals(const Episode& episode,
                             std::span<const double> coupons) {
  LedgerEntry total;
  for (int t = 0; t < episode.num_slots(); ++t) {
    const std::vector<int> zero(episode.orders(t).size(), 0);
    const SlotOutcome out = episode.Step(t, zero, coupons);
    total.completions += out.completions;
    total.cost += out.cost;
    total.gmv += out.gmv;
  }
  return total;
}

GaussianPolicy::GaussianPolicy(int state_size, const RlConfig& config,
                               Rng& rng)
    : net_({state_size, config.hidden, config.hidden, 2},
           nn::Activation::kTanh, rng),
      sigma_floor_(config.sigma_floor) {
  if (!(config.initial_sigma > config.sigma_floor)) {
    throw ConfigError("initial_sigma must exceed sigma_floor");
  }
  // Start near the identity action with a modest spread.
  const int last = net_.num_layers() - 1;
  auto p = net_.params();
  for (size_t k = net_.weight_offset(last); k < net_.bias_offset(last); ++k) {
    p[k] *= 0.01;
  }
  p[net_.bias_offset(last) + 1] =
      InverseSoftplus(config.initial_sigma - config.sigma_floor);
}

PolicyOutput GaussianPolicy::FromRaw(double out0, double out1,
                                     double sigma_floor) {
  return {1.0 + out0, sigma_floor + Softplus(out1)};
}

PolicyOutput GaussianPolicy::Evaluate(std::span<const double> state) const {
  const std::vector<double> out = net_.Forward(state);
  return FromRaw(out[0], out[1], sigma_floor_);
}

double GaussianPolicy::LogProb(double action, const PolicyOutput& output) {
  const double u = (action - output.mean) / output.stddev;
  return -0.5 * u * u - std::log(output.stddev) -
         0.5 * std::log(2.0 * std::numbers::pi);
}

GaussianPolicy GaussianPolicy::FromNetwork(nn::Mlp net, double sigma_floor) {
  if (net.output_size() != 2) {
    throw ConfigError("policy network must have two outputs");
  }
  GaussianPolicy p;
  p.net_ = std::move(net);
  p.sigma_floor_ = sigma_floor;
  return p;
}

Critic::Critic(int state_size, const RlConfig& config, Rng& rng)
    : net_({state_size + 1, config.hidden, config.hidden, 1},
           nn::Activation::kTanh, rng) {}

double Critic::Value(std::span<const double> state, double action) const {
  std::vector<double> in(state.begin(), state.end());
  in.push_back(action);
  return net_.Forward(in)[0];
}

Critic Critic::FromNetwork(nn::Mlp net) {
  if (net.output_size() != 1) {
    throw ConfigError("critic network must have one output");
  }
  Critic c;
  c.net_ = std::move(net);
  return c;
}

double PpoLoss(std::span<const double> raw, std::span<const Transition> batch,
               std::span<const double> advantages, double clip,
               double sigma_floor, std::span<double> grad_raw) {
  const size_t b = batch.size();
  if (b == 0 || raw.size() != 2 * b || advantages.size() != b) {
    throw ArgumentError("PpoLoss: batch shapes do not match");
  }
  double loss = 0.0;
  for (size_t k = 0; k < b; ++k) {
    const PolicyOutput out =
        GaussianPolicy::FromRaw(raw[2 * k], raw[2 * k + 1], sigma_floor);
    const Transition& tr = batch[k];
    const double ratio =
        std::exp(GaussianPolicy::LogProb(tr.action, out) - tr.old_log_prob);
    const double adv = advantages[k];
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
    loss -= std::min(unclipped, clipped);
    if (grad_raw.empty() || unclipped > clipped) continue;
    // d(-ratio * adv) through log pi.
    const double dlogp = -adv * ratio / static_cast<double>(b);
    const double diff = tr.action - out.mean;
    const double var = out.stddev * out.stddev;
    const double dmean = diff / var;
    const double dstd = diff * diff / (var * out.stddev) - 1.0 / out.stddev;
    grad_raw[2 * k] += dlogp * dmean;
    grad_raw[2 * k + 1] += dlogp * dstd * Sigmoid(raw[2 * k + 1]);
  }
  return loss / static_cast<double>(b);
}

double PolicyLoss(const GaussianPolicy& policy,
                  std::span<const Transition> batch,
                  std::span<const double> advantages, double clip,
                  std::span<double> grad) {
  const size_t b = batch.size();
  std::vector<nn::Mlp::Tape> tapes(b);
  std::vector<double> raw(2 * b);
  for (size_t k = 0; k < b; ++k) {
    const auto& out = policy.network().Forward(batch[k].state, tapes[k]);
    raw[2 * k] = out[0];
    raw[2 * k + 1] = out[1];
  }
  std::vector<double> grad_raw(grad.empty() ? 0 : 2 * b, 0.0);
  const double loss = PpoLoss(raw, batch, advantages, clip,
                              policy.sigma_floor(), grad_raw);
  if (!grad.empty()) {
    for (size_t k = 0; k < b; ++k) {
      if (grad_raw[2 * k] == 0.0 && grad_raw[2 * k + 1] == 0.0) continue;
      policy.network().Backward(
          tapes[k], std::span<const double>(grad_raw).subspan(2 * k, 2), grad);
    }
  }
  return loss;
}

double CriticLoss(const Critic& critic, std::span<const Transition> batch,
                  std::span<double> grad) {
  const size_t b = batch.size();
  if (b == 0) throw ArgumentError("CriticLoss: empty batch");
  double loss = 0.0;
  nn::Mlp::Tape tape;
  std::vector<double> in;
  for (const Transition& tr : batch) {
    in.assign(tr.state.begin(), tr.state.end());
    in.push_back(tr.action);
    const double q = critic.network().Forward(in, tape)[0];
    const double err = tr.full_achievement - q;
    loss += err * err;
    if (!grad.empty()) {
      const double upstream = -2.0 * err / static_cast<double>(b);
      critic.network().Backward(tape, {&upstream, 1}, grad);
    }
  }
  return loss / static_cast<double>(b);
}

Agent::Agent(int state_size, const RlConfig& config, uint64_t seed)
    : config_(config),
      policy_([&] {
        Rng rng = MakeRng(seed, {kStreamUpdate, 2});
        return GaussianPolicy(state_size, config, rng);
      }()),
      critic_([&] {
        Rng rng = MakeRng(seed, {kStreamUpdate, 3});
        return Critic(state_size, config, rng);
      }()),
      actor_opt_(policy_.network().num_params(), config.actor_learning_rate),
      critic_opt_(critic_.network().num_params(),
                  config.critic_learning_rate) {}

UpdateStats Agent::Update(std::span<const Transition> batch, Rng& rng) {
  const size_t n = batch.size();
  if (n == 0) throw ArgumentError("Agent::Update: empty batch");
  std::vector<double> adv(n);
  for (size_t k = 0; k < n; ++k) {
    adv[k] = batch[k].full_achievement -
             (std::isnan(batch[k].baseline)
                  ? critic_.Value(batch[k].state, batch[k].old_mean)
                  : batch[k].baseline);
  }
  if (config_.normalize_advantages && n > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / n);
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t mb = static_cast<size_t>(std::max(config_.batch_size, 1));
  UpdateStats stats;
  std::vector<Transition> mini;
  std::vector<double> mini_adv;
  std::vector<double> g_actor(policy_.network().num_params());
  std::vector<double> g_critic(critic_.network().num_params());
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < n; start += mb) {
      const size_t end = std::min(n, start + mb);
      mini.clear();
      mini_adv.clear();
      for (size_t k = start; k < end; ++k) {
        mini.push_back(batch[order[k]]);
        mini_adv.push_back(adv[order[k]]);
      }
      std::fill(g_critic.begin(), g_critic.end(), 0.0);
      stats.critic_loss = CriticLoss(critic_, mini, g_critic);
      std::fill(g_actor.begin(), g_actor.end(), 0.0);
      stats.actor_loss =
          PolicyLoss(policy_, mini, mini_adv, config_.clip, g_actor);
      if (!std::isfinite(stats.critic_loss) ||
          !std::isfinite(stats.actor_loss)) {
        throw NumericError("non-finite loss (actor " +
                           std::to_string(stats.actor_loss) + ", critic " +
                           std::to_string(stats.critic_loss) + ")");
      }
      critic_opt_.Step(critic_.network().params(), g_critic);
      actor_opt_.Step(policy_.network().params(), g_actor);
    }
  }
  return stats;
}

nn::Checkpoint Agent::ToCheckpoint() const {
  nn::Checkpoint cp;
  cp.kind = "rla_agent";
  cp.arrays.push_back({"sigma_floor", {1}, {policy_.sigma_floor()}});
  nn::AppendMlp(cp, "policy", policy_.network());
  nn::AppendMlp(cp, "critic", critic_.network());
  return cp;
}

Agent Agent::FromCheckpoint(const nn::Checkpoint& checkpoint,
                            const RlConfig& config) {
  if (checkpoint.kind != "rla_agent") {
    throw ConfigError("checkpoint kind '" + checkpoint.kind +
                      "' is not rla_agent");
  }
  nn::Mlp policy = nn::ReadMlp(checkpoint, "policy", nn::Activation::kTanh);
  nn::Mlp critic = nn::ReadMlp(checkpoint, "critic", nn::Activation::kTanh);
  RlConfig cfg = config;
  cfg.hidden = policy.sizes()[1];
  Agent agent(policy.input_size(), cfg, 0);
  agent.policy_ = GaussianPolicy::FromNetwork(
      std::move(policy), checkpoint.Get("sigma_floor").data.at(0));
  agent.critic_ = Critic::FromNetwork(std::move(critic));
  return agent;
}

namespace {

// Everything that evolves during a rollout; copied for nested suffixes.
struct Cursor {
  int slot = 0;
  dual::LambdaState lambda;
  std::optional<fca::BetaTracker> tracker;
  Rng rng;
  std::vector<LedgerEntry> observed;
  std::vector<LedgerEntry> expected;
  double zero_coupon_estimate = 0.0;
};

struct Context {
  const Episode& episode;
  const Controller& controller;
  std::span<const double> coupons;
  const RlConfig& config;
  bool explore;
};

std::vector<double> BuildState(const Cursor& cur, const Context& ctx) {
  const double b = ctx.config.target_rate;
  const LedgerEntry so_far = Sum(cur.observed);
  const double scale = ctx.controller.gmv_scale;
  std::vector<double> s;
  s.reserve(StateSize(static_cast<int>(ctx.coupons.size())));
  s.push_back(static_cast<double>(cur.slot) / ctx.episode.num_slots());
  s.push_back(cur.lambda.lambda / ctx.controller.reference_lambda);
  s.push_back(so_far.gmv > 0.0 ? so_far.cost / so_far.gmv / b : 0.0);
  s.push_back((so_far.cost - b * so_far.gmv) / (b * scale));
  s.push_back(so_far.gmv / scale);
  s.push_back((so_far.completions - cur.zero_coupon_estimate) /
              std::max(so_far.cost, 1.0));
  if (cur.tracker) {
    for (double v : cur.tracker->Summary()) s.push_back(std::log1p(v));
  } else {
    s.resize(s.size() + 2 * ctx.coupons.size(), 0.0);
  }
  return s;
}

struct StepRecord {
  Transition transition;
  SlotTrace trace;
};

StepRecord StepSlot(Cursor& cur, const Context& ctx) {
  const Episode& ep = ctx.episode;
  const Controller& ctl = ctx.controller;
  const int t = cur.slot;
  StepRecord rec;
  rec.transition.state = BuildState(cur, ctx);
  double action = 1.0;
  if (ctl.policy != nullptr) {
    const PolicyOutput out = ctl.policy->Evaluate(rec.transition.state);
    action = out.mean;
    if (ctx.explore) {
      action += out.stddev * std::normal_distribution<double>()(cur.rng);
    }
    rec.transition.old_mean = out.mean;
    rec.transition.old_stddev = out.stddev;
    rec.transition.old_log_prob = GaussianPolicy::LogProb(action, out);
    ApplyAction(cur.lambda, action, ctx.config.eta);
  }
  rec.transition.action = action;

  const auto& orders = ep.orders(t);
  std::vector<int> clusters;
  int num_clusters = 1;
  if (cur.tracker) {
    clusters = ctl.clusterer->AssignAll(orders);
    num_clusters = ctl.clusterer->num_clusters();
  }
  dual::AllocationProblem problem;
  problem.completion = ctl.estimator->Estimate(
      ep, t, ctx.coupons, clusters, cur.tracker ? &*cur.tracker : nullptr,
      cur.rng);
  problem.base_price = Prices(orders);
  problem.coupons.assign(ctx.coupons.begin(), ctx.coupons.end());
  problem.budget_rate = ctx.config.target_rate;
  const std::vector<int> assignment =
      dual::AssignCoupons(problem, cur.lambda.lambda);
  const SlotOutcome outcome =
      ep.Step(t, assignment, ctx.coupons, clusters, num_clusters);
  if (cur.tracker && ctl.update_tracker) {
    cur.tracker->Update(outcome.in_range_count, outcome.order_count);
  }

  const std::vector<double> truth = ep.CompletionMatrix(t, ctx.coupons);
  cur.observed.push_back({static_cast<double>(outcome.completions),
                          outcome.cost, outcome.gmv});
  cur.expected.push_back(
      {SlotReward(truth, assignment),
       SlotPenalty(truth, problem.base_price, ctx.coupons, assignment),
       SlotGmv(truth, problem.base_price, assignment)});
  const size_t h = ctx.coupons.size();
  for (size_t i = 0; i < orders.size(); ++i) {
    cur.zero_coupon_estimate += problem.completion[i * h];
  }

  const LedgerEntry so_far = Sum(cur.observed);
  rec.trace.slot = t;
  rec.trace.lambda = cur.lambda.lambda;
  rec.trace.action = action;
  rec.trace.orders = static_cast<int>(orders.size());
  rec.trace.in_range_rate =
      orders.empty() ? 0.0
                     : static_cast<double>(outcome.in_range) / orders.size();
  rec.trace.cost_rate = so_far.gmv > 0.0 ? so_far.cost / so_far.gmv : 0.0;
  rec.trace.completions = outcome.completions;
  rec.trace.cost = outcome.cost;
  rec.trace.gmv = outcome.gmv;
  ++cur.slot;
  return rec;
}

struct HeldCache {
  std::vector<std::vector<int>> clusters;
  std::vector<std::vector<double>> prepared;
  std::vector<std::vector<double>> truth;
};

// Expected ledger of slots [from, T) run at a fixed lambda: slot `from` sees
// `first` and later slots the frozen `rest` tracker.
std::vector<LedgerEntry> HeldSuffix(const Context& ctx, const HeldCache& cache,
                                    double lambda, int from,
                                    const fca::BetaTracker* first,
                                    const fca::BetaTracker* rest, Rng& rng) {
  const Episode& ep = ctx.episode;
  std::vector<LedgerEntry> suffix;
  for (int k = from; k < ep.num_slots(); ++k) {
    const fca::BetaTracker* tracker = k == from ? first : rest;
    const auto& orders = ep.orders(k);
    dual::AllocationProblem problem;
    problem.completion = ctx.controller.estimator->Finish(
        cache.prepared[k],
        tracker ? std::span<const int>(cache.clusters[k])
                : std::span<const int>(),
        tracker, rng);
    problem.base_price = Prices(orders);
    problem.coupons.assign(ctx.coupons.begin(), ctx.coupons.end());
    problem.budget_rate = ctx.config.target_rate;
    const std::vector<int> assignment = dual::AssignCoupons(problem, lambda);
    const std::vector<double>& truth = cache.truth[k];
    suffix.push_back(
        {SlotReward(truth, assignment),
         SlotPenalty(truth, problem.base_price, ctx.coupons, assignment),
         SlotGmv(truth, problem.base_price, assignment)});
  }
  return suffix;
}

double ScoreSuffix(std::span<const LedgerEntry> past,
                   std::span<const LedgerEntry> future,
                   const EpisodeReference& reference, const RlConfig& config) {
  const double completions =
      Sum(past).completions + Sum(future).completions;
  double rate = 0.0;
  try {
    rate = ComputeCr(past, future, config.denominator);
  } catch (const UndefinedMetricError&) {
    rate = 0.0;
  }
  return FullAchievement(completions, reference.completions, rate,
                         config.target_rate);
}

}  // namespace

RolloutResult Rollout(const Episode& episode, const Controller& controller,
                      const EpisodeReference& reference,
                      std::span<const double> coupons, const RlConfig& config,
                      const RolloutOptions& options) {
  if (controller.estimator == nullptr) {
    throw ArgumentError("Rollout: controller has no estimator");
  }
  if (controller.initial_tracker != nullptr && controller.clusterer == nullptr) {
    throw ArgumentError("Rollout: tracking needs a clusterer");
  }
  if (!(controller.reference_lambda > 0.0) || !(reference.completions > 0.0)) {
    throw ArgumentError("Rollout: reference lambda and completions must be > 0");
  }
  const Context ctx{episode, controller, coupons, config, options.explore};
  Cursor cur;
  cur.lambda.lower = config.lower_factor * controller.reference_lambda;
  cur.lambda.upper = config.upper_factor * controller.reference_lambda;
  cur.lambda.lambda =
      std::clamp(options.start_lambda, cur.lambda.lower, cur.lambda.upper);
  if (controller.initial_tracker != nullptr) {
    cur.tracker = *controller.initial_tracker;
  }
  cur.rng = Rng(options.seed);

  const int num_slots = episode.num_slots();
  RolloutResult result;
  const bool held = config.held_lambda_suffix && !config.nested_rollouts &&
                    controller.policy != nullptr;
  HeldCache cache;
  if (held) {
    Rng rng = MakeRng(options.seed, {kStreamHeld});
    for (int k = 0; k < num_slots; ++k) {
      if (cur.tracker) {
        cache.clusters.push_back(
            controller.clusterer->AssignAll(episode.orders(k)));
      }
      cache.prepared.push_back(
          controller.estimator->Prepare(episode, k, coupons, rng));
      cache.truth.push_back(episode.CompletionMatrix(k, coupons));
    }
  }
  std::vector<std::vector<LedgerEntry>> nested_suffix;
  std::vector<std::vector<LedgerEntry>> mean_suffix;
  for (int t = 0; t < num_slots; ++t) {
    const dual::LambdaState lambda_before = cur.lambda;
    std::optional<fca::BetaTracker> tracker_before;
    if (held) tracker_before = cur.tracker;
    StepRecord rec = StepSlot(cur, ctx);
    if (options.tracker_csv != nullptr && cur.tracker) {
      cur.tracker->WriteCsv(*options.tracker_csv, t);
    }
    if (controller.policy != nullptr) {
      result.transitions.push_back(std::move(rec.transition));
      if (config.nested_rollouts) {
        Cursor inner = cur;
        inner.rng = MakeRng(options.seed, {kStreamNested, uint64_t(t)});
        while (inner.slot < num_slots) StepSlot(inner, ctx);
        nested_suffix.emplace_back(inner.observed.begin() + t + 1,
                                   inner.observed.end());
      } else if (held) {
        const fca::BetaTracker* first =
            tracker_before ? &*tracker_before : nullptr;
        const fca::BetaTracker* rest = cur.tracker ? &*cur.tracker : nullptr;
        const uint64_t stream = MakeRng(options.seed, {kStreamHeld,
                                                       uint64_t(t) + 1})();
        Rng rng(stream);
        nested_suffix.push_back(HeldSuffix(ctx, cache, cur.lambda.lambda, t,
                                           first, rest, rng));
        if (config.paired_baseline) {
          dual::LambdaState at_mean = lambda_before;
          ApplyAction(at_mean, result.transitions.back().old_mean,
                      config.eta);
          Rng paired(stream);
          mean_suffix.push_back(
              HeldSuffix(ctx, cache, at_mean.lambda, t, first, rest, paired));
        }
      }
    }
    result.trace.push_back(rec.trace);
  }
  result.totals = Sum(cur.observed);
  result.expected_totals = Sum(cur.expected);

  const std::span<const LedgerEntry> observed(cur.observed);
  const std::span<const LedgerEntry> expected(cur.expected);
  for (size_t t = 0; t < result.transitions.size(); ++t) {
    if (config.nested_rollouts) {
      result.transitions[t].full_achievement = ScoreSuffix(
          observed.first(t + 1), nested_suffix[t], reference, config);
    } else if (held) {
      result.transitions[t].full_achievement =
          ScoreSuffix(observed.first(t), nested_suffix[t], reference, config);
      if (!mean_suffix.empty()) {
        result.transitions[t].baseline =
            ScoreSuffix(observed.first(t), mean_suffix[t], reference, config);
      }
    } else {
      result.transitions[t].full_achievement = ScoreSuffix(
          observed.first(t), expected.subspan(t), reference, config);
    }
  }
  return result;
}

std::vector<EpisodeStats> TrainAgent(Agent& agent, Controller controller,
                                     std::span<const double> coupons,
                                     const TrainingOptions& options) {
  const RlConfig& config = agent.config();
  controller.policy = &agent.policy();
  Rng start_rng = MakeRng(options.seed, {kStreamTrainStart});
  Rng update_rng = MakeRng(options.seed, {kStreamUpdate, 1});
  std::uniform_real_distribution<double> jitter(-config.start_perturbation,
                                                config.start_perturbation);
  std::vector<EpisodeStats> curve;
  std::vector<Transition> buffer;
  for (int k = 1; k <= options.episodes; ++k) {
    const uint64_t episode_seed =
        DeriveSeed(options.seed, {kStreamTrainEpisode, uint64_t(k)});
    ScenarioConfig scene = options.scene;
    if (options.burn_in_slots > 0) {
      const Episode burn_in(scene, DeriveSeed(episode_seed, {0}),
                            options.burn_in_slots);
      scene.initial_multipliers =
          burn_in.multipliers(options.burn_in_slots - 1);
    }
    const Episode episode(scene, episode_seed, options.num_slots);
    const EpisodeReference reference =
        SolveReference(episode, coupons, config.target_rate);
    RolloutOptions ro;
    ro.start_lambda = controller.reference_lambda * (1.0 + jitter(start_rng));
    ro.explore = true;
    ro.seed = DeriveSeed(options.seed, {kStreamTrainRollout, uint64_t(k)});
    RolloutResult result =
        Rollout(episode, controller, reference, coupons, config, ro);
    buffer.insert(buffer.end(),
                  std::make_move_iterator(result.transitions.begin()),
                  std::make_move_iterator(result.transitions.end()));

    EpisodeStats stats;
    stats.episode = k;
    const LedgerEntry& tot = result.totals;
    const double rate = tot.gmv > 0.0 ? tot.cost / tot.gmv : 0.0;
    stats.rlr = bench::MetricRlr(tot.completions, reference.completions, rate,
                                 config.target_rate);
    stats.cre = tot.gmv > 0.0
                    ? bench::MetricCre(tot.cost, tot.gmv, config.target_rate).error
                    : std::nan("");
    const LedgerEntry zero = ZeroCouponTotals(episode, coupons);
    try {
      stats.froi = bench::MetricFroi(
          tot.completions, zero.completions, tot.cost,
          tot.completions > 0 ? tot.gmv / tot.completions : 0.0,
          zero.completions > 0 ? zero.gmv / zero.completions : 0.0);
    } catch (const UndefinedMetricError&) {
      stats.froi = std::nan("");
    }
    curve.push_back(stats);

    if (k % config.episodes_per_update == 0 || k == options.episodes) {
      agent.Update(buffer, update_rng);
      buffer.clear();
    }
    if (options.on_episode) options.on_episode(curve.back(), agent);
  }
  return curve;
}

void WriteCurveCsvHeader(std::ostream& out) {
  out << "episode,rlr,cre,froi\n";
}

void WriteCurveCsvRow(std::ostream& out, const EpisodeStats& stats) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g\n", stats.episode,
                stats.rlr, stats.cre, stats.froi);
  out << buf;
}

}  // namespace ridegym::rla
