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

// Acceptance suite: one PASS/FAIL line per criterion with its runtime.
// Exit status is the number of failed criteria.
//
//   acceptance_test            all criteria
//   acceptance_test 1 3 10     a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dual_oracles.h"
#include "grad_check.h"
#include "ridegym/bench.h"
#include "ridegym/dual_solver.h"
#include "ridegym/estimators.h"
#include "ridegym/fca.h"
#include "ridegym/metrics.h"
#include "ridegym/rla.h"
#include "ridegym/simulator.h"
#include "stats_oracles.h"

namespace ridegym {
namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, double a, double b = 0.0, double c = 0.0,
                   double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

ScenarioConfig Scene(int n) {
  return LoadScenario(std::string(RIDEGYM_SCENES_DIR) + "/scene" +
                      std::to_string(n) + ".json");
}

const std::vector<uint64_t> kFiveSeeds = {1, 2, 3, 4, 5};

// ---------------------------------------------------------------- 1

// Every lambda at which some row's minimizing coupon can change.
std::vector<double> Breakpoints(const dual::AllocationProblem& p) {
  std::vector<double> out = {0.0};
  for (int i = 0; i < p.num_opportunities(); ++i) {
    for (int a = 0; a < p.num_coupons(); ++a) {
      for (int b = a + 1; b < p.num_coupons(); ++b) {
        const double sa = testing::Slack(p, i, a);
        const double sb = testing::Slack(p, i, b);
        if (sa == sb) continue;
        const double lambda = (p.z(i, a) - p.z(i, b)) / (sa - sb);
        if (std::isfinite(lambda) && lambda > 0.0) out.push_back(lambda);
      }
    }
  }
  return out;
}

Verdict DualitySuite() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size_n(1, 6);
  std::uniform_int_distribution<int> size_h(1, 3);
  std::uniform_real_distribution<double> budget(0.01, 0.15);
  long checked = 0, violations = 0, concavity_failures = 0, search_failures = 0;
  double worst_gap = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    const dual::AllocationProblem p =
        testing::RandomProblem(rng, size_n(rng), size_h(rng), budget(rng));
    const double ub = dual::DefaultLambdaUpperBound(p);
    std::uniform_real_distribution<double> lam(0.0, ub);

    // Weak duality: q(lambda) <= -completions of every feasible assignment.
    std::vector<double> lambdas = {0.0, ub};
    for (int k = 0; k < 8; ++k) lambdas.push_back(lam(rng));
    for (double lambda : lambdas) {
      const double q = testing::ReferenceDual(p, lambda);
      const double q_lib = dual::DualValue(p, lambda);
      testing::ForEachAssignment(
          p.num_opportunities(), p.num_coupons(), [&](const std::vector<int>& v) {
            double completions = 0.0, slack = 0.0;
            for (int i = 0; i < p.num_opportunities(); ++i) {
              completions += p.z(i, v[i]);
              slack += testing::Slack(p, i, v[i]);
            }
            if (slack > 0.0) return;
            ++checked;
            if (q > -completions + 1e-9 || q_lib > -completions + 1e-9) {
              ++violations;
            }
          });
    }

    // Concavity along random triples.
    for (int k = 0; k < 20; ++k) {
      double x[3] = {lam(rng), lam(rng), lam(rng)};
      std::sort(x, x + 3);
      if (x[2] - x[0] <= 0.0) continue;
      const double w = (x[2] - x[1]) / (x[2] - x[0]);
      const double chord =
          w * dual::DualValue(p, x[0]) + (1.0 - w) * dual::DualValue(p, x[2]);
      if (dual::DualValue(p, x[1]) < chord - 1e-9) ++concavity_failures;
    }

    // Ternary search against a 10^5-point grid and the exact breakpoint max.
    const double lambda_star = dual::TernarySearchLambda(p, 0.0, ub);
    const double q_star = dual::DualValue(p, lambda_star);
    double grid_best = -std::numeric_limits<double>::infinity();
    const int points = 100000;
    for (int k = 0; k <= points; ++k) {
      grid_best = std::max(grid_best, testing::ReferenceDual(p, ub * k / points));
    }
    double exact_best = -std::numeric_limits<double>::infinity();
    for (double b : Breakpoints(p)) {
      if (b <= ub) exact_best = std::max(exact_best, testing::ReferenceDual(p, b));
    }
    exact_best = std::max(exact_best, testing::ReferenceDual(p, ub));
    const double gap = std::max(grid_best - q_star, exact_best - q_star);
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-6) ++search_failures;
  }
  Verdict v;
  v.pass = violations == 0 && concavity_failures == 0 && search_failures == 0 &&
           checked > 0;
  v.detail = Format("%.0f feasible pairs, %.0f duality violations, %.0f "
                    "concavity failures, worst dual gap %.2e",
                    checked, violations, concavity_failures, worst_gap);
  return v;
}

// ---------------------------------------------------------------- 2

Verdict DecisionRule() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> size_h(1, 6);
  std::uniform_real_distribution<double> lam(0.0, 5.0);
  std::uniform_real_distribution<double> budget(0.01, 0.2);
  int mismatches = 0;
  const int rows = 10000;
  for (int r = 0; r < rows; ++r) {
    const dual::AllocationProblem p =
        testing::RandomProblem(rng, 1, size_h(rng), budget(rng));
    const double lambda = lam(rng);
    const double g = p.base_price[0], b = p.budget_rate;
    int best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (int j = 0; j < p.num_coupons(); ++j) {
      const double d = p.coupons[j];
      const double score = p.z(0, j) * (lambda * g * d - lambda * g * b - 1.0);
      if (score < best_score) {
        best_score = score;
        best = j;
      }
    }
    if (dual::OptimalCoupon(p, 0, lambda) != best) ++mismatches;
  }
  return {mismatches == 0,
          Format("%.0f rows, %.0f mismatches", rows, mismatches)};
}

// ---------------------------------------------------------------- 3

Verdict Conjugacy() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> prior(0.01, 50.0);
  std::uniform_int_distribution<int> count(0, 1000);
  int closed_form = 0, windowed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = prior(rng), b = prior(rng);
    const int n = count(rng);
    const int k = std::uniform_int_distribution<int>(0, n)(rng);
    const auto [pa, pb] = fca::ConjugateUpdate(a, b, k, n);
    if (pa != k + a || pb != (n - k) + b) ++closed_form;

    // A unit window keeps only the latest tally, so after every slot the
    // tracker equals the one-step update of its prior.
    fca::BetaTracker t = fca::BetaTracker::Uniform(1, 1, a, b, 1);
    for (int slot = 0; slot < 4; ++slot) {
      const int m = count(rng);
      const int j = std::uniform_int_distribution<int>(0, m)(rng);
      t.Update(std::vector<int>{j}, std::vector<int>{m});
      if (m == 0) continue;
      const auto [ea, eb] = fca::ConjugateUpdate(a, b, j, m);
      if (t.alpha(0, 0) != ea || t.beta(0, 0) != eb) ++windowed;
    }
  }
  return {closed_form == 0 && windowed == 0,
          Format("1000 pairs, %.0f closed-form mismatches, %.0f unit-window "
                 "mismatches",
                 closed_form, windowed)};
}

// ---------------------------------------------------------------- 4

Verdict OrderStatistic() {
  // i.i.d. log-normal quotes for all M = 5 providers, K = 2.
  ScenarioConfig c;
  c.competitor_distance_slopes.clear();
  c.own_quote_noise = c.quote_noise;
  c.orders_per_slot = 24 * 10000;
  c.order_count_mixture = {{1.0, 12.0, 1e6}};
  Rng rng(404);
  const std::vector<Opportunity> orders = GenerateSlotOrders(c, 0, rng);
  std::vector<double> stat;
  for (const Opportunity& o : orders) {
    std::vector<double> q = {o.base_price * o.own_price_factor};
    q.insert(q.end(), o.competitor_quotes.begin(), o.competitor_quotes.end());
    std::nth_element(q.begin(), q.begin() + 1, q.end());
    stat.push_back(NormalCdf(std::log(q[1] / o.base_price) / c.quote_noise));
  }
  const double d = testing::KsStatistic(
      stat, [](double x) { return testing::BetaCdfInteger(x, 2, 4); });
  const double critical = testing::KsCritical01(stat.size());
  return {stat.size() == 10000 && d < critical,
          Format("n=%.0f, KS D=%.4f, critical %.4f", stat.size(), d, critical)};
}

// ---------------------------------------------------------------- 5

Verdict OptBudgetControl() {
  const bench::ExperimentConfig config;
  const bench::ExperimentResult r = bench::RunExperiment(
      {Scene(1)}, {bench::Method::kOpt}, kFiveSeeds, config);
  const std::vector<bench::SummaryRow> rows = bench::Summarize(r.runs);
  if (!r.failures.empty() || rows.size() != 1 || rows[0].seeds != 5) {
    return {false, "experiment failed"};
  }
  return {rows[0].cre_mean <= 0.005,
          Format("scene1 OPT CRE mean %.5f (sd %.5f) <= 0.005", rows[0].cre_mean,
                 rows[0].cre_sd)};
}

// ---------------------------------------------------------------- 6, 7

struct Adaptation {
  Verdict direction;
  Verdict window;
};

const bench::SummaryRow* Find(const std::vector<bench::SummaryRow>& rows,
                              const std::string& method,
                              const std::string& scene, int window = -1) {
  for (const bench::SummaryRow& s : rows) {
    if (s.method == method && s.scene == scene &&
        (window < 0 || s.window == window)) {
      return &s;
    }
  }
  return nullptr;
}

Adaptation AdaptationRun() {
  const bench::ExperimentConfig config;
  const std::vector<ScenarioConfig> scenes = {Scene(2), Scene(3)};
  const bench::ExperimentResult main = bench::RunExperiment(
      scenes,
      {bench::Method::kPdmA, bench::Method::kPdmS, bench::Method::kFcaRl,
       bench::Method::kRlNoFca},
      kFiveSeeds, config);
  const bench::ExperimentResult unit_window =
      bench::RunWindowSweep(scenes[1], {1}, kFiveSeeds, config);
  Adaptation out;
  if (!main.failures.empty() || !unit_window.failures.empty()) {
    out.direction = {false, "experiment cells failed: " +
                                (main.failures.empty()
                                     ? unit_window.failures[0].message
                                     : main.failures[0].message)};
    out.window = out.direction;
    return out;
  }
  const std::vector<bench::SummaryRow> rows = bench::Summarize(main.runs);
  const std::vector<bench::SummaryRow> sweep = bench::Summarize(unit_window.runs);
  const auto* a3 = Find(rows, "pdm-a", "scene3");
  const auto* s3 = Find(rows, "pdm-s", "scene3");
  const auto* f3 = Find(rows, "fca-rl", "scene3");
  const auto* n3 = Find(rows, "rl-nofca", "scene3");
  const auto* s2 = Find(rows, "pdm-s", "scene2");
  const auto* f2 = Find(rows, "fca-rl", "scene2");
  const auto* w1 = Find(sweep, "fca-rl", "scene3", 1);

  const bool order = f3->cre_mean < s3->cre_mean && s3->cre_mean < a3->cre_mean;
  const bool ablation = f3->cre_mean <= n3->cre_mean;
  const bool rlr = f2->rlr_mean > s2->rlr_mean && f3->rlr_mean > s3->rlr_mean;
  out.direction.pass = order && ablation && rlr;
  out.direction.detail =
      Format("scene3 CRE fca-rl %.4f, pdm-s %.4f, pdm-a %.4f", f3->cre_mean,
             s3->cre_mean, a3->cre_mean) +
      Format(", rl-nofca %.4f; ", n3->cre_mean) +
      Format("RLR fca-rl/pdm-s scene2 %.3f/%.3f, scene3 %.3f/%.3f", f2->rlr_mean,
             s2->rlr_mean, f3->rlr_mean, s3->rlr_mean) +
      (order ? "" : " [ordering violated]") +
      (ablation ? "" : " [fca-rl above rl-nofca]") +
      (rlr ? "" : " [fca-rl RLR not above pdm-s]");
  out.window.pass = f3->cre_mean <= w1->cre_mean;
  out.window.detail = Format("scene3 fca-rl CRE l=%.0f %.4f, l=1 %.4f",
                             config.window, f3->cre_mean, w1->cre_mean);
  return out;
}

// ---------------------------------------------------------------- 8

Verdict GradientChecks() {
  Rng rng(808);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 4);
  std::uniform_int_distribution<int> coin(0, 1);
  const double coupons[] = {0.0, 0.05, 0.1, 0.15, 0.2};

  std::vector<est::Sample> data(64);
  for (est::Sample& s : data) {
    for (double& f : s.x) f = normal(rng);
    s.treatment = 10.0 * coupons[pick(rng)];
    s.label = coin(rng);
  }
  double logistic = 0.0;
  est::LogisticUpliftModel model;
  model.standardizer() = est::Standardizer::Fit(data);
  for (int point = 0; point < 100; ++point) {
    for (double& p : model.params()) p = normal(rng);
    std::vector<double> grad(est::LogisticUpliftModel::kNumParams, 0.0);
    model.Loss(data, grad);
    logistic = std::max(logistic,
                        testing::MaxGradientError(model.params(), grad, [&] {
                          return model.Loss(data);
                        }));
  }

  auto random_batch = [&](int size, int state_size) {
    std::vector<rla::Transition> batch(size);
    for (rla::Transition& tr : batch) {
      tr.state.resize(state_size);
      for (double& v : tr.state) v = normal(rng);
      tr.old_mean = 1.0 + 0.2 * normal(rng);
      tr.old_stddev = 0.1 + std::abs(0.2 * normal(rng));
      tr.action = tr.old_mean + tr.old_stddev * normal(rng);
      tr.old_log_prob = rla::GaussianPolicy::LogProb(
          tr.action, {tr.old_mean, tr.old_stddev});
      tr.full_achievement = normal(rng);
    }
    return batch;
  };

  rla::RlConfig config;
  config.hidden = 8;
  double critic_error = 0.0;
  for (int point = 0; point < 100; ++point) {
    rla::Critic critic(3, config, rng);
    const std::vector<rla::Transition> batch = random_batch(4, 3);
    std::vector<double> grad(critic.network().num_params(), 0.0);
    rla::CriticLoss(critic, batch, grad);
    critic_error = std::max(
        critic_error, testing::MaxGradientError(critic.network().params(), grad,
                                                [&] {
                                                  return rla::CriticLoss(critic,
                                                                         batch);
                                                }));
  }

  double ppo_error = 0.0;
  std::normal_distribution<double> small(0.0, 0.3);
  for (int point = 0; point < 100; ++point) {
    rla::GaussianPolicy policy(4, config, rng);
    for (double& p : policy.network().params()) p += small(rng);
    std::vector<rla::Transition> batch = random_batch(4, 4);
    for (rla::Transition& tr : batch) {
      const rla::PolicyOutput out = policy.Evaluate(tr.state);
      tr.old_mean = out.mean + 0.05 * normal(rng);
      tr.old_stddev = out.stddev * (1.0 + 0.05 * std::abs(normal(rng)));
      tr.action = tr.old_mean + tr.old_stddev * normal(rng);
      tr.old_log_prob =
          rla::GaussianPolicy::LogProb(tr.action, {tr.old_mean, tr.old_stddev});
    }
    std::vector<double> adv(4);
    for (double& a : adv) a = normal(rng);
    std::vector<double> grad(policy.network().num_params(), 0.0);
    rla::PolicyLoss(policy, batch, adv, 0.2, grad);
    ppo_error = std::max(
        ppo_error, testing::MaxGradientError(policy.network().params(), grad, [&] {
          return rla::PolicyLoss(policy, batch, adv, 0.2);
        }));
  }
  return {logistic < 1e-4 && critic_error < 1e-4 && ppo_error < 1e-4,
          Format("max relative error: logistic %.2e, critic %.2e, PPO %.2e",
                 logistic, critic_error, ppo_error)};
}

// ---------------------------------------------------------------- 9

std::string ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict Determinism() {
  bench::ExperimentConfig config;
  config.rl_episodes = 8;
  const std::vector<ScenarioConfig> scenes = {Scene(3)};
  const std::vector<bench::Method> methods = {
      bench::Method::kOpt, bench::Method::kPdmA, bench::Method::kPdmS,
      bench::Method::kFcaRl, bench::Method::kRlNoFca};
  const auto root = std::filesystem::temp_directory_path() / "ridegym-accept";
  std::filesystem::remove_all(root);
  for (const char* run : {"a", "b"}) {
    bench::WriteExperiment(
        (root / run).string(),
        bench::RunExperiment(scenes, methods, {1}, config));
  }
  int files = 0, differing = 0;
  for (const auto& entry : std::filesystem::directory_iterator(root / "a")) {
    ++files;
    const auto other = root / "b" / entry.path().filename();
    if (!std::filesystem::exists(other) ||
        ReadAll(entry.path()) != ReadAll(other)) {
      ++differing;
    }
  }
  const auto count = [](const std::filesystem::path& dir) {
    return std::distance(std::filesystem::directory_iterator(dir),
                         std::filesystem::directory_iterator());
  };
  if (count(root / "b") != files) ++differing;
  return {files > 0 && differing == 0,
          Format("%.0f CSV files compared, %.0f differ", files, differing)};
}

// ---------------------------------------------------------------- 10

Verdict MetricIdentities() {
  int failures = 0;
  auto expect = [&](bool ok) { failures += ok ? 0 : 1; };
  // Ledger: cost 5 on GMV 100 against 4%.
  const bench::CreResult over = bench::MetricCre(5.0, 100.0, 0.04);
  expect(over.error == 0.05 - 0.04 && over.direction == bench::Direction::kOver);
  const bench::CreResult on = bench::MetricCre(4.0, 100.0, 0.04);
  expect(on.error == 0.0 && on.direction == bench::Direction::kUnder);
  // F - F0 = 10 on C = 20 with A0 / A = 10 / 9.
  expect(bench::MetricFroi(110, 100, 20, 9, 10) == 10.0 / ((10.0 / 9.0) * 20.0));
  expect(bench::MetricFroi(110, 100, 20, 7, 7) == 0.5);
  expect(bench::MetricFroi(50, 50, 10, 9, 10) == 0.0);
  expect(bench::MetricRlr(100, 100, 0.05, 0.05) == 1.0);
  expect(bench::MetricRlr(60, 100, 0.01, 0.05) == 0.6);
  expect(bench::MetricRlr(100, 100, 0.1875, 0.125) == 1.0 - (std::exp(0.5) - 1.0));
  // Full achievement at twice the target: 1 - (e - 1).
  expect(rla::FullAchievement(80, 80, 0.1, 0.05) == 1.0 - (std::exp(1.0) - 1.0));
  // Constant per-slot spend 1 on GMV 20 gives 5% at every split point.
  const std::vector<rla::LedgerEntry> ledger(6, {1.0, 1.0, 20.0});
  const std::span<const rla::LedgerEntry> all(ledger);
  for (size_t t = 0; t <= ledger.size(); ++t) {
    expect(rla::ComputeCr(all.first(t), all.subspan(t),
                          rla::RateDenominator::kGmv) == 0.05);
  }
  int threw = 0;
  try {
    bench::MetricCre(1.0, 0.0, 0.05);
  } catch (const UndefinedMetricError&) {
    ++threw;
  }
  try {
    bench::MetricFroi(1, 1, 0, 1, 1);
  } catch (const UndefinedMetricError&) {
    ++threw;
  }
  expect(threw == 2);
  return {failures == 0, Format("%.0f identity failures", failures)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // <= 0: no stated limit
  std::function<Verdict()> run;
};

}  // namespace
}  // namespace ridegym

int main(int argc, char** argv) {
  using namespace ridegym;
  std::set<int> wanted;
  for (int k = 1; k < argc; ++k) wanted.insert(std::atoi(argv[k]));
  auto selected = [&](int id) { return wanted.empty() || wanted.contains(id); };

  int failed = 0;
  auto report = [&](int id, const char* name, const Verdict& v, double seconds,
                    double limit, const char* note = "") {
    const bool in_time = limit <= 0.0 || seconds <= limit;
    const bool pass = v.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s  [%2d] %s: %s%s (%.2f s%s%s)\n", pass ? "PASS" : "FAIL", id,
                name, v.detail.c_str(), in_time ? "" : " [over time limit]",
                seconds,
                limit > 0.0 ? Format(", limit %.0f s", limit).c_str() : "", note);
    std::fflush(stdout);
  };
  auto timed = [](const std::function<Verdict()>& fn, double& seconds) {
    const auto start = Clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return v;
  };

  const std::vector<Criterion> simple = {
      {1, "Duality suite", 30, DualitySuite},
      {2, "Decision-rule optimality", 5, DecisionRule},
      {3, "Conjugacy suite", 5, Conjugacy},
      {4, "Order-statistic law", 10, OrderStatistic},
      {5, "Budget control at optimum", 120, OptBudgetControl},
  };
  for (const Criterion& c : simple) {
    if (!selected(c.id)) continue;
    double seconds = 0.0;
    const Verdict v = timed(c.run, seconds);
    report(c.id, c.name, v, seconds, c.limit_seconds);
  }

  if (selected(6) || selected(7)) {
    Adaptation a;
    double seconds = 0.0;
    timed(
        [&] {
          try {
            a = AdaptationRun();
          } catch (const std::exception& e) {
            a.direction = {false, std::string("threw: ") + e.what()};
            a.window = a.direction;
          }
          return Verdict{true, ""};
        },
        seconds);
    if (selected(6)) {
      report(6, "Adaptation direction", a.direction, seconds, 1800);
    }
    if (selected(7)) {
      report(7, "Window-size trend", a.window, seconds, 1800,
             ", shared with 6");
    }
  }

  const std::vector<Criterion> rest = {
      {8, "Gradient checks", 30, GradientChecks},
      {9, "Determinism", 0, Determinism},
      {10, "Metric identities", 1, MetricIdentities},
  };
  for (const Criterion& c : rest) {
    if (!selected(c.id)) continue;
    double seconds = 0.0;
    const Verdict v = timed(c.run, seconds);
    report(c.id, c.name, v, seconds, c.limit_seconds);
  }
  return failed;
}
