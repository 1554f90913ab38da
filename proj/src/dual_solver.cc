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

#include "ridegym/dual_solver.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <string>

#include "ridegym/common.h"
#include "ridegym/kernels.h"

namespace ridegym::dual {
namespace {

constexpr double kFeasibilitySlack = 1e-12;

double DualValueUnchecked(const AllocationProblem& problem, double lambda,
                          std::vector<double>& scores,
                          std::vector<int>& argmin) {
  kernels::RowMinimaParallel(problem.completion, problem.base_price,
                             problem.coupons, problem.budget_rate, lambda,
                             scores, argmin);
  double total = 0.0;
  for (double s : scores) total += s;
  return total;
}

}  // namespace

void AllocationProblem::Validate() const {
  const size_t n = base_price.size();
  const size_t h = coupons.size();
  if (h == 0) throw ArgumentError("allocation problem needs at least one coupon");
  if (completion.size() != n * h) {
    throw ArgumentError("completion matrix must be N x H");
  }
  if (!(budget_rate > 0.0 && budget_rate <= 1.0)) {
    throw ArgumentError("budget rate must lie in (0, 1]");
  }
  if (coupons[0] != 0.0) throw ArgumentError("coupon set must start at d = 0");
  for (size_t j = 0; j < h; ++j) {
    if (!(coupons[j] >= 0.0 && coupons[j] <= 1.0)) {
      throw ArgumentError("coupon levels must lie in [0, 1]");
    }
    if (j > 0 && !(coupons[j] > coupons[j - 1])) {
      throw ArgumentError("coupon levels must be strictly increasing");
    }
  }
  for (double g : base_price) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw ArgumentError("base prices must be positive and finite");
    }
  }
  for (double z : completion) {
    if (!std::isfinite(z) || z < 0.0 || z > 1.0) {
      throw ArgumentError("completion probabilities must lie in [0, 1]");
    }
  }
}

AssignmentTotals Evaluate(const AllocationProblem& problem,
                          std::span<const int> assignment) {
  if (static_cast<int>(assignment.size()) != problem.num_opportunities()) {
    throw ArgumentError("assignment must cover every opportunity");
  }
  AssignmentTotals totals;
  for (int i = 0; i < problem.num_opportunities(); ++i) {
    const int j = assignment[i];
    if (j < 0 || j >= problem.num_coupons()) {
      throw ArgumentError("coupon index out of range");
    }
    const double z = problem.z(i, j);
    const double g = problem.base_price[i];
    totals.completions += z;
    totals.cost += g * z * problem.coupons[j];
    totals.gmv += g * z;
  }
  return totals;
}

bool IsBudgetFeasible(const AllocationProblem& problem,
                      std::span<const int> assignment) {
  const AssignmentTotals t = Evaluate(problem, assignment);
  return t.cost - problem.budget_rate * t.gmv <= kFeasibilitySlack;
}

double DecisionScore(double z, double g, double d, double budget_rate,
                     double lambda) {
  return kernels::DecisionScore(z, g, d, budget_rate, lambda);
}

int OptimalCoupon(const AllocationProblem& problem, int i, double lambda) {
  if (i < 0 || i >= problem.num_opportunities()) {
    throw ArgumentError("opportunity index out of range");
  }
  const double g = problem.base_price[i];
  double best = DecisionScore(problem.z(i, 0), g, problem.coupons[0],
                              problem.budget_rate, lambda);
  int best_j = 0;
  for (int j = 1; j < problem.num_coupons(); ++j) {
    const double s = DecisionScore(problem.z(i, j), g, problem.coupons[j],
                                   problem.budget_rate, lambda);
    if (s < best) {
      best = s;
      best_j = j;
    }
  }
  return best_j;
}

std::vector<int> AssignCoupons(const AllocationProblem& problem,
                               double lambda) {
  problem.Validate();
  std::vector<double> scores(problem.num_opportunities());
  std::vector<int> argmin(problem.num_opportunities());
  kernels::RowMinimaParallel(problem.completion, problem.base_price,
                             problem.coupons, problem.budget_rate, lambda,
                             scores, argmin);
  return argmin;
}

double DualValue(const AllocationProblem& problem, double lambda) {
  problem.Validate();
  std::vector<double> scores(problem.num_opportunities());
  std::vector<int> argmin(problem.num_opportunities());
  return DualValueUnchecked(problem, lambda, scores, argmin);
}

double DefaultLambdaUpperBound(const AllocationProblem& problem) {
  double min_g = std::numeric_limits<double>::infinity();
  for (double g : problem.base_price) min_g = std::min(min_g, g);
  double min_d = 1.0;
  for (double d : problem.coupons) {
    if (d > 0.0) min_d = std::min(min_d, d);
  }
  if (!std::isfinite(min_g)) min_g = 1.0;
  return 10.0 / (problem.budget_rate * min_g * min_d);
}

double TernarySearchLambda(const AllocationProblem& problem, double lb,
                           double ub, double tol) {
  problem.Validate();
  if (!(lb < ub)) throw ArgumentError("ternary search needs lb < ub");
  if (!(tol > 0.0)) throw ArgumentError("ternary search needs tol > 0");
  if (!std::isfinite(lb) || !std::isfinite(ub)) {
    throw NumericError("ternary search bounds must be finite");
  }
  std::vector<double> scores(problem.num_opportunities());
  std::vector<int> argmin(problem.num_opportunities());
  auto dual = [&](double lambda) {
    const double v = DualValueUnchecked(problem, lambda, scores, argmin);
    if (!std::isfinite(v)) throw NumericError("non-finite dual value");
    return v;
  };
  double lo = lb;
  double hi = ub;
  while (hi - lo > tol) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (dual(m1) < dual(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return lo;
}

double SolveLambda(const AllocationProblem& problem, double tol) {
  problem.Validate();
  return TernarySearchLambda(problem, 0.0, DefaultLambdaUpperBound(problem),
                             tol);
}

OracleResult BruteForceOracle(const AllocationProblem& problem) {
  problem.Validate();
  const int n = problem.num_opportunities();
  const int h = problem.num_coupons();
  if (std::pow(static_cast<double>(h), n) > kMaxOracleAssignments) {
    throw SizeError("brute-force oracle limited to H^N <= 1e7 assignments");
  }
  std::vector<int> current(n, 0);
  OracleResult best;
  best.completions = -std::numeric_limits<double>::infinity();
  while (true) {
    double completions = 0.0;
    double cost = 0.0;
    double gmv = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = problem.z(i, current[i]);
      const double g = problem.base_price[i];
      completions += z;
      cost += g * z * problem.coupons[current[i]];
      gmv += g * z;
    }
    if (cost - problem.budget_rate * gmv <= kFeasibilitySlack &&
        completions > best.completions) {
      best.completions = completions;
      best.assignment = current;
    }
    int pos = n - 1;
    while (pos >= 0 && ++current[pos] == h) {
      current[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return best;
}

uint64_t InstanceHash(const AllocationProblem& problem) {
  uint64_t h = Mix64(static_cast<uint64_t>(problem.num_opportunities()) << 32 |
                     static_cast<uint64_t>(problem.num_coupons()));
  auto absorb = [&h](double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    h = Mix64(h ^ bits);
  };
  for (double v : problem.completion) absorb(v);
  for (double v : problem.base_price) absorb(v);
  for (double v : problem.coupons) absorb(v);
  absorb(problem.budget_rate);
  return h;
}

void WriteOracleCsvHeader(std::ostream& out) {
  out << "instance_hash,lambda_star,primal,dual\n";
}

void WriteOracleCsvRow(std::ostream& out, const AllocationProblem& problem,
                       double lambda_star, double primal, double dual) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%016llx,%.12g,%.12g,%.12g\n",
                static_cast<unsigned long long>(InstanceHash(problem)),
                lambda_star, primal, dual);
  out << buf;
}

}  // namespace ridegym::dual
