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

// Budget-rate constrained coupon allocation solved through its Lagrangian
// dual.
//
// Problem data:
// * z_ij: completion probability of opportunity i under coupon j.
// * g_i: base price of opportunity i.
// * d_j: coupon levels, strictly increasing, d_0 = 0.
// * B: budget rate.
//
// Formulation (one coupon per opportunity, v_ij in {0,1}):
//   min  -sum(z_ij v_ij)
//   s.t. sum(g_i z_ij v_ij d_j) <= B * sum(g_i z_ij v_ij).
//
// Relaxing the budget constraint with multiplier lambda >= 0 decomposes the
// inner minimization per opportunity:
//   q(lambda) = sum_i min_j z_ij (lambda g_i d_j - lambda g_i B - 1),
// which is concave and piecewise linear in lambda. The dual is maximized by
// ternary search; for a fixed lambda the per-row argmin is the decision rule.

#ifndef RIDEGYM_DUAL_SOLVER_H_
#define RIDEGYM_DUAL_SOLVER_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace ridegym::dual {

struct AllocationProblem {
  std::vector<double> completion;  // N x H, row-major
  std::vector<double> base_price;  // N
  std::vector<double> coupons;     // H
  double budget_rate = 0.05;

  int num_opportunities() const { return static_cast<int>(base_price.size()); }
  int num_coupons() const { return static_cast<int>(coupons.size()); }
  double z(int i, int j) const {
    return completion[static_cast<size_t>(i) * coupons.size() + j];
  }

  // Throws ArgumentError when shapes or value ranges are inconsistent.
  void Validate() const;
};

// Multiplier plus its bounds and the previous change margin used to damp
// successive updates.
struct LambdaState {
  double lambda = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  double prev_delta = 0.0;
};

struct AssignmentTotals {
  double completions = 0.0;
  double cost = 0.0;
  double gmv = 0.0;
};

AssignmentTotals Evaluate(const AllocationProblem& problem,
                          std::span<const int> assignment);
bool IsBudgetFeasible(const AllocationProblem& problem,
                      std::span<const int> assignment);

double DecisionScore(double z, double g, double d, double budget_rate,
                     double lambda);

// argmin_j of the decision score for row i; ties go to the cheaper coupon.
int OptimalCoupon(const AllocationProblem& problem, int i, double lambda);

// Decision rule applied to every row.
std::vector<int> AssignCoupons(const AllocationProblem& problem,
                               double lambda);

double DualValue(const AllocationProblem& problem, double lambda);

// 10 / (B * min_i g_i * min positive d_j).
double DefaultLambdaUpperBound(const AllocationProblem& problem);

inline constexpr double kDefaultLambdaTolerance = 1e-8;

// Maximizes DualValue on [lb, ub]. Exact ties shrink toward the left third,
// so on a plateau the left end is returned.
double TernarySearchLambda(const AllocationProblem& problem, double lb,
                           double ub, double tol = kDefaultLambdaTolerance);

// Convenience: search on [0, DefaultLambdaUpperBound(problem)].
double SolveLambda(const AllocationProblem& problem,
                   double tol = kDefaultLambdaTolerance);

struct OracleResult {
  std::vector<int> assignment;
  double completions = 0.0;
};

inline constexpr double kMaxOracleAssignments = 1e7;

// Enumerates every one-coupon-per-row assignment satisfying the budget rate
// and returns the one with the most expected completions (the first in
// lexicographic order on ties, so all-cheapest wins among equals).
OracleResult BruteForceOracle(const AllocationProblem& problem);

uint64_t InstanceHash(const AllocationProblem& problem);

void WriteOracleCsvHeader(std::ostream& out);
void WriteOracleCsvRow(std::ostream& out, const AllocationProblem& problem,
                       double lambda_star, double primal, double dual);

}  // namespace ridegym::dual

#endif  // RIDEGYM_DUAL_SOLVER_H_
