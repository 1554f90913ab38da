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

#include "ridegym/metrics.h"

#include <algorithm>
#include <cmath>

#include "ridegym/common.h"

namespace ridegym::bench {

std::string DirectionName(Direction direction) {
  return direction == Direction::kOver ? "over" : "under";
}

CreResult MetricCre(double cost, double gmv, double target_rate) {
  if (!(gmv > 0.0)) throw UndefinedMetricError("CRE: gmv must be positive");
  const double rate = cost / gmv;
  return {std::abs(rate - target_rate),
          rate > target_rate ? Direction::kOver : Direction::kUnder};
}

double MetricFroi(double completions, double baseline_completions, double cost,
                  double avg_gmv, double baseline_avg_gmv) {
  if (!(cost > 0.0)) throw UndefinedMetricError("FROI: no coupon spend");
  if (!(avg_gmv > 0.0)) {
    throw UndefinedMetricError("FROI: average GMV must be positive");
  }
  return (completions - baseline_completions) /
         ((baseline_avg_gmv / avg_gmv) * cost);
}

double BudgetPenalty(double rate, double target_rate) {
  if (!(target_rate > 0.0)) {
    throw ArgumentError("BudgetPenalty: target rate must be positive");
  }
  return std::exp(std::max(rate / target_rate - 1.0, 0.0)) - 1.0;
}

double MetricRlr(double completions, double reference_completions, double rate,
                 double target_rate) {
  if (!(reference_completions > 0.0)) {
    throw ArgumentError("RLR: reference completions must be positive");
  }
  return completions / reference_completions -
         BudgetPenalty(rate, target_rate);
}

}  // namespace ridegym::bench
