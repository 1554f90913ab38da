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

// Campaign metrics: budget-rate error (CRE), incremental completions per
// normalized subsidy (FROI), and completions-with-penalty (RLR).

#ifndef RIDEGYM_METRICS_H_
#define RIDEGYM_METRICS_H_

#include <string>

namespace ridegym::bench {

enum class Direction { kUnder, kOver };

std::string DirectionName(Direction direction);  // "under" / "over"

struct CreResult {
  double error = 0.0;
  Direction direction = Direction::kUnder;
};

// |cost / gmv - target|; over when the rate exceeds the target.
CreResult MetricCre(double cost, double gmv, double target_rate);

// (F - F0) / ((A0 / A) * C) where F are completions, C the spend and A the
// average GMV per completion. Throws UndefinedMetricError when C or A is 0.
double MetricFroi(double completions, double baseline_completions, double cost,
                  double avg_gmv, double baseline_avg_gmv);

// exp(max(rate / target - 1, 0)) - 1.
double BudgetPenalty(double rate, double target_rate);

// completions / reference - BudgetPenalty(rate, target).
double MetricRlr(double completions, double reference_completions, double rate,
                 double target_rate);

}  // namespace ridegym::bench

#endif  // RIDEGYM_METRICS_H_
