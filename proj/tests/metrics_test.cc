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

#include <cmath>

#include "ridegym/common.h"
#include "gtest/gtest.h"

namespace ridegym::bench {
namespace {

TEST(CreTest, Examples) {
  const CreResult over = MetricCre(5.0, 100.0, 0.04);
  EXPECT_DOUBLE_EQ(over.error, 0.05 - 0.04);
  EXPECT_EQ(over.direction, Direction::kOver);
  const CreResult exact = MetricCre(4.0, 100.0, 0.04);
  EXPECT_EQ(exact.error, 0.0);
  EXPECT_EQ(exact.direction, Direction::kUnder);
  EXPECT_EQ(MetricCre(1.0, 100.0, 0.04).direction, Direction::kUnder);
  EXPECT_THROW(MetricCre(1.0, 0.0, 0.04), UndefinedMetricError);
  EXPECT_EQ(DirectionName(Direction::kOver), "over");
  EXPECT_EQ(DirectionName(Direction::kUnder), "under");
}

TEST(FroiTest, Examples) {
  EXPECT_EQ(MetricFroi(50, 50, 10, 9, 10), 0.0);
  // (F - F0) = 10, C = 20, A0 / A = 10 / 9.
  EXPECT_DOUBLE_EQ(MetricFroi(110, 100, 20, 9, 10), 10.0 / (20.0 * 10.0 / 9.0));
  EXPECT_DOUBLE_EQ(MetricFroi(110, 100, 20, 9, 10), 0.45);
  EXPECT_DOUBLE_EQ(MetricFroi(110, 100, 20, 7, 7), 0.5);
  EXPECT_THROW(MetricFroi(110, 100, 0, 7, 7), UndefinedMetricError);
  EXPECT_THROW(MetricFroi(110, 100, 1, 0, 7), UndefinedMetricError);
}

TEST(RlrTest, Examples) {
  EXPECT_EQ(MetricRlr(100, 100, 0.05, 0.05), 1.0);
  EXPECT_EQ(MetricRlr(60, 100, 0.01, 0.05), 0.6);
  EXPECT_EQ(MetricRlr(100, 100, 0.1875, 0.125), 1.0 - (std::exp(0.5) - 1.0));
  EXPECT_EQ(BudgetPenalty(0.02, 0.05), 0.0);
  EXPECT_THROW(MetricRlr(1, 0, 0.05, 0.05), ArgumentError);
  EXPECT_THROW(BudgetPenalty(0.05, 0.0), ArgumentError);
}

}  // namespace
}  // namespace ridegym::bench
