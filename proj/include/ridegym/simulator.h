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

// Ride-hailing aggregator marketplace. Each order collects one quote per
// ride-service provider (RSP; ours is index 0), the aggregator auto-selects
// the K cheapest, the passenger narrows that to K' depending on how tightly
// the quotes are bunched, and one of the selected RSPs answers with a
// probability proportional to its service capability scaled by supply.
//
// Every random quantity an order will ever need is drawn when the order is
// generated. Resolving an order under any coupon is then a pure function,
// so the same episode can be replayed under different coupon assignments
// and exact completion probabilities can be read off for any coupon.

#ifndef RIDEGYM_SIMULATOR_H_
#define RIDEGYM_SIMULATOR_H_

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "ridegym/common.h"
#include "ridegym/scenario.h"

namespace ridegym {

inline constexpr int kNumFeatures = 4;
using Features = std::array<double, kNumFeatures>;
enum FeatureIndex { kDistance = 0, kSupply = 1, kHour = 2, kDemand = 3 };

inline constexpr int kNoAnswer = -1;

struct Opportunity {
  int64_t id = 0;
  Features x{};
  double base_price = 0.0;
  std::vector<double> competitor_quotes;  // RSPs 1..M-1
  double own_price_factor = 1.0;
  double dispatch_draw = 0.0;      // Uniform(0,1)
  double cancel_propensity = 0.0;  // Normal(mean, stddev)

  double supply() const { return x[kSupply]; }
  int hour() const { return static_cast<int>(x[kHour]); }
};

struct AdjustmentEvent {
  int slot = 0;
  int rsp = 0;
  double adjustment = 0.0;
  double multiplier_after = 1.0;
};

// Generates the orders of one slot against the given competitor price
// multipliers (empty means all ones). Deterministic in the rng state.
std::vector<Opportunity> GenerateSlotOrders(
    const ScenarioConfig& config, int slot_index, Rng& rng,
    std::span<const double> multipliers = {});

int SlotOrderCount(const ScenarioConfig& config, int slot_index);

// Competitors re-price independently; index 0 never moves. The rng stream
// consumption does not depend on change_probability, so scenes that differ
// only in that value stay paired.
std::vector<AdjustmentEvent> ApplyPriceAdjustments(
    const ScenarioConfig& config, int slot_index,
    std::vector<double>& multipliers, Rng& rng);

// Flags the k cheapest quotes; ties go to the lower index.
std::vector<bool> RankAndAutoselect(std::span<const double> quotes, int k);

// exp(-CV) - b^-k, floored at zero.
double QuoteDensity(std::span<const double> quotes, int k, double base);

// Number of auto-selected RSPs the passenger actually sends the order to.
int PassengerSelect(std::span<const double> quotes, int k, double base,
                    int num_rsps);

// Picks the answering RSP among `selected` using the uniform draw u, or
// kNoAnswer. P(i) = s * tp_i / sum_{j in selected} tp_j.
int DispatchAnswer(std::span<const int> selected, double supply,
                   std::span<const double> capabilities, double u);
int DispatchAnswer(std::span<const int> selected, double supply,
                   std::span<const double> capabilities, Rng& rng);

struct OrderResolution {
  bool in_range = false;
  bool sent = false;
  int answered_by = kNoAnswer;
  bool completed = false;
  // P(completed) given the order's quotes, integrated over the dispatch and
  // cancellation draws.
  double completion_probability = 0.0;
};

OrderResolution ResolveOrder(const ScenarioConfig& config,
                             const Opportunity& order, double coupon);

struct OrderRecord {
  int coupon = 0;
  bool in_range = false;
  bool sent = false;
  bool completed = false;
  double cost = 0.0;
  double gmv = 0.0;
};

struct SlotOutcome {
  int slot = 0;
  int num_clusters = 1;
  int num_coupons = 0;
  std::vector<OrderRecord> records;
  // cluster x coupon, row-major.
  std::vector<int> in_range_count;
  std::vector<int> order_count;
  int in_range = 0;
  int sent = 0;
  int completions = 0;
  double cost = 0.0;
  double gmv = 0.0;
};

class Episode {
 public:
  // Pre-generates `num_slots` slots. Competitor prices start at the
  // configured initial multipliers and drift by config.change_probability.
  Episode(ScenarioConfig config, uint64_t seed, int num_slots);

  const ScenarioConfig& config() const { return config_; }
  uint64_t seed() const { return seed_; }
  int num_slots() const { return static_cast<int>(orders_.size()); }
  const std::vector<Opportunity>& orders(int slot) const;
  const std::vector<double>& multipliers(int slot) const;
  const std::vector<AdjustmentEvent>& events(int slot) const;
  int total_orders() const;

  // Resolves every order of `slot` under the given coupon indices. Cluster
  // labels (optional) select the tally cell.
  SlotOutcome Step(int slot, std::span<const int> assignment,
                   std::span<const double> coupons,
                   std::span<const int> clusters = {},
                   int num_clusters = 1) const;

  // Ground-truth completion probabilities, N x H row-major.
  std::vector<double> CompletionMatrix(int slot,
                                       std::span<const double> coupons) const;

 private:
  ScenarioConfig config_;
  uint64_t seed_;
  std::vector<std::vector<Opportunity>> orders_;
  std::vector<std::vector<double>> multipliers_;
  std::vector<std::vector<AdjustmentEvent>> events_;
};

// Logged interaction under a uniformly random coupon policy.
struct LoggedOrder {
  Features x{};
  int slot = 0;
  int coupon = 0;
  double coupon_value = 0.0;
  bool in_range = false;
  bool completed = false;
};

std::vector<LoggedOrder> LogRandomPolicy(const Episode& episode,
                                         std::span<const double> coupons,
                                         uint64_t seed);

void WriteTraceCsvHeader(std::ostream& out);
void WriteTraceCsvRow(std::ostream& out, const SlotOutcome& outcome);

}  // namespace ridegym

#endif  // RIDEGYM_SIMULATOR_H_
