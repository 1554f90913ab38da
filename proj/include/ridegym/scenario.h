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

#ifndef RIDEGYM_SCENARIO_H_
#define RIDEGYM_SCENARIO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace ridegym {

// One normal component of the hour-of-day order-count mixture. Means and
// standard deviations are in hours; distances wrap around the 24h clock.
struct MixtureComponent {
  double weight = 1.0;
  double mean = 12.0;
  double stddev = 4.0;
};

inline constexpr int kMaxRsps = 32;
inline constexpr int kHoursPerDay = 24;

struct ScenarioConfig {
  std::string name = "scene";

  // Number of ride-service providers; ours is index 0.
  int num_rsps = 5;
  // Per-slot probability that a competitor re-prices.
  double change_probability = 0.1;
  // Fractional price change a ~ Uniform(lower, upper).
  double adjustment_lower = -0.05;
  double adjustment_upper = 0.05;
  double price_per_mile = 2.0;
  // Default top-K auto-selection size, optionally overridden per hour.
  int topk_base = 2;
  std::vector<int> topk_by_hour;
  // Base b of the passenger-selection formula.
  double passenger_select_base = 1.3;
  // tp_i; size num_rsps.
  std::vector<double> service_capabilities = {1.0, 1.0, 1.0, 1.0, 1.0};
  // Cancellation propensity ~ Normal(mean, stddev); cancel above threshold.
  double cancellation_mean = 0.2;
  double cancellation_stddev = 0.25;
  double cancellation_threshold = 0.5;
  int slots_pretrain = 168;
  int slots_train = 720;
  int slots_test = 336;
  // Orders generated per 24-slot day, spread over hours by the mixture.
  int orders_per_slot = 40000;
  std::vector<MixtureComponent> order_count_mixture = {{1.0, 12.0, 6.0}};
  uint64_t seed = 1;

  // Market shape.
  double quote_noise = 0.08;      // log-sd of competitor quotes
  double own_quote_noise = 0.0;   // log-sd of our quote (0: deterministic)
  std::vector<double> competitor_distance_slopes;  // size num_rsps, [0] unused
  std::vector<double> initial_multipliers;         // size num_rsps
  double distance_log_mean = 1.6;
  double distance_log_stddev = 0.5;
  double supply_concentration = 2.0;

  int TopK(int hour) const;
  // Throws ConfigError on any violated invariant.
  void Validate() const;
};

ScenarioConfig ScenarioFromJson(const nlohmann::json& j,
                                ScenarioConfig base = {});
nlohmann::json ScenarioToJson(const ScenarioConfig& config);
ScenarioConfig LoadScenario(const std::string& path);

// Normalized hour-of-day order shares (24 entries summing to one).
std::vector<double> HourlyOrderShares(const ScenarioConfig& config);

}  // namespace ridegym

#endif  // RIDEGYM_SCENARIO_H_
