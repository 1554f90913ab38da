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

#include "ridegym/scenario.h"

#include <cmath>
#include <fstream>
#include <numbers>

#include "ridegym/common.h"

namespace ridegym {

int ScenarioConfig::TopK(int hour) const {
  if (!topk_by_hour.empty()) return topk_by_hour[hour % kHoursPerDay];
  return topk_base;
}

void ScenarioConfig::Validate() const {
  if (num_rsps < 1 || num_rsps > kMaxRsps) {
    throw ConfigError("num_rsps must lie in [1, 32]");
  }
  if (!(change_probability >= 0.0 && change_probability <= 1.0)) {
    throw ConfigError("change_probability must lie in [0, 1]");
  }
  if (!(adjustment_lower <= adjustment_upper)) {
    throw ConfigError("adjustment bounds need lower <= upper");
  }
  if (adjustment_lower <= -1.0) {
    throw ConfigError("adjustment lower bound must exceed -1");
  }
  if (!(price_per_mile > 0.0)) throw ConfigError("price_per_mile must be > 0");
  if (topk_base < 1 || topk_base > num_rsps) {
    throw ConfigError("topk_base must satisfy 1 <= K <= M");
  }
  if (!topk_by_hour.empty()) {
    if (topk_by_hour.size() != kHoursPerDay) {
      throw ConfigError("topk_by_hour needs 24 entries");
    }
    for (int k : topk_by_hour) {
      if (k < 1 || k > num_rsps) throw ConfigError("per-hour K out of range");
    }
  }
  if (!(passenger_select_base > 1.0)) {
    throw ConfigError("passenger_select_base must exceed 1");
  }
  if (static_cast<int>(service_capabilities.size()) != num_rsps) {
    throw ConfigError("service_capabilities needs one entry per RSP");
  }
  double tp_sum = 0.0;
  for (double tp : service_capabilities) {
    if (!(tp >= 0.0)) throw ConfigError("service capabilities must be >= 0");
    tp_sum += tp;
  }
  if (!(tp_sum > 0.0)) throw ConfigError("service capabilities sum to zero");
  if (!(cancellation_stddev >= 0.0)) {
    throw ConfigError("cancellation stddev must be >= 0");
  }
  if (slots_pretrain < 0 || slots_train < 0 || slots_test < 0) {
    throw ConfigError("slot counts must be non-negative");
  }
  if (orders_per_slot < 1) throw ConfigError("orders_per_slot must be >= 1");
  if (order_count_mixture.empty()) {
    throw ConfigError("order_count_mixture needs at least one component");
  }
  double weight_sum = 0.0;
  for (const MixtureComponent& c : order_count_mixture) {
    if (!(c.weight >= 0.0) || !(c.stddev > 0.0)) {
      throw ConfigError("mixture components need weight >= 0, stddev > 0");
    }
    weight_sum += c.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw ConfigError("mixture weights must sum to 1");
  }
  if (!(quote_noise >= 0.0) || !(own_quote_noise >= 0.0)) {
    throw ConfigError("quote noise must be >= 0");
  }
  if (!competitor_distance_slopes.empty() &&
      static_cast<int>(competitor_distance_slopes.size()) != num_rsps) {
    throw ConfigError("competitor_distance_slopes needs one entry per RSP");
  }
  if (!initial_multipliers.empty()) {
    if (static_cast<int>(initial_multipliers.size()) != num_rsps) {
      throw ConfigError("initial_multipliers needs one entry per RSP");
    }
    for (double m : initial_multipliers) {
      if (!(m > 0.0)) throw ConfigError("price multipliers must be > 0");
    }
  }
  if (!(distance_log_stddev >= 0.0) || !(supply_concentration > 0.0)) {
    throw ConfigError("distance/supply distribution parameters invalid");
  }
}

std::vector<double> HourlyOrderShares(const ScenarioConfig& config) {
  std::vector<double> density(kHoursPerDay, 0.0);
  for (int h = 0; h < kHoursPerDay; ++h) {
    const double center = h + 0.5;
    for (const MixtureComponent& c : config.order_count_mixture) {
      double dist = std::fmod(std::abs(center - c.mean), 24.0);
      dist = std::min(dist, 24.0 - dist);
      const double zscore = dist / c.stddev;
      density[h] += c.weight * std::exp(-0.5 * zscore * zscore) /
                    (c.stddev * std::sqrt(2.0 * std::numbers::pi));
    }
  }
  double total = 0.0;
  for (double d : density) total += d;
  for (double& d : density) d /= total;
  return density;
}

ScenarioConfig ScenarioFromJson(const nlohmann::json& j, ScenarioConfig c) {
  c.name = j.value("name", c.name);
  c.num_rsps = j.value("num_rsps", c.num_rsps);
  c.change_probability = j.value("change_probability", c.change_probability);
  if (j.contains("adjustment_bounds")) {
    const auto& b = j.at("adjustment_bounds");
    c.adjustment_lower = b.at(0).get<double>();
    c.adjustment_upper = b.at(1).get<double>();
  }
  c.price_per_mile = j.value("price_per_mile", c.price_per_mile);
  c.topk_base = j.value("topk_base", c.topk_base);
  c.topk_by_hour = j.value("topk_by_hour", c.topk_by_hour);
  c.passenger_select_base =
      j.value("passenger_select_base", c.passenger_select_base);
  c.service_capabilities =
      j.value("service_capabilities", c.service_capabilities);
  if (j.contains("cancellation")) {
    const auto& cj = j.at("cancellation");
    c.cancellation_mean = cj.value("mean", c.cancellation_mean);
    c.cancellation_stddev = cj.value("stddev", c.cancellation_stddev);
    c.cancellation_threshold = cj.value("threshold", c.cancellation_threshold);
  }
  c.slots_pretrain = j.value("slots_pretrain", c.slots_pretrain);
  c.slots_train = j.value("slots_train", c.slots_train);
  c.slots_test = j.value("slots_test", c.slots_test);
  c.orders_per_slot = j.value("orders_per_slot", c.orders_per_slot);
  if (j.contains("order_count_mixture")) {
    c.order_count_mixture.clear();
    for (const auto& m : j.at("order_count_mixture")) {
      c.order_count_mixture.push_back({m.at("weight").get<double>(),
                                       m.at("mean").get<double>(),
                                       m.at("stddev").get<double>()});
    }
  }
  c.seed = j.value("seed", c.seed);
  if (j.contains("market")) {
    const auto& m = j.at("market");
    c.quote_noise = m.value("quote_noise", c.quote_noise);
    c.own_quote_noise = m.value("own_quote_noise", c.own_quote_noise);
    c.competitor_distance_slopes =
        m.value("competitor_distance_slopes", c.competitor_distance_slopes);
    c.initial_multipliers =
        m.value("initial_multipliers", c.initial_multipliers);
    c.distance_log_mean = m.value("distance_log_mean", c.distance_log_mean);
    c.distance_log_stddev =
        m.value("distance_log_stddev", c.distance_log_stddev);
    c.supply_concentration =
        m.value("supply_concentration", c.supply_concentration);
  }
  c.Validate();
  return c;
}

nlohmann::json ScenarioToJson(const ScenarioConfig& c) {
  nlohmann::json mixture = nlohmann::json::array();
  for (const MixtureComponent& m : c.order_count_mixture) {
    mixture.push_back(
        {{"weight", m.weight}, {"mean", m.mean}, {"stddev", m.stddev}});
  }
  nlohmann::json j = {
      {"name", c.name},
      {"num_rsps", c.num_rsps},
      {"change_probability", c.change_probability},
      {"adjustment_bounds", {c.adjustment_lower, c.adjustment_upper}},
      {"price_per_mile", c.price_per_mile},
      {"topk_base", c.topk_base},
      {"passenger_select_base", c.passenger_select_base},
      {"service_capabilities", c.service_capabilities},
      {"cancellation",
       {{"mean", c.cancellation_mean},
        {"stddev", c.cancellation_stddev},
        {"threshold", c.cancellation_threshold}}},
      {"slots_pretrain", c.slots_pretrain},
      {"slots_train", c.slots_train},
      {"slots_test", c.slots_test},
      {"orders_per_slot", c.orders_per_slot},
      {"order_count_mixture", mixture},
      {"seed", c.seed},
      {"market",
       {{"quote_noise", c.quote_noise},
        {"own_quote_noise", c.own_quote_noise},
        {"competitor_distance_slopes", c.competitor_distance_slopes},
        {"initial_multipliers", c.initial_multipliers},
        {"distance_log_mean", c.distance_log_mean},
        {"distance_log_stddev", c.distance_log_stddev},
        {"supply_concentration", c.supply_concentration}}}};
  if (!c.topk_by_hour.empty()) j["topk_by_hour"] = c.topk_by_hour;
  return j;
}

ScenarioConfig LoadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed scenario file " + path + ": " + e.what());
  }
  return ScenarioFromJson(j);
}

}  // namespace ridegym
