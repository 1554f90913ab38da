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

#include "ridegym/simulator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace ridegym {
namespace {

enum StreamId : uint64_t { kStreamOrders = 1, kStreamAdjust = 2 };

constexpr double kMinDistance = 0.5;
constexpr double kMaxDistance = 60.0;

double DrawBeta(double a, double b, Rng& rng) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

// Mean supply falls as demand rises.
double SupplyMean(double demand) {
  return std::clamp(0.8 / (1.0 + 0.6 * demand), 0.05, 0.95);
}

// Rank order of the quotes: ascending price, ties by index.
int SortedOrder(std::span<const double> quotes, std::array<int, kMaxRsps>& idx) {
  const int m = static_cast<int>(quotes.size());
  for (int i = 0; i < m; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.begin() + m, [&](int a, int b) {
    return quotes[a] < quotes[b] || (quotes[a] == quotes[b] && a < b);
  });
  return m;
}

}  // namespace

int SlotOrderCount(const ScenarioConfig& config, int slot_index) {
  if (slot_index < 0) throw ArgumentError("slot_index must be >= 0");
  const std::vector<double> shares = HourlyOrderShares(config);
  return static_cast<int>(
      std::lround(config.orders_per_slot * shares[slot_index % kHoursPerDay]));
}

std::vector<Opportunity> GenerateSlotOrders(const ScenarioConfig& config,
                                            int slot_index, Rng& rng,
                                            std::span<const double> multipliers) {
  config.Validate();
  if (slot_index < 0) throw ArgumentError("slot_index must be >= 0");
  const int m = config.num_rsps;
  if (!multipliers.empty() && static_cast<int>(multipliers.size()) != m) {
    throw ArgumentError("need one price multiplier per RSP");
  }
  const std::vector<double> shares = HourlyOrderShares(config);
  const int hour = slot_index % kHoursPerDay;
  const int count =
      static_cast<int>(std::lround(config.orders_per_slot * shares[hour]));
  const double demand = kHoursPerDay * shares[hour];
  const double supply_mean = SupplyMean(demand);

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<Opportunity> orders(count);
  for (int k = 0; k < count; ++k) {
    Opportunity& o = orders[k];
    o.id = static_cast<int64_t>(slot_index) * 1000000 + k;
    const double log_dist =
        config.distance_log_mean + config.distance_log_stddev * normal(rng);
    const double distance =
        std::clamp(std::exp(log_dist), kMinDistance, kMaxDistance);
    const double supply =
        DrawBeta(config.supply_concentration * supply_mean,
                 config.supply_concentration * (1.0 - supply_mean), rng);
    o.x = {distance, supply, static_cast<double>(hour), demand};
    o.base_price = config.price_per_mile * distance;
    const double rel = std::log(distance) - config.distance_log_mean;
    o.competitor_quotes.resize(m - 1);
    for (int r = 1; r < m; ++r) {
      const double slope = config.competitor_distance_slopes.empty()
                               ? 0.0
                               : config.competitor_distance_slopes[r];
      const double mult = multipliers.empty() ? 1.0 : multipliers[r];
      o.competitor_quotes[r - 1] = o.base_price *
                                   std::max(0.3, 1.0 + slope * rel) *
                                   std::exp(config.quote_noise * normal(rng)) *
                                   mult;
    }
    o.own_price_factor = std::exp(config.own_quote_noise * normal(rng));
    o.dispatch_draw = uniform(rng);
    o.cancel_propensity = config.cancellation_mean +
                          config.cancellation_stddev * normal(rng);
  }
  return orders;
}

std::vector<AdjustmentEvent> ApplyPriceAdjustments(
    const ScenarioConfig& config, int slot_index,
    std::vector<double>& multipliers, Rng& rng) {
  if (static_cast<int>(multipliers.size()) != config.num_rsps) {
    throw ArgumentError("need one price multiplier per RSP");
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<AdjustmentEvent> events;
  for (int r = 1; r < config.num_rsps; ++r) {
    const double u_fire = uniform(rng);
    const double u_size = uniform(rng);
    if (u_fire < config.change_probability) {
      const double a =
          config.adjustment_lower +
          (config.adjustment_upper - config.adjustment_lower) * u_size;
      multipliers[r] *= 1.0 + a;
      events.push_back({slot_index, r, a, multipliers[r]});
    }
  }
  return events;
}

std::vector<bool> RankAndAutoselect(std::span<const double> quotes, int k) {
  const int m = static_cast<int>(quotes.size());
  if (m < 1 || m > kMaxRsps) throw ArgumentError("quote vector size invalid");
  if (k < 1 || k > m) throw ArgumentError("K must satisfy 1 <= K <= M");
  std::array<int, kMaxRsps> idx;
  SortedOrder(quotes, idx);
  std::vector<bool> flags(m, false);
  for (int r = 0; r < k; ++r) flags[idx[r]] = true;
  return flags;
}

double QuoteDensity(std::span<const double> quotes, int k, double base) {
  const double n = static_cast<double>(quotes.size());
  const double mean = std::accumulate(quotes.begin(), quotes.end(), 0.0) / n;
  double var = 0.0;
  for (double q : quotes) var += (q - mean) * (q - mean);
  const double cv = std::sqrt(var / n) / mean;
  return std::max(std::exp(-cv) - std::pow(base, -k), 0.0);
}

int PassengerSelect(std::span<const double> quotes, int k, double base,
                    int num_rsps) {
  const double density = QuoteDensity(quotes, k, base);
  const double raw = k + std::log(density + std::pow(base, -k)) / std::log(base);
  return std::clamp(static_cast<int>(std::lround(raw)), 1, num_rsps);
}

int DispatchAnswer(std::span<const int> selected, double supply,
                   std::span<const double> capabilities, double u) {
  double total = 0.0;
  for (int i : selected) total += capabilities[i];
  if (!(total > 0.0)) return kNoAnswer;
  double cumulative = 0.0;
  for (int i : selected) {
    cumulative += supply * capabilities[i] / total;
    if (u < cumulative) return i;
  }
  return kNoAnswer;
}

int DispatchAnswer(std::span<const int> selected, double supply,
                   std::span<const double> capabilities, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  return DispatchAnswer(selected, supply, capabilities, uniform(rng));
}

OrderResolution ResolveOrder(const ScenarioConfig& config,
                             const Opportunity& order, double coupon) {
  const int m = config.num_rsps;
  std::array<double, kMaxRsps> quotes;
  quotes[0] = order.base_price * (1.0 - coupon) * order.own_price_factor;
  for (int r = 1; r < m; ++r) quotes[r] = order.competitor_quotes[r - 1];
  const std::span<const double> q(quotes.data(), m);

  const int k = std::min(config.TopK(order.hour()), m);
  std::array<int, kMaxRsps> idx;
  SortedOrder(q, idx);
  const int own_rank =
      static_cast<int>(std::find(idx.begin(), idx.begin() + m, 0) - idx.begin());

  OrderResolution res;
  res.in_range = own_rank < k;
  const int sent_to = PassengerSelect(q, k, config.passenger_select_base, m);
  res.sent = own_rank < sent_to;

  std::array<int, kMaxRsps> selected;
  std::copy(idx.begin(), idx.begin() + sent_to, selected.begin());
  std::sort(selected.begin(), selected.begin() + sent_to);
  const std::span<const int> sel(selected.data(), sent_to);
  res.answered_by = DispatchAnswer(sel, order.supply(),
                                   config.service_capabilities,
                                   order.dispatch_draw);
  res.completed = res.answered_by == 0 &&
                  order.cancel_propensity <= config.cancellation_threshold;
  if (res.sent) {
    double total = 0.0;
    for (int i : sel) total += config.service_capabilities[i];
    const double answer =
        total > 0.0 ? order.supply() * config.service_capabilities[0] / total
                    : 0.0;
    const double keep =
        config.cancellation_stddev > 0.0
            ? NormalCdf((config.cancellation_threshold -
                         config.cancellation_mean) /
                        config.cancellation_stddev)
            : (config.cancellation_mean <= config.cancellation_threshold ? 1.0
                                                                          : 0.0);
    res.completion_probability = answer * keep;
  }
  return res;
}

Episode::Episode(ScenarioConfig config, uint64_t seed, int num_slots)
    : config_(std::move(config)), seed_(seed) {
  config_.Validate();
  if (num_slots < 0) throw ArgumentError("num_slots must be >= 0");
  std::vector<double> mult = config_.initial_multipliers.empty()
                                 ? std::vector<double>(config_.num_rsps, 1.0)
                                 : config_.initial_multipliers;
  orders_.reserve(num_slots);
  for (int t = 0; t < num_slots; ++t) {
    Rng adjust_rng = MakeRng(seed_, {kStreamAdjust, static_cast<uint64_t>(t)});
    events_.push_back(ApplyPriceAdjustments(config_, t, mult, adjust_rng));
    multipliers_.push_back(mult);
    Rng order_rng = MakeRng(seed_, {kStreamOrders, static_cast<uint64_t>(t)});
    orders_.push_back(GenerateSlotOrders(config_, t, order_rng, mult));
  }
}

const std::vector<Opportunity>& Episode::orders(int slot) const {
  return orders_.at(slot);
}

const std::vector<double>& Episode::multipliers(int slot) const {
  return multipliers_.at(slot);
}

const std::vector<AdjustmentEvent>& Episode::events(int slot) const {
  return events_.at(slot);
}

int Episode::total_orders() const {
  int total = 0;
  for (const auto& slot : orders_) total += static_cast<int>(slot.size());
  return total;
}

SlotOutcome Episode::Step(int slot, std::span<const int> assignment,
                          std::span<const double> coupons,
                          std::span<const int> clusters,
                          int num_clusters) const {
  const std::vector<Opportunity>& orders = this->orders(slot);
  const int n = static_cast<int>(orders.size());
  const int h = static_cast<int>(coupons.size());
  if (static_cast<int>(assignment.size()) != n) {
    throw ArgumentError("assignment must cover every order of the slot");
  }
  if (!clusters.empty() && static_cast<int>(clusters.size()) != n) {
    throw ArgumentError("cluster labels must cover every order of the slot");
  }
  if (num_clusters < 1) throw ArgumentError("num_clusters must be >= 1");

  SlotOutcome out;
  out.slot = slot;
  out.num_clusters = num_clusters;
  out.num_coupons = h;
  out.records.resize(n);
  out.in_range_count.assign(static_cast<size_t>(num_clusters) * h, 0);
  out.order_count.assign(static_cast<size_t>(num_clusters) * h, 0);
  for (int i = 0; i < n; ++i) {
    const int j = assignment[i];
    if (j < 0 || j >= h) throw ArgumentError("coupon index out of range");
    const int c = clusters.empty() ? 0 : clusters[i];
    if (c < 0 || c >= num_clusters) {
      throw ArgumentError("cluster label out of range");
    }
    const OrderResolution res = ResolveOrder(config_, orders[i], coupons[j]);
    OrderRecord& rec = out.records[i];
    rec.coupon = j;
    rec.in_range = res.in_range;
    rec.sent = res.sent;
    rec.completed = res.completed;
    if (res.completed) {
      rec.gmv = orders[i].base_price;
      rec.cost = orders[i].base_price * coupons[j];
    }
    const size_t cell = static_cast<size_t>(c) * h + j;
    ++out.order_count[cell];
    if (rec.in_range) ++out.in_range_count[cell];
    out.in_range += rec.in_range;
    out.sent += rec.sent;
    out.completions += rec.completed;
    out.cost += rec.cost;
    out.gmv += rec.gmv;
  }
  return out;
}

std::vector<double> Episode::CompletionMatrix(
    int slot, std::span<const double> coupons) const {
  const std::vector<Opportunity>& orders = this->orders(slot);
  const size_t h = coupons.size();
  std::vector<double> z(orders.size() * h);
  for (size_t i = 0; i < orders.size(); ++i) {
    for (size_t j = 0; j < h; ++j) {
      z[i * h + j] =
          ResolveOrder(config_, orders[i], coupons[j]).completion_probability;
    }
  }
  return z;
}

std::vector<LoggedOrder> LogRandomPolicy(const Episode& episode,
                                         std::span<const double> coupons,
                                         uint64_t seed) {
  if (coupons.empty()) throw ArgumentError("coupon set is empty");
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(coupons.size()) - 1);
  std::vector<LoggedOrder> log;
  log.reserve(episode.total_orders());
  for (int t = 0; t < episode.num_slots(); ++t) {
    const auto& orders = episode.orders(t);
    std::vector<int> assignment(orders.size());
    for (int& j : assignment) j = pick(rng);
    const SlotOutcome out = episode.Step(t, assignment, coupons);
    for (size_t i = 0; i < orders.size(); ++i) {
      log.push_back({orders[i].x, t, assignment[i], coupons[assignment[i]],
                     out.records[i].in_range, out.records[i].completed});
    }
  }
  return log;
}

void WriteTraceCsvHeader(std::ostream& out) {
  out << "slot,orders,in_range_rate,completions,cost,gmv\n";
}

void WriteTraceCsvRow(std::ostream& out, const SlotOutcome& o) {
  const int n = static_cast<int>(o.records.size());
  const double rate = n > 0 ? static_cast<double>(o.in_range) / n : 0.0;
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%d,%d,%.10g,%d,%.10g,%.10g\n", o.slot, n,
                rate, o.completions, o.cost, o.gmv);
  out << buf;
}

}  // namespace ridegym
