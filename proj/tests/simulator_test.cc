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
#include <sstream>

#include "gtest/gtest.h"
#include "ridegym/scenario.h"
#include "stats_oracles.h"

namespace ridegym {
namespace {

const std::vector<double> kCoupons = {0.0, 0.05, 0.1, 0.15, 0.2};

ScenarioConfig SmallConfig() {
  ScenarioConfig c;
  c.orders_per_slot = 2000;
  c.competitor_distance_slopes = {0.0, 0.1, -0.1, 0.05, -0.05};
  return c;
}

std::vector<double> AllQuotes(const Opportunity& o, double coupon) {
  std::vector<double> q = {o.base_price * (1.0 - coupon) * o.own_price_factor};
  q.insert(q.end(), o.competitor_quotes.begin(), o.competitor_quotes.end());
  return q;
}

TEST(ScenarioTest, JsonRoundTrip) {
  ScenarioConfig c = SmallConfig();
  c.change_probability = 0.4;
  c.topk_by_hour.assign(24, 3);
  const ScenarioConfig back = ScenarioFromJson(ScenarioToJson(c));
  EXPECT_EQ(ScenarioToJson(back).dump(), ScenarioToJson(c).dump());
}

TEST(ScenarioTest, RejectsBadMixture) {
  nlohmann::json j = ScenarioToJson(SmallConfig());
  j["order_count_mixture"] = {{{"weight", 0.5}, {"mean", 8}, {"stddev", 2}}};
  EXPECT_THROW(ScenarioFromJson(j), ConfigError);
}

TEST(ScenarioTest, RejectsBadInvariants) {
  ScenarioConfig c = SmallConfig();
  c.topk_base = 6;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SmallConfig();
  c.adjustment_lower = 0.2;
  c.adjustment_upper = 0.1;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SmallConfig();
  c.service_capabilities = {0, 0, 0, 0, 0};
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SmallConfig();
  c.passenger_select_base = 1.0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(ScenarioTest, ShippedScenesLoad) {
  const double expected[] = {0.1, 0.2, 0.4, 0.02};
  for (int s = 1; s <= 4; ++s) {
    const ScenarioConfig c = LoadScenario(std::string(RIDEGYM_SCENES_DIR) +
                                          "/scene" + std::to_string(s) +
                                          ".json");
    EXPECT_DOUBLE_EQ(c.change_probability, expected[s - 1]);
  }
}

TEST(GenerateSlotOrdersTest, UniformMixtureGivesOneOrderPerHour) {
  ScenarioConfig c = SmallConfig();
  c.orders_per_slot = 24;
  c.order_count_mixture = {{1.0, 12.0, 1e6}};
  for (int slot = 0; slot < 48; ++slot) {
    Rng rng(slot);
    EXPECT_EQ(GenerateSlotOrders(c, slot, rng).size(), 1u);
  }
}

TEST(GenerateSlotOrdersTest, DailyTotal) {
  ScenarioConfig c = SmallConfig();
  c.orders_per_slot = 40000;
  c.order_count_mixture = {{0.6, 8.5, 2.0}, {0.4, 18.0, 3.0}};
  int total = 0;
  for (int slot = 0; slot < 24; ++slot) total += SlotOrderCount(c, slot);
  EXPECT_NEAR(total, 40000, 12);
}

TEST(GenerateSlotOrdersTest, DeterministicAndValid) {
  const ScenarioConfig c = SmallConfig();
  Rng a(99), b(99);
  const auto first = GenerateSlotOrders(c, 7, a);
  const auto second = GenerateSlotOrders(c, 7, b);
  ASSERT_EQ(first.size(), second.size());
  for (size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].x, second[i].x);
    EXPECT_EQ(first[i].competitor_quotes, second[i].competitor_quotes);
    EXPECT_EQ(first[i].dispatch_draw, second[i].dispatch_draw);
    EXPECT_GT(first[i].base_price, 0.0);
    EXPECT_GE(first[i].supply(), 0.0);
    EXPECT_LE(first[i].supply(), 1.0);
    EXPECT_EQ(first[i].hour(), 7);
    for (double q : first[i].competitor_quotes) EXPECT_GT(q, 0.0);
  }
}

TEST(ApplyPriceAdjustmentsTest, ZeroProbability) {
  ScenarioConfig c = SmallConfig();
  c.change_probability = 0.0;
  std::vector<double> mult(5, 1.0);
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    EXPECT_TRUE(ApplyPriceAdjustments(c, t, mult, rng).empty());
  }
  EXPECT_EQ(mult, std::vector<double>(5, 1.0));
}

TEST(ApplyPriceAdjustmentsTest, DegenerateUniform) {
  ScenarioConfig c = SmallConfig();
  c.change_probability = 1.0;
  c.adjustment_lower = c.adjustment_upper = 0.1;
  std::vector<double> mult(5, 1.0);
  Rng rng(1);
  const auto events = ApplyPriceAdjustments(c, 0, mult, rng);
  EXPECT_EQ(events.size(), 4u);
  EXPECT_EQ(mult[0], 1.0);
  for (int r = 1; r < 5; ++r) EXPECT_DOUBLE_EQ(mult[r], 1.1);
}

TEST(ApplyPriceAdjustmentsTest, EmpiricalFrequency) {
  ScenarioConfig c = SmallConfig();
  c.change_probability = 0.4;
  std::vector<double> mult(5, 1.0);
  std::vector<int> changes(5, 0);
  Rng rng(2024);
  for (int t = 0; t < 336; ++t) {
    for (const AdjustmentEvent& e : ApplyPriceAdjustments(c, t, mult, rng)) {
      ++changes[e.rsp];
      EXPECT_GE(e.adjustment, c.adjustment_lower);
      EXPECT_LE(e.adjustment, c.adjustment_upper);
    }
  }
  EXPECT_EQ(changes[0], 0);
  for (int r = 1; r < 5; ++r) EXPECT_NEAR(changes[r] / 336.0, 0.4, 0.05);
}

TEST(RankAndAutoselectTest, Examples) {
  EXPECT_EQ(RankAndAutoselect(std::vector<double>{10, 8, 12}, 1),
            (std::vector<bool>{false, true, false}));
  EXPECT_EQ(RankAndAutoselect(std::vector<double>{5, 5, 9}, 1),
            (std::vector<bool>{true, false, false}));
  EXPECT_THROW(RankAndAutoselect(std::vector<double>{5, 5, 9}, 4),
               ArgumentError);
  EXPECT_THROW(RankAndAutoselect(std::vector<double>{5, 5, 9}, 0),
               ArgumentError);
}

TEST(RankAndAutoselectTest, IidQuotesGiveKOverM) {
  Rng rng(5);
  std::uniform_real_distribution<double> unit(1.0, 2.0);
  const int draws = 100000;
  int hits = 0;
  std::vector<double> q(5);
  for (int k = 0; k < draws; ++k) {
    for (double& v : q) v = unit(rng);
    const auto flags = RankAndAutoselect(q, 2);
    EXPECT_EQ(std::count(flags.begin(), flags.end(), true), 2);
    hits += flags[0];
  }
  const double se = std::sqrt(0.4 * 0.6 / draws);
  EXPECT_NEAR(static_cast<double>(hits) / draws, 0.4, 3 * se);
}

TEST(PassengerSelectTest, Examples) {
  const double b = 1.3;
  // Wide spread: exp(-CV) falls below b^-K, so the density floors at zero.
  const std::vector<double> wide = {1.0, 50.0, 200.0, 900.0, 4000.0};
  EXPECT_EQ(QuoteDensity(wide, 2, b), 0.0);
  EXPECT_EQ(PassengerSelect(wide, 2, b, 5), 1);
  // Identical quotes: density = 1 - b^-K, so K' = K.
  const std::vector<double> flat(5, 7.0);
  EXPECT_NEAR(QuoteDensity(flat, 2, b), 1.0 - std::pow(b, -2), 1e-15);
  for (int k = 1; k <= 5; ++k) EXPECT_EQ(PassengerSelect(flat, k, b, 5), k);
}

TEST(PassengerSelectTest, NeverExceedsK) {
  Rng rng(8);
  std::lognormal_distribution<double> quote(2.0, 0.3);
  std::vector<double> q(5);
  for (int trial = 0; trial < 10000; ++trial) {
    for (double& v : q) v = quote(rng);
    for (int k = 1; k <= 5; ++k) {
      const int kp = PassengerSelect(q, k, 1.3, 5);
      EXPECT_GE(kp, 1);
      EXPECT_LE(kp, k);
    }
  }
}

TEST(DispatchTest, Degenerate) {
  const std::vector<double> tp = {1.0, 1.0, 1.0};
  const std::vector<int> one = {0};
  const std::vector<int> two = {0, 2};
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    EXPECT_EQ(DispatchAnswer(two, 0.0, tp, rng), kNoAnswer);
    EXPECT_EQ(DispatchAnswer(one, 1.0, tp, rng), 0);
  }
}

TEST(DispatchTest, EmpiricalShares) {
  const std::vector<double> tp = {1.0, 1.0};
  const std::vector<int> selected = {0, 1};
  Rng rng(4);
  const int draws = 100000;
  int counts[3] = {0, 0, 0};
  for (int k = 0; k < draws; ++k) {
    const int who = DispatchAnswer(selected, 0.5, tp, rng);
    ++counts[who == kNoAnswer ? 2 : who];
  }
  const double expected[3] = {0.25, 0.25, 0.5};
  for (int i = 0; i < 3; ++i) {
    const double se = std::sqrt(expected[i] * (1 - expected[i]) / draws);
    EXPECT_NEAR(static_cast<double>(counts[i]) / draws, expected[i], 3 * se);
  }
}

TEST(DispatchTest, UnequalCapabilities) {
  const std::vector<double> tp = {2.0, 0.5, 1.5};
  const std::vector<int> selected = {0, 2};
  Rng rng(6);
  const int draws = 100000;
  int ours = 0;
  for (int k = 0; k < draws; ++k) {
    ours += DispatchAnswer(selected, 0.8, tp, rng) == 0;
  }
  const double p = 0.8 * 2.0 / 3.5;
  EXPECT_NEAR(static_cast<double>(ours) / draws, p,
              3 * std::sqrt(p * (1 - p) / draws));
}

TEST(OrderStatisticTest, KthLowestFollowsBeta) {
  ScenarioConfig c = SmallConfig();
  c.competitor_distance_slopes.clear();
  c.own_quote_noise = c.quote_noise;
  c.orders_per_slot = 24 * 10000;
  c.order_count_mixture = {{1.0, 12.0, 1e6}};
  Rng rng(77);
  const auto orders = GenerateSlotOrders(c, 0, rng);
  ASSERT_EQ(orders.size(), 10000u);
  std::vector<double> stat;
  for (const Opportunity& o : orders) {
    std::vector<double> q = AllQuotes(o, 0.0);
    std::sort(q.begin(), q.end());
    // Quotes are g * exp(sigma * N(0,1)).
    stat.push_back(NormalCdf(std::log(q[1] / o.base_price) / c.quote_noise));
  }
  const double d = testing::KsStatistic(
      stat, [](double x) { return testing::BetaCdfInteger(x, 2, 4); });
  EXPECT_LT(d, testing::KsCritical01(stat.size()));
}

TEST(ResolveOrderTest, CompletionImpliesSentImpliesInRange) {
  const ScenarioConfig c = SmallConfig();
  Episode ep(c, 5, 24);
  for (int t = 0; t < 24; ++t) {
    for (const Opportunity& o : ep.orders(t)) {
      for (double d : kCoupons) {
        const OrderResolution r = ResolveOrder(c, o, d);
        if (r.completed) EXPECT_TRUE(r.sent);
        if (r.sent) EXPECT_TRUE(r.in_range);
        EXPECT_GE(r.completion_probability, 0.0);
        EXPECT_LE(r.completion_probability, 1.0);
        const auto flags = RankAndAutoselect(AllQuotes(o, d), c.topk_base);
        EXPECT_EQ(r.in_range, flags[0]);
      }
    }
  }
}

TEST(EpisodeTest, NoCouponMeansNoCost) {
  const ScenarioConfig c = SmallConfig();
  Episode ep(c, 1, 24);
  for (int t = 0; t < ep.num_slots(); ++t) {
    std::vector<int> assignment(ep.orders(t).size(), 0);
    EXPECT_EQ(ep.Step(t, assignment, kCoupons).cost, 0.0);
  }
}

TEST(EpisodeTest, LowestQuoteIsAlwaysInRange) {
  const ScenarioConfig c = SmallConfig();
  Episode ep(c, 2, 6);
  const std::vector<double> deep = {0.0, 0.9};
  for (int t = 0; t < ep.num_slots(); ++t) {
    const auto& orders = ep.orders(t);
    std::vector<int> assignment(orders.size(), 1);
    const SlotOutcome out = ep.Step(t, assignment, deep);
    for (size_t i = 0; i < orders.size(); ++i) {
      const auto& q = orders[i].competitor_quotes;
      if (orders[i].base_price * 0.1 < *std::min_element(q.begin(), q.end())) {
        EXPECT_TRUE(out.records[i].in_range);
      }
    }
  }
}

TEST(EpisodeTest, ConservationAndAccounting) {
  const ScenarioConfig c = SmallConfig();
  Episode ep(c, 3, 24);
  Rng rng(4);
  std::uniform_int_distribution<int> pick(0, 4);
  for (int t = 0; t < ep.num_slots(); ++t) {
    const auto& orders = ep.orders(t);
    std::vector<int> assignment(orders.size());
    std::vector<int> clusters(orders.size());
    for (size_t i = 0; i < orders.size(); ++i) {
      assignment[i] = pick(rng);
      clusters[i] = static_cast<int>(i % 3);
    }
    const SlotOutcome out = ep.Step(t, assignment, kCoupons, clusters, 3);
    double cost = 0.0, gmv = 0.0;
    int completions = 0, sent = 0, in_range = 0;
    for (size_t i = 0; i < orders.size(); ++i) {
      const OrderRecord& r = out.records[i];
      cost += r.cost;
      gmv += r.gmv;
      completions += r.completed;
      sent += r.sent;
      in_range += r.in_range;
      if (!r.completed) EXPECT_EQ(r.cost, 0.0);
      if (r.completed) {
        EXPECT_LE(r.cost, r.gmv);
        EXPECT_DOUBLE_EQ(r.gmv, orders[i].base_price);
        EXPECT_DOUBLE_EQ(r.cost, orders[i].base_price * kCoupons[r.coupon]);
      }
    }
    EXPECT_DOUBLE_EQ(out.cost, cost);
    EXPECT_DOUBLE_EQ(out.gmv, gmv);
    EXPECT_EQ(out.completions, completions);
    EXPECT_EQ(out.sent, sent);
    EXPECT_EQ(out.in_range, in_range);
    EXPECT_LE(completions, sent);
    EXPECT_LE(sent, static_cast<int>(orders.size()));
    int cell_in = 0, cell_n = 0;
    for (int v : out.in_range_count) cell_in += v;
    for (int v : out.order_count) cell_n += v;
    EXPECT_EQ(cell_in, in_range);
    EXPECT_EQ(cell_n, static_cast<int>(orders.size()));
  }
}

TEST(EpisodeTest, StepValidatesAssignment) {
  Episode ep(SmallConfig(), 1, 2);
  std::vector<int> short_assignment(ep.orders(0).size() - 1, 0);
  EXPECT_THROW(ep.Step(0, short_assignment, kCoupons), ArgumentError);
  std::vector<int> bad(ep.orders(0).size(), 9);
  EXPECT_THROW(ep.Step(0, bad, kCoupons), ArgumentError);
}

TEST(EpisodeTest, DeterministicTrace) {
  ScenarioConfig c = SmallConfig();
  c.change_probability = 0.3;
  auto trace = [&c]() {
    Episode ep(c, 11, 30);
    std::ostringstream out;
    WriteTraceCsvHeader(out);
    for (int t = 0; t < ep.num_slots(); ++t) {
      std::vector<int> assignment(ep.orders(t).size());
      for (size_t i = 0; i < assignment.size(); ++i) assignment[i] = i % 5;
      WriteTraceCsvRow(out, ep.Step(t, assignment, kCoupons));
    }
    return out.str();
  };
  const std::string first = trace();
  EXPECT_EQ(first, trace());
  EXPECT_EQ(first.rfind("slot,orders,in_range_rate,completions,cost,gmv\n", 0),
            0u);
}

TEST(EpisodeTest, ChangeProbabilityOnlyMovesPrices) {
  ScenarioConfig calm = SmallConfig();
  calm.change_probability = 0.0;
  ScenarioConfig busy = calm;
  busy.change_probability = 0.4;
  Episode a(calm, 21, 12);
  Episode b(busy, 21, 12);
  for (int t = 0; t < 12; ++t) {
    ASSERT_EQ(a.orders(t).size(), b.orders(t).size());
    for (size_t i = 0; i < a.orders(t).size(); ++i) {
      EXPECT_EQ(a.orders(t)[i].x, b.orders(t)[i].x);
      for (int r = 1; r < 5; ++r) {
        EXPECT_NEAR(b.orders(t)[i].competitor_quotes[r - 1],
                    a.orders(t)[i].competitor_quotes[r - 1] *
                        b.multipliers(t)[r],
                    1e-9 * a.orders(t)[i].competitor_quotes[r - 1]);
      }
    }
  }
}

TEST(EpisodeTest, ExpectedCompletionsMatchRealized) {
  const ScenarioConfig c = SmallConfig();
  Episode ep(c, 8, 48);
  double expected = 0.0, variance = 0.0;
  int realized = 0;
  for (int t = 0; t < ep.num_slots(); ++t) {
    const auto& orders = ep.orders(t);
    std::vector<int> assignment(orders.size());
    for (size_t i = 0; i < orders.size(); ++i) assignment[i] = i % 5;
    const std::vector<double> z = ep.CompletionMatrix(t, kCoupons);
    for (size_t i = 0; i < orders.size(); ++i) {
      const double p = z[i * 5 + assignment[i]];
      expected += p;
      variance += p * (1 - p);
    }
    realized += ep.Step(t, assignment, kCoupons).completions;
  }
  EXPECT_NEAR(realized, expected, 3 * std::sqrt(variance));
}

}  // namespace
}  // namespace ridegym
