/*
 * Copyright 2026 The mcrank Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "mcrank/labeling.h"
#include "mcrank/random.h"

namespace mcrank {
namespace {

InteractionEvent Ev(uint32_t session, Action a, int week = 0, uint32_t query = 0, uint32_t item = 0) {
  InteractionEvent e;
  e.session = session;
  e.action = a;
  e.week = week;
  e.query = query;
  e.item = item;
  e.timestamp = WeekStart(week) + 10;
  return e;
}

TEST(DeepestActionTest, Examples) {
  std::vector<InteractionEvent> e = {Ev(1, Action::kImpression)};
  EXPECT_EQ(DeepestAction(e), Action::kImpression);
  e = {Ev(1, Action::kImpression), Ev(1, Action::kClick), Ev(1, Action::kAddToCart)};
  EXPECT_EQ(DeepestAction(e), Action::kAddToCart);
  e = {Ev(1, Action::kPurchase), Ev(1, Action::kImpression)};
  EXPECT_EQ(DeepestAction(e), Action::kPurchase);
  EXPECT_THROW(DeepestAction(std::span<const InteractionEvent>{}), InvalidInputError);
  e = {Ev(1, Action::kClick), Ev(2, Action::kClick)};
  EXPECT_THROW(DeepestAction(e), InvalidInputError);
}

TEST(FunnelCountsTest, Examples) {
  std::vector<InteractionEvent> e = {
      Ev(1, Action::kImpression), Ev(1, Action::kClick),    Ev(2, Action::kImpression),
      Ev(2, Action::kClick),      Ev(3, Action::kImpression), Ev(3, Action::kClick),
      Ev(3, Action::kAddToCart),  Ev(3, Action::kPurchase)};
  const FunnelCounts f = ComputeFunnelCounts(e);
  EXPECT_EQ(f.view_only, 0);
  EXPECT_EQ(f.clicks, 2);
  EXPECT_EQ(f.add_to_carts, 0);
  EXPECT_EQ(f.purchases, 1);
  EXPECT_EQ(f.sessions(), 3);

  e = {Ev(9, Action::kImpression)};
  EXPECT_EQ(ComputeFunnelCounts(e).view_only, 1);
  EXPECT_EQ(ComputeFunnelCounts(std::span<const InteractionEvent>{}).sessions(), 0);
  e = {Ev(1, Action::kClick, 0), Ev(1, Action::kClick, 1)};
  EXPECT_THROW(ComputeFunnelCounts(e), InvalidInputError);
}

TEST(CalibrateTest, Examples) {
  EXPECT_EQ(CalibrateWeights({100, 400, 2000}), (LabelWeights{1, 0.25, 0.05, 0}));
  EXPECT_EQ(CalibrateWeights({0, 400, 2000}), (LabelWeights{1, 0, 0, 0}));
  const LabelWeights clamped = CalibrateWeights({500, 400, 2000});
  EXPECT_EQ(clamped.b, 1.0);
  EXPECT_EQ(clamped.c, 0.25);
  EXPECT_EQ(CalibrateWeights({500, 400, 450}).c, 1.0);
  EXPECT_THROW(CalibrateWeights({1, 0, 10}), CalibrationError);
  EXPECT_THROW(CalibrateWeights({1, 10, 0}), CalibrationError);
  try {
    CalibrateWeights({1, 0, 10});
  } catch (const CalibrationError& e) {
    EXPECT_NE(std::string(e.what()).find("add-to-cart"), std::string::npos);
  }
}

TEST(RawLabelTest, Examples) {
  const LabelWeights w{1, .25, .05, 0};
  FunnelCounts f;
  f.purchases = 1;
  f.clicks = 2;
  f.view_only = 5;
  EXPECT_DOUBLE_EQ(RawLabel(f, w), 1.10);
  EXPECT_EQ(RawLabel(FunnelCounts{}, w), 0.0);
  FunnelCounts g;
  g.add_to_carts = 2;
  EXPECT_EQ(RawLabel(g, w), 0.5);
}

TEST(NormalizeTest, Examples) {
  const std::map<ItemId, double> raw = {{ItemId("A"), 10}, {ItemId("B"), 5}, {ItemId("C"), 0}};
  const auto n = NormalizeLabels(raw);
  EXPECT_EQ(n.at(ItemId("A")), 4.0);
  EXPECT_EQ(n.at(ItemId("B")), 2.0);
  EXPECT_EQ(n.at(ItemId("C")), 0.0);
  EXPECT_EQ(NormalizeLabels(std::map<ItemId, double>{{ItemId("A"), 7}}).at(ItemId("A")), 4.0);
  const auto z = NormalizeLabels(std::vector<double>{0, 0});
  EXPECT_EQ(z, (std::vector<double>{0, 0}));
  EXPECT_THROW(NormalizeLabels(std::vector<double>{}), InvalidInputError);
  EXPECT_THROW(NormalizeLabels(std::vector<double>{1, -1}), InvalidInputError);
}

FunnelCounts RandomFunnel(Rng& rng) {
  FunnelCounts f;
  // Sparse, like real funnels: most counts small, many zeros.
  f.view_only = rng.Poisson(3.0 * rng.NextDouble());
  f.clicks = rng.Bernoulli(0.6) ? rng.Poisson(2.0) : 0;
  f.add_to_carts = rng.Bernoulli(0.4) ? rng.Poisson(1.0) : 0;
  f.purchases = rng.Bernoulli(0.3) ? rng.Poisson(0.8) : 0;
  return f;
}

TEST(LabelProperty, RandomFunnels) {
  Rng rng(31);
  const LabelWeights weight_sets[] = {{1, .25, .05, 0}, LabelWeights::Heuristic(),
                                      LabelWeights::PurchaseOnly(), {1, 0.4, 0.116, 0}};
  int groups = 0;
  int funnels = 0;
  while (funnels < 10000) {
    const LabelWeights& w = weight_sets[groups++ % 4];
    const size_t n = 1 + rng.Below(30);
    std::vector<FunnelCounts> fs;
    std::vector<double> raw;
    for (size_t i = 0; i < n; ++i) {
      fs.push_back(RandomFunnel(rng));
      const auto& f = fs.back();
      const double expect = w.a * f.purchases + w.b * f.add_to_carts + w.c * f.clicks + w.d * f.view_only;
      raw.push_back(RawLabel(f, w));
      ASSERT_EQ(raw.back(), expect);
    }
    funnels += static_cast<int>(n);
    const auto norm = NormalizeLabels(raw);
    const double max_raw = *std::max_element(raw.begin(), raw.end());
    for (size_t i = 0; i < n; ++i) {
      ASSERT_GE(norm[i], 0.0);
      ASSERT_LE(norm[i], 4.0);
      if (max_raw > 0) {
        EXPECT_EQ(norm[i] == 4.0, raw[i] == max_raw);
        EXPECT_EQ(norm[i] == 0.0, raw[i] == 0.0);
      } else {
        EXPECT_EQ(norm[i], 0.0);
      }
      for (size_t j = 0; j < n; ++j) {
        if (raw[i] < raw[j]) EXPECT_LE(norm[i], norm[j]);
      }
    }
    if (max_raw > 0) EXPECT_EQ(*std::max_element(norm.begin(), norm.end()), 4.0);

    // Scaling the weights leaves normalized labels unchanged.
    const double lambda = 0.5 + 9.5 * rng.NextDouble();
    const LabelWeights scaled{w.a * lambda, w.b * lambda, w.c * lambda, w.d * lambda};
    std::vector<double> raw2;
    for (const auto& f : fs) raw2.push_back(RawLabel(f, scaled));
    const auto norm2 = NormalizeLabels(raw2);
    for (size_t i = 0; i < n; ++i) EXPECT_NEAR(norm2[i], norm[i], 1e-12);
  }
}

TEST(CalibrateProperty, AlwaysOrderedAndDirect) {
  Rng rng(32);
  for (int i = 0; i < 10000; ++i) {
    CorpusStats s;
    s.purchases = rng.Below(5000);
    s.add_to_carts = 1 + rng.Below(5000);
    s.clicks = 1 + rng.Below(20000);
    const LabelWeights w = CalibrateWeights(s);
    ASSERT_TRUE(w.IsOrdered());
    const double b = std::min(1.0, static_cast<double>(s.purchases) / s.add_to_carts);
    const double c = std::min(b, static_cast<double>(s.purchases) / s.clicks);
    EXPECT_EQ(w, (LabelWeights{1, b, c, 0}));
  }
}

TEST(EventLogTest, FunnelSessionsMatchDistinctGroups) {
  EventLog log;
  Rng rng(33);
  const char* actions[] = {"impression", "click", "atc", "purchase"};
  for (int i = 0; i < 3000; ++i) {
    const int week = static_cast<int>(rng.Below(3));
    const int depth = static_cast<int>(rng.Below(4));
    const std::string s = "s" + std::to_string(rng.Below(200));
    const std::string q = "q" + std::to_string(rng.Below(5));
    const std::string it = "i" + std::to_string(rng.Below(10));
    for (int d = 0; d <= depth; ++d) {
      log.Add(WeekStart(week) + 100 + d, week, s, q, it, ParseAction(actions[d]));
    }
  }
  std::set<std::tuple<uint32_t, uint32_t, uint32_t, int>> distinct;
  for (const auto& e : log.events) distinct.insert({e.session, e.query, e.item, e.week});
  int64_t total = 0;
  for (const auto& f : ComputeAllFunnels(log)) {
    total += f.sessions();
    EXPECT_LE(f.purchases, f.sessions());
  }
  EXPECT_EQ(total, static_cast<int64_t>(distinct.size()));

  const CorpusStats all = ComputeCorpusStats(log, 0, 3);
  const CorpusStats first = ComputeCorpusStats(log, 0, 1);
  EXPECT_LE(first.clicks, all.clicks);
  EXPECT_LE(all.purchases, all.add_to_carts);
  EXPECT_LE(all.add_to_carts, all.clicks);

  const EventLog early = log.Before(1);
  for (const auto& e : early.events) EXPECT_LT(e.week, 1);
  EXPECT_EQ(ComputeCorpusStats(early, 0, 3).clicks, first.clicks);
}

TEST(EventLogTest, TextRoundTripAndValidation) {
  EventLog log;
  log.Add(WeekStart(0) + 5, 0, "s1", "q1", "i1", Action::kImpression);
  log.Add(WeekStart(2) + 5, 2, "s2", "q1", "i2", Action::kPurchase);
  EXPECT_THROW(log.Add(WeekStart(1) + 5, 0, "s1", "q1", "i1", Action::kClick), InvalidInputError);
  std::ostringstream out;
  WriteEventLog(out, log);
  EXPECT_NE(out.str().find("\tpurchase"), std::string::npos);
  std::istringstream in(out.str());
  const EventLog back = ReadEventLog(in);
  ASSERT_EQ(back.events.size(), 2u);
  std::ostringstream again;
  WriteEventLog(again, back);
  EXPECT_EQ(again.str(), out.str());

  std::istringstream bad("1\t0\ts\tq\ti\tteleport\n");
  EXPECT_THROW(ReadEventLog(bad), InvalidInputError);
  EXPECT_EQ(ActionName(Action::kAddToCart), "atc");
}

}  // namespace
}  // namespace mcrank
