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

#include "mcrank/fusion.h"
#include "mcrank/random.h"
#include "oracles.h"
#include "test_util.h"

namespace mcrank {
namespace {

using testing_util::MakeList;

std::vector<std::string> Ids(const FusedList& f) {
  std::vector<std::string> out;
  for (const auto& i : f.items) out.push_back(i.value());
  return out;
}

TEST(RrfTest, SingleList) {
  const std::vector<ChannelList> lists = {MakeList(0, "q", {{"A", 2}, {"B", 1}})};
  const FusedList f = RrfFuse(lists, 60);
  EXPECT_EQ(Ids(f), (std::vector<std::string>{"A", "B"}));
  ASSERT_TRUE(f.scores.has_value());
  EXPECT_DOUBLE_EQ((*f.scores)[0], 1.0 / 61);
  EXPECT_DOUBLE_EQ((*f.scores)[1], 1.0 / 62);
}

TEST(RrfTest, TopInBothLists) {
  const std::vector<ChannelList> lists = {MakeList(0, "q", {{"A", 2}, {"B", 1}}),
                                          MakeList(1, "q", {{"A", 5}, {"C", 1}})};
  const FusedList f = RrfFuse(lists, 60);
  EXPECT_EQ(f.items[0].value(), "A");
  EXPECT_NEAR((*f.scores)[0], 0.0327869, 1e-7);
  EXPECT_DOUBLE_EQ((*f.scores)[0], 2.0 / 61);
}

TEST(RrfTest, DuplicateListsKeepOrderAndEmptyInput) {
  const auto l = MakeList(0, "q", {{"A", 3}, {"B", 2}, {"C", 1}});
  auto l2 = MakeList(1, "q", {{"A", 3}, {"B", 2}, {"C", 1}});
  const std::vector<ChannelList> lists = {l, l2};
  EXPECT_EQ(Ids(RrfFuse(lists)), (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_TRUE(RrfFuse(std::span<const ChannelList>{}).items.empty());
  EXPECT_THROW(RrfFuse(lists, 0), InvalidInputError);
}

std::vector<ChannelList> RandomLists(Rng& rng, int channels, int max_len, int alphabet) {
  std::vector<ChannelList> lists;
  for (int c = 0; c < channels; ++c) {
    std::vector<std::pair<std::string, double>> entries;
    std::set<std::string> seen;
    const int len = static_cast<int>(rng.Below(max_len + 1));
    for (int i = 0; i < len; ++i) {
      const std::string id = "i" + std::to_string(rng.Below(alphabet));
      if (seen.insert(id).second) entries.push_back({id, rng.NextDouble()});
    }
    lists.push_back(MakeList(c, "q", entries));
  }
  return lists;
}

TEST(RrfProperty, MatchesBruteForceTable) {
  Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto lists = RandomLists(rng, 1 + rng.Below(4), 15, 30);
    const double k = 1 + rng.Below(100);
    std::vector<std::vector<std::string>> ranked;
    for (const auto& l : lists) {
      ranked.emplace_back();
      for (const auto& e : l.entries()) ranked.back().push_back(e.item.value());
    }
    const auto table = oracle::RrfTable(ranked, k);
    const FusedList f = RrfFuse(lists, k);
    ASSERT_EQ(f.items.size(), table.size());
    for (size_t i = 0; i < f.items.size(); ++i) {
      EXPECT_EQ((*f.scores)[i], table.at(f.items[i].value()));
      if (i > 0) {
        const double prev = (*f.scores)[i - 1], cur = (*f.scores)[i];
        EXPECT_TRUE(prev > cur || (prev == cur && f.items[i - 1] < f.items[i]));
      }
    }
  }
}

TEST(RrfProperty, ScaleAndPermutationInvariant) {
  Rng rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const auto lists = RandomLists(rng, 3, 10, 20);
    const auto base = Ids(RrfFuse(lists));
    std::vector<ChannelList> scaled;
    for (const auto& l : lists) {
      std::vector<ScoredItem> e = l.entries();
      for (auto& x : e) x.score = x.score * 7.5 + 0;
      scaled.emplace_back(l.channel(), l.query(), e);
    }
    EXPECT_EQ(Ids(RrfFuse(scaled)), base);
    std::vector<ChannelList> permuted = {lists[2], lists[0], lists[1]};
    EXPECT_EQ(Ids(RrfFuse(permuted)), base);
  }
}

TEST(WiTest, DegenerateWeightsFollowChannelZero) {
  const std::vector<ChannelList> lists = {MakeList(0, "q", {{"A", 3}, {"B", 2}, {"C", 1}}),
                                          MakeList(1, "q", {{"D", 3}, {"B", 2}, {"E", 1}})};
  InterleaveWeights w;
  w.weights = {{0, 1.0}, {1, 0.0}};
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const FusedList f = WeightedInterleave(lists, w, seed);
    EXPECT_EQ(Ids(f), (std::vector<std::string>{"A", "B", "C", "D", "E"}));
    EXPECT_FALSE(f.scores.has_value());
  }
}

TEST(WiTest, IdenticalSingletonsDeduplicate) {
  const std::vector<ChannelList> lists = {MakeList(0, "q", {{"A", 1}}), MakeList(1, "q", {{"A", 1}})};
  EXPECT_EQ(Ids(WeightedInterleave(lists, InterleaveWeights::Uniform(lists), 3)),
            (std::vector<std::string>{"A"}));
}

TEST(WiTest, Errors) {
  const std::vector<ChannelList> lists = {MakeList(0, "q", {{"A", 1}}), MakeList(1, "q", {{"B", 1}})};
  InterleaveWeights zero;
  zero.weights = {{0, 0.0}, {1, 0.0}};
  EXPECT_THROW(WeightedInterleave(lists, zero, 1), InvalidInputError);
  InterleaveWeights partial;
  partial.weights = {{0, 1.0}};
  EXPECT_THROW(WeightedInterleave(lists, partial, 1), InvalidInputError);
  InterleaveWeights negative;
  negative.weights = {{0, 1.0}, {1, -1.0}};
  EXPECT_THROW(WeightedInterleave(lists, negative, 1), InvalidInputError);
}

TEST(WiTest, FirstItemFrequencyFollowsWeights) {
  std::vector<std::pair<std::string, double>> a, b;
  for (int i = 0; i < 50; ++i) {
    a.push_back({"a" + std::to_string(i), 100.0 - i});
    b.push_back({"b" + std::to_string(i), 100.0 - i});
  }
  const std::vector<ChannelList> lists = {MakeList(0, "q", a), MakeList(1, "q", b)};
  InterleaveWeights w;
  w.weights = {{0, 0.7}, {1, 0.3}};
  int from0 = 0;
  for (uint64_t seed = 0; seed < 10000; ++seed) {
    from0 += WeightedInterleave(lists, w, seed).items[0].value()[0] == 'a';
  }
  EXPECT_NEAR(from0 / 10000.0, 0.7, 0.02);
}

TEST(WiProperty, PermutationOfUnionAndSeedDeterminism) {
  Rng rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const auto lists = RandomLists(rng, 1 + rng.Below(4), 12, 25);
    InterleaveWeights w;
    for (const auto& l : lists) w.weights[l.channel().index] = rng.NextDouble() + 0.01;
    const uint64_t seed = rng.NextU64();
    const FusedList f = WeightedInterleave(lists, w, seed);
    std::set<std::string> uni;
    for (const auto& l : lists) {
      for (const auto& e : l.entries()) uni.insert(e.item.value());
    }
    auto ids = Ids(f);
    EXPECT_EQ(Ids(WeightedInterleave(lists, w, seed)), ids);
    std::set<std::string> got(ids.begin(), ids.end());
    EXPECT_EQ(got.size(), ids.size());
    EXPECT_EQ(got, uni);
  }
}

TEST(FusionProperty, SingleChannelReturnsItsOrder) {
  Rng rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    const auto lists = RandomLists(rng, 1, 15, 40);
    std::vector<std::string> expect;
    for (const auto& e : lists[0].entries()) expect.push_back(e.item.value());
    EXPECT_EQ(Ids(RrfFuse(lists)), expect);
    EXPECT_EQ(Ids(WeightedInterleave(lists, InterleaveWeights::Uniform(lists), trial)), expect);
  }
}

}  // namespace
}  // namespace mcrank
