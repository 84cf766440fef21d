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

#include "mcrank/candidates.h"
#include "mcrank/common.h"
#include "mcrank/random.h"
#include "test_util.h"

namespace mcrank {
namespace {

using testing_util::MakeList;

TEST(Ids, EmptyRejectedAndOrderedByBytes) {
  EXPECT_THROW(ItemId(""), InvalidInputError);
  EXPECT_THROW(WeekId(-1), InvalidInputError);
  EXPECT_LT(ItemId("B"), ItemId("a"));
  EXPECT_EQ(WeekId(3).Next(), WeekId(4));
  EXPECT_EQ((ChannelId{1, "x"}), (ChannelId{1, "y"}));
}

TEST(ChannelListTest, SortsByScoreThenItem) {
  const ChannelList l = MakeList(0, "q", {{"C", 0.5}, {"A", 0.9}, {"B", 0.5}});
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l.entries()[0].item.value(), "A");
  EXPECT_EQ(l.entries()[1].item.value(), "B");
  EXPECT_EQ(l.entries()[2].item.value(), "C");
}

TEST(ChannelListTest, RejectsNonFiniteAndDuplicates) {
  EXPECT_THROW(MakeList(0, "q", {{"A", std::nan("")}}), InvalidInputError);
  EXPECT_THROW(MakeList(0, "q", {{"A", INFINITY}}), InvalidInputError);
  EXPECT_THROW(MakeList(0, "q", {{"A", 1}, {"A", 2}}), InvalidInputError);
}

TEST(TruncateTest, Examples) {
  const ChannelList l = MakeList(0, "q", {{"A", .9}, {"B", .5}, {"C", .1}});
  const ChannelList t = Truncate(l, 2);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.entries()[0], (ScoredItem{ItemId("A"), .9}));
  EXPECT_EQ(t.entries()[1], (ScoredItem{ItemId("B"), .5}));
  EXPECT_EQ(Truncate(MakeList(0, "q", {{"A", .9}}), 5).size(), 1u);
  EXPECT_TRUE(Truncate(MakeList(0, "q", {}), 3).empty());
  EXPECT_THROW(Truncate(l, 0), InvalidInputError);
}

TEST(MergePoolTest, SingleChannelIdentity) {
  const std::vector<ChannelList> lists = {MakeList(0, "q", {{"A", .9}, {"B", .5}})};
  const CandidatePool pool = MergePool(lists, TruncationConfig::Uniform(2));
  ASSERT_EQ(pool.size(), 2u);
  EXPECT_EQ(pool.Find(ItemId("A"))->hits, (std::vector<ChannelHit>{{ChannelId{0, "c0"}, 1, .9}}));
  EXPECT_EQ(pool.Find(ItemId("B"))->hits, (std::vector<ChannelHit>{{ChannelId{0, "c0"}, 2, .5}}));
}

TEST(MergePoolTest, OverlapHasMultiEntryProvenance) {
  const std::vector<ChannelList> lists = {MakeList(0, "q", {{"A", .9}, {"B", .5}}),
                                          MakeList(1, "q", {{"B", .8}, {"C", .2}})};
  const CandidatePool pool = MergePool(lists, TruncationConfig::Uniform(2));
  ASSERT_EQ(pool.size(), 3u);
  const Candidate* b = pool.Find(ItemId("B"));
  ASSERT_NE(b, nullptr);
  ASSERT_EQ(b->hits.size(), 2u);
  EXPECT_EQ(b->hits[0].rank, 2);
  EXPECT_EQ(b->hits[1].rank, 1);
  EXPECT_EQ(b->hits[1].score, .8);
}

TEST(MergePoolTest, TruncatesBeforeUnion) {
  const std::vector<ChannelList> lists = {MakeList(0, "q", {{"A", .9}, {"B", .5}, {"C", .1}}),
                                          MakeList(1, "q", {{"C", .7}})};
  const CandidatePool pool = MergePool(lists, TruncationConfig::Uniform(1));
  ASSERT_EQ(pool.size(), 2u);
  EXPECT_TRUE(pool.Contains(ItemId("A")));
  EXPECT_TRUE(pool.Contains(ItemId("C")));
  EXPECT_FALSE(pool.Contains(ItemId("B")));
  EXPECT_EQ(pool.Find(ItemId("C"))->hits.size(), 1u);
}

TEST(MergePoolTest, PerChannelDepth) {
  TruncationConfig cfg;
  cfg.per_channel_n = {{0, 1}, {1, 2}};
  const std::vector<ChannelList> lists = {MakeList(0, "q", {{"A", .9}, {"B", .5}}),
                                          MakeList(1, "q", {{"C", .8}, {"D", .2}, {"E", .1}})};
  EXPECT_EQ(MergePool(lists, cfg).size(), 3u);
  EXPECT_THROW(MergePool(lists, TruncationConfig{}), InvalidInputError);
}

TEST(MergePoolTest, Errors) {
  const std::vector<ChannelList> mixed = {MakeList(0, "q1", {{"A", 1}}), MakeList(1, "q2", {{"B", 1}})};
  EXPECT_THROW(MergePool(mixed, TruncationConfig::Uniform(5)), InvalidInputError);
  const std::vector<ChannelList> dup = {MakeList(0, "q", {{"A", 1}}), MakeList(0, "q", {{"B", 1}})};
  EXPECT_THROW(MergePool(dup, TruncationConfig::Uniform(5)), InvalidInputError);
}

// Random multi-channel inputs over a small item alphabet so overlaps happen.
std::vector<ChannelList> RandomLists(Rng& rng, int channels, int max_len) {
  std::vector<ChannelList> lists;
  for (int c = 0; c < channels; ++c) {
    std::vector<std::pair<std::string, double>> entries;
    std::set<std::string> seen;
    const int len = static_cast<int>(rng.Below(max_len + 1));
    for (int i = 0; i < len; ++i) {
      const std::string id = "i" + std::to_string(rng.Below(20));
      if (!seen.insert(id).second) continue;
      entries.push_back({id, std::round(rng.NextDouble() * 8) / 8});
    }
    lists.push_back(MakeList(c, "q", entries));
  }
  return lists;
}

TEST(MergePoolProperty, SizeBoundOrderInsensitiveAndExactProvenance) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int channels = 1 + static_cast<int>(rng.Below(4));
    auto lists = RandomLists(rng, channels, 12);
    const int n = 1 + static_cast<int>(rng.Below(8));
    const auto cfg = TruncationConfig::Uniform(n);
    const CandidatePool pool = MergePool(lists, cfg);

    size_t bound = 0;
    std::set<std::string> distinct;
    for (const auto& l : lists) {
      const auto t = Truncate(l, n);
      bound += t.size();
      for (const auto& e : t.entries()) distinct.insert(e.item.value());
    }
    EXPECT_LE(pool.size(), bound);
    EXPECT_EQ(pool.size(), distinct.size());
    EXPECT_EQ(pool.size() == bound, distinct.size() == bound);

    for (const auto& cand : pool.candidates()) {
      EXPECT_FALSE(cand.hits.empty());
      for (const auto& hit : cand.hits) {
        const auto t = Truncate(lists[hit.channel.index], n);
        ASSERT_LE(hit.rank, static_cast<int>(t.size()));
        EXPECT_LE(hit.rank, n);
        EXPECT_EQ(t.entries()[hit.rank - 1].item, cand.item);
        EXPECT_EQ(t.entries()[hit.rank - 1].score, hit.score);
      }
    }

    std::reverse(lists.begin(), lists.end());
    EXPECT_EQ(MergePool(lists, cfg), pool);
  }
}

TEST(ChannelListIo, RoundTripAndSortOnLoad) {
  std::istringstream in("q1\tb\tX\t0.5\nq1\ta\tY\t0.1\nq1\ta\tZ\t0.9\nq2\tb\tX\t1\n");
  std::vector<std::string> names;
  const auto lists = ReadChannelLists(in, names);
  EXPECT_EQ(names, (std::vector<std::string>{"b", "a"}));
  ASSERT_EQ(lists.size(), 3u);
  const auto it = std::find_if(lists.begin(), lists.end(), [](const ChannelList& l) {
    return l.query().value() == "q1" && l.channel().name == "a";
  });
  ASSERT_NE(it, lists.end());
  EXPECT_EQ(it->entries()[0].item.value(), "Z");

  std::ostringstream out;
  WriteChannelLists(out, lists);
  std::istringstream back(out.str());
  std::vector<std::string> names2 = names;
  const auto again = ReadChannelLists(back, names2);
  ASSERT_EQ(again.size(), lists.size());
  for (size_t i = 0; i < lists.size(); ++i) EXPECT_EQ(again[i].entries(), lists[i].entries());

  std::istringstream bad("q1\tb\tX\n");
  std::vector<std::string> n3;
  EXPECT_THROW(ReadChannelLists(bad, n3), InvalidInputError);
  std::istringstream unknown("q1\tzzz\tX\t1\n");
  std::vector<std::string> fixed = {"a"};
  EXPECT_THROW(ReadChannelLists(unknown, fixed), InvalidInputError);
}

TEST(Common, FormatDoubleRoundTrips) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.NextDouble() - 0.5) * std::pow(10.0, static_cast<int>(rng.Below(20)) - 10);
    EXPECT_EQ(ParseDouble(FormatDouble(v)), v);
  }
  EXPECT_THROW(ParseDouble("nan"), InvalidInputError);
  EXPECT_TRUE(std::isnan(ParseDouble("nan", true)));
  EXPECT_THROW(ParseInt("12x"), InvalidInputError);
  EXPECT_EQ(ParseInt("-12"), -12);
}

TEST(Common, SplitTabsKeepsEmptyFields) {
  const auto parts = SplitTabs("a\t\tb");
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[1], "");
  EXPECT_EQ(TrimLineEnd("x\r\n"), "x");
}

TEST(Common, FnvKnownVector) {
  // FNV-1a 64 of "a".
  EXPECT_EQ(HashString("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(HexDigest(0xabcULL), "0000000000000abc");
}

TEST(RngTest, DeterministicAndInRange) {
  Rng a(99), b(99), c(100);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    differs |= x != c.NextU64();
  }
  EXPECT_TRUE(differs);
  Rng r(5);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.NextDouble();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    ASSERT_LT(r.Below(7), 7u);
  }
  EXPECT_NEAR(sum / 20000, 0.5, 0.01);
  double pm = 0;
  for (int i = 0; i < 20000; ++i) pm += r.Poisson(4.0);
  EXPECT_NEAR(pm / 20000, 4.0, 0.1);
}

TEST(RngTest, DeriveSeedSeparatesStreams) {
  EXPECT_NE(DeriveSeed(1, 2), DeriveSeed(2, 1));
  EXPECT_NE(DeriveSeed(1, 2), DeriveSeed(1, 3));
  EXPECT_EQ(DeriveSeed(1, 2), DeriveSeed(1, 2));
}

}  // namespace
}  // namespace mcrank
