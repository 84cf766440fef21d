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

#include <numeric>

#include "mcrank/metrics.h"
#include "mcrank/random.h"
#include "oracles.h"

namespace mcrank {
namespace {

TEST(NdcgTest, HandComputed) {
  const std::vector<double> labels = {3, 1, 0};
  const std::vector<int> ideal = {0, 1, 2};
  const std::vector<int> reversed = {2, 1, 0};
  EXPECT_EQ(NdcgAtK(labels, ideal, 3), 1.0);
  EXPECT_NEAR(DcgAtK(labels, reversed, 3), 4.13093, 1e-5);
  EXPECT_NEAR(IdealDcgAtK(labels, 3), 7.63093, 1e-5);
  EXPECT_NEAR(NdcgAtK(labels, reversed, 3), 0.54134, 1e-5);
  const std::vector<double> zeros = {0, 0, 0};
  EXPECT_EQ(NdcgAtK(zeros, reversed, 3), 0.0);
}

TEST(NdcgTest, OrderByScoreTiesByIndex) {
  const std::vector<double> s = {1, 3, 3, 0};
  EXPECT_EQ(OrderByScore(s), (std::vector<int>{1, 2, 0, 3}));
}

TEST(NdcgProperty, MatchesBruteForce) {
  Rng rng(51);
  for (int trial = 0; trial < 10000; ++trial) {
    const size_t n = 1 + rng.Below(10);
    std::vector<double> labels(n);
    for (auto& l : labels) l = rng.Bernoulli(0.3) ? std::round(rng.NextDouble() * 4) : rng.NextDouble() * 4;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.Below(i)]);
    const int k = 1 + static_cast<int>(rng.Below(12));
    const double got = NdcgAtK(labels, order, k);
    ASSERT_NEAR(got, oracle::Ndcg(labels, order, k), 1e-9);
    ASSERT_GE(got, 0.0);
    ASSERT_LE(got, 1.0 + 1e-12);
  }
}

TEST(NdcgProperty, MonotoneTransformAndTruncationPastLength) {
  Rng rng(52);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 2 + rng.Below(9);
    std::vector<double> labels(n), scores(n), transformed(n);
    for (size_t i = 0; i < n; ++i) {
      labels[i] = std::round(rng.NextDouble() * 4);
      scores[i] = rng.Normal();
      transformed[i] = std::exp(3 * scores[i]) + 5;
    }
    const auto a = OrderByScore(scores);
    const auto b = OrderByScore(transformed);
    EXPECT_EQ(NdcgAtK(labels, a, 8), NdcgAtK(labels, b, 8));
    EXPECT_EQ(NdcgAtK(labels, a, static_cast<int>(n)), NdcgAtK(labels, a, 1000));
  }
}

}  // namespace
}  // namespace mcrank
