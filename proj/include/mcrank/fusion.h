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

#ifndef MCRANK_FUSION_H_
#define MCRANK_FUSION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mcrank/candidates.h"

namespace mcrank {

inline constexpr double kDefaultRrfK = 60.0;

struct FusedList {
  QueryId query;
  std::vector<ItemId> items;
  // Present for RRF, absent for weighted interleaving.
  std::optional<std::vector<double>> scores;
};

// Reciprocal rank fusion: score(i) = sum over lists containing i of
// 1 / (k_rrf + rank), rank 1-based. Sorted by score descending, ties by
// ItemId ascending.
FusedList RrfFuse(std::span<const ChannelList> lists, double k_rrf = kDefaultRrfK);

// Channel index -> non-negative weight. Normalized internally.
struct InterleaveWeights {
  std::map<int, double> weights;

  static InterleaveWeights Uniform(std::span<const ChannelList> lists);
};

// Weighted interleaving without replacement. Each draw picks a channel with
// remaining entries with probability proportional to its weight (uniformly
// among the remaining channels when all of them have zero weight) and emits
// its highest-ranked entry; an entry already emitted through another channel
// is consumed without being emitted and the draw repeats. Channels are
// scanned in ascending index order when mapping a uniform draw to a channel,
// using one Rng::NextDouble() per draw.
FusedList WeightedInterleave(std::span<const ChannelList> lists,
                             const InterleaveWeights& w, uint64_t seed);

}  // namespace mcrank

#endif  // MCRANK_FUSION_H_
