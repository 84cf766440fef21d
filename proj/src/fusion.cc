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

#include "mcrank/fusion.h"

#include <algorithm>
#include <unordered_set>

#include "mcrank/random.h"

namespace mcrank {
namespace {

const QueryId& CommonQuery(std::span<const ChannelList> lists) {
  const QueryId& q = lists.front().query();
  for (const auto& l : lists) {
    if (l.query() != q) {
      throw InvalidInputError("fusion: lists belong to different queries");
    }
  }
  return q;
}

}  // namespace

FusedList RrfFuse(std::span<const ChannelList> lists, double k_rrf) {
  if (!(k_rrf > 0)) throw InvalidInputError("k_rrf must be positive");
  FusedList out;
  if (lists.empty()) {
    out.scores.emplace();
    return out;
  }
  out.query = CommonQuery(lists);
  std::map<ItemId, double> acc;
  for (const auto& list : lists) {
    for (size_t r = 0; r < list.size(); ++r) {
      acc[list.entries()[r].item] += 1.0 / (k_rrf + static_cast<double>(r + 1));
    }
  }
  std::vector<std::pair<ItemId, double>> ranked(acc.begin(), acc.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  out.scores.emplace();
  for (auto& [item, score] : ranked) {
    out.items.push_back(item);
    out.scores->push_back(score);
  }
  return out;
}

InterleaveWeights InterleaveWeights::Uniform(std::span<const ChannelList> lists) {
  InterleaveWeights w;
  for (const auto& l : lists) w.weights[l.channel().index] = 1.0;
  return w;
}

FusedList WeightedInterleave(std::span<const ChannelList> lists,
                             const InterleaveWeights& w, uint64_t seed) {
  FusedList out;
  if (lists.empty()) return out;
  out.query = CommonQuery(lists);

  // Channels in ascending index order.
  std::vector<const ChannelList*> order;
  for (const auto& l : lists) order.push_back(&l);
  std::sort(order.begin(), order.end(), [](const ChannelList* a, const ChannelList* b) {
    return a->channel().index < b->channel().index;
  });
  std::vector<double> weight(order.size());
  bool any_positive = false;
  for (size_t c = 0; c < order.size(); ++c) {
    auto it = w.weights.find(order[c]->channel().index);
    if (it == w.weights.end()) {
      throw InvalidInputError("weighted_interleave: no weight for channel '" +
                              order[c]->channel().name + "'");
    }
    if (!(it->second >= 0)) {
      throw InvalidInputError("weighted_interleave: negative weight");
    }
    weight[c] = it->second;
    any_positive |= it->second > 0;
  }
  if (!any_positive) {
    throw InvalidInputError("weighted_interleave: all channel weights are zero");
  }

  Rng rng(seed);
  std::vector<size_t> head(order.size(), 0);
  std::unordered_set<ItemId> emitted;
  while (true) {
    double total = 0;
    size_t live = 0;
    for (size_t c = 0; c < order.size(); ++c) {
      if (head[c] < order[c]->size()) {
        total += weight[c];
        ++live;
      }
    }
    if (live == 0) break;
    const bool uniform = total <= 0;
    const double target =
        rng.NextDouble() * (uniform ? static_cast<double>(live) : total);
    size_t pick = order.size();
    double cum = 0;
    size_t last_live = 0;
    for (size_t c = 0; c < order.size(); ++c) {
      if (head[c] >= order[c]->size()) continue;
      if (!uniform && weight[c] <= 0) continue;
      last_live = c;
      cum += uniform ? 1.0 : weight[c];
      if (target < cum) {
        pick = c;
        break;
      }
    }
    if (pick == order.size()) pick = last_live;  // rounding at the upper end
    const ItemId& item = order[pick]->entries()[head[pick]].item;
    ++head[pick];
    if (emitted.insert(item).second) out.items.push_back(item);
  }
  return out;
}

}  // namespace mcrank
