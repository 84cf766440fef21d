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

#include "mcrank/candidates.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

namespace mcrank {

ChannelList::ChannelList(ChannelId channel, QueryId query,
                         std::vector<ScoredItem> entries)
    : channel_(std::move(channel)),
      query_(std::move(query)),
      entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!std::isfinite(e.score)) {
      throw InvalidInputError("non-finite score for item '" + e.item.value() +
                              "' in channel '" + channel_.name + "'");
    }
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const ScoredItem& a, const ScoredItem& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.item < b.item;
            });
  std::unordered_set<ItemId> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.item).second) {
      throw InvalidInputError("duplicate item '" + e.item.value() +
                              "' in channel '" + channel_.name + "'");
    }
  }
}

ChannelList Truncate(const ChannelList& list, int n) {
  if (n < 1) throw InvalidInputError("truncation depth must be >= 1");
  const size_t keep = std::min<size_t>(n, list.size());
  std::vector<ScoredItem> head(list.entries().begin(),
                               list.entries().begin() + keep);
  return ChannelList(list.channel(), list.query(), std::move(head));
}

int TruncationConfig::NFor(int channel_index) const {
  auto it = per_channel_n.find(channel_index);
  const int n = it != per_channel_n.end() ? it->second : default_n;
  if (n < 1) {
    throw InvalidInputError("no positive n_k configured for channel " +
                            std::to_string(channel_index));
  }
  return n;
}

const Candidate* CandidatePool::Find(const ItemId& item) const {
  auto it = std::lower_bound(
      candidates_.begin(), candidates_.end(), item,
      [](const Candidate& c, const ItemId& id) { return c.item < id; });
  if (it == candidates_.end() || it->item != item) return nullptr;
  return &*it;
}

CandidatePool MergePool(std::span<const ChannelList> lists,
                        const TruncationConfig& cfg) {
  if (lists.empty()) return CandidatePool();
  const QueryId& query = lists.front().query();
  std::set<int> channels;
  std::map<ItemId, std::vector<ChannelHit>> hits;
  for (const auto& list : lists) {
    if (list.query() != query) {
      throw InvalidInputError("merge_pool: mixed queries '" + query.value() +
                              "' and '" + list.query().value() + "'");
    }
    if (!channels.insert(list.channel().index).second) {
      throw InvalidInputError("merge_pool: duplicate channel '" +
                              list.channel().name + "'");
    }
    const int n = cfg.NFor(list.channel().index);
    const size_t keep = std::min<size_t>(n, list.size());
    for (size_t r = 0; r < keep; ++r) {
      const auto& e = list.entries()[r];
      hits[e.item].push_back(
          ChannelHit{list.channel(), static_cast<int>(r + 1), e.score});
    }
  }
  std::vector<Candidate> candidates;
  candidates.reserve(hits.size());
  for (auto& [item, h] : hits) {
    std::sort(h.begin(), h.end(), [](const ChannelHit& a, const ChannelHit& b) {
      return a.channel.index < b.channel.index;
    });
    candidates.push_back(Candidate{item, std::move(h)});
  }
  return CandidatePool(query, std::move(candidates));
}

std::vector<ChannelList> ReadChannelLists(
    std::istream& in, std::vector<std::string>& channel_names) {
  const bool assign = channel_names.empty();
  std::map<std::pair<std::string, int>, std::vector<ScoredItem>> groups;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = TrimLineEnd(line);
    if (view.empty()) continue;
    auto fields = SplitTabs(view);
    if (fields.size() != 4) {
      throw InvalidInputError("channel list line " + std::to_string(line_no) +
                              ": expected 4 tab-separated fields");
    }
    std::string name(fields[1]);
    auto it = std::find(channel_names.begin(), channel_names.end(), name);
    int index;
    if (it == channel_names.end()) {
      if (!assign) {
        throw InvalidInputError("channel list line " + std::to_string(line_no) +
                                ": unknown channel '" + name + "'");
      }
      channel_names.push_back(name);
      index = static_cast<int>(channel_names.size() - 1);
    } else {
      index = static_cast<int>(it - channel_names.begin());
    }
    double score;
    try {
      score = ParseDouble(fields[3], /*allow_special=*/true);
    } catch (const InvalidInputError& e) {
      throw InvalidInputError("channel list line " + std::to_string(line_no) +
                              ": " + e.what());
    }
    groups[{std::string(fields[0]), index}].push_back(
        ScoredItem{ItemId(std::string(fields[2])), score});
  }
  std::vector<ChannelList> out;
  out.reserve(groups.size());
  for (auto& [key, entries] : groups) {
    out.emplace_back(ChannelId{key.second, channel_names[key.second]},
                     QueryId(key.first), std::move(entries));
  }
  return out;
}

std::vector<ChannelList> LoadChannelListFile(
    const std::string& path, std::vector<std::string>& channel_names) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open channel list file: " + path);
  return ReadChannelLists(in, channel_names);
}

void WriteChannelLists(std::ostream& out, std::span<const ChannelList> lists) {
  for (const auto& list : lists) {
    for (const auto& e : list.entries()) {
      out << list.query().value() << '\t' << list.channel().name << '\t'
          << e.item.value() << '\t' << FormatDouble(e.score) << '\n';
    }
  }
}

}  // namespace mcrank
