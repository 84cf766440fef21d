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

#ifndef MCRANK_CANDIDATES_H_
#define MCRANK_CANDIDATES_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcrank/types.h"

namespace mcrank {

struct ScoredItem {
  ItemId item;
  double score = 0;

  friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

// One channel's ranked output for a query. Entries are kept sorted by score
// descending, ties by ItemId ascending; scores must be finite and items
// unique within the list.
class ChannelList {
 public:
  ChannelList() = default;
  // Sorts `entries` into canonical order. Throws InvalidInputError on
  // non-finite scores or duplicate items.
  ChannelList(ChannelId channel, QueryId query, std::vector<ScoredItem> entries);

  const ChannelId& channel() const { return channel_; }
  const QueryId& query() const { return query_; }
  const std::vector<ScoredItem>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  ChannelId channel_;
  QueryId query_;
  std::vector<ScoredItem> entries_;
};

// Returns the first min(n, size) entries. n must be positive.
ChannelList Truncate(const ChannelList& list, int n);

struct TruncationConfig {
  std::map<int, int> per_channel_n;
  // Used for channels absent from per_channel_n; 0 means "no default".
  int default_n = 0;

  static TruncationConfig Uniform(int n) { return TruncationConfig{{}, n}; }
  int NFor(int channel_index) const;
};

struct ChannelHit {
  ChannelId channel;
  int rank = 0;  // 1-based position in the truncated list
  double score = 0;

  friend bool operator==(const ChannelHit&, const ChannelHit&) = default;
};

struct Candidate {
  ItemId item;
  std::vector<ChannelHit> hits;  // sorted by channel index

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Deduplicated union of truncated channel lists for one query.
class CandidatePool {
 public:
  CandidatePool() = default;
  CandidatePool(QueryId query, std::vector<Candidate> candidates)
      : query_(std::move(query)), candidates_(std::move(candidates)) {}

  const QueryId& query() const { return query_; }
  // Sorted by ItemId ascending.
  const std::vector<Candidate>& candidates() const { return candidates_; }
  size_t size() const { return candidates_.size(); }
  bool Contains(const ItemId& item) const { return Find(item) != nullptr; }
  const Candidate* Find(const ItemId& item) const;

  friend bool operator==(const CandidatePool&, const CandidatePool&) = default;

 private:
  QueryId query_;
  std::vector<Candidate> candidates_;
};

// Truncates each list with its n_k and unions the results. Throws
// InvalidInputError on mixed queries or repeated channels.
CandidatePool MergePool(std::span<const ChannelList> lists,
                        const TruncationConfig& cfg);

// Line format: query_id<TAB>channel_name<TAB>item_id<TAB>score. Lines may be
// in any order; each (query, channel) group is sorted on load. Channel
// indices come from `channel_names` (position = index); unknown names are an
// error unless `channel_names` is empty, in which case indices are assigned
// in order of first appearance and appended to `channel_names`.
std::vector<ChannelList> ReadChannelLists(std::istream& in,
                                          std::vector<std::string>& channel_names);
std::vector<ChannelList> LoadChannelListFile(const std::string& path,
                                             std::vector<std::string>& channel_names);
void WriteChannelLists(std::ostream& out, std::span<const ChannelList> lists);

}  // namespace mcrank

#endif  // MCRANK_CANDIDATES_H_
