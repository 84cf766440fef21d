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

#ifndef MCRANK_DATASET_H_
#define MCRANK_DATASET_H_

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mcrank/candidates.h"
#include "mcrank/features.h"
#include "mcrank/labeling.h"

namespace mcrank {

struct RowKey {
  std::string query;
  std::string item;
  int week = 0;

  friend bool operator==(const RowKey&, const RowKey&) = default;
};

// Half-open row range of one (query, week) group.
struct GroupRange {
  size_t begin = 0;
  size_t end = 0;
  size_t size() const { return end - begin; }
};

// Query-item-week instances, row-major features, grouped by (query, week).
// Rows are ordered by (week, query, item).
struct Dataset {
  FeatureSchema schema;
  std::vector<RowKey> rows;
  std::vector<double> features;
  std::vector<double> labels;
  // Per-row funnel counts for relabeling; empty for datasets read from disk.
  std::vector<FunnelCounts> funnels;
  std::vector<GroupRange> groups;

  size_t num_rows() const { return rows.size(); }
  size_t num_features() const { return schema.size(); }
  std::span<const double> Row(size_t r) const {
    return {features.data() + r * schema.size(), schema.size()};
  }
  std::span<const double> GroupLabels(const GroupRange& g) const {
    return {labels.data() + g.begin, g.size()};
  }

  void RebuildGroups();
  // Throws InvalidInputError when shapes disagree or item-group cells are
  // missing.
  void Validate() const;
  // Recomputes labels as per-group normalized RawLabel(funnel, w).
  Dataset WithLabels(const LabelWeights& w) const;
  Dataset SelectColumns(const std::function<bool(const FeatureColumn&)>& keep) const;
  uint64_t Fingerprint() const;
};

// Tab-separated with header "query_id, item_id, week, label, <features>";
// missing cells are written as NA. Without labels the label column is
// omitted.
void WriteDataset(std::ostream& out, const Dataset& ds, bool with_labels = true);
Dataset ReadDataset(std::istream& in, const FeatureSchema& schema);
// Writes `path` and the schema sidecar `path + ".schema"`.
void SaveDataset(const std::string& path, const Dataset& ds, bool with_labels = true);
Dataset LoadDataset(const std::string& path);

using ChannelListsByWeek = std::map<int, std::vector<ChannelList>>;

struct GroupKey {
  std::string query;
  int week = 0;

  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct DatasetBuildConfig {
  TruncationConfig truncation = TruncationConfig::Uniform(25);
  LookbackConfig lookback;
  LabelWeights label_weights;
  // Weights of the decayed engagement features.
  LabelWeights engagement_weights;
  int num_threads = 1;
};

// Indexes an event log once and assembles instances for any set of
// (query, week) groups. Temporal features only read events from weeks
// before the instance week.
class DatasetBuilder {
 public:
  DatasetBuilder(const EventLog& log, const Catalog& catalog,
                 std::vector<std::string> channel_names, DatasetBuildConfig cfg);

  const FeatureSchema& schema() const { return schema_; }
  const DatasetBuildConfig& config() const { return cfg_; }

  Dataset Build(const ChannelListsByWeek& channels,
                std::span<const GroupKey> groups) const;
  // Every (query, week) with channel lists.
  static std::vector<GroupKey> AllGroups(const ChannelListsByWeek& channels);

  // Item-group feature values of `item` as of `week`, keyed by column name.
  std::map<std::string, double> ItemFeatures(const ItemId& item, int week) const;
  // Engagement-group feature values of (query, item) as of `week`.
  std::map<std::string, double> EngagementFeatureMap(const std::string& query,
                                                     const ItemId& item,
                                                     int week) const;

 private:
  std::span<const InteractionEvent> ItemEvents(uint32_t item) const;
  std::span<const InteractionEvent> QueryItemEvents(uint32_t query, uint32_t item) const;
  const FunnelCounts* Funnel(uint32_t query, uint32_t item, int week) const;

  const EventLog& log_;
  const Catalog& catalog_;
  DatasetBuildConfig cfg_;
  FeatureSchema schema_;
  std::vector<InteractionEvent> by_item_;
  std::vector<size_t> item_offsets_;
  std::vector<InteractionEvent> by_query_item_;
  std::vector<FunnelCounts> funnels_;
};

}  // namespace mcrank

#endif  // MCRANK_DATASET_H_
