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

#ifndef MCRANK_FEATURES_H_
#define MCRANK_FEATURES_H_

#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcrank/candidates.h"
#include "mcrank/labeling.h"

namespace mcrank {

enum class FeatureKind : uint8_t { kNumeric = 0, kCategorical = 1 };
enum class FeatureGroup : uint8_t { kItem = 0, kChannel = 1, kEngagement = 2 };

std::string_view FeatureKindName(FeatureKind k);
std::string_view FeatureGroupName(FeatureGroup g);

// The missing marker. Channel scores are validated finite, so NaN is never
// a legitimate value.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool IsMissing(double v) { return v != v; }

struct FeatureColumn {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  FeatureGroup group = FeatureGroup::kItem;

  friend bool operator==(const FeatureColumn&, const FeatureColumn&) = default;
};

struct LookbackConfig {
  std::vector<int> windows = {1, 4};
  double decay_half_life = 2.0;

  // Throws InvalidInputError unless windows are strictly increasing and
  // >= 1 and the half-life is positive.
  void Validate() const;
};

// Ordered feature columns. Channel columns are named "ch.<name>.score" and
// "ch.<name>.rank".
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureColumn> columns);

  // The full column layout produced by the dataset builder.
  static FeatureSchema Standard(std::span<const std::string> channel_names,
                                const LookbackConfig& lookback);

  const std::vector<FeatureColumn>& columns() const { return columns_; }
  size_t size() const { return columns_.size(); }
  const FeatureColumn& operator[](size_t i) const { return columns_[i]; }
  // -1 when absent.
  int IndexOf(std::string_view name) const;
  // Channel names recovered from the channel score columns, in column order.
  std::vector<std::string> ChannelNames() const;

  uint64_t Fingerprint() const;

  friend bool operator==(const FeatureSchema& a, const FeatureSchema& b) {
    return a.columns_ == b.columns_;
  }

 private:
  std::vector<FeatureColumn> columns_;
  std::map<std::string, int, std::less<>> index_;
};

std::string ChannelScoreColumn(std::string_view channel);
std::string ChannelRankColumn(std::string_view channel);

// Sidecar: one line per column, name<TAB>kind<TAB>group.
void WriteSchema(std::ostream& out, const FeatureSchema& schema);
FeatureSchema ReadSchema(std::istream& in);

struct FeatureVector {
  std::vector<double> values;

  bool missing(size_t i) const { return IsMissing(values[i]); }
};

struct ActivityCounts {
  int64_t impressions = 0;
  int64_t clicks = 0;
  int64_t add_to_carts = 0;
  int64_t purchases = 0;

  friend bool operator==(const ActivityCounts&, const ActivityCounts&) = default;
};

// Event counts per trailing window: window l covers weeks
// [as_of - l, as_of - 1]. Events at or after as_of are ignored.
std::map<int, ActivityCounts> LookbackAggregates(
    std::span<const InteractionEvent> events, int as_of, const LookbackConfig& cfg);

inline constexpr double kVelocityEpsilon = 1e-6;

// (short/short_len) / (long/long_len + eps).
double Velocity(double short_count, double long_count, double short_len,
                double long_len);

// Per window: sum over sessions of weight(deepest action) *
// 2^(-(as_of - week) / half_life). Sessions are scoped to a week; no
// per-query normalization.
std::map<int, double> EngagementFeatures(std::span<const InteractionEvent> events,
                                         int as_of, const LabelWeights& weights,
                                         const LookbackConfig& cfg);

struct ItemAttributes {
  ItemId id;
  double price = 0;
  int category = 0;
  int launch_week = 0;  // may precede week 0
};

// Categories are coded category + 1; code 0 is reserved for unseen ones.
inline constexpr double kUnseenCategoryCode = 0;
inline double CategoryCode(int category) { return category + 1.0; }

class Catalog {
 public:
  void Add(ItemAttributes attrs);
  const ItemAttributes* Find(const ItemId& id) const;
  const std::vector<ItemAttributes>& items() const { return items_; }
  size_t size() const { return items_.size(); }

 private:
  std::vector<ItemAttributes> items_;
  std::map<ItemId, size_t> index_;
};

// Line format: item_id<TAB>price<TAB>category<TAB>launch_week.
Catalog ReadCatalog(std::istream& in);
Catalog LoadCatalogFile(const std::string& path);
void WriteCatalog(std::ostream& out, const Catalog& catalog);

// Everything besides the pool that an instance's features are computed from.
struct InstanceSources {
  const ItemAttributes* attributes = nullptr;
  std::map<int, ActivityCounts> item_activity;
  // Absent engagement leaves the engagement cells missing.
  std::optional<std::map<int, ActivityCounts>> query_item_activity;
  std::optional<std::map<int, double>> engagement;
};

// Builds the feature vector of `item` in `pool` for `week` under the
// standard schema layout. Throws InvalidInputError when the item is not a
// candidate or the schema lacks a standard column.
FeatureVector AssembleInstance(const CandidatePool& pool, const ItemId& item,
                               int week, const InstanceSources& sources,
                               const FeatureSchema& schema,
                               const LookbackConfig& lookback);

// Writes the channel-group cells for `candidate` into `out`; channels that
// did not retrieve it get the missing marker.
void FillChannelCells(const Candidate& candidate, const FeatureSchema& schema,
                      std::span<double> out);

}  // namespace mcrank

#endif  // MCRANK_FEATURES_H_
