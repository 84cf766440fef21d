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

#ifndef MCRANK_SCORING_H_
#define MCRANK_SCORING_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcrank/candidates.h"
#include "mcrank/gbdt.h"

namespace mcrank {

inline constexpr size_t kDefaultPoolCap = 500;

// Pool larger than the configured cap; maps to HTTP 413.
class PoolTooLargeError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

using FeatureMap = std::map<std::string, double>;

// Keyed feature rows loaded from a sidecar table.
//   item_features.tsv: item_id<TAB><col>...
//   engagement.tsv:    query_id<TAB>item_id<TAB><col>...
// NA marks a missing cell.
class FeatureTable {
 public:
  const FeatureMap* Find(const std::string& key) const;
  void Put(std::string key, FeatureMap row) { rows_[std::move(key)] = std::move(row); }
  size_t size() const { return rows_.size(); }
  const std::map<std::string, FeatureMap>& rows() const { return rows_; }

 private:
  std::map<std::string, FeatureMap> rows_;
};

FeatureTable ReadFeatureTable(std::istream& in, int key_columns);
FeatureTable LoadFeatureTable(const std::string& path, int key_columns);
// Columns are taken from the first row; every row must carry them.
void WriteFeatureTable(std::ostream& out, const FeatureTable& table,
                       const std::vector<std::string>& key_names);
inline std::string EngagementKey(const std::string& query, const std::string& item) {
  return query + '\t' + item;
}

struct ScoreRequest {
  QueryId query;
  std::vector<ChannelList> lists;
  std::map<std::string, FeatureMap> engagement;     // item -> columns
  std::map<std::string, FeatureMap> item_features;  // item -> columns
};

struct ScoredCandidate {
  ItemId item;
  double score = 0;
  std::vector<std::string> channels;
};

struct ScoreResponse {
  QueryId query;
  std::vector<ScoredCandidate> items;
  int64_t latency_us = 0;

  nlohmann::json ToJson() const;
};

// Parses {"query", "channels": [{"channel", "entries": [{"item", "score"}]}],
// "engagement"?, "item_features"?}. Channel names resolve against
// `channel_names`. Throws InvalidInputError on malformed input.
ScoreRequest ParseScoreRequest(const nlohmann::json& body,
                               const std::vector<std::string>& channel_names);
nlohmann::json ScoreRequestToJson(const ScoreRequest& req);

struct ScorerConfig {
  size_t pool_cap = kDefaultPoolCap;
  TruncationConfig truncation = TruncationConfig::Uniform(25);
};

// Stateless re-ranker around an immutable model. The model pointer can be
// swapped atomically; in-flight requests keep the model they started with.
class Scorer {
 public:
  Scorer(std::shared_ptr<const Model> model, ScorerConfig cfg,
         std::shared_ptr<const FeatureTable> item_table = nullptr,
         std::shared_ptr<const FeatureTable> engagement_table = nullptr);

  ScoreResponse Score(const ScoreRequest& req) const;
  std::shared_ptr<const Model> model() const;
  void SwapModel(std::shared_ptr<const Model> model);
  const ScorerConfig& config() const { return cfg_; }
  std::vector<std::string> channel_names() const;
  std::string fingerprint() const;

 private:
  ScorerConfig cfg_;
  mutable std::mutex mu_;
  std::shared_ptr<const Model> model_;
  std::string fingerprint_;
  std::shared_ptr<const FeatureTable> item_table_;
  std::shared_ptr<const FeatureTable> engagement_table_;
};

}  // namespace mcrank

#endif  // MCRANK_SCORING_H_
