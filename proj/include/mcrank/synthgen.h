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

#ifndef MCRANK_SYNTHGEN_H_
#define MCRANK_SYNTHGEN_H_

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcrank/dataset.h"
#include "mcrank/evaluation.h"
#include "mcrank/features.h"
#include "mcrank/labeling.h"

namespace mcrank {

struct WorldConfig {
  int num_queries = 2000;
  int num_items = 20000;
  int num_categories = 16;
  std::vector<std::string> channel_names = {"lexical", "semantic", "trending", "seasonal"};
  int num_weeks = 5;
  int n_k = 25;
  int candidates_per_query = 50;
  double in_category_fraction = 0.8;

  // Mean sessions of the r-th most popular query (0-based) is
  // max(sessions_min, sessions_max * (r + 1)^-sessions_exponent); weekly
  // counts are Poisson around it.
  double sessions_max = 250;
  double sessions_min = 25;
  double sessions_exponent = 0.3;

  // Base rates at relevance_center and zero attractiveness.
  double click_rate = 0.2;
  double atc_rate = 0.2;
  double purchase_rate = 0.2;
  // Logistic slopes. Clicks respond to attractiveness as well as relevance;
  // deeper stages respond to relevance only.
  double click_relevance_slope = 0.6;
  double click_attractiveness_slope = 1.2;
  double atc_relevance_slope = 1.0;
  double purchase_relevance_slope = 1.0;
  // Relevance at which the base rates apply.
  double relevance_center = 1.0;
  // Spread of the item-level relevance component shared across queries.
  double item_quality_sd = 0.3;

  // Position p of the logged interleaving is examined with
  // probability position_bias^p.
  double position_bias = 0.93;

  double channel_utility_concentration = 1.6;
  // Scale of the noise term in channel scores.
  double channel_noise_sd = 3.5;
  double trend_fraction = 0.15;
  double trend_slope_sd = 0.6;

  uint64_t seed = 42;
  int num_threads = 1;

  // Throws InvalidInputError when a field is out of range.
  void Validate() const;
};

// Latent truth per query, never exposed to features.
struct QueryTruth {
  std::string query;
  int category = 0;
  double session_mean = 0;
  std::vector<std::string> items;             // candidate set
  std::vector<std::vector<double>> relevance; // [week][candidate]
  std::vector<double> channel_quality;        // per channel, in [0, 1]
};

struct GroundTruth {
  std::vector<QueryTruth> queries;
  std::map<std::string, double> item_attractiveness;
  std::vector<std::string> trend_items;
  double position_bias = 0;
  std::map<std::string, int> segment_counts;  // head / torso / tail

  // NaN when (query, item) is not a candidate pair.
  double Relevance(const std::string& query, const std::string& item, int week) const;
  void Index();

 private:
  std::unordered_map<std::string, size_t> query_index_;
  std::vector<std::unordered_map<std::string, size_t>> item_index_;
};

struct World {
  WorldConfig config;
  EventLog log;
  Catalog catalog;
  std::vector<std::string> channel_names;
  ChannelListsByWeek channels;
  GroundTruth truth;
};

// Deterministic given cfg.seed, independent of cfg.num_threads.
World GenerateWorld(const WorldConfig& cfg);

// Directory layout: events.tsv, catalog.tsv, channels.txt,
// channels_w<week>.tsv, relevance.tsv, channel_quality.tsv, world.json.
void WriteWorld(const std::string& dir, const World& world);

struct WorldInputs {
  EventLog log;
  Catalog catalog;
  std::vector<std::string> channel_names;
  ChannelListsByWeek channels;
};
WorldInputs LoadWorldInputs(const std::string& dir);

struct FilterConfig {
  int min_impressions = 20;
  int min_purchases = 1;
};

struct RetentionStats {
  size_t groups_total = 0;
  size_t groups_kept = 0;
  size_t dropped_impressions = 0;
  size_t dropped_purchases = 0;
  std::map<int, size_t> kept_per_week;
};

struct SplitPlan {
  std::vector<GroupKey> train;
  std::vector<GroupKey> valid;
  std::vector<GroupKey> test;
  int train_end_week = 0;  // train covers weeks [0, train_end_week)
  int valid_week = 0;
  int test_week = 0;
  RetentionStats stats;
};

// Keeps (query, week) groups where some item has >= min_impressions
// impressions and some item has >= min_purchases purchases that week, then
// partitions chronologically: the last week is test, the one before it
// validation, the rest training. Throws InvalidInputError when the log
// spans fewer than 5 weeks or a partition is empty.
SplitPlan FilterAndSplit(const EventLog& log, const ChannelListsByWeek& channels,
                         const FilterConfig& cfg = {});

struct PipelineConfig {
  TruncationConfig truncation = TruncationConfig::Uniform(25);
  LookbackConfig lookback;
  FilterConfig filter;
  int num_threads = 1;
};

struct PipelineOutput {
  DatasetSplits splits;
  SplitPlan plan;
  CorpusStats calibration_stats;
};

// Filter, split, calibrate on the training weeks and build the three
// partitions with conversion-weighted labels and engagement features.
PipelineOutput BuildSplits(const EventLog& log, const Catalog& catalog,
                           const std::vector<std::string>& channel_names,
                           const ChannelListsByWeek& channels, const PipelineConfig& cfg);

}  // namespace mcrank

#endif  // MCRANK_SYNTHGEN_H_
