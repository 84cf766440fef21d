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

#ifndef MCRANK_EVALUATION_H_
#define MCRANK_EVALUATION_H_

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcrank/dataset.h"
#include "mcrank/fusion.h"
#include "mcrank/gbdt.h"
#include "mcrank/labeling.h"

namespace mcrank {

struct MetricConfig {
  int k = 8;
};

// A scoring strategy producing a ranking of one (query, week) group.
class Ranker {
 public:
  virtual ~Ranker() = default;
  virtual std::string name() const = 0;
  // Number of seeds the evaluation averages over; 1 for deterministic
  // rankers.
  virtual int num_seeds() const { return 1; }
  // Group-local row indices, best first.
  virtual std::vector<int> Rank(const Dataset& ds, const GroupRange& g,
                                uint64_t seed) const = 0;
};

// Orders by model score; ties by row order (ItemId ascending).
class ModelRanker : public Ranker {
 public:
  ModelRanker(std::string name, const Model& model);
  std::string name() const override { return name_; }
  std::vector<int> Rank(const Dataset& ds, const GroupRange& g, uint64_t seed) const override;

 private:
  std::string name_;
  const Model& model_;
};

// Channel lists reconstructed from the ch.<name>.score columns of a group.
std::vector<ChannelList> ChannelListsFromGroup(const Dataset& ds, const GroupRange& g);

class RrfRanker : public Ranker {
 public:
  explicit RrfRanker(double k_rrf = kDefaultRrfK) : k_rrf_(k_rrf) {}
  std::string name() const override { return "RRF"; }
  std::vector<int> Rank(const Dataset& ds, const GroupRange& g, uint64_t seed) const override;

 private:
  double k_rrf_;
};

// Weighted interleaving; each group's draw seed mixes the evaluation seed
// with the (query, week) key. Empty weights mean uniform over channels.
class InterleaveRanker : public Ranker {
 public:
  InterleaveRanker(std::map<std::string, double> weights_by_name, int num_seeds);
  std::string name() const override { return "WI"; }
  int num_seeds() const override { return num_seeds_; }
  std::vector<int> Rank(const Dataset& ds, const GroupRange& g, uint64_t seed) const override;

 private:
  std::map<std::string, double> weights_;
  int num_seeds_;
};

// Sorts by the true label; an upper bound for tests.
class LabelOracleRanker : public Ranker {
 public:
  std::string name() const override { return "oracle"; }
  std::vector<int> Rank(const Dataset& ds, const GroupRange& g, uint64_t seed) const override;
};

struct VariantMetrics {
  std::string name;
  double mean_ndcg = 0;
  size_t groups = 0;
  size_t zero_idcg_groups = 0;
  int seeds = 1;
  std::map<std::string, double> quantiles;  // p10, p25, p50, p75, p90
  // Mean NDCG@k under purchase-only labels, when funnels are available.
  double purchase_ndcg = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> per_group;  // averaged over seeds
};

// Mean NDCG@k of `ranker` over every group of `eval_set`. Throws
// InvalidInputError on an empty set.
VariantMetrics EvaluateVariant(const Ranker& ranker, const Dataset& eval_set,
                               const MetricConfig& cfg, uint64_t seed = 1,
                               int num_threads = 1);

struct DatasetSplits {
  Dataset train;
  Dataset valid;
  Dataset test;
  LabelWeights conversion_weights;
};

struct AblationConfig {
  TrainParams params;
  MetricConfig metric;
  std::map<std::string, double> wi_weights;  // empty: uniform
  int wi_seeds = 20;
  uint64_t seed = 1;
  LabelWeights heuristic = LabelWeights::Heuristic();
};

struct VariantDelta {
  std::string from;
  std::string to;
  double delta = 0;
};

struct EvalReport {
  std::vector<VariantMetrics> variants;
  std::vector<VariantDelta> deltas;
  int k = 8;
  std::string config_hash;
  std::string dataset_fingerprint;
  std::vector<uint64_t> seeds;
  std::map<std::string, std::string> notes;

  const VariantMetrics& Get(const std::string& name) const;
  std::string ToTable() const;
  nlohmann::json ToJson() const;
};

// Trains and evaluates WI, UR, UR+EF and UR+EF+CL on identical splits.
// UR drops the engagement columns, UR and UR+EF train on heuristic labels,
// UR+EF+CL on conversion-weighted labels. Every variant is scored against
// the conversion-weighted labels of the test split.
EvalReport AblationRun(const DatasetSplits& splits, const AblationConfig& cfg,
                       std::vector<Model>* models = nullptr);

std::string AblationConfigHash(const AblationConfig& cfg);

}  // namespace mcrank

#endif  // MCRANK_EVALUATION_H_
