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

#ifndef MCRANK_GBDT_H_
#define MCRANK_GBDT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcrank/dataset.h"
#include "mcrank/features.h"
#include "mcrank/metrics.h"

namespace mcrank {

struct TrainParams {
  int num_trees = 300;
  double shrinkage = 0.1;
  int max_depth = 6;
  int min_examples_per_leaf = 5;
  double l2 = 1.0;
  int ndcg_truncation = 8;
  double sigma = 1.0;
  bool oblique = false;
  int oblique_projections = 8;
  double oblique_sparsity = 0.25;
  int max_thresholds = 255;
  uint64_t seed = 1;
  // Execution only; never serialized and never changes the result.
  int num_threads = 1;

  // Throws InvalidInputError on any out-of-range field.
  void Validate() const;
};

// Floor applied to l2 in every denominator.
inline constexpr double kMinL2 = 1e-6;

enum class NodeKind : uint8_t { kLeaf = 0, kAxis = 1, kOblique = 2 };

struct ObliqueTerm {
  int32_t feature = 0;
  double weight = 0;

  friend bool operator==(const ObliqueTerm&, const ObliqueTerm&) = default;
};

// Flat node. Split nodes send x < threshold left (for oblique nodes x is the
// projection sum(w_f * x_f)); missing values, or a projection touching a
// missing value, follow missing_left.
struct TreeNode {
  NodeKind kind = NodeKind::kLeaf;
  bool missing_left = false;
  int32_t feature = -1;
  double threshold = 0;
  int32_t left = -1;
  int32_t right = -1;
  double value = 0;
  uint32_t term_begin = 0;
  uint32_t term_count = 0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class Tree {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<ObliqueTerm> terms;

  double Predict(std::span<const double> x) const;
  int Depth() const;
  int NumLeaves() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

inline constexpr uint32_t kModelFormatVersion = 1;

class Model {
 public:
  std::vector<Tree> trees;
  double shrinkage = 0.1;
  double base_score = 0;
  FeatureSchema schema;
  TrainParams params;
  uint32_t format_version = kModelFormatVersion;

  // base_score + shrinkage * sum of tree outputs. No size check.
  double PredictRaw(std::span<const double> x) const;
  // Throws InvalidInputError when the vector does not match the schema.
  double Predict(const FeatureVector& features) const;
};

struct LambdaPair {
  double g = 0;
  double h = 0;
};

// |NDCG@k after swapping the items at ranking positions i and j - before|.
// score_order[p] is the item index at position p.
double DeltaNdcg(std::span<const double> labels, std::span<const int> score_order,
                 int i, int j, int k);

// Gradients of the LambdaMART loss for one query group. For each pair with
// label_i > label_j, lambda_ij = -sigma * |dNDCG| / (1 + exp(sigma (s_i - s_j)))
// is added to g_i and subtracted from g_j, so a negative g raises the score.
// Each lambda_ij is rounded to a multiple of 2^-40 before accumulation,
// which makes sum(g) exactly zero and the result independent of summation
// order. h accumulates sigma^2 * |dNDCG| * rho * (1 - rho) on both items.
std::vector<LambdaPair> LambdaGradients(std::span<const double> labels,
                                        std::span<const double> scores, int k,
                                        double sigma = 1.0);

// -g_sum / (h_sum + max(l2, kMinL2)).
double LeafValue(double g_sum, double h_sum, double l2);
// G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l), l = max(l2, kMinL2).
double SplitGain(double gl, double hl, double gr, double hr, double l2);

// Quantized feature matrix used by the split search. Candidate thresholds
// per feature are midpoints between consecutive distinct values, reduced to
// at most `max_thresholds` quantile-spaced candidates.
class TrainingMatrix {
 public:
  TrainingMatrix(std::span<const double> features, size_t num_rows, size_t num_features,
                 int max_thresholds, int num_threads = 1);

  size_t num_rows() const { return num_rows_; }
  size_t num_features() const { return num_features_; }
  const std::vector<double>& thresholds(size_t f) const { return thresholds_[f]; }
  // Bin b holds values with thresholds[b-1] <= x < thresholds[b]; the bin
  // after the last value bin holds missing values.
  uint16_t bin(size_t row, size_t f) const { return bins_[row * num_features_ + f]; }
  uint16_t missing_bin(size_t f) const {
    return static_cast<uint16_t>(thresholds_[f].size() + 1);
  }
  double value(size_t row, size_t f) const { return raw_[row * num_features_ + f]; }
  std::span<const double> row(size_t r) const {
    return {raw_.data() + r * num_features_, num_features_};
  }

 private:
  size_t num_rows_;
  size_t num_features_;
  std::vector<double> raw_;
  std::vector<uint16_t> bins_;
  std::vector<std::vector<double>> thresholds_;
};

struct SplitCandidate {
  TreeNode node;  // split fields only; children unset
  std::vector<ObliqueTerm> terms;
  double gain = 0;
  size_t left_count = 0;
  size_t right_count = 0;
};

// Best split of `rows` by second-order gain over every feature threshold
// with both missing directions and, when params.oblique, over
// params.oblique_projections random sparse projections drawn from
// `node_seed`. Returns nullopt when |rows| < 2 * min_examples_per_leaf or no
// split has positive gain.
std::optional<SplitCandidate> FindBestSplit(const TrainingMatrix& m,
                                            std::span<const uint32_t> rows,
                                            std::span<const LambdaPair> grads,
                                            const TrainParams& params,
                                            uint64_t node_seed = 0);

struct RoundLog {
  int round = 0;
  double train_ndcg = 0;
  double valid_ndcg = 0;  // NaN without a validation set
};

using RoundCallback = std::function<void(const RoundLog&)>;

// LambdaMART boosting over the (query, week) groups of `train`. Throws
// TrainingError on an empty dataset or when no group has two distinct
// labels.
Model Train(const Dataset& train, const TrainParams& params,
            const Dataset* valid = nullptr, std::vector<RoundLog>* log = nullptr,
            const RoundCallback& on_round = {});

// Mean NDCG@k of `scores` over the dataset's groups, ties broken by row
// order.
double MeanNdcg(const Dataset& ds, std::span<const double> scores, int k);

// Scores every row of `ds`, mapping its columns onto the model schema by
// name. Throws InvalidInputError if a model column is absent.
std::vector<double> PredictDataset(const Model& model, const Dataset& ds,
                                   int num_threads = 1);

}  // namespace mcrank

#endif  // MCRANK_GBDT_H_
