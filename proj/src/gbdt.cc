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

#include "mcrank/gbdt.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mcrank/parallel.h"
#include "mcrank/random.h"

namespace mcrank {

void TrainParams::Validate() const {
  auto fail = [](const std::string& what) {
    throw InvalidInputError("train params: " + what);
  };
  if (num_trees < 1) fail("num_trees must be >= 1");
  if (!(shrinkage > 0 && shrinkage <= 1)) fail("shrinkage must be in (0, 1]");
  if (max_depth < 1) fail("max_depth must be >= 1");
  if (min_examples_per_leaf < 1) fail("min_examples_per_leaf must be >= 1");
  if (!(l2 >= 0)) fail("l2 must be >= 0");
  if (ndcg_truncation < 1) fail("ndcg_truncation must be >= 1");
  if (!(sigma > 0)) fail("sigma must be positive");
  if (oblique_projections < 1) fail("oblique_projections must be >= 1");
  if (!(oblique_sparsity > 0 && oblique_sparsity <= 1)) fail("oblique_sparsity must be in (0, 1]");
  if (max_thresholds < 1 || max_thresholds > 60000) fail("max_thresholds must be in [1, 60000]");
  if (num_threads < 1) fail("num_threads must be >= 1");
}

namespace {

double ProjectedValue(const Tree& tree, const TreeNode& node, std::span<const double> x) {
  double z = 0;
  for (uint32_t t = node.term_begin; t < node.term_begin + node.term_count; ++t) {
    const double v = x[tree.terms[t].feature];
    if (IsMissing(v)) return kMissing;
    z += tree.terms[t].weight * v;
  }
  return z;
}

int DepthFrom(const Tree& tree, int node) {
  const auto& n = tree.nodes[node];
  if (n.kind == NodeKind::kLeaf) return 0;
  return 1 + std::max(DepthFrom(tree, n.left), DepthFrom(tree, n.right));
}

}  // namespace

double Tree::Predict(std::span<const double> x) const {
  int idx = 0;
  while (true) {
    const TreeNode& n = nodes[idx];
    if (n.kind == NodeKind::kLeaf) return n.value;
    const double v = n.kind == NodeKind::kAxis ? x[n.feature] : ProjectedValue(*this, n, x);
    if (IsMissing(v)) {
      idx = n.missing_left ? n.left : n.right;
    } else {
      idx = v < n.threshold ? n.left : n.right;
    }
  }
}

int Tree::Depth() const { return nodes.empty() ? 0 : DepthFrom(*this, 0); }

int Tree::NumLeaves() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) {
    return n.kind == NodeKind::kLeaf;
  }));
}

double Model::PredictRaw(std::span<const double> x) const {
  double sum = 0;
  for (const auto& t : trees) sum += t.Predict(x);
  return base_score + shrinkage * sum;
}

double Model::Predict(const FeatureVector& features) const {
  if (features.values.size() != schema.size()) {
    throw InvalidInputError("predict: feature vector has " +
                            std::to_string(features.values.size()) +
                            " cells, model schema has " + std::to_string(schema.size()));
  }
  return PredictRaw(features.values);
}

double DeltaNdcg(std::span<const double> labels, std::span<const int> score_order, int i,
                 int j, int k) {
  const int n = static_cast<int>(score_order.size());
  if (i == j || i < 0 || j < 0 || i >= n || j >= n) {
    throw InvalidInputError("delta_ndcg: positions must be distinct and in range");
  }
  if (i >= k && j >= k) return 0.0;
  const double idcg = IdealDcgAtK(labels, k);
  if (idcg <= 0) return 0.0;
  const double di = i < k ? Discount(i) : 0.0;
  const double dj = j < k ? Discount(j) : 0.0;
  return std::abs((Gain(labels[score_order[i]]) - Gain(labels[score_order[j]])) * (di - dj)) /
         idcg;
}

namespace {

constexpr double kGradScale = 0x1.0p40;
constexpr double kInvGradScale = 0x1.0p-40;

}  // namespace

std::vector<LambdaPair> LambdaGradients(std::span<const double> labels,
                                        std::span<const double> scores, int k,
                                        double sigma) {
  const size_t n = labels.size();
  if (scores.size() != n) throw InvalidInputError("lambda_gradients: size mismatch");
  std::vector<LambdaPair> out(n);
  if (n < 2) return out;
  const double idcg = IdealDcgAtK(labels, k);
  if (idcg <= 0) return out;
  const std::vector<int> order = OrderByScore(scores);
  std::vector<int64_t> g(n, 0);
  std::vector<double> disc(n, 0.0);
  for (size_t p = 0; p < n && p < static_cast<size_t>(k); ++p) disc[p] = Discount(static_cast<int>(p));
  const double inv_idcg = 1.0 / idcg;
  for (size_t a = 0; a < n; ++a) {
    if (a >= static_cast<size_t>(k)) break;  // pairs with both positions >= k contribute 0
    for (size_t b = a + 1; b < n; ++b) {
      const int i = order[a];
      const int j = order[b];
      if (labels[i] == labels[j]) continue;
      const int hi = labels[i] > labels[j] ? i : j;
      const int lo = labels[i] > labels[j] ? j : i;
      const double delta =
          std::abs((Gain(labels[i]) - Gain(labels[j])) * (disc[a] - disc[b])) * inv_idcg;
      if (delta == 0) continue;
      const double rho = 1.0 / (1.0 + std::exp(sigma * (scores[hi] - scores[lo])));
      const double lambda = -sigma * delta * rho;
      const int64_t q = std::llround(lambda * kGradScale);
      g[hi] += q;
      g[lo] -= q;
      const double hess = sigma * sigma * delta * rho * (1.0 - rho);
      out[hi].h += hess;
      out[lo].h += hess;
    }
  }
  for (size_t i = 0; i < n; ++i) out[i].g = static_cast<double>(g[i]) * kInvGradScale;
  return out;
}

double LeafValue(double g_sum, double h_sum, double l2) {
  if (g_sum == 0) return 0.0;
  return -g_sum / (h_sum + std::max(l2, kMinL2));
}

double SplitGain(double gl, double hl, double gr, double hr, double l2) {
  const double l = std::max(l2, kMinL2);
  const double g = gl + gr;
  return gl * gl / (hl + l) + gr * gr / (hr + l) - g * g / (hl + hr + l);
}

namespace {

std::vector<double> CandidateThresholds(std::vector<double> values, int max_thresholds) {
  std::sort(values.begin(), values.end());
  std::vector<double> uniq;
  std::vector<size_t> cum;  // number of values <= uniq[u]
  for (size_t i = 0; i < values.size(); ++i) {
    if (uniq.empty() || values[i] != uniq.back()) {
      uniq.push_back(values[i]);
      cum.push_back(0);
    }
    cum.back() = i + 1;
  }
  auto midpoint = [](double a, double b) {
    const double m = a + (b - a) / 2;
    return m > a ? m : b;
  };
  std::vector<double> out;
  if (uniq.size() < 2) return out;
  if (uniq.size() - 1 <= static_cast<size_t>(max_thresholds)) {
    for (size_t u = 0; u + 1 < uniq.size(); ++u) out.push_back(midpoint(uniq[u], uniq[u + 1]));
    return out;
  }
  const double n = static_cast<double>(values.size());
  size_t last = SIZE_MAX;
  for (int q = 1; q <= max_thresholds; ++q) {
    const auto target = static_cast<size_t>(std::ceil(q * n / (max_thresholds + 1)));
    // first boundary u whose cumulative count reaches the target
    size_t u = std::lower_bound(cum.begin(), cum.end(), target) - cum.begin();
    if (u + 1 >= uniq.size()) u = uniq.size() - 2;
    if (u == last) continue;
    last = u;
    out.push_back(midpoint(uniq[u], uniq[u + 1]));
  }
  return out;
}

}  // namespace

TrainingMatrix::TrainingMatrix(std::span<const double> features, size_t num_rows,
                               size_t num_features, int max_thresholds, int num_threads)
    : num_rows_(num_rows),
      num_features_(num_features),
      raw_(features.begin(), features.end()),
      bins_(num_rows * num_features, 0),
      thresholds_(num_features) {
  if (features.size() != num_rows * num_features) {
    throw InvalidInputError("training matrix: shape mismatch");
  }
  ParallelFor(num_threads, num_features, [&](size_t b, size_t e) {
    for (size_t f = b; f < e; ++f) {
      std::vector<double> values;
      values.reserve(num_rows);
      for (size_t r = 0; r < num_rows; ++r) {
        const double v = raw_[r * num_features + f];
        if (!IsMissing(v)) values.push_back(v);
      }
      thresholds_[f] = CandidateThresholds(std::move(values), max_thresholds);
      const auto& thr = thresholds_[f];
      const auto missing = static_cast<uint16_t>(thr.size() + 1);
      for (size_t r = 0; r < num_rows; ++r) {
        const double v = raw_[r * num_features + f];
        bins_[r * num_features + f] =
            IsMissing(v) ? missing
                         : static_cast<uint16_t>(std::upper_bound(thr.begin(), thr.end(), v) -
                                                 thr.begin());
      }
    }
  });
}

namespace {

struct HistCell {
  double g = 0;
  double h = 0;
  size_t n = 0;
};

// Per-feature gradient histograms laid out back to back.
class Histogram {
 public:
  explicit Histogram(const TrainingMatrix& m) : offsets_(m.num_features() + 1, 0) {
    for (size_t f = 0; f < m.num_features(); ++f) {
      offsets_[f + 1] = offsets_[f] + m.thresholds(f).size() + 2;
    }
    cells_.assign(offsets_.back(), HistCell{});
  }

  void Build(const TrainingMatrix& m, std::span<const uint32_t> rows,
             std::span<const LambdaPair> grads, int num_threads) {
    const size_t nf = m.num_features();
    ParallelFor(num_threads, nf, [&](size_t fb, size_t fe) {
      for (size_t c = offsets_[fb]; c < offsets_[fe]; ++c) cells_[c] = HistCell{};
      for (uint32_t r : rows) {
        const LambdaPair& gp = grads[r];
        for (size_t f = fb; f < fe; ++f) {
          HistCell& cell = cells_[offsets_[f] + m.bin(r, f)];
          cell.g += gp.g;
          cell.h += gp.h;
          ++cell.n;
        }
      }
    });
  }

  // this = parent - sibling
  void Subtract(const Histogram& parent, const Histogram& sibling) {
    for (size_t c = 0; c < cells_.size(); ++c) {
      cells_[c].g = parent.cells_[c].g - sibling.cells_[c].g;
      cells_[c].h = parent.cells_[c].h - sibling.cells_[c].h;
      cells_[c].n = parent.cells_[c].n - sibling.cells_[c].n;
    }
  }

  std::span<const HistCell> Feature(size_t f) const {
    return {cells_.data() + offsets_[f], offsets_[f + 1] - offsets_[f]};
  }

 private:
  std::vector<size_t> offsets_;
  std::vector<HistCell> cells_;
};

struct NodeTotals {
  double g = 0;
  double h = 0;
  size_t n = 0;
};

NodeTotals SumRows(std::span<const uint32_t> rows, std::span<const LambdaPair> grads) {
  NodeTotals t;
  for (uint32_t r : rows) {
    t.g += grads[r].g;
    t.h += grads[r].h;
  }
  t.n = rows.size();
  return t;
}

// Evaluates "left part" (gl, hl, nl) against the rest, with missing values
// either joining the right side (first) or the left side.
struct SideStats {
  double g = 0;
  double h = 0;
  size_t n = 0;
};

void ConsiderSplit(const SideStats& left_values, const SideStats& missing,
                   const NodeTotals& total, const TrainParams& params,
                   const std::function<void(double gain, bool missing_left, size_t nl,
                                            size_t nr)>& accept) {
  const size_t min_leaf = static_cast<size_t>(params.min_examples_per_leaf);
  for (int dir = 0; dir < (missing.n > 0 ? 2 : 1); ++dir) {
    const bool missing_left = dir == 1;
    SideStats l = left_values;
    if (missing_left) {
      l.g += missing.g;
      l.h += missing.h;
      l.n += missing.n;
    }
    const size_t nr = total.n - l.n;
    if (l.n < min_leaf || nr < min_leaf) continue;
    const double gr = total.g - l.g;
    const double hr = total.h - l.h;
    accept(SplitGain(l.g, l.h, gr, hr, params.l2), missing_left, l.n, nr);
  }
}

std::optional<SplitCandidate> BestAxisSplit(const TrainingMatrix& m, const Histogram& hist,
                                            const NodeTotals& total,
                                            const TrainParams& params) {
  std::optional<SplitCandidate> best;
  for (size_t f = 0; f < m.num_features(); ++f) {
    const auto cells = hist.Feature(f);
    const auto& thr = m.thresholds(f);
    const HistCell& miss_cell = cells[m.missing_bin(f)];
    const SideStats missing{miss_cell.g, miss_cell.h, miss_cell.n};
    SideStats left;
    // c < thr.size(): x < thr[c] goes left. c == thr.size(): every present
    // value goes left, splitting on missingness alone.
    for (size_t c = 0; c <= thr.size(); ++c) {
      left.g += cells[c].g;
      left.h += cells[c].h;
      left.n += cells[c].n;
      if (c == thr.size() && missing.n == 0) break;
      const double threshold =
          c < thr.size() ? thr[c] : std::numeric_limits<double>::infinity();
      ConsiderSplit(left, missing, total, params,
                    [&](double gain, bool missing_left, size_t nl, size_t nr) {
                      if (gain > 0 && (!best || gain > best->gain)) {
                        SplitCandidate s;
                        s.node.kind = NodeKind::kAxis;
                        s.node.feature = static_cast<int32_t>(f);
                        s.node.threshold = threshold;
                        s.node.missing_left = missing_left;
                        s.gain = gain;
                        s.left_count = nl;
                        s.right_count = nr;
                        best = std::move(s);
                      }
                    });
    }
  }
  return best;
}

std::optional<SplitCandidate> BestObliqueSplit(const TrainingMatrix& m,
                                               std::span<const uint32_t> rows,
                                               std::span<const LambdaPair> grads,
                                               const NodeTotals& total,
                                               const TrainParams& params, uint64_t node_seed) {
  std::optional<SplitCandidate> best;
  const size_t nf = m.num_features();
  for (int p = 0; p < params.oblique_projections; ++p) {
    Rng rng(DeriveSeed(node_seed, static_cast<uint64_t>(p)));
    std::vector<ObliqueTerm> terms;
    for (size_t f = 0; f < nf; ++f) {
      if (rng.NextDouble() < params.oblique_sparsity) {
        terms.push_back({static_cast<int32_t>(f), 0.0});
      }
    }
    if (terms.empty()) terms.push_back({static_cast<int32_t>(rng.Below(nf)), 0.0});
    for (auto& t : terms) t.weight = rng.NextDouble() < 0.5 ? -1.0 : 1.0;

    std::vector<std::pair<double, uint32_t>> projected;
    SideStats missing;
    for (uint32_t r : rows) {
      double z = 0;
      bool miss = false;
      for (const auto& t : terms) {
        const double v = m.value(r, t.feature);
        if (IsMissing(v)) {
          miss = true;
          break;
        }
        z += t.weight * v;
      }
      if (miss) {
        missing.g += grads[r].g;
        missing.h += grads[r].h;
        ++missing.n;
      } else {
        projected.emplace_back(z, r);
      }
    }
    if (projected.size() < 2) continue;
    std::sort(projected.begin(), projected.end());
    std::vector<size_t> boundaries;  // split after position i
    for (size_t i = 0; i + 1 < projected.size(); ++i) {
      if (projected[i].first != projected[i + 1].first) boundaries.push_back(i);
    }
    if (boundaries.empty()) continue;
    std::vector<size_t> chosen;
    if (boundaries.size() <= static_cast<size_t>(params.max_thresholds)) {
      chosen = boundaries;
    } else {
      const double n = static_cast<double>(projected.size());
      for (int q = 1; q <= params.max_thresholds; ++q) {
        const auto target = static_cast<size_t>(std::ceil(q * n / (params.max_thresholds + 1)));
        auto it = std::lower_bound(boundaries.begin(), boundaries.end(), target == 0 ? 0 : target - 1);
        if (it == boundaries.end()) --it;
        if (chosen.empty() || chosen.back() != *it) chosen.push_back(*it);
      }
    }
    SideStats left;
    size_t next = 0;
    for (size_t ci = 0; ci < chosen.size(); ++ci) {
      for (; next <= chosen[ci]; ++next) {
        left.g += grads[projected[next].second].g;
        left.h += grads[projected[next].second].h;
        ++left.n;
      }
      const double a = projected[chosen[ci]].first;
      const double b = projected[chosen[ci] + 1].first;
      double threshold = a + (b - a) / 2;
      if (!(threshold > a)) threshold = b;
      ConsiderSplit(left, missing, total, params,
                    [&](double gain, bool missing_left, size_t nl, size_t nr) {
                      if (gain > 0 && (!best || gain > best->gain)) {
                        SplitCandidate s;
                        s.node.kind = NodeKind::kOblique;
                        s.node.threshold = threshold;
                        s.node.missing_left = missing_left;
                        s.terms = terms;
                        s.gain = gain;
                        s.left_count = nl;
                        s.right_count = nr;
                        best = std::move(s);
                      }
                    });
    }
  }
  return best;
}

// Missing values follow the larger child when the node had none.
void SettleMissingDirection(SplitCandidate& s, size_t missing_count) {
  if (missing_count == 0) s.node.missing_left = s.left_count > s.right_count;
}

size_t MissingCount(const TrainingMatrix& m, const Histogram& hist, const SplitCandidate& s,
                    std::span<const uint32_t> rows) {
  if (s.node.kind == NodeKind::kAxis) {
    return hist.Feature(s.node.feature)[m.missing_bin(s.node.feature)].n;
  }
  size_t count = 0;
  for (uint32_t r : rows) {
    for (const auto& t : s.terms) {
      if (IsMissing(m.value(r, t.feature))) {
        ++count;
        break;
      }
    }
  }
  return count;
}

std::optional<SplitCandidate> BestSplitWithHistogram(const TrainingMatrix& m,
                                                     const Histogram& hist,
                                                     std::span<const uint32_t> rows,
                                                     std::span<const LambdaPair> grads,
                                                     const NodeTotals& total,
                                                     const TrainParams& params,
                                                     uint64_t node_seed) {
  std::optional<SplitCandidate> best = BestAxisSplit(m, hist, total, params);
  if (params.oblique) {
    auto ob = BestObliqueSplit(m, rows, grads, total, params, node_seed);
    if (ob && (!best || ob->gain > best->gain)) best = std::move(ob);
  }
  if (best) SettleMissingDirection(*best, MissingCount(m, hist, *best, rows));
  return best;
}

bool GoesLeft(const TrainingMatrix& m, const SplitCandidate& s, uint32_t r) {
  double v;
  if (s.node.kind == NodeKind::kAxis) {
    v = m.value(r, s.node.feature);
  } else {
    v = 0;
    for (const auto& t : s.terms) {
      const double x = m.value(r, t.feature);
      if (IsMissing(x)) {
        v = kMissing;
        break;
      }
      v += t.weight * x;
    }
  }
  if (IsMissing(v)) return s.node.missing_left;
  return v < s.node.threshold;
}

class TreeGrower {
 public:
  TreeGrower(const TrainingMatrix& m, std::span<const LambdaPair> grads,
             const TrainParams& params, uint64_t tree_seed)
      : m_(m), grads_(grads), params_(params), tree_seed_(tree_seed) {}

  Tree Grow(std::vector<uint32_t> rows) {
    Histogram hist(m_);
    const bool splittable = CanSplit(rows.size(), 0);
    if (splittable) hist.Build(m_, rows, grads_, params_.num_threads);
    GrowNode(rows, 0, splittable ? &hist : nullptr);
    return std::move(tree_);
  }

 private:
  bool CanSplit(size_t n, int depth) const {
    return depth < params_.max_depth &&
           n >= 2 * static_cast<size_t>(params_.min_examples_per_leaf);
  }

  int MakeLeaf(const NodeTotals& t) {
    TreeNode leaf;
    leaf.kind = NodeKind::kLeaf;
    leaf.value = LeafValue(t.g, t.h, params_.l2);
    tree_.nodes.push_back(leaf);
    return static_cast<int>(tree_.nodes.size() - 1);
  }

  int GrowNode(std::vector<uint32_t>& rows, int depth, const Histogram* hist) {
    const NodeTotals totals = SumRows(rows, grads_);
    if (hist == nullptr) return MakeLeaf(totals);
    const int index = static_cast<int>(tree_.nodes.size());
    const uint64_t node_seed = DeriveSeed(tree_seed_, static_cast<uint64_t>(index));
    auto split = BestSplitWithHistogram(m_, *hist, rows, grads_, totals, params_, node_seed);
    if (!split) return MakeLeaf(totals);

    tree_.nodes.push_back(split->node);
    if (split->node.kind == NodeKind::kOblique) {
      tree_.nodes[index].term_begin = static_cast<uint32_t>(tree_.terms.size());
      tree_.nodes[index].term_count = static_cast<uint32_t>(split->terms.size());
      tree_.terms.insert(tree_.terms.end(), split->terms.begin(), split->terms.end());
    }
    std::vector<uint32_t> left, right;
    left.reserve(split->left_count);
    right.reserve(split->right_count);
    for (uint32_t r : rows) (GoesLeft(m_, *split, r) ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const bool split_left = CanSplit(left.size(), depth + 1);
    const bool split_right = CanSplit(right.size(), depth + 1);
    std::optional<Histogram> left_hist, right_hist;
    if (split_left || split_right) {
      // Build the smaller child directly and derive the sibling.
      const bool left_small = left.size() <= right.size();
      Histogram small(m_);
      small.Build(m_, left_small ? left : right, grads_, params_.num_threads);
      Histogram large(m_);
      large.Subtract(*hist, small);
      if (left_small) {
        left_hist.emplace(std::move(small));
        right_hist.emplace(std::move(large));
      } else {
        left_hist.emplace(std::move(large));
        right_hist.emplace(std::move(small));
      }
    }
    const int l = GrowNode(left, depth + 1, split_left ? &*left_hist : nullptr);
    left_hist.reset();
    const int r = GrowNode(right, depth + 1, split_right ? &*right_hist : nullptr);
    tree_.nodes[index].left = l;
    tree_.nodes[index].right = r;
    return index;
  }

  const TrainingMatrix& m_;
  std::span<const LambdaPair> grads_;
  const TrainParams& params_;
  uint64_t tree_seed_;
  Tree tree_;
};

}  // namespace

std::optional<SplitCandidate> FindBestSplit(const TrainingMatrix& m,
                                            std::span<const uint32_t> rows,
                                            std::span<const LambdaPair> grads,
                                            const TrainParams& params, uint64_t node_seed) {
  if (rows.size() < 2 * static_cast<size_t>(params.min_examples_per_leaf)) return std::nullopt;
  Histogram hist(m);
  hist.Build(m, rows, grads, params.num_threads);
  return BestSplitWithHistogram(m, hist, rows, grads, SumRows(rows, grads), params, node_seed);
}

double MeanNdcg(const Dataset& ds, std::span<const double> scores, int k) {
  if (ds.groups.empty()) return 0.0;
  double sum = 0;
  for (const auto& g : ds.groups) {
    const auto order = OrderByScore(scores.subspan(g.begin, g.size()));
    sum += NdcgAtK(ds.GroupLabels(g), order, k);
  }
  return sum / static_cast<double>(ds.groups.size());
}

namespace {

std::vector<int> ColumnMapping(const FeatureSchema& model_schema, const FeatureSchema& data_schema) {
  std::vector<int> map(model_schema.size());
  for (size_t c = 0; c < model_schema.size(); ++c) {
    map[c] = data_schema.IndexOf(model_schema[c].name);
    if (map[c] < 0) {
      throw InvalidInputError("dataset lacks model column '" + model_schema[c].name + "'");
    }
  }
  return map;
}

bool IsIdentity(const std::vector<int>& map, size_t data_width) {
  if (map.size() != data_width) return false;
  for (size_t i = 0; i < map.size(); ++i) {
    if (map[i] != static_cast<int>(i)) return false;
  }
  return true;
}

}  // namespace

std::vector<double> PredictDataset(const Model& model, const Dataset& ds, int num_threads) {
  const auto map = ColumnMapping(model.schema, ds.schema);
  const bool identity = IsIdentity(map, ds.num_features());
  std::vector<double> out(ds.num_rows());
  ParallelFor(num_threads, ds.num_rows(), [&](size_t b, size_t e) {
    std::vector<double> x(map.size());
    for (size_t r = b; r < e; ++r) {
      const auto row = ds.Row(r);
      if (identity) {
        out[r] = model.PredictRaw(row);
      } else {
        for (size_t c = 0; c < map.size(); ++c) x[c] = row[map[c]];
        out[r] = model.PredictRaw(x);
      }
    }
  });
  return out;
}

Model Train(const Dataset& train, const TrainParams& params, const Dataset* valid,
            std::vector<RoundLog>* log, const RoundCallback& on_round) {
  params.Validate();
  train.Validate();
  if (train.num_rows() == 0 || train.groups.empty()) {
    throw TrainingError("training set is empty");
  }
  bool has_pairs = false;
  for (const auto& g : train.groups) {
    const auto labels = train.GroupLabels(g);
    if (std::any_of(labels.begin(), labels.end(), [&](double l) { return l != labels[0]; })) {
      has_pairs = true;
      break;
    }
  }
  if (!has_pairs) throw TrainingError("no query group has two distinct labels");

  Model model;
  model.schema = train.schema;
  model.params = params;
  model.shrinkage = params.shrinkage;
  model.base_score = 0.0;

  const TrainingMatrix matrix(train.features, train.num_rows(), train.num_features(),
                              params.max_thresholds, params.num_threads);
  std::vector<double> scores(train.num_rows(), model.base_score);
  std::vector<double> valid_scores;
  std::vector<int> valid_map;
  if (valid != nullptr) {
    valid->Validate();
    valid_scores.assign(valid->num_rows(), model.base_score);
    valid_map = ColumnMapping(model.schema, valid->schema);
  }
  std::vector<LambdaPair> grads(train.num_rows());
  std::vector<uint32_t> all_rows(train.num_rows());
  std::iota(all_rows.begin(), all_rows.end(), 0u);

  for (int t = 0; t < params.num_trees; ++t) {
    ParallelFor(params.num_threads, train.groups.size(), [&](size_t b, size_t e) {
      for (size_t gi = b; gi < e; ++gi) {
        const auto& g = train.groups[gi];
        auto lp = LambdaGradients(train.GroupLabels(g),
                                  std::span<const double>(scores).subspan(g.begin, g.size()),
                                  params.ndcg_truncation, params.sigma);
        std::copy(lp.begin(), lp.end(), grads.begin() + g.begin);
      }
    });
    TreeGrower grower(matrix, grads, params,
                      DeriveSeed(params.seed, static_cast<uint64_t>(t)));
    Tree tree = grower.Grow(all_rows);
    ParallelFor(params.num_threads, train.num_rows(), [&](size_t b, size_t e) {
      for (size_t r = b; r < e; ++r) scores[r] += params.shrinkage * tree.Predict(matrix.row(r));
    });
    RoundLog entry;
    entry.round = t + 1;
    entry.train_ndcg = MeanNdcg(train, scores, params.ndcg_truncation);
    entry.valid_ndcg = std::numeric_limits<double>::quiet_NaN();
    if (valid != nullptr) {
      ParallelFor(params.num_threads, valid->num_rows(), [&](size_t b, size_t e) {
        std::vector<double> x(valid_map.size());
        for (size_t r = b; r < e; ++r) {
          const auto row = valid->Row(r);
          for (size_t c = 0; c < valid_map.size(); ++c) x[c] = row[valid_map[c]];
          valid_scores[r] += params.shrinkage * tree.Predict(x);
        }
      });
      entry.valid_ndcg = MeanNdcg(*valid, valid_scores, params.ndcg_truncation);
    }
    model.trees.push_back(std::move(tree));
    if (log != nullptr) log->push_back(entry);
    if (on_round) on_round(entry);
  }
  return model;
}

}  // namespace mcrank
