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

#include "mcrank/evaluation.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "mcrank/metrics.h"
#include "mcrank/parallel.h"

namespace mcrank {
namespace {

uint64_t GroupKeyHash(const Dataset& ds, const GroupRange& g) {
  Fnv1a h;
  h.Update(ds.rows[g.begin].query);
  h.UpdateU64(static_cast<uint64_t>(ds.rows[g.begin].week));
  return h.digest();
}

// Linear interpolation between order statistics.
double Quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0;
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

ModelRanker::ModelRanker(std::string name, const Model& model)
    : name_(std::move(name)), model_(model) {}

std::vector<int> ModelRanker::Rank(const Dataset& ds, const GroupRange& g,
                                   uint64_t /*seed*/) const {
  const auto& cols = model_.schema.columns();
  std::vector<int> map(cols.size());
  for (size_t c = 0; c < cols.size(); ++c) {
    map[c] = ds.schema.IndexOf(cols[c].name);
    if (map[c] < 0) throw InvalidInputError("dataset lacks model column " + cols[c].name);
  }
  std::vector<double> x(cols.size());
  std::vector<double> scores(g.size());
  for (size_t r = g.begin; r < g.end; ++r) {
    const auto row = ds.Row(r);
    for (size_t c = 0; c < map.size(); ++c) x[c] = row[map[c]];
    scores[r - g.begin] = model_.PredictRaw(x);
  }
  return OrderByScore(scores);
}

std::vector<ChannelList> ChannelListsFromGroup(const Dataset& ds, const GroupRange& g) {
  const auto names = ds.schema.ChannelNames();
  const QueryId query(ds.rows[g.begin].query);
  std::vector<ChannelList> lists;
  for (size_t k = 0; k < names.size(); ++k) {
    const int col = ds.schema.IndexOf(ChannelScoreColumn(names[k]));
    std::vector<ScoredItem> entries;
    for (size_t r = g.begin; r < g.end; ++r) {
      const double s = ds.Row(r)[col];
      if (!IsMissing(s)) entries.push_back({ItemId(ds.rows[r].item), s});
    }
    if (entries.empty()) continue;
    lists.emplace_back(ChannelId{static_cast<int>(k), names[k]}, query, std::move(entries));
  }
  return lists;
}

namespace {

std::vector<int> OrderFromItems(const Dataset& ds, const GroupRange& g,
                                const std::vector<ItemId>& items) {
  std::map<std::string_view, int> local;
  for (size_t r = g.begin; r < g.end; ++r) {
    local.emplace(ds.rows[r].item, static_cast<int>(r - g.begin));
  }
  std::vector<int> order;
  std::vector<bool> seen(g.size(), false);
  order.reserve(g.size());
  for (const auto& it : items) {
    const auto f = local.find(it.value());
    if (f == local.end() || seen[f->second]) continue;
    seen[f->second] = true;
    order.push_back(f->second);
  }
  // Rows no channel retrieved keep their row order at the end.
  for (size_t i = 0; i < g.size(); ++i) {
    if (!seen[i]) order.push_back(static_cast<int>(i));
  }
  return order;
}

}  // namespace

std::vector<int> RrfRanker::Rank(const Dataset& ds, const GroupRange& g,
                                 uint64_t /*seed*/) const {
  const auto lists = ChannelListsFromGroup(ds, g);
  return OrderFromItems(ds, g, RrfFuse(lists, k_rrf_).items);
}

InterleaveRanker::InterleaveRanker(std::map<std::string, double> weights_by_name,
                                   int num_seeds)
    : weights_(std::move(weights_by_name)), num_seeds_(num_seeds) {
  if (num_seeds < 1) throw InvalidInputError("interleave: num_seeds must be >= 1");
}

std::vector<int> InterleaveRanker::Rank(const Dataset& ds, const GroupRange& g,
                                        uint64_t seed) const {
  const auto lists = ChannelListsFromGroup(ds, g);
  InterleaveWeights w;
  if (weights_.empty()) {
    w = InterleaveWeights::Uniform(lists);
  } else {
    for (const auto& l : lists) {
      const auto it = weights_.find(l.channel().name);
      if (it == weights_.end()) {
        throw InvalidInputError("interleave: no weight for channel " + l.channel().name);
      }
      w.weights[l.channel().index] = it->second;
    }
  }
  const uint64_t group_seed = DeriveSeed(seed, GroupKeyHash(ds, g));
  return OrderFromItems(ds, g, WeightedInterleave(lists, w, group_seed).items);
}

std::vector<int> LabelOracleRanker::Rank(const Dataset& ds, const GroupRange& g,
                                         uint64_t /*seed*/) const {
  const auto labels = ds.GroupLabels(g);
  return OrderByScore(labels);
}

VariantMetrics EvaluateVariant(const Ranker& ranker, const Dataset& eval_set,
                               const MetricConfig& cfg, uint64_t seed, int num_threads) {
  if (cfg.k < 1) throw InvalidInputError("metric: k must be >= 1");
  if (eval_set.groups.empty()) throw InvalidInputError("evaluation set is empty");
  std::vector<double> purchase_labels;
  if (eval_set.funnels.size() == eval_set.rows.size()) {
    purchase_labels = eval_set.WithLabels(LabelWeights::PurchaseOnly()).labels;
  }
  const int seeds = ranker.num_seeds();
  const size_t n = eval_set.groups.size();
  std::vector<double> ndcg(n, 0.0), purchase(n, 0.0);
  std::vector<char> zero_idcg(n, 0);
  ParallelFor(num_threads, n, [&](size_t begin, size_t end) {
    for (size_t gi = begin; gi < end; ++gi) {
      const auto& g = eval_set.groups[gi];
      const auto labels = eval_set.GroupLabels(g);
      zero_idcg[gi] = IdealDcgAtK(labels, cfg.k) == 0.0;
      double sum = 0, psum = 0;
      for (int s = 0; s < seeds; ++s) {
        const auto order = ranker.Rank(eval_set, g, DeriveSeed(seed, static_cast<uint64_t>(s)));
        sum += NdcgAtK(labels, order, cfg.k);
        if (!purchase_labels.empty()) {
          psum += NdcgAtK({purchase_labels.data() + g.begin, g.size()}, order, cfg.k);
        }
      }
      ndcg[gi] = sum / seeds;
      purchase[gi] = psum / seeds;
    }
  });

  VariantMetrics m;
  m.name = ranker.name();
  m.groups = n;
  m.seeds = seeds;
  double total = 0, ptotal = 0;
  for (size_t gi = 0; gi < n; ++gi) {
    total += ndcg[gi];
    ptotal += purchase[gi];
    m.zero_idcg_groups += zero_idcg[gi];
  }
  m.mean_ndcg = total / static_cast<double>(n);
  if (!purchase_labels.empty()) m.purchase_ndcg = ptotal / static_cast<double>(n);
  for (const auto& [key, q] : std::vector<std::pair<std::string, double>>{
           {"p10", 0.1}, {"p25", 0.25}, {"p50", 0.5}, {"p75", 0.75}, {"p90", 0.9}}) {
    m.quantiles[key] = Quantile(ndcg, q);
  }
  m.per_group = std::move(ndcg);
  return m;
}

const VariantMetrics& EvalReport::Get(const std::string& name) const {
  for (const auto& v : variants) {
    if (v.name == name) return v;
  }
  throw InvalidInputError("report has no variant " + name);
}

std::string EvalReport::ToTable() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(12) << "variant" << std::right << std::setw(10)
      << ("NDCG@" + std::to_string(k)) << std::setw(12) << "purchase" << std::setw(8)
      << "groups" << std::setw(8) << "seeds" << std::setw(8) << "p10" << std::setw(8)
      << "p50" << std::setw(8) << "p90" << '\n';
  for (const auto& v : variants) {
    out << std::left << std::setw(12) << v.name << std::right << std::setw(10) << v.mean_ndcg
        << std::setw(12) << v.purchase_ndcg << std::setw(8) << v.groups << std::setw(8)
        << v.seeds << std::setw(8) << v.quantiles.at("p10") << std::setw(8)
        << v.quantiles.at("p50") << std::setw(8) << v.quantiles.at("p90") << '\n';
  }
  out << '\n';
  for (const auto& d : deltas) {
    out << std::left << std::setw(24) << (d.from + " -> " + d.to) << std::right
        << std::showpos << d.delta << std::noshowpos << '\n';
  }
  out << "\nconfig " << config_hash << "  dataset " << dataset_fingerprint << "  seeds";
  for (auto s : seeds) out << ' ' << s;
  out << '\n';
  return out.str();
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json j;
  j["k"] = k;
  j["config_hash"] = config_hash;
  j["dataset_fingerprint"] = dataset_fingerprint;
  j["seeds"] = seeds;
  j["notes"] = notes;
  for (const auto& v : variants) {
    nlohmann::json jv;
    jv["name"] = v.name;
    jv["mean_ndcg"] = v.mean_ndcg;
    jv["groups"] = v.groups;
    jv["zero_idcg_groups"] = v.zero_idcg_groups;
    jv["seeds"] = v.seeds;
    jv["quantiles"] = v.quantiles;
    if (!std::isnan(v.purchase_ndcg)) jv["purchase_ndcg"] = v.purchase_ndcg;
    j["variants"].push_back(jv);
  }
  for (const auto& d : deltas) {
    j["deltas"].push_back({{"from", d.from}, {"to", d.to}, {"delta", d.delta}});
  }
  return j;
}

std::string AblationConfigHash(const AblationConfig& cfg) {
  const auto& p = cfg.params;
  std::ostringstream s;
  s << p.num_trees << ' ' << FormatDouble(p.shrinkage) << ' ' << p.max_depth << ' '
    << p.min_examples_per_leaf << ' ' << FormatDouble(p.l2) << ' ' << p.ndcg_truncation << ' '
    << FormatDouble(p.sigma) << ' ' << p.oblique << ' ' << p.oblique_projections << ' '
    << FormatDouble(p.oblique_sparsity) << ' ' << p.max_thresholds << ' ' << p.seed << " k"
    << cfg.metric.k << " wi" << cfg.wi_seeds << ' ' << cfg.seed;
  for (const auto& [name, w] : cfg.wi_weights) s << ' ' << name << '=' << FormatDouble(w);
  s << " h" << FormatDouble(cfg.heuristic.a) << ',' << FormatDouble(cfg.heuristic.b) << ','
    << FormatDouble(cfg.heuristic.c) << ',' << FormatDouble(cfg.heuristic.d);
  return HexDigest(HashString(s.str()));
}

EvalReport AblationRun(const DatasetSplits& splits, const AblationConfig& cfg,
                       std::vector<Model>* models) {
  cfg.params.Validate();
  const int threads = cfg.params.num_threads;
  const auto no_engagement = [](const FeatureColumn& c) {
    return c.group != FeatureGroup::kEngagement;
  };
  const Dataset test = splits.test.WithLabels(splits.conversion_weights);

  struct Arm {
    std::string name;
    LabelWeights labels;
    bool engagement;
  };
  const std::vector<Arm> arms = {
      {"UR", cfg.heuristic, false},
      {"UR+EF", cfg.heuristic, true},
      {"UR+EF+CL", splits.conversion_weights, true},
  };

  EvalReport report;
  report.k = cfg.metric.k;
  report.config_hash = AblationConfigHash(cfg);
  report.dataset_fingerprint = HexDigest(test.Fingerprint() ^ Mix64(splits.train.Fingerprint()));
  report.seeds = {cfg.seed, cfg.params.seed};
  report.notes["eval_labels"] = "conversion-weighted";
  report.notes["wi_seeds"] = std::to_string(cfg.wi_seeds);

  InterleaveRanker wi(cfg.wi_weights, cfg.wi_seeds);
  report.variants.push_back(EvaluateVariant(wi, test, cfg.metric, cfg.seed, threads));

  for (const auto& arm : arms) {
    Dataset train = splits.train.WithLabels(arm.labels);
    Dataset valid = splits.valid.WithLabels(arm.labels);
    if (!arm.engagement) {
      train = train.SelectColumns(no_engagement);
      valid = valid.SelectColumns(no_engagement);
    }
    Model model = Train(train, cfg.params, &valid);
    ModelRanker ranker(arm.name, model);
    report.variants.push_back(EvaluateVariant(ranker, test, cfg.metric, cfg.seed, threads));
    if (models != nullptr) models->push_back(std::move(model));
  }

  for (size_t i = 1; i < report.variants.size(); ++i) {
    report.deltas.push_back({report.variants[i - 1].name, report.variants[i].name,
                             report.variants[i].mean_ndcg - report.variants[i - 1].mean_ndcg});
  }
  report.deltas.push_back({report.variants.front().name, report.variants.back().name,
                           report.variants.back().mean_ndcg - report.variants.front().mean_ndcg});
  return report;
}

}  // namespace mcrank
