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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <memory>

#include "json.hpp"
#include "mcrank/dataset.h"
#include "mcrank/fusion.h"
#include "mcrank/gbdt.h"
#include "mcrank/labeling.h"
#include "mcrank/metrics.h"
#include "mcrank/model_io.h"
#include "mcrank/scoring.h"

namespace py = pybind11;

namespace mcrank {
namespace {

using NamedList = std::pair<std::string, std::vector<std::pair<std::string, double>>>;

// Channel indices follow argument order.
std::vector<ChannelList> ToLists(const std::vector<NamedList>& lists, const std::string& query) {
  std::vector<ChannelList> out;
  for (size_t c = 0; c < lists.size(); ++c) {
    std::vector<ScoredItem> entries;
    for (const auto& [item, score] : lists[c].second) entries.push_back({ItemId(item), score});
    out.emplace_back(ChannelId{static_cast<int>(c), lists[c].first}, QueryId(query), std::move(entries));
  }
  return out;
}

py::tuple WeightsTuple(const LabelWeights& w) { return py::make_tuple(w.a, w.b, w.c, w.d); }

class PyModel {
 public:
  explicit PyModel(Model m) : model_(std::make_shared<const Model>(std::move(m))) {}

  static PyModel Load(const std::string& path) { return PyModel(LoadModel(path)); }

  void Save(const std::string& path) const { SaveModel(path, *model_); }

  std::vector<std::string> FeatureNames() const {
    std::vector<std::string> names;
    for (const auto& c : model_->schema.columns()) names.push_back(c.name);
    return names;
  }

  // Unknown names are an error; absent columns are missing.
  double Predict(const std::map<std::string, std::optional<double>>& features) const {
    std::vector<double> x(model_->schema.size(), kMissing);
    for (const auto& [name, v] : features) {
      const int idx = model_->schema.IndexOf(name);
      if (idx < 0) throw InvalidInputError("unknown feature: " + name);
      x[idx] = v.value_or(kMissing);
    }
    return model_->PredictRaw(x);
  }

  std::vector<double> PredictRows(const std::vector<std::vector<double>>& rows) const {
    std::vector<double> out;
    for (const auto& r : rows) {
      if (r.size() != model_->schema.size()) throw InvalidInputError("row width does not match the schema");
      out.push_back(model_->PredictRaw(r));
    }
    return out;
  }

  std::string Score(const std::string& request_json, size_t pool_cap) const {
    ScorerConfig cfg;
    cfg.pool_cap = pool_cap;
    const Scorer scorer(model_, cfg);
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(request_json);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInputError(std::string("malformed request: ") + e.what());
    }
    return scorer.Score(ParseScoreRequest(body, scorer.channel_names())).ToJson().dump();
  }

  size_t num_trees() const { return model_->trees.size(); }
  std::string fingerprint() const { return ModelFingerprint(*model_); }

 private:
  std::shared_ptr<const Model> model_;
};

PyModel TrainFile(const std::string& train_path, std::optional<std::string> valid_path, int num_trees,
                  int max_depth, double shrinkage, int min_leaf, double l2, int ndcg_k, uint64_t seed,
                  int threads) {
  TrainParams p;
  p.num_trees = num_trees;
  p.max_depth = max_depth;
  p.shrinkage = shrinkage;
  p.min_examples_per_leaf = min_leaf;
  p.l2 = l2;
  p.ndcg_truncation = ndcg_k;
  p.seed = seed;
  p.num_threads = threads;
  const Dataset train = LoadDataset(train_path);
  if (valid_path) {
    const Dataset valid = LoadDataset(*valid_path);
    return PyModel(Train(train, p, &valid));
  }
  return PyModel(Train(train, p));
}

}  // namespace
}  // namespace mcrank

PYBIND11_MODULE(_mcrank, m) {
  using namespace mcrank;
  m.doc() = "mcrank native bindings";
  py::register_exception<InvalidInputError>(m, "InvalidInputError", PyExc_ValueError);

  m.def(
      "ndcg_at_k",
      [](const std::vector<double>& labels, const std::vector<int>& order, int k) {
        return NdcgAtK(labels, order, k);
      },
      py::arg("labels"), py::arg("order"), py::arg("k"));
  m.def("order_by_score", [](const std::vector<double>& s) { return OrderByScore(s); }, py::arg("scores"));
  m.def(
      "lambda_gradients",
      [](const std::vector<double>& labels, const std::vector<double>& scores, int k, double sigma) {
        std::vector<std::pair<double, double>> out;
        for (const auto& l : LambdaGradients(labels, scores, k, sigma)) out.emplace_back(l.g, l.h);
        return out;
      },
      py::arg("labels"), py::arg("scores"), py::arg("k") = 8, py::arg("sigma") = 1.0);
  m.def(
      "rrf_fuse",
      [](const std::vector<NamedList>& lists, double k_rrf) {
        const auto fused = RrfFuse(ToLists(lists, "q"), k_rrf);
        std::vector<std::pair<std::string, double>> out;
        for (size_t i = 0; i < fused.items.size(); ++i) out.emplace_back(fused.items[i].value(), (*fused.scores)[i]);
        return out;
      },
      py::arg("lists"), py::arg("k_rrf") = kDefaultRrfK);
  m.def(
      "weighted_interleave",
      [](const std::vector<NamedList>& lists, const std::map<std::string, double>& weights, uint64_t seed) {
        InterleaveWeights w;
        for (size_t c = 0; c < lists.size(); ++c) {
          const auto it = weights.find(lists[c].first);
          if (it == weights.end()) throw InvalidInputError("no weight for channel " + lists[c].first);
          w.weights[static_cast<int>(c)] = it->second;
        }
        std::vector<std::string> out;
        for (const auto& item : WeightedInterleave(ToLists(lists, "q"), w, seed).items) out.push_back(item.value());
        return out;
      },
      py::arg("lists"), py::arg("weights"), py::arg("seed"));
  m.def(
      "calibrate_weights",
      [](int64_t purchases, int64_t add_to_carts, int64_t clicks) {
        return WeightsTuple(CalibrateWeights({purchases, add_to_carts, clicks}));
      },
      py::arg("purchases"), py::arg("add_to_carts"), py::arg("clicks"));
  m.def(
      "raw_label",
      [](int64_t purchases, int64_t add_to_carts, int64_t clicks, int64_t view_only,
         std::tuple<double, double, double, double> w) {
        FunnelCounts f;
        f.purchases = purchases;
        f.add_to_carts = add_to_carts;
        f.clicks = clicks;
        f.view_only = view_only;
        const auto [a, b, c, d] = w;
        return RawLabel(f, LabelWeights{a, b, c, d});
      },
      py::arg("purchases"), py::arg("add_to_carts"), py::arg("clicks"), py::arg("view_only"), py::arg("weights"));
  m.def("normalize_labels", [](const std::vector<double>& raw) { return NormalizeLabels(raw); }, py::arg("raw"));

  py::class_<PyModel>(m, "Model")
      .def_static("load", &PyModel::Load, py::arg("path"))
      .def("save", &PyModel::Save, py::arg("path"))
      .def("predict", &PyModel::Predict, py::arg("features"))
      .def("predict_rows", &PyModel::PredictRows, py::arg("rows"))
      .def("score_json", &PyModel::Score, py::arg("request"), py::arg("pool_cap") = kDefaultPoolCap)
      .def_property_readonly("feature_names", &PyModel::FeatureNames)
      .def_property_readonly("num_trees", &PyModel::num_trees)
      .def_property_readonly("fingerprint", &PyModel::fingerprint);

  m.def("train", &TrainFile, py::arg("train_path"), py::arg("valid_path") = std::nullopt,
        py::arg("num_trees") = 300, py::arg("max_depth") = 6, py::arg("shrinkage") = 0.1,
        py::arg("min_leaf") = 5, py::arg("l2") = 1.0, py::arg("ndcg_k") = 8, py::arg("seed") = 1,
        py::arg("threads") = 1);
}
