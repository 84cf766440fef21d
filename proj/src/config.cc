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

#include "mcrank/config.h"

#include <fstream>
#include <functional>
#include <map>

namespace mcrank {
namespace {

using Json = nlohmann::json;

template <typename T>
using Setters = std::map<std::string, std::function<void(T&, const Json&)>>;

template <typename T>
void Overlay(const Json& j, T& target, const Setters<T>& setters, const char* what) {
  if (j.is_null()) return;
  if (!j.is_object()) throw InvalidInputError(std::string(what) + " config must be an object");
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw InvalidInputError(std::string("unknown ") + what + " config key '" + key + "'");
    }
    try {
      it->second(target, value);
    } catch (const Json::exception& e) {
      throw InvalidInputError(std::string(what) + " config key '" + key + "': " + e.what());
    }
  }
}

#define MCRANK_FIELD(Type, field) \
  {#field, [](Type& c, const Json& v) { v.get_to(c.field); }}

const Setters<WorldConfig>& WorldSetters() {
  static const Setters<WorldConfig> s = {
      MCRANK_FIELD(WorldConfig, num_queries),
      MCRANK_FIELD(WorldConfig, num_items),
      MCRANK_FIELD(WorldConfig, num_categories),
      MCRANK_FIELD(WorldConfig, channel_names),
      MCRANK_FIELD(WorldConfig, num_weeks),
      MCRANK_FIELD(WorldConfig, n_k),
      MCRANK_FIELD(WorldConfig, candidates_per_query),
      MCRANK_FIELD(WorldConfig, in_category_fraction),
      MCRANK_FIELD(WorldConfig, sessions_max),
      MCRANK_FIELD(WorldConfig, sessions_min),
      MCRANK_FIELD(WorldConfig, sessions_exponent),
      MCRANK_FIELD(WorldConfig, click_rate),
      MCRANK_FIELD(WorldConfig, atc_rate),
      MCRANK_FIELD(WorldConfig, purchase_rate),
      MCRANK_FIELD(WorldConfig, click_relevance_slope),
      MCRANK_FIELD(WorldConfig, click_attractiveness_slope),
      MCRANK_FIELD(WorldConfig, atc_relevance_slope),
      MCRANK_FIELD(WorldConfig, purchase_relevance_slope),
      MCRANK_FIELD(WorldConfig, relevance_center),
      MCRANK_FIELD(WorldConfig, item_quality_sd),
      MCRANK_FIELD(WorldConfig, position_bias),
      MCRANK_FIELD(WorldConfig, channel_utility_concentration),
      MCRANK_FIELD(WorldConfig, channel_noise_sd),
      MCRANK_FIELD(WorldConfig, trend_fraction),
      MCRANK_FIELD(WorldConfig, trend_slope_sd),
      MCRANK_FIELD(WorldConfig, seed),
      MCRANK_FIELD(WorldConfig, num_threads),
  };
  return s;
}

const Setters<TrainParams>& TrainSetters() {
  static const Setters<TrainParams> s = {
      MCRANK_FIELD(TrainParams, num_trees),
      MCRANK_FIELD(TrainParams, shrinkage),
      MCRANK_FIELD(TrainParams, max_depth),
      MCRANK_FIELD(TrainParams, min_examples_per_leaf),
      MCRANK_FIELD(TrainParams, l2),
      MCRANK_FIELD(TrainParams, ndcg_truncation),
      MCRANK_FIELD(TrainParams, sigma),
      MCRANK_FIELD(TrainParams, oblique),
      MCRANK_FIELD(TrainParams, oblique_projections),
      MCRANK_FIELD(TrainParams, oblique_sparsity),
      MCRANK_FIELD(TrainParams, max_thresholds),
      MCRANK_FIELD(TrainParams, seed),
      MCRANK_FIELD(TrainParams, num_threads),
  };
  return s;
}

#undef MCRANK_FIELD

}  // namespace

WorldConfig WorldConfigFromJson(const Json& j, WorldConfig base) {
  Overlay(j, base, WorldSetters(), "world");
  base.Validate();
  return base;
}

Json WorldConfigToJson(const WorldConfig& c) {
  return {{"num_queries", c.num_queries},
          {"num_items", c.num_items},
          {"num_categories", c.num_categories},
          {"channel_names", c.channel_names},
          {"num_weeks", c.num_weeks},
          {"n_k", c.n_k},
          {"candidates_per_query", c.candidates_per_query},
          {"in_category_fraction", c.in_category_fraction},
          {"sessions_max", c.sessions_max},
          {"sessions_min", c.sessions_min},
          {"sessions_exponent", c.sessions_exponent},
          {"click_rate", c.click_rate},
          {"atc_rate", c.atc_rate},
          {"purchase_rate", c.purchase_rate},
          {"click_relevance_slope", c.click_relevance_slope},
          {"click_attractiveness_slope", c.click_attractiveness_slope},
          {"atc_relevance_slope", c.atc_relevance_slope},
          {"purchase_relevance_slope", c.purchase_relevance_slope},
          {"relevance_center", c.relevance_center},
          {"item_quality_sd", c.item_quality_sd},
          {"position_bias", c.position_bias},
          {"channel_utility_concentration", c.channel_utility_concentration},
          {"channel_noise_sd", c.channel_noise_sd},
          {"trend_fraction", c.trend_fraction},
          {"trend_slope_sd", c.trend_slope_sd},
          {"seed", c.seed},
          {"num_threads", c.num_threads}};
}

TrainParams TrainParamsFromJson(const Json& j, TrainParams base) {
  Overlay(j, base, TrainSetters(), "train");
  base.Validate();
  return base;
}

Json TrainParamsToJson(const TrainParams& p) {
  return {{"num_trees", p.num_trees},
          {"shrinkage", p.shrinkage},
          {"max_depth", p.max_depth},
          {"min_examples_per_leaf", p.min_examples_per_leaf},
          {"l2", p.l2},
          {"ndcg_truncation", p.ndcg_truncation},
          {"sigma", p.sigma},
          {"oblique", p.oblique},
          {"oblique_projections", p.oblique_projections},
          {"oblique_sparsity", p.oblique_sparsity},
          {"max_thresholds", p.max_thresholds},
          {"seed", p.seed},
          {"num_threads", p.num_threads}};
}

ExperimentConfig ExperimentConfigFromJson(const Json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw InvalidInputError("experiment config must be an object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "world") {
        c.world = WorldConfigFromJson(value);
      } else if (key == "train") {
        c.ablation.params = TrainParamsFromJson(value);
      } else if (key == "k") {
        value.get_to(c.ablation.metric.k);
      } else if (key == "wi_seeds") {
        value.get_to(c.ablation.wi_seeds);
      } else if (key == "seed") {
        value.get_to(c.ablation.seed);
      } else if (key == "n_k") {
        c.pipeline.truncation = TruncationConfig::Uniform(value.get<int>());
      } else if (key == "lookback_windows") {
        value.get_to(c.pipeline.lookback.windows);
      } else if (key == "half_life") {
        value.get_to(c.pipeline.lookback.decay_half_life);
      } else {
        throw InvalidInputError("unknown experiment config key '" + key + "'");
      }
    } catch (const Json::exception& e) {
      throw InvalidInputError("experiment config key '" + key + "': " + e.what());
    }
  }
  if (c.ablation.metric.k < 1) throw InvalidInputError("experiment config: k must be >= 1");
  if (c.ablation.wi_seeds < 1) throw InvalidInputError("experiment config: wi_seeds must be >= 1");
  c.pipeline.lookback.Validate();
  return c;
}

Json ExperimentConfigToJson(const ExperimentConfig& c) {
  return {{"world", WorldConfigToJson(c.world)},
          {"train", TrainParamsToJson(c.ablation.params)},
          {"k", c.ablation.metric.k},
          {"wi_seeds", c.ablation.wi_seeds},
          {"seed", c.ablation.seed},
          {"n_k", c.pipeline.truncation.default_n},
          {"lookback_windows", c.pipeline.lookback.windows},
          {"half_life", c.pipeline.lookback.decay_half_life}};
}

ExperimentConfig LoadExperimentConfig(const std::string& name_or_path) {
  if (name_or_path == "default") return ExperimentConfig{};
  std::ifstream in(name_or_path);
  if (!in) throw InvalidInputError("cannot open config: " + name_or_path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidInputError("config " + name_or_path + ": " + e.what());
  }
  return ExperimentConfigFromJson(j);
}

}  // namespace mcrank
