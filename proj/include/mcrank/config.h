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

#ifndef MCRANK_CONFIG_H_
#define MCRANK_CONFIG_H_

#include <string>

#include "json.hpp"
#include "mcrank/evaluation.h"
#include "mcrank/gbdt.h"
#include "mcrank/synthgen.h"

namespace mcrank {

// JSON objects overlay the defaults field by field; unknown keys are an
// InvalidInputError so typos do not silently fall back.
WorldConfig WorldConfigFromJson(const nlohmann::json& j, WorldConfig base = {});
nlohmann::json WorldConfigToJson(const WorldConfig& c);
TrainParams TrainParamsFromJson(const nlohmann::json& j, TrainParams base = {});
nlohmann::json TrainParamsToJson(const TrainParams& p);

// Everything an offline ablation needs:
//   {"world": {...}, "train": {...}, "k": 8, "wi_seeds": 20, "seed": 1,
//    "n_k": 25, "lookback_windows": [1, 4], "half_life": 2}
struct ExperimentConfig {
  WorldConfig world;
  AblationConfig ablation;
  PipelineConfig pipeline;
};

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& c);
// "default" or a path to a JSON file.
ExperimentConfig LoadExperimentConfig(const std::string& name_or_path);

}  // namespace mcrank

#endif  // MCRANK_CONFIG_H_
