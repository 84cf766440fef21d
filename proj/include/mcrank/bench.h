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

#ifndef MCRANK_BENCH_H_
#define MCRANK_BENCH_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcrank/scoring.h"

namespace mcrank {

struct WorkloadConfig {
  size_t requests = 10000;
  int channels = 4;  // capped at the model's channel count
  int n_k = 25;
  // 0 draws each request's pool from [n_k, channels * n_k] with overlapping
  // lists; otherwise the lists are disjoint and sized to hit this count.
  int pool_size = 0;
  bool item_features = true;
  bool engagement = true;
  uint64_t seed = 7;
};

// Synthetic requests against `schema`; deterministic given cfg.seed.
std::vector<ScoreRequest> GenerateWorkload(const FeatureSchema& schema, const WorkloadConfig& cfg);

struct LatencyReport {
  std::string mode;
  size_t requests = 0;
  double p50_ms = 0;
  double p95_ms = 0;
  double p99_ms = 0;
  double mean_ms = 0;
  double max_ms = 0;
  std::map<std::string, double> candidates;  // min, p50, p95, max, mean
  std::string hardware;
  // End-to-end only: every response ranking equals the in-process one.
  bool rankings_match = true;

  nlohmann::json ToJson() const;
  std::string ToText() const;
};

// Nearest-rank percentile of unsorted samples.
double Percentile(std::vector<double> samples, double p);

LatencyReport BenchInProcess(const Scorer& scorer, const std::vector<ScoreRequest>& requests);
// Starts a server on a free loopback port and replays the requests over
// HTTP with one keep-alive client.
LatencyReport BenchEndToEnd(const Scorer& scorer, const std::vector<ScoreRequest>& requests);

std::string HardwareNote();

}  // namespace mcrank

#endif  // MCRANK_BENCH_H_
