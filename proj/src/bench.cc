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

#include "mcrank/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "mcrank/random.h"
#include "mcrank/server.h"

namespace mcrank {
namespace {

using Clock = std::chrono::steady_clock;

double Millis(Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); }

std::string ItemName(uint64_t i) { return "b" + std::to_string(i); }

LatencyReport Summarize(std::string mode, const std::vector<double>& ms,
                        const std::vector<double>& pool_sizes) {
  LatencyReport r;
  r.mode = std::move(mode);
  r.requests = ms.size();
  r.hardware = HardwareNote();
  if (ms.empty()) return r;
  r.p50_ms = Percentile(ms, 0.50);
  r.p95_ms = Percentile(ms, 0.95);
  r.p99_ms = Percentile(ms, 0.99);
  r.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / ms.size();
  r.max_ms = *std::max_element(ms.begin(), ms.end());
  r.candidates["min"] = *std::min_element(pool_sizes.begin(), pool_sizes.end());
  r.candidates["p50"] = Percentile(pool_sizes, 0.5);
  r.candidates["p95"] = Percentile(pool_sizes, 0.95);
  r.candidates["max"] = *std::max_element(pool_sizes.begin(), pool_sizes.end());
  r.candidates["mean"] =
      std::accumulate(pool_sizes.begin(), pool_sizes.end(), 0.0) / pool_sizes.size();
  return r;
}

}  // namespace

double Percentile(std::vector<double> samples, double p) {
  if (samples.empty()) return 0;
  std::sort(samples.begin(), samples.end());
  const auto rank = static_cast<size_t>(std::ceil(p * static_cast<double>(samples.size())));
  return samples[std::clamp<size_t>(rank, 1, samples.size()) - 1];
}

std::vector<ScoreRequest> GenerateWorkload(const FeatureSchema& schema, const WorkloadConfig& cfg) {
  const auto names = schema.ChannelNames();
  const int k = std::min<int>(cfg.channels, static_cast<int>(names.size()));
  if (k < 1) throw InvalidInputError("workload: model has no channel columns");
  if (cfg.n_k < 1) throw InvalidInputError("workload: n_k must be >= 1");
  std::vector<std::string> item_cols, engagement_cols;
  for (const auto& c : schema.columns()) {
    if (c.group == FeatureGroup::kItem) item_cols.push_back(c.name);
    if (c.group == FeatureGroup::kEngagement) engagement_cols.push_back(c.name);
  }
  Rng rng(cfg.seed);
  std::vector<ScoreRequest> out;
  out.reserve(cfg.requests);
  for (size_t r = 0; r < cfg.requests; ++r) {
    ScoreRequest req;
    req.query = QueryId("bq" + std::to_string(r));
    const uint64_t base = r * 1000;
    std::set<uint64_t> pool;
    for (int c = 0; c < k; ++c) {
      std::vector<uint64_t> picks;
      if (cfg.pool_size > 0) {
        // Disjoint slices of [0, pool_size).
        const int per = (cfg.pool_size + k - 1) / k;
        for (int i = c * per; i < std::min(cfg.pool_size, (c + 1) * per); ++i) picks.push_back(i);
      } else {
        const uint64_t universe = cfg.n_k + rng.Below(static_cast<uint64_t>(cfg.n_k) * (k - 1) + 1);
        std::set<uint64_t> chosen;
        while (chosen.size() < static_cast<size_t>(cfg.n_k)) chosen.insert(rng.Below(universe));
        picks.assign(chosen.begin(), chosen.end());
      }
      std::vector<ScoredItem> entries;
      for (uint64_t p : picks) {
        entries.push_back({ItemId(ItemName(base + p)), std::round(rng.Normal() * 1e4) / 1e4});
        pool.insert(base + p);
      }
      req.lists.emplace_back(ChannelId{c, names[c]}, req.query, std::move(entries));
    }
    for (uint64_t p : pool) {
      const std::string item = ItemName(p);
      if (cfg.item_features) {
        auto& row = req.item_features[item];
        for (const auto& col : item_cols) row[col] = std::round(std::abs(rng.Normal()) * 1e3) / 1e2;
      }
      if (cfg.engagement) {
        auto& row = req.engagement[item];
        for (const auto& col : engagement_cols) {
          row[col] = std::round(std::abs(rng.Normal()) * 1e3) / 1e3;
        }
      }
    }
    out.push_back(std::move(req));
  }
  return out;
}

LatencyReport BenchInProcess(const Scorer& scorer, const std::vector<ScoreRequest>& requests) {
  std::vector<double> ms, sizes;
  ms.reserve(requests.size());
  for (const auto& req : requests) {
    const auto t0 = Clock::now();
    const ScoreResponse resp = scorer.Score(req);
    ms.push_back(Millis(Clock::now() - t0));
    sizes.push_back(static_cast<double>(resp.items.size()));
  }
  return Summarize("in-process", ms, sizes);
}

LatencyReport BenchEndToEnd(const Scorer& scorer, const std::vector<ScoreRequest>& requests) {
  ScoringServer server(scorer);
  const int port = server.Start({"127.0.0.1", 0});
  httplib::Client client("127.0.0.1", port);
  client.set_keep_alive(true);
  std::vector<double> ms, sizes;
  ms.reserve(requests.size());
  bool match = true;
  for (const auto& req : requests) {
    const std::string body = ScoreRequestToJson(req).dump();
    const auto t0 = Clock::now();
    const auto res = client.Post("/v1/score", body, "application/json");
    ms.push_back(Millis(Clock::now() - t0));
    if (!res || res->status != 200) {
      server.Stop();
      throw Error("bench: request failed" +
                  (res ? ": HTTP " + std::to_string(res->status) + " " + res->body : std::string()));
    }
    const auto j = nlohmann::json::parse(res->body);
    const ScoreResponse local = scorer.Score(req);
    const auto& items = j.at("items");
    match = match && items.size() == local.items.size();
    for (size_t i = 0; match && i < items.size(); ++i) {
      match = items[i].at("item").get<std::string>() == local.items[i].item.value() &&
              items[i].at("score").get<double>() == local.items[i].score;
    }
    sizes.push_back(static_cast<double>(items.size()));
  }
  server.Stop();
  auto report = Summarize("end-to-end", ms, sizes);
  report.rankings_match = match;
  return report;
}

std::string HardwareNote() {
  std::string cpu = "unknown cpu";
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  std::ostringstream s;
  s << cpu << ", " << std::thread::hardware_concurrency() << " hardware threads";
#if defined(__VERSION__)
  s << ", " << (
#if defined(__clang__)
      "clang "
#else
      "gcc "
#endif
      ) << __VERSION__;
#endif
  return s.str();
}

nlohmann::json LatencyReport::ToJson() const {
  nlohmann::json j = {{"mode", mode},       {"requests", requests}, {"p50_ms", p50_ms},
                      {"p95_ms", p95_ms},   {"p99_ms", p99_ms},     {"mean_ms", mean_ms},
                      {"max_ms", max_ms},   {"candidates", candidates},
                      {"hardware", hardware}};
  if (mode == "end-to-end") j["rankings_match"] = rankings_match;
  return j;
}

std::string LatencyReport::ToText() const {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3);
  s << mode << ": " << requests << " requests  p50 " << p50_ms << " ms  p95 " << p95_ms
    << " ms  p99 " << p99_ms << " ms  max " << max_ms << " ms\n";
  if (candidates.empty()) return s.str();
  s << "  candidates: min " << candidates.at("min") << "  p50 " << candidates.at("p50")
    << "  p95 " << candidates.at("p95") << "  max " << candidates.at("max") << '\n';
  if (mode == "end-to-end") s << "  rankings match in-process: " << (rankings_match ? "yes" : "no") << '\n';
  s << "  hardware: " << hardware << '\n';
  return s.str();
}

}  // namespace mcrank
