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

#include "mcrank/scoring.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>

#include "mcrank/model_io.h"

namespace mcrank {

const FeatureMap* FeatureTable::Find(const std::string& key) const {
  const auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

FeatureTable ReadFeatureTable(std::istream& in, int key_columns) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInputError("feature table: missing header");
  const auto header = SplitTabs(TrimLineEnd(line));
  if (header.size() < static_cast<size_t>(key_columns)) {
    throw InvalidInputError("feature table: header has too few columns");
  }
  std::vector<std::string> cols(header.begin() + key_columns, header.end());
  FeatureTable table;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = TrimLineEnd(line);
    if (trimmed.empty()) continue;
    const auto f = SplitTabs(trimmed);
    if (f.size() != header.size()) {
      throw InvalidInputError("feature table line " + std::to_string(line_no) +
                              ": expected " + std::to_string(header.size()) + " fields");
    }
    std::string key(f[0]);
    for (int k = 1; k < key_columns; ++k) key += '\t' + std::string(f[k]);
    FeatureMap row;
    for (size_t c = 0; c < cols.size(); ++c) {
      const auto v = f[key_columns + c];
      row[cols[c]] = v == "NA" ? kMissing : ParseDouble(v);
    }
    table.Put(std::move(key), std::move(row));
  }
  return table;
}

FeatureTable LoadFeatureTable(const std::string& path, int key_columns) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open feature table: " + path);
  return ReadFeatureTable(in, key_columns);
}

void WriteFeatureTable(std::ostream& out, const FeatureTable& table,
                       const std::vector<std::string>& key_names) {
  std::vector<std::string> cols;
  if (!table.rows().empty()) {
    for (const auto& [name, v] : table.rows().begin()->second) cols.push_back(name);
  }
  for (size_t k = 0; k < key_names.size(); ++k) out << (k ? "\t" : "") << key_names[k];
  for (const auto& c : cols) out << '\t' << c;
  out << '\n';
  for (const auto& [key, row] : table.rows()) {
    out << key;
    for (const auto& c : cols) {
      const auto it = row.find(c);
      if (it == row.end()) throw InvalidInputError("feature table: ragged row " + key);
      out << '\t' << (IsMissing(it->second) ? std::string("NA") : FormatDouble(it->second));
    }
    out << '\n';
  }
}

nlohmann::json ScoreResponse::ToJson() const {
  nlohmann::json items_json = nlohmann::json::array();
  for (const auto& c : items) {
    items_json.push_back({{"item", c.item.value()}, {"score", c.score}, {"channels", c.channels}});
  }
  return {{"query", query.value()}, {"items", std::move(items_json)}, {"latency_us", latency_us}};
}

namespace {

const nlohmann::json& Field(const nlohmann::json& obj, const char* name) {
  const auto it = obj.find(name);
  if (it == obj.end()) throw InvalidInputError(std::string("request: missing field '") + name + "'");
  return *it;
}

std::string StringField(const nlohmann::json& obj, const char* name) {
  const auto& v = Field(obj, name);
  if (!v.is_string()) throw InvalidInputError(std::string("request: '") + name + "' must be a string");
  return v.get<std::string>();
}

std::map<std::string, FeatureMap> FeatureMaps(const nlohmann::json& body, const char* name) {
  std::map<std::string, FeatureMap> out;
  const auto it = body.find(name);
  if (it == body.end() || it->is_null()) return out;
  if (!it->is_object()) throw InvalidInputError(std::string("request: '") + name + "' must be an object");
  for (const auto& [item, cols] : it->items()) {
    if (!cols.is_object()) throw InvalidInputError("request: feature rows must be objects");
    auto& row = out[item];
    for (const auto& [col, v] : cols.items()) {
      if (v.is_null()) {
        row[col] = kMissing;
      } else if (v.is_number()) {
        row[col] = v.get<double>();
      } else {
        throw InvalidInputError("request: feature '" + col + "' must be a number or null");
      }
    }
  }
  return out;
}

}  // namespace

ScoreRequest ParseScoreRequest(const nlohmann::json& body,
                               const std::vector<std::string>& channel_names) {
  if (!body.is_object()) throw InvalidInputError("request: body must be an object");
  ScoreRequest req;
  req.query = QueryId(StringField(body, "query"));
  const auto& channels = Field(body, "channels");
  if (!channels.is_array()) throw InvalidInputError("request: 'channels' must be an array");
  size_t non_empty = 0;
  for (const auto& ch : channels) {
    if (!ch.is_object()) throw InvalidInputError("request: channel entries must be objects");
    const std::string name = StringField(ch, "channel");
    const auto pos = std::find(channel_names.begin(), channel_names.end(), name);
    if (pos == channel_names.end()) throw InvalidInputError("request: unknown channel '" + name + "'");
    const auto& entries = Field(ch, "entries");
    if (!entries.is_array()) throw InvalidInputError("request: 'entries' must be an array");
    std::vector<ScoredItem> items;
    items.reserve(entries.size());
    for (const auto& e : entries) {
      if (!e.is_object()) throw InvalidInputError("request: entries must be objects");
      const auto& s = Field(e, "score");
      if (!s.is_number()) throw InvalidInputError("request: 'score' must be a number");
      items.push_back({ItemId(StringField(e, "item")), s.get<double>()});
    }
    non_empty += !items.empty();
    req.lists.emplace_back(ChannelId{static_cast<int>(pos - channel_names.begin()), name},
                           req.query, std::move(items));
  }
  if (non_empty == 0) throw InvalidInputError("request: needs at least one non-empty channel list");
  req.engagement = FeatureMaps(body, "engagement");
  req.item_features = FeatureMaps(body, "item_features");
  return req;
}

nlohmann::json ScoreRequestToJson(const ScoreRequest& req) {
  nlohmann::json channels = nlohmann::json::array();
  for (const auto& l : req.lists) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : l.entries()) entries.push_back({{"item", e.item.value()}, {"score", e.score}});
    channels.push_back({{"channel", l.channel().name}, {"entries", std::move(entries)}});
  }
  nlohmann::json j = {{"query", req.query.value()}, {"channels", std::move(channels)}};
  const auto maps = [](const std::map<std::string, FeatureMap>& m) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [item, row] : m) {
      for (const auto& [col, v] : row) {
        out[item][col] = IsMissing(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
      }
    }
    return out;
  };
  if (!req.engagement.empty()) j["engagement"] = maps(req.engagement);
  if (!req.item_features.empty()) j["item_features"] = maps(req.item_features);
  return j;
}

Scorer::Scorer(std::shared_ptr<const Model> model, ScorerConfig cfg,
               std::shared_ptr<const FeatureTable> item_table,
               std::shared_ptr<const FeatureTable> engagement_table)
    : cfg_(std::move(cfg)),
      item_table_(std::move(item_table)),
      engagement_table_(std::move(engagement_table)) {
  if (cfg_.pool_cap < 1) throw InvalidInputError("scorer: pool cap must be >= 1");
  SwapModel(std::move(model));
}

std::shared_ptr<const Model> Scorer::model() const {
  std::lock_guard<std::mutex> lock(mu_);
  return model_;
}

void Scorer::SwapModel(std::shared_ptr<const Model> model) {
  if (!model) throw InvalidInputError("scorer: null model");
  std::string fp = ModelFingerprint(*model);
  std::lock_guard<std::mutex> lock(mu_);
  model_ = std::move(model);
  fingerprint_ = std::move(fp);
}

std::vector<std::string> Scorer::channel_names() const { return model()->schema.ChannelNames(); }

std::string Scorer::fingerprint() const {
  std::lock_guard<std::mutex> lock(mu_);
  return fingerprint_;
}

ScoreResponse Scorer::Score(const ScoreRequest& req) const {
  const auto start = std::chrono::steady_clock::now();
  const std::shared_ptr<const Model> model = this->model();
  const FeatureSchema& schema = model->schema;

  const CandidatePool pool = MergePool(req.lists, cfg_.truncation);
  if (pool.size() > cfg_.pool_cap) {
    throw PoolTooLargeError("pool of " + std::to_string(pool.size()) +
                            " candidates exceeds the cap of " + std::to_string(cfg_.pool_cap));
  }

  std::vector<std::pair<const std::string*, size_t>> item_cols, engagement_cols;
  for (size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].group == FeatureGroup::kItem) item_cols.emplace_back(&schema[c].name, c);
    if (schema[c].group == FeatureGroup::kEngagement) {
      engagement_cols.emplace_back(&schema[c].name, c);
    }
  }
  const auto fill = [](const FeatureMap* row,
                       const std::vector<std::pair<const std::string*, size_t>>& cols,
                       std::vector<double>& x) {
    if (row == nullptr) return;
    for (const auto& [name, c] : cols) {
      const auto it = row->find(*name);
      if (it != row->end()) x[c] = it->second;
    }
  };

  ScoreResponse resp;
  resp.query = req.query;
  resp.items.reserve(pool.size());
  std::vector<double> x(schema.size());
  for (const auto& cand : pool.candidates()) {
    std::fill(x.begin(), x.end(), kMissing);
    FillChannelCells(cand, schema, x);
    const std::string& item = cand.item.value();
    const auto itf = req.item_features.find(item);
    fill(itf != req.item_features.end() ? &itf->second
                                        : (item_table_ ? item_table_->Find(item) : nullptr),
         item_cols, x);
    const auto eng = req.engagement.find(item);
    fill(eng != req.engagement.end()
             ? &eng->second
             : (engagement_table_ ? engagement_table_->Find(EngagementKey(req.query.value(), item))
                                  : nullptr),
         engagement_cols, x);
    ScoredCandidate sc;
    sc.item = cand.item;
    sc.score = model->PredictRaw(x);
    for (const auto& h : cand.hits) sc.channels.push_back(h.channel.name);
    resp.items.push_back(std::move(sc));
  }
  // Pool order is ItemId ascending, so a stable sort breaks ties by ItemId.
  std::stable_sort(resp.items.begin(), resp.items.end(),
                   [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.score > b.score; });
  resp.latency_us = std::chrono::duration_cast<std::chrono::microseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return resp;
}

}  // namespace mcrank
