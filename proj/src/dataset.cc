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

#include "mcrank/dataset.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "mcrank/parallel.h"

namespace mcrank {

void Dataset::RebuildGroups() {
  groups.clear();
  size_t begin = 0;
  for (size_t r = 1; r <= rows.size(); ++r) {
    if (r == rows.size() || rows[r].query != rows[begin].query ||
        rows[r].week != rows[begin].week) {
      if (r > begin) groups.push_back({begin, r});
      begin = r;
    }
  }
}

void Dataset::Validate() const {
  const size_t f = schema.size();
  if (features.size() != rows.size() * f) {
    throw InvalidInputError("dataset: feature matrix shape mismatch");
  }
  if (labels.size() != rows.size()) throw InvalidInputError("dataset: label count mismatch");
  if (!funnels.empty() && funnels.size() != rows.size()) {
    throw InvalidInputError("dataset: funnel count mismatch");
  }
  for (size_t c = 0; c < f; ++c) {
    if (schema[c].group != FeatureGroup::kItem) continue;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (IsMissing(features[r * f + c])) {
        throw InvalidInputError("dataset: missing value in item column '" +
                                schema[c].name + "'");
      }
    }
  }
  size_t expect = 0;
  for (const auto& g : groups) {
    if (g.begin != expect || g.end <= g.begin) {
      throw InvalidInputError("dataset: groups do not tile the rows");
    }
    expect = g.end;
  }
  if (expect != rows.size()) throw InvalidInputError("dataset: groups do not tile the rows");
}

Dataset Dataset::WithLabels(const LabelWeights& w) const {
  if (funnels.size() != rows.size()) {
    throw InvalidInputError("dataset: relabeling requires funnel counts");
  }
  Dataset out = *this;
  for (const auto& g : groups) {
    std::vector<double> raw(g.size());
    for (size_t r = g.begin; r < g.end; ++r) raw[r - g.begin] = RawLabel(funnels[r], w);
    const auto norm = NormalizeLabels(raw);
    std::copy(norm.begin(), norm.end(), out.labels.begin() + g.begin);
  }
  return out;
}

Dataset Dataset::SelectColumns(
    const std::function<bool(const FeatureColumn&)>& keep) const {
  std::vector<size_t> kept;
  std::vector<FeatureColumn> cols;
  for (size_t c = 0; c < schema.size(); ++c) {
    if (keep(schema[c])) {
      kept.push_back(c);
      cols.push_back(schema[c]);
    }
  }
  Dataset out;
  out.schema = FeatureSchema(std::move(cols));
  out.rows = rows;
  out.labels = labels;
  out.funnels = funnels;
  out.groups = groups;
  out.features.reserve(rows.size() * kept.size());
  const size_t f = schema.size();
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c : kept) out.features.push_back(features[r * f + c]);
  }
  return out;
}

uint64_t Dataset::Fingerprint() const {
  Fnv1a h;
  h.UpdateU64(schema.Fingerprint());
  for (const auto& r : rows) {
    h.Update(r.query);
    h.Update(r.item);
    h.UpdateU64(static_cast<uint64_t>(r.week));
  }
  for (double v : features) h.UpdateDouble(v);
  for (double v : labels) h.UpdateDouble(v);
  return h.digest();
}

void WriteDataset(std::ostream& out, const Dataset& ds, bool with_labels) {
  out << "query_id\titem_id\tweek";
  if (with_labels) out << "\tlabel";
  for (const auto& c : ds.schema.columns()) out << '\t' << c.name;
  out << '\n';
  const size_t f = ds.schema.size();
  for (size_t r = 0; r < ds.rows.size(); ++r) {
    out << ds.rows[r].query << '\t' << ds.rows[r].item << '\t' << ds.rows[r].week;
    if (with_labels) out << '\t' << FormatDouble(ds.labels[r]);
    for (size_t c = 0; c < f; ++c) {
      const double v = ds.features[r * f + c];
      out << '\t';
      if (IsMissing(v)) {
        out << "NA";
      } else {
        out << FormatDouble(v);
      }
    }
    out << '\n';
  }
}

Dataset ReadDataset(std::istream& in, const FeatureSchema& schema) {
  Dataset ds;
  ds.schema = schema;
  std::string line;
  if (!std::getline(in, line)) throw InvalidInputError("dataset: empty file");
  auto header = SplitTabs(TrimLineEnd(line));
  const size_t f = schema.size();
  if (header.size() != f + 4 || header[0] != "query_id" || header[1] != "item_id" ||
      header[2] != "week" || header[3] != "label") {
    throw InvalidInputError("dataset: header does not match schema");
  }
  for (size_t c = 0; c < f; ++c) {
    if (header[c + 4] != schema[c].name) {
      throw InvalidInputError("dataset: column '" + std::string(header[c + 4]) +
                              "' does not match schema column '" + schema[c].name + "'");
    }
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = TrimLineEnd(line);
    if (view.empty()) continue;
    auto fields = SplitTabs(view);
    if (fields.size() != f + 4) {
      throw InvalidInputError("dataset line " + std::to_string(line_no) +
                              ": wrong field count");
    }
    ds.rows.push_back(RowKey{std::string(fields[0]), std::string(fields[1]),
                             static_cast<int>(ParseInt(fields[2]))});
    ds.labels.push_back(ParseDouble(fields[3]));
    for (size_t c = 0; c < f; ++c) {
      ds.features.push_back(fields[c + 4] == "NA" ? kMissing : ParseDouble(fields[c + 4]));
    }
  }
  ds.RebuildGroups();
  ds.Validate();
  return ds;
}

void SaveDataset(const std::string& path, const Dataset& ds, bool with_labels) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write dataset: " + path);
  WriteDataset(out, ds, with_labels);
  std::ofstream schema_out(path + ".schema");
  if (!schema_out) throw InvalidInputError("cannot write schema: " + path + ".schema");
  WriteSchema(schema_out, ds.schema);
}

Dataset LoadDataset(const std::string& path) {
  std::ifstream schema_in(path + ".schema");
  if (!schema_in) throw InvalidInputError("cannot open schema sidecar: " + path + ".schema");
  const FeatureSchema schema = ReadSchema(schema_in);
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open dataset: " + path);
  return ReadDataset(in, schema);
}

DatasetBuilder::DatasetBuilder(const EventLog& log, const Catalog& catalog,
                               std::vector<std::string> channel_names,
                               DatasetBuildConfig cfg)
    : log_(log), catalog_(catalog), cfg_(std::move(cfg)) {
  cfg_.lookback.Validate();
  schema_ = FeatureSchema::Standard(channel_names, cfg_.lookback);

  by_item_ = log.events;
  std::stable_sort(by_item_.begin(), by_item_.end(),
                   [](const InteractionEvent& a, const InteractionEvent& b) {
                     return a.item < b.item;
                   });
  item_offsets_.assign(log.items.size() + 1, 0);
  for (const auto& e : by_item_) ++item_offsets_[e.item + 1];
  for (size_t i = 1; i < item_offsets_.size(); ++i) item_offsets_[i] += item_offsets_[i - 1];

  by_query_item_ = log.events;
  std::stable_sort(by_query_item_.begin(), by_query_item_.end(),
                   [](const InteractionEvent& a, const InteractionEvent& b) {
                     return std::tie(a.query, a.item) < std::tie(b.query, b.item);
                   });
  funnels_ = ComputeAllFunnels(log);
}

std::span<const InteractionEvent> DatasetBuilder::ItemEvents(uint32_t item) const {
  return {by_item_.data() + item_offsets_[item], item_offsets_[item + 1] - item_offsets_[item]};
}

std::span<const InteractionEvent> DatasetBuilder::QueryItemEvents(uint32_t query,
                                                                  uint32_t item) const {
  auto lo = std::lower_bound(by_query_item_.begin(), by_query_item_.end(),
                             std::make_pair(query, item),
                             [](const InteractionEvent& e, const std::pair<uint32_t, uint32_t>& k) {
                               return std::tie(e.query, e.item) < std::tie(k.first, k.second);
                             });
  auto hi = lo;
  while (hi != by_query_item_.end() && hi->query == query && hi->item == item) ++hi;
  return {by_query_item_.data() + (lo - by_query_item_.begin()),
          static_cast<size_t>(hi - lo)};
}

const FunnelCounts* DatasetBuilder::Funnel(uint32_t query, uint32_t item, int week) const {
  auto it = std::lower_bound(funnels_.begin(), funnels_.end(), std::make_tuple(query, item, week),
                             [](const FunnelCounts& f, const std::tuple<uint32_t, uint32_t, int>& k) {
                               return std::make_tuple(f.query, f.item, f.week) < k;
                             });
  if (it == funnels_.end() || it->query != query || it->item != item || it->week != week) {
    return nullptr;
  }
  return &*it;
}

std::vector<GroupKey> DatasetBuilder::AllGroups(const ChannelListsByWeek& channels) {
  std::vector<GroupKey> out;
  for (const auto& [week, lists] : channels) {
    for (const auto& l : lists) out.push_back(GroupKey{l.query().value(), week});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

struct GroupRows {
  std::vector<RowKey> rows;
  std::vector<double> features;
  std::vector<double> labels;
  std::vector<FunnelCounts> funnels;
};

}  // namespace

Dataset DatasetBuilder::Build(const ChannelListsByWeek& channels,
                              std::span<const GroupKey> groups_in) const {
  std::vector<GroupKey> groups(groups_in.begin(), groups_in.end());
  std::sort(groups.begin(), groups.end(), [](const GroupKey& a, const GroupKey& b) {
    return std::tie(a.week, a.query) < std::tie(b.week, b.query);
  });
  groups.erase(std::unique(groups.begin(), groups.end(),
                           [](const GroupKey& a, const GroupKey& b) {
                             return a.week == b.week && a.query == b.query;
                           }),
               groups.end());

  std::map<GroupKey, std::vector<ChannelList>> lists_by_group;
  for (const auto& [week, lists] : channels) {
    for (const auto& l : lists) lists_by_group[GroupKey{l.query().value(), week}].push_back(l);
  }

  std::vector<CandidatePool> pools(groups.size());
  for (size_t g = 0; g < groups.size(); ++g) {
    auto it = lists_by_group.find(groups[g]);
    if (it == lists_by_group.end()) {
      throw InvalidInputError("no channel lists for query '" + groups[g].query +
                              "' week " + std::to_string(groups[g].week));
    }
    pools[g] = MergePool(it->second, cfg_.truncation);
  }

  // Item aggregates are shared across queries; compute each (item, week) once.
  std::vector<std::pair<uint32_t, int>> item_weeks;
  for (size_t g = 0; g < groups.size(); ++g) {
    for (const auto& c : pools[g].candidates()) {
      if (auto id = log_.items.Find(c.item.value())) item_weeks.emplace_back(*id, groups[g].week);
    }
  }
  std::sort(item_weeks.begin(), item_weeks.end());
  item_weeks.erase(std::unique(item_weeks.begin(), item_weeks.end()), item_weeks.end());
  std::vector<std::map<int, ActivityCounts>> item_activity(item_weeks.size());
  ParallelFor(cfg_.num_threads, item_weeks.size(), [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) {
      item_activity[i] = LookbackAggregates(ItemEvents(item_weeks[i].first),
                                            item_weeks[i].second, cfg_.lookback);
    }
  });
  auto find_item_activity = [&](uint32_t item, int week) -> const std::map<int, ActivityCounts>* {
    auto it = std::lower_bound(item_weeks.begin(), item_weeks.end(), std::make_pair(item, week));
    if (it == item_weeks.end() || *it != std::make_pair(item, week)) return nullptr;
    return &item_activity[it - item_weeks.begin()];
  };

  std::vector<GroupRows> parts(groups.size());
  ParallelFor(cfg_.num_threads, groups.size(), [&](size_t b, size_t e) {
    for (size_t g = b; g < e; ++g) {
      const auto& key = groups[g];
      const auto& pool = pools[g];
      const auto query_id = log_.queries.Find(key.query);
      auto& part = parts[g];
      std::vector<double> raw;
      for (const auto& cand : pool.candidates()) {
        InstanceSources src;
        src.attributes = catalog_.Find(cand.item);
        const auto item_id = log_.items.Find(cand.item.value());
        if (item_id) {
          if (const auto* act = find_item_activity(*item_id, key.week)) src.item_activity = *act;
        }
        std::span<const InteractionEvent> qi_events;
        if (query_id && item_id) qi_events = QueryItemEvents(*query_id, *item_id);
        src.query_item_activity = LookbackAggregates(qi_events, key.week, cfg_.lookback);
        src.engagement =
            EngagementFeatures(qi_events, key.week, cfg_.engagement_weights, cfg_.lookback);
        FeatureVector fv = AssembleInstance(pool, cand.item, key.week, src, schema_, cfg_.lookback);

        FunnelCounts fc;
        if (query_id && item_id) {
          if (const auto* found = Funnel(*query_id, *item_id, key.week)) fc = *found;
          fc.query = *query_id;
          fc.item = *item_id;
        }
        fc.week = key.week;
        part.rows.push_back(RowKey{key.query, cand.item.value(), key.week});
        part.features.insert(part.features.end(), fv.values.begin(), fv.values.end());
        part.funnels.push_back(fc);
        raw.push_back(RawLabel(fc, cfg_.label_weights));
      }
      if (!raw.empty()) part.labels = NormalizeLabels(raw);
    }
  });

  Dataset ds;
  ds.schema = schema_;
  for (auto& part : parts) {
    ds.rows.insert(ds.rows.end(), part.rows.begin(), part.rows.end());
    ds.features.insert(ds.features.end(), part.features.begin(), part.features.end());
    ds.labels.insert(ds.labels.end(), part.labels.begin(), part.labels.end());
    ds.funnels.insert(ds.funnels.end(), part.funnels.begin(), part.funnels.end());
  }
  ds.RebuildGroups();
  ds.Validate();
  return ds;
}

std::map<std::string, double> DatasetBuilder::ItemFeatures(const ItemId& item, int week) const {
  // Assemble against a single-candidate pool and read back the item cells.
  CandidatePool pool(QueryId("_"), {Candidate{item, {}}});
  InstanceSources src;
  src.attributes = catalog_.Find(item);
  if (auto id = log_.items.Find(item.value())) {
    src.item_activity = LookbackAggregates(ItemEvents(*id), week, cfg_.lookback);
  }
  const FeatureVector fv = AssembleInstance(pool, item, week, src, schema_, cfg_.lookback);
  std::map<std::string, double> out;
  for (size_t c = 0; c < schema_.size(); ++c) {
    if (schema_[c].group == FeatureGroup::kItem) out[schema_[c].name] = fv.values[c];
  }
  return out;
}

std::map<std::string, double> DatasetBuilder::EngagementFeatureMap(const std::string& query,
                                                                   const ItemId& item,
                                                                   int week) const {
  std::span<const InteractionEvent> qi_events;
  const auto q = log_.queries.Find(query);
  const auto i = log_.items.Find(item.value());
  if (q && i) qi_events = QueryItemEvents(*q, *i);
  const auto eng = EngagementFeatures(qi_events, week, cfg_.engagement_weights, cfg_.lookback);
  const auto act = LookbackAggregates(qi_events, week, cfg_.lookback);
  std::map<std::string, double> out;
  for (int w : cfg_.lookback.windows) {
    out["qi_engagement_w" + std::to_string(w)] = eng.at(w);
    out["qi_impressions_w" + std::to_string(w)] = static_cast<double>(act.at(w).impressions);
  }
  return out;
}

}  // namespace mcrank
