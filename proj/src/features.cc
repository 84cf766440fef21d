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

#include "mcrank/features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <tuple>

namespace mcrank {

std::string_view FeatureKindName(FeatureKind k) {
  return k == FeatureKind::kNumeric ? "numeric" : "categorical";
}

std::string_view FeatureGroupName(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::kItem: return "item";
    case FeatureGroup::kChannel: return "channel";
    case FeatureGroup::kEngagement: return "engagement";
  }
  return "item";
}

void LookbackConfig::Validate() const {
  if (windows.empty()) throw InvalidInputError("lookback: no windows");
  for (size_t i = 0; i < windows.size(); ++i) {
    if (windows[i] < 1) throw InvalidInputError("lookback: window must be >= 1");
    if (i > 0 && windows[i] <= windows[i - 1]) {
      throw InvalidInputError("lookback: windows must be strictly increasing");
    }
  }
  if (!(decay_half_life > 0)) {
    throw InvalidInputError("lookback: decay half-life must be positive");
  }
}

FeatureSchema::FeatureSchema(std::vector<FeatureColumn> columns)
    : columns_(std::move(columns)) {
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (!index_.emplace(columns_[i].name, static_cast<int>(i)).second) {
      throw InvalidInputError("duplicate feature column '" + columns_[i].name + "'");
    }
  }
}

std::string ChannelScoreColumn(std::string_view channel) {
  return "ch." + std::string(channel) + ".score";
}

std::string ChannelRankColumn(std::string_view channel) {
  return "ch." + std::string(channel) + ".rank";
}

namespace {

std::string Windowed(std::string_view base, int window) {
  return std::string(base) + "_w" + std::to_string(window);
}

}  // namespace

FeatureSchema FeatureSchema::Standard(std::span<const std::string> channel_names,
                                      const LookbackConfig& lookback) {
  lookback.Validate();
  using K = FeatureKind;
  using G = FeatureGroup;
  std::vector<FeatureColumn> cols;
  cols.push_back({"price", K::kNumeric, G::kItem});
  cols.push_back({"category", K::kCategorical, G::kItem});
  cols.push_back({"item_age_weeks", K::kNumeric, G::kItem});
  for (int w : lookback.windows) {
    cols.push_back({Windowed("item_impressions", w), K::kNumeric, G::kItem});
    cols.push_back({Windowed("item_clicks", w), K::kNumeric, G::kItem});
    cols.push_back({Windowed("item_atcs", w), K::kNumeric, G::kItem});
    cols.push_back({Windowed("item_purchases", w), K::kNumeric, G::kItem});
  }
  if (lookback.windows.size() >= 2) {
    cols.push_back({"item_click_velocity", K::kNumeric, G::kItem});
    cols.push_back({"item_purchase_velocity", K::kNumeric, G::kItem});
  }
  for (const auto& ch : channel_names) {
    cols.push_back({ChannelScoreColumn(ch), K::kNumeric, G::kChannel});
    cols.push_back({ChannelRankColumn(ch), K::kNumeric, G::kChannel});
  }
  cols.push_back({"channel_hits", K::kNumeric, G::kChannel});
  for (int w : lookback.windows) {
    cols.push_back({Windowed("qi_engagement", w), K::kNumeric, G::kEngagement});
    cols.push_back({Windowed("qi_impressions", w), K::kNumeric, G::kEngagement});
  }
  return FeatureSchema(std::move(cols));
}

int FeatureSchema::IndexOf(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

std::vector<std::string> FeatureSchema::ChannelNames() const {
  std::vector<std::string> out;
  for (const auto& c : columns_) {
    const std::string_view n = c.name;
    if (n.size() > 9 && n.substr(0, 3) == "ch." && n.substr(n.size() - 6) == ".score") {
      out.emplace_back(n.substr(3, n.size() - 9));
    }
  }
  return out;
}

uint64_t FeatureSchema::Fingerprint() const {
  Fnv1a h;
  for (const auto& c : columns_) {
    h.Update(c.name);
    h.UpdateU64(static_cast<uint64_t>(c.kind) << 8 | static_cast<uint64_t>(c.group));
  }
  return h.digest();
}

void WriteSchema(std::ostream& out, const FeatureSchema& schema) {
  for (const auto& c : schema.columns()) {
    out << c.name << '\t' << FeatureKindName(c.kind) << '\t'
        << FeatureGroupName(c.group) << '\n';
  }
}

FeatureSchema ReadSchema(std::istream& in) {
  std::vector<FeatureColumn> cols;
  std::string line;
  while (std::getline(in, line)) {
    auto view = TrimLineEnd(line);
    if (view.empty()) continue;
    auto f = SplitTabs(view);
    if (f.size() != 3) throw InvalidInputError("schema: expected name, kind, group");
    FeatureColumn c;
    c.name = std::string(f[0]);
    if (f[1] == "numeric") {
      c.kind = FeatureKind::kNumeric;
    } else if (f[1] == "categorical") {
      c.kind = FeatureKind::kCategorical;
    } else {
      throw InvalidInputError("schema: unknown kind '" + std::string(f[1]) + "'");
    }
    if (f[2] == "item") {
      c.group = FeatureGroup::kItem;
    } else if (f[2] == "channel") {
      c.group = FeatureGroup::kChannel;
    } else if (f[2] == "engagement") {
      c.group = FeatureGroup::kEngagement;
    } else {
      throw InvalidInputError("schema: unknown group '" + std::string(f[2]) + "'");
    }
    cols.push_back(std::move(c));
  }
  return FeatureSchema(std::move(cols));
}

std::map<int, ActivityCounts> LookbackAggregates(
    std::span<const InteractionEvent> events, int as_of, const LookbackConfig& cfg) {
  std::map<int, ActivityCounts> out;
  for (int w : cfg.windows) out[w] = ActivityCounts{};
  for (const auto& e : events) {
    if (e.week >= as_of) continue;
    const int age = as_of - e.week;  // >= 1
    for (int w : cfg.windows) {
      if (age > w) continue;
      auto& c = out[w];
      switch (e.action) {
        case Action::kImpression: ++c.impressions; break;
        case Action::kClick: ++c.clicks; break;
        case Action::kAddToCart: ++c.add_to_carts; break;
        case Action::kPurchase: ++c.purchases; break;
      }
    }
  }
  return out;
}

double Velocity(double short_count, double long_count, double short_len,
                double long_len) {
  if (!(short_len > 0) || !(long_len > 0)) {
    throw InvalidInputError("velocity: window lengths must be positive");
  }
  return (short_count / short_len) / (long_count / long_len + kVelocityEpsilon);
}

std::map<int, double> EngagementFeatures(std::span<const InteractionEvent> events,
                                         int as_of, const LabelWeights& weights,
                                         const LookbackConfig& cfg) {
  // Deepest action per (week, session).
  std::map<std::pair<int, uint32_t>, Action> sessions;
  for (const auto& e : events) {
    if (e.week >= as_of) continue;
    auto [it, inserted] = sessions.emplace(std::make_pair(e.week, e.session), e.action);
    if (!inserted) it->second = std::max(it->second, e.action);
  }
  std::map<int, double> out;
  for (int w : cfg.windows) out[w] = 0.0;
  for (const auto& [key, deepest] : sessions) {
    const int age = as_of - key.first;
    const double v =
        weights.For(deepest) * std::exp2(-static_cast<double>(age) / cfg.decay_half_life);
    for (int w : cfg.windows) {
      if (age <= w) out[w] += v;
    }
  }
  return out;
}

void Catalog::Add(ItemAttributes attrs) {
  if (attrs.id.empty()) throw InvalidInputError("catalog: empty item id");
  if (attrs.category < 0) throw InvalidInputError("catalog: negative category");
  if (!index_.emplace(attrs.id, items_.size()).second) {
    throw InvalidInputError("catalog: duplicate item '" + attrs.id.value() + "'");
  }
  items_.push_back(std::move(attrs));
}

const ItemAttributes* Catalog::Find(const ItemId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &items_[it->second];
}

Catalog ReadCatalog(std::istream& in) {
  Catalog catalog;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = TrimLineEnd(line);
    if (view.empty()) continue;
    auto f = SplitTabs(view);
    if (f.size() != 4) {
      throw InvalidInputError("catalog line " + std::to_string(line_no) +
                              ": expected 4 fields");
    }
    ItemAttributes a;
    a.id = ItemId(std::string(f[0]));
    a.price = ParseDouble(f[1]);
    a.category = static_cast<int>(ParseInt(f[2]));
    a.launch_week = static_cast<int>(ParseInt(f[3]));
    catalog.Add(std::move(a));
  }
  return catalog;
}

Catalog LoadCatalogFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open catalog: " + path);
  return ReadCatalog(in);
}

void WriteCatalog(std::ostream& out, const Catalog& catalog) {
  for (const auto& a : catalog.items()) {
    out << a.id.value() << '\t' << FormatDouble(a.price) << '\t' << a.category
        << '\t' << a.launch_week << '\n';
  }
}

void FillChannelCells(const Candidate& candidate, const FeatureSchema& schema,
                      std::span<double> out) {
  int hits = 0;
  for (size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].group == FeatureGroup::kChannel) out[i] = kMissing;
  }
  for (const auto& hit : candidate.hits) {
    const int s = schema.IndexOf(ChannelScoreColumn(hit.channel.name));
    const int r = schema.IndexOf(ChannelRankColumn(hit.channel.name));
    if (s < 0 && r < 0) continue;
    if (s >= 0) out[s] = hit.score;
    if (r >= 0) out[r] = hit.rank;
    ++hits;
  }
  const int h = schema.IndexOf("channel_hits");
  if (h >= 0) out[h] = hits;
}

namespace {

int RequireColumn(const FeatureSchema& schema, const std::string& name) {
  const int i = schema.IndexOf(name);
  if (i < 0) throw InvalidInputError("schema lacks column '" + name + "'");
  return i;
}

}  // namespace

FeatureVector AssembleInstance(const CandidatePool& pool, const ItemId& item,
                               int week, const InstanceSources& sources,
                               const FeatureSchema& schema,
                               const LookbackConfig& lookback) {
  const Candidate* cand = pool.Find(item);
  if (cand == nullptr) {
    throw InvalidInputError("assemble_instance: item '" + item.value() +
                            "' is not in the candidate pool");
  }
  if (sources.attributes == nullptr) {
    throw InvalidInputError("assemble_instance: no catalog attributes for '" +
                            item.value() + "'");
  }
  FeatureVector fv;
  fv.values.assign(schema.size(), kMissing);
  auto& v = fv.values;
  const auto& attrs = *sources.attributes;
  v[RequireColumn(schema, "price")] = attrs.price;
  v[RequireColumn(schema, "category")] = CategoryCode(attrs.category);
  v[RequireColumn(schema, "item_age_weeks")] = week - attrs.launch_week;
  for (int w : lookback.windows) {
    auto it = sources.item_activity.find(w);
    const ActivityCounts c = it == sources.item_activity.end() ? ActivityCounts{} : it->second;
    v[RequireColumn(schema, Windowed("item_impressions", w))] = c.impressions;
    v[RequireColumn(schema, Windowed("item_clicks", w))] = c.clicks;
    v[RequireColumn(schema, Windowed("item_atcs", w))] = c.add_to_carts;
    v[RequireColumn(schema, Windowed("item_purchases", w))] = c.purchases;
  }
  if (lookback.windows.size() >= 2) {
    const int short_w = lookback.windows.front();
    const int long_w = lookback.windows.back();
    auto get = [&](int w) {
      auto it = sources.item_activity.find(w);
      return it == sources.item_activity.end() ? ActivityCounts{} : it->second;
    };
    const ActivityCounts s = get(short_w);
    const ActivityCounts l = get(long_w);
    v[RequireColumn(schema, "item_click_velocity")] =
        Velocity(s.clicks, l.clicks, short_w, long_w);
    v[RequireColumn(schema, "item_purchase_velocity")] =
        Velocity(s.purchases, l.purchases, short_w, long_w);
  }
  FillChannelCells(*cand, schema, v);
  for (int w : lookback.windows) {
    const int e = RequireColumn(schema, Windowed("qi_engagement", w));
    const int imp = RequireColumn(schema, Windowed("qi_impressions", w));
    if (sources.engagement) {
      auto it = sources.engagement->find(w);
      v[e] = it == sources.engagement->end() ? 0.0 : it->second;
    }
    if (sources.query_item_activity) {
      auto it = sources.query_item_activity->find(w);
      v[imp] = it == sources.query_item_activity->end() ? 0.0
                                                         : it->second.impressions;
    }
  }
  return fv;
}

}  // namespace mcrank
