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

#include "mcrank/labeling.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace mcrank {

std::string_view ActionName(Action a) {
  switch (a) {
    case Action::kImpression: return "impression";
    case Action::kClick: return "click";
    case Action::kAddToCart: return "atc";
    case Action::kPurchase: return "purchase";
  }
  return "impression";
}

Action ParseAction(std::string_view s) {
  if (s == "impression") return Action::kImpression;
  if (s == "click") return Action::kClick;
  if (s == "atc") return Action::kAddToCart;
  if (s == "purchase") return Action::kPurchase;
  throw InvalidInputError("unknown action '" + std::string(s) + "'");
}

uint32_t Vocabulary::Intern(std::string_view s) {
  auto it = index_.find(std::string(s));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<uint32_t>(names_.size());
  names_.emplace_back(s);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<uint32_t> Vocabulary::Find(std::string_view s) const {
  auto it = index_.find(std::string(s));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void EventLog::Add(int64_t timestamp, int week, std::string_view session,
                   std::string_view query, std::string_view item, Action action) {
  if (week < 0) throw InvalidInputError("negative week in event");
  if (timestamp < WeekStart(week) || timestamp >= WeekStart(week + 1)) {
    throw InvalidInputError("timestamp " + std::to_string(timestamp) +
                            " outside week " + std::to_string(week));
  }
  if (session.empty() || query.empty() || item.empty()) {
    throw InvalidInputError("empty identifier in event");
  }
  InteractionEvent e;
  e.timestamp = timestamp;
  e.week = week;
  e.session = sessions.Intern(session);
  e.query = queries.Intern(query);
  e.item = items.Intern(item);
  e.action = action;
  events.push_back(e);
}

EventLog EventLog::Before(int week) const {
  EventLog out;
  out.queries = queries;
  out.items = items;
  out.sessions = sessions;
  for (const auto& e : events) {
    if (e.week < week) out.events.push_back(e);
  }
  return out;
}

EventLog ReadEventLog(std::istream& in) {
  EventLog log;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = TrimLineEnd(line);
    if (view.empty()) continue;
    auto f = SplitTabs(view);
    if (f.size() != 6) {
      throw InvalidInputError("event log line " + std::to_string(line_no) +
                              ": expected 6 tab-separated fields");
    }
    try {
      log.Add(ParseInt(f[0]), static_cast<int>(ParseInt(f[1])), f[2], f[3], f[4],
              ParseAction(f[5]));
    } catch (const InvalidInputError& e) {
      throw InvalidInputError("event log line " + std::to_string(line_no) + ": " +
                              e.what());
    }
  }
  return log;
}

EventLog LoadEventLogFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open event log: " + path);
  return ReadEventLog(in);
}

void WriteEventLog(std::ostream& out, const EventLog& log) {
  for (const auto& e : log.events) {
    out << e.timestamp << '\t' << e.week << '\t' << log.sessions.Name(e.session)
        << '\t' << log.queries.Name(e.query) << '\t' << log.items.Name(e.item)
        << '\t' << ActionName(e.action) << '\n';
  }
}

Action DeepestAction(std::span<const InteractionEvent> events) {
  if (events.empty()) throw InvalidInputError("deepest_action: no events");
  const auto& first = events.front();
  Action deepest = first.action;
  for (const auto& e : events) {
    if (e.session != first.session || e.query != first.query ||
        e.item != first.item) {
      throw InvalidInputError(
          "deepest_action: events span several sessions/queries/items");
    }
    deepest = std::max(deepest, e.action);
  }
  return deepest;
}

void FunnelCounts::AddSession(Action deepest) {
  switch (deepest) {
    case Action::kImpression: ++view_only; break;
    case Action::kClick: ++clicks; break;
    case Action::kAddToCart: ++add_to_carts; break;
    case Action::kPurchase: ++purchases; break;
  }
}

FunnelCounts ComputeFunnelCounts(std::span<const InteractionEvent> events) {
  FunnelCounts counts;
  if (events.empty()) return counts;
  counts.query = events.front().query;
  counts.item = events.front().item;
  counts.week = events.front().week;
  std::map<uint32_t, Action> deepest;
  for (const auto& e : events) {
    if (e.query != counts.query || e.item != counts.item || e.week != counts.week) {
      throw InvalidInputError("funnel_counts: events span several (q,i,w)");
    }
    auto [it, inserted] = deepest.emplace(e.session, e.action);
    if (!inserted) it->second = std::max(it->second, e.action);
  }
  for (const auto& [session, action] : deepest) counts.AddSession(action);
  return counts;
}

std::vector<FunnelCounts> ComputeAllFunnels(const EventLog& log) {
  std::vector<uint32_t> order(log.events.size());
  std::iota(order.begin(), order.end(), 0u);
  const auto& ev = log.events;
  auto key = [&](uint32_t i) {
    return std::make_tuple(ev[i].query, ev[i].item, ev[i].week, ev[i].session);
  };
  std::sort(order.begin(), order.end(),
            [&](uint32_t x, uint32_t y) { return key(x) < key(y); });
  std::vector<FunnelCounts> out;
  size_t i = 0;
  while (i < order.size()) {
    const auto& head = ev[order[i]];
    FunnelCounts fc;
    fc.query = head.query;
    fc.item = head.item;
    fc.week = head.week;
    while (i < order.size() && ev[order[i]].query == fc.query &&
           ev[order[i]].item == fc.item && ev[order[i]].week == fc.week) {
      const uint32_t session = ev[order[i]].session;
      Action deepest = ev[order[i]].action;
      while (i < order.size() && ev[order[i]].query == fc.query &&
             ev[order[i]].item == fc.item && ev[order[i]].week == fc.week &&
             ev[order[i]].session == session) {
        deepest = std::max(deepest, ev[order[i]].action);
        ++i;
      }
      fc.AddSession(deepest);
    }
    out.push_back(fc);
  }
  return out;
}

CorpusStats ComputeCorpusStats(const EventLog& log, int first_week, int end_week) {
  CorpusStats s;
  for (const auto& e : log.events) {
    if (e.week < first_week || e.week >= end_week) continue;
    switch (e.action) {
      case Action::kPurchase: ++s.purchases; break;
      case Action::kAddToCart: ++s.add_to_carts; break;
      case Action::kClick: ++s.clicks; break;
      case Action::kImpression: break;
    }
  }
  return s;
}

double LabelWeights::For(Action deepest) const {
  switch (deepest) {
    case Action::kImpression: return d;
    case Action::kClick: return c;
    case Action::kAddToCart: return b;
    case Action::kPurchase: return a;
  }
  return 0;
}

LabelWeights CalibrateWeights(const CorpusStats& stats) {
  if (stats.add_to_carts <= 0) {
    throw CalibrationError("cannot calibrate label weights: zero add-to-carts in corpus");
  }
  if (stats.clicks <= 0) {
    throw CalibrationError("cannot calibrate label weights: zero clicks in corpus");
  }
  if (stats.purchases < 0) {
    throw CalibrationError("cannot calibrate label weights: negative purchases");
  }
  LabelWeights w;
  w.a = 1.0;
  w.b = static_cast<double>(stats.purchases) / static_cast<double>(stats.add_to_carts);
  w.c = static_cast<double>(stats.purchases) / static_cast<double>(stats.clicks);
  w.d = 0.0;
  w.b = std::min(w.b, w.a);
  w.c = std::min(w.c, w.b);
  return w;
}

double RawLabel(const FunnelCounts& counts, const LabelWeights& w) {
  return w.a * static_cast<double>(counts.purchases) +
         w.b * static_cast<double>(counts.add_to_carts) +
         w.c * static_cast<double>(counts.clicks) +
         w.d * static_cast<double>(counts.view_only);
}

std::vector<double> NormalizeLabels(std::span<const double> raw) {
  if (raw.empty()) throw InvalidInputError("normalize_labels: empty query group");
  double max_label = 0;
  for (double v : raw) {
    if (!(v >= 0)) throw InvalidInputError("normalize_labels: negative raw label");
    max_label = std::max(max_label, v);
  }
  std::vector<double> out(raw.size(), 0.0);
  if (max_label <= 0) return out;
  for (size_t i = 0; i < raw.size(); ++i) out[i] = 4.0 * raw[i] / max_label;
  return out;
}

std::map<ItemId, double> NormalizeLabels(const std::map<ItemId, double>& raw) {
  std::vector<double> values;
  values.reserve(raw.size());
  for (const auto& [item, v] : raw) values.push_back(v);
  const auto norm = NormalizeLabels(values);
  std::map<ItemId, double> out;
  size_t i = 0;
  for (const auto& [item, v] : raw) out.emplace(item, norm[i++]);
  return out;
}

}  // namespace mcrank
