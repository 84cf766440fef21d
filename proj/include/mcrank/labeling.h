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

#ifndef MCRANK_LABELING_H_
#define MCRANK_LABELING_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mcrank/types.h"

namespace mcrank {

// Ordered by funnel depth.
enum class Action : uint8_t {
  kImpression = 0,
  kClick = 1,
  kAddToCart = 2,
  kPurchase = 3,
};

std::string_view ActionName(Action a);
Action ParseAction(std::string_view s);

inline constexpr int64_t kWeekSeconds = 7 * 24 * 3600;
// Start of week 0 (2024-01-01T00:00:00Z).
inline constexpr int64_t kLogEpoch = 1704067200;
inline int64_t WeekStart(int week) { return kLogEpoch + kWeekSeconds * week; }

// String interning for the high-volume event log.
class Vocabulary {
 public:
  uint32_t Intern(std::string_view s);
  std::optional<uint32_t> Find(std::string_view s) const;
  const std::string& Name(uint32_t id) const { return names_[id]; }
  size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, uint32_t> index_;
};

struct InteractionEvent {
  int64_t timestamp = 0;
  uint32_t query = 0;
  uint32_t item = 0;
  uint32_t session = 0;
  int32_t week = 0;
  Action action = Action::kImpression;
};

struct EventLog {
  Vocabulary queries;
  Vocabulary items;
  Vocabulary sessions;
  std::vector<InteractionEvent> events;

  // Throws InvalidInputError when the timestamp falls outside the week.
  void Add(int64_t timestamp, int week, std::string_view session,
           std::string_view query, std::string_view item, Action action);
  // Copy holding only events with week < `week`; vocabularies are kept.
  EventLog Before(int week) const;
};

// Line format: timestamp<TAB>week<TAB>session_id<TAB>query_id<TAB>item_id<TAB>action
EventLog ReadEventLog(std::istream& in);
EventLog LoadEventLogFile(const std::string& path);
void WriteEventLog(std::ostream& out, const EventLog& log);

// Deepest action of one session's events for one (query, item).
Action DeepestAction(std::span<const InteractionEvent> events);

struct FunnelCounts {
  uint32_t query = 0;
  uint32_t item = 0;
  int week = 0;
  int64_t view_only = 0;    // V
  int64_t clicks = 0;       // C
  int64_t add_to_carts = 0; // A
  int64_t purchases = 0;    // P

  int64_t sessions() const { return view_only + clicks + add_to_carts + purchases; }
  void AddSession(Action deepest);
};

// Groups events of one (query, item, week) by session and counts each
// session once under its deepest action.
FunnelCounts ComputeFunnelCounts(std::span<const InteractionEvent> events);

// Funnel counts for every (query, item, week) present in the log, sorted by
// (query, item, week).
std::vector<FunnelCounts> ComputeAllFunnels(const EventLog& log);

struct CorpusStats {
  int64_t purchases = 0;
  int64_t add_to_carts = 0;
  int64_t clicks = 0;
};

// Event totals over weeks in [first_week, end_week).
CorpusStats ComputeCorpusStats(const EventLog& log, int first_week, int end_week);

struct LabelWeights {
  double a = 1;  // purchase
  double b = 0;  // add-to-cart
  double c = 0;  // click
  double d = 0;  // view-only

  bool IsOrdered() const { return a >= b && b >= c && c >= d && d >= 0; }
  double For(Action deepest) const;

  static LabelWeights Heuristic() { return {4, 3, 2, 0}; }
  static LabelWeights PurchaseOnly() { return {1, 0, 0, 0}; }

  friend bool operator==(const LabelWeights&, const LabelWeights&) = default;
};

// (1, P/A, P/C, 0), with b clamped to <= 1 and c to <= b. Throws
// CalibrationError when A or C is zero.
LabelWeights CalibrateWeights(const CorpusStats& stats);

double RawLabel(const FunnelCounts& counts, const LabelWeights& w);

// 4 * L / max(L), all zeros when max is 0. Throws InvalidInputError on an
// empty input or a negative label.
std::vector<double> NormalizeLabels(std::span<const double> raw);
std::map<ItemId, double> NormalizeLabels(const std::map<ItemId, double>& raw);

}  // namespace mcrank

#endif  // MCRANK_LABELING_H_
