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

#ifndef MCRANK_TYPES_H_
#define MCRANK_TYPES_H_

#include <compare>
#include <functional>
#include <string>
#include <utility>

#include "mcrank/common.h"

namespace mcrank {

// Opaque string identifiers. Comparison is exact byte equality / ordering.
template <typename Tag>
class StringId {
 public:
  StringId() = default;
  explicit StringId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) throw InvalidInputError("identifier must be non-empty");
  }

  const std::string& value() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const StringId&, const StringId&) = default;
  friend bool operator==(const StringId&, const StringId&) = default;

 private:
  std::string value_;
};

struct QueryTag {};
struct ItemTag {};
using QueryId = StringId<QueryTag>;
using ItemId = StringId<ItemTag>;

class WeekId {
 public:
  constexpr WeekId() = default;
  explicit WeekId(int index) : index_(index) {
    if (index < 0) throw InvalidInputError("week index must be >= 0");
  }
  int index() const { return index_; }
  WeekId Next() const { return WeekId(index_ + 1); }

  friend auto operator<=>(const WeekId&, const WeekId&) = default;
  friend bool operator==(const WeekId&, const WeekId&) = default;

 private:
  int index_ = 0;
};

// Index in [0, K) plus a display name. Identity and ordering use the index.
struct ChannelId {
  int index = 0;
  std::string name;

  friend bool operator==(const ChannelId& a, const ChannelId& b) {
    return a.index == b.index;
  }
  friend auto operator<=>(const ChannelId& a, const ChannelId& b) {
    return a.index <=> b.index;
  }
};

}  // namespace mcrank

template <typename Tag>
struct std::hash<mcrank::StringId<Tag>> {
  size_t operator()(const mcrank::StringId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.value());
  }
};

#endif  // MCRANK_TYPES_H_
