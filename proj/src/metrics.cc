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

#include "mcrank/metrics.h"

#include <algorithm>
#include <functional>
#include <numeric>

#include "mcrank/common.h"

namespace mcrank {

std::vector<int> OrderByScore(std::span<const double> scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return order;
}

double DcgAtK(std::span<const double> labels, std::span<const int> order, int k) {
  const size_t depth = std::min<size_t>(std::max(k, 0), order.size());
  double dcg = 0;
  for (size_t p = 0; p < depth; ++p) dcg += Gain(labels[order[p]]) * Discount(static_cast<int>(p));
  return dcg;
}

double IdealDcgAtK(std::span<const double> labels, int k) {
  std::vector<double> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const size_t depth = std::min<size_t>(std::max(k, 0), sorted.size());
  double dcg = 0;
  for (size_t p = 0; p < depth; ++p) dcg += Gain(sorted[p]) * Discount(static_cast<int>(p));
  return dcg;
}

double NdcgAtK(std::span<const double> labels, std::span<const int> order, int k) {
  if (order.size() != labels.size()) {
    throw InvalidInputError("ndcg: order is not a permutation of the labels");
  }
  const double idcg = IdealDcgAtK(labels, k);
  if (idcg <= 0) return 0.0;
  return DcgAtK(labels, order, k) / idcg;
}

}  // namespace mcrank
