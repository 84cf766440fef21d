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

#ifndef MCRANK_METRICS_H_
#define MCRANK_METRICS_H_

#include <cmath>
#include <span>
#include <vector>

namespace mcrank {

// Exponential gain 2^label - 1 over continuous labels in [0, 4].
inline double Gain(double label) { return std::exp2(label) - 1.0; }
// 1 / log2(rank + 1) with rank 1-based, i.e. 1 / log2(position + 2).
inline double Discount(int position) { return 1.0 / std::log2(position + 2.0); }

// Item indices sorted by score descending, ties by index ascending.
std::vector<int> OrderByScore(std::span<const double> scores);

// DCG of the first k positions of `order`.
double DcgAtK(std::span<const double> labels, std::span<const int> order, int k);
// DCG of the label-descending order.
double IdealDcgAtK(std::span<const double> labels, int k);

// DCG@k / IDCG@k of `order`, a permutation of label indices; 0 when IDCG is
// 0. A k past the list length means the untruncated metric.
double NdcgAtK(std::span<const double> labels, std::span<const int> order, int k);

}  // namespace mcrank

#endif  // MCRANK_METRICS_H_
