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

#ifndef MCRANK_RANDOM_H_
#define MCRANK_RANDOM_H_

#include <cstdint>

namespace mcrank {

// xoshiro256** seeded by four SplitMix64 outputs of `seed`. The stream is
// fully specified here so seeded experiments are reproducible across
// compilers and standard libraries (std::*_distribution is not).
//
//   NextU64()    raw generator output
//   NextDouble() (NextU64() >> 11) * 2^-53, uniform in [0, 1)
//   Normal()     Box-Muller on two NextDouble() draws, no caching
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t NextU64();
  double NextDouble();
  // Uniform integer in [0, n). n must be positive.
  uint64_t Below(uint64_t n);
  double Normal();
  bool Bernoulli(double p) { return NextDouble() < p; }
  // Knuth's multiplication method below mean 30, rounded normal above.
  int Poisson(double mean);

 private:
  uint64_t s_[4];
};

}  // namespace mcrank

#endif  // MCRANK_RANDOM_H_
