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

#ifndef MCRANK_COMMON_H_
#define MCRANK_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcrank {

// Error hierarchy. Every public operation reports failures by throwing one
// of these; the CLI maps them to a single-line diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

// 64-bit FNV-1a, used for fingerprints and config hashes.
class Fnv1a {
 public:
  void Update(std::string_view bytes);
  void UpdateU64(uint64_t v);
  void UpdateDouble(double v);
  uint64_t digest() const { return state_; }

 private:
  uint64_t state_ = 0xcbf29ce484222325ULL;
};

uint64_t HashString(std::string_view s);
std::string HexDigest(uint64_t v);

// SplitMix64 finalizer. Used to derive independent stream seeds from a master
// seed and a stream key.
uint64_t Mix64(uint64_t x);
uint64_t DeriveSeed(uint64_t seed, uint64_t key);

// Shortest round-trip decimal representation of a double.
std::string FormatDouble(double v);
// Parses a double; accepts "nan"/"inf" spellings only when allow_special.
double ParseDouble(std::string_view s, bool allow_special = false);
int64_t ParseInt(std::string_view s);

std::vector<std::string_view> SplitTabs(std::string_view line);
std::string_view TrimLineEnd(std::string_view line);

}  // namespace mcrank

#endif  // MCRANK_COMMON_H_
