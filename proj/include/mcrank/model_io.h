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

#ifndef MCRANK_MODEL_IO_H_
#define MCRANK_MODEL_IO_H_

#include <string>

#include "mcrank/gbdt.h"

namespace mcrank {

// Binary .frm layout (little-endian), see docs/model_format.md:
//
//   magic     8 bytes  "MCRKFRM\0"
//   version   u32
//   length    u64      payload byte count
//   payload   length bytes
//   checksum  u64      FNV-1a 64 of the payload
//
// Serialize is canonical: equal models produce identical bytes.
std::string SerializeModel(const Model& model);
// Throws LoadError on bad magic, version mismatch, truncation, checksum
// mismatch or trailing bytes.
Model DeserializeModel(const std::string& bytes);

void SaveModel(const std::string& path, const Model& model);
Model LoadModel(const std::string& path);

// Hex FNV-1a of the serialized bytes.
std::string ModelFingerprint(const Model& model);

}  // namespace mcrank

#endif  // MCRANK_MODEL_IO_H_
