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

#include "mcrank/model_io.h"

#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace mcrank {
namespace {

constexpr char kMagic[8] = {'M', 'C', 'R', 'K', 'F', 'R', 'M', '\0'};

class Writer {
 public:
  void U8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) U8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) U8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void I32(int32_t v) { U32(static_cast<uint32_t>(v)); }
  void F64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    U64(bits);
  }
  void Str(const std::string& s) {
    U32(static_cast<uint32_t>(s.size()));
    out_.append(s);
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, size_t begin, size_t end)
      : bytes_(bytes), pos_(begin), end_(end) {}

  uint8_t U8() {
    Need(1);
    return static_cast<uint8_t>(bytes_[pos_++]);
  }
  uint32_t U32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(U8()) << (8 * i);
    return v;
  }
  uint64_t U64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(U8()) << (8 * i);
    return v;
  }
  int32_t I32() { return static_cast<int32_t>(U32()); }
  double F64() {
    const uint64_t bits = U64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string Str() {
    const uint32_t n = U32();
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  // Element counts are bounded by the remaining bytes so a corrupt count
  // cannot trigger a huge allocation.
  uint32_t Count(size_t min_element_bytes) {
    const uint32_t n = U32();
    if (static_cast<uint64_t>(n) * min_element_bytes > end_ - pos_) {
      throw LoadError("model file: corrupt element count");
    }
    return n;
  }
  bool done() const { return pos_ == end_; }

 private:
  void Need(size_t n) const {
    if (end_ - pos_ < n) throw LoadError("model file: truncated payload");
  }
  const std::string& bytes_;
  size_t pos_;
  size_t end_;
};

void WriteParams(Writer& w, const TrainParams& p) {
  w.I32(p.num_trees);
  w.F64(p.shrinkage);
  w.I32(p.max_depth);
  w.I32(p.min_examples_per_leaf);
  w.F64(p.l2);
  w.I32(p.ndcg_truncation);
  w.F64(p.sigma);
  w.U8(p.oblique ? 1 : 0);
  w.I32(p.oblique_projections);
  w.F64(p.oblique_sparsity);
  w.I32(p.max_thresholds);
  w.U64(p.seed);
}

TrainParams ReadParams(Reader& r) {
  TrainParams p;
  p.num_trees = r.I32();
  p.shrinkage = r.F64();
  p.max_depth = r.I32();
  p.min_examples_per_leaf = r.I32();
  p.l2 = r.F64();
  p.ndcg_truncation = r.I32();
  p.sigma = r.F64();
  p.oblique = r.U8() != 0;
  p.oblique_projections = r.I32();
  p.oblique_sparsity = r.F64();
  p.max_thresholds = r.I32();
  p.seed = r.U64();
  return p;
}

std::string EncodePayload(const Model& m) {
  Writer w;
  w.F64(m.shrinkage);
  w.F64(m.base_score);
  WriteParams(w, m.params);
  w.U32(static_cast<uint32_t>(m.schema.size()));
  for (const auto& c : m.schema.columns()) {
    w.Str(c.name);
    w.U8(static_cast<uint8_t>(c.kind));
    w.U8(static_cast<uint8_t>(c.group));
  }
  w.U32(static_cast<uint32_t>(m.trees.size()));
  for (const auto& t : m.trees) {
    w.U32(static_cast<uint32_t>(t.nodes.size()));
    for (const auto& n : t.nodes) {
      w.U8(static_cast<uint8_t>(n.kind));
      w.U8(n.missing_left ? 1 : 0);
      w.I32(n.feature);
      w.F64(n.threshold);
      w.I32(n.left);
      w.I32(n.right);
      w.F64(n.value);
      w.U32(n.term_begin);
      w.U32(n.term_count);
    }
    w.U32(static_cast<uint32_t>(t.terms.size()));
    for (const auto& term : t.terms) {
      w.I32(term.feature);
      w.F64(term.weight);
    }
  }
  return std::move(w.bytes());
}

void CheckTree(const Tree& t, size_t num_features) {
  if (t.nodes.empty()) throw LoadError("model file: empty tree");
  const auto n = static_cast<int32_t>(t.nodes.size());
  for (int32_t i = 0; i < n; ++i) {
    const auto& node = t.nodes[i];
    if (node.kind == NodeKind::kLeaf) continue;
    if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) {
      throw LoadError("model file: bad child index");
    }
    if (node.kind == NodeKind::kAxis &&
        (node.feature < 0 || static_cast<size_t>(node.feature) >= num_features)) {
      throw LoadError("model file: bad feature index");
    }
    if (node.kind == NodeKind::kOblique) {
      if (node.term_count == 0 ||
          static_cast<uint64_t>(node.term_begin) + node.term_count > t.terms.size()) {
        throw LoadError("model file: bad oblique term range");
      }
    }
  }
  for (const auto& term : t.terms) {
    if (term.feature < 0 || static_cast<size_t>(term.feature) >= num_features) {
      throw LoadError("model file: bad oblique feature index");
    }
  }
}

}  // namespace

std::string SerializeModel(const Model& model) {
  const std::string payload = EncodePayload(model);
  Writer w;
  w.bytes().append(kMagic, sizeof(kMagic));
  w.U32(model.format_version);
  w.U64(payload.size());
  w.bytes().append(payload);
  Fnv1a h;
  h.Update(payload);
  w.U64(h.digest());
  return std::move(w.bytes());
}

Model DeserializeModel(const std::string& bytes) {
  constexpr size_t kHeader = sizeof(kMagic) + 4 + 8;
  if (bytes.size() < kHeader + 8) throw LoadError("model file: truncated header");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw LoadError("model file: bad magic");
  }
  Reader header(bytes, sizeof(kMagic), kHeader);
  const uint32_t version = header.U32();
  if (version != kModelFormatVersion) {
    throw LoadError("model file: format version " + std::to_string(version) +
                    " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  const uint64_t length = header.U64();
  if (length > bytes.size() - kHeader - 8 || kHeader + length + 8 != bytes.size()) {
    throw LoadError("model file: payload length does not match file size");
  }
  Fnv1a h;
  h.Update(std::string_view(bytes).substr(kHeader, length));
  Reader tail(bytes, kHeader + length, bytes.size());
  if (tail.U64() != h.digest()) throw LoadError("model file: checksum mismatch");

  Reader r(bytes, kHeader, kHeader + length);
  Model m;
  m.format_version = version;
  m.shrinkage = r.F64();
  m.base_score = r.F64();
  m.params = ReadParams(r);
  std::vector<FeatureColumn> cols(r.Count(6));
  for (auto& c : cols) {
    c.name = r.Str();
    const uint8_t kind = r.U8();
    const uint8_t group = r.U8();
    if (kind > 1 || group > 2) throw LoadError("model file: bad column metadata");
    c.kind = static_cast<FeatureKind>(kind);
    c.group = static_cast<FeatureGroup>(group);
  }
  try {
    m.schema = FeatureSchema(std::move(cols));
  } catch (const InvalidInputError& e) {
    throw LoadError(std::string("model file: ") + e.what());
  }
  m.trees.resize(r.Count(8));
  for (auto& t : m.trees) {
    t.nodes.resize(r.Count(38));
    for (auto& n : t.nodes) {
      const uint8_t kind = r.U8();
      if (kind > 2) throw LoadError("model file: bad node kind");
      n.kind = static_cast<NodeKind>(kind);
      n.missing_left = r.U8() != 0;
      n.feature = r.I32();
      n.threshold = r.F64();
      n.left = r.I32();
      n.right = r.I32();
      n.value = r.F64();
      n.term_begin = r.U32();
      n.term_count = r.U32();
    }
    t.terms.resize(r.Count(12));
    for (auto& term : t.terms) {
      term.feature = r.I32();
      term.weight = r.F64();
    }
    CheckTree(t, m.schema.size());
  }
  if (!r.done()) throw LoadError("model file: trailing bytes in payload");
  return m;
}

void SaveModel(const std::string& path, const Model& model) {
  const std::string bytes = SerializeModel(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing model file: " + path);
}

Model LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return DeserializeModel(bytes);
}

std::string ModelFingerprint(const Model& model) {
  return HexDigest(HashString(SerializeModel(model)));
}

}  // namespace mcrank
