// Copyright 2026 The Diachron Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Binary embedding file:
//
//   "DIACHRON-EMB v1\n"                      16 bytes
//   u8 resolution, i32 start year, i32 end year
//   u64 |V|, u32 d
//   |V| x (u32 byte length, token bytes, u64 frequency)
//   input matrix  |V| x d float32, row-major
//   output matrix |V| x d float32, row-major
//   u64 FNV-1a checksum of every preceding byte
//
// All integers and floats are little-endian.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "diachron/corpus.hpp"
#include "diachron/error.hpp"
#include "diachron/hash.hpp"
#include "diachron/sgns.hpp"

namespace diachron {

inline constexpr std::string_view kEmbeddingMagic = "DIACHRON-EMB v1\n";
inline constexpr std::string_view kEmbeddingExtension = ".emb";

namespace detail {

class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.append(s); }
  template <std::unsigned_integral U>
  void uint(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buf_.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
    }
  }
  void i32(std::int32_t v) { uint(static_cast<std::uint32_t>(v)); }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  const std::string& buffer() const noexcept { return buf_; }
  std::string& buffer() noexcept { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  std::string_view bytes(std::size_t n) {
    require(n);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  template <std::unsigned_integral U>
  U uint() {
    require(sizeof(U));
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return value;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(uint<std::uint32_t>()); }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }

 private:
  void require(std::size_t n) const {
    if (remaining() < n) {
      throw CorruptFileError("corrupt embedding file: truncated (expected at least " +
                             std::to_string(pos_ + n) + " bytes, actual " +
                             std::to_string(data_.size()) + ")");
    }
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_embedding(const EmbeddingSpace& space) {
  const std::size_t v = space.vocab.size();
  const std::size_t d = space.dimension;
  if (space.input.size() != v * d || space.output.size() != v * d) {
    throw Error("embedding matrices do not match |V| x d");
  }
  detail::ByteWriter w;
  w.bytes(kEmbeddingMagic);
  w.uint(static_cast<std::uint8_t>(space.slice.resolution));
  w.i32(space.slice.start_year);
  w.i32(space.slice.end_year);
  w.uint(static_cast<std::uint64_t>(v));
  w.uint(static_cast<std::uint32_t>(d));
  for (const auto& e : space.vocab.entries()) {
    w.uint(static_cast<std::uint32_t>(e.token.size()));
    w.bytes(e.token);
    w.uint(e.frequency);
  }
  w.buffer().reserve(w.buffer().size() + 8 * v * d + 8);
  for (float x : space.input) w.f32(x);
  for (float x : space.output) w.f32(x);
  Fnv1a64 h;
  h.update(w.buffer());
  w.uint(h.digest());
  return std::move(w.buffer());
}

inline EmbeddingSpace deserialize_embedding(std::string_view data) {
  if (data.empty()) throw CorruptFileError("corrupt embedding file: empty file (expected header)");
  if (data.size() < kEmbeddingMagic.size() ||
      data.substr(0, kEmbeddingMagic.size()) != kEmbeddingMagic) {
    throw CorruptFileError("corrupt embedding file: missing DIACHRON-EMB v1 header");
  }
  detail::ByteReader r(data);
  r.bytes(kEmbeddingMagic.size());
  EmbeddingSpace space;
  const auto res = r.uint<std::uint8_t>();
  if (res > 1) throw CorruptFileError("corrupt embedding file: unknown resolution code");
  space.slice.resolution = static_cast<Resolution>(res);
  space.slice.start_year = r.i32();
  space.slice.end_year = r.i32();
  const auto v = r.uint<std::uint64_t>();
  const auto d = r.uint<std::uint32_t>();
  space.dimension = d;
  // Every vocabulary entry needs at least 12 bytes.
  if (v > r.remaining() / 12) {
    throw CorruptFileError("corrupt embedding file: declared |V| = " + std::to_string(v) +
                           " cannot fit in " + std::to_string(data.size()) + " bytes");
  }
  std::vector<Vocabulary::Entry> entries;
  entries.reserve(v);
  for (std::uint64_t i = 0; i < v; ++i) {
    const auto len = r.uint<std::uint32_t>();
    std::string token(r.bytes(len));
    const auto freq = r.uint<std::uint64_t>();
    entries.push_back({std::move(token), freq});
  }
  const std::uint64_t expected = r.position() + 2 * 4 * v * d + 8;
  if (expected != data.size()) {
    throw CorruptFileError("corrupt embedding file: expected " + std::to_string(expected) +
                           " bytes for |V| = " + std::to_string(v) + ", d = " +
                           std::to_string(d) + ", actual " + std::to_string(data.size()));
  }
  Fnv1a64 h;
  h.update(data.substr(0, data.size() - 8));
  detail::ByteReader tail(data.substr(data.size() - 8));
  const auto stored = tail.uint<std::uint64_t>();
  if (stored != h.digest()) {
    throw CorruptFileError("corrupt embedding file: checksum mismatch (expected " +
                           hex64(stored) + ", actual " + hex64(h.digest()) + ")");
  }
  try {
    space.vocab = Vocabulary(std::move(entries));
  } catch (const UserError& e) {
    throw CorruptFileError(std::string("corrupt embedding file: ") + e.what());
  }
  space.input.resize(v * d);
  space.output.resize(v * d);
  for (auto& x : space.input) x = r.f32();
  for (auto& x : space.output) x = r.f32();
  return space;
}

inline void save_embedding(const EmbeddingSpace& space, const std::filesystem::path& path) {
  const auto bytes = serialize_embedding(space);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UserError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw UserError("failed writing " + path.string());
}

inline EmbeddingSpace load_embedding(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open embedding file " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_embedding(data);
  } catch (const CorruptFileError& e) {
    throw CorruptFileError(path.string() + ": " + e.what());
  }
}

inline std::string embedding_file_name(const TimeSlice& slice) {
  return slice.key() + std::string(kEmbeddingExtension);
}

}  // namespace diachron
