// Copyright 2026 The LGC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lgc/avatar_model.hpp"
#include "lgc/byte_io.hpp"
#include "lgc/generator.hpp"
#include "lgc/renderer.hpp"

namespace lgc {

enum class LayerId : std::uint8_t { kStructural = 0, kSmplx = 1, kPoseMap = 2, kMetadata = 3 };
enum class CodecId : std::uint8_t {
  kQuantizedWeights = 1,
  kSmplxHuffman = 2,
  kPoseMapPredictive = 3,
  kJsonMetadata = 4,
};

const char* layer_name(LayerId id);

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderBytes = 7;  // "HGCA", u16 version, u8 count
inline constexpr std::size_t kSectionEntryBytes = 22;

struct Section {
  LayerId layer = LayerId::kStructural;
  CodecId codec = CodecId::kQuantizedWeights;
  Bytes payload;
};

struct SectionEntry {
  LayerId layer = LayerId::kStructural;
  CodecId codec = CodecId::kQuantizedWeights;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::uint32_t crc = 0;
};

// Header, section table, then payloads in the given order. Throws
// InvalidArgument on a repeated layer.
Bytes mux(std::span<const Section> sections);

// Random-access input for the demuxer.
class ByteSource {
 public:
  virtual ~ByteSource() = default;
  virtual std::uint64_t size() const = 0;
  // Exactly `length` bytes at `offset`; DecodeError when out of range.
  virtual Bytes read(std::uint64_t offset, std::uint64_t length) = 0;
};

class MemorySource final : public ByteSource {
 public:
  explicit MemorySource(Bytes data) : data_(std::move(data)) {}
  std::uint64_t size() const override { return data_.size(); }
  Bytes read(std::uint64_t offset, std::uint64_t length) override;

 private:
  Bytes data_;
};

class FileSource final : public ByteSource {
 public:
  explicit FileSource(const std::filesystem::path& path);
  std::uint64_t size() const override { return size_; }
  Bytes read(std::uint64_t offset, std::uint64_t length) override;

 private:
  std::ifstream in_;
  std::uint64_t size_ = 0;
};

// Forwards to another source and records every range requested.
class CountingSource final : public ByteSource {
 public:
  explicit CountingSource(ByteSource& inner) : inner_(inner) {}
  std::uint64_t size() const override { return inner_.size(); }
  Bytes read(std::uint64_t offset, std::uint64_t length) override;

  const std::vector<std::pair<std::uint64_t, std::uint64_t>>& reads() const { return reads_; }
  std::uint64_t bytes_read() const;
  // True if any recorded read overlaps [offset, offset + length).
  bool touched(std::uint64_t offset, std::uint64_t length) const;

 private:
  ByteSource& inner_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> reads_;
};

// Reads and validates the header and section table up front; payloads are
// fetched (and CRC checked) on demand.
class Demuxer {
 public:
  explicit Demuxer(ByteSource& source);

  const std::vector<SectionEntry>& entries() const { return entries_; }
  const SectionEntry* find(LayerId layer) const;
  Bytes read(LayerId layer);  // DecodeError if absent or the CRC mismatches

 private:
  ByteSource& source_;
  std::vector<SectionEntry> entries_;
};

// Everything the decoder needs besides the sections themselves. The template
// is not transmitted: it is either the synthetic one (by seed) or a file the
// receiver already holds, identified by its CRC.
struct StreamMetadata {
  std::uint32_t frames = 0;
  int map_resolution = 0;
  Camera camera;
  bool synthetic_template = true;
  std::uint64_t template_seed = 0;
  std::uint32_t template_crc = 0;
  int bit_width = 8;
  double step = 1.0 / 255.0;
};

Bytes serialize_metadata(const StreamMetadata& meta);
StreamMetadata parse_metadata(std::span<const std::uint8_t> data);

struct DecodedLayers {
  std::optional<GeneratorWeights> weights;
  std::vector<SmplxPose> poses;
  std::vector<PoseMapPair> pose_maps;
  std::optional<StreamMetadata> metadata;
};

// Dispatches every present section to its decoder. Absent sections are left
// empty; an unknown codec or a layer/codec mismatch is a DecodeError.
DecodedLayers decode_all(ByteSource& source);
// Structural layer only; touches nothing but the header, the table and the
// structural payload.
GeneratorWeights decode_structural(ByteSource& source);

struct LayerShare {
  LayerId layer = LayerId::kStructural;
  std::uint64_t bytes = 0;
  double percent = 0.0;
};

struct Composition {
  std::vector<LayerShare> layers;  // table order
  std::uint64_t payload_bytes = 0;
  std::uint64_t file_bytes = 0;
};

// Shares of the payload bytes per layer (CRC verified).
Composition report_composition(ByteSource& source);
// "layer,bytes,percent" rows.
std::string composition_csv(const Composition& c);

}  // namespace lgc
