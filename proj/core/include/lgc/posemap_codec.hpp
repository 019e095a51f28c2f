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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lgc/avatar_model.hpp"
#include "lgc/byte_io.hpp"
#include "lgc/entropy.hpp"

namespace lgc {

// Lossy predictive codec for pose-map sequences.
//
// Samples are quantized to levels round(v / step). Each of the six planes
// (front RGB, back RGB) is predicted either spatially (intra: left
// neighbour, top neighbour in the first column, 0 for the first sample) or
// from the previous reconstructed frame (inter). Residuals wrap modulo the
// level count, are zig-zag mapped and Huffman coded per plane. A plane whose
// residuals are all zero is stored as an empty table with zero payload bits.
enum class FrameMode : std::uint8_t { kIntra = 0, kInter = 1 };

enum class ModePolicy { kAuto, kForceIntra, kForceInter };

inline constexpr int kPosePlanes = 6;

struct PlaneCode {
  HuffmanTable table;
  BitStream payload;
};

struct PoseMapFrameCode {
  FrameMode mode = FrameMode::kIntra;
  std::array<PlaneCode, kPosePlanes> planes;
};

struct PoseMapStream {
  std::uint16_t height = 0;
  std::uint16_t width = 0;
  float step = 1.0f / 255.0f;
  std::vector<PoseMapFrameCode> frames;
};

struct PoseMapCodecOptions {
  // kAuto picks the cheaper mode per frame; frame 0 is always intra.
  ModePolicy policy = ModePolicy::kAuto;
  // When set, receives the encoder-side reconstruction.
  std::vector<PoseMapPair>* reconstruction = nullptr;
};

// Smallest accepted step: level indices must stay exactly representable.
inline constexpr double kMinPoseMapStep = 1.0 / (1 << 24);

PoseMapStream encode_posemaps(std::span<const PoseMapPair> frames, double step,
                              const PoseMapCodecOptions& options = {});
// Masks of the output are the pixels with any nonzero channel.
std::vector<PoseMapPair> decode_posemaps(const PoseMapStream& stream);

// Quantizer used by both sides; exposed so tests can check the bound.
std::int32_t quantize_level(float value, float step);
float dequantize_level(std::int32_t level, float step);

// Section payload: u32 frames, u16 H, u16 W, f32 step, then per frame u8 mode
// and per plane 256 length bytes, u64 payload bits, payload bytes.
Bytes serialize_posemap_stream(const PoseMapStream& stream);
PoseMapStream parse_posemap_stream(std::span<const std::uint8_t> data);

}  // namespace lgc
