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
#include <span>
#include <vector>

#include "lgc/avatar_model.hpp"
#include "lgc/byte_io.hpp"
#include "lgc/entropy.hpp"

namespace lgc {

// Lossless motion-layer stream for body-parameter sequences.
//
// Each frame is serialized as little-endian f32 (theta, beta, psi). With the
// temporal delta enabled every frame after the first is XORed bytewise with
// its predecessor; the result is Huffman coded with one table for the whole
// sequence. Bit patterns (NaN payloads, -0.0) survive exactly.
struct SmplxStream {
  std::uint32_t frame_count = 0;
  PoseDims dims;
  bool temporal_delta = true;
  HuffmanTable table;
  BitStream payload;
};

struct SmplxCodecOptions {
  // false = plain Huffman over the raw bytes.
  bool temporal_delta = true;
};

SmplxStream encode_smplx(std::span<const SmplxPose> frames, const SmplxCodecOptions& options = {});
std::vector<SmplxPose> decode_smplx(const SmplxStream& stream);

// Section payload: u32 frames, u32 x3 dims, u8 delta flag, 256 length bytes,
// u64 payload bits, payload bytes.
Bytes serialize_smplx_stream(const SmplxStream& stream);
SmplxStream parse_smplx_stream(std::span<const std::uint8_t> data);

}  // namespace lgc
