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

#include "lgc/smplx_codec.hpp"

#include <bit>
#include <string>

#include "lgc/errors.hpp"

namespace lgc {
namespace {

void append_f32(Bytes& out, float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

float read_f32(const std::uint8_t* p) {
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(u);
}

}  // namespace

SmplxStream encode_smplx(std::span<const SmplxPose> frames, const SmplxCodecOptions& options) {
  SmplxStream s;
  s.dims = common_dims(frames);
  s.frame_count = static_cast<std::uint32_t>(frames.size());
  s.temporal_delta = options.temporal_delta;
  const std::size_t frame_bytes = 4ull * (s.dims.theta + s.dims.beta + s.dims.psi);

  Bytes raw;
  raw.reserve(frame_bytes * frames.size());
  for (const auto& f : frames) {
    for (float v : f.theta) append_f32(raw, v);
    for (float v : f.beta) append_f32(raw, v);
    for (float v : f.psi) append_f32(raw, v);
  }
  if (s.temporal_delta) {
    // Back to front so each frame is XORed with its unmodified predecessor.
    for (std::size_t i = raw.size(); i-- > frame_bytes;) raw[i] ^= raw[i - frame_bytes];
  }
  if (raw.empty()) return s;
  s.table = HuffmanTable::build(byte_histogram(raw));
  s.payload = huffman_encode(s.table, raw);
  return s;
}

std::vector<SmplxPose> decode_smplx(const SmplxStream& stream) {
  const std::uint64_t values = std::uint64_t{stream.dims.theta} + stream.dims.beta + stream.dims.psi;
  const std::uint64_t frame_bytes = 4 * values;
  const std::uint64_t total = frame_bytes * stream.frame_count;
  // Every symbol costs at least one bit.
  if (total > stream.payload.bit_count) {
    throw DecodeError("smplx: header announces " + std::to_string(total) +
                      " bytes but payload has only " + std::to_string(stream.payload.bit_count) +
                      " bits");
  }
  Bytes raw;
  if (total > 0) {
    if (stream.table.empty()) throw DecodeError("smplx: empty Huffman table for nonempty stream");
    raw = huffman_decode(stream.table, stream.payload, total);
  } else if (stream.payload.bit_count != 0) {
    throw DecodeError("smplx: payload present for an empty sequence");
  }
  if (stream.temporal_delta) {
    for (std::size_t i = frame_bytes; i < raw.size(); ++i) raw[i] ^= raw[i - frame_bytes];
  }
  std::vector<SmplxPose> frames(stream.frame_count);
  const std::uint8_t* p = raw.data();
  for (std::uint32_t i = 0; i < stream.frame_count; ++i) {
    auto& f = frames[i];
    f.frame_index = i;
    f.theta.resize(stream.dims.theta);
    f.beta.resize(stream.dims.beta);
    f.psi.resize(stream.dims.psi);
    for (auto& v : f.theta) { v = read_f32(p); p += 4; }
    for (auto& v : f.beta) { v = read_f32(p); p += 4; }
    for (auto& v : f.psi) { v = read_f32(p); p += 4; }
  }
  return frames;
}

Bytes serialize_smplx_stream(const SmplxStream& stream) {
  ByteWriter w;
  w.u32(stream.frame_count);
  w.u32(stream.dims.theta);
  w.u32(stream.dims.beta);
  w.u32(stream.dims.psi);
  w.u8(stream.temporal_delta ? 1 : 0);
  w.bytes(stream.table.lengths());
  w.u64(stream.payload.bit_count);
  w.bytes(stream.payload.bytes);
  return w.take();
}

SmplxStream parse_smplx_stream(std::span<const std::uint8_t> data) {
  ByteReader r(data, "smplx section");
  SmplxStream s;
  s.frame_count = r.u32();
  s.dims = {r.u32(), r.u32(), r.u32()};
  const std::uint8_t flag = r.u8();
  if (flag > 1) throw DecodeError("smplx section: bad delta flag " + std::to_string(flag));
  s.temporal_delta = flag == 1;
  s.table = HuffmanTable::from_lengths(r.bytes(HuffmanTable::kSerializedSize));
  s.payload.bit_count = r.u64();
  const std::uint64_t need = (s.payload.bit_count + 7) / 8;
  if (r.remaining() != need) {
    throw DecodeError("smplx section: payload is " + std::to_string(r.remaining()) +
                      " bytes, bit count implies " + std::to_string(need));
  }
  auto body = r.bytes(static_cast<std::size_t>(need));
  s.payload.bytes.assign(body.begin(), body.end());
  return s;
}

}  // namespace lgc
