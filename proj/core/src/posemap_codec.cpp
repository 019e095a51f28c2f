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

#include "lgc/posemap_codec.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "lgc/errors.hpp"

namespace lgc {
namespace {

using Plane = std::vector<std::int32_t>;
using FramePlanes = std::array<Plane, kPosePlanes>;

constexpr std::uint64_t kPlaneHeaderBits = 8 * (HuffmanTable::kSerializedSize + 8);

std::int32_t level_count(float step) {
  return static_cast<std::int32_t>(std::lround(1.0 / step)) + 1;
}

FramePlanes quantize_frame(const PoseMapPair& f, float step) {
  FramePlanes planes;
  const std::size_t n = static_cast<std::size_t>(f.height()) * f.width();
  for (int p = 0; p < kPosePlanes; ++p) {
    const Image& img = p < 3 ? f.front : f.back;
    const int c = p % 3;
    Plane& out = planes[p];
    out.resize(n);
    for (int y = 0; y < f.height(); ++y) {
      for (int x = 0; x < f.width(); ++x) {
        out[static_cast<std::size_t>(y) * f.width() + x] = quantize_level(img.at(y, x, c), step);
      }
    }
  }
  return planes;
}

std::int32_t intra_prediction(const Plane& plane, int width, std::size_t i) {
  if (i == 0) return 0;
  if (i % static_cast<std::size_t>(width) == 0) return plane[i - width];
  return plane[i - 1];
}

std::uint32_t zigzag(std::int32_t s) {
  return s >= 0 ? static_cast<std::uint32_t>(s) << 1 : (static_cast<std::uint32_t>(-(s + 1)) << 1) | 1u;
}

std::int32_t unzigzag(std::uint32_t z) {
  return (z & 1u) ? -static_cast<std::int32_t>(z >> 1) - 1 : static_cast<std::int32_t>(z >> 1);
}

// Residual symbols for one plane. Levels < 256 fit one byte; otherwise values
// >= 255 are escaped as 255 followed by three little-endian bytes.
Bytes residual_symbols(const Plane& cur, const Plane* prev, int width, std::int32_t levels) {
  Bytes out;
  out.reserve(cur.size());
  const bool wide = levels > 256;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    const std::int32_t pred = prev ? (*prev)[i] : intra_prediction(cur, width, i);
    std::int32_t r = (cur[i] - pred) % levels;
    if (r < 0) r += levels;
    const std::int32_t s = r <= (levels - 1) / 2 ? r : r - levels;
    const std::uint32_t z = zigzag(s);
    if (!wide) {
      out.push_back(static_cast<std::uint8_t>(z));
    } else if (z < 255) {
      out.push_back(static_cast<std::uint8_t>(z));
    } else {
      const std::uint32_t e = z - 255;
      out.push_back(255);
      out.push_back(static_cast<std::uint8_t>(e));
      out.push_back(static_cast<std::uint8_t>(e >> 8));
      out.push_back(static_cast<std::uint8_t>(e >> 16));
    }
  }
  return out;
}

PlaneCode code_plane(const Bytes& symbols) {
  PlaneCode pc;
  if (std::all_of(symbols.begin(), symbols.end(), [](std::uint8_t b) { return b == 0; })) {
    return pc;
  }
  pc.table = HuffmanTable::build(byte_histogram(symbols));
  pc.payload = huffman_encode(pc.table, symbols);
  return pc;
}

std::uint64_t plane_bits(const PlaneCode& pc) { return kPlaneHeaderBits + 8 * pc.payload.bytes.size(); }

std::uint64_t frame_bits(const std::array<PlaneCode, kPosePlanes>& planes) {
  std::uint64_t bits = 8;
  for (const auto& pc : planes) bits += plane_bits(pc);
  return bits;
}

std::array<PlaneCode, kPosePlanes> code_frame(const FramePlanes& cur, const FramePlanes* prev,
                                              int width, std::int32_t levels) {
  std::array<PlaneCode, kPosePlanes> out;
  for (int p = 0; p < kPosePlanes; ++p) {
    out[p] = code_plane(residual_symbols(cur[p], prev ? &(*prev)[p] : nullptr, width, levels));
  }
  return out;
}

PoseMapPair planes_to_maps(const FramePlanes& planes, int h, int w, float step) {
  PoseMapPair f{Image(h, w, 3), Image(h, w, 3), Mask(h, w), Mask(h, w)};
  for (int p = 0; p < kPosePlanes; ++p) {
    Image& img = p < 3 ? f.front : f.back;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        img.at(y, x, p % 3) = dequantize_level(planes[p][static_cast<std::size_t>(y) * w + x], step);
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto a = f.front.pixel(y, x);
      const auto b = f.back.pixel(y, x);
      f.mask_front.set(y, x, a[0] != 0.0f || a[1] != 0.0f || a[2] != 0.0f);
      f.mask_back.set(y, x, b[0] != 0.0f || b[1] != 0.0f || b[2] != 0.0f);
    }
  }
  return f;
}

void check_frame(const PoseMapPair& f, int h, int w, std::size_t index) {
  auto bad_shape = [&](const Image& img) {
    return img.height() != h || img.width() != w || img.channels() != 3;
  };
  if (bad_shape(f.front) || bad_shape(f.back)) {
    throw InvalidArgument("posemap codec: frame " + std::to_string(index) +
                          " resolution differs from frame 0");
  }
  for (const Image* img : {&f.front, &f.back}) {
    for (float v : img->data()) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw InvalidArgument("posemap codec: frame " + std::to_string(index) +
                              " has a sample outside [0,1]");
      }
    }
  }
}

}  // namespace

std::int32_t quantize_level(float value, float step) {
  const std::int32_t top = level_count(step) - 1;
  const auto level = static_cast<std::int32_t>(std::lround(static_cast<double>(value) / step));
  return std::clamp(level, 0, top);
}

float dequantize_level(std::int32_t level, float step) {
  return static_cast<float>(std::min(1.0, level * static_cast<double>(step)));
}

PoseMapStream encode_posemaps(std::span<const PoseMapPair> frames, double step,
                              const PoseMapCodecOptions& options) {
  if (!(step > 0.0 && step <= 1.0) || step < kMinPoseMapStep) {
    throw InvalidArgument("posemap codec: step must lie in (0, 1], got " + std::to_string(step));
  }
  PoseMapStream s;
  s.step = static_cast<float>(step);
  if (options.reconstruction) options.reconstruction->clear();
  if (frames.empty()) return s;
  const int h = frames[0].height();
  const int w = frames[0].width();
  if (h <= 0 || w <= 0 || h > 0xFFFF || w > 0xFFFF) {
    throw InvalidArgument("posemap codec: resolution out of range");
  }
  s.height = static_cast<std::uint16_t>(h);
  s.width = static_cast<std::uint16_t>(w);
  const std::int32_t levels = level_count(s.step);

  FramePlanes prev;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    check_frame(frames[i], h, w, i);
    FramePlanes cur = quantize_frame(frames[i], s.step);
    PoseMapFrameCode fc;
    const bool can_inter = i > 0;
    const bool want_intra =
        !can_inter || options.policy == ModePolicy::kForceIntra || options.policy == ModePolicy::kAuto;
    const bool want_inter =
        can_inter && (options.policy == ModePolicy::kForceInter || options.policy == ModePolicy::kAuto);
    std::array<PlaneCode, kPosePlanes> intra, inter;
    if (want_intra) intra = code_frame(cur, nullptr, w, levels);
    if (want_inter) inter = code_frame(cur, &prev, w, levels);
    if (want_intra && want_inter) {
      // Ties go to intra.
      fc.mode = frame_bits(inter) < frame_bits(intra) ? FrameMode::kInter : FrameMode::kIntra;
    } else {
      fc.mode = want_inter ? FrameMode::kInter : FrameMode::kIntra;
    }
    fc.planes = fc.mode == FrameMode::kInter ? std::move(inter) : std::move(intra);
    s.frames.push_back(std::move(fc));
    // Level-domain coding is lossless, so the reconstruction is `cur` itself.
    if (options.reconstruction) options.reconstruction->push_back(planes_to_maps(cur, h, w, s.step));
    prev = std::move(cur);
  }
  return s;
}

std::vector<PoseMapPair> decode_posemaps(const PoseMapStream& stream) {
  std::vector<PoseMapPair> out;
  if (stream.frames.empty()) return out;
  if (!(stream.step > 0.0f && stream.step <= 1.0f) || stream.step < kMinPoseMapStep) {
    throw DecodeError("posemap stream: invalid step");
  }
  const int h = stream.height;
  const int w = stream.width;
  if (h == 0 || w == 0) throw DecodeError("posemap stream: zero resolution");
  const std::int32_t levels = level_count(stream.step);
  const bool wide = levels > 256;
  const std::size_t n = static_cast<std::size_t>(h) * w;

  FramePlanes prev;
  for (std::size_t i = 0; i < stream.frames.size(); ++i) {
    const auto& fc = stream.frames[i];
    if (fc.mode == FrameMode::kInter && i == 0) throw DecodeError("posemap stream: frame 0 is inter");
    FramePlanes cur;
    for (int p = 0; p < kPosePlanes; ++p) {
      const PlaneCode& pc = fc.planes[p];
      Plane& plane = cur[p];
      plane.resize(n);
      const bool zero_plane = pc.table.empty();
      if (zero_plane && pc.payload.bit_count != 0) {
        throw DecodeError("posemap stream: payload without table in frame " + std::to_string(i));
      }
      std::optional<HuffmanDecoder> dec;
      if (!zero_plane) dec.emplace(pc.table, pc.payload);
      for (std::size_t k = 0; k < n; ++k) {
        std::uint32_t z = 0;
        if (dec) {
          z = dec->next();
          if (wide && z == 255) {
            const std::uint32_t b0 = dec->next(), b1 = dec->next(), b2 = dec->next();
            z = 255 + (b0 | (b1 << 8) | (b2 << 16));
          }
        }
        if (z >= static_cast<std::uint32_t>(levels)) {
          throw DecodeError("posemap stream: residual out of range in frame " + std::to_string(i));
        }
        const std::int32_t pred =
            fc.mode == FrameMode::kInter ? prev[p][k] : intra_prediction(plane, w, k);
        std::int32_t v = (pred + unzigzag(z)) % levels;
        if (v < 0) v += levels;
        plane[k] = v;
      }
      if (dec) dec->finish();
    }
    out.push_back(planes_to_maps(cur, h, w, stream.step));
    prev = std::move(cur);
  }
  return out;
}

Bytes serialize_posemap_stream(const PoseMapStream& stream) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(stream.frames.size()));
  w.u16(stream.height);
  w.u16(stream.width);
  w.f32(stream.step);
  for (const auto& fc : stream.frames) {
    w.u8(static_cast<std::uint8_t>(fc.mode));
    for (const auto& pc : fc.planes) {
      w.bytes(pc.table.lengths());
      w.u64(pc.payload.bit_count);
      w.bytes(pc.payload.bytes);
    }
  }
  return w.take();
}

PoseMapStream parse_posemap_stream(std::span<const std::uint8_t> data) {
  ByteReader r(data, "posemap section");
  PoseMapStream s;
  const std::uint32_t count = r.u32();
  s.height = r.u16();
  s.width = r.u16();
  s.step = r.f32();
  // Each frame needs at least a mode byte plus six plane headers.
  const std::uint64_t min_frame = 1 + kPosePlanes * (HuffmanTable::kSerializedSize + 8);
  if (std::uint64_t{count} * min_frame > r.remaining()) {
    throw DecodeError("posemap section: too short for " + std::to_string(count) + " frames");
  }
  s.frames.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto& fc = s.frames[i];
    const std::uint8_t mode = r.u8();
    if (mode > 1) {
      throw DecodeError("posemap section: unknown mode flag " + std::to_string(mode) +
                        " in frame " + std::to_string(i));
    }
    fc.mode = static_cast<FrameMode>(mode);
    for (auto& pc : fc.planes) {
      pc.table = HuffmanTable::from_lengths(r.bytes(HuffmanTable::kSerializedSize));
      pc.payload.bit_count = r.u64();
      const std::uint64_t nbytes = (pc.payload.bit_count + 7) / 8;
      if (nbytes > r.remaining()) throw DecodeError("posemap section: truncated payload in frame " + std::to_string(i));
      auto body = r.bytes(static_cast<std::size_t>(nbytes));
      pc.payload.bytes.assign(body.begin(), body.end());
    }
  }
  if (!r.at_end()) throw DecodeError("posemap section: trailing bytes");
  return s;
}

}  // namespace lgc
