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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lgc/errors.hpp"
#include "lgc/pipeline.hpp"
#include "test_util.hpp"

namespace lgc {
namespace {

std::uint64_t frame_bits(const PoseMapFrameCode& f) {
  std::uint64_t bits = 0;
  for (const auto& p : f.planes) bits += p.payload.bit_count;
  return bits;
}

std::vector<PoseMapPair> random_frames(std::uint64_t seed, int n, int h, int w) {
  std::mt19937_64 rng(seed);
  std::vector<PoseMapPair> out;
  for (int i = 0; i < n; ++i) out.push_back(testing::random_pose_maps(rng, h, w));
  return out;
}

// Max |decoded - source| and max |decoded - dequantized source level|.
std::pair<double, double> errors(const PoseMapPair& src, const PoseMapPair& dec, float step) {
  double to_source = 0.0;
  double to_level = 0.0;
  for (bool front : {true, false}) {
    const auto a = (front ? src.front : src.back).data();
    const auto b = (front ? dec.front : dec.back).data();
    for (std::size_t i = 0; i < a.size(); ++i) {
      to_source = std::max(to_source, std::abs(double{a[i]} - b[i]));
      to_level = std::max(to_level, std::abs(double{dequantize_level(quantize_level(a[i], step), step)} - b[i]));
    }
  }
  return {to_source, to_level};
}

TEST(PoseMapCodec, StaticSequenceGoesInterWithZeroResiduals) {
  const auto one = random_frames(1, 1, 24, 24)[0];
  const std::vector<PoseMapPair> frames(30, one);
  const PoseMapStream s = encode_posemaps(frames, 1.0 / 255.0);
  ASSERT_EQ(s.frames.size(), 30u);
  EXPECT_EQ(s.frames[0].mode, FrameMode::kIntra);
  for (std::size_t i = 1; i < s.frames.size(); ++i) {
    EXPECT_EQ(s.frames[i].mode, FrameMode::kInter) << i;
    EXPECT_EQ(frame_bits(s.frames[i]), 0u) << i;
  }
}

TEST(PoseMapCodec, ReconstructionWithinHalfStep) {
  for (double step : {1.0 / 255.0, 3.0 / 255.0, 0.1, 1.0}) {
    const auto frames = random_frames(2, 5, 16, 20);
    const auto dec = decode_posemaps(parse_posemap_stream(serialize_posemap_stream(encode_posemaps(frames, step))));
    ASSERT_EQ(dec.size(), frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto [to_source, to_level] = errors(frames[i], dec[i], static_cast<float>(step));
      EXPECT_EQ(to_level, 0.0);
      EXPECT_LE(to_source, step / 2 + 1e-7) << step;
    }
  }
}

TEST(PoseMapCodec, AbruptChangeSelectsIntra) {
  auto frames = random_frames(3, 1, 32, 32);
  for (int i = 0; i < 5; ++i) frames.push_back(frames[0]);
  // Frame 6 is a smooth gradient that intra prediction handles well but
  // differs everywhere from frame 5.
  PoseMapPair g = frames[0];
  for (bool front : {true, false})
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        (front ? g.mask_front : g.mask_back).set(y, x, true);
        for (int c = 0; c < 3; ++c) (front ? g.front : g.back).at(y, x, c) = 0.3f + 0.01f * x;
      }
  frames.push_back(g);
  const PoseMapStream s = encode_posemaps(frames, 1.0 / 255.0);
  EXPECT_EQ(s.frames[5].mode, FrameMode::kInter);
  EXPECT_EQ(s.frames[6].mode, FrameMode::kIntra);
  PoseMapCodecOptions inter{.policy = ModePolicy::kForceInter};
  const PoseMapStream forced = encode_posemaps(frames, 1.0 / 255.0, inter);
  EXPECT_LT(frame_bits(s.frames[6]), frame_bits(forced.frames[6]));
}

TEST(PoseMapCodec, EmptySequence) {
  const PoseMapStream s = encode_posemaps({}, 1.0 / 255.0);
  EXPECT_TRUE(decode_posemaps(parse_posemap_stream(serialize_posemap_stream(s))).empty());
}

TEST(PoseMapCodec, UnknownModeByteIsDecodeError) {
  Bytes b = serialize_posemap_stream(encode_posemaps(random_frames(4, 2, 8, 8), 1.0 / 255.0));
  b[12] = 7;
  EXPECT_THROW(parse_posemap_stream(b), DecodeError);
}

TEST(PoseMapCodec, TruncationIsDecodeError) {
  const Bytes b = serialize_posemap_stream(encode_posemaps(random_frames(5, 3, 8, 8), 1.0 / 255.0));
  for (std::size_t cut : {std::size_t{5}, b.size() / 2, b.size() - 1}) {
    EXPECT_THROW(parse_posemap_stream(std::span(b.data(), cut)), DecodeError) << cut;
  }
}

TEST(PoseMapCodec, EncoderAndDecoderReconstructionsMatch) {
  const auto frames = random_frames(6, 4, 12, 12);
  std::vector<PoseMapPair> enc_side;
  PoseMapCodecOptions opt;
  opt.reconstruction = &enc_side;
  const PoseMapStream s = encode_posemaps(frames, 2.0 / 255.0, opt);
  const auto dec = decode_posemaps(s);
  ASSERT_EQ(enc_side.size(), dec.size());
  for (std::size_t i = 0; i < dec.size(); ++i) {
    EXPECT_EQ(enc_side[i].front, dec[i].front);
    EXPECT_EQ(enc_side[i].back, dec[i].back);
  }
}

TEST(PoseMapCodec, ReencodingDecodedStreamIsClosedLoop) {
  const auto frames = random_frames(7, 4, 12, 12);
  const auto first = decode_posemaps(encode_posemaps(frames, 4.0 / 255.0));
  const auto second = decode_posemaps(encode_posemaps(first, 4.0 / 255.0));
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].front, second[i].front);
    EXPECT_EQ(first[i].back, second[i].back);
  }
}

TEST(PoseMapCodec, BitsNonincreasingInStep) {
  const Scene scene = make_scene({.seed = 3, .frames = 6, .map_resolution = 32});
  std::size_t previous = SIZE_MAX;
  for (double step : {1.0 / 255.0, 2.0 / 255.0, 4.0 / 255.0, 8.0 / 255.0}) {
    const std::size_t size = serialize_posemap_stream(encode_posemaps(scene.pose_maps, step)).size();
    EXPECT_LE(size, previous) << step;
    previous = size;
  }
}

TEST(PoseMapCodec, StaticGainOverAllIntra) {
  // Every frame carries six fixed-size plane tables, so the bound needs maps
  // large enough for one intra frame to outweigh 29 empty inter frames.
  const Scene scene = make_scene({.seed = 1, .frames = 1, .map_resolution = 128});
  const std::vector<PoseMapPair> frames(30, scene.pose_maps[0]);
  const auto bits = [&](ModePolicy policy) {
    return 8 * serialize_posemap_stream(encode_posemaps(frames, 1.0 / 255.0, {.policy = policy})).size();
  };
  EXPECT_LE(bits(ModePolicy::kAuto), 0.2 * bits(ModePolicy::kForceIntra));
}

TEST(PoseMapCodec, InvalidArguments) {
  auto frames = random_frames(8, 2, 8, 8);
  EXPECT_THROW(encode_posemaps(frames, 0.0), InvalidArgument);
  EXPECT_THROW(encode_posemaps(frames, 1.5), InvalidArgument);
  frames.push_back(random_frames(9, 1, 8, 10)[0]);
  EXPECT_THROW(encode_posemaps(frames, 0.1), InvalidArgument);
}

TEST(PoseMapCodec, FineStepUsesEscapes) {
  const auto frames = random_frames(10, 2, 8, 8);
  const double step = 1.0 / 4096.0;
  const auto dec = decode_posemaps(parse_posemap_stream(serialize_posemap_stream(encode_posemaps(frames, step))));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    EXPECT_LE(errors(frames[i], dec[i], static_cast<float>(step)).first, step / 2 + 1e-7);
  }
}

}  // namespace
}  // namespace lgc
