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

#include <gtest/gtest.h>

#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "../oracles/oracles.hpp"
#include "lgc/errors.hpp"
#include "test_util.hpp"

namespace lgc {
namespace {

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint32_t>(a[i]) != std::bit_cast<std::uint32_t>(b[i])) return false;
  }
  return true;
}

void expect_bit_exact(const std::vector<SmplxPose>& a, const std::vector<SmplxPose>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(same_bits(a[i].theta, b[i].theta)) << i;
    EXPECT_TRUE(same_bits(a[i].beta, b[i].beta)) << i;
    EXPECT_TRUE(same_bits(a[i].psi, b[i].psi)) << i;
  }
}

std::vector<SmplxPose> random_sequence(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::vector<SmplxPose> out;
  for (int i = 0; i < n; ++i) out.push_back(testing::random_pose(rng, 27, 10, 10, i));
  return out;
}

TEST(SmplxCodec, RandomSequenceRoundTripsThroughTheSection) {
  const auto frames = random_sequence(1, 50);
  for (bool delta : {true, false}) {
    const SmplxStream s = encode_smplx(frames, {.temporal_delta = delta});
    expect_bit_exact(decode_smplx(parse_smplx_stream(serialize_smplx_stream(s))), frames);
  }
}

TEST(SmplxCodec, NanPayloadsAndNegativeZeroSurvive) {
  SmplxPose p;
  p.theta = {-0.0f, std::bit_cast<float>(0x7fc01234u), std::bit_cast<float>(0xffa00001u),
             std::numeric_limits<float>::infinity()};
  p.beta = {std::numeric_limits<float>::denorm_min()};
  p.psi = {};
  const std::vector<SmplxPose> frames{p};
  expect_bit_exact(decode_smplx(encode_smplx(frames)), frames);
}

TEST(SmplxCodec, IdenticalFramesCompressFarBelowRaw) {
  std::vector<SmplxPose> frames(100, random_sequence(2, 1)[0]);
  const SmplxStream stream = encode_smplx(frames);
  const Bytes section = serialize_smplx_stream(stream);
  // Residuals are frame 0's bytes followed by zeros; count them directly.
  std::array<std::uint64_t, 256> hist{};
  for (const auto* part : {&frames[0].theta, &frames[0].beta, &frames[0].psi}) {
    for (float v : *part) {
      const auto u = std::bit_cast<std::uint32_t>(v);
      for (int k = 0; k < 4; ++k) ++hist[(u >> (8 * k)) & 0xFFu];
    }
  }
  const std::uint64_t symbols = 100 * 47 * 4;
  hist[0] += symbols - 47 * 4;
  const double bound = static_cast<double>(symbols) * (oracle::entropy_bits(hist) + 1.0);
  EXPECT_LE(static_cast<double>(stream.payload.bit_count), bound);
  EXPECT_LT(stream.payload.bit_count, 8 * symbols / 6);
  expect_bit_exact(decode_smplx(parse_smplx_stream(section)), frames);
}

TEST(SmplxCodec, ConstantSequenceBeatsRandomSequence) {
  const auto random = random_sequence(3, 60);
  std::vector<SmplxPose> constant(60, random[0]);
  EXPECT_LT(serialize_smplx_stream(encode_smplx(constant)).size(),
            serialize_smplx_stream(encode_smplx(random)).size());
}

TEST(SmplxCodec, TruncatedSectionIsDecodeError) {
  const Bytes section = serialize_smplx_stream(encode_smplx(random_sequence(4, 10)));
  const std::span cut(section.data(), section.size() - 1);
  EXPECT_THROW(parse_smplx_stream(cut), DecodeError);
}

TEST(SmplxCodec, HeaderPayloadMismatchIsDecodeError) {
  SmplxStream s = encode_smplx(random_sequence(5, 10));
  s.frame_count += 1;
  EXPECT_THROW(decode_smplx(s), DecodeError);
}

TEST(SmplxCodec, ZeroFrameStream) {
  const SmplxStream s = encode_smplx({});
  EXPECT_TRUE(decode_smplx(parse_smplx_stream(serialize_smplx_stream(s))).empty());
}

TEST(SmplxCodec, InconsistentDimensionsAreInvalid) {
  auto frames = random_sequence(6, 3);
  frames[1].psi.pop_back();
  EXPECT_THROW(encode_smplx(frames), InvalidArgument);
}

TEST(SmplxCodec, BadDeltaFlagIsDecodeError) {
  Bytes section = serialize_smplx_stream(encode_smplx(random_sequence(7, 3)));
  section[16] = 2;  // after u32 frames and three u32 dims
  EXPECT_THROW(parse_smplx_stream(section), DecodeError);
}

}  // namespace
}  // namespace lgc
