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

#include "lgc/entropy.hpp"

#include <gtest/gtest.h>

#include <random>

#include "../oracles/oracles.hpp"
#include "lgc/errors.hpp"
#include "test_util.hpp"

namespace lgc {
namespace {

TEST(HuffmanBuild, SingleSymbolGetsLengthOne) {
  ByteHistogram h{};
  h['A'] = 17;
  const HuffmanTable t = HuffmanTable::build(h);
  EXPECT_EQ(t.length('A'), 1);
  for (int s = 0; s < 256; ++s) {
    if (s != 'A') EXPECT_FALSE(t.present(static_cast<std::uint8_t>(s)));
  }
}

TEST(HuffmanBuild, HandRunMerge) {
  ByteHistogram h{};
  h['A'] = 1;
  h['B'] = 1;
  h['C'] = 2;
  const HuffmanTable t = HuffmanTable::build(h);
  EXPECT_EQ(t.length('A'), 2);
  EXPECT_EQ(t.length('B'), 2);
  EXPECT_EQ(t.length('C'), 1);
  // Canonical codes: shorter first, then by symbol value.
  EXPECT_EQ(t.code('C'), 0b0u);
  EXPECT_EQ(t.code('A'), 0b10u);
  EXPECT_EQ(t.code('B'), 0b11u);
}

TEST(HuffmanBuild, UniformFourSymbolsAllLengthTwo) {
  ByteHistogram h{};
  for (int s : {3, 50, 51, 200}) h[s] = 9;
  const HuffmanTable t = HuffmanTable::build(h);
  for (int s : {3, 50, 51, 200}) EXPECT_EQ(t.length(static_cast<std::uint8_t>(s)), 2);
}

TEST(HuffmanBuild, AllZeroHistogramIsInvalid) {
  EXPECT_THROW(HuffmanTable::build(ByteHistogram{}), InvalidArgument);
}

TEST(HuffmanBuild, DeterministicUnderTies) {
  ByteHistogram h{};
  for (int s = 0; s < 256; s += 3) h[s] = 5;
  EXPECT_EQ(HuffmanTable::build(h).lengths(), HuffmanTable::build(h).lengths());
}

TEST(HuffmanCode, DegenerateStreamPadsToOneByte) {
  const Bytes data{'A', 'A', 'A', 'A'};
  const HuffmanTable t = HuffmanTable::build(byte_histogram(data));
  const BitStream bits = huffman_encode(t, data);
  EXPECT_EQ(bits.bit_count, 4u);
  EXPECT_EQ(bits.bytes.size(), 1u);
  EXPECT_EQ(huffman_decode(t, bits, 4), data);
}

TEST(HuffmanCode, RoundTripOverManyLengths) {
  std::mt19937_64 rng(1);
  std::geometric_distribution<int> skew(0.08);
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{2}, std::size_t{17}, std::size_t{1000},
                        std::size_t{100000}}) {
    Bytes data(n);
    for (auto& b : data) b = static_cast<std::uint8_t>(std::min(skew(rng), 255));
    if (n == 0) {
      EXPECT_EQ(huffman_encode(HuffmanTable{}, data).bit_count, 0u);
      continue;
    }
    const HuffmanTable t = HuffmanTable::build(byte_histogram(data));
    const BitStream bits = huffman_encode(t, data);
    EXPECT_EQ(bits.bit_count, t.cost_bits(byte_histogram(data)));
    EXPECT_EQ(bits.bytes.size(), (bits.bit_count + 7) / 8);
    EXPECT_EQ(huffman_decode(t, bits, n), data) << n;
  }
}

TEST(HuffmanCode, PayloadWithinRedundancyBound) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> weights(256);
    std::exponential_distribution<double> e(1.0 + trial);
    for (auto& w : weights) w = std::exp(-8.0 * e(rng));
    std::discrete_distribution<int> d(weights.begin(), weights.end());
    Bytes data(5000);
    for (auto& b : data) b = static_cast<std::uint8_t>(d(rng));
    const ByteHistogram h = byte_histogram(data);
    const HuffmanTable t = HuffmanTable::build(h);
    const double bound = static_cast<double>(data.size()) * (oracle::entropy_bits(h) + 1.0);
    EXPECT_LE(static_cast<double>(huffman_encode(t, data).bit_count), bound);
    EXPECT_GE(static_cast<double>(huffman_encode(t, data).bit_count),
              static_cast<double>(data.size()) * oracle::entropy_bits(h) - 1e-6);
  }
}

TEST(HuffmanCode, UniformBytesDoNotCompress) {
  std::mt19937_64 rng(3);
  const Bytes data = testing::random_bytes(rng, 50000);
  const HuffmanTable t = HuffmanTable::build(byte_histogram(data));
  const BitStream bits = huffman_encode(t, data);
  EXPECT_GE(bits.bytes.size() + HuffmanTable::kSerializedSize, data.size());
}

TEST(HuffmanCode, LengthsOnlyRebuildGivesIdenticalCodes) {
  std::mt19937_64 rng(4);
  const Bytes data = testing::random_bytes(rng, 3000);
  const HuffmanTable t = HuffmanTable::build(byte_histogram(data));
  const HuffmanTable r = HuffmanTable::from_lengths(t.lengths());
  for (int s = 0; s < 256; ++s) {
    EXPECT_EQ(r.length(static_cast<std::uint8_t>(s)), t.length(static_cast<std::uint8_t>(s)));
    EXPECT_EQ(r.code(static_cast<std::uint8_t>(s)), t.code(static_cast<std::uint8_t>(s)));
  }
}

TEST(HuffmanCode, AbsentSymbolIsInvalidArgument) {
  ByteHistogram h{};
  h[1] = 1;
  h[2] = 1;
  const Bytes data{1, 2, 3};
  EXPECT_THROW(huffman_encode(HuffmanTable::build(h), data), InvalidArgument);
}

TEST(HuffmanCode, TruncatedOrOverlongPayloadIsDecodeError) {
  std::mt19937_64 rng(5);
  const Bytes data = testing::random_bytes(rng, 400);
  const HuffmanTable t = HuffmanTable::build(byte_histogram(data));
  BitStream bits = huffman_encode(t, data);
  EXPECT_THROW(huffman_decode(t, bits, data.size() + 1), DecodeError);
  EXPECT_THROW(huffman_decode(t, bits, data.size() - 1), DecodeError);
  bits.bit_count -= 1;
  EXPECT_THROW(huffman_decode(t, bits, data.size()), DecodeError);
}

TEST(HuffmanTableLengths, KraftViolationIsDecodeError) {
  std::array<std::uint8_t, 256> lengths{};
  lengths[0] = lengths[1] = lengths[2] = 1;
  EXPECT_THROW(HuffmanTable::from_lengths(lengths), DecodeError);
  lengths[2] = 0;
  EXPECT_NO_THROW(HuffmanTable::from_lengths(lengths));
}

TEST(BitIo, MsbFirstPacking) {
  BitWriter w;
  w.put(0b1, 1);
  w.put(0b0110, 4);
  w.put(0b111, 3);
  w.put(0b1, 1);
  const BitStream s = std::move(w).finish();
  ASSERT_EQ(s.bytes.size(), 2u);
  EXPECT_EQ(s.bytes[0], 0b10110111);
  EXPECT_EQ(s.bytes[1], 0b10000000);
  EXPECT_EQ(s.bit_count, 9u);
  BitReader r(s);
  EXPECT_EQ(r.bit(), 1);
  EXPECT_EQ(r.remaining(), 8u);
}

}  // namespace
}  // namespace lgc
