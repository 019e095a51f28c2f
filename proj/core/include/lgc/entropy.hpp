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

#include "lgc/byte_io.hpp"

namespace lgc {

using ByteHistogram = std::array<std::uint64_t, 256>;

ByteHistogram byte_histogram(std::span<const std::uint8_t> data);

// Canonical Huffman code over the byte alphabet. Only the 256 code lengths
// are stored; codes are rebuilt from them, so a lengths-only round trip
// yields identical codes.
class HuffmanTable {
 public:
  static constexpr int kMaxCodeLength = 48;
  static constexpr std::size_t kSerializedSize = 256;

  HuffmanTable() = default;

  // Standard Huffman construction; equal weights merge the shallower subtree
  // (then the smaller symbol) first. A single present symbol gets length 1.
  // Throws InvalidArgument for an all-zero histogram.
  static HuffmanTable build(const ByteHistogram& histogram);
  // Throws DecodeError if the lengths violate the Kraft inequality or exceed
  // kMaxCodeLength. All-zero lengths give an empty table.
  static HuffmanTable from_lengths(std::span<const std::uint8_t> lengths);

  std::uint8_t length(std::uint8_t symbol) const { return lengths_[symbol]; }
  std::uint64_t code(std::uint8_t symbol) const { return codes_[symbol]; }
  bool present(std::uint8_t symbol) const { return lengths_[symbol] != 0; }
  bool empty() const { return max_length_ == 0; }
  const std::array<std::uint8_t, 256>& lengths() const { return lengths_; }

  // Exact payload size in bits for data with this histogram.
  std::uint64_t cost_bits(const ByteHistogram& histogram) const;

  friend bool operator==(const HuffmanTable& a, const HuffmanTable& b) {
    return a.lengths_ == b.lengths_;
  }

 private:
  friend class HuffmanDecoder;
  void assign_codes();

  std::array<std::uint8_t, 256> lengths_{};
  std::array<std::uint64_t, 256> codes_{};
  int max_length_ = 0;
  // Canonical decoding tables indexed by code length.
  std::array<std::uint64_t, kMaxCodeLength + 1> first_code_{};
  std::array<std::uint32_t, kMaxCodeLength + 1> first_index_{};
  std::array<std::uint32_t, kMaxCodeLength + 1> count_{};
  std::array<std::uint8_t, 256> sorted_symbols_{};
};

// Bit buffer packed MSB-first; the final byte is zero padded.
struct BitStream {
  Bytes bytes;
  std::uint64_t bit_count = 0;

  friend bool operator==(const BitStream&, const BitStream&) = default;
};

class BitWriter {
 public:
  // Appends the low `length` bits of `value`, most significant first.
  void put(std::uint64_t value, int length);
  std::uint64_t bit_count() const { return bits_; }
  BitStream finish() &&;

 private:
  Bytes bytes_;
  std::uint64_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const BitStream& stream);
  // Throws DecodeError when no bits are left.
  int bit();
  std::uint64_t remaining() const { return limit_ - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t limit_;
  std::uint64_t pos_ = 0;
};

// Pulls symbols one at a time; used when the symbol count is only known
// after decoding (escape-coded streams).
class HuffmanDecoder {
 public:
  HuffmanDecoder(const HuffmanTable& table, const BitStream& bits);
  // Throws DecodeError on truncation or an invalid code.
  std::uint8_t next();
  // Throws DecodeError unless every payload bit has been consumed.
  void finish() const;

 private:
  const HuffmanTable& table_;
  BitReader reader_;
};

// Throws InvalidArgument if a byte is absent from the table.
BitStream huffman_encode(const HuffmanTable& table, std::span<const std::uint8_t> data);
// Decodes exactly `count` symbols. Throws DecodeError on truncation, on an
// invalid code, or if bits are left over.
Bytes huffman_decode(const HuffmanTable& table, const BitStream& bits, std::size_t count);

}  // namespace lgc
