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

#include <algorithm>
#include <queue>
#include <string>

#include "lgc/errors.hpp"

namespace lgc {

ByteHistogram byte_histogram(std::span<const std::uint8_t> data) {
  ByteHistogram h{};
  for (std::uint8_t b : data) ++h[b];
  return h;
}

namespace {

struct Node {
  std::uint64_t weight;
  int height;
  int min_symbol;
  int left = -1;
  int right = -1;
};

// Lengths for an optimal prefix code, or empty if the tree got deeper than
// the cap.
std::array<std::uint8_t, 256> huffman_lengths(const ByteHistogram& hist, bool& too_deep) {
  std::vector<Node> nodes;
  for (int s = 0; s < 256; ++s) {
    if (hist[s] > 0) nodes.push_back({hist[s], 0, s});
  }
  std::array<std::uint8_t, 256> lengths{};
  too_deep = false;
  if (nodes.size() == 1) {
    lengths[nodes[0].min_symbol] = 1;
    return lengths;
  }
  auto after = [&nodes](int a, int b) {
    const Node& x = nodes[a];
    const Node& y = nodes[b];
    if (x.weight != y.weight) return x.weight > y.weight;
    if (x.height != y.height) return x.height > y.height;
    return x.min_symbol > y.min_symbol;
  };
  std::priority_queue<int, std::vector<int>, decltype(after)> heap(after);
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) heap.push(i);
  while (heap.size() > 1) {
    const int a = heap.top();
    heap.pop();
    const int b = heap.top();
    heap.pop();
    nodes.push_back({nodes[a].weight + nodes[b].weight,
                     std::max(nodes[a].height, nodes[b].height) + 1,
                     std::min(nodes[a].min_symbol, nodes[b].min_symbol), a, b});
    heap.push(static_cast<int>(nodes.size()) - 1);
  }
  // Depth-first walk from the root assigns leaf depths.
  std::vector<std::pair<int, int>> stack{{heap.top(), 0}};
  while (!stack.empty()) {
    auto [idx, depth] = stack.back();
    stack.pop_back();
    const Node& n = nodes[idx];
    if (n.left < 0) {
      if (depth > HuffmanTable::kMaxCodeLength) too_deep = true;
      lengths[n.min_symbol] = static_cast<std::uint8_t>(std::min(depth, 255));
    } else {
      stack.push_back({n.left, depth + 1});
      stack.push_back({n.right, depth + 1});
    }
  }
  return lengths;
}

}  // namespace

HuffmanTable HuffmanTable::build(const ByteHistogram& histogram) {
  if (std::all_of(histogram.begin(), histogram.end(), [](std::uint64_t c) { return c == 0; })) {
    throw InvalidArgument("huffman: histogram has no nonzero count");
  }
  ByteHistogram h = histogram;
  for (;;) {
    bool too_deep = false;
    auto lengths = huffman_lengths(h, too_deep);
    if (!too_deep) return from_lengths(lengths);
    // Only reachable with Fibonacci-like counts beyond ~1e10 symbols.
    for (auto& c : h) {
      if (c > 0) c = std::max<std::uint64_t>(1, c >> 1);
    }
  }
}

HuffmanTable HuffmanTable::from_lengths(std::span<const std::uint8_t> lengths) {
  if (lengths.size() != 256) throw DecodeError("huffman: table must have 256 lengths");
  HuffmanTable t;
  // Kraft sum scaled by 2^kMaxCodeLength.
  std::uint64_t kraft = 0;
  for (int s = 0; s < 256; ++s) {
    const std::uint8_t len = lengths[s];
    if (len > kMaxCodeLength) {
      throw DecodeError("huffman: code length " + std::to_string(len) + " for symbol " +
                        std::to_string(s) + " exceeds limit");
    }
    t.lengths_[s] = len;
    if (len > 0) kraft += static_cast<std::uint64_t>(1) << (kMaxCodeLength - len);
  }
  if (kraft > (static_cast<std::uint64_t>(1) << kMaxCodeLength)) {
    throw DecodeError("huffman: code lengths violate the Kraft inequality");
  }
  t.assign_codes();
  return t;
}

void HuffmanTable::assign_codes() {
  codes_.fill(0);
  count_.fill(0);
  first_code_.fill(0);
  first_index_.fill(0);
  max_length_ = 0;
  for (int s = 0; s < 256; ++s) {
    if (lengths_[s] > 0) {
      ++count_[lengths_[s]];
      max_length_ = std::max<int>(max_length_, lengths_[s]);
    }
  }
  std::uint32_t index = 0;
  std::uint64_t code = 0;
  for (int len = 1; len <= kMaxCodeLength; ++len) {
    code <<= 1;
    first_code_[len] = code;
    first_index_[len] = index;
    for (int s = 0; s < 256; ++s) {
      if (lengths_[s] == len) {
        codes_[s] = code++;
        sorted_symbols_[index++] = static_cast<std::uint8_t>(s);
      }
    }
  }
}

std::uint64_t HuffmanTable::cost_bits(const ByteHistogram& histogram) const {
  std::uint64_t bits = 0;
  for (int s = 0; s < 256; ++s) bits += histogram[s] * lengths_[s];
  return bits;
}

void BitWriter::put(std::uint64_t value, int length) {
  for (int i = length - 1; i >= 0; --i) {
    if ((bits_ & 7) == 0) bytes_.push_back(0);
    if ((value >> i) & 1) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ & 7));
    ++bits_;
  }
}

BitStream BitWriter::finish() && { return {std::move(bytes_), bits_}; }

BitReader::BitReader(const BitStream& stream) : bytes_(stream.bytes), limit_(stream.bit_count) {
  if ((limit_ + 7) / 8 > bytes_.size()) {
    throw DecodeError("bitstream: " + std::to_string(bytes_.size()) + " bytes cannot hold " +
                      std::to_string(limit_) + " bits");
  }
}

int BitReader::bit() {
  if (pos_ >= limit_) throw DecodeError("bitstream: truncated");
  const int b = (bytes_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
  ++pos_;
  return b;
}

BitStream huffman_encode(const HuffmanTable& table, std::span<const std::uint8_t> data) {
  BitWriter w;
  for (std::uint8_t s : data) {
    if (!table.present(s)) {
      throw InvalidArgument("huffman: symbol " + std::to_string(s) + " absent from table");
    }
    w.put(table.code(s), table.length(s));
  }
  return std::move(w).finish();
}

HuffmanDecoder::HuffmanDecoder(const HuffmanTable& table, const BitStream& bits)
    : table_(table), reader_(bits) {}

std::uint8_t HuffmanDecoder::next() {
  const HuffmanTable& t = table_;
  std::uint64_t code = 0;
  for (int len = 1;; ++len) {
    code = (code << 1) | static_cast<std::uint64_t>(reader_.bit());
    if (len > t.max_length_) throw DecodeError("huffman: invalid code in bitstream");
    if (t.count_[len] != 0 && code - t.first_code_[len] < t.count_[len]) {
      return t.sorted_symbols_[t.first_index_[len] + (code - t.first_code_[len])];
    }
  }
}

void HuffmanDecoder::finish() const {
  if (reader_.remaining() != 0) {
    throw DecodeError("huffman: " + std::to_string(reader_.remaining()) +
                      " trailing bits after the last symbol");
  }
}

Bytes huffman_decode(const HuffmanTable& table, const BitStream& bits, std::size_t count) {
  HuffmanDecoder dec(table, bits);
  Bytes out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(dec.next());
  dec.finish();
  return out;
}

}  // namespace lgc
