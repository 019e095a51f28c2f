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
#include <string>
#include <vector>

#include "lgc/byte_io.hpp"
#include "lgc/generator.hpp"

namespace lgc {

struct QuantConfig {
  int bit_width = 8;          // Q, 2..8
  int refinement_levels = 3;  // coarse scan + (levels - 1) bracket refinements
  int candidates = 64;        // step sizes tried per level

  void validate() const;
};

// Symmetric uniform quantization: value = code * step, codes in
// [-2^(Q-1), 2^(Q-1) - 1].
struct QuantizedTensor {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<std::int32_t> codes;
  float step = 1.0f;
  int bit_width = 8;

  friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

std::int32_t code_min(int bit_width);
std::int32_t code_max(int bit_width);

// Codes for `values` at a fixed step: clamp(round(v / step), min, max).
std::vector<std::int32_t> quantize_with_step(std::span<const float> values, float step, int bit_width);
// Mean squared error of quantizing `values` with `step`.
double quantization_mse(std::span<const float> values, double step, int bit_width);

// Greedy coarse-to-fine search for the MSE-minimizing step. Level 0 scans
// `candidates` steps over [0.1, 2.0] x max|w| / (2^(Q-1) - 1); each later
// level rescans a bracket one previous spacing wide on either side of the
// incumbent. An all-zero tensor gets step 1 and zero codes.
QuantizedTensor quantize_tensor(const Tensor& tensor, const QuantConfig& cfg);
Tensor dequantize_tensor(const QuantizedTensor& q);

struct TensorSizeRow {
  std::string name;
  std::size_t numel = 0;
  bool quantized = false;
  int bits_per_value = 32;
  std::uint64_t header_bits = 0;  // name, rank, dims (+ f32 step when quantized)
  std::uint64_t total_bits = 0;
};

struct SizeReport {
  std::vector<TensorSizeRow> rows;
  std::uint64_t file_header_bits = 0;
  std::uint64_t total_bits = 0;  // equals 8 x serialized section size
};

// Rank-1 tensors (biases) stay f32; every other tensor is quantized.
struct QuantizedNetwork {
  int bit_width = 8;
  std::vector<QuantizedTensor> quantized;  // architecture order, kernels only
  std::vector<Tensor> full_precision;      // biases
};

QuantizedNetwork quantize_network(const GeneratorWeights& weights, const QuantConfig& cfg);
GeneratorWeights dequantize_network(const QuantizedNetwork& net);
SizeReport size_report(const QuantizedNetwork& net);

// "HGQW" quantized-weight section. Tensors appear in architecture order;
// rank-1 tensors carry f32 values, others an f32 step and Q-bit two's
// complement codes packed MSB-first.
Bytes serialize_quantized(const QuantizedNetwork& net);
QuantizedNetwork parse_quantized(std::span<const std::uint8_t> data);

}  // namespace lgc
