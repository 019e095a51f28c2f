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

#include "lgc/weight_quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgc/entropy.hpp"
#include "lgc/errors.hpp"

namespace lgc {

void QuantConfig::validate() const {
  if (bit_width < 2 || bit_width > 8) {
    throw InvalidArgument("bit width must be in [2, 8], got " + std::to_string(bit_width));
  }
  if (refinement_levels < 1) throw InvalidArgument("refinement levels must be positive");
  if (candidates < 2) throw InvalidArgument("need at least 2 candidates per level");
}

std::int32_t code_min(int bit_width) { return -(1 << (bit_width - 1)); }
std::int32_t code_max(int bit_width) { return (1 << (bit_width - 1)) - 1; }

std::vector<std::int32_t> quantize_with_step(std::span<const float> values, float step, int bit_width) {
  const std::int32_t lo = code_min(bit_width);
  const std::int32_t hi = code_max(bit_width);
  std::vector<std::int32_t> codes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double c = std::nearbyint(static_cast<double>(values[i]) / step);
    codes[i] = static_cast<std::int32_t>(std::clamp(c, double(lo), double(hi)));
  }
  return codes;
}

double quantization_mse(std::span<const float> values, double step, int bit_width) {
  const double lo = code_min(bit_width);
  const double hi = code_max(bit_width);
  double sum = 0.0;
  for (float v : values) {
    const double c = std::clamp(std::nearbyint(v / step), lo, hi);
    const double e = v - c * step;
    sum += e * e;
  }
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

QuantizedTensor quantize_tensor(const Tensor& tensor, const QuantConfig& cfg) {
  cfg.validate();
  if (tensor.values.empty()) throw InvalidArgument("quantize_tensor: empty tensor " + tensor.name);
  double max_abs = 0.0;
  for (float v : tensor.values) {
    if (!std::isfinite(v)) throw InvalidArgument("quantize_tensor: non-finite value in " + tensor.name);
    max_abs = std::max(max_abs, std::abs(double{v}));
  }
  QuantizedTensor q{tensor.name, tensor.shape, {}, 1.0f, cfg.bit_width};
  if (max_abs == 0.0) {
    q.codes.assign(tensor.values.size(), 0);
    return q;
  }
  const std::span<const float> w = tensor.values;
  const double base = max_abs / code_max(cfg.bit_width);
  double lo = 0.1 * base;
  double hi = 2.0 * base;
  double best_step = lo;
  double best_mse = std::numeric_limits<double>::infinity();
  for (int level = 0; level < cfg.refinement_levels; ++level) {
    const double spacing = (hi - lo) / (cfg.candidates - 1);
    for (int i = 0; i < cfg.candidates; ++i) {
      const double step = lo + spacing * i;
      const double mse = quantization_mse(w, static_cast<float>(step), cfg.bit_width);
      if (mse < best_mse) {
        best_mse = mse;
        best_step = step;
      }
    }
    // At Q = 8 the MSE curve has notches narrower than the coarse spacing, so
    // each bracket keeps a fifth of the previous one rather than one spacing.
    const double half = 0.1 * (hi - lo);
    lo = std::max(best_step - half, 1e-3 * base);
    hi = best_step + half;
  }
  q.step = static_cast<float>(best_step);
  q.codes = quantize_with_step(w, q.step, cfg.bit_width);
  return q;
}

Tensor dequantize_tensor(const QuantizedTensor& q) {
  Tensor t{q.name, q.shape, {}};
  t.values.resize(q.codes.size());
  for (std::size_t i = 0; i < q.codes.size(); ++i) {
    t.values[i] = static_cast<float>(q.codes[i]) * q.step;
  }
  return t;
}

QuantizedNetwork quantize_network(const GeneratorWeights& weights, const QuantConfig& cfg) {
  validate_weights(weights);
  cfg.validate();
  QuantizedNetwork net;
  net.bit_width = cfg.bit_width;
  for (const auto& t : weights.tensors) {
    if (t.shape.size() == 1) {
      net.full_precision.push_back(t);
    } else {
      net.quantized.push_back(quantize_tensor(t, cfg));
    }
  }
  return net;
}

GeneratorWeights dequantize_network(const QuantizedNetwork& net) {
  GeneratorWeights w;
  std::size_t qi = 0;
  std::size_t fi = 0;
  for (const auto& spec : generator_architecture()) {
    if (spec.shape.size() == 1) {
      if (fi >= net.full_precision.size()) throw DecodeError("quantized network: missing " + spec.name);
      w.tensors.push_back(net.full_precision[fi++]);
    } else {
      if (qi >= net.quantized.size()) throw DecodeError("quantized network: missing " + spec.name);
      w.tensors.push_back(dequantize_tensor(net.quantized[qi++]));
    }
  }
  try {
    validate_weights(w);
  } catch (const InvalidArgument& e) {
    throw DecodeError(e.what());
  }
  return w;
}

namespace {

std::uint64_t tensor_header_bits(const std::string& name, std::size_t rank) {
  return 8 * (2 + name.size() + 1 + 4 * rank);
}

std::uint64_t packed_bytes(std::size_t numel, int bits) { return (numel * bits + 7) / 8; }

std::size_t numel_of(const std::vector<std::uint32_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

SizeReport size_report(const QuantizedNetwork& net) {
  SizeReport r;
  r.file_header_bits = 8 * (4 + 1 + 4);
  r.total_bits = r.file_header_bits;
  std::size_t qi = 0;
  std::size_t fi = 0;
  auto emit = [&](TensorSizeRow row) {
    r.total_bits += row.total_bits;
    r.rows.push_back(std::move(row));
  };
  for (const auto& spec : generator_architecture()) {
    if (spec.shape.size() == 1 && fi < net.full_precision.size()) {
      const Tensor& t = net.full_precision[fi++];
      TensorSizeRow row{t.name, t.values.size(), false, 32, tensor_header_bits(t.name, t.shape.size())};
      row.total_bits = row.header_bits + 32 * row.numel;
      emit(row);
    } else if (spec.shape.size() != 1 && qi < net.quantized.size()) {
      const QuantizedTensor& q = net.quantized[qi++];
      TensorSizeRow row{q.name, q.codes.size(), true, net.bit_width,
                        tensor_header_bits(q.name, q.shape.size()) + 32};
      row.total_bits = row.header_bits + 8 * packed_bytes(row.numel, net.bit_width);
      emit(row);
    }
  }
  return r;
}

Bytes serialize_quantized(const QuantizedNetwork& net) {
  ByteWriter w;
  w.tag("HGQW");
  w.u8(static_cast<std::uint8_t>(net.bit_width));
  w.u32(static_cast<std::uint32_t>(net.quantized.size() + net.full_precision.size()));
  auto put_header = [&](const std::string& name, const std::vector<std::uint32_t>& shape) {
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(name.data()), name.size()});
    w.u8(static_cast<std::uint8_t>(shape.size()));
    for (auto d : shape) w.u32(d);
  };
  std::size_t qi = 0;
  std::size_t fi = 0;
  for (const auto& spec : generator_architecture()) {
    if (spec.shape.size() == 1) {
      const Tensor& t = net.full_precision.at(fi++);
      put_header(t.name, t.shape);
      for (float v : t.values) w.f32(v);
    } else {
      const QuantizedTensor& q = net.quantized.at(qi++);
      put_header(q.name, q.shape);
      w.f32(q.step);
      BitWriter bits;
      const std::uint64_t mask = (1u << net.bit_width) - 1;
      for (std::int32_t c : q.codes) bits.put(static_cast<std::uint64_t>(c) & mask, net.bit_width);
      w.bytes(std::move(bits).finish().bytes);
    }
  }
  return w.take();
}

QuantizedNetwork parse_quantized(std::span<const std::uint8_t> data) {
  ByteReader r(data, "quantized weights");
  r.expect_tag("HGQW");
  QuantizedNetwork net;
  net.bit_width = r.u8();
  if (net.bit_width < 2 || net.bit_width > 8) {
    throw DecodeError("quantized weights: bit width " + std::to_string(net.bit_width) + " out of range");
  }
  const std::uint32_t count = r.u32();
  const auto& arch = generator_architecture();
  if (count != arch.size()) throw DecodeError("quantized weights: unexpected tensor count");
  for (const auto& spec : arch) {
    const std::uint16_t len = r.u16();
    auto nm = r.bytes(len);
    std::string name(nm.begin(), nm.end());
    const std::uint8_t rank = r.u8();
    std::vector<std::uint32_t> shape;
    for (std::uint8_t d = 0; d < rank; ++d) shape.push_back(r.u32());
    if (name != spec.name || shape != spec.shape) {
      throw DecodeError("quantized weights: tensor \"" + name + "\" does not match architecture (expected " +
                        spec.name + ")");
    }
    const std::size_t n = numel_of(shape);
    if (rank == 1) {
      Tensor t{name, shape, std::vector<float>(n)};
      for (auto& v : t.values) v = r.f32();
      net.full_precision.push_back(std::move(t));
    } else {
      QuantizedTensor q{name, shape, {}, r.f32(), net.bit_width};
      if (!(q.step > 0.0f) || !std::isfinite(q.step)) throw DecodeError("quantized weights: bad step for " + name);
      const auto nbytes = packed_bytes(n, net.bit_width);
      BitStream bs;
      auto body = r.bytes(static_cast<std::size_t>(nbytes));
      bs.bytes.assign(body.begin(), body.end());
      bs.bit_count = static_cast<std::uint64_t>(n) * net.bit_width;
      BitReader br(bs);
      q.codes.resize(n);
      const std::int32_t sign = 1 << (net.bit_width - 1);
      for (auto& c : q.codes) {
        std::int32_t u = 0;
        for (int b = 0; b < net.bit_width; ++b) u = (u << 1) | br.bit();
        c = (u ^ sign) - sign;  // sign-extend
      }
      net.quantized.push_back(std::move(q));
    }
  }
  if (!r.at_end()) throw DecodeError("quantized weights: trailing bytes");
  return net;
}

}  // namespace lgc
