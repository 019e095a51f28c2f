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

#include "lgc/generator.hpp"

#include <cmath>
#include <random>

#include "lgc/errors.hpp"

namespace lgc {
namespace {

struct LayerSpec {
  const char* name;
  std::uint32_t out, in, k;
};
constexpr LayerSpec kLayers[] = {
    {"conv1", 16, 3, 3}, {"conv2", 32, 16, 3}, {"conv3", 16, 32, 3}, {"conv4", 14, 16, 1}};
constexpr const char* kViews[] = {"front", "back"};

std::vector<TensorSpec> make_architecture() {
  std::vector<TensorSpec> specs;
  for (const char* view : kViews) {
    for (const auto& l : kLayers) {
      const std::string base = std::string(view) + "." + l.name;
      specs.push_back({base + ".weight", {l.out, l.in, l.k, l.k}});
      specs.push_back({base + ".bias", {l.out}});
    }
  }
  return specs;
}

}  // namespace

const std::vector<TensorSpec>& generator_architecture() {
  static const std::vector<TensorSpec> specs = make_architecture();
  return specs;
}

const Tensor& GeneratorWeights::get(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw InvalidArgument("no tensor named " + std::string(name));
}

Tensor& GeneratorWeights::get(std::string_view name) {
  return const_cast<Tensor&>(std::as_const(*this).get(name));
}

std::size_t GeneratorWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.numel();
  return n;
}

void validate_weights(const GeneratorWeights& weights) {
  const auto& arch = generator_architecture();
  if (weights.tensors.size() != arch.size()) {
    throw InvalidArgument("generator weights: expected " + std::to_string(arch.size()) +
                          " tensors, got " + std::to_string(weights.tensors.size()));
  }
  for (std::size_t i = 0; i < arch.size(); ++i) {
    const Tensor& t = weights.tensors[i];
    if (t.name != arch[i].name) {
      throw InvalidArgument("generator weights: tensor " + std::to_string(i) + " is " + t.name +
                            ", expected " + arch[i].name);
    }
    if (t.shape != arch[i].shape) throw InvalidArgument("generator weights: bad shape for " + t.name);
    if (t.values.size() != t.numel()) {
      throw InvalidArgument("generator weights: value count mismatch for " + t.name);
    }
    for (float v : t.values) {
      if (!std::isfinite(v)) throw InvalidArgument("generator weights: non-finite value in " + t.name);
    }
  }
}

GeneratorWeights zero_weights() {
  GeneratorWeights w;
  for (const auto& spec : generator_architecture()) {
    Tensor t{spec.name, spec.shape, {}};
    t.values.assign(t.numel(), 0.0f);
    w.tensors.push_back(std::move(t));
  }
  return w;
}

GeneratorWeights init_weights(const GeneratorInit& init) {
  GeneratorWeights w = zero_weights();
  std::mt19937_64 rng(init.seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  for (auto& t : w.tensors) {
    if (t.shape.size() != 4) continue;
    const float fan_in = static_cast<float>(t.shape[1] * t.shape[2] * t.shape[3]);
    const float std_dev = std::sqrt(2.0f / fan_in);
    for (auto& v : t.values) v = std_dev * normal(rng);
  }
  for (const char* view : kViews) {
    Tensor& k = w.get(std::string(view) + ".conv4.weight");
    Tensor& b = w.get(std::string(view) + ".conv4.bias");
    const std::size_t per_out = k.values.size() / gmap::kChannels;
    auto scale_row = [&](int ch, float gain) {
      for (std::size_t i = 0; i < per_out; ++i) k.values[ch * per_out + i] *= gain;
    };
    for (int c = 0; c < 3; ++c) {
      scale_row(gmap::kOffset + c, init.offset_gain);
      scale_row(gmap::kLogScale + c, init.log_scale_gain);
      scale_row(gmap::kColor + c, init.color_gain);
      b.values[gmap::kLogScale + c] = std::log(init.gaussian_scale);
      b.values[gmap::kColor + c] = init.base_color;
    }
    for (int c = 0; c < 4; ++c) scale_row(gmap::kRotation + c, init.rotation_gain);
    b.values[gmap::kRotation] = 1.0f;
    scale_row(gmap::kOpacity, init.opacity_gain);
    b.values[gmap::kOpacity] = init.opacity_logit;
  }
  return w;
}

Image forward_view(const GeneratorWeights& weights, std::string_view view, const Image& input) {
  if (input.channels() != 3) throw InvalidArgument("generator input must have 3 channels");
  if (input.height() <= 0 || input.width() <= 0 || input.height() % 2 || input.width() % 2) {
    throw InvalidArgument("generator input resolution must be positive and even");
  }
  const std::string p(view);
  auto layer = [&](const Image& x, const char* name, int stride) {
    return nn::conv2d(x, weights.get(p + "." + name + ".weight"),
                      weights.get(p + "." + name + ".bias"), stride);
  };
  Image f1 = layer(input, "conv1", 1);
  nn::leaky_relu(f1, kLeakySlope);
  Image f2 = layer(f1, "conv2", 2);
  nn::leaky_relu(f2, kLeakySlope);
  Image f3 = layer(nn::upsample_nearest2x(f2), "conv3", 1);
  nn::leaky_relu(f3, kLeakySlope);
  nn::add_inplace(f3, f1);
  return layer(f3, "conv4", 1);
}

GaussianMapPair forward(const GeneratorWeights& weights, const PoseMapPair& maps) {
  validate_weights(weights);
  if (maps.back.height() != maps.front.height() || maps.back.width() != maps.front.width()) {
    throw InvalidArgument("front and back pose maps differ in resolution");
  }
  GaussianMapPair out;
  out.front = forward_view(weights, "front", maps.front);
  out.back = forward_view(weights, "back", maps.back);
  out.mask_front = maps.mask_front;
  out.mask_back = maps.mask_back;
  return out;
}

Bytes serialize_weights(const GeneratorWeights& weights) {
  ByteWriter w;
  w.tag("HGWT");
  w.u32(static_cast<std::uint32_t>(weights.tensors.size()));
  for (const auto& t : weights.tensors) {
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(t.name.data()), t.name.size()});
    w.u8(static_cast<std::uint8_t>(t.shape.size()));
    for (auto d : t.shape) w.u32(d);
    for (float v : t.values) w.f32(v);
  }
  return w.take();
}

GeneratorWeights parse_weights(std::span<const std::uint8_t> data) {
  ByteReader r(data, "weights");
  r.expect_tag("HGWT");
  const std::uint32_t count = r.u32();
  const auto& arch = generator_architecture();
  if (count != arch.size()) {
    throw DecodeError("weights: file has " + std::to_string(count) + " tensors, expected " +
                      std::to_string(arch.size()));
  }
  GeneratorWeights w;
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t;
    const std::uint16_t len = r.u16();
    auto name = r.bytes(len);
    t.name.assign(name.begin(), name.end());
    const std::uint8_t rank = r.u8();
    for (std::uint8_t d = 0; d < rank; ++d) t.shape.push_back(r.u32());
    if (t.name != arch[i].name || t.shape != arch[i].shape) {
      throw DecodeError("weights: tensor \"" + t.name + "\" does not match the architecture (expected " +
                        arch[i].name + ")");
    }
    const std::size_t n = t.numel();
    if (r.remaining() < 4 * n) throw DecodeError("weights: truncated data for tensor " + t.name);
    t.values.resize(n);
    for (auto& v : t.values) v = r.f32();
    w.tensors.push_back(std::move(t));
  }
  if (!r.at_end()) throw DecodeError("weights: trailing bytes after last tensor");
  return w;
}

void save_weights(const GeneratorWeights& weights, const std::filesystem::path& path) {
  write_file(path, serialize_weights(weights));
}

GeneratorWeights load_weights(const std::filesystem::path& path) {
  return parse_weights(read_file(path));
}

}  // namespace lgc
