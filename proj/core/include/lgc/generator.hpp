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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lgc/avatar_model.hpp"
#include "lgc/byte_io.hpp"
#include "lgc/nn.hpp"

namespace lgc {

// Structural layer: weights of the fixed pose-map -> Gaussian-map network.
//
// Per view (front, back) the network is
//   conv1 3->16 3x3 s1, lrelu(0.2)
//   conv2 16->32 3x3 s2, lrelu
//   upsample x2 (nearest), conv3 32->16 3x3 s1, lrelu
//   + conv1 features (skip)
//   conv4 16->14 1x1
// Each view has its own weights: 16 tensors, 19 900 parameters in total.
struct GeneratorWeights {
  std::vector<Tensor> tensors;  // architecture order

  const Tensor& get(std::string_view name) const;
  Tensor& get(std::string_view name);
  std::size_t parameter_count() const;
  friend bool operator==(const GeneratorWeights&, const GeneratorWeights&) = default;
};

struct TensorSpec {
  std::string name;
  std::vector<std::uint32_t> shape;
};

inline constexpr float kLeakySlope = 0.2f;

// Names and shapes of every tensor, in the order they are stored.
const std::vector<TensorSpec>& generator_architecture();

// Throws InvalidArgument naming the first tensor whose name, shape or
// values are not valid for the architecture.
void validate_weights(const GeneratorWeights& weights);

// Seeded initialization. The final 1x1 layer gets per-channel gains and
// biases so a freshly initialized network already emits plausible Gaussians
// (small offsets, scales around `gaussian_scale`, mostly opaque).
struct GeneratorInit {
  std::uint64_t seed = 0;
  float gaussian_scale = 0.02f;  // meters
  float opacity_logit = 2.0f;
  float base_color = 0.5f;
  float offset_gain = 0.01f;
  float log_scale_gain = 0.05f;
  float rotation_gain = 0.05f;
  float opacity_gain = 0.2f;
  float color_gain = 0.3f;
};
GeneratorWeights init_weights(const GeneratorInit& init);
GeneratorWeights zero_weights();

// Deterministic forward pass over both views. Masks are copied from the input.
GaussianMapPair forward(const GeneratorWeights& weights, const PoseMapPair& maps);
// One view only; exposed for tests and the perceptual feature stack.
Image forward_view(const GeneratorWeights& weights, std::string_view view, const Image& input);

// "HGWT" weight file.
Bytes serialize_weights(const GeneratorWeights& weights);
GeneratorWeights parse_weights(std::span<const std::uint8_t> data);
void save_weights(const GeneratorWeights& weights, const std::filesystem::path& path);
GeneratorWeights load_weights(const std::filesystem::path& path);

}  // namespace lgc
