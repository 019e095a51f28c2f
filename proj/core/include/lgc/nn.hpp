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

#include "lgc/image.hpp"

namespace lgc {

// Named dense f32 tensor. Convolution kernels are (out, in, k, k), biases (out).
struct Tensor {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<float> values;

  std::size_t numel() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

namespace nn {

// 2-D convolution with zero padding of k/2 on every side. `kernel` has shape
// (out, in, k, k), `bias` (out). Output size is ceil(H / stride).
Image conv2d(const Image& input, const Tensor& kernel, const Tensor& bias, int stride);

void leaky_relu(Image& x, float slope);
Image upsample_nearest2x(const Image& x);
// x += y elementwise; shapes must match.
void add_inplace(Image& x, const Image& y);

}  // namespace nn
}  // namespace lgc
