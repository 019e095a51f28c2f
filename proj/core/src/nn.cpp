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

#include "lgc/nn.hpp"

#include <functional>
#include <numeric>

#include "lgc/errors.hpp"

namespace lgc {

std::size_t Tensor::numel() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<std::size_t>());
}

namespace nn {

Image conv2d(const Image& input, const Tensor& kernel, const Tensor& bias, int stride) {
  if (kernel.shape.size() != 4 || kernel.shape[2] != kernel.shape[3]) {
    throw InvalidArgument("conv2d: kernel " + kernel.name + " must be (out, in, k, k)");
  }
  const int cout = static_cast<int>(kernel.shape[0]);
  const int cin = static_cast<int>(kernel.shape[1]);
  const int k = static_cast<int>(kernel.shape[2]);
  if (cin != input.channels()) {
    throw InvalidArgument("conv2d: " + kernel.name + " expects " + std::to_string(cin) +
                          " input channels, got " + std::to_string(input.channels()));
  }
  if (bias.numel() != static_cast<std::size_t>(cout)) {
    throw InvalidArgument("conv2d: bias " + bias.name + " size mismatch");
  }
  if (stride < 1) throw InvalidArgument("conv2d: stride must be >= 1");
  const int pad = k / 2;
  const int h = input.height();
  const int w = input.width();
  const int oh = (h + stride - 1) / stride;
  const int ow = (w + stride - 1) / stride;

  // Repack to (ky, kx, ci, co) so the innermost loop runs over contiguous co.
  std::vector<float> packed(kernel.values.size());
  for (int co = 0; co < cout; ++co)
    for (int ci = 0; ci < cin; ++ci)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx)
          packed[((static_cast<std::size_t>(ky) * k + kx) * cin + ci) * cout + co] =
              kernel.values[((static_cast<std::size_t>(co) * cin + ci) * k + ky) * k + kx];

  Image out(oh, ow, cout);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      auto acc = out.pixel(oy, ox);
      for (int co = 0; co < cout; ++co) acc[co] = bias.values[static_cast<std::size_t>(co)];
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * stride + kx - pad;
          if (ix < 0 || ix >= w) continue;
          const auto in = input.pixel(iy, ix);
          const float* wk = packed.data() + (static_cast<std::size_t>(ky) * k + kx) * cin * cout;
          for (int ci = 0; ci < cin; ++ci) {
            const float v = in[ci];
            if (v == 0.0f) continue;
            const float* wrow = wk + static_cast<std::size_t>(ci) * cout;
            for (int co = 0; co < cout; ++co) acc[co] += v * wrow[co];
          }
        }
      }
    }
  }
  return out;
}

void leaky_relu(Image& x, float slope) {
  for (float& v : x.data()) v = v >= 0.0f ? v : slope * v;
}

Image upsample_nearest2x(const Image& x) {
  Image out(x.height() * 2, x.width() * 2, x.channels());
  for (int y = 0; y < out.height(); ++y) {
    for (int xx = 0; xx < out.width(); ++xx) {
      const auto src = x.pixel(y / 2, xx / 2);
      auto dst = out.pixel(y, xx);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  return out;
}

void add_inplace(Image& x, const Image& y) {
  if (!x.same_shape(y)) throw InvalidArgument("add_inplace: shape mismatch");
  auto a = x.data();
  auto b = y.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace nn
}  // namespace lgc
