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

// Independent reference computations and frozen reference values. Nothing
// here calls into the library.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace lgc::oracle {

// MSE of symmetric uniform quantization, written out longhand.
inline double quant_mse(std::span<const float> w, double step, int bits) {
  const double lo = -std::ldexp(1.0, bits - 1);
  const double hi = std::ldexp(1.0, bits - 1) - 1.0;
  double sum = 0.0;
  for (float v : w) {
    const double code = std::clamp(std::round(v / step), lo, hi);
    const double e = v - code * step;
    sum += e * e;
  }
  return sum / static_cast<double>(w.size());
}

struct GridResult {
  double step = 0.0;
  double mse = std::numeric_limits<double>::infinity();
};

// Exhaustive scan of `points` steps over [0.1, 2.0] * max|w| / (2^(Q-1) - 1).
inline GridResult brute_force_step(std::span<const float> w, int bits, int points = 10000) {
  double max_abs = 0.0;
  for (float v : w) max_abs = std::max(max_abs, std::abs(double{v}));
  const double base = max_abs / (std::ldexp(1.0, bits - 1) - 1.0);
  GridResult best;
  for (int i = 0; i < points; ++i) {
    const double step = base * (0.1 + 1.9 * i / (points - 1));
    const double mse = quant_mse(w, step, bits);
    if (mse < best.mse) best = {step, mse};
  }
  return best;
}

// Empirical entropy of a byte histogram in bits per symbol.
inline double entropy_bits(const std::array<std::uint64_t, 256>& h) {
  double n = 0.0;
  for (auto c : h) n += static_cast<double>(c);
  double e = 0.0;
  for (auto c : h) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    e -= p * std::log2(p);
  }
  return e;
}

// skimage.metrics.structural_similarity(a, 1 - a, gaussian_weights=True,
// sigma=1.5, use_sample_covariance=False, data_range=1.0) for a 32x32
// checkerboard of 4x4 cells whose top-left cell is 0.
inline constexpr double kSsimCheckerboard32x4 = -0.903411668365663;
// Same settings, 24x24 checkerboard of single pixels.
inline constexpr double kSsimCheckerboard24x1 = -0.9964064683569569;
// 16x20x3 images a = ((7y + 13x + 29c) mod 17) / 16 and
// b = ((5y + 3x + 11c) mod 13) / 12 (both rounded to f32), channel_axis=2.
inline constexpr double kSsimModularRgb = -0.00980927672385473;
// a against clip(0.9 a + 0.05).
inline constexpr double kSsimModularRgbAffine = 0.9945014199615718;

}  // namespace lgc::oracle
