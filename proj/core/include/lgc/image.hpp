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

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lgc {

// Interleaved H x W x C float image, row-major (channel fastest).
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, float fill = 0.0f)
      : height_(height), width_(width), channels_(channels),
        data_(static_cast<std::size_t>(height) * width * channels, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }
  bool empty() const { return data_.empty(); }

  float& at(int y, int x, int c) {
    assert(y >= 0 && y < height_ && x >= 0 && x < width_ && c >= 0 && c < channels_);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int y, int x, int c) const {
    assert(y >= 0 && y < height_ && x >= 0 && x < width_ && c >= 0 && c < channels_);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::span<float> pixel(int y, int x) {
    return {data_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_,
            static_cast<std::size_t>(channels_)};
  }
  std::span<const float> pixel(int y, int x) const {
    return {data_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_,
            static_cast<std::size_t>(channels_)};
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool same_shape(const Image& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }
  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// Binary H x W mask, one byte per pixel (0 or 1).
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width) : height_(height), width_(width),
      bits_(static_cast<std::size_t>(height) * width, 0) {}

  int height() const { return height_; }
  int width() const { return width_; }
  bool get(int y, int x) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int y, int x, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  std::size_t popcount() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Writes channels 0..2 (or channel 0 replicated for 1-channel images) as
// binary PPM (P6), values clamped to [0,1] and rounded to 8 bits.
void write_ppm(const std::filesystem::path& path, const Image& image);

}  // namespace lgc
