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

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lgc/avatar_model.hpp"
#include "lgc/image.hpp"

namespace lgc {

enum class Projection { kOrthographic, kPinhole };

// World-to-view rigid transform plus intrinsics. View space: x right,
// y down, z forward (depth). For orthographic cameras fx/fy are pixels per
// meter. Pixel (col, row) has its center at (col, row).
struct Camera {
  Projection mode = Projection::kOrthographic;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  Eigen::Vector3d background = Eigen::Vector3d::Zero();

  void validate() const;
};

// Text key-value camera file, one key per line ('#' starts a comment):
//   mode orthographic|pinhole
//   rotation r00 r01 r02 r10 r11 r12 r20 r21 r22
//   translation tx ty tz
//   intrinsics fx fy cx cy
//   size width height
//   background r g b
Camera parse_camera(std::string_view text);
std::string format_camera(const Camera& camera);
Camera load_camera(const std::filesystem::path& path);
void save_camera(const Camera& camera, const std::filesystem::path& path);

struct SplatImage {
  Image color;  // H x W x 3
  Image alpha;  // H x W x 1, accumulated opacity
};

struct RenderOptions {
  int threads = 1;
  int tile_size = 16;
};

struct RenderStats {
  std::size_t singular = 0;  // skipped: det of the 2-D covariance < 1e-12
  std::size_t culled = 0;    // behind a pinhole camera or off screen
};

// Tile-based front-to-back splatting. Gaussians are depth sorted (ties broken
// by their attributes, so input order never matters) and each footprint is
// truncated at 3 sigma.
SplatImage rasterize(std::span<const Gaussian3D> gaussians, const Camera& camera,
                     const RenderOptions& options = {}, RenderStats* stats = nullptr);

// Rows of the template skin weights of the nearest canonical vertex of each
// point (N_points x J).
Eigen::MatrixXd attach_nearest_vertex(const Points3& points, const SkinnedTemplate& tmpl);

// Blends the joint transforms per Gaussian: position x' = sum w_j (R_j x + t_j);
// the rotation part of the blend is orthonormalized (polar decomposition) and
// composed onto the Gaussian's quaternion. Scales are untouched.
std::vector<Gaussian3D> deform_gaussians(std::span<const Gaussian3D> gaussians,
                                         const Eigen::MatrixXd& attachment,
                                         std::span<const RigidTransform> transforms);
std::vector<Gaussian3D> lbs_deform_gaussians(std::span<const Gaussian3D> gaussians,
                                             const SkinnedTemplate& tmpl, const SmplxPose& pose,
                                             const Eigen::MatrixXd& attachment);

// Nearest rotation to `m` (polar factor, det +1).
Eigen::Matrix3d polar_rotation(const Eigen::Matrix3d& m);

inline constexpr double kPsnrCap = 99.0;

// 10 log10(max^2 / MSE), 99 dB when MSE < 1e-12.
double psnr(const Image& a, const Image& b, double max_value = 1.0);
// Gaussian-window SSIM (11x11, sigma 1.5, K1 0.01, K2 0.03, data range 1)
// averaged over every window position fully inside the image and over
// channels. Images must be at least 11x11.
double ssim(const Image& a, const Image& b);

}  // namespace lgc
