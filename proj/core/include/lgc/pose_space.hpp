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

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "lgc/avatar_model.hpp"
#include "lgc/byte_io.hpp"

namespace lgc {

// Low-rank model of the training pose distribution.
struct PcaBasis {
  Eigen::MatrixXd components;  // D x d, orthonormal columns
  Eigen::VectorXd mean;        // D
  Eigen::VectorXd sigma;       // d, per-component std over the training set
  double k = 3.0;              // clipping band in units of sigma

  Eigen::Index dim() const { return mean.size(); }
  Eigen::Index rank() const { return components.cols(); }
  // Throws InvalidArgument on shape mismatch, non-orthonormal columns
  // (beyond `tolerance`) or nonpositive sigma / k.
  void validate(double tolerance = 1e-6) const;
};

inline constexpr double kSigmaFloor = 1e-8;

// PCA of the rows of `samples` (M x D). Components are the top-d right
// singular vectors of the centered data, each signed so that its
// largest-magnitude entry is positive. Throws InvalidArgument if d exceeds
// the numerical rank, naming the first deficient component.
PcaBasis fit_pca(const Eigen::MatrixXd& samples, int d, double k = 3.0);

// S^T (x - mu)
Eigen::VectorXd pca_coefficients(const PcaBasis& basis, const Eigen::VectorXd& x);

// S * clamp(S^T (x - mu), -k sigma, k sigma) + mu
Eigen::VectorXd project_clip(const PcaBasis& basis, const Eigen::VectorXd& x);

// "HGPC" basis file: u32 D, u32 d, f32 mu, f32 S (column-major), f32 sigma, f32 k.
Bytes serialize_basis(const PcaBasis& basis);
PcaBasis parse_basis(std::span<const std::uint8_t> data);
void save_basis(const PcaBasis& basis, const std::filesystem::path& path);
PcaBasis load_basis(const std::filesystem::path& path);

// Pose space over body parameters, optionally joined with the flattened pose
// maps. In joint mode each block is scaled so its total training variance is
// one before the PCA, so neither block swamps the other.
struct PoseSpace {
  PcaBasis basis;
  Eigen::Index pose_dim = 0;     // theta + beta + psi
  Eigen::Index posemap_dim = 0;  // 0 in pose-only mode, else 6 * H * W
  PoseDims dims;
  int map_height = 0;
  int map_width = 0;
  double pose_scale = 1.0;
  double posemap_scale = 1.0;

  bool joint() const { return posemap_dim > 0; }
};

// Pose-only when `maps` is empty; otherwise maps.size() must equal poses.size().
PoseSpace fit_pose_space(std::span<const SmplxPose> poses, std::span<const PoseMapPair> maps,
                         int components, double k);

struct ProjectedPose {
  SmplxPose pose;
  std::optional<PoseMapPair> maps;  // joint mode only
};

// Projects a novel pose (and its pose maps in joint mode) into the training
// distribution. The pose-map block is rebuilt directly from the projected
// vector, clamped to [0,1] and re-masked with the input masks.
ProjectedPose project_pose(const PoseSpace& space, const SmplxPose& pose, const PoseMapPair* maps);

Eigen::VectorXd flatten_pose(const SmplxPose& pose);
Eigen::VectorXd flatten_pose_maps(const PoseMapPair& maps);

}  // namespace lgc
