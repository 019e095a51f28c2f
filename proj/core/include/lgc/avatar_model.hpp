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
#include <Eigen/Geometry>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lgc/byte_io.hpp"
#include "lgc/image.hpp"

namespace lgc {

using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

inline constexpr std::int32_t kRootParent = -1;
inline constexpr int kDefaultPoseMapResolution = 256;

// Per-frame body parameters: per-joint axis-angle rotations, shape and
// expression coefficients. Values are kept as f32 so the motion codec can
// reproduce them bit for bit.
struct SmplxPose {
  std::vector<float> theta;
  std::vector<float> beta;
  std::vector<float> psi;
  std::uint32_t frame_index = 0;

  std::size_t value_count() const { return theta.size() + beta.size() + psi.size(); }
  bool all_finite() const;
  friend bool operator==(const SmplxPose&, const SmplxPose&) = default;
};

struct BoundingBox {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  Eigen::Vector3d extent() const { return max - min; }
  bool degenerate() const { return (max.array() <= min.array()).any(); }
};

// Canonical skinned mesh standing in for the parametric body model. Only the
// LBS data is carried; blend shapes are not modelled.
struct SkinnedTemplate {
  Points3 canonical_vertices;          // N x 3, meters
  std::vector<std::int32_t> parents;   // J entries, root = kRootParent
  Points3 rest_joint_positions;        // J x 3, meters
  Eigen::MatrixXd skin_weights;        // N x J, rows sum to 1
  BoundingBox bbox;
  // Optional outward normals (N x 3). Empty means "use the sign of canonical z"
  // for the front/back split.
  Points3 canonical_normals;

  int joint_count() const { return static_cast<int>(parents.size()); }
  Eigen::Index vertex_count() const { return canonical_vertices.rows(); }

  // Throws InvalidArgument on any broken invariant (shapes, tree, weights).
  void validate() const;
  // Joint indices ordered so every parent precedes its children.
  std::vector<int> topological_order() const;
};

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
};

Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& axis_angle);

// Skinning transforms A_j = G_j * [I | -rest_j], i.e. the map from canonical
// space to posed space for points rigidly attached to joint j. There is no
// global translation in SmplxPose, so the root stays at its rest position.
std::vector<RigidTransform> skinning_transforms(const SkinnedTemplate& tmpl, const SmplxPose& pose);

// v' = sum_j w_j (R_j v + t_j), one row of `weights` per point.
Points3 blend_points(const Points3& points, const Eigen::MatrixXd& weights,
                     std::span<const RigidTransform> transforms);

Points3 pose_template(const SkinnedTemplate& tmpl, const SmplxPose& pose);

struct PoseMapPair {
  Image front;  // H x W x 3, normalized posed position
  Image back;
  Mask mask_front;
  Mask mask_back;

  int height() const { return front.height(); }
  int width() const { return front.width(); }
  friend bool operator==(const PoseMapPair&, const PoseMapPair&) = default;
};

// Which vertex owns each pixel of the front and back orthographic views of
// the canonical template. Pixel placement never depends on the pose, so the
// masks are shared by every frame of a sequence.
struct CanonicalLayout {
  int height = 0;
  int width = 0;
  std::vector<std::int32_t> front_vertex;  // -1 = empty pixel
  std::vector<std::int32_t> back_vertex;
  Image depth_front;  // H x W x 1, bbox-normalized canonical z of the owner
  Image depth_back;

  Mask mask(bool front) const;
};

CanonicalLayout build_layout(const SkinnedTemplate& tmpl, int height, int width);

// Pose maps for posed vertices (N x 3, same order as the template). Pixels
// are placed by the canonical layout; colors are the posed positions
// normalized by the template bbox and clamped to [0,1].
PoseMapPair render_pose_maps(const Points3& posed, const SkinnedTemplate& tmpl,
                             const CanonicalLayout& layout);
PoseMapPair render_pose_maps(const Points3& posed, const SkinnedTemplate& tmpl, int height,
                             int width);

struct Gaussian3D {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d scale = Eigen::Vector3d::Ones();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  double opacity = 1.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
};

// Gaussian map channel layout.
namespace gmap {
inline constexpr int kOffset = 0;     // 3
inline constexpr int kLogScale = 3;   // 3
inline constexpr int kRotation = 6;   // 4, (w, x, y, z)
inline constexpr int kOpacity = 10;   // 1, logit
inline constexpr int kColor = 11;     // 3
inline constexpr int kChannels = 14;
}  // namespace gmap

struct GaussianMapPair {
  Image front;  // H x W x 14
  Image back;
  Mask mask_front;
  Mask mask_back;
  // Optional H x W x 1 canonical depth per pixel (bbox-normalized). When
  // absent a pixel back-projects onto the bbox face of its view.
  Image depth_front;
  Image depth_back;

  int height() const { return front.height(); }
  int width() const { return front.width(); }
};

// Pixel center of (row, col) in the given view, back-projected to canonical
// space. `normalized_depth` is the canonical z normalized by the bbox.
Eigen::Vector3d back_project(const BoundingBox& bbox, bool front, int row, int col, int height,
                             int width, double normalized_depth);

// One Gaussian per masked pixel: front map first, then back, row-major.
std::vector<Gaussian3D> extract_gaussians(const GaussianMapPair& maps, const BoundingBox& bbox);

// Binary formats (little-endian): "HGTM" template, "HGPS" pose sequence.
Bytes serialize_template(const SkinnedTemplate& tmpl);
SkinnedTemplate parse_template(std::span<const std::uint8_t> data);
void save_template(const SkinnedTemplate& tmpl, const std::filesystem::path& path);
SkinnedTemplate load_template(const std::filesystem::path& path);

struct PoseDims {
  std::uint32_t theta = 0;
  std::uint32_t beta = 0;
  std::uint32_t psi = 0;
  friend bool operator==(const PoseDims&, const PoseDims&) = default;
};

Bytes serialize_poses(std::span<const SmplxPose> frames);
std::vector<SmplxPose> parse_poses(std::span<const std::uint8_t> data);
void save_poses(std::span<const SmplxPose> frames, const std::filesystem::path& path);
std::vector<SmplxPose> load_poses(const std::filesystem::path& path);

// Throws InvalidArgument unless every frame has the dimensions of frames[0].
PoseDims common_dims(std::span<const SmplxPose> frames);

}  // namespace lgc
