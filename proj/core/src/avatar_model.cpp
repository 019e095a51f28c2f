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

#include "lgc/avatar_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lgc/errors.hpp"

namespace lgc {
namespace {

constexpr double kWeightSumTolerance = 1e-6;

int clamp_index(double t, int n) {
  const int i = static_cast<int>(std::floor(t * n));
  return std::clamp(i, 0, n - 1);
}

int pixel_col(const BoundingBox& bbox, bool front, double x, int width) {
  const double ext = bbox.max.x() - bbox.min.x();
  const double t = front ? (x - bbox.min.x()) / ext : (bbox.max.x() - x) / ext;
  return clamp_index(t, width);
}

int pixel_row(const BoundingBox& bbox, double y, int height) {
  return clamp_index((bbox.max.y() - y) / (bbox.max.y() - bbox.min.y()), height);
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

bool SmplxPose::all_finite() const {
  auto finite = [](float v) { return std::isfinite(v); };
  return std::all_of(theta.begin(), theta.end(), finite) &&
         std::all_of(beta.begin(), beta.end(), finite) &&
         std::all_of(psi.begin(), psi.end(), finite);
}

void SkinnedTemplate::validate() const {
  const Eigen::Index n = vertex_count();
  const int j = joint_count();
  if (j <= 0) throw InvalidArgument("template: joint_count must be positive");
  if (rest_joint_positions.rows() != j) {
    throw InvalidArgument("template: rest_joint_positions has " +
                          std::to_string(rest_joint_positions.rows()) + " rows, expected " +
                          std::to_string(j));
  }
  if (skin_weights.rows() != n || skin_weights.cols() != j) {
    throw InvalidArgument("template: skin_weights must be " + std::to_string(n) + "x" +
                          std::to_string(j));
  }
  if (canonical_normals.rows() != 0 && canonical_normals.rows() != n) {
    throw InvalidArgument("template: canonical_normals row count mismatch");
  }
  if (!canonical_vertices.allFinite() || !rest_joint_positions.allFinite() ||
      !skin_weights.allFinite()) {
    throw InvalidArgument("template: non-finite values");
  }
  for (Eigen::Index v = 0; v < n; ++v) {
    if ((skin_weights.row(v).array() < 0.0).any()) {
      throw InvalidArgument("template: negative skin weight at vertex " + std::to_string(v));
    }
    if (std::abs(skin_weights.row(v).sum() - 1.0) > kWeightSumTolerance) {
      throw InvalidArgument("template: skin weights of vertex " + std::to_string(v) +
                            " do not sum to 1");
    }
  }
  (void)topological_order();
}

std::vector<int> SkinnedTemplate::topological_order() const {
  const int j = joint_count();
  std::vector<std::vector<int>> children(static_cast<std::size_t>(j));
  int root = -1;
  for (int i = 0; i < j; ++i) {
    const int p = parents[static_cast<std::size_t>(i)];
    if (p == kRootParent) {
      if (root != -1) throw InvalidArgument("template: more than one root joint");
      root = i;
    } else if (p < 0 || p >= j || p == i) {
      throw InvalidArgument("template: joint " + std::to_string(i) + " has invalid parent " +
                            std::to_string(p));
    } else {
      children[static_cast<std::size_t>(p)].push_back(i);
    }
  }
  if (root == -1) throw InvalidArgument("template: no root joint");
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(j));
  order.push_back(root);
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (int c : children[static_cast<std::size_t>(order[k])]) order.push_back(c);
  }
  if (static_cast<int>(order.size()) != j) {
    throw InvalidArgument("template: parent links contain a cycle");
  }
  return order;
}

Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

std::vector<RigidTransform> skinning_transforms(const SkinnedTemplate& tmpl,
                                                const SmplxPose& pose) {
  const int j = tmpl.joint_count();
  if (pose.theta.size() != static_cast<std::size_t>(3 * j)) {
    throw InvalidArgument("pose theta has " + std::to_string(pose.theta.size()) +
                          " values, template needs " + std::to_string(3 * j));
  }
  std::vector<RigidTransform> world(static_cast<std::size_t>(j));
  for (int joint : tmpl.topological_order()) {
    const auto k = static_cast<std::size_t>(joint);
    const Eigen::Vector3d aa(pose.theta[3 * k], pose.theta[3 * k + 1], pose.theta[3 * k + 2]);
    const int parent = tmpl.parents[k];
    RigidTransform local;
    local.rotation = axis_angle_to_matrix(aa);
    if (parent == kRootParent) {
      local.translation = tmpl.rest_joint_positions.row(joint).transpose();
      world[k] = local;
    } else {
      local.translation =
          (tmpl.rest_joint_positions.row(joint) - tmpl.rest_joint_positions.row(parent))
              .transpose();
      world[k] = world[static_cast<std::size_t>(parent)] * local;
    }
  }
  for (int joint = 0; joint < j; ++joint) {
    auto& g = world[static_cast<std::size_t>(joint)];
    g.translation -= g.rotation * tmpl.rest_joint_positions.row(joint).transpose();
  }
  return world;
}

Points3 blend_points(const Points3& points, const Eigen::MatrixXd& weights,
                     std::span<const RigidTransform> transforms) {
  if (weights.rows() != points.rows() ||
      weights.cols() != static_cast<Eigen::Index>(transforms.size())) {
    throw InvalidArgument("blend_points: weights must be " + std::to_string(points.rows()) +
                          "x" + std::to_string(transforms.size()));
  }
  Points3 out(points.rows(), 3);
  for (Eigen::Index v = 0; v < points.rows(); ++v) {
    const Eigen::Vector3d p = points.row(v).transpose();
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (Eigen::Index j = 0; j < weights.cols(); ++j) {
      const double w = weights(v, j);
      if (w != 0.0) acc += w * transforms[static_cast<std::size_t>(j)].apply(p);
    }
    out.row(v) = acc.transpose();
  }
  return out;
}

Points3 pose_template(const SkinnedTemplate& tmpl, const SmplxPose& pose) {
  const auto transforms = skinning_transforms(tmpl, pose);
  if (std::all_of(pose.theta.begin(), pose.theta.end(), [](float v) { return v == 0.0f; })) {
    return tmpl.canonical_vertices;
  }
  return blend_points(tmpl.canonical_vertices, tmpl.skin_weights, transforms);
}

Mask CanonicalLayout::mask(bool front) const {
  Mask m(height, width);
  const auto& owners = front ? front_vertex : back_vertex;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      m.set(y, x, owners[static_cast<std::size_t>(y) * width + x] >= 0);
    }
  }
  return m;
}

CanonicalLayout build_layout(const SkinnedTemplate& tmpl, int height, int width) {
  if (height <= 0 || width <= 0) throw InvalidArgument("layout resolution must be positive");
  if (tmpl.bbox.degenerate()) throw InvalidArgument("template bbox is degenerate");
  const bool use_normals = tmpl.canonical_normals.rows() == tmpl.vertex_count();
  const auto pixels = static_cast<std::size_t>(height) * width;
  CanonicalLayout layout{height, width, std::vector<std::int32_t>(pixels, -1),
                         std::vector<std::int32_t>(pixels, -1), Image(height, width, 1),
                         Image(height, width, 1)};
  std::vector<double> best_front(pixels, std::numeric_limits<double>::infinity());
  std::vector<double> best_back(pixels, std::numeric_limits<double>::infinity());
  const BoundingBox& bb = tmpl.bbox;
  const double ext_z = bb.max.z() - bb.min.z();
  for (Eigen::Index v = 0; v < tmpl.vertex_count(); ++v) {
    const Eigen::Vector3d p = tmpl.canonical_vertices.row(v).transpose();
    const bool front =
        use_normals ? tmpl.canonical_normals(v, 2) >= 0.0 : p.z() >= 0.0;
    const int row = pixel_row(bb, p.y(), height);
    const int col = pixel_col(bb, front, p.x(), width);
    const auto idx = static_cast<std::size_t>(row) * width + col;
    // Front camera looks along -z, back camera along +z.
    const double depth = front ? bb.max.z() - p.z() : p.z() - bb.min.z();
    auto& best = front ? best_front : best_back;
    if (depth < best[idx]) {
      best[idx] = depth;
      (front ? layout.front_vertex : layout.back_vertex)[idx] = static_cast<std::int32_t>(v);
      (front ? layout.depth_front : layout.depth_back).at(row, col, 0) =
          static_cast<float>(std::clamp((p.z() - bb.min.z()) / ext_z, 0.0, 1.0));
    }
  }
  return layout;
}

PoseMapPair render_pose_maps(const Points3& posed, const SkinnedTemplate& tmpl,
                             const CanonicalLayout& layout) {
  if (posed.rows() != tmpl.vertex_count()) {
    throw InvalidArgument("render_pose_maps: " + std::to_string(posed.rows()) +
                          " posed vertices for a template with " +
                          std::to_string(tmpl.vertex_count()));
  }
  if (tmpl.bbox.degenerate()) throw InvalidArgument("template bbox is degenerate");
  const int h = layout.height;
  const int w = layout.width;
  PoseMapPair maps{Image(h, w, 3), Image(h, w, 3), layout.mask(true), layout.mask(false)};
  const Eigen::Vector3d lo = tmpl.bbox.min;
  const Eigen::Vector3d ext = tmpl.bbox.extent();
  auto paint = [&](const std::vector<std::int32_t>& owners, Image& img) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::int32_t v = owners[static_cast<std::size_t>(y) * w + x];
        if (v < 0) continue;
        for (int c = 0; c < 3; ++c) {
          const double t = (posed(v, c) - lo[c]) / ext[c];
          img.at(y, x, c) = static_cast<float>(std::clamp(t, 0.0, 1.0));
        }
      }
    }
  };
  paint(layout.front_vertex, maps.front);
  paint(layout.back_vertex, maps.back);
  return maps;
}

PoseMapPair render_pose_maps(const Points3& posed, const SkinnedTemplate& tmpl, int height,
                             int width) {
  return render_pose_maps(posed, tmpl, build_layout(tmpl, height, width));
}

Eigen::Vector3d back_project(const BoundingBox& bbox, bool front, int row, int col, int height,
                             int width, double normalized_depth) {
  const Eigen::Vector3d ext = bbox.extent();
  const double u = (col + 0.5) / width;
  const double x = front ? bbox.min.x() + u * ext.x() : bbox.max.x() - u * ext.x();
  const double y = bbox.max.y() - (row + 0.5) / height * ext.y();
  const double z = bbox.min.z() + normalized_depth * ext.z();
  return {x, y, z};
}

std::vector<Gaussian3D> extract_gaussians(const GaussianMapPair& maps, const BoundingBox& bbox) {
  std::vector<Gaussian3D> out;
  auto run = [&](const Image& img, const Mask& mask, const Image& depth, bool front) {
    if (img.channels() != gmap::kChannels || mask.height() != img.height() ||
        mask.width() != img.width()) {
      throw InvalidArgument("extract_gaussians: malformed Gaussian map");
    }
    const bool has_depth = !depth.empty();
    if (has_depth && (depth.height() != img.height() || depth.width() != img.width())) {
      throw InvalidArgument("extract_gaussians: depth map resolution mismatch");
    }
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        if (!mask.get(y, x)) continue;
        const auto px = img.pixel(y, x);
        const double nd = has_depth ? depth.at(y, x, 0) : (front ? 1.0 : 0.0);
        Gaussian3D g;
        g.position = back_project(bbox, front, y, x, img.height(), img.width(), nd) +
                     Eigen::Vector3d(px[gmap::kOffset], px[gmap::kOffset + 1],
                                     px[gmap::kOffset + 2]);
        for (int c = 0; c < 3; ++c) g.scale[c] = std::exp(double{px[gmap::kLogScale + c]});
        Eigen::Quaterniond q(px[gmap::kRotation], px[gmap::kRotation + 1],
                             px[gmap::kRotation + 2], px[gmap::kRotation + 3]);
        const double n = q.norm();
        g.rotation = n > 0.0 ? Eigen::Quaterniond(q.coeffs() / n) : Eigen::Quaterniond::Identity();
        g.opacity = logistic(px[gmap::kOpacity]);
        for (int c = 0; c < 3; ++c) g.color[c] = std::clamp(double{px[gmap::kColor + c]}, 0.0, 1.0);
        out.push_back(g);
      }
    }
  };
  run(maps.front, maps.mask_front, maps.depth_front, true);
  run(maps.back, maps.mask_back, maps.depth_back, false);
  return out;
}

Bytes serialize_template(const SkinnedTemplate& tmpl) {
  tmpl.validate();
  ByteWriter w;
  w.tag("HGTM");
  const auto n = static_cast<std::uint32_t>(tmpl.vertex_count());
  const auto j = static_cast<std::uint32_t>(tmpl.joint_count());
  w.u32(n);
  w.u32(j);
  for (Eigen::Index v = 0; v < tmpl.vertex_count(); ++v) {
    for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(tmpl.canonical_vertices(v, c)));
  }
  for (std::int32_t p : tmpl.parents) w.i32(p);
  for (Eigen::Index k = 0; k < tmpl.joint_count(); ++k) {
    for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(tmpl.rest_joint_positions(k, c)));
  }
  for (Eigen::Index v = 0; v < tmpl.vertex_count(); ++v) {
    for (Eigen::Index k = 0; k < tmpl.joint_count(); ++k) {
      w.f32(static_cast<float>(tmpl.skin_weights(v, k)));
    }
  }
  for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(tmpl.bbox.min[c]));
  for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(tmpl.bbox.max[c]));
  return w.take();
}

SkinnedTemplate parse_template(std::span<const std::uint8_t> data) {
  ByteReader r(data, "template");
  r.expect_tag("HGTM");
  const std::uint32_t n = r.u32();
  const std::uint32_t j = r.u32();
  // Size check before allocating anything proportional to header values.
  const std::uint64_t floats = 3ull * n + 3ull * j + 1ull * n * j + 6;
  if (r.remaining() != 4 * floats + 4ull * j) {
    throw DecodeError("template: payload is " + std::to_string(r.remaining()) +
                      " bytes, header implies " + std::to_string(4 * floats + 4ull * j));
  }
  SkinnedTemplate t;
  t.canonical_vertices.resize(n, 3);
  for (std::uint32_t v = 0; v < n; ++v) {
    for (int c = 0; c < 3; ++c) t.canonical_vertices(v, c) = r.f32();
  }
  t.parents.resize(j);
  for (auto& p : t.parents) p = r.i32();
  t.rest_joint_positions.resize(j, 3);
  for (std::uint32_t k = 0; k < j; ++k) {
    for (int c = 0; c < 3; ++c) t.rest_joint_positions(k, c) = r.f32();
  }
  t.skin_weights.resize(n, j);
  for (std::uint32_t v = 0; v < n; ++v) {
    for (std::uint32_t k = 0; k < j; ++k) t.skin_weights(v, k) = r.f32();
  }
  for (int c = 0; c < 3; ++c) t.bbox.min[c] = r.f32();
  for (int c = 0; c < 3; ++c) t.bbox.max[c] = r.f32();
  try {
    t.validate();
  } catch (const InvalidArgument& e) {
    throw DecodeError(std::string("template: ") + e.what());
  }
  return t;
}

void save_template(const SkinnedTemplate& tmpl, const std::filesystem::path& path) {
  write_file(path, serialize_template(tmpl));
}

SkinnedTemplate load_template(const std::filesystem::path& path) {
  return parse_template(read_file(path));
}

PoseDims common_dims(std::span<const SmplxPose> frames) {
  if (frames.empty()) return {};
  const PoseDims d{static_cast<std::uint32_t>(frames[0].theta.size()),
                   static_cast<std::uint32_t>(frames[0].beta.size()),
                   static_cast<std::uint32_t>(frames[0].psi.size())};
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const PoseDims di{static_cast<std::uint32_t>(frames[i].theta.size()),
                      static_cast<std::uint32_t>(frames[i].beta.size()),
                      static_cast<std::uint32_t>(frames[i].psi.size())};
    if (di != d) {
      throw InvalidArgument("frame " + std::to_string(i) +
                            " has dimensions different from frame 0");
    }
  }
  return d;
}

Bytes serialize_poses(std::span<const SmplxPose> frames) {
  const PoseDims d = common_dims(frames);
  ByteWriter w;
  w.tag("HGPS");
  w.u32(static_cast<std::uint32_t>(frames.size()));
  w.u32(d.theta);
  w.u32(d.beta);
  w.u32(d.psi);
  for (const auto& f : frames) {
    for (float v : f.theta) w.f32(v);
    for (float v : f.beta) w.f32(v);
    for (float v : f.psi) w.f32(v);
  }
  return w.take();
}

std::vector<SmplxPose> parse_poses(std::span<const std::uint8_t> data) {
  ByteReader r(data, "pose sequence");
  r.expect_tag("HGPS");
  const std::uint32_t count = r.u32();
  const PoseDims d{r.u32(), r.u32(), r.u32()};
  const std::uint64_t per_frame = 4ull * (d.theta + d.beta + d.psi);
  if (r.remaining() != per_frame * count) {
    throw DecodeError("pose sequence: payload size does not match header");
  }
  std::vector<SmplxPose> frames(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto& f = frames[i];
    f.frame_index = i;
    f.theta.resize(d.theta);
    f.beta.resize(d.beta);
    f.psi.resize(d.psi);
    for (auto& v : f.theta) v = r.f32();
    for (auto& v : f.beta) v = r.f32();
    for (auto& v : f.psi) v = r.f32();
  }
  return frames;
}

void save_poses(std::span<const SmplxPose> frames, const std::filesystem::path& path) {
  write_file(path, serialize_poses(frames));
}

std::vector<SmplxPose> load_poses(const std::filesystem::path& path) {
  return parse_poses(read_file(path));
}

}  // namespace lgc
