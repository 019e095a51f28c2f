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

#include "lgc/pose_space.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lgc/errors.hpp"

namespace lgc {

void PcaBasis::validate(double tolerance) const {
  if (components.rows() != mean.size() || components.cols() != sigma.size()) {
    throw InvalidArgument("pca basis: inconsistent dimensions");
  }
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("pca basis: k must be positive");
  if ((sigma.array() <= 0.0).any()) throw InvalidArgument("pca basis: sigma must be positive");
  const Eigen::MatrixXd gram = components.transpose() * components;
  const double err = (gram - Eigen::MatrixXd::Identity(rank(), rank())).cwiseAbs().maxCoeff();
  if (rank() > 0 && err > tolerance) {
    throw InvalidArgument("pca basis: columns are not orthonormal (error " + std::to_string(err) + ")");
  }
}

PcaBasis fit_pca(const Eigen::MatrixXd& samples, int d, double k) {
  const Eigen::Index m = samples.rows();
  const Eigen::Index dim = samples.cols();
  if (d < 1) throw InvalidArgument("fit_pca: need at least one component");
  if (m < d) {
    throw InvalidArgument("fit_pca: " + std::to_string(m) + " samples cannot support " +
                          std::to_string(d) + " components");
  }
  if (d > dim) throw InvalidArgument("fit_pca: more components than dimensions");
  if (!samples.allFinite()) throw InvalidArgument("fit_pca: non-finite training data");
  if (!(k > 0.0)) throw InvalidArgument("fit_pca: k must be positive");

  PcaBasis b;
  b.k = k;
  b.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - b.mean.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() > 0 ? s[0] : 0.0;
  const double tol = static_cast<double>(std::max(m, dim)) * std::numeric_limits<double>::epsilon() * smax;
  for (int i = 0; i < d; ++i) {
    if (i >= s.size() || s[i] <= tol || s[i] == 0.0) {
      throw InvalidArgument("fit_pca: component " + std::to_string(i) +
                            " has no variance (data rank is below " + std::to_string(d) + ")");
    }
  }
  b.components = svd.matrixV().leftCols(d);
  for (int i = 0; i < d; ++i) {
    Eigen::Index arg = 0;
    b.components.col(i).cwiseAbs().maxCoeff(&arg);
    if (b.components(arg, i) < 0.0) b.components.col(i) *= -1.0;
  }
  b.sigma.resize(d);
  for (int i = 0; i < d; ++i) {
    b.sigma[i] = std::max(s[i] / std::sqrt(static_cast<double>(m)), kSigmaFloor);
  }
  return b;
}

Eigen::VectorXd pca_coefficients(const PcaBasis& basis, const Eigen::VectorXd& x) {
  if (x.size() != basis.dim()) {
    throw InvalidArgument("pca: input has dimension " + std::to_string(x.size()) + ", basis expects " +
                          std::to_string(basis.dim()));
  }
  return basis.components.transpose() * (x - basis.mean);
}

Eigen::VectorXd project_clip(const PcaBasis& basis, const Eigen::VectorXd& x) {
  const Eigen::VectorXd band = basis.k * basis.sigma;
  const Eigen::VectorXd c = pca_coefficients(basis, x).cwiseMin(band).cwiseMax(-band);
  return basis.components * c + basis.mean;
}

Bytes serialize_basis(const PcaBasis& basis) {
  basis.validate();
  ByteWriter w;
  w.tag("HGPC");
  w.u32(static_cast<std::uint32_t>(basis.dim()));
  w.u32(static_cast<std::uint32_t>(basis.rank()));
  for (Eigen::Index i = 0; i < basis.dim(); ++i) w.f32(static_cast<float>(basis.mean[i]));
  for (Eigen::Index c = 0; c < basis.rank(); ++c)
    for (Eigen::Index r = 0; r < basis.dim(); ++r) w.f32(static_cast<float>(basis.components(r, c)));
  for (Eigen::Index i = 0; i < basis.rank(); ++i) w.f32(static_cast<float>(basis.sigma[i]));
  w.f32(static_cast<float>(basis.k));
  return w.take();
}

PcaBasis parse_basis(std::span<const std::uint8_t> data) {
  ByteReader r(data, "pca basis");
  r.expect_tag("HGPC");
  const std::uint32_t dim = r.u32();
  const std::uint32_t d = r.u32();
  const std::uint64_t floats = std::uint64_t{dim} + std::uint64_t{dim} * d + d + 1;
  if (r.remaining() != 4 * floats) throw DecodeError("pca basis: size does not match header");
  PcaBasis b;
  b.mean.resize(dim);
  b.components.resize(dim, d);
  b.sigma.resize(d);
  for (std::uint32_t i = 0; i < dim; ++i) b.mean[i] = r.f32();
  for (std::uint32_t c = 0; c < d; ++c)
    for (std::uint32_t row = 0; row < dim; ++row) b.components(row, c) = r.f32();
  for (std::uint32_t i = 0; i < d; ++i) b.sigma[i] = r.f32();
  b.k = r.f32();
  try {
    // Stored as f32, so orthonormality only holds to single precision.
    b.validate(1e-4);
  } catch (const InvalidArgument& e) {
    throw DecodeError(e.what());
  }
  return b;
}

void save_basis(const PcaBasis& basis, const std::filesystem::path& path) {
  write_file(path, serialize_basis(basis));
}

PcaBasis load_basis(const std::filesystem::path& path) { return parse_basis(read_file(path)); }

Eigen::VectorXd flatten_pose(const SmplxPose& pose) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(pose.value_count()));
  Eigen::Index i = 0;
  for (float x : pose.theta) v[i++] = x;
  for (float x : pose.beta) v[i++] = x;
  for (float x : pose.psi) v[i++] = x;
  return v;
}

Eigen::VectorXd flatten_pose_maps(const PoseMapPair& maps) {
  const auto front = maps.front.data();
  const auto back = maps.back.data();
  Eigen::VectorXd v(static_cast<Eigen::Index>(front.size() + back.size()));
  Eigen::Index i = 0;
  for (float x : front) v[i++] = x;
  for (float x : back) v[i++] = x;
  return v;
}

namespace {

double block_scale(const Eigen::MatrixXd& block) {
  const Eigen::RowVectorXd mu = block.colwise().mean();
  const double total_var = (block.rowwise() - mu).squaredNorm() / static_cast<double>(block.rows());
  return total_var > 1e-12 ? 1.0 / std::sqrt(total_var) : 1.0;
}

}  // namespace

PoseSpace fit_pose_space(std::span<const SmplxPose> poses, std::span<const PoseMapPair> maps,
                         int components, double k) {
  if (poses.empty()) throw InvalidArgument("fit_pose_space: no training poses");
  if (!maps.empty() && maps.size() != poses.size()) {
    throw InvalidArgument("fit_pose_space: pose and pose-map counts differ");
  }
  PoseSpace space;
  space.dims = common_dims(poses);
  space.pose_dim = static_cast<Eigen::Index>(poses[0].value_count());
  const auto m = static_cast<Eigen::Index>(poses.size());
  Eigen::MatrixXd pose_block(m, space.pose_dim);
  for (Eigen::Index i = 0; i < m; ++i) pose_block.row(i) = flatten_pose(poses[i]).transpose();
  if (maps.empty()) {
    space.basis = fit_pca(pose_block, components, k);
    return space;
  }
  space.map_height = maps[0].height();
  space.map_width = maps[0].width();
  space.posemap_dim = 6 * static_cast<Eigen::Index>(space.map_height) * space.map_width;
  Eigen::MatrixXd map_block(m, space.posemap_dim);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& f = maps[static_cast<std::size_t>(i)];
    if (f.height() != space.map_height || f.width() != space.map_width) {
      throw InvalidArgument("fit_pose_space: pose maps differ in resolution");
    }
    map_block.row(i) = flatten_pose_maps(f).transpose();
  }
  space.pose_scale = block_scale(pose_block);
  space.posemap_scale = block_scale(map_block);
  Eigen::MatrixXd joint(m, space.pose_dim + space.posemap_dim);
  joint << pose_block * space.pose_scale, map_block * space.posemap_scale;
  space.basis = fit_pca(joint, components, k);
  return space;
}

ProjectedPose project_pose(const PoseSpace& space, const SmplxPose& pose, const PoseMapPair* maps) {
  const PoseDims dims{static_cast<std::uint32_t>(pose.theta.size()),
                      static_cast<std::uint32_t>(pose.beta.size()),
                      static_cast<std::uint32_t>(pose.psi.size())};
  if (dims != space.dims) throw InvalidArgument("project_pose: pose dimensions differ from training");
  ProjectedPose out;
  Eigen::VectorXd projected;
  if (space.joint()) {
    if (maps == nullptr) throw InvalidArgument("project_pose: joint pose space needs pose maps");
    if (maps->height() != space.map_height || maps->width() != space.map_width) {
      throw InvalidArgument("project_pose: pose-map resolution differs from training");
    }
    Eigen::VectorXd x(space.pose_dim + space.posemap_dim);
    x << flatten_pose(pose) * space.pose_scale, flatten_pose_maps(*maps) * space.posemap_scale;
    projected = project_clip(space.basis, x);
    PoseMapPair pm = *maps;
    const Eigen::VectorXd block = projected.tail(space.posemap_dim) / space.posemap_scale;
    const auto plane = static_cast<Eigen::Index>(pm.front.data().size());
    auto fill = [&](Image& img, const Mask& mask, Eigen::Index offset) {
      auto data = img.data();
      for (int y = 0; y < img.height(); ++y) {
        for (int xx = 0; xx < img.width(); ++xx) {
          for (int c = 0; c < 3; ++c) {
            const auto i = (static_cast<Eigen::Index>(y) * img.width() + xx) * 3 + c;
            data[static_cast<std::size_t>(i)] =
                mask.get(y, xx) ? static_cast<float>(std::clamp(block[offset + i], 0.0, 1.0)) : 0.0f;
          }
        }
      }
    };
    fill(pm.front, pm.mask_front, 0);
    fill(pm.back, pm.mask_back, plane);
    out.maps = std::move(pm);
    projected = projected.head(space.pose_dim) / space.pose_scale;
  } else {
    projected = project_clip(space.basis, flatten_pose(pose));
  }
  out.pose.frame_index = pose.frame_index;
  Eigen::Index i = 0;
  for (std::uint32_t j = 0; j < dims.theta; ++j) out.pose.theta.push_back(static_cast<float>(projected[i++]));
  for (std::uint32_t j = 0; j < dims.beta; ++j) out.pose.beta.push_back(static_cast<float>(projected[i++]));
  for (std::uint32_t j = 0; j < dims.psi; ++j) out.pose.psi.push_back(static_cast<float>(projected[i++]));
  return out;
}

}  // namespace lgc
