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

#include "lgc/renderer.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "lgc/errors.hpp"

namespace lgc {

void Camera::validate() const {
  if (width <= 0 || height <= 0) throw InvalidArgument("camera: image size must be positive");
  const double err = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (err > 1e-6) throw InvalidArgument("camera: rotation is not orthonormal");
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("camera: focal/scale must be positive");
  if (!translation.allFinite() || !background.allFinite() || !std::isfinite(cx) || !std::isfinite(cy)) {
    throw InvalidArgument("camera: non-finite parameters");
  }
}

Camera parse_camera(std::string_view text) {
  Camera cam;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto read = [&](auto&... vals) {
      if (!((ls >> vals) && ...)) {
        throw InvalidArgument("camera file line " + std::to_string(line_no) + ": bad value for " + key);
      }
    };
    if (key == "mode") {
      std::string m;
      read(m);
      if (m == "orthographic") cam.mode = Projection::kOrthographic;
      else if (m == "pinhole") cam.mode = Projection::kPinhole;
      else throw InvalidArgument("camera file: unknown mode " + m);
    } else if (key == "rotation") {
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) read(cam.rotation(r, c));
    } else if (key == "translation") {
      read(cam.translation.x(), cam.translation.y(), cam.translation.z());
    } else if (key == "intrinsics") {
      read(cam.fx, cam.fy, cam.cx, cam.cy);
    } else if (key == "size") {
      read(cam.width, cam.height);
    } else if (key == "background") {
      read(cam.background.x(), cam.background.y(), cam.background.z());
    } else {
      throw InvalidArgument("camera file: unknown key " + key);
    }
  }
  cam.validate();
  return cam;
}

std::string format_camera(const Camera& camera) {
  std::ostringstream out;
  out.precision(17);
  out << "mode " << (camera.mode == Projection::kOrthographic ? "orthographic" : "pinhole") << "\n";
  out << "rotation";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out << ' ' << camera.rotation(r, c);
  out << "\ntranslation " << camera.translation.x() << ' ' << camera.translation.y() << ' '
      << camera.translation.z() << "\n";
  out << "intrinsics " << camera.fx << ' ' << camera.fy << ' ' << camera.cx << ' ' << camera.cy << "\n";
  out << "size " << camera.width << ' ' << camera.height << "\n";
  out << "background " << camera.background.x() << ' ' << camera.background.y() << ' '
      << camera.background.z() << "\n";
  return out.str();
}

Camera load_camera(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_camera(ss.str());
}

void save_camera(const Camera& camera, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << format_camera(camera);
}

namespace {

struct Splat {
  double u = 0, v = 0, depth = 0;
  double ia = 0, ib = 0, ic = 0;  // inverse 2-D covariance [ia ib; ib ic]
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double opacity = 0;
  std::array<double, 17> key{};  // depth first, then every attribute
};

constexpr double kMaxAlpha = 0.999;
constexpr double kCutoffSq = 9.0;  // 3 sigma
constexpr double kMinDet = 1e-12;
constexpr double kNearPlane = 1e-3;

bool project(const Gaussian3D& g, const Camera& cam, Splat& s, RenderStats& stats) {
  const Eigen::Vector3d p = cam.rotation * g.position + cam.translation;
  const Eigen::Matrix3d rot = cam.rotation * g.rotation.normalized().toRotationMatrix();
  const Eigen::Matrix3d cov_view = rot * g.scale.array().square().matrix().asDiagonal() * rot.transpose();
  Eigen::Matrix<double, 2, 3> jac = Eigen::Matrix<double, 2, 3>::Zero();
  if (cam.mode == Projection::kOrthographic) {
    s.u = cam.fx * p.x() + cam.cx;
    s.v = cam.fy * p.y() + cam.cy;
    jac(0, 0) = cam.fx;
    jac(1, 1) = cam.fy;
  } else {
    if (p.z() <= kNearPlane) {
      ++stats.culled;
      return false;
    }
    const double iz = 1.0 / p.z();
    s.u = cam.fx * p.x() * iz + cam.cx;
    s.v = cam.fy * p.y() * iz + cam.cy;
    jac << cam.fx * iz, 0.0, -cam.fx * p.x() * iz * iz,
           0.0, cam.fy * iz, -cam.fy * p.y() * iz * iz;
  }
  s.depth = p.z();
  const Eigen::Matrix2d cov2 = jac * cov_view * jac.transpose();
  const double det = cov2.determinant();
  if (!(det >= kMinDet)) {
    ++stats.singular;
    return false;
  }
  s.ia = cov2(1, 1) / det;
  s.ib = -cov2(0, 1) / det;
  s.ic = cov2(0, 0) / det;
  const double mid = 0.5 * (cov2(0, 0) + cov2(1, 1));
  const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
  const double radius = 3.0 * std::sqrt(lambda_max);
  s.x0 = std::max(0, static_cast<int>(std::ceil(s.u - radius)));
  s.x1 = std::min(cam.width - 1, static_cast<int>(std::floor(s.u + radius)));
  s.y0 = std::max(0, static_cast<int>(std::ceil(s.v - radius)));
  s.y1 = std::min(cam.height - 1, static_cast<int>(std::floor(s.v + radius)));
  if (s.x0 > s.x1 || s.y0 > s.y1) {
    ++stats.culled;
    return false;
  }
  s.color = g.color;
  s.opacity = g.opacity;
  const Eigen::Vector4d q = g.rotation.coeffs();
  s.key = {s.depth, g.position.x(), g.position.y(), g.position.z(), g.scale.x(), g.scale.y(),
           g.scale.z(), q[0], q[1], q[2], q[3], g.opacity, g.color.x(), g.color.y(), g.color.z(),
           0.0, 0.0};
  return true;
}

void composite_tile(const std::vector<Splat>& splats, const std::vector<std::uint32_t>& list,
                    const Camera& cam, int tx0, int ty0, int tx1, int ty1, SplatImage& out) {
  for (int y = ty0; y < ty1; ++y) {
    for (int x = tx0; x < tx1; ++x) {
      double transmittance = 1.0;
      Eigen::Vector3d c = Eigen::Vector3d::Zero();
      for (std::uint32_t idx : list) {
        const Splat& s = splats[idx];
        if (x < s.x0 || x > s.x1 || y < s.y0 || y > s.y1) continue;
        const double dx = x - s.u;
        const double dy = y - s.v;
        const double m = s.ia * dx * dx + 2.0 * s.ib * dx * dy + s.ic * dy * dy;
        if (m > kCutoffSq) continue;
        const double a = std::min(s.opacity * std::exp(-0.5 * m), kMaxAlpha);
        if (a <= 0.0) continue;
        c += s.color * (a * transmittance);
        transmittance *= 1.0 - a;
      }
      c += transmittance * cam.background;
      for (int k = 0; k < 3; ++k) out.color.at(y, x, k) = static_cast<float>(std::clamp(c[k], 0.0, 1.0));
      out.alpha.at(y, x, 0) = static_cast<float>(std::clamp(1.0 - transmittance, 0.0, 1.0));
    }
  }
}

}  // namespace

SplatImage rasterize(std::span<const Gaussian3D> gaussians, const Camera& camera,
                     const RenderOptions& options, RenderStats* stats) {
  camera.validate();
  if (options.tile_size < 1) throw InvalidArgument("rasterize: tile size must be positive");
  RenderStats local;
  std::vector<Splat> splats;
  splats.reserve(gaussians.size());
  for (const auto& g : gaussians) {
    if (!g.position.allFinite() || !g.scale.allFinite() || !g.rotation.coeffs().allFinite() ||
        !std::isfinite(g.opacity) || !g.color.allFinite()) {
      throw InvalidArgument("rasterize: non-finite Gaussian attributes");
    }
    Splat s;
    if (project(g, camera, s, local)) splats.push_back(s);
  }
  std::sort(splats.begin(), splats.end(), [](const Splat& a, const Splat& b) { return a.key < b.key; });

  const int ts = options.tile_size;
  const int tiles_x = (camera.width + ts - 1) / ts;
  const int tiles_y = (camera.height + ts - 1) / ts;
  std::vector<std::vector<std::uint32_t>> bins(static_cast<std::size_t>(tiles_x) * tiles_y);
  for (std::uint32_t i = 0; i < splats.size(); ++i) {
    const Splat& s = splats[i];
    for (int ty = s.y0 / ts; ty <= s.y1 / ts; ++ty)
      for (int tx = s.x0 / ts; tx <= s.x1 / ts; ++tx) bins[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(i);
  }

  SplatImage out{Image(camera.height, camera.width, 3), Image(camera.height, camera.width, 1)};
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < bins.size();) {
      const int tx = static_cast<int>(t % tiles_x);
      const int ty = static_cast<int>(t / tiles_x);
      composite_tile(splats, bins[t], camera, tx * ts, ty * ts, std::min(camera.width, (tx + 1) * ts),
                     std::min(camera.height, (ty + 1) * ts), out);
    }
  };
  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (stats) *stats = local;
  return out;
}

Eigen::MatrixXd attach_nearest_vertex(const Points3& points, const SkinnedTemplate& tmpl) {
  if (tmpl.vertex_count() == 0) throw InvalidArgument("attach_nearest_vertex: template has no vertices");
  Eigen::MatrixXd rows(points.rows(), tmpl.joint_count());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Eigen::Index best = 0;
    (tmpl.canonical_vertices.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
    rows.row(i) = tmpl.skin_weights.row(best);
  }
  return rows;
}

Eigen::Matrix3d polar_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

std::vector<Gaussian3D> deform_gaussians(std::span<const Gaussian3D> gaussians,
                                         const Eigen::MatrixXd& attachment,
                                         std::span<const RigidTransform> transforms) {
  if (attachment.rows() != static_cast<Eigen::Index>(gaussians.size()) ||
      attachment.cols() != static_cast<Eigen::Index>(transforms.size())) {
    throw InvalidArgument("deform_gaussians: attachment must be " + std::to_string(gaussians.size()) + "x" +
                          std::to_string(transforms.size()));
  }
  std::vector<Gaussian3D> out(gaussians.begin(), gaussians.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
    bool pure_identity = true;
    for (Eigen::Index j = 0; j < attachment.cols(); ++j) {
      const double w = attachment(static_cast<Eigen::Index>(i), j);
      if (w == 0.0) continue;
      const auto& tr = transforms[static_cast<std::size_t>(j)];
      m += w * tr.rotation;
      t += w * tr.translation;
      pure_identity = pure_identity && tr.rotation == Eigen::Matrix3d::Identity();
    }
    out[i].position = m * gaussians[i].position + t;
    if (!pure_identity) {
      const Eigen::Quaterniond r(polar_rotation(m));
      out[i].rotation = (r * gaussians[i].rotation).normalized();
    }
  }
  return out;
}

std::vector<Gaussian3D> lbs_deform_gaussians(std::span<const Gaussian3D> gaussians,
                                             const SkinnedTemplate& tmpl, const SmplxPose& pose,
                                             const Eigen::MatrixXd& attachment) {
  return deform_gaussians(gaussians, attachment, skinning_transforms(tmpl, pose));
}

double psnr(const Image& a, const Image& b, double max_value) {
  if (!a.same_shape(b)) throw InvalidArgument("psnr: image shapes differ");
  if (a.empty()) throw InvalidArgument("psnr: empty images");
  double sum = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = double{da[i]} - double{db[i]};
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(da.size());
  if (mse < 1e-12) return kPsnrCap;
  return 10.0 * std::log10(max_value * max_value / mse);
}

namespace {

constexpr int kSsimRadius = 5;

std::array<double, 2 * kSsimRadius + 1> ssim_kernel() {
  std::array<double, 2 * kSsimRadius + 1> k{};
  double sum = 0.0;
  for (int i = -kSsimRadius; i <= kSsimRadius; ++i) {
    k[i + kSsimRadius] = std::exp(-0.5 * i * i / (1.5 * 1.5));
    sum += k[i + kSsimRadius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable Gaussian filter evaluated on the valid region only.
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w) {
  static const auto k = ssim_kernel();
  const int vw = w - 2 * kSsimRadius;
  const int vh = h - 2 * kSsimRadius;
  std::vector<double> tmp(static_cast<std::size_t>(h) * vw);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int i = 0; i < 2 * kSsimRadius + 1; ++i) acc += k[i] * src[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * vw + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(vh) * vw);
  for (int y = 0; y < vh; ++y)
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int i = 0; i < 2 * kSsimRadius + 1; ++i) acc += k[i] * tmp[static_cast<std::size_t>(y + i) * vw + x];
      out[static_cast<std::size_t>(y) * vw + x] = acc;
    }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw InvalidArgument("ssim: image shapes differ");
  const int h = a.height();
  const int w = a.width();
  if (h < 2 * kSsimRadius + 1 || w < 2 * kSsimRadius + 1) {
    throw InvalidArgument("ssim: images must be at least 11x11");
  }
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const std::size_t n = static_cast<std::size_t>(h) * w;
  double total = 0.0;
  for (int ch = 0; ch < a.channels(); ++ch) {
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * w + c;
        x[i] = a.at(r, c, ch);
        y[i] = b.at(r, c, ch);
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
      }
    const auto mx = filter_valid(x, h, w);
    const auto my = filter_valid(y, h, w);
    const auto mxx = filter_valid(xx, h, w);
    const auto myy = filter_valid(yy, h, w);
    const auto mxy = filter_valid(xy, h, w);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = mxx[i] - mx[i] * mx[i];
      const double vy = myy[i] - my[i] * my[i];
      const double cov = mxy[i] - mx[i] * my[i];
      sum += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / a.channels();
}

}  // namespace lgc
