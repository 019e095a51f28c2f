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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "../oracles/oracles.hpp"
#include "lgc/errors.hpp"
#include "test_util.hpp"

namespace lgc {
namespace {

Camera square_camera(int size = 16, double scale = 10.0) {
  Camera c;
  c.fx = c.fy = scale;
  c.cx = c.cy = (size - 1) / 2.0;
  c.width = c.height = size;
  return c;
}

Gaussian3D blob(Eigen::Vector3d pos, double sigma, double opacity, Eigen::Vector3d color) {
  Gaussian3D g;
  g.position = pos;
  g.scale = Eigen::Vector3d::Constant(sigma);
  g.opacity = opacity;
  g.color = color;
  return g;
}

std::vector<Gaussian3D> random_gaussians(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  std::uniform_real_distribution<double> p(0.0, 1.0);
  std::vector<Gaussian3D> out;
  for (int i = 0; i < n; ++i) {
    Gaussian3D g;
    g.position = {u(rng), u(rng), 1.0 + u(rng)};
    g.scale = {0.02 + 0.1 * p(rng), 0.02 + 0.1 * p(rng), 0.02 + 0.1 * p(rng)};
    g.rotation = Eigen::Quaterniond(p(rng) - 0.5, p(rng) - 0.5, p(rng) - 0.5, p(rng) - 0.5).normalized();
    g.opacity = p(rng);
    g.color = {p(rng), p(rng), p(rng)};
    out.push_back(g);
  }
  return out;
}

double max_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(double{a.data()[i]} - b.data()[i]));
  return m;
}

TEST(Rasterize, EmptySetShowsBackground) {
  Camera cam = square_camera();
  cam.background = {0.1, 0.2, 0.3};
  const SplatImage img = rasterize({}, cam);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      EXPECT_FLOAT_EQ(img.color.at(y, x, 0), 0.1f);
      EXPECT_FLOAT_EQ(img.color.at(y, x, 2), 0.3f);
      EXPECT_EQ(img.alpha.at(y, x, 0), 0.0f);
    }
}

TEST(Rasterize, CenteredGaussianCompositesOverBackground) {
  Camera cam = square_camera(15, 10.0);
  cam.background = {0.1, 0.2, 0.3};
  const Eigen::Vector3d c(1.0, 0.5, 0.25);
  for (double opacity : {0.8, 1.0}) {
    const std::vector<Gaussian3D> g{blob({0, 0, 1}, 0.1, opacity, c)};
    const SplatImage img = rasterize(g, cam);
    const double a = std::min(opacity, 0.999);
    for (int ch = 0; ch < 3; ++ch) {
      EXPECT_NEAR(img.color.at(7, 7, ch), a * c[ch] + (1 - a) * cam.background[ch], 1e-6);
    }
    EXPECT_NEAR(img.alpha.at(7, 7, 0), a, 1e-6);
  }
}

TEST(Rasterize, CoincidentGaussiansCompositeFrontToBack) {
  const Camera cam = square_camera(15, 10.0);
  const Gaussian3D front = blob({0, 0, 1.0}, 0.1, 0.6, {1, 0, 0});
  const Gaussian3D back = blob({0, 0, 2.0}, 0.1, 0.7, {0, 1, 0});
  const std::vector<Gaussian3D> ordered{front, back};
  const std::vector<Gaussian3D> swapped{back, front};
  const SplatImage a = rasterize(ordered, cam);
  const SplatImage b = rasterize(swapped, cam);
  EXPECT_NEAR(a.color.at(7, 7, 0), 0.6, 1e-6);
  EXPECT_NEAR(a.color.at(7, 7, 1), 0.4 * 0.7, 1e-6);
  EXPECT_NEAR(a.alpha.at(7, 7, 0), 1 - 0.4 * 0.3, 1e-6);
  EXPECT_EQ(a.color, b.color);
  EXPECT_EQ(a.alpha, b.alpha);
}

TEST(Rasterize, PermutationInvariant) {
  std::mt19937_64 rng(1);
  auto g = random_gaussians(rng, 200);
  const Camera cam = square_camera(48, 40.0);
  const SplatImage ref = rasterize(g, cam);
  for (int trial = 0; trial < 3; ++trial) {
    std::shuffle(g.begin(), g.end(), rng);
    EXPECT_LT(max_diff(ref.color, rasterize(g, cam).color), 1e-6);
  }
}

TEST(Rasterize, AlphaAndColorStayInRange) {
  std::mt19937_64 rng(2);
  auto g = random_gaussians(rng, 300);
  for (auto& x : g) x.opacity = 1.0;
  const SplatImage img = rasterize(g, square_camera(40, 40.0));
  for (float v : img.alpha.data()) EXPECT_LE(v, 1.0f + 1e-6f);
  for (float v : img.color.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Rasterize, OrthographicTranslationEquivariance) {
  std::mt19937_64 rng(3);
  const auto g = random_gaussians(rng, 100);
  const Camera cam = square_camera(40, 40.0);
  const Eigen::Vector3d d(0.25, -0.125, 0.0);
  Camera moved = cam;
  moved.translation -= cam.rotation * d;
  auto shifted = g;
  for (auto& x : shifted) x.position += d;
  const SplatImage a = rasterize(g, cam);
  const SplatImage b = rasterize(shifted, moved);
  EXPECT_LT(max_diff(a.color, b.color), 1e-5);
}

TEST(Rasterize, DegenerateFootprintIsTallied) {
  std::vector<Gaussian3D> g{blob({0, 0, 1}, 0.1, 0.9, {1, 1, 1})};
  Gaussian3D flat = g[0];
  flat.scale = {1e-9, 1e-9, 1.0};
  g.push_back(flat);
  RenderStats stats;
  rasterize(g, square_camera(), {}, &stats);
  EXPECT_EQ(stats.singular, 1u);
}

TEST(Rasterize, PinholeCullsBehindCamera) {
  Camera cam = square_camera(32, 30.0);
  cam.mode = Projection::kPinhole;
  const std::vector<Gaussian3D> g{blob({0, 0, 2}, 0.1, 0.9, {1, 0, 0}), blob({0, 0, -2}, 0.1, 0.9, {0, 1, 0})};
  RenderStats stats;
  const SplatImage img = rasterize(g, cam, {}, &stats);
  EXPECT_EQ(stats.culled, 1u);
  EXPECT_GT(img.color.at(15, 15, 0), 0.5f);
  EXPECT_EQ(img.color.at(15, 15, 1), 0.0f);
}

TEST(Rasterize, ThreadCountDoesNotChangeOutput) {
  std::mt19937_64 rng(4);
  const auto g = random_gaussians(rng, 400);
  const Camera cam = square_camera(70, 60.0);
  const SplatImage one = rasterize(g, cam, {.threads = 1});
  const SplatImage four = rasterize(g, cam, {.threads = 4, .tile_size = 8});
  EXPECT_EQ(one.color, four.color);
  EXPECT_EQ(one.alpha, four.alpha);
}

TEST(Rasterize, RejectsNonFinite) {
  std::vector<Gaussian3D> g{blob({0, std::nan(""), 1}, 0.1, 0.9, {1, 1, 1})};
  EXPECT_THROW(rasterize(g, square_camera()), InvalidArgument);
}

TEST(CameraFile, RoundTripAndErrors) {
  Camera c = square_camera(20, 12.5);
  c.mode = Projection::kPinhole;
  c.rotation = Eigen::AngleAxisd(0.3, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  c.translation = {0.1, -0.2, 3.0};
  c.height = 24;
  c.background = {0.5, 0.25, 1.0};
  const Camera r = parse_camera(format_camera(c));
  EXPECT_EQ(r.mode, c.mode);
  EXPECT_EQ(r.rotation, c.rotation);
  EXPECT_EQ(r.translation, c.translation);
  EXPECT_EQ(r.width, 20);
  EXPECT_EQ(r.height, 24);
  EXPECT_EQ(r.background, c.background);

  const std::string good = format_camera(square_camera());
  EXPECT_THROW(parse_camera(good + "lens 3\n"), InvalidArgument);
  EXPECT_THROW(parse_camera(good + "rotation 1 0 0 0 2 0 0 0 1\n"), InvalidArgument);
  EXPECT_THROW(parse_camera(good + "intrinsics 0 1 0 0\n"), InvalidArgument);
  EXPECT_THROW(parse_camera(good + "size 10\n"), InvalidArgument);
  EXPECT_THROW(parse_camera(good + "mode fisheye\n"), InvalidArgument);
}

TEST(LbsDeform, IdentityPoseLeavesGaussiansUnchanged) {
  std::mt19937_64 rng(5);
  const auto g = random_gaussians(rng, 20);
  Points3 verts(3, 3);
  verts << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  const SkinnedTemplate tmpl = testing::single_joint_template(verts);
  const Eigen::MatrixXd attach = Eigen::MatrixXd::Ones(20, 1);
  SmplxPose pose;
  pose.theta = {0, 0, 0};
  const auto out = lbs_deform_gaussians(g, tmpl, pose, attach);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_LT((out[i].position - g[i].position).norm(), 1e-6);
    EXPECT_NEAR(std::abs(out[i].rotation.dot(g[i].rotation)), 1.0, 1e-6);
    EXPECT_EQ(out[i].scale, g[i].scale);
  }
}

TEST(LbsDeform, QuarterTurnAboutZ) {
  Points3 verts(1, 3);
  verts << 1, 0, 0;
  const SkinnedTemplate tmpl = testing::single_joint_template(verts);
  SmplxPose pose;
  pose.theta = {0, 0, static_cast<float>(std::numbers::pi / 2)};
  Gaussian3D g = blob({1, 0, 0}, 0.1, 1.0, {1, 1, 1});
  g.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(0.4, Eigen::Vector3d::UnitX()));
  const std::vector<Gaussian3D> in{g};
  const auto out = lbs_deform_gaussians(in, tmpl, pose, Eigen::MatrixXd::Ones(1, 1));
  EXPECT_LT((out[0].position - Eigen::Vector3d(0, 1, 0)).norm(), 1e-6);
  const Eigen::Quaterniond expected =
      Eigen::Quaterniond(Eigen::AngleAxisd(std::numbers::pi / 2, Eigen::Vector3d::UnitZ())) * g.rotation;
  EXPECT_NEAR(std::abs(out[0].rotation.dot(expected)), 1.0, 1e-6);
}

TEST(LbsDeform, BlendOfTwoTranslations) {
  const std::vector<Gaussian3D> in{blob({0.2, 0.3, 0.4}, 0.1, 1.0, {1, 1, 1})};
  std::vector<RigidTransform> t(2);
  t[0].translation = {1, 0, 0};
  t[1].translation = {0, 1, 0};
  Eigen::MatrixXd w(1, 2);
  w << 0.5, 0.5;
  const auto out = deform_gaussians(in, w, t);
  EXPECT_LT((out[0].position - Eigen::Vector3d(0.7, 0.8, 0.4)).norm(), 1e-12);
  EXPECT_EQ(out[0].rotation.coeffs(), in[0].rotation.coeffs());
  EXPECT_THROW(deform_gaussians(in, Eigen::MatrixXd::Ones(1, 3), t), InvalidArgument);
}

TEST(LbsDeform, SingleJointIsRigid) {
  std::mt19937_64 rng(6);
  const auto g = random_gaussians(rng, 30);
  std::vector<RigidTransform> t(1);
  t[0].rotation = Eigen::AngleAxisd(1.1, Eigen::Vector3d(0.3, -1, 2).normalized()).toRotationMatrix();
  t[0].translation = {0.5, -2, 1};
  const auto out = deform_gaussians(g, Eigen::MatrixXd::Ones(30, 1), t);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      EXPECT_NEAR((out[i].position - out[j].position).norm(), (g[i].position - g[j].position).norm(), 1e-6);
    }
}

TEST(PolarRotation, OrthonormalizesBlend) {
  const Eigen::Matrix3d a = Eigen::AngleAxisd(0.5, Eigen::Vector3d::UnitY()).toRotationMatrix();
  const Eigen::Matrix3d r = polar_rotation(1.7 * a);
  EXPECT_LT((r - a).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::Matrix3d b = polar_rotation(Eigen::Matrix3d::Random());
  EXPECT_LT((b * b.transpose() - Eigen::Matrix3d::Identity()).norm(), 1e-9);
  EXPECT_NEAR(b.determinant(), 1.0, 1e-9);
}

TEST(Metrics, PsnrValues) {
  std::mt19937_64 rng(7);
  const Image a = testing::random_image(rng, 8, 8, 3);
  EXPECT_EQ(psnr(a, a), kPsnrCap);
  Image lo(8, 8, 3, 0.5f);
  Image hi(8, 8, 3, 0.5f + 1.0f / 255.0f);
  EXPECT_NEAR(psnr(lo, hi), 20.0 * std::log10(255.0), 1e-3);
  EXPECT_NEAR(psnr(lo, hi), 48.1308, 1e-3);
  EXPECT_THROW(psnr(lo, Image(8, 7, 3)), InvalidArgument);
}

Image checkerboard(int size, int cell) {
  Image img(size, size, 1);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) img.at(y, x, 0) = ((y / cell + x / cell) % 2) ? 1.0f : 0.0f;
  return img;
}

Image inverted(const Image& a) {
  Image b = a;
  for (auto& v : b.data()) v = 1.0f - v;
  return b;
}

TEST(Metrics, SsimMatchesReference) {
  std::mt19937_64 rng(8);
  const Image r = testing::random_image(rng, 16, 16, 3);
  EXPECT_NEAR(ssim(r, r), 1.0, 1e-12);
  const Image c4 = checkerboard(32, 4);
  EXPECT_NEAR(ssim(c4, inverted(c4)), oracle::kSsimCheckerboard32x4, 1e-4);
  const Image c1 = checkerboard(24, 1);
  EXPECT_NEAR(ssim(c1, inverted(c1)), oracle::kSsimCheckerboard24x1, 1e-4);

  Image a(16, 20, 3);
  Image b(16, 20, 3);
  Image affine(16, 20, 3);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 20; ++x)
      for (int ch = 0; ch < 3; ++ch) {
        a.at(y, x, ch) = static_cast<float>(((7 * y + 13 * x + 29 * ch) % 17) / 16.0);
        b.at(y, x, ch) = static_cast<float>(((5 * y + 3 * x + 11 * ch) % 13) / 12.0);
        affine.at(y, x, ch) = std::clamp(0.9f * a.at(y, x, ch) + 0.05f, 0.0f, 1.0f);
      }
  EXPECT_NEAR(ssim(a, b), oracle::kSsimModularRgb, 1e-4);
  EXPECT_NEAR(ssim(a, affine), oracle::kSsimModularRgbAffine, 1e-4);
  EXPECT_THROW(ssim(a, Image(16, 20, 1)), InvalidArgument);
  EXPECT_THROW(ssim(Image(8, 8, 1), Image(8, 8, 1)), InvalidArgument);
}

}  // namespace
}  // namespace lgc
