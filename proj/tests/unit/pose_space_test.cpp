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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "lgc/errors.hpp"
#include "lgc/pipeline.hpp"
#include "test_util.hpp"

namespace lgc {
namespace {

Eigen::MatrixXd random_samples(std::mt19937_64& rng, int m, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd s(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) s(i, j) = n(rng) * (1.0 + j);
  return s;
}

TEST(FitPca, LineDataIsCapturedByOneComponent) {
  const Eigen::Vector3d mu(0.5, -1.0, 2.0);
  const Eigen::Vector3d dir = Eigen::Vector3d(1.0, 2.0, -2.0).normalized();
  Eigen::MatrixXd s(7, 3);
  for (int i = 0; i < 7; ++i) s.row(i) = (mu + (i - 3) * 0.7 * dir).transpose();
  const PcaBasis b = fit_pca(s, 1, 1e6);
  EXPECT_NEAR(std::abs(b.components.col(0).dot(dir)), 1.0, 1e-12);
  for (int i = 0; i < 7; ++i) {
    const Eigen::VectorXd x = s.row(i).transpose();
    EXPECT_LT((project_clip(b, x) - x).norm(), 1e-6);
  }
}

TEST(FitPca, CompleteBasisIsLossless) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd s = random_samples(rng, 40, 6);
  const PcaBasis b = fit_pca(s, 6, 1e6);
  b.validate();
  for (int i = 0; i < 40; ++i) {
    const Eigen::VectorXd x = s.row(i).transpose();
    EXPECT_LT((project_clip(b, x) - x).norm(), 1e-6);
  }
}

TEST(FitPca, HandWorkedToySet) {
  Eigen::MatrixXd s(4, 2);
  s << 1, 0, -1, 0, 0, 0.1, 0, -0.1;
  const PcaBasis b = fit_pca(s, 2);
  EXPECT_NEAR(b.components(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(b.components(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(b.components(1, 1), 1.0, 1e-12);
  EXPECT_NEAR(b.sigma[0], std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(b.sigma[1], std::sqrt(0.005), 1e-12);
  EXPECT_TRUE(b.mean.isZero(0.0));
}

TEST(FitPca, SignConventionMakesLargestEntryPositive) {
  std::mt19937_64 rng(2);
  const PcaBasis b = fit_pca(random_samples(rng, 30, 5), 3);
  for (int c = 0; c < 3; ++c) {
    Eigen::Index arg = 0;
    b.components.col(c).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(b.components(arg, c), 0.0);
  }
}

TEST(FitPca, RankDeficiencyNamesComponent) {
  Eigen::MatrixXd s(5, 3);
  for (int i = 0; i < 5; ++i) s.row(i) << i, 2.0 * i, 0.0;
  try {
    fit_pca(s, 2);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("component 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(fit_pca(s, 0), InvalidArgument);
  EXPECT_THROW(fit_pca(s, 6), InvalidArgument);
  s(0, 0) = std::nan("");
  EXPECT_THROW(fit_pca(s, 1), InvalidArgument);
}

class ProjectClipTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(3);
    basis_ = fit_pca(random_samples(rng, 50, 2), 2, 2.0);
  }
  PcaBasis basis_;
};

TEST_F(ProjectClipTest, MeanMapsToMean) {
  EXPECT_LT((project_clip(basis_, basis_.mean) - basis_.mean).norm(), 1e-12);
}

TEST_F(ProjectClipTest, InBandPointIsFixed) {
  const Eigen::VectorXd x = basis_.mean + 0.5 * basis_.sigma[0] * basis_.components.col(0);
  EXPECT_LT((project_clip(basis_, x) - x).norm(), 1e-6);
}

TEST_F(ProjectClipTest, FarPointClampsToBand) {
  const Eigen::VectorXd x = basis_.mean + 10.0 * basis_.sigma[0] * basis_.components.col(0);
  const Eigen::VectorXd expected = basis_.mean + 2.0 * basis_.sigma[0] * basis_.components.col(0);
  EXPECT_LT((project_clip(basis_, x) - expected).norm(), 1e-9);
}

TEST(ProjectClip, IdempotentAndInRange) {
  std::mt19937_64 rng(4);
  const PcaBasis b = fit_pca(random_samples(rng, 60, 8), 3, 1.5);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd x(8);
    for (auto& v : x) v = n(rng);
    const Eigen::VectorXd p = project_clip(b, x);
    EXPECT_LT((project_clip(b, p) - p).norm(), 1e-6);
    const Eigen::VectorXd c = pca_coefficients(b, p);
    for (int j = 0; j < 3; ++j) EXPECT_LE(std::abs(c[j]), b.k * b.sigma[j] + 1e-9);
  }
}

TEST(ProjectClip, OrthogonalComplementIsRemoved) {
  std::mt19937_64 rng(5);
  const PcaBasis b = fit_pca(random_samples(rng, 30, 4), 2);
  const Eigen::MatrixXd proj = b.components * b.components.transpose();
  Eigen::VectorXd v = Eigen::VectorXd::Random(4);
  v -= proj * v;  // orthogonal to span(S)
  const Eigen::VectorXd x = b.mean + 0.3 * b.sigma[0] * b.components.col(0);
  EXPECT_LT((project_clip(b, x + 5.0 * v) - project_clip(b, x)).norm(), 1e-9);
}

TEST(ProjectClip, DimensionMismatch) {
  std::mt19937_64 rng(6);
  const PcaBasis b = fit_pca(random_samples(rng, 10, 3), 1);
  EXPECT_THROW(project_clip(b, Eigen::VectorXd::Zero(4)), InvalidArgument);
}

TEST(PcaBasisFile, RoundTrip) {
  std::mt19937_64 rng(7);
  const PcaBasis b = fit_pca(random_samples(rng, 20, 5), 3, 2.5);
  const auto path = std::filesystem::temp_directory_path() / "lgc_basis_test.hgpc";
  save_basis(b, path);
  const PcaBasis r = load_basis(path);
  std::filesystem::remove(path);
  EXPECT_EQ(r.dim(), 5);
  EXPECT_EQ(r.rank(), 3);
  EXPECT_FLOAT_EQ(static_cast<float>(r.k), 2.5f);
  EXPECT_LT((r.components - b.components).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((r.sigma - b.sigma).cwiseAbs().maxCoeff(), 1e-6);
  const Bytes bytes = serialize_basis(b);
  EXPECT_THROW(parse_basis(std::span(bytes.data(), bytes.size() - 2)), DecodeError);
}

TEST(PoseSpace, PoseOnlyProjectionKeepsTrainingPosesClose) {
  const auto tmpl = make_synthetic_template();
  const auto poses = make_pose_sequence(tmpl, 24, 0);
  const PoseSpace space = fit_pose_space(poses, {}, 4, 3.0);
  EXPECT_FALSE(space.joint());
  const ProjectedPose p = project_pose(space, poses[5], nullptr);
  EXPECT_FALSE(p.maps.has_value());
  EXPECT_EQ(p.pose.frame_index, poses[5].frame_index);
  EXPECT_EQ(p.pose.theta.size(), poses[5].theta.size());
  const Eigen::VectorXd x = flatten_pose(poses[5]);
  const Eigen::VectorXd y = flatten_pose(p.pose);
  EXPECT_LT((x - y).norm(), 0.5 * x.norm() + 1e-6);
}

TEST(PoseSpace, JointModeReturnsClampedMaps) {
  const Scene scene = make_scene({.frames = 6, .map_resolution = 16});
  const PoseSpace space = fit_pose_space(scene.poses, scene.pose_maps, 3, 3.0);
  EXPECT_TRUE(space.joint());
  EXPECT_EQ(space.posemap_dim, 6 * 16 * 16);
  const ProjectedPose p = project_pose(space, scene.poses[2], &scene.pose_maps[2]);
  ASSERT_TRUE(p.maps.has_value());
  for (float v : p.maps->front.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_EQ(p.maps->mask_front, scene.pose_maps[2].mask_front);
  EXPECT_THROW(project_pose(space, scene.poses[2], nullptr), InvalidArgument);
}

TEST(PoseSpace, DimensionMismatchIsRejected) {
  std::mt19937_64 rng(8);
  std::vector<SmplxPose> poses;
  for (int i = 0; i < 5; ++i) poses.push_back(testing::random_pose(rng, 6, 2, 1));
  const PoseSpace space = fit_pose_space(poses, {}, 2, 3.0);
  EXPECT_THROW(project_pose(space, testing::random_pose(rng, 6, 2, 2), nullptr), InvalidArgument);
  EXPECT_THROW(fit_pose_space({}, {}, 1, 3.0), InvalidArgument);
}

}  // namespace
}  // namespace lgc
