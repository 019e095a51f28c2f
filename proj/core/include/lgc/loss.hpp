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

#include <cstdint>
#include <string>
#include <vector>

#include "lgc/avatar_model.hpp"
#include "lgc/errors.hpp"
#include "lgc/generator.hpp"
#include "lgc/image.hpp"
#include "lgc/nn.hpp"
#include "lgc/renderer.hpp"

namespace lgc {

struct LossWeights {
  double w_l1 = 1.0;
  double w_mask = 1.0;
  double w_lpips = 0.1;
  double w_offset = 0.005;
  void validate() const;
};

struct FacialWeightConfig {
  double alpha = 0.2;
  Mask mask;  // face region, 1 = face
  std::int64_t iter = 0;
  std::int64_t total_iter = 1;
};

// W = 1 + alpha * M * min(1, iter / total_iter), H x W.
Eigen::MatrixXd facial_weight_map(const FacialWeightConfig& cfg);

using FeatureStack = std::vector<Image>;

// Sum over layers of the mean (over sites and channels) of W * |Fa - Fb|^2.
// The face mask is resampled to each layer by nearest neighbour.
double weighted_perceptual(const FeatureStack& a, const FeatureStack& b, const FacialWeightConfig& cfg);

double total_loss(double l1, double mask_loss, double lpips, double offset, const LossWeights& weights);

// Fixed random convolution stack used as the perceptual feature space:
// 3->8 3x3 s1, 8->16 3x3 s2, 16->16 3x3 s2, each followed by leaky ReLU.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(std::uint64_t seed = 7);
  FeatureStack features(const Image& rgb) const;

 private:
  std::vector<Tensor> kernels_;
  std::vector<Tensor> biases_;
  std::vector<int> strides_;
};

// Everything the fitting loop needs: a fixed generator input, the canonical
// frame it back-projects into, and the target render.
struct FitScene {
  PoseMapPair input;
  Image depth_front;
  Image depth_back;
  BoundingBox bbox;
  Camera camera;
  Image target;        // H x W x 3
  Image target_alpha;  // H x W x 1
  Mask face_mask;      // image space
};

// 16x16 pose maps of a flat body card, rendered 32x32, target made of a
// small "face" Gaussian above a large "body" Gaussian.
FitScene make_toy_fit_scene();

struct LossTerms {
  double l1 = 0.0;
  double mask = 0.0;
  double lpips = 0.0;  // weighted perceptual at the given schedule point
  double offset = 0.0;
  double total = 0.0;
  double face_l1 = 0.0;
};

struct FitConfig {
  int iterations = 200;
  std::int64_t total_iter = 200;
  double alpha = 0.2;
  LossWeights weights;
  std::uint64_t seed = 1;
  double perturbation = 0.05;  // relative to each tensor's RMS
};

// Loss of `weights` on `scene` with the facial schedule at `iter`.
LossTerms evaluate_fit(const GeneratorWeights& weights, const FitScene& scene, const FitConfig& cfg,
                       const FeatureExtractor& features, std::int64_t iter);

struct FitResult {
  GeneratorWeights weights;
  LossTerms initial;  // both scored with the schedule at total_iter
  LossTerms final;
  int accepted = 0;
};

// Seeded antithetic random-perturbation descent: each iteration probes
// w +- c*delta along one Rademacher direction (scaled per tensor) and keeps
// the better probe if it lowers the loss both at the current schedule point
// and at the end of the schedule. The step c grows on success and shrinks on
// failure. Throws NumericalError on a non-finite loss.
FitResult fit_generator(const GeneratorWeights& initial, const FitScene& scene, const FitConfig& cfg);

}  // namespace lgc
