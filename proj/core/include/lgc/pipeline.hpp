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
#include "lgc/byte_io.hpp"
#include "lgc/container.hpp"
#include "lgc/generator.hpp"
#include "lgc/renderer.hpp"
#include "lgc/weight_quant.hpp"

namespace lgc {

// Nine-joint humanoid (pelvis root, spine, head, shoulders, elbows, hips)
// made of sampled ellipsoid surfaces with soft skin weights.
SkinnedTemplate make_synthetic_template(std::uint64_t seed = 0, int vertex_count = 4000);

// Smooth periodic motion of the synthetic skeleton. theta has 3 values per
// joint; beta and psi have 10 each.
std::vector<SmplxPose> make_pose_sequence(const SkinnedTemplate& tmpl, int frames, std::uint64_t seed = 0);

// Front orthographic camera framing the template bbox in a square image.
Camera framing_camera(const SkinnedTemplate& tmpl, int image_size = 128);

// Decoder-side state derived from the template alone: the pose-map layout,
// one skin-weight row per Gaussian and the camera.
struct AvatarRig {
  SkinnedTemplate tmpl;
  CanonicalLayout layout;
  Eigen::MatrixXd attachment;  // front pixels then back, row-major
  Camera camera;
};

AvatarRig make_rig(SkinnedTemplate tmpl, int map_resolution, const Camera& camera);

PoseMapPair pose_maps_for(const AvatarRig& rig, const SmplxPose& pose);

// Generator -> Gaussians (masks from the layout) -> LBS -> splatting.
SplatImage render_frame(const AvatarRig& rig, const GeneratorWeights& weights, const SmplxPose& pose,
                        const PoseMapPair& maps, const RenderOptions& options = {});
// Canonical pose (all parameters zero).
SplatImage render_canonical(const AvatarRig& rig, const GeneratorWeights& weights,
                            const RenderOptions& options = {});

struct SceneConfig {
  std::uint64_t seed = 0;
  int frames = 4;
  int map_resolution = 32;
  int image_size = 128;
};

struct Scene {
  SceneConfig config;
  AvatarRig rig;
  std::vector<SmplxPose> poses;
  std::vector<PoseMapPair> pose_maps;
  GeneratorWeights weights;  // full precision
};

Scene make_scene(const SceneConfig& config);
GeneratorInit scene_generator_init(const AvatarRig& rig, std::uint64_t seed);

struct EncodeOptions {
  QuantConfig quant;
  double step = 1.0 / 255.0;
  bool include_motion = true;
};

struct EncodedScene {
  Bytes container;
  GeneratorWeights decoded_weights;          // what the receiver will see
  std::vector<PoseMapPair> decoded_maps;
};

StreamMetadata scene_metadata(const Scene& scene, const EncodeOptions& options);
EncodedScene encode_scene(const Scene& scene, const EncodeOptions& options);

struct RdPoint {
  int bit_width = 0;
  double step = 0.0;
  std::uint64_t total_bytes = 0;
  double bytes_per_frame = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

// For every (Q, q): encode, decode, render every frame and score it against
// the full-precision render. Points come out Q-major in grid order.
std::vector<RdPoint> rd_sweep(const Scene& scene, const std::vector<int>& bit_widths,
                              const std::vector<double>& steps, int threads = 1);
std::string rd_csv(const std::vector<RdPoint>& points);

}  // namespace lgc
