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

#include "lgc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <mutex>
#include <thread>

#include "lgc/errors.hpp"
#include "lgc/posemap_codec.hpp"
#include "lgc/smplx_codec.hpp"

namespace lgc {
namespace {

struct Part {
  Eigen::Vector3d center;
  Eigen::Vector3d radii;
};

// Joint positions and the far end of each joint's bone, used for skinning.
const Eigen::Vector3d kJoints[] = {
    {0.0, 0.0, 0.0},    {0.0, 0.25, 0.0},   {0.0, 0.55, 0.0},   {0.18, 0.45, 0.0},  {0.45, 0.45, 0.0},
    {-0.18, 0.45, 0.0}, {-0.45, 0.45, 0.0}, {0.1, -0.05, 0.0},  {-0.1, -0.05, 0.0}};
const Eigen::Vector3d kBoneEnds[] = {
    {0.0, 0.25, 0.0},   {0.0, 0.5, 0.0},    {0.0, 0.8, 0.0},    {0.45, 0.45, 0.0},  {0.75, 0.45, 0.0},
    {-0.45, 0.45, 0.0}, {-0.75, 0.45, 0.0}, {0.1, -0.85, 0.0},  {-0.1, -0.85, 0.0}};
constexpr std::int32_t kParents[] = {kRootParent, 0, 1, 1, 3, 1, 5, 0, 0};
constexpr int kJointCount = 9;
constexpr int kShapeDims = 10;
constexpr int kExpressionDims = 10;

const Part kParts[] = {
    {{0.0, 0.22, 0.0}, {0.16, 0.28, 0.1}},      // torso
    {{0.0, 0.68, 0.0}, {0.1, 0.12, 0.1}},       // head
    {{0.315, 0.45, 0.0}, {0.14, 0.045, 0.045}},  // upper arms
    {{-0.315, 0.45, 0.0}, {0.14, 0.045, 0.045}},
    {{0.6, 0.45, 0.0}, {0.15, 0.04, 0.04}},      // forearms
    {{-0.6, 0.45, 0.0}, {0.15, 0.04, 0.04}},
    {{0.1, -0.45, 0.0}, {0.06, 0.4, 0.06}},      // legs
    {{-0.1, -0.45, 0.0}, {0.06, 0.4, 0.06}},
};

double ellipsoid_area(const Eigen::Vector3d& r) {
  constexpr double p = 1.6075;
  const double ab = std::pow(r.x() * r.y(), p);
  const double ac = std::pow(r.x() * r.z(), p);
  const double bc = std::pow(r.y() * r.z(), p);
  return 4.0 * std::numbers::pi * std::pow((ab + ac + bc) / 3.0, 1.0 / p);
}

double segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

SkinnedTemplate make_synthetic_template(std::uint64_t seed, int vertex_count) {
  if (vertex_count < static_cast<int>(std::size(kParts))) {
    throw InvalidArgument("synthetic template needs at least one vertex per body part");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  double total_area = 0.0;
  for (const auto& part : kParts) total_area += ellipsoid_area(part.radii);
  std::vector<int> counts;
  int assigned = 0;
  for (const auto& part : kParts) {
    counts.push_back(std::max(1, static_cast<int>(vertex_count * ellipsoid_area(part.radii) / total_area)));
    assigned += counts.back();
  }
  counts[0] += vertex_count - assigned;

  SkinnedTemplate t;
  t.canonical_vertices.resize(vertex_count, 3);
  t.canonical_normals.resize(vertex_count, 3);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < std::size(kParts); ++i) {
    const Part& part = kParts[i];
    for (int n = 0; n < counts[i]; ++n, ++row) {
      Eigen::Vector3d d(normal(rng), normal(rng), normal(rng));
      d /= std::max(d.norm(), 1e-12);
      const Eigen::Vector3d p = part.center + d.cwiseProduct(part.radii);
      t.canonical_vertices.row(row) = p.transpose();
      t.canonical_normals.row(row) = d.cwiseQuotient(part.radii).normalized().transpose();
    }
  }

  t.parents.assign(std::begin(kParents), std::end(kParents));
  t.rest_joint_positions.resize(kJointCount, 3);
  for (int j = 0; j < kJointCount; ++j) t.rest_joint_positions.row(j) = kJoints[j].transpose();

  constexpr double kFalloff = 0.06;
  t.skin_weights = Eigen::MatrixXd::Zero(vertex_count, kJointCount);
  for (Eigen::Index v = 0; v < vertex_count; ++v) {
    const Eigen::Vector3d p = t.canonical_vertices.row(v).transpose();
    Eigen::VectorXd d(kJointCount);
    for (int j = 0; j < kJointCount; ++j) d[j] = segment_distance(p, kJoints[j], kBoneEnds[j]);
    const double dmin = d.minCoeff();
    Eigen::VectorXd w(kJointCount);
    for (int j = 0; j < kJointCount; ++j) {
      w[j] = std::exp(-(d[j] * d[j] - dmin * dmin) / (kFalloff * kFalloff));
      if (w[j] < 1e-4) w[j] = 0.0;
    }
    t.skin_weights.row(v) = (w / w.sum()).transpose();
  }

  const Eigen::Vector3d lo = t.canonical_vertices.colwise().minCoeff().transpose();
  const Eigen::Vector3d hi = t.canonical_vertices.colwise().maxCoeff().transpose();
  const double margin = 0.1 * (hi - lo).maxCoeff();
  t.bbox.min = lo.array() - margin;
  t.bbox.max = hi.array() + margin;
  t.validate();
  return t;
}

std::vector<SmplxPose> make_pose_sequence(const SkinnedTemplate& tmpl, int frames, std::uint64_t seed) {
  if (frames < 0) throw InvalidArgument("frame count must be nonnegative");
  std::mt19937_64 rng(seed ^ 0x5eed5eedULL);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> normal(0.0, 0.1);
  const double phase = uniform(rng);
  std::vector<float> beta(kShapeDims);
  for (auto& b : beta) b = static_cast<float>(normal(rng));

  const int joints = tmpl.joint_count();
  std::vector<SmplxPose> out;
  for (int f = 0; f < frames; ++f) {
    const double phi = phase + 2.0 * std::numbers::pi * f / 24.0;
    const double s = std::sin(phi);
    SmplxPose p;
    p.frame_index = static_cast<std::uint32_t>(f);
    p.theta.assign(static_cast<std::size_t>(joints) * 3, 0.0f);
    auto set = [&](int joint, int axis, double v) {
      if (joint < joints) p.theta[static_cast<std::size_t>(joint) * 3 + axis] = static_cast<float>(v);
    };
    set(0, 1, 0.15 * s);
    set(1, 0, 0.1 * s);
    set(2, 1, 0.3 * std::sin(2.0 * phi));
    set(3, 2, 0.5 * s);
    set(4, 1, 0.4 * s);
    set(5, 2, -0.5 * s);
    set(6, 1, -0.4 * s);
    set(7, 0, 0.35 * s);
    set(8, 0, -0.35 * s);
    p.beta = beta;
    p.psi.resize(kExpressionDims);
    for (int i = 0; i < kExpressionDims; ++i) p.psi[i] = static_cast<float>(0.2 * std::sin(phi + i));
    out.push_back(std::move(p));
  }
  return out;
}

Camera framing_camera(const SkinnedTemplate& tmpl, int image_size) {
  if (image_size <= 0) throw InvalidArgument("image size must be positive");
  const Eigen::Vector3d center = 0.5 * (tmpl.bbox.min + tmpl.bbox.max);
  const Eigen::Vector3d ext = tmpl.bbox.extent();
  Camera c;
  c.mode = Projection::kOrthographic;
  c.rotation = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  c.translation = {-center.x(), center.y(), center.z() + 2.0 * ext.z()};
  c.fx = c.fy = image_size / std::max(ext.x(), ext.y());
  c.cx = c.cy = (image_size - 1) / 2.0;
  c.width = c.height = image_size;
  return c;
}

AvatarRig make_rig(SkinnedTemplate tmpl, int map_resolution, const Camera& camera) {
  if (map_resolution <= 0 || map_resolution % 2 != 0) {
    throw InvalidArgument("map resolution must be positive and even");
  }
  tmpl.validate();
  camera.validate();
  AvatarRig rig{std::move(tmpl), {}, {}, camera};
  rig.layout = build_layout(rig.tmpl, map_resolution, map_resolution);
  std::vector<Eigen::Vector3d> anchors;
  for (bool front : {true, false}) {
    const auto& owners = front ? rig.layout.front_vertex : rig.layout.back_vertex;
    const Image& depth = front ? rig.layout.depth_front : rig.layout.depth_back;
    for (int y = 0; y < map_resolution; ++y)
      for (int x = 0; x < map_resolution; ++x) {
        if (owners[static_cast<std::size_t>(y) * map_resolution + x] < 0) continue;
        anchors.push_back(back_project(rig.tmpl.bbox, front, y, x, map_resolution, map_resolution, depth.at(y, x, 0)));
      }
  }
  Points3 pts(static_cast<Eigen::Index>(anchors.size()), 3);
  for (std::size_t i = 0; i < anchors.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = anchors[i].transpose();
  rig.attachment = attach_nearest_vertex(pts, rig.tmpl);
  return rig;
}

PoseMapPair pose_maps_for(const AvatarRig& rig, const SmplxPose& pose) {
  return render_pose_maps(pose_template(rig.tmpl, pose), rig.tmpl, rig.layout);
}

SplatImage render_frame(const AvatarRig& rig, const GeneratorWeights& weights, const SmplxPose& pose,
                        const PoseMapPair& maps, const RenderOptions& options) {
  if (maps.height() != rig.layout.height || maps.width() != rig.layout.width) {
    throw InvalidArgument("render_frame: pose maps do not match the rig resolution");
  }
  PoseMapPair input = maps;
  input.mask_front = rig.layout.mask(true);
  input.mask_back = rig.layout.mask(false);
  GaussianMapPair g = forward(weights, input);
  g.depth_front = rig.layout.depth_front;
  g.depth_back = rig.layout.depth_back;
  const auto gaussians = extract_gaussians(g, rig.tmpl.bbox);
  const auto posed = lbs_deform_gaussians(gaussians, rig.tmpl, pose, rig.attachment);
  return rasterize(posed, rig.camera, options);
}

SplatImage render_canonical(const AvatarRig& rig, const GeneratorWeights& weights, const RenderOptions& options) {
  SmplxPose rest;
  rest.theta.assign(static_cast<std::size_t>(rig.tmpl.joint_count()) * 3, 0.0f);
  return render_frame(rig, weights, rest, pose_maps_for(rig, rest), options);
}

GeneratorInit scene_generator_init(const AvatarRig& rig, std::uint64_t seed) {
  const Eigen::Vector3d ext = rig.tmpl.bbox.extent();
  GeneratorInit init;
  init.seed = seed;
  init.gaussian_scale = static_cast<float>(0.6 * std::max(ext.x(), ext.y()) / rig.layout.width);
  return init;
}

Scene make_scene(const SceneConfig& config) {
  if (config.frames <= 0) throw InvalidArgument("scene needs at least one frame");
  Scene s;
  s.config = config;
  SkinnedTemplate tmpl = make_synthetic_template(config.seed);
  const Camera cam = framing_camera(tmpl, config.image_size);
  s.rig = make_rig(std::move(tmpl), config.map_resolution, cam);
  s.poses = make_pose_sequence(s.rig.tmpl, config.frames, config.seed);
  for (const auto& p : s.poses) s.pose_maps.push_back(pose_maps_for(s.rig, p));
  s.weights = init_weights(scene_generator_init(s.rig, config.seed));
  return s;
}

StreamMetadata scene_metadata(const Scene& scene, const EncodeOptions& options) {
  StreamMetadata m;
  m.frames = static_cast<std::uint32_t>(scene.poses.size());
  m.map_resolution = scene.config.map_resolution;
  m.camera = scene.rig.camera;
  m.synthetic_template = true;
  m.template_seed = scene.config.seed;
  m.bit_width = options.quant.bit_width;
  m.step = options.step;
  return m;
}

EncodedScene encode_scene(const Scene& scene, const EncodeOptions& options) {
  options.quant.validate();
  EncodedScene out;
  std::vector<Section> sections;
  Bytes weights = serialize_quantized(quantize_network(scene.weights, options.quant));
  out.decoded_weights = dequantize_network(parse_quantized(weights));
  sections.push_back({LayerId::kStructural, CodecId::kQuantizedWeights, std::move(weights)});
  if (options.include_motion) {
    sections.push_back({LayerId::kSmplx, CodecId::kSmplxHuffman, serialize_smplx_stream(encode_smplx(scene.poses))});
    PoseMapCodecOptions pm;
    pm.reconstruction = &out.decoded_maps;
    sections.push_back({LayerId::kPoseMap, CodecId::kPoseMapPredictive,
                        serialize_posemap_stream(encode_posemaps(scene.pose_maps, options.step, pm))});
  }
  sections.push_back({LayerId::kMetadata, CodecId::kJsonMetadata, serialize_metadata(scene_metadata(scene, options))});
  out.container = mux(sections);
  return out;
}

std::vector<RdPoint> rd_sweep(const Scene& scene, const std::vector<int>& bit_widths,
                              const std::vector<double>& steps, int threads) {
  if (bit_widths.empty() || steps.empty()) throw InvalidArgument("rd_sweep: empty grid");
  std::vector<Image> reference;
  for (std::size_t f = 0; f < scene.poses.size(); ++f) {
    reference.push_back(render_frame(scene.rig, scene.weights, scene.poses[f], scene.pose_maps[f]).color);
  }
  std::vector<RdPoint> points;
  for (int q : bit_widths)
    for (double step : steps) points.push_back({q, step});

  auto run = [&](RdPoint& pt) {
    EncodeOptions opt;
    opt.quant.bit_width = pt.bit_width;
    opt.step = pt.step;
    const EncodedScene enc = encode_scene(scene, opt);
    pt.total_bytes = enc.container.size();
    pt.bytes_per_frame = static_cast<double>(pt.total_bytes) / static_cast<double>(scene.poses.size());
    double psnr_sum = 0.0;
    double ssim_sum = 0.0;
    for (std::size_t f = 0; f < scene.poses.size(); ++f) {
      const Image img = render_frame(scene.rig, enc.decoded_weights, scene.poses[f], enc.decoded_maps[f]).color;
      psnr_sum += psnr(img, reference[f]);
      ssim_sum += ssim(img, reference[f]);
    }
    pt.psnr = psnr_sum / static_cast<double>(scene.poses.size());
    pt.ssim = ssim_sum / static_cast<double>(scene.poses.size());
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
      try {
        run(points[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return points;
}

std::string rd_csv(const std::vector<RdPoint>& points) {
  std::ostringstream out;
  out << "Q,q,total_bytes,bytes_per_frame,psnr_db,ssim\n";
  for (const auto& p : points) {
    out << p.bit_width << ',' << std::setprecision(8) << p.step << ',' << p.total_bytes << ',' << std::fixed
        << std::setprecision(2) << p.bytes_per_frame << ',' << std::setprecision(4) << p.psnr << ','
        << std::setprecision(6) << p.ssim << '\n'
        << std::defaultfloat;
  }
  return out.str();
}

}  // namespace lgc
