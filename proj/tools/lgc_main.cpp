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

// lgc: command-line front end for the layered avatar codec.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lgc/container.hpp"
#include "lgc/errors.hpp"
#include "lgc/loss.hpp"
#include "lgc/pipeline.hpp"
#include "lgc/pose_space.hpp"
#include "lgc/posemap_codec.hpp"
#include "lgc/smplx_codec.hpp"
#include "lgc/weight_quant.hpp"

namespace fs = std::filesystem;
using namespace lgc;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitDecode = 3;

struct SceneArgs {
  std::uint64_t seed = 0;
  int frames = 4;
  int map_resolution = 32;
  int image_size = 128;
  std::string template_path;
  std::string poses_path;
  std::string weights_path;
  std::string camera_path;
};

void add_scene_options(CLI::App* app, SceneArgs& a) {
  app->add_option("--seed", a.seed, "Seed of the synthetic template, motion and weights");
  app->add_option("--frames", a.frames, "Synthetic frame count (ignored with --poses)");
  app->add_option("--map-res", a.map_resolution, "Pose-map resolution (even)");
  app->add_option("--image-size", a.image_size, "Rendered image size in pixels");
  app->add_option("--template", a.template_path, "HGTM template file (default: synthetic)");
  app->add_option("--poses", a.poses_path, "HGPS pose sequence (default: synthetic)");
  app->add_option("--weights", a.weights_path, "HGWT generator weights (default: seeded init)");
  app->add_option("--camera", a.camera_path, "Camera text file (default: front orthographic)");
}

struct BuiltScene {
  Scene scene;
  bool synthetic_template = true;
  std::uint32_t template_crc = 0;
};

BuiltScene build_scene(const SceneArgs& a) {
  BuiltScene b;
  SkinnedTemplate tmpl;
  if (a.template_path.empty()) {
    tmpl = make_synthetic_template(a.seed);
  } else {
    const Bytes raw = read_file(a.template_path);
    tmpl = parse_template(raw);
    b.synthetic_template = false;
    b.template_crc = crc32(raw);
  }
  const Camera cam = a.camera_path.empty() ? framing_camera(tmpl, a.image_size) : load_camera(a.camera_path);
  Scene& s = b.scene;
  s.config = {a.seed, a.frames, a.map_resolution, a.image_size};
  s.rig = make_rig(std::move(tmpl), a.map_resolution, cam);
  s.poses = a.poses_path.empty() ? make_pose_sequence(s.rig.tmpl, a.frames, a.seed) : load_poses(a.poses_path);
  if (s.poses.empty()) throw InvalidArgument("pose sequence is empty");
  s.config.frames = static_cast<int>(s.poses.size());
  for (const auto& p : s.poses) s.pose_maps.push_back(pose_maps_for(s.rig, p));
  s.weights = a.weights_path.empty() ? init_weights(scene_generator_init(s.rig, a.seed)) : load_weights(a.weights_path);
  return b;
}

// Receiver side: rebuild the rig from the stream metadata.
AvatarRig receiver_rig(const StreamMetadata& meta, const std::string& template_path, const std::string& camera_path) {
  SkinnedTemplate tmpl;
  if (meta.synthetic_template) {
    tmpl = make_synthetic_template(meta.template_seed);
  } else {
    if (template_path.empty()) throw InvalidArgument("stream was encoded against a template file; pass --template");
    const Bytes raw = read_file(template_path);
    if (crc32(raw) != meta.template_crc) throw DecodeError("template file does not match the stream (CRC differs)");
    tmpl = parse_template(raw);
  }
  const Camera cam = camera_path.empty() ? meta.camera : load_camera(camera_path);
  return make_rig(std::move(tmpl), meta.map_resolution, cam);
}

StreamMetadata require_metadata(const DecodedLayers& d) {
  if (!d.metadata) throw DecodeError("stream has no metadata section");
  if (!d.weights) throw DecodeError("stream has no structural section");
  return *d.metadata;
}

std::vector<double> parse_steps(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) {
    double v = 0.0;
    if (auto slash = s.find('/'); slash != std::string::npos) {
      v = std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    } else {
      v = std::stod(s);
    }
    out.push_back(v);
  }
  return out;
}

fs::path frame_path(const fs::path& dir, const std::string& stem, std::size_t index) {
  char name[64];
  std::snprintf(name, sizeof(name), "%s_%04zu.ppm", stem.c_str(), index);
  return dir / name;
}

int run(int argc, char** argv) {
  CLI::App app{"Layered avatar codec"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // encode
  SceneArgs enc_scene;
  std::string enc_out;
  int enc_bits = 8;
  std::string enc_step = "1/255";
  bool enc_structural_only = false;
  auto* enc = app.add_subcommand("encode", "Encode a scene into a layered container");
  add_scene_options(enc, enc_scene);
  enc->add_option("-o,--out", enc_out, "Output container")->required();
  enc->add_option("-Q,--bits", enc_bits, "Weight bit width (2..8)");
  enc->add_option("-q,--step", enc_step, "Pose-map quantization step, e.g. 1/255");
  enc->add_flag("--structural-only", enc_structural_only, "Omit the motion layers");

  // decode
  std::string dec_in, dec_dir, dec_template;
  auto* dec = app.add_subcommand("decode", "Decode every layer of a container");
  dec->add_option("input", dec_in, "Container")->required();
  dec->add_option("-d,--out-dir", dec_dir, "Directory for weights.hgwt and poses.hgps");
  dec->add_option("--template", dec_template, "Template file, when the stream was encoded against one");

  // render
  std::string ren_in, ren_dir, ren_template, ren_camera;
  bool ren_canonical = false;
  int ren_threads = 1;
  auto* ren = app.add_subcommand("render", "Decode and render every frame (or the canonical pose) to PPM");
  ren->add_option("input", ren_in, "Container")->required();
  ren->add_option("-d,--out-dir", ren_dir, "Output directory")->required();
  ren->add_option("--template", ren_template, "Template file");
  ren->add_option("--camera", ren_camera, "Camera text file overriding the stream camera");
  ren->add_flag("--canonical", ren_canonical, "Render only the canonical pose from the structural layer");
  ren->add_option("--threads", ren_threads, "Rasterizer threads");

  // drive
  std::string drv_in, drv_poses, drv_dir, drv_template, drv_camera, drv_basis;
  int drv_components = 0;
  double drv_k = 3.0;
  auto* drv = app.add_subcommand("drive", "Project new poses into the stream's pose space and render them");
  drv->add_option("input", drv_in, "Container")->required();
  drv->add_option("--poses", drv_poses, "HGPS file with the driving poses")->required();
  drv->add_option("-d,--out-dir", drv_dir, "Output directory")->required();
  drv->add_option("--components", drv_components, "PCA components (0 = as many as the data supports)");
  drv->add_option("-k,--k", drv_k, "Clipping band in standard deviations");
  drv->add_option("--template", drv_template, "Template file");
  drv->add_option("--camera", drv_camera, "Camera text file");
  drv->add_option("--save-basis", drv_basis, "Write the fitted HGPC basis here");

  // fit
  FitConfig fit_cfg;
  std::string fit_out;
  std::uint64_t fit_init_seed = 0;
  auto* fit = app.add_subcommand("fit", "Fit the generator on the toy two-Gaussian scene");
  fit->add_option("-o,--out", fit_out, "Output HGWT weights");
  fit->add_option("--iterations", fit_cfg.iterations, "Fitting iterations");
  fit->add_option("--alpha", fit_cfg.alpha, "Facial weight alpha");
  fit->add_option("--total-iter", fit_cfg.total_iter, "Iteration at which the facial weight saturates");
  fit->add_option("--w-l1", fit_cfg.weights.w_l1, "L1 weight");
  fit->add_option("--w-mask", fit_cfg.weights.w_mask, "Mask weight");
  fit->add_option("--w-lpips", fit_cfg.weights.w_lpips, "Perceptual weight");
  fit->add_option("--w-offset", fit_cfg.weights.w_offset, "Offset regularizer weight");
  fit->add_option("--seed", fit_cfg.seed, "Seed of the perturbation sequence");
  fit->add_option("--init-seed", fit_init_seed, "Seed of the initial weights");

  // report
  std::string rep_in;
  auto* rep = app.add_subcommand("report", "Per-layer byte composition as CSV");
  rep->add_option("input", rep_in, "Container")->required();

  // rd-sweep
  SceneArgs rd_scene;
  std::vector<int> rd_bits{8, 7, 6, 5, 4, 3, 2};
  std::vector<std::string> rd_steps{"1/255", "2/255", "4/255", "8/255"};
  int rd_threads = 1;
  auto* rd = app.add_subcommand("rd-sweep", "Rate-distortion sweep over bit widths and pose-map steps as CSV");
  add_scene_options(rd, rd_scene);
  rd->add_option("--bits-grid", rd_bits, "Bit widths")->delimiter(',');
  rd->add_option("--step-grid", rd_steps, "Pose-map steps")->delimiter(',');
  rd->add_option("--threads", rd_threads, "Grid points processed in parallel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  if (*enc) {
    const BuiltScene b = build_scene(enc_scene);
    EncodeOptions opt;
    opt.quant.bit_width = enc_bits;
    opt.step = parse_steps({enc_step}).front();
    opt.include_motion = !enc_structural_only;
    if (!(opt.step >= kMinPoseMapStep && opt.step <= 1.0)) throw InvalidArgument("step must lie in [2^-24, 1]");
    EncodedScene e = encode_scene(b.scene, opt);
    if (!b.synthetic_template) {
      // Re-mux with the template identified by file CRC instead of seed.
      StreamMetadata meta = scene_metadata(b.scene, opt);
      meta.synthetic_template = false;
      meta.template_crc = b.template_crc;
      MemorySource src(e.container);
      Demuxer demux(src);
      std::vector<Section> sections;
      for (const auto& entry : demux.entries()) {
        sections.push_back({entry.layer, entry.codec,
                            entry.layer == LayerId::kMetadata ? serialize_metadata(meta) : demux.read(entry.layer)});
      }
      e.container = mux(sections);
    }
    write_file(enc_out, e.container);
    std::cerr << "wrote " << enc_out << ": " << e.container.size() << " bytes, " << b.scene.poses.size()
              << " frames, " << static_cast<double>(e.container.size()) / b.scene.poses.size() << " bytes/frame\n";
    return 0;
  }

  if (*dec) {
    FileSource src(dec_in);
    const DecodedLayers d = decode_all(src);
    std::cout << "structural: " << (d.weights ? "present" : "absent") << "\n"
              << "smplx frames: " << d.poses.size() << "\n"
              << "posemap frames: " << d.pose_maps.size() << "\n";
    if (d.metadata) {
      std::cout << "map resolution: " << d.metadata->map_resolution << "\nbit width: " << d.metadata->bit_width
                << "\nstep: " << d.metadata->step << "\n";
    }
    if (!dec_dir.empty()) {
      fs::create_directories(dec_dir);
      if (d.weights) save_weights(*d.weights, fs::path(dec_dir) / "weights.hgwt");
      if (!d.poses.empty()) save_poses(d.poses, fs::path(dec_dir) / "poses.hgps");
      if (d.metadata) save_camera(d.metadata->camera, fs::path(dec_dir) / "camera.txt");
    }
    return 0;
  }

  if (*ren) {
    FileSource src(ren_in);
    RenderOptions ro;
    ro.threads = ren_threads;
    fs::create_directories(ren_dir);
    if (ren_canonical) {
      // Progressive path: only the structural and metadata sections are read.
      Demuxer demux(src);
      if (!demux.find(LayerId::kMetadata)) throw DecodeError("stream has no metadata section");
      const StreamMetadata meta = parse_metadata(demux.read(LayerId::kMetadata));
      const GeneratorWeights w = decode_structural(src);
      const AvatarRig rig = receiver_rig(meta, ren_template, ren_camera);
      write_ppm(fs::path(ren_dir) / "canonical.ppm", render_canonical(rig, w, ro).color);
      return 0;
    }
    const DecodedLayers d = decode_all(src);
    const StreamMetadata meta = require_metadata(d);
    const AvatarRig rig = receiver_rig(meta, ren_template, ren_camera);
    if (d.poses.empty()) {
      write_ppm(fs::path(ren_dir) / "canonical.ppm", render_canonical(rig, *d.weights, ro).color);
      return 0;
    }
    for (std::size_t f = 0; f < d.poses.size(); ++f) {
      const PoseMapPair maps = f < d.pose_maps.size() ? d.pose_maps[f] : pose_maps_for(rig, d.poses[f]);
      write_ppm(frame_path(ren_dir, "frame", f), render_frame(rig, *d.weights, d.poses[f], maps, ro).color);
    }
    return 0;
  }

  if (*drv) {
    FileSource src(drv_in);
    const DecodedLayers d = decode_all(src);
    const StreamMetadata meta = require_metadata(d);
    if (d.poses.size() < 2) throw InvalidArgument("drive needs a stream with at least two motion frames");
    const AvatarRig rig = receiver_rig(meta, drv_template, drv_camera);
    const auto driving = load_poses(drv_poses);
    const int max_d = static_cast<int>(std::min<std::size_t>(d.poses.size() - 1, flatten_pose(d.poses[0]).size()));
    std::optional<PoseSpace> space;
    if (drv_components > 0) {
      space = fit_pose_space(d.poses, {}, drv_components, drv_k);
    } else {
      for (int c = max_d; c >= 1 && !space; --c) {
        try {
          space = fit_pose_space(d.poses, {}, c, drv_k);
        } catch (const InvalidArgument&) {
        }
      }
      if (!space) throw InvalidArgument("training poses carry no variation to build a pose space from");
    }
    if (!drv_basis.empty()) save_basis(space->basis, drv_basis);
    fs::create_directories(drv_dir);
    for (std::size_t f = 0; f < driving.size(); ++f) {
      const SmplxPose p = project_pose(*space, driving[f], nullptr).pose;
      write_ppm(frame_path(drv_dir, "drive", f), render_frame(rig, *d.weights, p, pose_maps_for(rig, p)).color);
    }
    std::cerr << "rendered " << driving.size() << " frames with " << space->basis.rank() << " components\n";
    return 0;
  }

  if (*fit) {
    const FitScene scene = make_toy_fit_scene();
    GeneratorInit init;
    init.seed = fit_init_seed;
    init.gaussian_scale = 0.03f;
    const FitResult r = fit_generator(init_weights(init), scene, fit_cfg);
    std::cout << "stage,l1,mask,lpips,offset,total,face_l1\n";
    for (const auto& [name, t] : {std::pair{"initial", r.initial}, std::pair{"final", r.final}}) {
      std::cout << name << ',' << t.l1 << ',' << t.mask << ',' << t.lpips << ',' << t.offset << ',' << t.total << ','
                << t.face_l1 << "\n";
    }
    if (!fit_out.empty()) save_weights(r.weights, fit_out);
    return 0;
  }

  if (*rep) {
    FileSource src(rep_in);
    std::cout << composition_csv(report_composition(src));
    return 0;
  }

  if (*rd) {
    const BuiltScene b = build_scene(rd_scene);
    std::cout << rd_csv(rd_sweep(b.scene, rd_bits, parse_steps(rd_steps), rd_threads));
    return 0;
  }
  return kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const DecodeError& e) {
    std::cerr << "decode error: " << e.what() << "\n";
    return kExitDecode;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid number: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
