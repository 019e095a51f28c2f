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

#include "lgc/loss.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lgc {

void LossWeights::validate() const {
  for (double w : {w_l1, w_mask, w_lpips, w_offset}) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidArgument("loss weights must be finite and nonnegative");
  }
}

namespace {

double schedule(const FacialWeightConfig& cfg) {
  if (cfg.total_iter <= 0) throw InvalidArgument("facial weight: total_iter must be positive");
  if (cfg.iter < 0) throw InvalidArgument("facial weight: iter must be nonnegative");
  if (!std::isfinite(cfg.alpha) || cfg.alpha < 0.0) {
    throw InvalidArgument("facial weight: alpha must be finite and nonnegative");
  }
  return std::min(1.0, static_cast<double>(cfg.iter) / static_cast<double>(cfg.total_iter));
}

}  // namespace

Eigen::MatrixXd facial_weight_map(const FacialWeightConfig& cfg) {
  const double ramp = schedule(cfg);
  Eigen::MatrixXd w(cfg.mask.height(), cfg.mask.width());
  for (int y = 0; y < cfg.mask.height(); ++y)
    for (int x = 0; x < cfg.mask.width(); ++x) w(y, x) = 1.0 + cfg.alpha * (cfg.mask.get(y, x) ? 1.0 : 0.0) * ramp;
  return w;
}

double weighted_perceptual(const FeatureStack& a, const FeatureStack& b, const FacialWeightConfig& cfg) {
  if (a.size() != b.size()) throw InvalidArgument("weighted_perceptual: layer counts differ");
  const double gain = cfg.alpha * schedule(cfg);
  const Mask& m = cfg.mask;
  const bool has_mask = m.height() > 0 && m.width() > 0;
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Image& fa = a[k];
    const Image& fb = b[k];
    if (!fa.same_shape(fb)) {
      throw InvalidArgument("weighted_perceptual: shape mismatch at layer " + std::to_string(k));
    }
    if (fa.empty()) continue;
    const int h = fa.height();
    const int w = fa.width();
    double sum = 0.0;
    for (int y = 0; y < h; ++y) {
      const int my = has_mask ? std::min(m.height() - 1, static_cast<int>((y + 0.5) * m.height() / h)) : 0;
      for (int x = 0; x < w; ++x) {
        double d = 0.0;
        const auto pa = fa.pixel(y, x);
        const auto pb = fb.pixel(y, x);
        for (std::size_t c = 0; c < pa.size(); ++c) {
          const double diff = double{pa[c]} - double{pb[c]};
          d += diff * diff;
        }
        double weight = 1.0;
        if (has_mask) {
          const int mx = std::min(m.width() - 1, static_cast<int>((x + 0.5) * m.width() / w));
          if (m.get(my, mx)) weight += gain;
        }
        sum += weight * d;
      }
    }
    total += sum / (static_cast<double>(h) * w * fa.channels());
  }
  return total;
}

double total_loss(double l1, double mask_loss, double lpips, double offset, const LossWeights& weights) {
  return weights.w_l1 * l1 + weights.w_mask * mask_loss + weights.w_lpips * lpips + weights.w_offset * offset;
}

FeatureExtractor::FeatureExtractor(std::uint64_t seed) {
  struct Layer {
    std::uint32_t in, out;
    int stride;
  };
  constexpr Layer layers[] = {{3, 8, 1}, {8, 16, 2}, {16, 16, 2}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  int index = 0;
  for (const auto& l : layers) {
    Tensor k{"feat" + std::to_string(index) + ".weight", {l.out, l.in, 3, 3}, {}};
    k.values.resize(k.numel());
    const float sd = std::sqrt(2.0f / static_cast<float>(l.in * 9));
    for (auto& v : k.values) v = sd * normal(rng);
    Tensor b{"feat" + std::to_string(index) + ".bias", {l.out}, std::vector<float>(l.out, 0.0f)};
    kernels_.push_back(std::move(k));
    biases_.push_back(std::move(b));
    strides_.push_back(l.stride);
    ++index;
  }
}

FeatureStack FeatureExtractor::features(const Image& rgb) const {
  if (rgb.channels() != 3) throw InvalidArgument("feature extractor expects an RGB image");
  FeatureStack out;
  const Image* x = &rgb;
  for (std::size_t i = 0; i < kernels_.size(); ++i) {
    Image y = nn::conv2d(*x, kernels_[i], biases_[i], strides_[i]);
    nn::leaky_relu(y, 0.2f);
    out.push_back(std::move(y));
    x = &out.back();
  }
  return out;
}

FitScene make_toy_fit_scene() {
  constexpr int kMap = 16;
  constexpr int kImage = 32;
  FitScene s;
  s.bbox.min = {-0.5, -0.5, -0.1};
  s.bbox.max = {0.5, 0.5, 0.1};

  s.input.front = Image(kMap, kMap, 3);
  s.input.back = Image(kMap, kMap, 3);
  s.input.mask_front = Mask(kMap, kMap);
  s.input.mask_back = Mask(kMap, kMap);
  s.depth_front = Image(kMap, kMap, 1);
  s.depth_back = Image(kMap, kMap, 1);
  for (int y = 0; y < kMap; ++y) {
    for (int x = 0; x < kMap; ++x) {
      const double u = (x + 0.5) / kMap - 0.5;
      const double v = (y + 0.5) / kMap - 0.5;
      if ((u * u) / (0.36 * 0.36) + (v * v) / (0.48 * 0.48) > 1.0) continue;
      for (bool front : {true, false}) {
        const double depth = front ? 0.75 : 0.25;
        const Eigen::Vector3d p = back_project(s.bbox, front, y, x, kMap, kMap, depth);
        const Eigen::Vector3d n = (p - s.bbox.min).cwiseQuotient(s.bbox.extent());
        Image& img = front ? s.input.front : s.input.back;
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(n[c]);
        (front ? s.input.mask_front : s.input.mask_back).set(y, x, true);
        (front ? s.depth_front : s.depth_back).at(y, x, 0) = static_cast<float>(depth);
      }
    }
  }

  s.camera.mode = Projection::kOrthographic;
  s.camera.rotation = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  s.camera.translation = {0.0, 0.0, 1.0};
  s.camera.fx = s.camera.fy = kImage;
  s.camera.cx = s.camera.cy = (kImage - 1) / 2.0;
  s.camera.width = s.camera.height = kImage;

  Gaussian3D face;
  face.position = {0.0, 0.3, 0.05};
  face.scale = {0.07, 0.07, 0.03};
  face.opacity = 0.95;
  face.color = {0.9, 0.6, 0.5};
  Gaussian3D body;
  body.position = {0.0, -0.1, 0.0};
  body.scale = {0.18, 0.28, 0.05};
  body.opacity = 0.95;
  body.color = {0.2, 0.3, 0.8};
  const std::vector<Gaussian3D> target{face, body};
  SplatImage r = rasterize(target, s.camera);
  s.target = std::move(r.color);
  s.target_alpha = std::move(r.alpha);

  s.face_mask = Mask(kImage, kImage);
  const double fu = s.camera.fx * face.position.x() + s.camera.cx;
  const double fv = -s.camera.fy * face.position.y() + s.camera.cy;
  const double radius = 2.5 * face.scale.x() * s.camera.fx;
  for (int y = 0; y < kImage; ++y)
    for (int x = 0; x < kImage; ++x)
      if (std::hypot(x - fu, y - fv) <= radius) s.face_mask.set(y, x, true);
  return s;
}

namespace {

// Loss pieces with the perceptual term split into its unweighted part and
// the extra face part, so the total can be re-scored at any schedule point.
struct Scored {
  LossTerms terms;     // lpips/total filled by at()
  double perceptual = 0.0;
  double face_gain_part = 0.0;  // d(perceptual)/d(schedule)

  double total(const LossWeights& w, double ramp) const {
    return total_loss(terms.l1, terms.mask, perceptual + ramp * face_gain_part, terms.offset, w);
  }
  LossTerms at(const LossWeights& w, double ramp) const {
    LossTerms t = terms;
    t.lpips = perceptual + ramp * face_gain_part;
    t.total = total(w, ramp);
    return t;
  }
};

Scored score(const GeneratorWeights& weights, const FitScene& scene, const FitConfig& cfg,
             const FeatureExtractor& fx) {
  GaussianMapPair maps = forward(weights, scene.input);
  maps.depth_front = scene.depth_front;
  maps.depth_back = scene.depth_back;
  const auto gaussians = extract_gaussians(maps, scene.bbox);
  const SplatImage img = rasterize(gaussians, scene.camera);

  Scored s;
  const auto pr = img.color.data();
  const auto pt = scene.target.data();
  double l1 = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i) l1 += std::abs(double{pr[i]} - double{pt[i]});
  s.terms.l1 = l1 / static_cast<double>(pr.size());

  const auto ar = img.alpha.data();
  const auto at = scene.target_alpha.data();
  double ml = 0.0;
  for (std::size_t i = 0; i < ar.size(); ++i) ml += std::abs(double{ar[i]} - double{at[i]});
  s.terms.mask = ml / static_cast<double>(ar.size());

  double off = 0.0;
  std::size_t count = 0;
  for (bool front : {true, false}) {
    const Image& g = front ? maps.front : maps.back;
    const Mask& m = front ? maps.mask_front : maps.mask_back;
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x) {
        if (!m.get(y, x)) continue;
        for (int c = 0; c < 3; ++c) off += double{g.at(y, x, gmap::kOffset + c)} * g.at(y, x, gmap::kOffset + c);
        ++count;
      }
  }
  s.terms.offset = count ? off / static_cast<double>(count) : 0.0;

  double face = 0.0;
  std::size_t face_count = 0;
  for (int y = 0; y < img.color.height(); ++y)
    for (int x = 0; x < img.color.width(); ++x) {
      if (!scene.face_mask.get(y, x)) continue;
      for (int c = 0; c < 3; ++c) face += std::abs(double{img.color.at(y, x, c)} - scene.target.at(y, x, c));
      ++face_count;
    }
  s.terms.face_l1 = face_count ? face / (3.0 * static_cast<double>(face_count)) : 0.0;

  const FeatureStack fr = fx.features(img.color);
  const FeatureStack ft = fx.features(scene.target);
  FacialWeightConfig plain{0.0, scene.face_mask, 0, 1};
  FacialWeightConfig full{cfg.alpha, scene.face_mask, 1, 1};
  s.perceptual = weighted_perceptual(fr, ft, plain);
  s.face_gain_part = weighted_perceptual(fr, ft, full) - s.perceptual;
  return s;
}

double ramp_at(const FitConfig& cfg, std::int64_t iter) {
  return std::min(1.0, static_cast<double>(iter) / static_cast<double>(cfg.total_iter));
}

void validate(const FitConfig& cfg) {
  cfg.weights.validate();
  if (cfg.iterations < 0) throw InvalidArgument("fit: iterations must be nonnegative");
  if (cfg.total_iter <= 0) throw InvalidArgument("fit: total_iter must be positive");
  if (!std::isfinite(cfg.alpha) || cfg.alpha < 0.0) throw InvalidArgument("fit: alpha must be nonnegative");
  if (!(cfg.perturbation > 0.0) || !std::isfinite(cfg.perturbation)) {
    throw InvalidArgument("fit: perturbation must be positive");
  }
}

}  // namespace

LossTerms evaluate_fit(const GeneratorWeights& weights, const FitScene& scene, const FitConfig& cfg,
                       const FeatureExtractor& features, std::int64_t iter) {
  validate(cfg);
  if (iter < 0) throw InvalidArgument("fit: iter must be nonnegative");
  return score(weights, scene, cfg, features).at(cfg.weights, ramp_at(cfg, iter));
}

FitResult fit_generator(const GeneratorWeights& initial, const FitScene& scene, const FitConfig& cfg) {
  validate(cfg);
  validate_weights(initial);
  const FeatureExtractor fx;
  const LossWeights& lw = cfg.weights;
  auto checked = [&](const GeneratorWeights& w, int iteration) {
    Scored s = score(w, scene, cfg, fx);
    if (!std::isfinite(s.total(lw, 0.0)) || !std::isfinite(s.total(lw, 1.0))) {
      throw NumericalError("fit diverged at iteration " + std::to_string(iteration));
    }
    return s;
  };

  FitResult result;
  result.weights = initial;
  Scored current = checked(initial, 0);
  result.initial = current.at(lw, 1.0);
  if (cfg.iterations == 0) {
    result.final = result.initial;
    return result;
  }

  std::vector<double> scale;
  for (const auto& t : initial.tensors) {
    double ss = 0.0;
    for (float v : t.values) ss += double{v} * v;
    scale.push_back(std::max(std::sqrt(ss / static_cast<double>(t.values.size())), 1e-3));
  }

  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution coin(0.5);
  double c = cfg.perturbation;
  GeneratorWeights plus = initial;
  GeneratorWeights minus = initial;
  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t t = 0; t < result.weights.tensors.size(); ++t) {
      const auto& base = result.weights.tensors[t].values;
      auto& p = plus.tensors[t].values;
      auto& m = minus.tensors[t].values;
      const double h = c * scale[t];
      for (std::size_t i = 0; i < base.size(); ++i) {
        const double d = coin(rng) ? h : -h;
        p[i] = static_cast<float>(base[i] + d);
        m[i] = static_cast<float>(base[i] - d);
      }
    }
    const Scored sp = checked(plus, it + 1);
    const Scored sm = checked(minus, it + 1);
    const double ramp = ramp_at(cfg, it);
    const bool plus_better = sp.total(lw, ramp) <= sm.total(lw, ramp);
    const Scored& best = plus_better ? sp : sm;
    if (best.total(lw, ramp) < current.total(lw, ramp) && best.total(lw, 1.0) <= current.total(lw, 1.0)) {
      result.weights = plus_better ? plus : minus;
      current = best;
      ++result.accepted;
      c = std::min(c * 1.5, 1.0);
    } else {
      c = std::max(c * 0.8, 1e-4);
    }
  }
  result.final = current.at(lw, 1.0);
  return result;
}

}  // namespace lgc
