// Copyright 2026 The Flashmat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flashmat/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace flashmat {

std::string to_string(Flip f) {
  switch (f) {
    case Flip::kNone:
      return "none";
    case Flip::kX:
      return "x";
    case Flip::kY:
      return "y";
  }
  return "none";
}

void validate(const AugmentPlan& plan) {
  if (plan.crop_sizes.size() != plan.crop_counts.size()) {
    throw InvalidArgument("augment plan: crop_sizes and crop_counts differ in length");
  }
  for (std::size_t i = 0; i < plan.crop_sizes.size(); ++i) {
    if (plan.crop_sizes[i] <= 0) throw InvalidArgument("augment plan: crop sizes must be positive");
    if (plan.crop_counts[i] < 0) throw InvalidArgument("augment plan: crop counts must be >= 0");
  }
  if (plan.output_size <= 0) throw InvalidArgument("augment plan: output_size must be positive");
}

std::size_t expected_patch_count(const AugmentPlan& plan) {
  const int crops = std::accumulate(plan.crop_counts.begin(), plan.crop_counts.end(), 0);
  return static_cast<std::size_t>(crops) * kGeometricVariants;
}

std::vector<PatchDescriptor> patch_plan(const AugmentPlan& plan, Extent source) {
  validate(plan);
  Rng rng(plan.seed);
  std::vector<PatchDescriptor> out;
  out.reserve(expected_patch_count(plan));
  for (std::size_t s = 0; s < plan.crop_sizes.size(); ++s) {
    const int size = plan.crop_sizes[s];
    if (plan.crop_counts[s] == 0) continue;
    if (size > source.width || size > source.height) {
      throw DataError("augment: source " + to_string(source) + " is smaller than crop size " +
                      std::to_string(size));
    }
    std::uniform_int_distribution<int> xs(0, source.width - size);
    std::uniform_int_distribution<int> ys(0, source.height - size);
    for (int c = 0; c < plan.crop_counts[s]; ++c) {
      PatchDescriptor base;
      base.crop_size = size;
      base.crop_x = xs(rng);
      base.crop_y = ys(rng);
      for (int v = 0; v < kGeometricVariants; ++v) {
        PatchDescriptor d = base;
        if (v == 1) d.flip = Flip::kX;
        if (v == 2) d.flip = Flip::kY;
        if (v >= 3) d.rotation_deg = 45 * (v - 2);
        d.draw_seed = rng();
        out.push_back(d);
      }
    }
  }
  return out;
}

namespace {

// Forward transform of world-frame (x right, y up) offsets.
Eigen::Vector2d forward(const PatchDescriptor& p, const Eigen::Vector2d& v) {
  if (p.flip == Flip::kX) return {-v.x(), v.y()};
  if (p.flip == Flip::kY) return {v.x(), -v.y()};
  const double t = p.rotation_deg * std::numbers::pi / 180.0;
  const double c = std::cos(t);
  const double s = std::sin(t);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

Eigen::Vector2d inverse(const PatchDescriptor& p, const Eigen::Vector2d& v) {
  if (p.flip != Flip::kNone) return forward(p, v);
  PatchDescriptor back = p;
  back.rotation_deg = -p.rotation_deg;
  return forward(back, v);
}

template <typename T>
T bilinear(const Image<T>& img, double x, double y) {
  // x, y in pixel units with pixel centers at integer + 0.5.
  const double fx = std::clamp(x - 0.5, 0.0, static_cast<double>(img.width() - 1));
  const double fy = std::clamp(y - 0.5, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double tx = fx - x0;
  const double ty = fy - y0;
  const T top = img(y0, x0) * (1.0 - tx) + img(y0, x1) * tx;
  const T bottom = img(y1, x0) * (1.0 - tx) + img(y1, x1) * tx;
  return top * (1.0 - ty) + bottom * ty;
}

}  // namespace

SvbrdfMaps materialize_patch(const SvbrdfMaps& source, const PatchDescriptor& patch,
                             int output_size) {
  validate_maps(source);
  if (output_size <= 0) throw InvalidArgument("materialize_patch: output size must be positive");
  if (patch.crop_x < 0 || patch.crop_y < 0 || patch.crop_x + patch.crop_size > source.extent().width ||
      patch.crop_y + patch.crop_size > source.extent().height) {
    throw DataError("materialize_patch: crop lies outside the source");
  }
  const double t = patch.rotation_deg * std::numbers::pi / 180.0;
  const double inscribed =
      patch.crop_size / (std::abs(std::cos(t)) + std::abs(std::sin(t)));
  const double cx = patch.crop_x + 0.5 * patch.crop_size;
  const double cy = patch.crop_y + 0.5 * patch.crop_size;

  SvbrdfMaps out;
  const Extent e{output_size, output_size};
  out.albedo = ColorMap(e);
  out.normal = NormalMap(e);
  out.roughness = ScalarMap(e);
  out.f0 = source.f0;
  for (int row = 0; row < output_size; ++row) {
    for (int col = 0; col < output_size; ++col) {
      const Eigen::Vector2d q(((col + 0.5) / output_size - 0.5) * inscribed,
                              -((row + 0.5) / output_size - 0.5) * inscribed);
      const Eigen::Vector2d p = inverse(patch, q);
      const double sx = cx + p.x();
      const double sy = cy - p.y();
      out.albedo(row, col) = bilinear(source.albedo, sx, sy);
      out.roughness(row, col) = bilinear(source.roughness, sx, sy);
      const Vec3 n = bilinear(source.normal, sx, sy);
      const Eigen::Vector2d xy = forward(patch, Eigen::Vector2d(n.x(), n.y()));
      out.normal(row, col) = Vec3(xy.x(), xy.y(), n.z()).normalized();
    }
  }
  return out;
}

double draw_albedo_scale(Rng& rng) {
  return std::uniform_real_distribution<double>(kAlbedoScaleMin, kAlbedoScaleMax)(rng);
}

double draw_normal_scale(Rng& rng) { return draw_albedo_scale(rng); }

double draw_roughness_scale(Rng& rng) {
  return std::normal_distribution<double>(1.0, kRoughnessScaleStd)(rng);
}

ColorMap apply_albedo_scale(const ColorMap& albedo, double scale) {
  ColorMap out(albedo.extent());
  for (std::size_t i = 0; i < albedo.size(); ++i) out[i] = (albedo[i] * scale).cwiseMax(0.0);
  return out;
}

NormalMap apply_normal_scale(const NormalMap& normal, double scale) {
  NormalMap out(normal.extent());
  for (std::size_t i = 0; i < normal.size(); ++i) {
    const Vec3& n = normal[i];
    out[i] = Vec3(n.x() * scale, n.y() * scale, n.z()).normalized();
  }
  return out;
}

ScalarMap apply_roughness_scale(const ScalarMap& roughness, double scale) {
  ScalarMap out(roughness.extent());
  for (std::size_t i = 0; i < roughness.size(); ++i) {
    out[i] = std::clamp(roughness[i] * scale, kMinRoughness, kMaxRoughness);
  }
  return out;
}

ColorMap scale_albedo(const ColorMap& albedo, Rng& rng) {
  return apply_albedo_scale(albedo, draw_albedo_scale(rng));
}

NormalMap scale_normal(const NormalMap& normal, Rng& rng) {
  return apply_normal_scale(normal, draw_normal_scale(rng));
}

ScalarMap scale_roughness(const ScalarMap& roughness, Rng& rng) {
  return apply_roughness_scale(roughness, draw_roughness_scale(rng));
}

ScaleDraws draw_patch_scales(const PatchDescriptor& patch) {
  Rng rng(patch.draw_seed);
  ScaleDraws d;
  d.albedo = draw_albedo_scale(rng);
  d.normal = draw_normal_scale(rng);
  d.roughness = draw_roughness_scale(rng);
  return d;
}

SvbrdfMaps augment_patch(const SvbrdfMaps& source, const PatchDescriptor& patch, int output_size) {
  SvbrdfMaps out = materialize_patch(source, patch, output_size);
  const ScaleDraws d = draw_patch_scales(patch);
  out.albedo = apply_albedo_scale(out.albedo, d.albedo);
  out.normal = apply_normal_scale(out.normal, d.normal);
  out.roughness = apply_roughness_scale(out.roughness, d.roughness);
  return out;
}

}  // namespace flashmat
