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

// Analytic derivatives of rendered radiance with respect to the per-pixel
// material parameters, and a central-difference verifier.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "flashmat/scene.hpp"

namespace flashmat {

using Mat3 = Eigen::Matrix3d;

// Row c of each Jacobian holds d radiance_c / d parameter.
struct GradientField {
  Image<Mat3> d_albedo;
  // With respect to the unnormalized normal vector, composed through
  // n = m / |m| and evaluated at |m| = 1.
  Image<Mat3> d_normal;
  Image<Vec3> d_roughness;
};

struct PixelGradient {
  Mat3 d_albedo = Mat3::Zero();
  Mat3 d_normal = Mat3::Zero();
  Vec3 d_roughness = Vec3::Zero();
};

// Derivatives of shade_pixel(). Clamps are treated as locally constant when
// active; a value sitting exactly on a clamp takes the unclamped branch.
PixelGradient shade_pixel_gradient(const BrdfParams& params, const PixelGeometry& geometry,
                                   const Vec3& ambient);

struct RenderWithGradients {
  RadianceImage image;
  GradientField gradients;
};

RenderWithGradients render_with_gradients(const SvbrdfMaps& maps, const SceneConfig& config,
                                          ViewModel view = ViewModel::kPinhole);

enum class ParamClass { kAlbedo, kNormal, kRoughness };

std::string to_string(ParamClass c);

struct DiscrepancyStats {
  double max_rel_error = 0.0;  // over entries with magnitude >= kGradcheckSmall
  double max_abs_error = 0.0;  // over all compared entries
  double max_abs_error_small = 0.0;  // over entries with magnitude < kGradcheckSmall
  std::size_t compared = 0;
  std::size_t failures = 0;
};

inline constexpr double kGradcheckRelTol = 1e-4;
inline constexpr double kGradcheckAbsTol = 1e-7;
inline constexpr double kGradcheckSmall = 1e-3;

struct GradcheckReport {
  DiscrepancyStats albedo;
  DiscrepancyStats normal;
  DiscrepancyStats roughness;
  std::vector<std::pair<int, int>> checked_pixels;
  std::vector<std::pair<int, int>> skipped_pixels;
  double step = 0.0;

  [[nodiscard]] bool passed() const {
    return albedo.failures == 0 && normal.failures == 0 && roughness.failures == 0;
  }
  [[nodiscard]] const DiscrepancyStats& stats(ParamClass c) const;
  DiscrepancyStats& stats(ParamClass c);
};

// Which of the 7 scalar parameters of a pixel (3 albedo, 3 normal, 1
// roughness) a sample perturbs.
struct ParamSample {
  int row = 0;
  int col = 0;
  int param = 0;  // 0..2 albedo, 3..5 normal, 6 roughness
};

// Compares analytic gradients at the listed pixels (all 7 parameters each)
// with central differences of render_image(). Pixels whose n.l or n.v lies
// within kCosEpsilon + 10 * step of a clamp, or whose roughness is within
// step of either bound, are skipped and reported.
GradcheckReport finite_diff_check(const SvbrdfMaps& maps, const SceneConfig& config, double step,
                                  const std::vector<std::pair<int, int>>& pixel_sample);

// Same comparison restricted to individual (pixel, parameter) samples.
GradcheckReport finite_diff_check(const SvbrdfMaps& maps, const SceneConfig& config, double step,
                                  const std::vector<ParamSample>& samples);

}  // namespace flashmat
