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

// Pointwise microfacet BRDF: GGX distribution, Schlick-style Fresnel with the
// spherical-Gaussian exponent, and Smith-Schlick shadowing/masking.

#pragma once

#include "flashmat/image.hpp"

namespace flashmat {

// Roughness floor. alpha = r^2 collapses D to a delta as r -> 0.
inline constexpr double kMinRoughness = 0.1;
inline constexpr double kMaxRoughness = 1.0;
// Lower clamp on n.l and n.v before they divide the specular lobe.
inline constexpr double kCosEpsilon = 1e-6;

inline constexpr double kF0NonMetal = 0.05;
inline constexpr double kF0Metal = 0.5;

struct BrdfParams {
  Vec3 diffuse = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double roughness = 1.0;
  double f0 = kF0NonMetal;
};

struct ShadingVectors {
  Vec3 view = Vec3::UnitZ();
  Vec3 light = Vec3::UnitZ();
  Vec3 half = Vec3::UnitZ();
};

// Builds unit view/light/half vectors from (not necessarily unit) directions.
// When view + light cancels, the half vector falls back to +z.
ShadingVectors make_shading_vectors(const Vec3& view, const Vec3& light);

// Roughness is clamped to [kMinRoughness, kMaxRoughness].
double distribution_term(double n_dot_h, double roughness);
double fresnel_term(double v_dot_h, double f0);
double geometry_term(double n_dot_v, double n_dot_l, double roughness);

// G1 evaluated at one cosine, k = (r + 1)^2 / 8.
double smith_g1(double n_dot_x, double roughness);

// d + D F G / (4 (n.l)(n.v)); cosines clamped from below by kCosEpsilon.
Vec3 eval_brdf(const BrdfParams& params, const ShadingVectors& vectors);

// Achromatic specular part of eval_brdf.
double eval_specular(const BrdfParams& params, const ShadingVectors& vectors);

double f0_dielectric(double eta);
double f0_conductor(double eta, double kappa);

}  // namespace flashmat
