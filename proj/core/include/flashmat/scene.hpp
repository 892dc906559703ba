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

// Forward rendering of SVBRDF maps on a planar patch seen by a pinhole
// camera and lit by a point light plus a constant ambient term.

#pragma once

#include <cstdint>

#include "flashmat/brdf.hpp"
#include "flashmat/image.hpp"

namespace flashmat {

struct SvbrdfMaps {
  ColorMap albedo;
  NormalMap normal;
  ScalarMap roughness;
  double f0 = kF0NonMetal;

  [[nodiscard]] Extent extent() const { return albedo.extent(); }
  [[nodiscard]] BrdfParams params_at(std::size_t i) const {
    return {albedo[i], normal[i], roughness[i], f0};
  }
};

// Throws DataError if the maps violate their invariants (matching extents,
// unit normals with z > 0, roughness in [kMinRoughness, 1], albedo >= 0).
void validate_maps(const SvbrdfMaps& maps);

// Uniform maps: flat normals, constant albedo and roughness.
SvbrdfMaps make_uniform_maps(Extent extent, const Vec3& albedo, double roughness,
                             double f0 = kF0NonMetal);

inline constexpr double kDefaultFovDeg = 43.35;
inline constexpr double kDefaultHalfExtent = 1.0;
// Radiance of a flat white Lambertian pixel straight below a collocated light.
inline constexpr double kDefaultCenterRadiance = 0.8;
inline constexpr double kDefaultFlashSigmaFrac = 0.05;

struct SceneConfig {
  double fov_deg = kDefaultFovDeg;
  double surface_half_extent = kDefaultHalfExtent;
  Vec3 light_position = Vec3::Zero();
  Vec3 light_intensity = Vec3::Ones();
  Vec3 ambient = Vec3::Zero();
  Extent resolution{256, 256};

  [[nodiscard]] double camera_height() const;
  [[nodiscard]] Vec3 camera_position() const;
};

// Collocated flash at the camera with the default intensity calibration.
SceneConfig default_scene(Extent resolution);

// Throws InvalidArgument when fov/extent/light violate SceneConfig invariants.
void validate_scene(const SceneConfig& config);

enum class ViewModel {
  kPinhole,  // view vector points at the camera center
  kDistant,  // view vector is +z everywhere
};

Vec3 pixel_world_position(const SceneConfig& config, int row, int col);

// Per-pixel light transport quantities that do not depend on the material.
struct PixelGeometry {
  Vec3 position;
  ShadingVectors vectors;
  Vec3 irradiance;  // light_intensity / dist^2
};

PixelGeometry pixel_geometry(const SceneConfig& config, int row, int col,
                             ViewModel view = ViewModel::kPinhole);

// Radiance leaving one pixel: brdf * (n.l)+ * irradiance + albedo * ambient.
Vec3 shade_pixel(const BrdfParams& params, const PixelGeometry& geometry,
                 const Vec3& ambient);

RadianceImage render_image(const SvbrdfMaps& maps, const SceneConfig& config,
                           ViewModel view = ViewModel::kPinhole);

inline constexpr double kToneClampMax = 1.5;
inline constexpr double kToneGamma = 2.2;

double tonemap(double x);
// Zero inside the saturated clamp region (x > 1.5 and x < 0).
double tonemap_derivative(double x);
Vec3 tonemap(const Vec3& rgb);
RadianceImage tonemap(const RadianceImage& image);

// Uniform in solid angle on the upper hemisphere of the given radius.
Vec3 sample_novel_light(std::uint64_t seed, double radius);

// Camera position plus isotropic Gaussian jitter of sigma_frac * camera height.
Vec3 sample_flash_position(std::uint64_t seed, const SceneConfig& config,
                           double sigma_frac = kDefaultFlashSigmaFrac);

}  // namespace flashmat
