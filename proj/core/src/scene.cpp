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

#include "flashmat/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace flashmat {

void validate_maps(const SvbrdfMaps& maps) {
  require_same_extent(maps.albedo, maps.normal, "svbrdf maps");
  require_same_extent(maps.albedo, maps.roughness, "svbrdf maps");
  if (!(maps.f0 >= 0.0 && maps.f0 <= 1.0)) throw DataError("f0 outside [0, 1]");
  for (std::size_t i = 0; i < maps.albedo.size(); ++i) {
    const Vec3& a = maps.albedo[i];
    if (!a.allFinite() || (a.array() < 0.0).any()) {
      throw DataError("albedo must be finite and non-negative at pixel " + std::to_string(i));
    }
    const Vec3& n = maps.normal[i];
    if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-5 || !(n.z() > 0.0)) {
      throw DataError("normal must be unit length with z > 0 at pixel " + std::to_string(i));
    }
    const double r = maps.roughness[i];
    if (!(r >= kMinRoughness - 1e-12 && r <= kMaxRoughness + 1e-12)) {
      throw DataError("roughness outside [r_min, 1] at pixel " + std::to_string(i));
    }
  }
}

SvbrdfMaps make_uniform_maps(Extent extent, const Vec3& albedo, double roughness, double f0) {
  SvbrdfMaps maps;
  maps.albedo = ColorMap(extent, albedo);
  maps.normal = NormalMap(extent, Vec3::UnitZ());
  maps.roughness = ScalarMap(extent, roughness);
  maps.f0 = f0;
  return maps;
}

double SceneConfig::camera_height() const {
  const double half_fov = fov_deg * std::numbers::pi / 360.0;
  return surface_half_extent / std::tan(half_fov);
}

Vec3 SceneConfig::camera_position() const { return {0.0, 0.0, camera_height()}; }

SceneConfig default_scene(Extent resolution) {
  SceneConfig config;
  config.resolution = resolution;
  const double h = config.camera_height();
  config.light_position = config.camera_position();
  config.light_intensity = Vec3::Constant(kDefaultCenterRadiance * h * h);
  return config;
}

void validate_scene(const SceneConfig& config) {
  if (!(config.fov_deg > 0.0 && config.fov_deg < 180.0)) {
    throw InvalidArgument("fov_deg must lie in (0, 180)");
  }
  if (!(config.surface_half_extent > 0.0)) {
    throw InvalidArgument("surface_half_extent must be positive");
  }
  if (!(config.light_position.z() > 0.0)) {
    throw InvalidArgument("light_position must have positive z");
  }
  if (config.resolution.height <= 0 || config.resolution.width <= 0) {
    throw InvalidArgument("resolution must be positive");
  }
}

Vec3 pixel_world_position(const SceneConfig& config, int row, int col) {
  const Extent res = config.resolution;
  const double e = config.surface_half_extent;
  const double x_ndc = 2.0 * (col + 0.5) / res.width - 1.0;
  const double y_ndc = 1.0 - 2.0 * (row + 0.5) / res.height;
  const double aspect = static_cast<double>(res.height) / res.width;
  return {x_ndc * e, y_ndc * e * aspect, 0.0};
}

PixelGeometry pixel_geometry(const SceneConfig& config, int row, int col, ViewModel view) {
  PixelGeometry g;
  g.position = pixel_world_position(config, row, col);
  const Vec3 to_light = config.light_position - g.position;
  const Vec3 to_view =
      view == ViewModel::kPinhole ? Vec3(config.camera_position() - g.position) : Vec3::UnitZ();
  g.vectors = make_shading_vectors(to_view, to_light);
  g.irradiance = config.light_intensity / to_light.squaredNorm();
  return g;
}

Vec3 shade_pixel(const BrdfParams& params, const PixelGeometry& geometry, const Vec3& ambient) {
  const double n_dot_l = params.normal.dot(geometry.vectors.light);
  const Vec3 ambient_term = params.diffuse.cwiseProduct(ambient);
  if (!(n_dot_l > 0.0)) return ambient_term;
  const Vec3 brdf = eval_brdf(params, geometry.vectors);
  return (brdf * n_dot_l).cwiseProduct(geometry.irradiance) + ambient_term;
}

RadianceImage render_image(const SvbrdfMaps& maps, const SceneConfig& config, ViewModel view) {
  require_same_extent(maps.albedo, maps.normal, "render_image");
  require_same_extent(maps.albedo, maps.roughness, "render_image");
  if (maps.extent() != config.resolution) {
    throw DimensionError("render_image: maps " + to_string(maps.extent()) +
                         " do not match scene resolution " + to_string(config.resolution));
  }
  RadianceImage out(config.resolution);
  for (int row = 0; row < out.height(); ++row) {
    for (int col = 0; col < out.width(); ++col) {
      const std::size_t i = out.index(row, col);
      out[i] = shade_pixel(maps.params_at(i), pixel_geometry(config, row, col, view),
                           config.ambient);
    }
  }
  return out;
}

double tonemap(double x) {
  return std::pow(std::clamp(x, 0.0, kToneClampMax), 1.0 / kToneGamma);
}

double tonemap_derivative(double x) {
  if (x > kToneClampMax || x <= 0.0) return 0.0;
  return (1.0 / kToneGamma) * std::pow(x, 1.0 / kToneGamma - 1.0);
}

Vec3 tonemap(const Vec3& rgb) { return {tonemap(rgb.x()), tonemap(rgb.y()), tonemap(rgb.z())}; }

RadianceImage tonemap(const RadianceImage& image) {
  RadianceImage out(image.extent());
  for (std::size_t i = 0; i < image.size(); ++i) out[i] = tonemap(image[i]);
  return out;
}

Vec3 sample_novel_light(std::uint64_t seed, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("sample_novel_light: radius must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  // z ~ U(0, 1] gives uniform solid angle on the hemisphere.
  const double z = 1.0 - uniform(rng);
  const double phi = 2.0 * std::numbers::pi * uniform(rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Vec3(s * std::cos(phi), s * std::sin(phi), z) * radius;
}

Vec3 sample_flash_position(std::uint64_t seed, const SceneConfig& config, double sigma_frac) {
  if (!(sigma_frac >= 0.0)) throw InvalidArgument("sample_flash_position: sigma_frac < 0");
  const Vec3 camera = config.camera_position();
  if (sigma_frac == 0.0) return camera;
  const double sigma = sigma_frac * config.camera_height();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  Vec3 p = camera;
  p.x() += normal(rng);
  p.y() += normal(rng);
  p.z() += normal(rng);
  const double min_z = 1e-6 * config.camera_height();
  p.z() = std::max(p.z(), min_z);
  return p;
}

}  // namespace flashmat
