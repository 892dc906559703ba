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

// Non-neural SVBRDF estimators: per-pixel coarse-to-fine roughness search
// and projected gradient descent through the differentiable renderer.

#pragma once

#include <vector>

#include "flashmat/diff_render.hpp"
#include "flashmat/scene.hpp"

namespace flashmat {

struct GridSearchConfig {
  int levels = 3;
  int coarse_samples = 16;
  double range_min = kMinRoughness;
  double range_max = kMaxRoughness;
  double shrink = 0.25;  // bracket width of level l+1 relative to level l
};

void validate(const GridSearchConfig& gs);

// Sample spacing of the last refinement level.
double finest_grid_spacing(const GridSearchConfig& gs);

struct PixelSearchResult {
  double roughness = kMaxRoughness;
  double residual = 0.0;
  std::vector<double> level_residuals;  // best squared residual after each level
};

// Searches one pixel; `base` supplies diffuse, normal and f0.
PixelSearchResult search_pixel_roughness(const Vec3& observed, const BrdfParams& base,
                                         const PixelGeometry& geometry, const Vec3& ambient,
                                         const GridSearchConfig& gs);

// Per pixel, the roughness minimizing |render - observed|^2 over RGB.
// Ties go to the larger roughness.
ScalarMap roughness_grid_search(const RadianceImage& observed, const ColorMap& albedo,
                                const NormalMap& normal, double f0, const SceneConfig& config,
                                const GridSearchConfig& gs = {});

// Observation under an additional light position.
struct LitObservation {
  Vec3 light_position = Vec3::Zero();
  RadianceImage image;
};

struct FitConfig {
  double step_albedo = 4.0;
  double step_normal = 2.0;
  double step_roughness = 2.0;
  int max_iters = 500;
  double loss_tolerance = 1e-14;
  int max_halvings = 40;
  std::vector<LitObservation> novel_lights;
};

void validate(const FitConfig& fit);

struct FitResult {
  SvbrdfMaps maps;
  std::vector<double> loss_trace;  // initial loss, then one entry per accepted step
  int iterations = 0;
};

// Mean over observations, pixels and channels of the squared difference of
// tonemapped radiance.
double tonemapped_fit_loss(const SvbrdfMaps& maps, const RadianceImage& observed,
                           const SceneConfig& config,
                           const std::vector<LitObservation>& novel_lights = {});

// Projected gradient descent with accept-on-improvement and step halving.
// Throws DataError when the loss becomes non-finite.
FitResult fit_svbrdf_gd(const RadianceImage& observed, const SvbrdfMaps& init,
                        const SceneConfig& config, const FitConfig& fit = {});

// Albedo that explains the observation with flat normals and no specular:
// observed / ((n.l)+ E + ambient).
ColorMap albedo_from_observation(const RadianceImage& observed, const SceneConfig& config);

// Clamp albedo to >= 0, roughness to [r_min, 1], renormalize normals and keep z > 0.
void project_to_valid(SvbrdfMaps& maps);

}  // namespace flashmat
