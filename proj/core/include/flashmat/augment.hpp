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

// Dataset augmentation: crop/flip/rotate patch plans and per-patch scaling
// of the BRDF parameter maps.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "flashmat/scene.hpp"

namespace flashmat {

using Rng = std::mt19937_64;

struct AugmentPlan {
  std::vector<int> crop_sizes{512, 1024, 2048, 3072, 4096};
  std::vector<int> crop_counts{12, 8, 4, 2, 1};
  int output_size = 256;
  std::uint64_t seed = 0;
};

// identity, flip x, flip y, and the seven non-identity multiples of 45 degrees.
inline constexpr int kGeometricVariants = 10;

enum class Flip { kNone, kX, kY };

std::string to_string(Flip f);

struct PatchDescriptor {
  int crop_x = 0;  // top-left column in the source
  int crop_y = 0;  // top-left row in the source
  int crop_size = 0;
  Flip flip = Flip::kNone;
  int rotation_deg = 0;
  std::uint64_t draw_seed = 0;  // seeds this patch's parameter scaling

  friend bool operator==(const PatchDescriptor&, const PatchDescriptor&) = default;
};

void validate(const AugmentPlan& plan);

// (sum of crop counts) x 10 descriptors, deterministic in plan.seed.
std::vector<PatchDescriptor> patch_plan(const AugmentPlan& plan, Extent source);

std::size_t expected_patch_count(const AugmentPlan& plan);

// Samples the flipped/rotated crop with bilinear interpolation, keeping the
// largest axis-aligned square inscribed in the rotated crop, resampled to
// output_size. Normal xy components are rotated/flipped with the pixels.
SvbrdfMaps materialize_patch(const SvbrdfMaps& source, const PatchDescriptor& patch,
                             int output_size);

inline constexpr double kAlbedoScaleMin = 0.8;
inline constexpr double kAlbedoScaleMax = 1.4;
inline constexpr double kRoughnessScaleStd = 0.2;

double draw_albedo_scale(Rng& rng);
double draw_normal_scale(Rng& rng);
double draw_roughness_scale(Rng& rng);

ColorMap apply_albedo_scale(const ColorMap& albedo, double scale);
NormalMap apply_normal_scale(const NormalMap& normal, double scale);
ScalarMap apply_roughness_scale(const ScalarMap& roughness, double scale);

ColorMap scale_albedo(const ColorMap& albedo, Rng& rng);
NormalMap scale_normal(const NormalMap& normal, Rng& rng);
ScalarMap scale_roughness(const ScalarMap& roughness, Rng& rng);

struct ScaleDraws {
  double albedo = 1.0;
  double normal = 1.0;
  double roughness = 1.0;
};

// Independent draws for the three maps, seeded by patch.draw_seed.
ScaleDraws draw_patch_scales(const PatchDescriptor& patch);

// materialize_patch followed by the patch's parameter scaling.
SvbrdfMaps augment_patch(const SvbrdfMaps& source, const PatchDescriptor& patch, int output_size);

}  // namespace flashmat
