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

// Lambertian photometric stereo with per-pixel trimming of the brightest
// and darkest observations.

#pragma once

#include <span>
#include <vector>

#include "flashmat/image.hpp"

namespace flashmat {

struct PsObservationSet {
  std::vector<RadianceImage> images;
  std::vector<Vec3> light_dirs;  // unit, surface toward light
  int trim_high = 5;
  int trim_low = 5;
};

void validate(const PsObservationSet& obs);

// Indices kept after removing the trim_high largest and trim_low smallest
// intensities. Ties break toward the lower index: among equal values the
// lower index counts as smaller. Result is in ascending index order.
std::vector<int> trim_observations(std::span<const double> intensities, int trim_high,
                                   int trim_low);

struct PsResult {
  NormalMap normal;
  ColorMap albedo;
  Image<unsigned char> degenerate;  // 1 where |g| < 1e-9
};

inline constexpr double kPsDegenerateNorm = 1e-9;

// Per pixel: least squares I_k ~ l_k . g on the luma of the kept
// observations, normal = g / |g| (z flipped positive), albedo_c = |g_c| from
// a per-channel solve over the same kept set.
PsResult lambertian_ps(const PsObservationSet& obs);

}  // namespace flashmat
