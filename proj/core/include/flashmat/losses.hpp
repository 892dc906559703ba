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

#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "flashmat/scene.hpp"

namespace flashmat {

struct LossWeights {
  double lambda_d = 1.0;
  double lambda_n = 1.0;
  double lambda_r = 1.0;
  double lambda_rec = 1.0;
  double lambda_cls = 0.0005;
};

// Three bins over the angle between a target normal and +z.
struct NormalBinTable {
  std::array<double, 2> boundaries_deg{10.0, 25.0};
  std::array<double, 3> probabilities{};
  std::array<double, 3> weights{};

  [[nodiscard]] int bin_of(const Vec3& target_normal) const;
};

// Dataset distribution of normal angles: 0-10, 10-25, 25-90 degrees.
inline constexpr std::array<double, 3> kDatasetNormalBinProbabilities{0.592, 0.278, 0.130};

// W_i = 0.7 + 1 / (10 P_i).
std::array<double, 3> normal_bin_weights(const std::array<double, 3>& probabilities);
NormalBinTable make_normal_bin_table(
    const std::array<double, 3>& probabilities = kDatasetNormalBinProbabilities);

// Mean over pixels and channels of the squared difference.
double l2_map_loss(const ScalarMap& predicted, const ScalarMap& target);
double l2_map_loss(const ColorMap& predicted, const ColorMap& target);

double weighted_normal_loss(const NormalMap& predicted, const NormalMap& target,
                            const NormalBinTable& table);

// Mean over {input light} + novel lights of the L2 distance between
// tonemapped renders of the two map sets.
double recon_loss(const SvbrdfMaps& predicted, const SvbrdfMaps& target, const SceneConfig& config,
                  std::span<const Vec3> novel_lights = {});

struct LossBreakdown {
  double albedo = 0.0;
  double normal = 0.0;
  double roughness = 0.0;
  double recon = 0.0;
  double cls = 0.0;
  double total = 0.0;
};

LossBreakdown total_loss(const SvbrdfMaps& predicted, const SvbrdfMaps& target,
                         const LossWeights& weights, const NormalBinTable& table,
                         const SceneConfig& config, std::span<const Vec3> novel_lights = {});

inline constexpr double kProbabilityFloor = 1e-12;

// -w_label * log(max(p_label, 1e-12)). class_weights defaults to all ones.
double cross_entropy(std::span<const double> class_probs, int label,
                     std::span<const double> class_weights = {});

// total_loss plus lambda_cls * cross_entropy.
LossBreakdown total_loss_cls(const SvbrdfMaps& predicted, const SvbrdfMaps& target,
                             std::span<const double> class_probs, int label,
                             const LossWeights& weights, const NormalBinTable& table,
                             const SceneConfig& config, std::span<const Vec3> novel_lights = {},
                             std::span<const double> class_weights = {});

// Class weights inversely proportional to per-class example counts,
// normalized so that they average to 1.
std::vector<double> inverse_frequency_weights(std::span<const double> class_counts);

}  // namespace flashmat
