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

#include "flashmat/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace flashmat {

int NormalBinTable::bin_of(const Vec3& target_normal) const {
  const double z = std::clamp(target_normal.normalized().z(), -1.0, 1.0);
  const double theta_deg = std::acos(z) * 180.0 / std::numbers::pi;
  if (theta_deg < boundaries_deg[0]) return 0;
  if (theta_deg < boundaries_deg[1]) return 1;
  return 2;
}

std::array<double, 3> normal_bin_weights(const std::array<double, 3>& probabilities) {
  std::array<double, 3> w{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(probabilities[i] > 0.0)) {
      throw InvalidArgument("normal_bin_weights: bin " + std::to_string(i) +
                            " has non-positive probability");
    }
    w[i] = 0.7 + 1.0 / (10.0 * probabilities[i]);
  }
  return w;
}

NormalBinTable make_normal_bin_table(const std::array<double, 3>& probabilities) {
  const double sum = probabilities[0] + probabilities[1] + probabilities[2];
  if (std::abs(sum - 1.0) > 1e-3) {
    throw InvalidArgument("normal bin probabilities must sum to 1");
  }
  NormalBinTable table;
  table.probabilities = probabilities;
  table.weights = normal_bin_weights(probabilities);
  return table;
}

double l2_map_loss(const ScalarMap& predicted, const ScalarMap& target) {
  require_same_extent(predicted, target, "l2_map_loss");
  if (predicted.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predicted.size());
}

double l2_map_loss(const ColorMap& predicted, const ColorMap& target) {
  require_same_extent(predicted, target, "l2_map_loss");
  if (predicted.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    sum += (predicted[i] - target[i]).squaredNorm();
  }
  return sum / (3.0 * static_cast<double>(predicted.size()));
}

double weighted_normal_loss(const NormalMap& predicted, const NormalMap& target,
                            const NormalBinTable& table) {
  require_same_extent(predicted, target, "weighted_normal_loss");
  if (predicted.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double w = table.weights[static_cast<std::size_t>(table.bin_of(target[i]))];
    sum += w * (predicted[i] - target[i]).squaredNorm();
  }
  return sum / static_cast<double>(predicted.size());
}

double recon_loss(const SvbrdfMaps& predicted, const SvbrdfMaps& target, const SceneConfig& config,
                  std::span<const Vec3> novel_lights) {
  auto one_light = [&](const SceneConfig& cfg) {
    return l2_map_loss(tonemap(render_image(predicted, cfg)), tonemap(render_image(target, cfg)));
  };
  double sum = one_light(config);
  SceneConfig relit = config;
  for (const Vec3& light : novel_lights) {
    relit.light_position = light;
    sum += one_light(relit);
  }
  return sum / static_cast<double>(1 + novel_lights.size());
}

LossBreakdown total_loss(const SvbrdfMaps& predicted, const SvbrdfMaps& target,
                         const LossWeights& weights, const NormalBinTable& table,
                         const SceneConfig& config, std::span<const Vec3> novel_lights) {
  LossBreakdown b;
  b.albedo = l2_map_loss(predicted.albedo, target.albedo);
  b.normal = weighted_normal_loss(predicted.normal, target.normal, table);
  b.roughness = l2_map_loss(predicted.roughness, target.roughness);
  b.recon = recon_loss(predicted, target, config, novel_lights);
  b.total = weights.lambda_d * b.albedo + weights.lambda_n * b.normal +
            weights.lambda_r * b.roughness + weights.lambda_rec * b.recon;
  return b;
}

double cross_entropy(std::span<const double> class_probs, int label,
                     std::span<const double> class_weights) {
  if (label < 0 || static_cast<std::size_t>(label) >= class_probs.size()) {
    throw InvalidArgument("cross_entropy: label index out of range");
  }
  if (!class_weights.empty() && class_weights.size() != class_probs.size()) {
    throw InvalidArgument("cross_entropy: class weight count does not match classes");
  }
  const auto l = static_cast<std::size_t>(label);
  const double w = class_weights.empty() ? 1.0 : class_weights[l];
  return -w * std::log(std::max(class_probs[l], kProbabilityFloor));
}

LossBreakdown total_loss_cls(const SvbrdfMaps& predicted, const SvbrdfMaps& target,
                             std::span<const double> class_probs, int label,
                             const LossWeights& weights, const NormalBinTable& table,
                             const SceneConfig& config, std::span<const Vec3> novel_lights,
                             std::span<const double> class_weights) {
  LossBreakdown b = total_loss(predicted, target, weights, table, config, novel_lights);
  b.cls = cross_entropy(class_probs, label, class_weights);
  b.total += weights.lambda_cls * b.cls;
  return b;
}

std::vector<double> inverse_frequency_weights(std::span<const double> class_counts) {
  std::vector<double> w(class_counts.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < class_counts.size(); ++k) {
    if (!(class_counts[k] > 0.0)) throw InvalidArgument("class counts must be positive");
    w[k] = 1.0 / class_counts[k];
    sum += w[k];
  }
  for (double& v : w) v *= static_cast<double>(w.size()) / sum;
  return w;
}

}  // namespace flashmat
