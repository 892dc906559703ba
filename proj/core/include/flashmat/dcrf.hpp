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

// Continuous dense CRF refinement. Each refined quantity minimizes
//
//   E(x) = sum_i sum_u alpha_u,i |x_i - t_u,i|^2
//        + sum_{i != j} |x_i - x_j|^2 sum_k beta_k kappa_k(f_i, f_j)
//
// over ordered pixel pairs. E is a convex quadratic; the minimizer solves a
// symmetric, diagonally dominant linear system that we relax with
// Gauss-Seidel sweeps (or damped Jacobi).

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "flashmat/image.hpp"

namespace flashmat {

using Vec2 = Eigen::Vector2d;

enum class FeatureKind {
  kPosition,          // pixel position, each axis normalized to [0, 1]
  kInputColor,        // input image divided by its global maximum
  kPredictedDiffuse,  // unrefined diffuse albedo
  kDiffuseGradient,   // forward differences of the refined diffuse, per unit position
  kRefinedDiffuse,    // refined diffuse albedo
};

int feature_dimension(FeatureKind kind);
std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

struct FeatureGroup {
  FeatureKind kind = FeatureKind::kPosition;
  double std = 1.0;
};

struct KernelSpec {
  std::vector<FeatureGroup> groups;
  double beta = 0.0;

  [[nodiscard]] int dimension() const;
};

// Row-major H x W x C buffer.
struct ChannelMap {
  Extent extent{};
  int channels = 1;
  std::vector<double> data;

  ChannelMap() = default;
  ChannelMap(Extent e, int c, double fill = 0.0)
      : extent(e), channels(c), data(e.pixels() * static_cast<std::size_t>(c), fill) {}

  [[nodiscard]] std::size_t pixels() const { return extent.pixels(); }
  double& at(std::size_t pixel, int c) { return data[pixel * channels + c]; }
  [[nodiscard]] double at(std::size_t pixel, int c) const { return data[pixel * channels + c]; }
};

ChannelMap to_channels(const ScalarMap& map);
ChannelMap to_channels(const Image<Vec3>& map);
ScalarMap to_scalar_map(const ChannelMap& map);
Image<Vec3> to_vec3_map(const ChannelMap& map);

struct FeatureMaps {
  Extent extent{};
  std::optional<ColorMap> input_color;
  std::optional<ColorMap> predicted_diffuse;
  std::optional<ChannelMap> diffuse_gradient;  // 6 channels: (dx, dy) per RGB
  std::optional<ColorMap> refined_diffuse;
};

// Position feature of pixel (row, col): (col / (W - 1), row / (H - 1)).
Vec2 kernel_position(Extent extent, int row, int col);
// Centered coordinates in [-1, 1] per axis, +y up, used by unary weight maps.
Image<Vec2> centered_positions(Extent extent);

ColorMap normalized_input_color(const Image<Vec3>& input);
ChannelMap diffuse_gradient_feature(const ColorMap& refined_diffuse);

// Unscaled feature vector of one pixel, groups concatenated in spec order.
std::vector<double> kernel_feature_vector(const FeatureMaps& features, const KernelSpec& spec,
                                          std::size_t pixel);

// exp(-sum_g |f_i,g - f_j,g|^2 / (2 sigma_g^2)).
double gaussian_kernel_weight(std::span<const double> f_i, std::span<const double> f_j,
                              const KernelSpec& spec);

inline constexpr double kDiffuseSigmaPosition = 0.5;
inline constexpr double kDiffuseSigmaColor = 0.08;
inline constexpr double kRoughnessSigmaPosition = 0.5;
inline constexpr double kRoughnessSigmaColor = 0.2;

// alpha = a0 * max(1 - exp(-|p|^2 / 0.5^2), 1 - exp(-(c_min - 1)^2 / 0.08^2)) + a1.
ScalarMap diffuse_unary_weight_map(const Image<Vec2>& positions, const Image<Vec3>& input_image,
                                   double a0, double a1);

struct RoughnessWeightMaps {
  ScalarMap network;      // constant a0
  ScalarMap grid_search;  // max(exp(-|p|^2 / 0.5^2), exp(-(c_min - 1)^2 / 0.2^2))
};

RoughnessWeightMaps roughness_unary_weight_map(const Image<Vec2>& positions,
                                               const Image<Vec3>& input_image, double a0);

struct Unary {
  ChannelMap target;
  ScalarMap weight;
};

enum class SweepMode { kGaussSeidel, kJacobi };

struct DcrfProblem {
  std::vector<Unary> unaries;
  std::vector<KernelSpec> kernels;
  FeatureMaps features;
  int iterations = 500;
  double tolerance = 1e-10;
  SweepMode mode = SweepMode::kGaussSeidel;
  double jacobi_damping = 0.8;
  // Pairs with weight below this are dropped; 0 keeps the dense O(N^2) path.
  double truncate_below = 0.0;
  // Renormalize 3-vectors after convergence (normal maps).
  bool renormalize = false;

  [[nodiscard]] Extent extent() const;
  [[nodiscard]] int channels() const;
};

// Throws DataError on inconsistent shapes, negative weights, or pixels
// without any positive unary weight.
void validate_problem(const DcrfProblem& problem);

// w_ij = sum_k beta_k kappa_k(i, j), zero on the diagonal.
class PairwiseWeights {
 public:
  static PairwiseWeights build(const DcrfProblem& problem);

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] bool dense() const { return dense_; }
  [[nodiscard]] double weight(std::size_t i, std::size_t j) const;
  [[nodiscard]] double row_sum(std::size_t i) const { return row_sums_[i]; }
  [[nodiscard]] std::size_t stored_pairs() const;

  template <typename Fn>
  void for_each_in_row(std::size_t i, Fn&& fn) const {
    if (dense_) {
      const double* row = dense_w_.data() + i * n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (row[j] != 0.0) fn(j, row[j]);
      }
    } else {
      for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) fn(cols_[e], vals_[e]);
    }
  }

 private:
  std::size_t n_ = 0;
  bool dense_ = true;
  std::vector<double> dense_w_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
  std::vector<double> row_sums_;
};

double dcrf_energy(const ChannelMap& x, const DcrfProblem& problem);
double dcrf_energy(const ChannelMap& x, const DcrfProblem& problem,
                   const PairwiseWeights& weights);

// Per-pixel weighted mean of the unary targets: the minimizer when all
// pairwise coefficients vanish.
ChannelMap unary_solution(const DcrfProblem& problem);

struct DcrfResult {
  ChannelMap solution;
  int sweeps = 0;
  double last_update = 0.0;
  bool converged = false;
  std::vector<double> energy_trace;  // initial energy followed by one entry per sweep
};

struct DcrfSolveOptions {
  bool record_energy = false;
};

DcrfResult dcrf_solve(const DcrfProblem& problem, const DcrfSolveOptions& options = {});

// theta / sum(theta) after clipping negatives to zero.
std::vector<double> normalize_coefficients(std::span<const double> theta);

// sum_k p_k theta^(k), componentwise.
std::vector<double> blend_params_by_class(std::span<const std::vector<double>> param_sets,
                                          std::span<const double> class_probs);

// Named coefficient and kernel presets for the three refiners.
struct DcrfPreset {
  std::string name;
  std::vector<KernelSpec> kernels;
  // diffuse: (a0, a1); normal: (alpha); roughness: (a0, grid-search scale).
  std::vector<double> unary_coefficients;
  int iterations = 500;
  double tolerance = 1e-8;

  // Unary coefficients followed by the kernel betas.
  [[nodiscard]] std::vector<double> coefficients() const;
  [[nodiscard]] DcrfPreset with_coefficients(std::span<const double> theta) const;
};

DcrfPreset diffuse_preset();
DcrfPreset normal_preset();
DcrfPreset roughness_preset();
DcrfPreset preset_by_name(const std::string& name);

// Averages the presets' coefficients with classifier probabilities, then
// normalizes. All presets must share kernel structure.
DcrfPreset blend_presets_by_class(std::span<const DcrfPreset> presets,
                                  std::span<const double> class_probs);

DcrfProblem make_diffuse_problem(const DcrfPreset& preset, const Image<Vec3>& input_image,
                                 const ColorMap& predicted_diffuse);
DcrfProblem make_normal_problem(const DcrfPreset& preset, const NormalMap& predicted_normal,
                                const ColorMap& refined_diffuse);
DcrfProblem make_roughness_problem(const DcrfPreset& preset, const Image<Vec3>& input_image,
                                   const ScalarMap& predicted_roughness,
                                   const ScalarMap& grid_roughness,
                                   const ColorMap& refined_diffuse);

}  // namespace flashmat
