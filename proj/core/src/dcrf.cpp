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

#include "flashmat/dcrf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flashmat {

int feature_dimension(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kPosition:
      return 2;
    case FeatureKind::kDiffuseGradient:
      return 6;
    case FeatureKind::kInputColor:
    case FeatureKind::kPredictedDiffuse:
    case FeatureKind::kRefinedDiffuse:
      return 3;
  }
  return 0;
}

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kPosition:
      return "position";
    case FeatureKind::kInputColor:
      return "input_color";
    case FeatureKind::kPredictedDiffuse:
      return "predicted_diffuse";
    case FeatureKind::kDiffuseGradient:
      return "diffuse_gradient";
    case FeatureKind::kRefinedDiffuse:
      return "refined_diffuse";
  }
  return "unknown";
}

FeatureKind feature_kind_from_string(const std::string& name) {
  for (FeatureKind k : {FeatureKind::kPosition, FeatureKind::kInputColor,
                        FeatureKind::kPredictedDiffuse, FeatureKind::kDiffuseGradient,
                        FeatureKind::kRefinedDiffuse}) {
    if (to_string(k) == name) return k;
  }
  throw FormatError("unknown DCRF feature '" + name + "'");
}

int KernelSpec::dimension() const {
  int d = 0;
  for (const FeatureGroup& g : groups) d += feature_dimension(g.kind);
  return d;
}

ChannelMap to_channels(const ScalarMap& map) {
  ChannelMap out(map.extent(), 1);
  std::copy(map.begin(), map.end(), out.data.begin());
  return out;
}

ChannelMap to_channels(const Image<Vec3>& map) {
  ChannelMap out(map.extent(), 3);
  for (std::size_t i = 0; i < map.size(); ++i) {
    for (int c = 0; c < 3; ++c) out.at(i, c) = map[i][c];
  }
  return out;
}

ScalarMap to_scalar_map(const ChannelMap& map) {
  if (map.channels != 1) throw DimensionError("expected a single-channel map");
  ScalarMap out(map.extent);
  std::copy(map.data.begin(), map.data.end(), out.begin());
  return out;
}

Image<Vec3> to_vec3_map(const ChannelMap& map) {
  if (map.channels != 3) throw DimensionError("expected a three-channel map");
  Image<Vec3> out(map.extent);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = Vec3(map.at(i, 0), map.at(i, 1), map.at(i, 2));
  }
  return out;
}

Vec2 kernel_position(Extent extent, int row, int col) {
  const double x = extent.width > 1 ? static_cast<double>(col) / (extent.width - 1) : 0.5;
  const double y = extent.height > 1 ? static_cast<double>(row) / (extent.height - 1) : 0.5;
  return {x, y};
}

Image<Vec2> centered_positions(Extent extent) {
  Image<Vec2> out(extent);
  for (int row = 0; row < extent.height; ++row) {
    for (int col = 0; col < extent.width; ++col) {
      const Vec2 p = kernel_position(extent, row, col);
      out(row, col) = Vec2(2.0 * p.x() - 1.0, 1.0 - 2.0 * p.y());
    }
  }
  return out;
}

ColorMap normalized_input_color(const Image<Vec3>& input) {
  double peak = 0.0;
  for (const Vec3& v : input) peak = std::max(peak, v.maxCoeff());
  ColorMap out(input.extent());
  const double scale = peak > 0.0 ? 1.0 / peak : 0.0;
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] * scale;
  return out;
}

ChannelMap diffuse_gradient_feature(const ColorMap& refined_diffuse) {
  const Extent e = refined_diffuse.extent();
  ChannelMap out(e, 6);
  const double sx = e.width > 1 ? static_cast<double>(e.width - 1) : 1.0;
  const double sy = e.height > 1 ? static_cast<double>(e.height - 1) : 1.0;
  for (int row = 0; row < e.height; ++row) {
    for (int col = 0; col < e.width; ++col) {
      const std::size_t i = refined_diffuse.index(row, col);
      const Vec3& here = refined_diffuse[i];
      const Vec3 dx = col + 1 < e.width ? Vec3(refined_diffuse(row, col + 1) - here) : Vec3::Zero();
      const Vec3 dy = row + 1 < e.height ? Vec3(refined_diffuse(row + 1, col) - here) : Vec3::Zero();
      for (int c = 0; c < 3; ++c) {
        out.at(i, 2 * c) = dx[c] * sx;
        out.at(i, 2 * c + 1) = dy[c] * sy;
      }
    }
  }
  return out;
}

namespace {

template <typename Map>
const Map& require_feature(const std::optional<Map>& map, FeatureKind kind) {
  if (!map) throw DataError("DCRF kernel needs feature '" + to_string(kind) + "'");
  return *map;
}

void append_group(std::vector<double>& out, const FeatureMaps& f, FeatureKind kind,
                  std::size_t pixel) {
  switch (kind) {
    case FeatureKind::kPosition: {
      const int row = static_cast<int>(pixel / static_cast<std::size_t>(f.extent.width));
      const int col = static_cast<int>(pixel % static_cast<std::size_t>(f.extent.width));
      const Vec2 p = kernel_position(f.extent, row, col);
      out.push_back(p.x());
      out.push_back(p.y());
      return;
    }
    case FeatureKind::kInputColor:
    case FeatureKind::kPredictedDiffuse:
    case FeatureKind::kRefinedDiffuse: {
      const ColorMap& m = kind == FeatureKind::kInputColor ? require_feature(f.input_color, kind)
                          : kind == FeatureKind::kPredictedDiffuse
                              ? require_feature(f.predicted_diffuse, kind)
                              : require_feature(f.refined_diffuse, kind);
      for (int c = 0; c < 3; ++c) out.push_back(m[pixel][c]);
      return;
    }
    case FeatureKind::kDiffuseGradient: {
      const ChannelMap& m = require_feature(f.diffuse_gradient, kind);
      for (int c = 0; c < 6; ++c) out.push_back(m.at(pixel, c));
      return;
    }
  }
}

}  // namespace

std::vector<double> kernel_feature_vector(const FeatureMaps& features, const KernelSpec& spec,
                                          std::size_t pixel) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(spec.dimension()));
  for (const FeatureGroup& g : spec.groups) append_group(out, features, g.kind, pixel);
  return out;
}

double gaussian_kernel_weight(std::span<const double> f_i, std::span<const double> f_j,
                              const KernelSpec& spec) {
  const auto dim = static_cast<std::size_t>(spec.dimension());
  if (f_i.size() != dim || f_j.size() != dim) {
    throw DimensionError("gaussian_kernel_weight: feature length does not match kernel");
  }
  double exponent = 0.0;
  std::size_t offset = 0;
  for (const FeatureGroup& g : spec.groups) {
    const auto n = static_cast<std::size_t>(feature_dimension(g.kind));
    double d2 = 0.0;
    for (std::size_t k = offset; k < offset + n; ++k) {
      const double d = f_i[k] - f_j[k];
      d2 += d * d;
    }
    exponent += d2 / (2.0 * g.std * g.std);
    offset += n;
  }
  return std::exp(-exponent);
}

namespace {

double min_channel(const Vec3& c) { return std::clamp(c.minCoeff(), 0.0, 1.0); }

}  // namespace

ScalarMap diffuse_unary_weight_map(const Image<Vec2>& positions, const Image<Vec3>& input_image,
                                   double a0, double a1) {
  require_same_extent(positions, input_image, "diffuse_unary_weight_map");
  ScalarMap out(positions.extent());
  constexpr double s0 = kDiffuseSigmaPosition * kDiffuseSigmaPosition;
  constexpr double s1 = kDiffuseSigmaColor * kDiffuseSigmaColor;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double p2 = positions[i].squaredNorm();
    const double dc = min_channel(input_image[i]) - 1.0;
    const double term = std::max(1.0 - std::exp(-p2 / s0), 1.0 - std::exp(-dc * dc / s1));
    out[i] = a0 * term + a1;
  }
  return out;
}

// The color exponent uses (c_min - 1)^2, mirroring the diffuse map; the
// unsquared variant is positive for c_min < 1 and would exceed 1.
RoughnessWeightMaps roughness_unary_weight_map(const Image<Vec2>& positions,
                                               const Image<Vec3>& input_image, double a0) {
  require_same_extent(positions, input_image, "roughness_unary_weight_map");
  RoughnessWeightMaps out{ScalarMap(positions.extent(), a0), ScalarMap(positions.extent())};
  constexpr double s0 = kRoughnessSigmaPosition * kRoughnessSigmaPosition;
  constexpr double s1 = kRoughnessSigmaColor * kRoughnessSigmaColor;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double p2 = positions[i].squaredNorm();
    const double dc = min_channel(input_image[i]) - 1.0;
    out.grid_search[i] = std::max(std::exp(-p2 / s0), std::exp(-dc * dc / s1));
  }
  return out;
}

Extent DcrfProblem::extent() const {
  return unaries.empty() ? features.extent : unaries.front().target.extent;
}

int DcrfProblem::channels() const { return unaries.empty() ? 0 : unaries.front().target.channels; }

void validate_problem(const DcrfProblem& problem) {
  if (problem.unaries.empty()) throw DataError("DCRF problem has no unary terms");
  const Extent e = problem.extent();
  const int channels = problem.channels();
  for (const Unary& u : problem.unaries) {
    if (u.target.extent != e || u.weight.extent() != e) {
      throw DimensionError("DCRF unary maps do not share dimensions");
    }
    if (u.target.channels != channels) throw DimensionError("DCRF unary channel mismatch");
  }
  if (problem.features.extent != e) throw DimensionError("DCRF feature maps do not match unaries");
  for (const KernelSpec& k : problem.kernels) {
    if (!(k.beta >= 0.0)) throw DataError("DCRF kernel beta must be non-negative");
    if (k.groups.empty()) throw DataError("DCRF kernel has no feature groups");
    for (const FeatureGroup& g : k.groups) {
      if (!(g.std > 0.0)) throw DataError("DCRF kernel std must be positive");
    }
  }
  if (problem.iterations <= 0) throw DataError("DCRF iterations must be positive");
  if (!(problem.tolerance > 0.0)) throw DataError("DCRF tolerance must be positive");
  if (problem.renormalize && channels != 3) {
    throw DataError("DCRF renormalization needs three-channel maps");
  }
  for (std::size_t i = 0; i < e.pixels(); ++i) {
    double sum = 0.0;
    for (const Unary& u : problem.unaries) {
      if (!(u.weight[i] >= 0.0)) throw DataError("DCRF unary weights must be non-negative");
      sum += u.weight[i];
    }
    if (!(sum > 0.0)) {
      throw DataError("DCRF problem is underdetermined: no positive unary weight at pixel " +
                      std::to_string(i));
    }
  }
}

namespace {

struct ScaledFeatures {
  // Features divided by their group std, so kappa = exp(-|a - b|^2 / 2).
  std::vector<double> values;
  std::size_t dim = 0;
  double position_sigma = 0.0;  // 0 when the kernel has no position group
  double beta = 0.0;
};

std::vector<ScaledFeatures> scale_features(const DcrfProblem& problem) {
  std::vector<ScaledFeatures> out;
  const std::size_t n = problem.extent().pixels();
  for (const KernelSpec& k : problem.kernels) {
    if (k.beta == 0.0) continue;
    ScaledFeatures sf;
    sf.dim = static_cast<std::size_t>(k.dimension());
    sf.beta = k.beta;
    sf.values.reserve(n * sf.dim);
    for (const FeatureGroup& g : k.groups) {
      if (g.kind == FeatureKind::kPosition) sf.position_sigma = std::max(sf.position_sigma, g.std);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> f = kernel_feature_vector(problem.features, k, i);
      std::size_t offset = 0;
      for (const FeatureGroup& g : k.groups) {
        const auto d = static_cast<std::size_t>(feature_dimension(g.kind));
        for (std::size_t c = 0; c < d; ++c) sf.values.push_back(f[offset + c] / g.std);
        offset += d;
      }
    }
    out.push_back(std::move(sf));
  }
  return out;
}

double pair_weight(const std::vector<ScaledFeatures>& kernels, std::size_t i, std::size_t j) {
  double w = 0.0;
  for (const ScaledFeatures& k : kernels) {
    const double* a = k.values.data() + i * k.dim;
    const double* b = k.values.data() + j * k.dim;
    double d2 = 0.0;
    for (std::size_t c = 0; c < k.dim; ++c) {
      const double d = a[c] - b[c];
      d2 += d * d;
    }
    w += k.beta * std::exp(-0.5 * d2);
  }
  return w;
}

}  // namespace

PairwiseWeights PairwiseWeights::build(const DcrfProblem& problem) {
  PairwiseWeights pw;
  const Extent e = problem.extent();
  pw.n_ = e.pixels();
  pw.row_sums_.assign(pw.n_, 0.0);
  const std::vector<ScaledFeatures> kernels = scale_features(problem);
  const double threshold = problem.truncate_below;
  pw.dense_ = !(threshold > 0.0);

  if (pw.dense_) {
    pw.dense_w_.assign(pw.n_ * pw.n_, 0.0);
    for (std::size_t i = 0; i < pw.n_; ++i) {
      for (std::size_t j = i + 1; j < pw.n_; ++j) {
        const double w = pair_weight(kernels, i, j);
        pw.dense_w_[i * pw.n_ + j] = w;
        pw.dense_w_[j * pw.n_ + i] = w;
      }
    }
    for (std::size_t i = 0; i < pw.n_; ++i) {
      pw.row_sums_[i] = std::accumulate(pw.dense_w_.begin() + static_cast<std::ptrdiff_t>(i * pw.n_),
                                        pw.dense_w_.begin() + static_cast<std::ptrdiff_t>((i + 1) * pw.n_),
                                        0.0);
    }
    return pw;
  }

  // Every kernel is bounded by beta_k exp(-|dp|^2 / (2 sigma_p^2)), so pairs
  // farther apart than the radius where that bound drops below the threshold
  // are skipped without evaluation.
  bool windowed = !kernels.empty();
  double beta_sum = 0.0;
  double sigma_max = 0.0;
  for (const ScaledFeatures& k : kernels) {
    beta_sum += k.beta;
    sigma_max = std::max(sigma_max, k.position_sigma);
    if (k.position_sigma == 0.0) windowed = false;
  }
  int win_x = e.width;
  int win_y = e.height;
  if (windowed && beta_sum > threshold) {
    const double radius = sigma_max * std::sqrt(2.0 * std::log(beta_sum / threshold));
    win_x = static_cast<int>(std::ceil(radius * std::max(e.width - 1, 1))) + 1;
    win_y = static_cast<int>(std::ceil(radius * std::max(e.height - 1, 1))) + 1;
  } else if (windowed) {
    win_x = 0;
    win_y = 0;
  }
  pw.row_ptr_.assign(pw.n_ + 1, 0);
  for (int row = 0; row < e.height; ++row) {
    for (int col = 0; col < e.width; ++col) {
      const std::size_t i = static_cast<std::size_t>(row) * e.width + col;
      const int r0 = std::max(0, row - win_y);
      const int r1 = std::min(e.height - 1, row + win_y);
      const int c0 = std::max(0, col - win_x);
      const int c1 = std::min(e.width - 1, col + win_x);
      for (int rr = r0; rr <= r1; ++rr) {
        for (int cc = c0; cc <= c1; ++cc) {
          const std::size_t j = static_cast<std::size_t>(rr) * e.width + cc;
          if (j == i) continue;
          const double w = pair_weight(kernels, i, j);
          if (w < threshold) continue;
          pw.cols_.push_back(j);
          pw.vals_.push_back(w);
          pw.row_sums_[i] += w;
        }
      }
      pw.row_ptr_[i + 1] = pw.cols_.size();
    }
  }
  return pw;
}

double PairwiseWeights::weight(std::size_t i, std::size_t j) const {
  if (dense_) return dense_w_[i * n_ + j];
  for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
    if (cols_[e] == j) return vals_[e];
  }
  return 0.0;
}

std::size_t PairwiseWeights::stored_pairs() const {
  if (!dense_) return cols_.size();
  return static_cast<std::size_t>(
      std::count_if(dense_w_.begin(), dense_w_.end(), [](double w) { return w != 0.0; }));
}

double dcrf_energy(const ChannelMap& x, const DcrfProblem& problem,
                   const PairwiseWeights& weights) {
  if (x.extent != problem.extent() || x.channels != problem.channels()) {
    throw DimensionError("dcrf_energy: map does not match problem");
  }
  const std::size_t n = x.pixels();
  const int channels = x.channels;
  double unary = 0.0;
  for (const Unary& u : problem.unaries) {
    for (std::size_t i = 0; i < n; ++i) {
      double d2 = 0.0;
      for (int c = 0; c < channels; ++c) {
        const double d = x.at(i, c) - u.target.at(i, c);
        d2 += d * d;
      }
      unary += u.weight[i] * d2;
    }
  }
  double pairwise = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights.for_each_in_row(i, [&](std::size_t j, double w) {
      double d2 = 0.0;
      for (int c = 0; c < channels; ++c) {
        const double d = x.at(i, c) - x.at(j, c);
        d2 += d * d;
      }
      pairwise += w * d2;
    });
  }
  return unary + pairwise;
}

double dcrf_energy(const ChannelMap& x, const DcrfProblem& problem) {
  validate_problem(problem);
  return dcrf_energy(x, problem, PairwiseWeights::build(problem));
}

ChannelMap unary_solution(const DcrfProblem& problem) {
  validate_problem(problem);
  const Extent e = problem.extent();
  const int channels = problem.channels();
  ChannelMap x(e, channels);
  for (std::size_t i = 0; i < e.pixels(); ++i) {
    double alpha_sum = 0.0;
    for (const Unary& u : problem.unaries) alpha_sum += u.weight[i];
    for (int c = 0; c < channels; ++c) {
      double v = 0.0;
      for (const Unary& u : problem.unaries) v += (u.weight[i] / alpha_sum) * u.target.at(i, c);
      x.at(i, c) = v;
    }
  }
  return x;
}

namespace {

// Stationarity update for pixel i given the current neighbors in `x`.
void stationary_value(const DcrfProblem& problem, const PairwiseWeights& weights,
                      const ChannelMap& x, std::size_t i, double* out) {
  const int channels = x.channels;
  double alpha_sum = 0.0;
  for (const Unary& u : problem.unaries) alpha_sum += u.weight[i];
  const double den = alpha_sum + 2.0 * weights.row_sum(i);
  double neighbor[4] = {0.0, 0.0, 0.0, 0.0};
  weights.for_each_in_row(i, [&](std::size_t j, double w) {
    for (int c = 0; c < channels; ++c) neighbor[c] += w * x.at(j, c);
  });
  for (int c = 0; c < channels; ++c) {
    double v = 0.0;
    for (const Unary& u : problem.unaries) v += (u.weight[i] / den) * u.target.at(i, c);
    out[c] = v + (2.0 / den) * neighbor[c];
  }
}

void renormalize_vectors(ChannelMap& x) {
  for (std::size_t i = 0; i < x.pixels(); ++i) {
    Vec3 v(x.at(i, 0), x.at(i, 1), x.at(i, 2));
    const double len = v.norm();
    if (len > 0.0) v /= len;
    for (int c = 0; c < 3; ++c) x.at(i, c) = v[c];
  }
}

}  // namespace

DcrfResult dcrf_solve(const DcrfProblem& problem, const DcrfSolveOptions& options) {
  validate_problem(problem);
  if (problem.channels() > 4) throw DataError("DCRF supports at most 4 channels");
  const PairwiseWeights weights = PairwiseWeights::build(problem);
  const std::size_t n = problem.extent().pixels();
  const int channels = problem.channels();

  DcrfResult result;
  ChannelMap x = unary_solution(problem);
  if (options.record_energy) result.energy_trace.push_back(dcrf_energy(x, problem, weights));

  ChannelMap next = x;
  double value[4];
  for (int sweep = 0; sweep < problem.iterations; ++sweep) {
    double max_update = 0.0;
    if (problem.mode == SweepMode::kGaussSeidel) {
      for (std::size_t i = 0; i < n; ++i) {
        stationary_value(problem, weights, x, i, value);
        for (int c = 0; c < channels; ++c) {
          max_update = std::max(max_update, std::abs(value[c] - x.at(i, c)));
          x.at(i, c) = value[c];
        }
      }
    } else {
      const double omega = problem.jacobi_damping;
      for (std::size_t i = 0; i < n; ++i) {
        stationary_value(problem, weights, x, i, value);
        for (int c = 0; c < channels; ++c) {
          const double v = (1.0 - omega) * x.at(i, c) + omega * value[c];
          max_update = std::max(max_update, std::abs(v - x.at(i, c)));
          next.at(i, c) = v;
        }
      }
      std::swap(x.data, next.data);
    }
    result.sweeps = sweep + 1;
    result.last_update = max_update;
    if (options.record_energy) result.energy_trace.push_back(dcrf_energy(x, problem, weights));
    if (max_update < problem.tolerance) {
      result.converged = true;
      break;
    }
  }
  if (problem.renormalize) renormalize_vectors(x);
  result.solution = std::move(x);
  return result;
}

std::vector<double> normalize_coefficients(std::span<const double> theta) {
  std::vector<double> out(theta.begin(), theta.end());
  double sum = 0.0;
  for (double& v : out) {
    if (!std::isfinite(v)) throw InvalidArgument("normalize_coefficients: non-finite input");
    v = std::max(v, 0.0);
    sum += v;
  }
  if (!(sum > 0.0)) throw InvalidArgument("normalize_coefficients: all coefficients are zero");
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> blend_params_by_class(std::span<const std::vector<double>> param_sets,
                                          std::span<const double> class_probs) {
  if (param_sets.empty() || param_sets.size() != class_probs.size()) {
    throw InvalidArgument("blend_params_by_class: one probability per parameter set required");
  }
  const std::size_t len = param_sets.front().size();
  std::vector<double> out(len, 0.0);
  for (std::size_t k = 0; k < param_sets.size(); ++k) {
    if (param_sets[k].size() != len) {
      throw InvalidArgument("blend_params_by_class: parameter sets differ in length");
    }
    for (std::size_t c = 0; c < len; ++c) out[c] += class_probs[k] * param_sets[k][c];
  }
  return out;
}

std::vector<double> DcrfPreset::coefficients() const {
  std::vector<double> theta = unary_coefficients;
  for (const KernelSpec& k : kernels) theta.push_back(k.beta);
  return theta;
}

DcrfPreset DcrfPreset::with_coefficients(std::span<const double> theta) const {
  if (theta.size() != unary_coefficients.size() + kernels.size()) {
    throw InvalidArgument("preset '" + name + "': coefficient count mismatch");
  }
  DcrfPreset out = *this;
  const std::size_t u = unary_coefficients.size();
  std::copy(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(u),
            out.unary_coefficients.begin());
  for (std::size_t k = 0; k < kernels.size(); ++k) out.kernels[k].beta = theta[u + k];
  return out;
}

namespace {

KernelSpec position_kernel(double std, double beta) {
  return {{{FeatureKind::kPosition, std}}, beta};
}

KernelSpec bilateral_kernel(double pos_std, FeatureKind kind, double std, double beta) {
  return {{{FeatureKind::kPosition, pos_std}, {kind, std}}, beta};
}

}  // namespace

DcrfPreset diffuse_preset() {
  DcrfPreset p;
  p.name = "diffuse";
  p.kernels = {position_kernel(0.04, 0.04),
               bilateral_kernel(0.06, FeatureKind::kInputColor, 0.2, 0.03),
               bilateral_kernel(0.06, FeatureKind::kPredictedDiffuse, 0.1, 0.03)};
  p.unary_coefficients = {0.85, 0.05};
  return p;
}

DcrfPreset normal_preset() {
  DcrfPreset p;
  p.name = "normal";
  p.kernels = {position_kernel(0.03, 0.05),
               bilateral_kernel(0.06, FeatureKind::kDiffuseGradient, 0.1, 0.05)};
  p.unary_coefficients = {0.9};
  return p;
}

DcrfPreset roughness_preset() {
  DcrfPreset p;
  p.name = "roughness";
  p.kernels = {position_kernel(0.04, 0.05),
               bilateral_kernel(0.06, FeatureKind::kRefinedDiffuse, 0.2, 0.05)};
  p.unary_coefficients = {0.5, 0.4};
  return p;
}

DcrfPreset preset_by_name(const std::string& name) {
  if (name == "diffuse") return diffuse_preset();
  if (name == "normal") return normal_preset();
  if (name == "roughness") return roughness_preset();
  throw InvalidArgument("unknown DCRF preset '" + name + "'");
}

DcrfPreset blend_presets_by_class(std::span<const DcrfPreset> presets,
                                  std::span<const double> class_probs) {
  if (presets.empty()) throw InvalidArgument("blend_presets_by_class: no presets");
  std::vector<std::vector<double>> sets;
  for (const DcrfPreset& p : presets) {
    if (p.kernels.size() != presets.front().kernels.size() ||
        p.unary_coefficients.size() != presets.front().unary_coefficients.size()) {
      throw InvalidArgument("blend_presets_by_class: presets differ in structure");
    }
    sets.push_back(normalize_coefficients(p.coefficients()));
  }
  const std::vector<double> blended = blend_params_by_class(sets, class_probs);
  return presets.front().with_coefficients(normalize_coefficients(blended));
}

namespace {

struct NormalizedCoefficients {
  std::vector<double> unary;
  std::vector<KernelSpec> kernels;
};

NormalizedCoefficients normalized(const DcrfPreset& preset) {
  const std::vector<double> theta = normalize_coefficients(preset.coefficients());
  const DcrfPreset p = preset.with_coefficients(theta);
  return {p.unary_coefficients, p.kernels};
}

void require_unaries(const DcrfPreset& preset, std::size_t n) {
  if (preset.unary_coefficients.size() != n) {
    throw InvalidArgument("preset '" + preset.name + "' needs " + std::to_string(n) +
                          " unary coefficients");
  }
}

DcrfProblem base_problem(const DcrfPreset& preset, Extent extent,
                         std::vector<KernelSpec> kernels) {
  DcrfProblem problem;
  problem.kernels = std::move(kernels);
  problem.features.extent = extent;
  problem.iterations = preset.iterations;
  problem.tolerance = preset.tolerance;
  return problem;
}

}  // namespace

DcrfProblem make_diffuse_problem(const DcrfPreset& preset, const Image<Vec3>& input_image,
                                 const ColorMap& predicted_diffuse) {
  require_same_extent(input_image, predicted_diffuse, "make_diffuse_problem");
  require_unaries(preset, 2);
  const NormalizedCoefficients c = normalized(preset);
  const Extent e = input_image.extent();
  DcrfProblem problem = base_problem(preset, e, c.kernels);
  problem.features.input_color = normalized_input_color(input_image);
  problem.features.predicted_diffuse = predicted_diffuse;
  problem.unaries.push_back(
      {to_channels(predicted_diffuse),
       diffuse_unary_weight_map(centered_positions(e), input_image, c.unary[0], c.unary[1])});
  return problem;
}

DcrfProblem make_normal_problem(const DcrfPreset& preset, const NormalMap& predicted_normal,
                                const ColorMap& refined_diffuse) {
  require_same_extent(predicted_normal, refined_diffuse, "make_normal_problem");
  require_unaries(preset, 1);
  const NormalizedCoefficients c = normalized(preset);
  const Extent e = predicted_normal.extent();
  DcrfProblem problem = base_problem(preset, e, c.kernels);
  problem.features.diffuse_gradient = diffuse_gradient_feature(refined_diffuse);
  problem.features.refined_diffuse = refined_diffuse;
  problem.unaries.push_back({to_channels(predicted_normal), ScalarMap(e, c.unary[0])});
  problem.renormalize = true;
  return problem;
}

DcrfProblem make_roughness_problem(const DcrfPreset& preset, const Image<Vec3>& input_image,
                                   const ScalarMap& predicted_roughness,
                                   const ScalarMap& grid_roughness,
                                   const ColorMap& refined_diffuse) {
  require_same_extent(input_image, predicted_roughness, "make_roughness_problem");
  require_same_extent(input_image, grid_roughness, "make_roughness_problem");
  require_same_extent(input_image, refined_diffuse, "make_roughness_problem");
  require_unaries(preset, 2);
  const NormalizedCoefficients c = normalized(preset);
  const Extent e = input_image.extent();
  DcrfProblem problem = base_problem(preset, e, c.kernels);
  problem.features.refined_diffuse = refined_diffuse;
  RoughnessWeightMaps w = roughness_unary_weight_map(centered_positions(e), input_image, c.unary[0]);
  for (double& v : w.grid_search) v *= c.unary[1];
  problem.unaries.push_back({to_channels(predicted_roughness), std::move(w.network)});
  problem.unaries.push_back({to_channels(grid_roughness), std::move(w.grid_search)});
  return problem;
}

}  // namespace flashmat
