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

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

namespace flashmat {
namespace {

// Position-only problem with one three-channel unary.
DcrfProblem position_problem(Extent e, std::uint64_t seed, double beta, double sigma) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DcrfProblem p;
  Unary un{ChannelMap(e, 3), ScalarMap(e)};
  for (double& v : un.target.data) v = u(rng);
  for (double& w : un.weight) w = 0.2 + u(rng);
  p.unaries.push_back(std::move(un));
  p.features.extent = e;
  KernelSpec k;
  k.groups.push_back({FeatureKind::kPosition, sigma});
  k.beta = beta;
  p.kernels.push_back(k);
  p.tolerance = 1e-13;
  p.iterations = 5000;
  return p;
}

// Dense stationarity system assembled directly from pixel positions.
ChannelMap dense_position_solve(const DcrfProblem& p, double beta, double sigma) {
  const Extent e = p.extent();
  const auto n = static_cast<Eigen::Index>(e.pixels());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, 3);
  auto pos = [&](Eigen::Index i) {
    const double x = static_cast<double>(i % e.width) / (e.width - 1);
    const double y = static_cast<double>(i / e.width) / (e.height - 1);
    return Eigen::Vector2d(x, y);
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    const double alpha = p.unaries[0].weight[static_cast<std::size_t>(i)];
    a(i, i) += alpha;
    for (int c = 0; c < 3; ++c) b(i, c) = alpha * p.unaries[0].target.at(i, c);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = beta * std::exp(-(pos(i) - pos(j)).squaredNorm() / (2 * sigma * sigma));
      a(i, i) += 2 * w;
      a(i, j) -= 2 * w;
    }
  }
  const Eigen::MatrixXd x = a.partialPivLu().solve(b);
  ChannelMap out(e, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) out.at(i, c) = x(i, c);
  }
  return out;
}

TEST(Kernel, GaussianWeight) {
  KernelSpec k;
  k.groups.push_back({FeatureKind::kPosition, 0.04});
  const std::vector<double> a{0.3, 0.5};
  const std::vector<double> b{0.34, 0.5};
  EXPECT_EQ(gaussian_kernel_weight(a, a, k), 1.0);
  EXPECT_NEAR(gaussian_kernel_weight(a, b, k), std::exp(-0.5), 1e-14);
  EXPECT_EQ(gaussian_kernel_weight(a, b, k), gaussian_kernel_weight(b, a, k));
  const std::vector<double> short_f{0.3};
  EXPECT_THROW(gaussian_kernel_weight(short_f, a, k), DimensionError);
}

TEST(Kernel, FeatureNames) {
  for (FeatureKind kind : {FeatureKind::kPosition, FeatureKind::kInputColor,
                           FeatureKind::kPredictedDiffuse, FeatureKind::kDiffuseGradient,
                           FeatureKind::kRefinedDiffuse}) {
    EXPECT_EQ(feature_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW(feature_kind_from_string("depth"), FormatError);
  EXPECT_EQ(feature_dimension(FeatureKind::kDiffuseGradient), 6);
}

TEST(Features, Positions) {
  const Extent e{5, 9};
  EXPECT_EQ(kernel_position(e, 0, 0), Vec2(0, 0));
  EXPECT_EQ(kernel_position(e, 4, 8), Vec2(1, 1));
  const Image<Vec2> c = centered_positions(e);
  EXPECT_EQ(c(2, 4), Vec2(0, 0));
  EXPECT_EQ(c(0, 0), Vec2(-1, 1));
  EXPECT_EQ(c(4, 8), Vec2(1, -1));
}

TEST(Features, NormalizedInputAndGradient) {
  Image<Vec3> in({1, 3}, Vec3(0.5, 1.0, 2.0));
  in(0, 2) = Vec3(4.0, 0.0, 0.0);
  const ColorMap n = normalized_input_color(in);
  EXPECT_EQ(n(0, 2), Vec3(1.0, 0.0, 0.0));
  EXPECT_EQ(n(0, 0), Vec3(0.125, 0.25, 0.5));

  ColorMap d({1, 3}, Vec3::Zero());
  d(0, 1) = Vec3(0.5, 0.5, 0.5);
  const ChannelMap g = diffuse_gradient_feature(d);
  EXPECT_EQ(g.channels, 6);
  // dx of channel 0 at col 0: (0.5 - 0) * (W - 1)
  EXPECT_NEAR(g.at(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(g.at(2, 0), 0.0, 1e-15);
}

TEST(UnaryWeights, Diffuse) {
  const Extent e{5, 5};
  Image<Vec3> in(e, Vec3::Ones());
  in(0, 0) = Vec3::Zero();
  const ScalarMap w = diffuse_unary_weight_map(centered_positions(e), in, 0.85, 0.05);
  EXPECT_NEAR(w(2, 2), 0.05, 1e-15);
  // dark corner: the color branch saturates at 1 - e^-156.25
  EXPECT_NEAR(w(0, 0), 0.9, 1e-12);
  // bright corner: only the position branch, |p|^2 = 2
  EXPECT_NEAR(w(0, 4), 0.85 * 0.9996645373720975 + 0.05, 1e-12);
  // monotone in |p| along the middle row
  for (int c = 2; c < 4; ++c) EXPECT_LE(w(2, c), w(2, c + 1));
}

TEST(UnaryWeights, RoughnessGridTrust) {
  const Extent e{5, 5};
  Image<Vec3> in(e, Vec3::Ones());
  in(4, 4) = Vec3::Zero();
  const RoughnessWeightMaps w = roughness_unary_weight_map(centered_positions(e), in, 0.5);
  EXPECT_EQ(w.grid_search(2, 2), 1.0);
  EXPECT_NEAR(w.grid_search(4, 4), 3.3546262790251185e-4, 1e-16);
  for (double v : w.grid_search) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  for (double v : w.network) EXPECT_EQ(v, 0.5);
}

TEST(Energy, Identities) {
  DcrfProblem p = position_problem({4, 4}, 1, 0.0, 0.1);
  EXPECT_EQ(dcrf_energy(p.unaries[0].target, p), 0.0);

  for (double& v : p.unaries[0].target.data) v = 0.2;
  for (double& w : p.unaries[0].weight) w = 0.7;
  p.kernels[0].beta = 3.0;
  ChannelMap x(p.extent(), 3, 0.5);
  EXPECT_NEAR(dcrf_energy(x, p), 16 * 0.7 * 3 * 0.09, 1e-12);
}

TEST(Solve, ZeroBetaIsUnaryExactly) {
  const DcrfProblem p = position_problem({6, 5}, 2, 0.0, 0.1);
  const DcrfResult r = dcrf_solve(p);
  EXPECT_EQ(r.solution.data, p.unaries[0].target.data);
}

TEST(Solve, TwoUnariesAverage) {
  const Extent e{3, 3};
  DcrfProblem p;
  p.features.extent = e;
  p.unaries.push_back({ChannelMap(e, 1, 0.2), ScalarMap(e, 0.75)});
  p.unaries.push_back({ChannelMap(e, 1, 0.6), ScalarMap(e, 0.25)});
  const ChannelMap x = dcrf_solve(p).solution;
  for (double v : x.data) EXPECT_NEAR(v, (0.75 * 0.2 + 0.25 * 0.6) / 1.0, 1e-15);
}

TEST(Solve, MatchesDenseLinearSolve) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double beta = 0.3 + seed;
    const DcrfProblem p = position_problem({8, 8}, seed, beta, 0.2);
    const ChannelMap oracle = dense_position_solve(p, beta, 0.2);
    const DcrfResult r = dcrf_solve(p);
    ASSERT_TRUE(r.converged);
    for (std::size_t i = 0; i < oracle.data.size(); ++i) {
      EXPECT_NEAR(r.solution.data[i], oracle.data[i], 1e-6);
    }
  }
}

TEST(Solve, JacobiMatchesGaussSeidel) {
  DcrfProblem p = position_problem({6, 6}, 4, 0.5, 0.3);
  const ChannelMap gs = dcrf_solve(p).solution;
  p.mode = SweepMode::kJacobi;
  const DcrfResult j = dcrf_solve(p);
  EXPECT_TRUE(j.converged);
  for (std::size_t i = 0; i < gs.data.size(); ++i) EXPECT_NEAR(j.solution.data[i], gs.data[i], 1e-9);
}

TEST(Solve, EnergyNonIncreasing) {
  const DcrfProblem p = position_problem({8, 8}, 9, 2.0, 0.15);
  const DcrfResult r = dcrf_solve(p, {.record_energy = true});
  ASSERT_GE(r.energy_trace.size(), 2u);
  for (std::size_t k = 1; k < r.energy_trace.size(); ++k) {
    EXPECT_LE(r.energy_trace[k], r.energy_trace[k - 1] * (1 + 1e-14));
  }
}

TEST(Solve, TruncatedWeightsApproximateDense) {
  DcrfProblem p = position_problem({10, 10}, 5, 1.0, 0.1);
  const ChannelMap dense = dcrf_solve(p).solution;
  p.truncate_below = 1e-14;
  const PairwiseWeights w = PairwiseWeights::build(p);
  EXPECT_FALSE(w.dense());
  const ChannelMap sparse = dcrf_solve(p).solution;
  for (std::size_t i = 0; i < dense.data.size(); ++i) EXPECT_NEAR(sparse.data[i], dense.data[i], 1e-9);

  p.truncate_below = 1e-2;
  const PairwiseWeights coarse = PairwiseWeights::build(p);
  EXPECT_LT(coarse.stored_pairs(), 100u * 99u);
}

TEST(Solve, ValidationErrors) {
  DcrfProblem p = position_problem({3, 3}, 1, 1.0, 0.1);
  p.unaries[0].weight(1, 1) = 0.0;
  EXPECT_THROW(dcrf_solve(p), DataError);
  p = position_problem({3, 3}, 1, 1.0, 0.1);
  p.kernels[0].groups[0].std = 0.0;
  EXPECT_THROW(dcrf_solve(p), DataError);
  p = position_problem({3, 3}, 1, 1.0, 0.1);
  p.features.extent = {3, 4};
  EXPECT_THROW(dcrf_solve(p), DimensionError);
}

TEST(Coefficients, Normalize) {
  const std::vector<double> a{1, 1, 2};
  const std::vector<double> na = normalize_coefficients(a);
  EXPECT_EQ(na, (std::vector<double>{0.25, 0.25, 0.5}));
  const std::vector<double> b{5};
  EXPECT_EQ(normalize_coefficients(b), std::vector<double>{1.0});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> t(7);
    for (double& v : t) v = u(rng);
    const std::vector<double> n = normalize_coefficients(t);
    double s = 0.0;
    for (double v : n) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  const std::vector<double> zeros{0.0, -1.0};
  EXPECT_THROW(normalize_coefficients(zeros), InvalidArgument);
}

TEST(Coefficients, BlendByClass) {
  const std::vector<std::vector<double>> sets{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
  const std::vector<double> onehot{0.0, 1.0};
  EXPECT_EQ(blend_params_by_class(sets, onehot), sets[1]);
  const std::vector<double> uniform{0.5, 0.5};
  EXPECT_EQ(blend_params_by_class(sets, uniform), (std::vector<double>{0.5, 0.5, 0.5}));
  const std::vector<std::vector<double>> same{{0.1, 0.7}, {0.1, 0.7}};
  const std::vector<double> probs{0.3, 0.7};
  const std::vector<double> blended = blend_params_by_class(same, probs);
  EXPECT_NEAR(blended[0], 0.1, 1e-15);
  EXPECT_NEAR(blended[1], 0.7, 1e-15);
}

TEST(Presets, CoefficientRoundTrip) {
  for (const char* name : {"diffuse", "normal", "roughness"}) {
    const DcrfPreset p = preset_by_name(name);
    const std::vector<double> theta = p.coefficients();
    EXPECT_EQ(theta.size(), p.unary_coefficients.size() + p.kernels.size());
    EXPECT_EQ(p.with_coefficients(theta).coefficients(), theta);
  }
  EXPECT_THROW(preset_by_name("specular"), InvalidArgument);
}

TEST(Presets, KernelTable) {
  const DcrfPreset d = diffuse_preset();
  ASSERT_EQ(d.kernels.size(), 3u);
  EXPECT_EQ(d.kernels[0].groups[0].std, 0.04);
  EXPECT_EQ(d.kernels[1].groups[1].kind, FeatureKind::kInputColor);
  EXPECT_EQ(d.kernels[1].groups[1].std, 0.2);
  EXPECT_EQ(d.kernels[2].groups[1].kind, FeatureKind::kPredictedDiffuse);
  const DcrfPreset n = normal_preset();
  EXPECT_EQ(n.kernels[0].groups[0].std, 0.03);
  EXPECT_EQ(n.kernels[1].groups[1].kind, FeatureKind::kDiffuseGradient);
  const DcrfPreset r = roughness_preset();
  EXPECT_EQ(r.kernels[1].groups[1].kind, FeatureKind::kRefinedDiffuse);
  EXPECT_EQ(r.kernels[1].groups[1].std, 0.2);
}

TEST(Presets, BlendedPresetUsesProbabilities) {
  const DcrfPreset a = diffuse_preset();
  std::vector<double> theta = a.coefficients();
  for (double& v : theta) v *= 3.0;
  const DcrfPreset b = a.with_coefficients(theta);
  const std::vector<DcrfPreset> presets{a, b};
  const std::vector<double> probs{1.0, 0.0};
  const std::vector<double> got = blend_presets_by_class(presets, probs).coefficients();
  const std::vector<double> want = normalize_coefficients(a.coefficients());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-15);
}

TEST(Refiners, NormalOutputIsUnit) {
  const Extent e{6, 6};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  NormalMap normal(e);
  for (Vec3& n : normal) n = Vec3(u(rng), u(rng), 1.0).normalized();
  ColorMap diffuse(e);
  for (Vec3& d : diffuse) d = Vec3::Constant(0.5) + Vec3(u(rng), u(rng), u(rng));
  const DcrfProblem p = make_normal_problem(normal_preset(), normal, diffuse);
  const Image<Vec3> out = to_vec3_map(dcrf_solve(p).solution);
  for (const Vec3& n : out) EXPECT_NEAR(n.norm(), 1.0, 1e-12);
}

TEST(Refiners, RoughnessProblemHasTwoUnaries) {
  const Extent e{5, 5};
  const Image<Vec3> input(e, Vec3::Constant(0.5));
  const DcrfProblem p = make_roughness_problem(roughness_preset(), input, ScalarMap(e, 0.4),
                                               ScalarMap(e, 0.6), ColorMap(e, Vec3::Constant(0.3)));
  EXPECT_EQ(p.unaries.size(), 2u);
  EXPECT_NO_THROW(validate_problem(p));
  EXPECT_THROW(make_roughness_problem(normal_preset(), input, ScalarMap(e, 0.4), ScalarMap(e, 0.6),
                                      ColorMap(e, Vec3::Constant(0.3))),
               InvalidArgument);
}

}  // namespace
}  // namespace flashmat
