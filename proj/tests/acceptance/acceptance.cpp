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

// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flashmat/augment.hpp"
#include "flashmat/brdf.hpp"
#include "flashmat/dcrf.hpp"
#include "flashmat/diff_render.hpp"
#include "flashmat/estimators.hpp"
#include "flashmat/io.hpp"
#include "flashmat/losses.hpp"
#include "flashmat/photometric_stereo.hpp"
#include "flashmat/scene.hpp"
#include "test_support.hpp"

namespace fm = flashmat;
using fm::Extent;
using fm::Vec3;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1

void microfacet_identities(Verdict& v) {
  const auto t0 = Clock::now();
  // midpoint rule in theta over the hemisphere of half vectors:
  // 2 pi int D(cos t) cos t sin t dt
  constexpr int kSteps = 20000;
  double worst = 0.0;
  for (double r : {0.1, 0.3, 0.6, 1.0}) {
    double sum = 0.0;
    const double dt = 0.5 * kPi / kSteps;
    for (int k = 0; k < kSteps; ++k) {
      const double t = (k + 0.5) * dt;
      sum += fm::distribution_term(std::cos(t), r) * std::cos(t) * std::sin(t) * dt;
    }
    const double integral = 2.0 * kPi * sum;
    worst = std::max(worst, std::abs(integral - 1.0));
    v.detail << " int[r=" << r << "]=" << integral;
  }
  v.require(worst <= 0.02, "hemisphere integral within 2%");
  v.require(fm::fresnel_term(0.0, 0.05) == 1.0, "fresnel(0, f0) = 1");
  const double oracle = 0.05 + 0.95 * std::exp2(-5.55473 - 6.98316);
  const double f = fm::fresnel_term(1.0, 0.05);
  v.detail << " F(1,0.05)=" << f;
  v.require(std::abs(f - oracle) <= 1e-9, "fresnel(1, 0.05)");
  const double dt = seconds_since(t0);
  v.detail << " time=" << dt << "s";
  v.require(dt < 1.0, "runtime < 1 s");
}

// ---------------------------------------------------------------- 2

void normal_bin_table(Verdict& v) {
  const std::array<double, 3> w = fm::normal_bin_weights(fm::kDatasetNormalBinProbabilities);
  const std::array<double, 3> printed{0.869, 1.060, 1.469};
  for (std::size_t i = 0; i < 3; ++i) {
    const double rounded = std::round(w[i] * 1000.0) / 1000.0;
    v.detail << " W" << i + 1 << "=" << w[i];
    v.require(std::abs(rounded - printed[i]) < 1e-9, "bin weight " + std::to_string(i + 1));
  }
}

// ---------------------------------------------------------------- 3

void gradient_correctness(Verdict& v) {
  const auto t0 = Clock::now();
  const Extent e{16, 16};
  const fm::SceneConfig scene = fm::default_scene(e);
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pix(0, 15);
  std::uniform_int_distribution<int> param(0, 6);
  constexpr int kMaps = 25;
  constexpr int kPerMap = 48;
  std::size_t compared = 0;
  std::size_t failures = 0;
  std::size_t samples_checked = 0;
  std::size_t skipped = 0;
  double worst_rel = 0.0;
  double worst_small = 0.0;
  for (int m = 0; m < kMaps; ++m) {
    const fm::SvbrdfMaps maps = fm::testing::random_smooth_maps(
        e, static_cast<std::uint64_t>(m) + 100, 0.05, 1.0, fm::kMinRoughness, fm::kMaxRoughness,
        0.5);
    std::vector<fm::ParamSample> samples;
    for (int k = 0; k < kPerMap; ++k) samples.push_back({pix(rng), pix(rng), param(rng)});
    const fm::GradcheckReport r = fm::finite_diff_check(maps, scene, 1e-4, samples);
    for (fm::ParamClass c :
         {fm::ParamClass::kAlbedo, fm::ParamClass::kNormal, fm::ParamClass::kRoughness}) {
      const fm::DiscrepancyStats& s = r.stats(c);
      compared += s.compared;
      failures += s.failures;
      worst_rel = std::max(worst_rel, s.max_rel_error);
      worst_small = std::max(worst_small, s.max_abs_error_small);
    }
    skipped += r.skipped_pixels.size();
    for (const fm::ParamSample& s : samples) {
      const std::pair<int, int> px{s.row, s.col};
      if (std::find(r.skipped_pixels.begin(), r.skipped_pixels.end(), px) ==
          r.skipped_pixels.end()) {
        ++samples_checked;
      }
    }
  }
  const double dt = seconds_since(t0);
  v.detail << " samples=" << samples_checked << " entries=" << compared
           << " skipped_pixels=" << skipped << " failures=" << failures
           << " max_rel=" << worst_rel << " max_abs_small=" << worst_small << " time=" << dt
           << "s";
  v.require(samples_checked >= 1000, "at least 1000 checked samples");
  v.require(failures == 0, "all entries within tolerance");
  v.require(dt < 30.0, "runtime < 30 s");
}

// ---------------------------------------------------------------- 4

// Dense stationarity solve with pair weights assembled from raw feature
// vectors.
fm::ChannelMap dense_solve(const fm::DcrfProblem& p) {
  const Extent e = p.extent();
  const auto n = static_cast<Eigen::Index>(e.pixels());
  const int ch = p.channels();
  std::vector<std::vector<std::vector<double>>> feats(p.kernels.size());
  for (std::size_t k = 0; k < p.kernels.size(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<double> f =
          fm::kernel_feature_vector(p.features, p.kernels[k], static_cast<std::size_t>(i));
      std::size_t offset = 0;
      for (const fm::FeatureGroup& g : p.kernels[k].groups) {
        const int d = fm::feature_dimension(g.kind);
        for (int q = 0; q < d; ++q) f[offset + q] /= g.std;
        offset += static_cast<std::size_t>(d);
      }
      feats[k].push_back(std::move(f));
    }
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, ch);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const fm::Unary& u : p.unaries) {
      const double alpha = u.weight[static_cast<std::size_t>(i)];
      a(i, i) += alpha;
      for (int c = 0; c < ch; ++c) b(i, c) += alpha * u.target.at(static_cast<std::size_t>(i), c);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double w = 0.0;
      for (std::size_t k = 0; k < p.kernels.size(); ++k) {
        double d2 = 0.0;
        for (std::size_t q = 0; q < feats[k][i].size(); ++q) {
          const double d = feats[k][i][q] - feats[k][j][q];
          d2 += d * d;
        }
        w += p.kernels[k].beta * std::exp(-0.5 * d2);
      }
      a(i, i) += 2.0 * w;
      a(i, j) -= 2.0 * w;
    }
  }
  const Eigen::MatrixXd x = a.partialPivLu().solve(b);
  fm::ChannelMap out(e, ch);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < ch; ++c) out.at(static_cast<std::size_t>(i), c) = x(i, c);
  }
  return out;
}

fm::DcrfProblem random_problem(const std::string& preset_name, std::mt19937_64& rng,
                               bool zero_beta) {
  const Extent e{8, 8};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> beta_scale(1.0, 100.0);
  fm::DcrfPreset preset = fm::preset_by_name(preset_name);
  std::vector<double> theta = preset.coefficients();
  for (std::size_t k = preset.unary_coefficients.size(); k < theta.size(); ++k) {
    theta[k] = zero_beta ? 0.0 : theta[k] * beta_scale(rng);
  }
  preset = preset.with_coefficients(theta);

  fm::Image<Vec3> input(e);
  for (Vec3& c : input) c = Vec3(u(rng), u(rng), u(rng)) * 1.5;
  fm::ColorMap diffuse(e);
  for (Vec3& c : diffuse) c = Vec3(u(rng), u(rng), u(rng));
  fm::DcrfProblem p;
  if (preset_name == "diffuse") {
    p = fm::make_diffuse_problem(preset, input, diffuse);
  } else if (preset_name == "normal") {
    fm::NormalMap normal(e);
    for (Vec3& n : normal) n = Vec3(u(rng) - 0.5, u(rng) - 0.5, 1.0).normalized();
    p = fm::make_normal_problem(preset, normal, diffuse);
    p.renormalize = false;  // compare the linear-system solution itself
  } else {
    fm::ScalarMap predicted(e);
    fm::ScalarMap grid(e);
    for (double& r : predicted) r = 0.1 + 0.9 * u(rng);
    for (double& r : grid) r = 0.1 + 0.9 * u(rng);
    p = fm::make_roughness_problem(preset, input, predicted, grid, diffuse);
  }
  p.tolerance = 1e-14;
  p.iterations = 20000;
  return p;
}

void dcrf_solver(Verdict& v) {
  std::mt19937_64 rng(77);
  for (const char* name : {"diffuse", "normal", "roughness"}) {
    int monotone_fail = 0;
    int dense_fail = 0;
    int unary_fail = 0;
    double worst_dense = 0.0;
    int max_sweeps = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const fm::DcrfProblem p = random_problem(name, rng, false);
      const fm::DcrfResult r = fm::dcrf_solve(p, {.record_energy = true});
      for (std::size_t k = 1; k < r.energy_trace.size(); ++k) {
        const double slack = 1e-12 * std::abs(r.energy_trace[k - 1]);
        if (r.energy_trace[k] > r.energy_trace[k - 1] + slack) {
          ++monotone_fail;
          break;
        }
      }
      max_sweeps = std::max(max_sweeps, r.sweeps);
      const fm::ChannelMap oracle = dense_solve(p);
      double err = 0.0;
      for (std::size_t i = 0; i < oracle.data.size(); ++i) {
        err = std::max(err, std::abs(oracle.data[i] - r.solution.data[i]));
      }
      worst_dense = std::max(worst_dense, err);
      if (!(err <= 1e-6) || !r.converged) ++dense_fail;

      const fm::DcrfProblem z = random_problem(name, rng, true);
      const fm::ChannelMap zs = fm::dcrf_solve(z).solution;
      // weighted unary mean computed directly
      bool exact = true;
      for (std::size_t i = 0; i < z.extent().pixels(); ++i) {
        double wsum = 0.0;
        for (const fm::Unary& un : z.unaries) wsum += un.weight[i];
        for (int c = 0; c < z.channels(); ++c) {
          double num = 0.0;
          for (const fm::Unary& un : z.unaries) num += un.weight[i] / wsum * un.target.at(i, c);
          if (zs.at(i, c) != num) exact = false;
        }
      }
      if (!exact || zs.data != fm::unary_solution(z).data) ++unary_fail;
    }
    v.detail << " " << name << ":{monotone_fail=" << monotone_fail
             << " dense_fail=" << dense_fail << " max_err=" << worst_dense
             << " unary_fail=" << unary_fail << " max_sweeps=" << max_sweeps << "}";
    v.require(monotone_fail == 0, std::string(name) + " energy non-increasing");
    v.require(dense_fail == 0, std::string(name) + " dense solve agreement");
    v.require(unary_fail == 0, std::string(name) + " zero-beta unary solution");
  }
}

// ---------------------------------------------------------------- 5

void grid_search_round_trip(Verdict& v) {
  const auto t0 = Clock::now();
  const Extent e{32, 32};
  const fm::SceneConfig scene = fm::default_scene(e);
  fm::SvbrdfMaps truth = fm::testing::random_smooth_maps(e, 5, 0.2, 0.6, 0.5, 0.5, 0.3);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) {
      // three regions: vertical bands, with a block of the middle value
      double rough = c < 11 ? 0.2 : (c < 22 ? 0.4 : 0.7);
      if (r >= 24 && c < 11) rough = 0.7;
      truth.roughness(r, c) = rough;
    }
  }
  const fm::RadianceImage obs = fm::render_image(truth, scene);
  const fm::GridSearchConfig gs;
  const fm::ScalarMap got =
      fm::roughness_grid_search(obs, truth.albedo, truth.normal, truth.f0, scene, gs);
  const double half = 0.5 * fm::finest_grid_spacing(gs);
  double worst = 0.0;
  int bad = 0;
  int bad_on_twin_root = 0;
  for (int row = 0; row < 32; ++row) {
    for (int col = 0; col < 32; ++col) {
      const std::size_t i = got.index(row, col);
      const double err = std::abs(got[i] - truth.roughness[i]);
      worst = std::max(worst, err);
      if (err <= half) continue;
      ++bad;
      // Dense scan of the specular response for another value matching the
      // truth exactly; such a pixel is not identifiable from one image.
      const fm::PixelGeometry g = fm::pixel_geometry(scene, row, col);
      fm::BrdfParams p = truth.params_at(i);
      const double target = fm::eval_specular(p, g.vectors);
      bool above = false;
      for (double r = fm::kMinRoughness; r <= fm::kMaxRoughness; r += 1e-5) {
        p.roughness = r;
        const bool now = fm::eval_specular(p, g.vectors) > target;
        if (r > fm::kMinRoughness && now != above && std::abs(r - got[i]) <= half &&
            std::abs(r - truth.roughness[i]) > half) {
          ++bad_on_twin_root;
          break;
        }
        above = now;
      }
    }
  }
  const double dt = seconds_since(t0);
  v.detail << " max_err=" << worst << " tolerance=" << half << " bad_pixels=" << bad
           << " of_which_on_second_exact_root=" << bad_on_twin_root << " time=" << dt << "s";
  v.require(bad == 0, "every pixel within half the finest spacing");
  v.require(dt < 10.0, "runtime < 10 s");
}

// ---------------------------------------------------------------- 6

void fitter_self_consistency(Verdict& v) {
  const auto t0 = Clock::now();
  const Extent e{32, 32};
  const fm::SceneConfig scene = fm::default_scene(e);
  const fm::SvbrdfMaps truth = fm::testing::random_smooth_maps(e, 31, 0.2, 0.6, 0.3, 0.8, 0.3);
  const fm::RadianceImage obs = fm::render_image(truth, scene);

  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  fm::SvbrdfMaps init = truth;
  for (fm::Vec3& a : init.albedo) a += 0.1 * Vec3(u(rng), u(rng), u(rng));
  for (fm::Vec3& n : init.normal) {
    // rotate by up to 10 degrees about a random tangent axis
    const Vec3 t = n.cross(Vec3(u(rng), u(rng), u(rng))).normalized();
    const double angle = 10.0 * kPi / 180.0 * std::abs(u(rng));
    n = Eigen::AngleAxisd(angle, t) * n;
  }
  for (double& r : init.roughness) r += 0.1 * u(rng);
  fm::project_to_valid(init);

  // A single collocated image leaves albedo, normal and roughness trading off
  // against each other; extra seeded light positions pin the solution down.
  fm::FitConfig cfg;
  cfg.max_iters = 2000;
  for (std::uint64_t k = 0; k < 8; ++k) {
    fm::SceneConfig relit = scene;
    relit.light_position = fm::sample_novel_light(100 + k, scene.camera_height());
    cfg.novel_lights.push_back({relit.light_position, fm::render_image(truth, relit)});
  }
  const fm::FitResult r = fm::fit_svbrdf_gd(obs, init, scene, cfg);
  const double first = r.loss_trace.front();
  const double last = r.loss_trace.back();
  // squared per-pixel difference, the same convention as the L2 losses
  double worst_albedo = 0.0;
  for (std::size_t i = 0; i < truth.albedo.size(); ++i) {
    worst_albedo = std::max(worst_albedo, (r.maps.albedo[i] - truth.albedo[i]).squaredNorm());
  }
  const double dt = seconds_since(t0);
  v.detail << " initial_loss=" << first << " final_loss=" << last
           << " reduction=" << (last > 0 ? first / last : INFINITY)
           << " iterations=" << r.iterations << " novel_lights=" << cfg.novel_lights.size()
           << " max_albedo_l2=" << worst_albedo << " max_albedo_dist=" << std::sqrt(worst_albedo)
           << " time=" << dt << "s";
  v.require(last * 10.0 <= first, "loss reduced at least 10x");
  v.require(worst_albedo < 1e-3, "per-pixel albedo L2 < 1e-3");
  v.require(dt < 120.0, "runtime < 2 min");
}

// ---------------------------------------------------------------- 7

double mean_angular_error(const fm::NormalMap& a, const fm::NormalMap& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double c = std::clamp(a[i].normalized().dot(b[i].normalized()), -1.0, 1.0);
    sum += std::acos(c) * 180.0 / kPi;
  }
  return sum / static_cast<double>(a.size());
}

void photometric_stereo(Verdict& v) {
  const fm::NormalMap normal = fm::testing::sphere_normals(32, 45.0);
  const fm::ColorMap albedo(normal.extent(), Vec3(0.6, 0.5, 0.4));
  fm::PsObservationSet obs;
  obs.light_dirs = fm::testing::random_light_dirs(52, 40.0, 52);
  obs.images = fm::testing::lambertian_images(normal, albedo, obs.light_dirs);
  obs.trim_high = 5;
  obs.trim_low = 5;
  const double clean = mean_angular_error(fm::lambertian_ps(obs).normal, normal);

  std::mt19937_64 rng(10);
  std::bernoulli_distribution corrupt(0.1);
  std::uniform_real_distribution<double> boost(2.0, 5.0);
  for (std::size_t i = 0; i < normal.size(); ++i) {
    for (fm::RadianceImage& img : obs.images) {
      if (corrupt(rng)) img[i] += Vec3::Constant(boost(rng));
    }
  }
  const double trimmed = mean_angular_error(fm::lambertian_ps(obs).normal, normal);
  obs.trim_high = 0;
  obs.trim_low = 0;
  const double untrimmed = mean_angular_error(fm::lambertian_ps(obs).normal, normal);
  v.detail << " clean_mean_err=" << clean << "deg outliers: trimmed=" << trimmed
           << "deg untrimmed=" << untrimmed << "deg";
  v.require(clean < 0.5, "noiseless mean angular error < 0.5 deg");
  v.require(trimmed < untrimmed, "trimming beats the untrimmed solve under outliers");
}

// ---------------------------------------------------------------- 8

void augmentation_arithmetic(Verdict& v) {
  const std::size_t count = fm::patch_plan(fm::AugmentPlan{}, {4096, 4096}).size();
  v.detail << " descriptors=" << count;
  v.require(count == 270, "270 descriptors");
  fm::Rng rng(8);
  constexpr int kN = 10000;
  double sum = 0.0;
  for (int k = 0; k < kN; ++k) sum += fm::draw_albedo_scale(rng);
  const double mean = sum / kN;
  double rs = 0.0;
  double rq = 0.0;
  for (int k = 0; k < kN; ++k) {
    const double s = fm::draw_roughness_scale(rng);
    rs += s;
    rq += s * s;
  }
  const double rmean = rs / kN;
  const double sd = std::sqrt((rq - kN * rmean * rmean) / (kN - 1));
  v.detail << " albedo_scale_mean=" << mean << " roughness_scale_std=" << sd;
  v.require(mean >= 1.09 && mean <= 1.11, "albedo scale mean");
  v.require(sd >= 0.19 && sd <= 0.21, "roughness multiplier std");
}

// ---------------------------------------------------------------- 9

void renderer_linearity(Verdict& v) {
  const Extent e{24, 20};
  fm::SceneConfig scene = fm::default_scene(e);
  scene.ambient = Vec3(0.02, 0.03, 0.01);
  const fm::SvbrdfMaps maps = fm::testing::random_smooth_maps(e, 90);
  const fm::RadianceImage base = fm::render_image(maps, scene);
  double worst = 0.0;
  for (double s : {0.25, 3.0, 17.5}) {
    fm::SceneConfig scaled = scene;
    scaled.light_intensity *= s;
    scaled.ambient *= s;
    const fm::RadianceImage img = fm::render_image(maps, scaled);
    for (std::size_t i = 0; i < img.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        const double want = s * base[i][c];
        if (want != 0.0) worst = std::max(worst, std::abs(img[i][c] - want) / std::abs(want));
      }
    }
  }
  v.detail << " max_rel_dev=" << worst;
  v.require(worst <= 1e-9, "intensity scaling linear to 1e-9");

  const fm::RadianceImage again = fm::render_image(maps, scene);
  v.require(again == base, "repeated renders bit-identical");

  const fm::testing::TempDir dir("acceptance");
  fm::write_pfm(dir / "render.pfm", base);
  const fm::Image<Vec3> back = fm::read_pfm_color(dir / "render.pfm");
  bool exact = true;
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      if (back[i][c] != static_cast<double>(static_cast<float>(base[i][c]))) exact = false;
    }
  }
  fm::write_pfm(dir / "again.pfm", back);
  exact = exact && fm::read_pfm_color(dir / "again.pfm") == back;
  v.require(exact, "PFM round trip bit-exact");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {"microfacet identities", microfacet_identities},
      {"normal-bin weight table", normal_bin_table},
      {"gradient correctness", gradient_correctness},
      {"DCRF solver", dcrf_solver},
      {"roughness grid search round trip", grid_search_round_trip},
      {"fitter self-consistency", fitter_self_consistency},
      {"photometric stereo", photometric_stereo},
      {"augmentation arithmetic", augmentation_arithmetic},
      {"renderer linearity and determinism", renderer_linearity},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      criteria[k].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s criterion %zu: %s:%s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
