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

#include "flashmat/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace flashmat {

void validate(const GridSearchConfig& gs) {
  if (gs.levels < 1) throw InvalidArgument("grid search needs at least one level");
  if (gs.coarse_samples < 3) throw InvalidArgument("grid search needs at least 3 samples");
  if (!(gs.range_min >= kMinRoughness - 1e-12 && gs.range_max <= kMaxRoughness + 1e-12 &&
        gs.range_min < gs.range_max)) {
    throw InvalidArgument("grid search range must lie within [r_min, 1]");
  }
  if (!(gs.shrink > 0.0 && gs.shrink < 1.0)) throw InvalidArgument("shrink must lie in (0, 1)");
}

double finest_grid_spacing(const GridSearchConfig& gs) {
  validate(gs);
  const double width = (gs.range_max - gs.range_min) * std::pow(gs.shrink, gs.levels - 1);
  return width / (gs.coarse_samples - 1);
}

namespace {

struct Candidate {
  double roughness = kMaxRoughness;
  double residual = 0.0;
};

bool better(const Candidate& a, const Candidate& b) {
  return a.residual < b.residual || (a.residual == b.residual && a.roughness > b.roughness);
}

}  // namespace

// The specular response is not monotone in roughness away from the mirror
// direction, so a coarse level can show two basins of which the narrower one
// holds the answer. Every coarse local minimum is refined independently.
PixelSearchResult search_pixel_roughness(const Vec3& observed, const BrdfParams& base,
                                         const PixelGeometry& geometry, const Vec3& ambient,
                                         const GridSearchConfig& gs) {
  BrdfParams params = base;
  auto eval = [&](double r) {
    params.roughness = r;
    return Candidate{r, (shade_pixel(params, geometry, ambient) - observed).squaredNorm()};
  };
  const int n = gs.coarse_samples;
  auto sample = [&](double lo, double width, int s) {
    return s == n - 1 ? lo + width : lo + width * s / (n - 1);
  };

  const double width = gs.range_max - gs.range_min;
  std::vector<Candidate> coarse;
  coarse.reserve(n);
  for (int s = 0; s < n; ++s) coarse.push_back(eval(sample(gs.range_min, width, s)));

  // Refines around `c` with bracket width `w`, which is shrunk first.
  auto refine = [&](Candidate& c, double& w) {
    w *= gs.shrink;
    const double lo = std::clamp(c.roughness - 0.5 * w, gs.range_min, gs.range_max - w);
    for (int s = 0; s < n; ++s) {
      const Candidate t = eval(sample(lo, w, s));
      if (better(t, c)) c = t;
    }
  };

  // Basins are ranked by a deeper polish than the configured levels: the true
  // basin can be narrow enough that its finest-grid residual loses to a shallow
  // near-miss elsewhere.
  constexpr int kPolishLevels = 12;
  const double root_floor = 1e-24 * (1.0 + observed.squaredNorm());
  PixelSearchResult result;
  Candidate best_rank;
  bool have = false;
  for (int s = 0; s < n; ++s) {
    const bool left_ok = s == 0 || coarse[s].residual <= coarse[s - 1].residual;
    const bool right_ok = s == n - 1 || coarse[s].residual <= coarse[s + 1].residual;
    if (!(left_ok && right_ok)) continue;

    Candidate c = coarse[s];
    double w = width;
    PixelSearchResult branch;
    branch.level_residuals.push_back(c.residual);
    for (int level = 1; level < gs.levels; ++level) {
      refine(c, w);
      branch.level_residuals.push_back(c.residual);
    }
    branch.roughness = c.roughness;
    branch.residual = c.residual;
    for (int k = 0; k < kPolishLevels; ++k) refine(c, w);

    // Residuals at round-off level are exact roots and count as ties.
    const Candidate rank{branch.roughness, std::max(c.residual, root_floor)};
    if (!have || better(rank, best_rank)) {
      result = std::move(branch);
      best_rank = rank;
      have = true;
    }
  }
  return result;
}

ScalarMap roughness_grid_search(const RadianceImage& observed, const ColorMap& albedo,
                                const NormalMap& normal, double f0, const SceneConfig& config,
                                const GridSearchConfig& gs) {
  validate(gs);
  require_same_extent(observed, albedo, "roughness_grid_search");
  require_same_extent(observed, normal, "roughness_grid_search");
  if (observed.extent() != config.resolution) {
    throw DimensionError("roughness_grid_search: observation does not match scene resolution");
  }
  ScalarMap out(observed.extent());
  for (int row = 0; row < out.height(); ++row) {
    for (int col = 0; col < out.width(); ++col) {
      const std::size_t i = out.index(row, col);
      const BrdfParams base{albedo[i], normal[i], kMaxRoughness, f0};
      out[i] = search_pixel_roughness(observed[i], base, pixel_geometry(config, row, col),
                                      config.ambient, gs)
                   .roughness;
    }
  }
  return out;
}

void validate(const FitConfig& fit) {
  if (!(fit.step_albedo > 0.0 && fit.step_normal > 0.0 && fit.step_roughness > 0.0)) {
    throw InvalidArgument("fit step sizes must be positive");
  }
  if (fit.max_iters < 0) throw InvalidArgument("max_iters must be non-negative");
}

void project_to_valid(SvbrdfMaps& maps) {
  for (std::size_t i = 0; i < maps.albedo.size(); ++i) {
    maps.albedo[i] = maps.albedo[i].cwiseMax(0.0);
    maps.roughness[i] = std::clamp(maps.roughness[i], kMinRoughness, kMaxRoughness);
    Vec3 n = maps.normal[i];
    n.z() = std::max(n.z(), 1e-3);
    maps.normal[i] = n.normalized();
  }
}

namespace {

struct LightView {
  SceneConfig config;
  const RadianceImage* observed;
};

std::vector<LightView> light_views(const RadianceImage& observed, const SceneConfig& config,
                                   const std::vector<LitObservation>& novel) {
  std::vector<LightView> views{{config, &observed}};
  for (const LitObservation& o : novel) {
    require_same_extent(observed, o.image, "fit novel light observation");
    SceneConfig c = config;
    c.light_position = o.light_position;
    views.push_back({c, &o.image});
  }
  return views;
}

double loss_over_views(const SvbrdfMaps& maps, const std::vector<LightView>& views) {
  double sum = 0.0;
  for (const LightView& v : views) {
    const RadianceImage r = render_image(maps, v.config);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      acc += (tonemap(r[i]) - tonemap((*v.observed)[i])).squaredNorm();
    }
    sum += acc / (3.0 * static_cast<double>(r.size()));
  }
  return sum / static_cast<double>(views.size());
}

// Per-pixel gradient of the loss, scaled by the pixel count so step sizes do
// not depend on resolution.
struct MapGradient {
  ColorMap albedo;
  Image<Vec3> normal;
  ScalarMap roughness;
};

MapGradient loss_gradient(const SvbrdfMaps& maps, const std::vector<LightView>& views) {
  const Extent e = maps.extent();
  MapGradient g{ColorMap(e, Vec3::Zero()), Image<Vec3>(e, Vec3::Zero()), ScalarMap(e, 0.0)};
  const double scale = 2.0 / (3.0 * static_cast<double>(views.size()));
  for (const LightView& v : views) {
    const RenderWithGradients rg = render_with_gradients(maps, v.config);
    for (std::size_t i = 0; i < rg.image.size(); ++i) {
      const Vec3& r = rg.image[i];
      const Vec3& o = (*v.observed)[i];
      Vec3 dl_dr;
      for (int c = 0; c < 3; ++c) {
        dl_dr[c] = scale * (tonemap(r[c]) - tonemap(o[c])) * tonemap_derivative(r[c]);
      }
      g.albedo[i] += rg.gradients.d_albedo[i].transpose() * dl_dr;
      g.normal[i] += rg.gradients.d_normal[i].transpose() * dl_dr;
      g.roughness[i] += rg.gradients.d_roughness[i].dot(dl_dr);
    }
  }
  return g;
}

SvbrdfMaps take_step(const SvbrdfMaps& maps, const MapGradient& g, const FitConfig& fit,
                     double scale) {
  SvbrdfMaps out = maps;
  for (std::size_t i = 0; i < out.albedo.size(); ++i) {
    out.albedo[i] -= scale * fit.step_albedo * g.albedo[i];
    out.normal[i] -= scale * fit.step_normal * g.normal[i];
    out.roughness[i] -= scale * fit.step_roughness * g.roughness[i];
  }
  project_to_valid(out);
  return out;
}

}  // namespace

double tonemapped_fit_loss(const SvbrdfMaps& maps, const RadianceImage& observed,
                           const SceneConfig& config,
                           const std::vector<LitObservation>& novel_lights) {
  require_same_extent(observed, maps.albedo, "tonemapped_fit_loss");
  return loss_over_views(maps, light_views(observed, config, novel_lights));
}

FitResult fit_svbrdf_gd(const RadianceImage& observed, const SvbrdfMaps& init,
                        const SceneConfig& config, const FitConfig& fit) {
  validate(fit);
  validate_maps(init);
  require_same_extent(observed, init.albedo, "fit_svbrdf_gd");
  const std::vector<LightView> views = light_views(observed, config, fit.novel_lights);

  FitResult result;
  result.maps = init;
  double loss = loss_over_views(result.maps, views);
  if (!std::isfinite(loss)) throw DataError("fit_svbrdf_gd: non-finite initial loss");
  result.loss_trace.push_back(loss);

  double scale = 1.0;
  int halvings = 0;
  MapGradient grad = loss_gradient(result.maps, views);
  while (result.iterations < fit.max_iters && loss > fit.loss_tolerance &&
         halvings <= fit.max_halvings) {
    ++result.iterations;
    SvbrdfMaps candidate = take_step(result.maps, grad, fit, scale);
    const double candidate_loss = loss_over_views(candidate, views);
    if (!std::isfinite(candidate_loss)) {
      throw DataError("fit_svbrdf_gd: non-finite loss at iteration " +
                      std::to_string(result.iterations));
    }
    if (candidate_loss < loss) {
      result.maps = std::move(candidate);
      loss = candidate_loss;
      result.loss_trace.push_back(loss);
      grad = loss_gradient(result.maps, views);
      halvings = 0;
      scale = std::min(1.0, 2.0 * scale);
    } else {
      scale *= 0.5;
      ++halvings;
    }
  }
  return result;
}

ColorMap albedo_from_observation(const RadianceImage& observed, const SceneConfig& config) {
  if (observed.extent() != config.resolution) {
    throw DimensionError("albedo_from_observation: observation does not match scene");
  }
  ColorMap out(observed.extent());
  for (int row = 0; row < out.height(); ++row) {
    for (int col = 0; col < out.width(); ++col) {
      const PixelGeometry g = pixel_geometry(config, row, col);
      const double n_dot_l = std::max(g.vectors.light.z(), 0.0);
      const Vec3 shading = n_dot_l * g.irradiance + config.ambient;
      Vec3 a = Vec3::Zero();
      for (int c = 0; c < 3; ++c) {
        if (shading[c] > 0.0) a[c] = observed(row, col)[c] / shading[c];
      }
      out(row, col) = a;
    }
  }
  return out;
}

}  // namespace flashmat
