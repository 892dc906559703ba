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

#include "flashmat/diff_render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flashmat {

namespace {

// Specular lobe written as S = D F Q / 4 with Q = G / ((n.l)(n.v))
// = 1 / (A B), A = nv (1 - k) + k, B = nl (1 - k) + k.
struct SpecularPartials {
  double value = 0.0;
  Vec3 d_normal = Vec3::Zero();  // with respect to the unit normal
  double d_roughness = 0.0;
};

SpecularPartials specular_partials(const BrdfParams& p, const ShadingVectors& sv) {
  const double nl_raw = p.normal.dot(sv.light);
  const double nv_raw = p.normal.dot(sv.view);
  const double nl = std::max(nl_raw, kCosEpsilon);
  const double nv = std::max(nv_raw, kCosEpsilon);
  const double nh = p.normal.dot(sv.half);
  const double vh = std::max(sv.view.dot(sv.half), 0.0);
  const double r = p.roughness;

  const double a2 = r * r * r * r;
  const double q = nh * nh * (a2 - 1.0) + 1.0;
  const double pi_q3 = std::numbers::pi * q * q * q;
  const double dist = a2 / (std::numbers::pi * q * q);
  const double d_dist_d_a2 = (q - 2.0 * a2 * nh * nh) / pi_q3;
  const double d_dist_d_r = d_dist_d_a2 * 4.0 * r * r * r;
  const double d_dist_d_nh = -4.0 * a2 * nh * (a2 - 1.0) / pi_q3;

  const double k = (r + 1.0) * (r + 1.0) / 8.0;
  const double dk_dr = (r + 1.0) / 4.0;
  const double a = nv * (1.0 - k) + k;
  const double b = nl * (1.0 - k) + k;
  const double vis = 1.0 / (a * b);
  const double d_vis_d_nv = -(1.0 - k) / (a * a * b);
  const double d_vis_d_nl = -(1.0 - k) / (a * b * b);
  const double d_vis_d_k = -((1.0 - nv) * b + a * (1.0 - nl)) / (a * a * b * b);

  const double fres = fresnel_term(vh, p.f0);

  SpecularPartials out;
  out.value = dist * fres * vis / 4.0;
  out.d_roughness = fres / 4.0 * (d_dist_d_r * vis + dist * d_vis_d_k * dk_dr);
  Vec3 dn = d_dist_d_nh * vis * sv.half;
  if (nv_raw >= kCosEpsilon) dn += dist * d_vis_d_nv * sv.view;
  if (nl_raw >= kCosEpsilon) dn += dist * d_vis_d_nl * sv.light;
  out.d_normal = fres / 4.0 * dn;
  return out;
}

}  // namespace

PixelGradient shade_pixel_gradient(const BrdfParams& params, const PixelGeometry& geometry,
                                   const Vec3& ambient) {
  PixelGradient g;
  const ShadingVectors& sv = geometry.vectors;
  const double n_dot_l = params.normal.dot(sv.light);
  if (!(n_dot_l >= 0.0)) {
    g.d_albedo = ambient.asDiagonal();
    return g;
  }
  const SpecularPartials spec = specular_partials(params, sv);
  const Vec3& e = geometry.irradiance;

  g.d_albedo = (n_dot_l * e + ambient).asDiagonal();
  g.d_roughness = n_dot_l * spec.d_roughness * e;

  // d radiance_c / d n for a unit normal, then through normalization.
  Mat3 d_unit;
  for (int c = 0; c < 3; ++c) {
    const Vec3 row = e[c] * ((params.diffuse[c] + spec.value) * sv.light + n_dot_l * spec.d_normal);
    d_unit.row(c) = row.transpose();
  }
  const Vec3& n = params.normal;
  const Mat3 projector = Mat3::Identity() - n * n.transpose();
  g.d_normal = d_unit * projector;
  return g;
}

RenderWithGradients render_with_gradients(const SvbrdfMaps& maps, const SceneConfig& config,
                                          ViewModel view) {
  RenderWithGradients out;
  out.image = render_image(maps, config, view);
  const Extent ext = config.resolution;
  out.gradients.d_albedo = Image<Mat3>(ext, Mat3::Zero());
  out.gradients.d_normal = Image<Mat3>(ext, Mat3::Zero());
  out.gradients.d_roughness = Image<Vec3>(ext, Vec3::Zero());
  for (int row = 0; row < ext.height; ++row) {
    for (int col = 0; col < ext.width; ++col) {
      const std::size_t i = out.image.index(row, col);
      const PixelGradient g = shade_pixel_gradient(
          maps.params_at(i), pixel_geometry(config, row, col, view), config.ambient);
      out.gradients.d_albedo[i] = g.d_albedo;
      out.gradients.d_normal[i] = g.d_normal;
      out.gradients.d_roughness[i] = g.d_roughness;
    }
  }
  return out;
}

std::string to_string(ParamClass c) {
  switch (c) {
    case ParamClass::kAlbedo:
      return "albedo";
    case ParamClass::kNormal:
      return "normal";
    case ParamClass::kRoughness:
      return "roughness";
  }
  return "unknown";
}

const DiscrepancyStats& GradcheckReport::stats(ParamClass c) const {
  switch (c) {
    case ParamClass::kAlbedo:
      return albedo;
    case ParamClass::kNormal:
      return normal;
    case ParamClass::kRoughness:
      break;
  }
  return roughness;
}

DiscrepancyStats& GradcheckReport::stats(ParamClass c) {
  return const_cast<DiscrepancyStats&>(std::as_const(*this).stats(c));
}

namespace {

ParamClass class_of(int param) {
  if (param < 3) return ParamClass::kAlbedo;
  if (param < 6) return ParamClass::kNormal;
  return ParamClass::kRoughness;
}

SvbrdfMaps perturbed(const SvbrdfMaps& maps, std::size_t i, int param, double delta) {
  SvbrdfMaps out = maps;
  if (param < 3) {
    out.albedo[i][param] += delta;
  } else if (param < 6) {
    Vec3 m = out.normal[i];
    m[param - 3] += delta;
    out.normal[i] = m.normalized();
  } else {
    out.roughness[i] += delta;
  }
  return out;
}

Vec3 analytic_column(const GradientField& g, std::size_t i, int param) {
  if (param < 3) return g.d_albedo[i].col(param);
  if (param < 6) return g.d_normal[i].col(param - 3);
  return g.d_roughness[i];
}

bool near_clamp(const SvbrdfMaps& maps, const SceneConfig& config, int row, int col,
                double step) {
  const std::size_t i = maps.albedo.index(row, col);
  const PixelGeometry geo = pixel_geometry(config, row, col);
  const Vec3& n = maps.normal[i];
  const double margin = kCosEpsilon + 10.0 * step;
  const double r = maps.roughness[i];
  return n.dot(geo.vectors.light) <= margin || n.dot(geo.vectors.view) <= margin ||
         r - step < kMinRoughness || r + step > kMaxRoughness;
}

void accumulate(DiscrepancyStats& s, const Vec3& analytic, const Vec3& numeric) {
  for (int c = 0; c < 3; ++c) {
    const double a = analytic[c];
    const double f = numeric[c];
    const double abs_err = std::abs(a - f);
    const double mag = std::max(std::abs(a), std::abs(f));
    s.max_abs_error = std::max(s.max_abs_error, abs_err);
    bool ok;
    if (mag < kGradcheckSmall) {
      s.max_abs_error_small = std::max(s.max_abs_error_small, abs_err);
      ok = abs_err < kGradcheckAbsTol;
    } else {
      const double rel = abs_err / mag;
      s.max_rel_error = std::max(s.max_rel_error, rel);
      ok = rel < kGradcheckRelTol;
    }
    ++s.compared;
    if (!ok) ++s.failures;
  }
}

}  // namespace

GradcheckReport finite_diff_check(const SvbrdfMaps& maps, const SceneConfig& config, double step,
                                  const std::vector<ParamSample>& samples) {
  if (!(step > 0.0)) throw InvalidArgument("finite_diff_check: step must be positive");
  const RenderWithGradients base = render_with_gradients(maps, config);
  GradcheckReport report;
  report.step = step;
  const Extent ext = config.resolution;
  for (const ParamSample& s : samples) {
    if (s.row < 0 || s.row >= ext.height || s.col < 0 || s.col >= ext.width) {
      throw InvalidArgument("finite_diff_check: pixel outside the image");
    }
    if (s.param < 0 || s.param > 6) throw InvalidArgument("finite_diff_check: bad parameter");
    const std::pair<int, int> px{s.row, s.col};
    if (near_clamp(maps, config, s.row, s.col, step)) {
      if (std::find(report.skipped_pixels.begin(), report.skipped_pixels.end(), px) ==
          report.skipped_pixels.end()) {
        report.skipped_pixels.push_back(px);
      }
      continue;
    }
    if (std::find(report.checked_pixels.begin(), report.checked_pixels.end(), px) ==
        report.checked_pixels.end()) {
      report.checked_pixels.push_back(px);
    }
    const std::size_t i = maps.albedo.index(s.row, s.col);
    const RadianceImage plus = render_image(perturbed(maps, i, s.param, step), config);
    const RadianceImage minus = render_image(perturbed(maps, i, s.param, -step), config);
    const Vec3 numeric = (plus[i] - minus[i]) / (2.0 * step);
    accumulate(report.stats(class_of(s.param)), analytic_column(base.gradients, i, s.param),
               numeric);
  }
  return report;
}

GradcheckReport finite_diff_check(const SvbrdfMaps& maps, const SceneConfig& config, double step,
                                  const std::vector<std::pair<int, int>>& pixel_sample) {
  std::vector<ParamSample> samples;
  samples.reserve(pixel_sample.size() * 7);
  for (const auto& [row, col] : pixel_sample) {
    for (int p = 0; p < 7; ++p) samples.push_back({row, col, p});
  }
  return finite_diff_check(maps, config, step, samples);
}

}  // namespace flashmat
