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

#include "flashmat/brdf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flashmat {

namespace {

double schlick_k(double roughness) {
  const double rp1 = roughness + 1.0;
  return rp1 * rp1 / 8.0;
}

}  // namespace

ShadingVectors make_shading_vectors(const Vec3& view, const Vec3& light) {
  ShadingVectors out;
  out.view = view.normalized();
  out.light = light.normalized();
  const Vec3 sum = out.view + out.light;
  const double len = sum.norm();
  out.half = len > 0.0 ? Vec3(sum / len) : Vec3(Vec3::UnitZ());
  return out;
}

double distribution_term(double n_dot_h, double roughness) {
  roughness = std::clamp(roughness, kMinRoughness, kMaxRoughness);
  const double alpha = roughness * roughness;
  const double a2 = alpha * alpha;
  const double q = n_dot_h * n_dot_h * (a2 - 1.0) + 1.0;
  return a2 / (std::numbers::pi * q * q);
}

double fresnel_term(double v_dot_h, double f0) {
  const double exponent = (-5.55473 * v_dot_h - 6.98316) * v_dot_h;
  return (1.0 - f0) * std::exp2(exponent) + f0;
}

double smith_g1(double n_dot_x, double roughness) {
  const double k = schlick_k(roughness);
  return n_dot_x / (n_dot_x * (1.0 - k) + k);
}

// The light factor uses n.l in its own denominator. Printed versions of this
// model sometimes show n.v there, which breaks v/l reciprocity.
double geometry_term(double n_dot_v, double n_dot_l, double roughness) {
  return smith_g1(n_dot_v, roughness) * smith_g1(n_dot_l, roughness);
}

double eval_specular(const BrdfParams& params, const ShadingVectors& vectors) {
  const double n_dot_l = std::max(params.normal.dot(vectors.light), kCosEpsilon);
  const double n_dot_v = std::max(params.normal.dot(vectors.view), kCosEpsilon);
  const double n_dot_h = params.normal.dot(vectors.half);
  const double v_dot_h = std::max(vectors.view.dot(vectors.half), 0.0);
  const double d = distribution_term(n_dot_h, params.roughness);
  const double f = fresnel_term(v_dot_h, params.f0);
  const double g = geometry_term(n_dot_v, n_dot_l, params.roughness);
  return d * f * g / (4.0 * n_dot_l * n_dot_v);
}

Vec3 eval_brdf(const BrdfParams& params, const ShadingVectors& vectors) {
  const double spec = eval_specular(params, vectors);
  return params.diffuse + Vec3::Constant(spec);
}

double f0_dielectric(double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("f0_dielectric: eta must be positive");
  const double num = (1.0 - eta) * (1.0 - eta);
  const double den = (1.0 + eta) * (1.0 + eta);
  return num / den;
}

// ((eta - 1)^2 + kappa^2) / ((eta + 1)^2 + kappa^2). The inverted ratio that
// sometimes circulates for this formula is >= 1 and not a reflectance.
double f0_conductor(double eta, double kappa) {
  if (!(eta > 0.0)) throw InvalidArgument("f0_conductor: eta must be positive");
  if (!(kappa >= 0.0)) throw InvalidArgument("f0_conductor: kappa must be non-negative");
  const double k2 = kappa * kappa;
  return ((eta - 1.0) * (eta - 1.0) + k2) / ((eta + 1.0) * (eta + 1.0) + k2);
}

}  // namespace flashmat
