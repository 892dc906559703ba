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

#include "flashmat/photometric_stereo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

namespace flashmat {

void validate(const PsObservationSet& obs) {
  if (obs.trim_high < 0 || obs.trim_low < 0) throw InvalidArgument("trim counts must be >= 0");
  if (obs.images.size() != obs.light_dirs.size()) {
    throw DataError("photometric stereo: one light direction per image required");
  }
  const auto l = static_cast<long>(obs.images.size());
  if (l <= static_cast<long>(obs.trim_high) + obs.trim_low + 2) {
    throw DataError("photometric stereo: need more than trim_high + trim_low + 2 observations");
  }
  for (const RadianceImage& img : obs.images) {
    require_same_extent(obs.images.front(), img, "photometric stereo images");
  }
  for (const Vec3& d : obs.light_dirs) {
    if (std::abs(d.norm() - 1.0) > 1e-6) {
      throw DataError("photometric stereo: light directions must be unit length");
    }
  }
}

std::vector<int> trim_observations(std::span<const double> intensities, int trim_high,
                                   int trim_low) {
  if (trim_high < 0 || trim_low < 0) throw InvalidArgument("trim counts must be >= 0");
  const auto n = static_cast<long>(intensities.size());
  if (n <= static_cast<long>(trim_high) + trim_low) {
    throw InvalidArgument("trim_observations: trimming " + std::to_string(trim_high + trim_low) +
                          " of " + std::to_string(n) + " observations leaves nothing");
  }
  std::vector<int> order(intensities.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return intensities[a] < intensities[b]; });
  std::vector<int> kept(order.begin() + trim_low, order.end() - trim_high);
  std::sort(kept.begin(), kept.end());
  return kept;
}

PsResult lambertian_ps(const PsObservationSet& obs) {
  validate(obs);
  const Extent e = obs.images.front().extent();
  const std::size_t count = obs.images.size();
  PsResult out{NormalMap(e, Vec3::UnitZ()), ColorMap(e, Vec3::Zero()),
               Image<unsigned char>(e, 0)};

  std::vector<double> luma(count);
  for (std::size_t i = 0; i < e.pixels(); ++i) {
    for (std::size_t k = 0; k < count; ++k) luma[k] = obs.images[k][i].mean();
    const std::vector<int> kept = trim_observations(luma, obs.trim_high, obs.trim_low);

    Eigen::MatrixXd lights(static_cast<Eigen::Index>(kept.size()), 3);
    Eigen::MatrixXd rhs(static_cast<Eigen::Index>(kept.size()), 4);
    for (std::size_t r = 0; r < kept.size(); ++r) {
      const auto k = static_cast<std::size_t>(kept[r]);
      const auto row = static_cast<Eigen::Index>(r);
      lights.row(row) = obs.light_dirs[k].transpose();
      rhs(row, 0) = luma[k];
      for (int c = 0; c < 3; ++c) rhs(row, c + 1) = obs.images[k][i][c];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(lights);
    if (qr.rank() < 3) {
      throw DataError("photometric stereo: kept light directions are rank deficient at pixel " +
                      std::to_string(i));
    }
    const Eigen::MatrixXd g = qr.solve(rhs);
    const Vec3 g_luma = g.col(0);
    const double norm = g_luma.norm();
    if (norm < kPsDegenerateNorm) {
      out.degenerate[i] = 1;
      continue;
    }
    Vec3 n = g_luma / norm;
    if (n.z() < 0.0) n = -n;
    out.normal[i] = n;
    for (int c = 0; c < 3; ++c) out.albedo[i][c] = Vec3(g.col(c + 1)).norm();
  }
  return out;
}

}  // namespace flashmat
