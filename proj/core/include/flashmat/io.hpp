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

// Image file formats. Linear data travels as little-endian PFM; 8-bit PNG
// is used for previews and encoded normal maps.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "flashmat/image.hpp"

namespace flashmat {

// Decoded PFM payload, rows top-to-bottom.
struct PfmImage {
  Extent extent{};
  int channels = 3;  // 3 for "PF", 1 for "Pf"
  std::vector<float> data;
};

void write_pfm(std::ostream& out, const PfmImage& image);
PfmImage read_pfm(std::istream& in);

void write_pfm(const std::filesystem::path& path, const Image<Vec3>& image);
void write_pfm(const std::filesystem::path& path, const ScalarMap& image);
// Gray files are replicated into three channels.
Image<Vec3> read_pfm_color(const std::filesystem::path& path);
// Color files are rejected.
ScalarMap read_pfm_gray(const std::filesystem::path& path);

PfmImage to_pfm(const Image<Vec3>& image);
PfmImage to_pfm(const ScalarMap& image);

using Rgb8 = std::array<std::uint8_t, 3>;
using Rgb8Image = Image<Rgb8>;

void write_png(const std::filesystem::path& path, const Rgb8Image& image);
Rgb8Image read_png(const std::filesystem::path& path);

// channel = round(255 (n + 1) / 2).
Rgb8 encode_normal(const Vec3& n);
// Unit vector whose encoding reproduces `v` when one exists; otherwise the
// normalized cell center.
Vec3 decode_normal(const Rgb8& v);

Rgb8Image encode_normal_png(const NormalMap& normal);
NormalMap decode_normal_png(const Rgb8Image& encoded);

// 8-bit tonemapped preview of linear radiance.
Rgb8Image preview_image(const Image<Vec3>& linear);
// 8-bit gray preview of a map already in [0, 1].
Rgb8Image preview_gray(const ScalarMap& map);

// 8-bit albedo textures carry gamma 2.2 encoding.
Rgb8Image encode_albedo_png(const ColorMap& albedo);
ColorMap decode_albedo_png(const Rgb8Image& encoded);
ScalarMap decode_gray_png(const Rgb8Image& encoded);

}  // namespace flashmat
