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

#include "flashmat/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <png.h>

#include "flashmat/scene.hpp"

namespace flashmat {

namespace {

constexpr std::size_t kMaxPfmElements = std::size_t{1} << 31;

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

std::string read_token(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw FormatError("PFM: truncated header");
  return token;
}

}  // namespace

void write_pfm(std::ostream& out, const PfmImage& image) {
  if (image.channels != 1 && image.channels != 3) throw FormatError("PFM: 1 or 3 channels only");
  const std::size_t row_len = static_cast<std::size_t>(image.extent.width) * image.channels;
  if (image.data.size() != row_len * image.extent.height) {
    throw DimensionError("PFM: data size does not match extent");
  }
  out << (image.channels == 3 ? "PF" : "Pf") << '\n'
      << image.extent.width << ' ' << image.extent.height << '\n'
      << "-1.0\n";
  std::vector<char> row(row_len * 4);
  for (int y = image.extent.height - 1; y >= 0; --y) {
    const float* src = image.data.data() + static_cast<std::size_t>(y) * row_len;
    for (std::size_t k = 0; k < row_len; ++k) {
      const std::uint32_t bits = to_little_endian(std::bit_cast<std::uint32_t>(src[k]));
      std::memcpy(row.data() + 4 * k, &bits, 4);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw DataError("PFM: write failed");
}

PfmImage read_pfm(std::istream& in) {
  PfmImage image;
  const std::string magic = read_token(in);
  if (magic == "PF") {
    image.channels = 3;
  } else if (magic == "Pf") {
    image.channels = 1;
  } else {
    throw FormatError("PFM: bad magic '" + magic + "'");
  }
  long long width = 0;
  long long height = 0;
  double scale = 0.0;
  try {
    width = std::stoll(read_token(in));
    height = std::stoll(read_token(in));
    scale = std::stod(read_token(in));
  } catch (const std::logic_error&) {
    throw FormatError("PFM: malformed header fields");
  }
  if (width <= 0 || height <= 0) throw FormatError("PFM: non-positive dimensions");
  if (static_cast<unsigned long long>(width) > kMaxPfmElements ||
      static_cast<unsigned long long>(height) > kMaxPfmElements ||
      static_cast<unsigned long long>(width) * static_cast<unsigned long long>(height) *
              image.channels > kMaxPfmElements) {
    throw FormatError("PFM: dimensions overflow");
  }
  if (!(scale < 0.0)) {
    throw FormatError("PFM: only little-endian files (negative scale) are supported");
  }
  // Exactly one whitespace byte separates the header from the payload.
  if (!std::isspace(in.get())) throw FormatError("PFM: missing header terminator");

  image.extent = {static_cast<int>(height), static_cast<int>(width)};
  const std::size_t row_len = static_cast<std::size_t>(width) * image.channels;
  image.data.resize(row_len * static_cast<std::size_t>(height));
  std::vector<char> row(row_len * 4);
  for (long long y = height - 1; y >= 0; --y) {
    if (!in.read(row.data(), static_cast<std::streamsize>(row.size()))) {
      throw FormatError("PFM: truncated pixel data");
    }
    float* dst = image.data.data() + static_cast<std::size_t>(y) * row_len;
    for (std::size_t k = 0; k < row_len; ++k) {
      std::uint32_t bits;
      std::memcpy(&bits, row.data() + 4 * k, 4);
      dst[k] = std::bit_cast<float>(to_little_endian(bits));
    }
  }
  return image;
}

PfmImage to_pfm(const Image<Vec3>& image) {
  PfmImage out{image.extent(), 3, {}};
  out.data.reserve(image.size() * 3);
  for (const Vec3& v : image) {
    for (int c = 0; c < 3; ++c) out.data.push_back(static_cast<float>(v[c]));
  }
  return out;
}

PfmImage to_pfm(const ScalarMap& image) {
  PfmImage out{image.extent(), 1, {}};
  out.data.reserve(image.size());
  for (double v : image) out.data.push_back(static_cast<float>(v));
  return out;
}

namespace {

void write_pfm_file(const std::filesystem::path& path, const PfmImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_pfm(out, image);
}

PfmImage read_pfm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return read_pfm(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const Image<Vec3>& image) {
  write_pfm_file(path, to_pfm(image));
}

void write_pfm(const std::filesystem::path& path, const ScalarMap& image) {
  write_pfm_file(path, to_pfm(image));
}

Image<Vec3> read_pfm_color(const std::filesystem::path& path) {
  const PfmImage pfm = read_pfm_file(path);
  Image<Vec3> out(pfm.extent);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (pfm.channels == 3) {
      out[i] = Vec3(pfm.data[3 * i], pfm.data[3 * i + 1], pfm.data[3 * i + 2]);
    } else {
      out[i] = Vec3::Constant(pfm.data[i]);
    }
  }
  return out;
}

ScalarMap read_pfm_gray(const std::filesystem::path& path) {
  const PfmImage pfm = read_pfm_file(path);
  if (pfm.channels != 1) throw FormatError(path.string() + ": expected a gray (Pf) file");
  ScalarMap out(pfm.extent);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pfm.data[i];
  return out;
}

void write_png(const std::filesystem::path& path, const Rgb8Image& image) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer;
  buffer.reserve(image.size() * 3);
  for (const Rgb8& p : image) buffer.insert(buffer.end(), p.begin(), p.end());
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw DataError("cannot write PNG '" + path.string() + "': " + message);
  }
}

Rgb8Image read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    const std::string message = png.message;
    png_image_free(&png);
    throw FormatError("cannot read PNG '" + path.string() + "': " + message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw FormatError("cannot decode PNG '" + path.string() + "': " + message);
  }
  Rgb8Image out(static_cast<int>(png.height), static_cast<int>(png.width));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
  }
  return out;
}

namespace {

std::uint8_t quantize(double unit) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * unit), 0L, 255L));
}

}  // namespace

Rgb8 encode_normal(const Vec3& n) {
  return {quantize((n.x() + 1.0) / 2.0), quantize((n.y() + 1.0) / 2.0),
          quantize((n.z() + 1.0) / 2.0)};
}

Vec3 decode_normal(const Rgb8& v) {
  constexpr double kInset = 1e-7;
  Vec3 center;
  Vec3 lo;
  Vec3 hi;
  for (int c = 0; c < 3; ++c) {
    center[c] = v[c] / 127.5 - 1.0;
    lo[c] = std::max((v[c] - 0.5 + kInset) / 127.5 - 1.0, -1.0);
    hi[c] = std::min((v[c] + 0.5 - kInset) / 127.5 - 1.0, 1.0);
  }
  const double len = center.norm();
  if (len == 0.0) return Vec3::UnitZ();
  // Walk from the cell center toward the nearest (or farthest) corner until
  // the unit sphere is crossed; the segment stays inside the quantization cell.
  Vec3 nearest;
  Vec3 farthest;
  for (int c = 0; c < 3; ++c) {
    nearest[c] = std::clamp(0.0, lo[c], hi[c]);
    farthest[c] = std::abs(lo[c]) > std::abs(hi[c]) ? lo[c] : hi[c];
  }
  const Vec3 p = len > 1.0 ? nearest : center;
  const Vec3 q = len > 1.0 ? center : farthest;
  const Vec3 d = q - p;
  const double a = d.squaredNorm();
  const double b = 2.0 * p.dot(d);
  const double c = p.squaredNorm() - 1.0;
  const double disc = b * b - 4.0 * a * c;
  if (a == 0.0 || disc < 0.0 || c > 0.0 || q.squaredNorm() < 1.0) return center / len;
  const double t = (-b + std::sqrt(disc)) / (2.0 * a);
  return (p + t * d).normalized();
}

Rgb8Image encode_normal_png(const NormalMap& normal) {
  Rgb8Image out(normal.extent());
  for (std::size_t i = 0; i < normal.size(); ++i) out[i] = encode_normal(normal[i]);
  return out;
}

NormalMap decode_normal_png(const Rgb8Image& encoded) {
  NormalMap out(encoded.extent());
  for (std::size_t i = 0; i < encoded.size(); ++i) out[i] = decode_normal(encoded[i]);
  return out;
}

Rgb8Image preview_image(const Image<Vec3>& linear) {
  Rgb8Image out(linear.extent());
  for (std::size_t i = 0; i < linear.size(); ++i) {
    const Vec3 t = tonemap(linear[i]);
    out[i] = {quantize(std::min(t.x(), 1.0)), quantize(std::min(t.y(), 1.0)),
              quantize(std::min(t.z(), 1.0))};
  }
  return out;
}

Rgb8Image preview_gray(const ScalarMap& map) {
  Rgb8Image out(map.extent());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const std::uint8_t g = quantize(std::clamp(map[i], 0.0, 1.0));
    out[i] = {g, g, g};
  }
  return out;
}

Rgb8Image encode_albedo_png(const ColorMap& albedo) {
  Rgb8Image out(albedo.extent());
  for (std::size_t i = 0; i < albedo.size(); ++i) {
    Rgb8 p;
    for (int c = 0; c < 3; ++c) {
      p[c] = quantize(std::pow(std::clamp(albedo[i][c], 0.0, 1.0), 1.0 / kToneGamma));
    }
    out[i] = p;
  }
  return out;
}

ColorMap decode_albedo_png(const Rgb8Image& encoded) {
  ColorMap out(encoded.extent());
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    for (int c = 0; c < 3; ++c) out[i][c] = std::pow(encoded[i][c] / 255.0, kToneGamma);
  }
  return out;
}

ScalarMap decode_gray_png(const Rgb8Image& encoded) {
  ScalarMap out(encoded.extent());
  for (std::size_t i = 0; i < encoded.size(); ++i) out[i] = encoded[i][0] / 255.0;
  return out;
}

}  // namespace flashmat
