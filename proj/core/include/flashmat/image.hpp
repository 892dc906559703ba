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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace flashmat {

using Vec3 = Eigen::Vector3d;

// Raised for malformed input data (bad files, inconsistent dimensions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

// Raised when an operation's preconditions on scalar arguments are violated.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Extent {
  int height = 0;
  int width = 0;

  [[nodiscard]] std::size_t pixels() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  friend bool operator==(const Extent&, const Extent&) = default;
};

inline std::string to_string(Extent e) {
  return std::to_string(e.height) + "x" + std::to_string(e.width);
}

// Row-major H x W grid. Row 0 is the top of the image.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int height, int width, const T& fill = T{})
      : extent_{height, width} {
    if (height < 0 || width < 0) {
      throw DimensionError("negative image dimensions");
    }
    data_.assign(extent_.pixels(), fill);
  }
  explicit Image(Extent extent, const T& fill = T{})
      : Image(extent.height, extent.width, fill) {}

  [[nodiscard]] int height() const { return extent_.height; }
  [[nodiscard]] int width() const { return extent_.width; }
  [[nodiscard]] Extent extent() const { return extent_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  T& operator()(int row, int col) { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const { return data_[index(row, col)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  [[nodiscard]] std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(extent_.width) +
           static_cast<std::size_t>(col);
  }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Image& a, const Image& b) {
    return a.extent_ == b.extent_ && a.data_ == b.data_;
  }

 private:
  Extent extent_{};
  std::vector<T> data_;
};

using ScalarMap = Image<double>;
using ColorMap = Image<Vec3>;
using NormalMap = Image<Vec3>;
using RadianceImage = Image<Vec3>;

template <typename A, typename B>
void require_same_extent(const Image<A>& a, const Image<B>& b, const char* what) {
  if (a.extent() != b.extent()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         to_string(a.extent()) + " vs " + to_string(b.extent()) + ")");
  }
}

}  // namespace flashmat
