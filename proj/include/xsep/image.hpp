// Copyright 2026 The xsep Authors
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

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "xsep/numerics.hpp"

namespace xsep {

/// Grayscale image of real intensities, row-major.
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, double fill = 0.0)
      : height_(height), width_(width), px_(height * width, fill) {}

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return px_.size(); }
  bool empty() const { return px_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return px_[r * width_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return px_[r * width_ + c]; }

  std::span<double> pixels() { return px_; }
  std::span<const double> pixels() const { return px_; }

  bool same_shape(const Image& o) const { return height_ == o.height_ && width_ == o.width_; }

  Image& operator+=(const Image& o) {
    require(same_shape(o), "Image: shape mismatch in +=");
    for (std::size_t i = 0; i < px_.size(); ++i) px_[i] += o.px_[i];
    return *this;
  }
  Image& operator-=(const Image& o) {
    require(same_shape(o), "Image: shape mismatch in -=");
    for (std::size_t i = 0; i < px_.size(); ++i) px_[i] -= o.px_[i];
    return *this;
  }
  Image& operator*=(double s) {
    for (double& v : px_) v *= s;
    return *this;
  }

  friend Image operator+(Image a, const Image& b) { return a += b; }
  friend Image operator-(Image a, const Image& b) { return a -= b; }
  friend Image operator*(Image a, double s) { return a *= s; }
  friend Image operator*(double s, Image a) { return a *= s; }

  bool operator==(const Image&) const = default;

  double max_abs_diff(const Image& o) const {
    require(same_shape(o), "Image: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < px_.size(); ++i) m = std::max(m, std::abs(px_[i] - o.px_[i]));
    return m;
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> px_;
};

inline std::string shape_string(const Image& img) {
  return std::to_string(img.height()) + "x" + std::to_string(img.width());
}

}  // namespace xsep
