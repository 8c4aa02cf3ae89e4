// Copyright 2026 The LON Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace lon {

// Dense single-channel raster, row-major, 64-bit values.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const double& at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool all_finite() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

enum class BoundaryMode { ZeroPad, Reflect };

enum class Axis { X, Y };

// Odd-sided square filter with its origin at the center tap.  Kernels built
// from 1-D factors remember them so convolution can run in two passes.
class Kernel {
 public:
  Kernel() = default;
  Kernel(int side, std::vector<double> taps);
  static Kernel separable(std::vector<double> along_x, std::vector<double> along_y);
  static Kernel identity(int side = 1);

  int side() const { return side_; }
  int radius() const { return side_ / 2; }
  std::size_t size() const { return taps_.size(); }

  // Offsets (u, v) range over [-radius, radius].
  double at(int u, int v) const {
    return taps_[static_cast<std::size_t>(v + radius()) * side_ + (u + radius())];
  }
  std::span<const double> taps() const { return taps_; }
  // Mutable access drops the separable factorization.
  std::span<double> mutable_taps() {
    factors_.reset();
    return taps_;
  }

  bool is_separable() const { return factors_.has_value(); }
  const std::vector<double>& factor_x() const { return factors_->first; }
  const std::vector<double>& factor_y() const { return factors_->second; }

  double sum() const;
  Kernel transposed() const;

  friend bool operator==(const Kernel& a, const Kernel& b) {
    return a.side_ == b.side_ && a.taps_ == b.taps_;
  }

 private:
  int side_ = 0;
  std::vector<double> taps_;
  std::optional<std::pair<std::vector<double>, std::vector<double>>> factors_;
};

// "Same"-size discrete convolution (kernel flipped):
//   out(x, y) = sum_{u,v} k(u, v) * img(x - u, y - v).
// Throws DimensionError if the kernel side exceeds min(width, height).
Image convolve(const Image& img, const Kernel& k, BoundaryMode mode);

// Same as convolve() but ignores any separable factorization.
Image convolve_direct(const Image& img, const Kernel& k, BoundaryMode mode);

// Adjoint of convolve(., k, mode) applied to `grad` (the output-side
// gradient).  Returns the input-side gradient.
Image convolve_adjoint(const Image& grad, const Kernel& k, BoundaryMode mode);

// d/dk of <grad, convolve(img, k, mode)> for a kernel of the given side.
std::vector<double> convolve_kernel_gradient(const Image& grad, const Image& img, int side,
                                             BoundaryMode mode);

// Normalized Gaussian with taps proportional to exp(-(x^2+y^2)/(2 sigma^2)).
// radius < 0 selects ceil(3 sigma).
Kernel gaussian_kernel(double sigma, int radius = -1);

// First derivative of a 2-D Gaussian along `axis`.  Taps sum to zero and the
// first moment along the axis is -1, so a unit ramp convolves to 1.
Kernel gaussian_derivative_kernel(double sigma, Axis axis, int radius = -1);

// Normalized 1-D Gaussian taps of length 2*radius+1.
std::vector<double> gaussian_taps(double sigma, int radius);

// Scale of G_gamma * G_sigma: sqrt(gamma^2 + sigma^2).
double semigroup_scale(double gamma, double sigma);

int default_radius(double sigma);

}  // namespace lon
