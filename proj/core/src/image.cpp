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

#include "lon/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lon/errors.hpp"

namespace lon {

Image::Image(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw DimensionError("image dimensions must be positive, got " + std::to_string(width) +
                         "x" + std::to_string(height));
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0) {
    throw DimensionError("image dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw DimensionError("image data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
}

bool Image::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Kernel::Kernel(int side, std::vector<double> taps) : side_(side), taps_(std::move(taps)) {
  if (side <= 0 || side % 2 == 0) {
    throw ArgumentError("kernel side must be odd and positive, got " + std::to_string(side));
  }
  if (taps_.size() != static_cast<std::size_t>(side) * side) {
    throw DimensionError("kernel tap count does not match side " + std::to_string(side));
  }
}

Kernel Kernel::separable(std::vector<double> along_x, std::vector<double> along_y) {
  if (along_x.size() != along_y.size()) {
    throw DimensionError("separable factors must have equal length");
  }
  const int side = static_cast<int>(along_x.size());
  std::vector<double> taps(along_x.size() * along_y.size());
  for (int v = 0; v < side; ++v) {
    for (int u = 0; u < side; ++u) taps[v * side + u] = along_x[u] * along_y[v];
  }
  Kernel k(side, std::move(taps));
  k.factors_.emplace(std::move(along_x), std::move(along_y));
  return k;
}

Kernel Kernel::identity(int side) {
  std::vector<double> f(static_cast<std::size_t>(side), 0.0);
  f[side / 2] = 1.0;
  return separable(f, f);
}

double Kernel::sum() const { return std::accumulate(taps_.begin(), taps_.end(), 0.0); }

Kernel Kernel::transposed() const {
  if (factors_) return separable(factors_->second, factors_->first);
  std::vector<double> t(taps_.size());
  for (int v = 0; v < side_; ++v) {
    for (int u = 0; u < side_; ++u) t[u * side_ + v] = taps_[v * side_ + u];
  }
  return Kernel(side_, std::move(t));
}

namespace {

int resolve_index(int i, int n, BoundaryMode mode) {
  if (i >= 0 && i < n) return i;
  if (mode == BoundaryMode::ZeroPad) return -1;
  // Symmetric reflection with the edge sample repeated: (c b a | a b c | c b a).
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

// table[(d + r) * n + i] = resolved index of (i - d).
std::vector<int> offset_table(int n, int r, BoundaryMode mode) {
  std::vector<int> table(static_cast<std::size_t>(2 * r + 1) * n);
  for (int d = -r; d <= r; ++d) {
    for (int i = 0; i < n; ++i) table[(d + r) * n + i] = resolve_index(i - d, n, mode);
  }
  return table;
}

void check_fits(const Image& img, const Kernel& k) {
  if (k.side() > std::min(img.width(), img.height())) {
    throw DimensionError("kernel side " + std::to_string(k.side()) + " exceeds image " +
                         std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
}

Image convolve_1d(const Image& img, std::span<const double> taps, Axis axis, BoundaryMode mode) {
  const int w = img.width(), h = img.height();
  const int r = static_cast<int>(taps.size()) / 2;
  const int n = axis == Axis::X ? w : h;
  const auto table = offset_table(n, r, mode);
  Image out(w, h);
  for (int d = -r; d <= r; ++d) {
    const double t = taps[d + r];
    if (t == 0.0) continue;
    const int* idx = &table[(d + r) * n];
    for (int y = 0; y < h; ++y) {
      double* o = &out.at(0, y);
      if (axis == Axis::X) {
        const double* row = &img.at(0, y);
        for (int x = 0; x < w; ++x) {
          if (idx[x] >= 0) o[x] += t * row[idx[x]];
        }
      } else {
        if (idx[y] < 0) continue;
        const double* row = &img.at(0, idx[y]);
        for (int x = 0; x < w; ++x) o[x] += t * row[x];
      }
    }
  }
  return out;
}

Image convolve_1d_adjoint(const Image& grad, std::span<const double> taps, Axis axis,
                          BoundaryMode mode) {
  const int w = grad.width(), h = grad.height();
  const int r = static_cast<int>(taps.size()) / 2;
  const int n = axis == Axis::X ? w : h;
  const auto table = offset_table(n, r, mode);
  Image out(w, h);
  for (int d = -r; d <= r; ++d) {
    const double t = taps[d + r];
    if (t == 0.0) continue;
    const int* idx = &table[(d + r) * n];
    for (int y = 0; y < h; ++y) {
      const double* g = &grad.at(0, y);
      if (axis == Axis::X) {
        double* row = &out.at(0, y);
        for (int x = 0; x < w; ++x) {
          if (idx[x] >= 0) row[idx[x]] += t * g[x];
        }
      } else {
        if (idx[y] < 0) continue;
        double* row = &out.at(0, idx[y]);
        for (int x = 0; x < w; ++x) row[x] += t * g[x];
      }
    }
  }
  return out;
}

}  // namespace

Image convolve_direct(const Image& img, const Kernel& k, BoundaryMode mode) {
  check_fits(img, k);
  const int w = img.width(), h = img.height(), r = k.radius();
  const auto xt = offset_table(w, r, mode);
  const auto yt = offset_table(h, r, mode);
  Image out(w, h);
  for (int v = -r; v <= r; ++v) {
    const int* yi = &yt[(v + r) * h];
    for (int u = -r; u <= r; ++u) {
      const double t = k.at(u, v);
      if (t == 0.0) continue;
      const int* xi = &xt[(u + r) * w];
      for (int y = 0; y < h; ++y) {
        if (yi[y] < 0) continue;
        const double* row = &img.at(0, yi[y]);
        double* o = &out.at(0, y);
        for (int x = 0; x < w; ++x) {
          if (xi[x] >= 0) o[x] += t * row[xi[x]];
        }
      }
    }
  }
  return out;
}

Image convolve(const Image& img, const Kernel& k, BoundaryMode mode) {
  if (!k.is_separable()) return convolve_direct(img, k, mode);
  check_fits(img, k);
  return convolve_1d(convolve_1d(img, k.factor_x(), Axis::X, mode), k.factor_y(), Axis::Y, mode);
}

Image convolve_adjoint(const Image& grad, const Kernel& k, BoundaryMode mode) {
  check_fits(grad, k);
  if (k.is_separable()) {
    return convolve_1d_adjoint(convolve_1d_adjoint(grad, k.factor_y(), Axis::Y, mode),
                               k.factor_x(), Axis::X, mode);
  }
  const int w = grad.width(), h = grad.height(), r = k.radius();
  const auto xt = offset_table(w, r, mode);
  const auto yt = offset_table(h, r, mode);
  Image out(w, h);
  for (int v = -r; v <= r; ++v) {
    const int* yi = &yt[(v + r) * h];
    for (int u = -r; u <= r; ++u) {
      const double t = k.at(u, v);
      if (t == 0.0) continue;
      const int* xi = &xt[(u + r) * w];
      for (int y = 0; y < h; ++y) {
        if (yi[y] < 0) continue;
        double* row = &out.at(0, yi[y]);
        const double* g = &grad.at(0, y);
        for (int x = 0; x < w; ++x) {
          if (xi[x] >= 0) row[xi[x]] += t * g[x];
        }
      }
    }
  }
  return out;
}

std::vector<double> convolve_kernel_gradient(const Image& grad, const Image& img, int side,
                                             BoundaryMode mode) {
  if (!grad.same_shape(img)) throw DimensionError("gradient and image shapes differ");
  if (side > std::min(img.width(), img.height())) {
    throw DimensionError("kernel side exceeds image");
  }
  const int w = img.width(), h = img.height(), r = side / 2;
  const auto xt = offset_table(w, r, mode);
  const auto yt = offset_table(h, r, mode);
  std::vector<double> out(static_cast<std::size_t>(side) * side, 0.0);
  for (int v = -r; v <= r; ++v) {
    const int* yi = &yt[(v + r) * h];
    for (int u = -r; u <= r; ++u) {
      const int* xi = &xt[(u + r) * w];
      double acc = 0.0;
      for (int y = 0; y < h; ++y) {
        if (yi[y] < 0) continue;
        const double* row = &img.at(0, yi[y]);
        const double* g = &grad.at(0, y);
        for (int x = 0; x < w; ++x) {
          if (xi[x] >= 0) acc += g[x] * row[xi[x]];
        }
      }
      out[(v + r) * side + (u + r)] = acc;
    }
  }
  return out;
}

int default_radius(double sigma) { return static_cast<int>(std::ceil(3.0 * sigma)); }

std::vector<double> gaussian_taps(double sigma, int radius) {
  if (!(sigma > 0.0)) throw ArgumentError("gaussian sigma must be positive");
  if (radius < 0) throw ArgumentError("gaussian radius must be non-negative");
  std::vector<double> g(static_cast<std::size_t>(2 * radius + 1));
  for (int i = -radius; i <= radius; ++i) {
    g[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
  }
  const double s = std::accumulate(g.begin(), g.end(), 0.0);
  for (double& v : g) v /= s;
  return g;
}

Kernel gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0.0)) throw ArgumentError("gaussian sigma must be positive");
  if (radius < 0) radius = default_radius(sigma);
  auto g = gaussian_taps(sigma, radius);
  return Kernel::separable(g, g);
}

Kernel gaussian_derivative_kernel(double sigma, Axis axis, int radius) {
  if (!(sigma > 0.0)) throw ArgumentError("gaussian derivative sigma must be positive");
  if (radius < 0) radius = default_radius(sigma);
  auto g = gaussian_taps(sigma, radius);
  std::vector<double> d(g.size());
  double moment = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    d[i + radius] = -i / (sigma * sigma) * g[i + radius];
    moment += i * d[i + radius];
  }
  // Rescale so that sum_u u * d(u) == -1 exactly.
  for (double& v : d) v /= -moment;
  return axis == Axis::X ? Kernel::separable(d, g) : Kernel::separable(g, d);
}

double semigroup_scale(double gamma, double sigma) {
  if (gamma < 0.0 || sigma < 0.0) throw ArgumentError("scales must be non-negative");
  return std::hypot(gamma, sigma);
}

}  // namespace lon
