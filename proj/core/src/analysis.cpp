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

#include "lon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lon/activation.hpp"
#include "lon/errors.hpp"

namespace lon {

namespace {

double bell(double v, double sigma) { return std::exp(-v * v / (2.0 * sigma * sigma)); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

HistogramStack local_histogram(const Image& img, const Kernel& k, const std::optional<Kernel>& w,
                               std::span<const double> bins, double tonal_sigma,
                               BoundaryMode mode) {
  if (!(tonal_sigma > 0.0)) throw ArgumentError("tonal sigma must be positive");
  if (bins.empty()) throw ArgumentError("bias grid must not be empty");
  const Image response = convolve(img, k, mode);
  HistogramStack stack;
  stack.width = img.width();
  stack.height = img.height();
  stack.bins.assign(bins.begin(), bins.end());
  stack.tonal_sigma = tonal_sigma;
  stack.planes.reserve(bins.size());
  for (double b : bins) {
    Image plane(img.width(), img.height());
    for (std::size_t p = 0; p < plane.size(); ++p) plane[p] = bell(b - response[p], tonal_sigma);
    stack.planes.push_back(w ? convolve(plane, *w, mode) : std::move(plane));
  }
  return stack;
}

HistogramProbe probe_at(const HistogramStack& stack, int x, int y, double spatial_scale) {
  if (x < 0 || y < 0 || x >= stack.width || y >= stack.height) {
    throw DimensionError("probe position outside the image");
  }
  HistogramProbe p;
  p.x = x;
  p.y = y;
  p.bins = stack.bins;
  p.spatial_scale = spatial_scale;
  p.tonal_sigma = stack.tonal_sigma;
  for (const auto& plane : stack.planes) p.values.push_back(plane.at(x, y));
  return p;
}

std::vector<double> bin_centres(double lo, double hi, int n) {
  if (n < 1 || !(hi > lo)) throw ArgumentError("bin_centres needs n >= 1 and hi > lo");
  const double db = (hi - lo) / n;
  std::vector<double> b(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) b[i] = lo + (i + 0.5) * db;
  return b;
}

Image lus_expectation(const HistogramStack& stack, std::span<const double> xi, bool normalize) {
  if (xi.size() != stack.planes.size()) {
    throw DimensionError("xi has " + std::to_string(xi.size()) + " samples for " +
                         std::to_string(stack.planes.size()) + " bins");
  }
  Image out(stack.width, stack.height);
  for (std::size_t p = 0; p < out.size(); ++p) {
    double num = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
      num += xi[i] * stack.planes[i][p];
      mass += stack.planes[i][p];
    }
    // A column with no mass at all (far outside the grid) reads as 0.
    out[p] = normalize ? (mass > 0.0 ? num / mass : 0.0) : num;
  }
  return out;
}

Grad2Estimate grad2_estimator(const Image& img, const Grad2Options& options) {
  if (options.bins < 2) throw ArgumentError("grad2 estimator needs at least 2 bins");
  if (options.gamma < 0.0) throw ArgumentError("gamma must be non-negative");
  const Image responses[2] = {
      convolve(img, gaussian_derivative_kernel(options.derivative_sigma, Axis::X), options.boundary),
      convolve(img, gaussian_derivative_kernel(options.derivative_sigma, Axis::Y), options.boundary)};

  double range = 0.0;
  if (options.range) {
    range = *options.range;
    if (!(range > 0.0)) throw ArgumentError("grad2 bias range must be positive");
  } else {
    double peak = 0.0;
    for (const auto& r : responses) {
      for (double v : r.values()) peak = std::max(peak, std::abs(v));
    }
    range = peak / (1.0 - 2.0 / options.bins);
  }

  Grad2Estimate est;
  est.value = Image(img.width(), img.height());
  if (!(range > 0.0)) return est;  // flat input: every response is 0

  est.bins = bin_centres(-range, range, options.bins);
  const double db = 2.0 * range / options.bins;
  est.tonal_sigma = db / 2.0;
  std::vector<double> xi(est.bins.size());
  double zero_num = 0.0, zero_mass = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    xi[i] = est.bins[i] * est.bins[i];
    const double w0 = bell(est.bins[i], est.tonal_sigma);
    zero_num += xi[i] * w0;
    zero_mass += w0;
  }
  const double offset = zero_num / zero_mass;

  std::optional<Kernel> w;
  if (options.gamma > 0.0) w = gaussian_kernel(options.gamma);
  const Kernel identity = Kernel::identity(1);
  std::size_t outside = 0;
  for (const auto& r : responses) {
    for (double v : r.values()) outside += std::abs(v) > range ? 1 : 0;
    const auto stack = local_histogram(r, identity, w, est.bins, est.tonal_sigma, options.boundary);
    const Image e = lus_expectation(stack, xi, true);
    for (std::size_t p = 0; p < e.size(); ++p) est.value[p] += e[p] - offset;
  }
  est.outside_fraction = static_cast<double>(outside) / (2.0 * static_cast<double>(img.size()));
  est.grid_warning = est.outside_fraction >= 0.01;
  return est;
}

Image grad2_direct(const Image& img, double derivative_sigma, double gamma, BoundaryMode mode) {
  const double s = semigroup_scale(gamma, derivative_sigma);
  const Image ix = convolve(img, gaussian_derivative_kernel(s, Axis::X), mode);
  const Image iy = convolve(img, gaussian_derivative_kernel(s, Axis::Y), mode);
  Image out(img.width(), img.height());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = ix[p] * ix[p] + iy[p] * iy[p];
  return out;
}

namespace {

Image smoothed(const Image& img, const ShapeEstimatorOptions& o) {
  if (!(o.kernel_sigma > 0.0) || !(o.tonal_sigma > 0.0)) {
    throw ArgumentError("estimator scales must be positive");
  }
  return convolve(img, gaussian_kernel(o.kernel_sigma), o.boundary);
}

}  // namespace

double circumference_raw(const Image& img, const ShapeEstimatorOptions& options) {
  const Image s = smoothed(img, options);
  double total = 0.0;
  for (double v : s.values()) total += bell(0.5 - v, options.tonal_sigma);
  return total;
}

double area_raw(const Image& img, const ShapeEstimatorOptions& options) {
  const Image s = smoothed(img, options);
  double total = 0.0;
  for (double v : s.values()) total += normal_cdf((v - 0.5) / options.tonal_sigma);
  return total;
}

Image make_disk(int size, double cx, double cy, double r) {
  Image img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) img.at(x, y) = 1.0;
    }
  }
  return img;
}

Calibration calibrate_on_disk(const ShapeEstimatorOptions& options, double reference_radius,
                              int size) {
  if (!(reference_radius > 0.0) || 2.0 * reference_radius + 4.0 * options.kernel_sigma > size) {
    throw ArgumentError("reference disk does not fit the calibration image");
  }
  const double c = 0.5 * (size - 1);
  const Image disk = make_disk(size, c, c, reference_radius);
  Calibration cal;
  cal.options = options;
  cal.reference_radius = reference_radius;
  cal.circumference = 2.0 * std::numbers::pi * reference_radius / circumference_raw(disk, options);
  cal.area = std::numbers::pi * reference_radius * reference_radius / area_raw(disk, options);
  return cal;
}

double circumference_estimator(const Image& img, const Calibration& calibration) {
  return calibration.circumference * circumference_raw(img, calibration.options);
}

double area_estimator(const Image& img, const Calibration& calibration) {
  return calibration.area * area_raw(img, calibration.options);
}

SaliencyMap saliency(const Network& net, const Example& example, LossKind kind,
                     std::string sample_id, std::string model_id) {
  const auto fwd = forward(net, example.input);
  const auto l = loss(kind, fwd.output.values, example);
  const Gradients g = backward(net, fwd.tape, l.grad, true);
  SaliencyMap s;
  s.map = g.input;
  for (double& v : s.map.values()) v = std::abs(v);
  s.sample_id = std::move(sample_id);
  s.model_id = std::move(model_id);
  s.loss = l.value;
  if (kind == LossKind::SoftmaxCrossEntropy) {
    const auto& v = fwd.output.values;
    s.predicted_class = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    s.true_class = example.label;
  }
  return s;
}

std::vector<bool> boundary_band(const Image& mask, double band) {
  const int w = mask.width(), h = mask.height();
  const double reach = band + 0.5;
  const int r = static_cast<int>(std::floor(reach));
  std::vector<bool> in_band(mask.size(), false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool fg = mask.at(x, y) > 0.5;
      bool hit = false;
      for (int dy = -r; dy <= r && !hit; ++dy) {
        for (int dx = -r; dx <= r && !hit; ++dx) {
          if (dx * dx + dy * dy > reach * reach) continue;
          const int qx = x + dx, qy = y + dy;
          // Outside the image counts as background.
          const bool q_fg = qx >= 0 && qy >= 0 && qx < w && qy < h && mask.at(qx, qy) > 0.5;
          hit = q_fg != fg;
        }
      }
      in_band[static_cast<std::size_t>(y) * w + x] = hit;
    }
  }
  return in_band;
}

double boundary_mass_ratio(const Image& saliency_map, const Image& mask, double band) {
  if (!saliency_map.same_shape(mask)) throw DimensionError("saliency map and mask differ in size");
  const auto in_band = boundary_band(mask, band);
  double total = 0.0, near = 0.0;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    total += saliency_map[p];
    if (in_band[p]) near += saliency_map[p];
  }
  return total > 0.0 ? near / total : 0.0;
}

}  // namespace lon
