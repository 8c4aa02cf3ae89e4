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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lon/image.hpp"
#include "lon/layers.hpp"
#include "lon/train.hpp"

namespace lon {

// ---- local histograms ------------------------------------------------------

// Soft local histogram h(x, b) = (W * f_sigma(b - (I * K)))(x), one plane per
// bias.  W is optional (delta when absent).
struct HistogramStack {
  int width = 0;
  int height = 0;
  std::vector<double> bins;
  double tonal_sigma = 0.0;
  std::vector<Image> planes;  // one per bin
};

HistogramStack local_histogram(const Image& img, const Kernel& k, const std::optional<Kernel>& w,
                               std::span<const double> bins, double tonal_sigma,
                               BoundaryMode mode = BoundaryMode::Reflect);

struct HistogramProbe {
  int x = 0;
  int y = 0;
  std::vector<double> bins;
  std::vector<double> values;
  double spatial_scale = 0.0;  // sigma of W, 0 for delta
  double tonal_sigma = 0.0;
};

HistogramProbe probe_at(const HistogramStack& stack, int x, int y, double spatial_scale = 0.0);

// Regular grid of n bin centres covering [lo, hi].
std::vector<double> bin_centres(double lo, double hi, int n);

// sum_i xi_i * h(x, b_i), with columns divided by their bin sum when
// `normalize` is set (then h is a probability mass per pixel).
Image lus_expectation(const HistogramStack& stack, std::span<const double> xi,
                      bool normalize = true);

// ---- closed-form estimators ------------------------------------------------

struct Grad2Options {
  double derivative_sigma = 3.0;
  double gamma = 1.0;  // integration scale of W; 0 = delta
  int bins = 8;
  // Half-width of the symmetric bias grid.  By default it is derived from
  // the largest derivative response r as r / (1 - 2 / bins), so that two
  // tonal widths separate the extreme response from the grid edge.
  std::optional<double> range;
  BoundaryMode boundary = BoundaryMode::Reflect;
};

struct Grad2Estimate {
  Image value;
  std::vector<double> bins;
  double tonal_sigma = 0.0;
  double outside_fraction = 0.0;  // share of responses beyond the outer bin edges
  bool grid_warning = false;      // outside_fraction >= 1%
};

// Sum over both axes of sum_i b_i^2 h_hat_k(x, b_i) with normalized
// histograms of Gaussian-derivative responses.  The per-axis value the
// estimator returns for a zero response (the tonal blur of the grid) is
// subtracted so that flat regions read 0.
Grad2Estimate grad2_estimator(const Image& img, const Grad2Options& options = {});

// Direct reference: (I*Gx)^2 + (I*Gy)^2 at scale sqrt(gamma^2 + sigma_d^2).
Image grad2_direct(const Image& img, double derivative_sigma, double gamma,
                   BoundaryMode mode = BoundaryMode::Reflect);

struct ShapeEstimatorOptions {
  double kernel_sigma = 2.0;  // Gaussian K
  double tonal_sigma = 0.1;   // small enough that background pixels contribute ~e^-12.5
  BoundaryMode boundary = BoundaryMode::Reflect;
};

// sum_x f_sigma(0.5 - (I*K)(x)).  Proportional to the boundary length.
double circumference_raw(const Image& img, const ShapeEstimatorOptions& options = {});
// sum_x Phi(((I*K)(x) - 0.5) / sigma).  Interior pixels contribute ~1.
double area_raw(const Image& img, const ShapeEstimatorOptions& options = {});

// Analytic-disk calibration: constant = analytic / raw on a disk of radius
// `reference_radius` centred in a size x size image.
struct Calibration {
  double circumference = 1.0;
  double area = 1.0;
  double reference_radius = 0.0;
  ShapeEstimatorOptions options;
};
Calibration calibrate_on_disk(const ShapeEstimatorOptions& options = {}, double reference_radius = 32.0,
                              int size = 128);

double circumference_estimator(const Image& img, const Calibration& calibration);
double area_estimator(const Image& img, const Calibration& calibration);

// Binary disk, pixel (x, y) inside when (x-cx)^2 + (y-cy)^2 <= r^2.
Image make_disk(int size, double cx, double cy, double r);

// ---- saliency --------------------------------------------------------------

struct SaliencyMap {
  Image map;  // |dE/dI|
  std::string sample_id;
  std::string model_id;
  std::optional<int> predicted_class;
  std::optional<int> true_class;
  double loss = 0.0;
};

SaliencyMap saliency(const Network& net, const Example& example, LossKind kind,
                     std::string sample_id = {}, std::string model_id = {});

// Pixels whose distance to a pixel of the other phase is at most
// `band + 0.5`, i.e. within `band` px of the 0.5 contour between them.
std::vector<bool> boundary_band(const Image& mask, double band = 2.0);

// Share of saliency mass inside the boundary band (0 for an all-zero map).
double boundary_mass_ratio(const Image& saliency_map, const Image& mask, double band = 2.0);

}  // namespace lon
