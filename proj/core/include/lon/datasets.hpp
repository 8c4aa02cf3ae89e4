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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lon/image.hpp"

namespace lon {

struct ShapeSample {
  Image image;
  double area = 0.0;       // pixels^2
  double perimeter = 0.0;  // pixels
  std::optional<int> class_label;
  double noise_sigma = 0.0;
};

struct GradSample {
  Image input;   // scaled digit
  Image target;  // squared gradient magnitude of `input`
  double scale_factor = 1.0;
};

// ---- random blobs ----------------------------------------------------------

struct BlobOptions {
  int field_size = 512;
  double smoothing_sigma = 10.0;
  double quantile = 0.75;  // foreground: value > this quantile of the field
  double min_area = 300.0;
  double max_area = 8000.0;
  int crop_size = 128;
  int crop_margin = 2;  // minimum distance from the shape to the crop edge
};

// Smoothed noise field number `field_index` of the stream for `seed`,
// binarized at the configured quantile.
Image blob_field(std::uint64_t seed, int field_index, const BlobOptions& options = {});

// Smoothed noise -> threshold -> 8-connected components; components touching
// the field border or with area outside [min_area, max_area] are dropped and
// the rest are centred in crop_size x crop_size binary images.  Labels come
// from label_shapes().  Fields are consumed until `count` shapes exist.
std::vector<ShapeSample> generate_blobs(std::uint64_t seed, int count,
                                        const BlobOptions& options = {});

// 8-connected component labels (0 = background, 1..n in raster order of the
// first pixel) of the pixels with value > 0.5.
std::vector<int> label_components(const Image& mask, int* component_count = nullptr);

// ---- ellipses --------------------------------------------------------------

enum class EllipseConstraint { ConstantArea, ConstantPerimeter };

struct EllipseOptions {
  EllipseConstraint constraint = EllipseConstraint::ConstantArea;
  double value = 2000.0;         // A0 (px^2) or P0 (px)
  double min_axis_ratio = 0.25;  // b / a sampled uniformly in [min, 1]
  int size = 128;
  int margin = 4;
};

// Exact arc length 4 a E(e) of an ellipse with semi-axes a, b.
double ellipse_perimeter(double a, double b);

// Semi-axes (a >= b) of the ellipse with the given area and perimeter.
// Throws ArgumentError when perimeter < 2 sqrt(pi area) (isoperimetric bound).
std::pair<double, double> ellipse_axes(double area, double perimeter);

Image rasterize_ellipse(int size, double cx, double cy, double a, double b, double theta);

// Random-orientation ellipses meeting the constraint exactly (analytic
// area/perimeter are stored as labels).  Throws ArgumentError when no ratio in
// [min_axis_ratio, 1] fits inside size - 2 * margin.
std::vector<ShapeSample> generate_ellipses(std::uint64_t seed, int count,
                                           const EllipseOptions& options);

// ---- labels ----------------------------------------------------------------

struct ShapeLabels {
  double area = 0.0;
  double perimeter = 0.0;
};

// Area = foreground pixel count; perimeter = marching-squares length of the
// 0.5 iso-contour, with zero padding outside the image.  Throws ArgumentError
// for an empty mask.
ShapeLabels label_shapes(const Image& mask);

// Total length of the `level` iso-contour (linear interpolation on cell
// edges, zero padding outside).
double contour_length(const Image& field, double level);

enum class ClassKey { Area, Perimeter };

// Tertile label of each key by rank (ties broken by index); needs >= 3 keys.
std::vector<int> tertile_labels(std::span<const double> keys);
void assign_classes(std::vector<ShapeSample>& samples, ClassKey key);

// Adds iid N(0, sigma^2) noise; labels are unchanged.
ShapeSample add_noise(ShapeSample sample, double sigma, std::uint64_t seed);

// ---- MNIST / grad^2 --------------------------------------------------------

// IDX3 (magic 0x00000803) images scaled to [0, 1].
std::vector<Image> load_idx(const std::filesystem::path& path);
std::vector<Image> parse_idx_images(std::span<const unsigned char> bytes);
// IDX1 (magic 0x00000801) labels.
std::vector<int> load_idx_labels(const std::filesystem::path& path);
std::vector<int> parse_idx_labels(std::span<const unsigned char> bytes);
// Images must share one size; values are clamped to [0,1] and quantized.
void write_idx(const std::filesystem::path& path, std::span<const Image> images);

// Offline stand-in for MNIST: 28x28 anti-aliased random pen strokes.
std::vector<Image> synthetic_digits(std::uint64_t seed, int count);

// (I * Gx)^2 + (I * Gy)^2 with Gaussian derivative kernels at scale sigma.
Image grad2_target(const Image& img, double sigma = 1.0);

// Scales image k by u_k ~ U(0.5, 2.0) and computes its grad^2 target.
std::vector<GradSample> make_grad_samples(std::span<const Image> images, std::uint64_t seed,
                                          double target_sigma = 1.0);

// ---- dataset directories ---------------------------------------------------

// One row of manifest.csv (file,area,perimeter,class,scale,noise_sigma).
// Grad^2 targets are stored next to the input as <stem>.target.lonr.
struct DatasetRecord {
  std::string file;
  Image image;
  std::optional<Image> target;
  std::optional<double> area;
  std::optional<double> perimeter;
  std::optional<int> class_label;
  std::optional<double> scale;
  double noise_sigma = 0.0;
};

DatasetRecord to_record(const ShapeSample& s, std::string file);
DatasetRecord to_record(const GradSample& s, std::string file);

// Writes <dir>/manifest.csv plus one LONR raster per record.  The first
// manifest line is "# config_sha256=<hash>" when a hash is given.
void write_dataset_split(const std::filesystem::path& dir, std::span<const DatasetRecord> records,
                         const std::string& config_hash);
// Reads a split back, loading every referenced raster (ParseError/IoError if
// a file is missing or malformed).
std::vector<DatasetRecord> read_dataset_split(const std::filesystem::path& dir);

}  // namespace lon
