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

#include "lon/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "lon/errors.hpp"
#include "lon/raster_io.hpp"

namespace lon {

namespace {

// Independent generator for (seed, stream, index).
std::mt19937_64 substream(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kBlobStream = 0xb10b;
constexpr std::uint32_t kEllipseStream = 0xe111;
constexpr std::uint32_t kNoiseStream = 0x0153;
constexpr std::uint32_t kDigitStream = 0xd161;
constexpr std::uint32_t kScaleStream = 0x5ca1;

}  // namespace

// ---- blobs -----------------------------------------------------------------

Image blob_field(std::uint64_t seed, int field_index, const BlobOptions& options) {
  auto rng = substream(seed, kBlobStream, static_cast<std::uint64_t>(field_index));
  std::normal_distribution<double> normal(0.0, 1.0);
  Image noise(options.field_size, options.field_size);
  for (double& v : noise.values()) v = normal(rng);
  const Image smooth = convolve(noise, gaussian_kernel(options.smoothing_sigma), BoundaryMode::Reflect);
  std::vector<double> sorted(smooth.values().begin(), smooth.values().end());
  const auto q = static_cast<std::size_t>(std::floor(options.quantile * (sorted.size() - 1)));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q), sorted.end());
  const double threshold = sorted[q];
  Image mask(options.field_size, options.field_size);
  for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = smooth[k] > threshold ? 1.0 : 0.0;
  return mask;
}

std::vector<int> label_components(const Image& mask, int* component_count) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> labels(mask.size(), 0);
  std::vector<int> stack;
  int next = 0;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const int start = y0 * w + x0;
      if (mask[start] <= 0.5 || labels[start] != 0) continue;
      ++next;
      labels[start] = next;
      stack.push_back(start);
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        const int px = p % w, py = p / w;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int x = px + dx, y = py + dy;
            if (x < 0 || y < 0 || x >= w || y >= h) continue;
            const int q = y * w + x;
            if (mask[q] > 0.5 && labels[q] == 0) {
              labels[q] = next;
              stack.push_back(q);
            }
          }
        }
      }
    }
  }
  if (component_count) *component_count = next;
  return labels;
}

std::vector<ShapeSample> generate_blobs(std::uint64_t seed, int count, const BlobOptions& options) {
  if (count < 1) throw ArgumentError("blob count must be at least 1");
  if (options.crop_size <= 2 * options.crop_margin) throw ArgumentError("crop too small for margin");
  std::vector<ShapeSample> out;
  out.reserve(static_cast<std::size_t>(count));
  const int n = options.field_size;
  for (int field = 0; static_cast<int>(out.size()) < count; ++field) {
    const Image mask = blob_field(seed, field, options);
    int components = 0;
    const auto labels = label_components(mask, &components);
    struct Box {
      int x0, y0, x1, y1;
      std::size_t area;
      bool border;
    };
    std::vector<Box> boxes(static_cast<std::size_t>(components) + 1, Box{n, n, -1, -1, 0, false});
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const int l = labels[y * n + x];
        if (l == 0) continue;
        Box& b = boxes[l];
        b.x0 = std::min(b.x0, x);
        b.y0 = std::min(b.y0, y);
        b.x1 = std::max(b.x1, x);
        b.y1 = std::max(b.y1, y);
        ++b.area;
        if (x == 0 || y == 0 || x == n - 1 || y == n - 1) b.border = true;
      }
    }
    const int room = options.crop_size - 2 * options.crop_margin;
    for (int l = 1; l <= components && static_cast<int>(out.size()) < count; ++l) {
      const Box& b = boxes[l];
      const double area = static_cast<double>(b.area);
      if (b.border || area < options.min_area || area > options.max_area) continue;
      const int bw = b.x1 - b.x0 + 1, bh = b.y1 - b.y0 + 1;
      if (bw > room || bh > room) continue;
      Image crop(options.crop_size, options.crop_size);
      const int ox = (options.crop_size - bw) / 2 - b.x0;
      const int oy = (options.crop_size - bh) / 2 - b.y0;
      for (int y = b.y0; y <= b.y1; ++y) {
        for (int x = b.x0; x <= b.x1; ++x) {
          if (labels[y * n + x] == l) crop.at(x + ox, y + oy) = 1.0;
        }
      }
      const auto lab = label_shapes(crop);
      out.push_back({std::move(crop), lab.area, lab.perimeter, std::nullopt, 0.0});
    }
  }
  return out;
}

// ---- ellipses --------------------------------------------------------------

double ellipse_perimeter(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("ellipse semi-axes must be positive");
  if (a < b) std::swap(a, b);
  const double e = std::sqrt(std::max(0.0, 1.0 - (b * b) / (a * a)));
  return 4.0 * a * std::comp_ellint_2(e);
}

std::pair<double, double> ellipse_axes(double area, double perimeter) {
  if (!(area > 0.0) || !(perimeter > 0.0)) throw ArgumentError("area and perimeter must be positive");
  const double circle = 2.0 * std::sqrt(std::numbers::pi * area);
  if (perimeter < circle * (1.0 - 1e-12)) {
    throw ArgumentError("perimeter below the isoperimetric bound 2*sqrt(pi*area)");
  }
  if (perimeter <= circle * (1.0 + 1e-12)) {
    const double r = std::sqrt(area / std::numbers::pi);
    return {r, r};
  }
  // Perimeter at fixed area decreases monotonically in the ratio q = b/a.
  const auto perimeter_at = [&](double q) {
    const double a = std::sqrt(area / (std::numbers::pi * q));
    return ellipse_perimeter(a, q * a);
  };
  double lo = 1e-9, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (perimeter_at(mid) > perimeter ? lo : hi) = mid;
  }
  const double q = 0.5 * (lo + hi);
  const double a = std::sqrt(area / (std::numbers::pi * q));
  return {a, q * a};
}

Image rasterize_ellipse(int size, double cx, double cy, double a, double b, double theta) {
  Image img(size, size);
  const double c = std::cos(theta), s = std::sin(theta);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double u = (dx * c + dy * s) / a;
      const double v = (-dx * s + dy * c) / b;
      if (u * u + v * v <= 1.0) img.at(x, y) = 1.0;
    }
  }
  return img;
}

std::vector<ShapeSample> generate_ellipses(std::uint64_t seed, int count,
                                           const EllipseOptions& options) {
  if (count < 1) throw ArgumentError("ellipse count must be at least 1");
  if (!(options.value > 0.0)) throw ArgumentError("ellipse constraint value must be positive");
  if (!(options.min_axis_ratio > 0.0) || options.min_axis_ratio > 1.0) {
    throw ArgumentError("min_axis_ratio must lie in (0, 1]");
  }
  // Semi-major bound, leaving room for half a pixel of centre jitter.
  const double a_max = 0.5 * options.size - options.margin - 0.5;
  if (!(a_max > 0.0)) throw ArgumentError("image too small for the requested margin");

  const auto semi_major = [&](double q) {
    if (options.constraint == EllipseConstraint::ConstantArea) {
      return std::sqrt(options.value / (std::numbers::pi * q));
    }
    return options.value / (4.0 * std::comp_ellint_2(std::sqrt(1.0 - q * q)));
  };
  if (semi_major(1.0) > a_max) {
    throw ArgumentError("constraint value " + fmt::format("{}", options.value) +
                        " does not fit a " + std::to_string(options.size) + " px image");
  }
  // semi_major(q) decreases in q; find the smallest feasible ratio.
  double q_lo = options.min_axis_ratio;
  if (semi_major(q_lo) > a_max) {
    double lo = q_lo, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (semi_major(mid) > a_max ? lo : hi) = mid;
    }
    q_lo = hi;
  }

  std::vector<ShapeSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    auto rng = substream(seed, kEllipseStream, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> ratio(q_lo, 1.0);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    const double q = ratio(rng);
    const double theta = angle(rng);
    const double cx = 0.5 * (options.size - 1) + jitter(rng);
    const double cy = 0.5 * (options.size - 1) + jitter(rng);
    const double a = semi_major(q);
    const double b = q * a;
    ShapeSample s;
    s.image = rasterize_ellipse(options.size, cx, cy, a, b, theta);
    s.area = std::numbers::pi * a * b;
    s.perimeter = ellipse_perimeter(a, b);
    out.push_back(std::move(s));
  }
  return out;
}

// ---- labels ----------------------------------------------------------------

double contour_length(const Image& field, double level) {
  const int w = field.width(), h = field.height();
  const auto value = [&](int x, int y) {
    return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : field.at(x, y);
  };
  const auto crossing = [&](double va, double vb) {
    const double t = (level - va) / (vb - va);
    return std::clamp(t, 0.0, 1.0);
  };
  double length = 0.0;
  for (int y = -1; y < h; ++y) {
    for (int x = -1; x < w; ++x) {
      // Corners: 0 = (x, y), 1 = (x+1, y), 2 = (x+1, y+1), 3 = (x, y+1).
      const double v[4] = {value(x, y), value(x + 1, y), value(x + 1, y + 1), value(x, y + 1)};
      int code = 0;
      for (int c = 0; c < 4; ++c) {
        if (v[c] > level) code |= 1 << c;
      }
      if (code == 0 || code == 15) continue;
      // Crossing points on the four cell edges (unit cell coordinates).
      std::pair<double, double> pts[4];
      bool has[4] = {false, false, false, false};
      const auto edge = [&](int e) {
        const int a = e, b = (e + 1) % 4;
        if (((code >> a) & 1) == ((code >> b) & 1)) return;
        const double t = crossing(v[a], v[b]);
        static constexpr double corner[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        pts[e] = {corner[a][0] + t * (corner[b][0] - corner[a][0]),
                  corner[a][1] + t * (corner[b][1] - corner[a][1])};
        has[e] = true;
      };
      for (int e = 0; e < 4; ++e) edge(e);
      const auto seg = [&](int e0, int e1) {
        length += std::hypot(pts[e0].first - pts[e1].first, pts[e0].second - pts[e1].second);
      };
      std::vector<int> edges;
      for (int e = 0; e < 4; ++e) {
        if (has[e]) edges.push_back(e);
      }
      if (edges.size() == 2) {
        seg(edges[0], edges[1]);
      } else if (edges.size() == 4) {
        // Saddle: resolve with the cell-centre average.
        const double centre = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        const bool corner0_inside = (code & 1) != 0;
        if ((centre > level) == corner0_inside) {
          seg(0, 1);
          seg(2, 3);
        } else {
          seg(3, 0);
          seg(1, 2);
        }
      }
    }
  }
  return length;
}

ShapeLabels label_shapes(const Image& mask) {
  double area = 0.0;
  for (double v : mask.values()) area += v > 0.5 ? 1.0 : 0.0;
  if (area == 0.0) throw ArgumentError("label_shapes: mask has no foreground");
  return {area, contour_length(mask, 0.5)};
}

std::vector<int> tertile_labels(std::span<const double> keys) {
  const std::size_t n = keys.size();
  if (n < 3) throw ArgumentError("tertile split needs at least 3 samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<int> labels(n);
  for (std::size_t rank = 0; rank < n; ++rank) labels[order[rank]] = static_cast<int>(rank * 3 / n);
  return labels;
}

void assign_classes(std::vector<ShapeSample>& samples, ClassKey key) {
  std::vector<double> keys;
  keys.reserve(samples.size());
  for (const auto& s : samples) keys.push_back(key == ClassKey::Area ? s.area : s.perimeter);
  const auto labels = tertile_labels(keys);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].class_label = labels[i];
}

ShapeSample add_noise(ShapeSample sample, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw ArgumentError("noise sigma must be non-negative");
  sample.noise_sigma = sigma;
  if (sigma == 0.0) return sample;
  auto rng = substream(seed, kNoiseStream, 0);
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : sample.image.values()) v += normal(rng);
  return sample;
}

// ---- IDX -------------------------------------------------------------------

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be_u32(std::span<const unsigned char> b, std::size_t pos) {
  if (pos + 4 > b.size()) throw ParseError("truncated IDX header", b.size());
  return static_cast<std::uint32_t>(b[pos]) << 24 | static_cast<std::uint32_t>(b[pos + 1]) << 16 |
         static_cast<std::uint32_t>(b[pos + 2]) << 8 | b[pos + 3];
}

}  // namespace

std::vector<Image> parse_idx_images(std::span<const unsigned char> bytes) {
  if (be_u32(bytes, 0) != 0x00000803) throw ParseError("bad IDX3 magic", 0);
  const auto n = be_u32(bytes, 4);
  const auto rows = be_u32(bytes, 8);
  const auto cols = be_u32(bytes, 12);
  if (rows == 0 || cols == 0 || rows > 1u << 15 || cols > 1u << 15) {
    throw ParseError("implausible IDX3 image size", 8);
  }
  const std::size_t px = static_cast<std::size_t>(rows) * cols;
  if (bytes.size() < 16 + px * n) throw ParseError("truncated IDX3 payload", bytes.size());
  std::vector<Image> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d(px);
    for (std::size_t k = 0; k < px; ++k) d[k] = bytes[16 + i * px + k] / 255.0;
    out.emplace_back(static_cast<int>(cols), static_cast<int>(rows), std::move(d));
  }
  return out;
}

std::vector<int> parse_idx_labels(std::span<const unsigned char> bytes) {
  if (be_u32(bytes, 0) != 0x00000801) throw ParseError("bad IDX1 magic", 0);
  const auto n = be_u32(bytes, 4);
  if (bytes.size() < 8 + static_cast<std::size_t>(n)) throw ParseError("truncated IDX1 payload", bytes.size());
  return {bytes.begin() + 8, bytes.begin() + 8 + n};
}

std::vector<Image> load_idx(const std::filesystem::path& path) {
  return parse_idx_images(read_bytes(path));
}

std::vector<int> load_idx_labels(const std::filesystem::path& path) {
  return parse_idx_labels(read_bytes(path));
}

void write_idx(const std::filesystem::path& path, std::span<const Image> images) {
  std::vector<unsigned char> buf;
  const auto put = [&](std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) buf.push_back(static_cast<unsigned char>(v >> s));
  };
  const int w = images.empty() ? 0 : images.front().width();
  const int h = images.empty() ? 0 : images.front().height();
  put(0x00000803);
  put(static_cast<std::uint32_t>(images.size()));
  put(static_cast<std::uint32_t>(h));
  put(static_cast<std::uint32_t>(w));
  for (const auto& img : images) {
    if (img.width() != w || img.height() != h) throw DimensionError("IDX images must share one size");
    for (double v : img.values()) {
      buf.push_back(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

// ---- digits / grad^2 -------------------------------------------------------

std::vector<Image> synthetic_digits(std::uint64_t seed, int count) {
  constexpr int kSize = 28;
  constexpr int kSamples = 24;
  std::vector<Image> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int n = 0; n < count; ++n) {
    auto rng = substream(seed, kDigitStream, static_cast<std::uint64_t>(n));
    std::uniform_int_distribution<int> strokes(1, 3);
    std::uniform_real_distribution<double> coord(6.0, 22.0);
    std::uniform_real_distribution<double> width(1.0, 2.0);
    const int k = strokes(rng);
    const double pen = width(rng);
    std::vector<std::pair<double, double>> poly;
    std::vector<std::pair<std::size_t, std::size_t>> segments;
    for (int s = 0; s < k; ++s) {
      double p[3][2];
      for (auto& pt : p) {
        pt[0] = coord(rng);
        pt[1] = coord(rng);
      }
      for (int t = 0; t <= kSamples; ++t) {
        const double u = static_cast<double>(t) / kSamples;
        const double a = (1 - u) * (1 - u), b = 2 * u * (1 - u), c = u * u;
        poly.emplace_back(a * p[0][0] + b * p[1][0] + c * p[2][0], a * p[0][1] + b * p[1][1] + c * p[2][1]);
        if (t > 0) segments.emplace_back(poly.size() - 2, poly.size() - 1);
      }
    }
    Image img(kSize, kSize);
    for (int y = 0; y < kSize; ++y) {
      for (int x = 0; x < kSize; ++x) {
        double d2 = 1e18;
        for (const auto& [i0, i1] : segments) {
          const auto [ax, ay] = poly[i0];
          const auto [bx, by] = poly[i1];
          const double vx = bx - ax, vy = by - ay;
          const double len2 = vx * vx + vy * vy;
          const double t = len2 > 0 ? std::clamp(((x - ax) * vx + (y - ay) * vy) / len2, 0.0, 1.0) : 0.0;
          const double ex = x - ax - t * vx, ey = y - ay - t * vy;
          d2 = std::min(d2, ex * ex + ey * ey);
        }
        img.at(x, y) = std::clamp(pen - std::sqrt(d2) + 0.5, 0.0, 1.0);
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

Image grad2_target(const Image& img, double sigma) {
  const Image ix = convolve(img, gaussian_derivative_kernel(sigma, Axis::X), BoundaryMode::Reflect);
  const Image iy = convolve(img, gaussian_derivative_kernel(sigma, Axis::Y), BoundaryMode::Reflect);
  Image out(img.width(), img.height());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = ix[k] * ix[k] + iy[k] * iy[k];
  return out;
}

std::vector<GradSample> make_grad_samples(std::span<const Image> images, std::uint64_t seed,
                                          double target_sigma) {
  std::vector<GradSample> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    auto rng = substream(seed, kScaleStream, i);
    std::uniform_real_distribution<double> scale(0.5, 2.0);
    const double u = scale(rng);
    Image input = images[i];
    for (double& v : input.values()) v *= u;
    Image target = grad2_target(input, target_sigma);
    out.push_back({std::move(input), std::move(target), u});
  }
  return out;
}

// ---- dataset directories ---------------------------------------------------

DatasetRecord to_record(const ShapeSample& s, std::string file) {
  DatasetRecord r;
  r.file = std::move(file);
  r.image = s.image;
  r.area = s.area;
  r.perimeter = s.perimeter;
  r.class_label = s.class_label;
  r.noise_sigma = s.noise_sigma;
  return r;
}

DatasetRecord to_record(const GradSample& s, std::string file) {
  DatasetRecord r;
  r.file = std::move(file);
  r.image = s.input;
  r.target = s.target;
  r.scale = s.scale_factor;
  return r;
}

namespace {

std::filesystem::path target_path(const std::filesystem::path& dir, const std::string& file) {
  return dir / (std::filesystem::path(file).stem().string() + ".target.lonr");
}

template <typename T>
std::string opt(const std::optional<T>& v) {
  return v ? fmt::format("{}", *v) : std::string();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void write_dataset_split(const std::filesystem::path& dir, std::span<const DatasetRecord> records,
                         const std::string& config_hash) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::string csv;
  if (!config_hash.empty()) csv += "# config_sha256=" + config_hash + "\n";
  csv += "file,area,perimeter,class,scale,noise_sigma\n";
  for (const auto& r : records) {
    write_lonr(r.image, dir / r.file);
    if (r.target) write_lonr(*r.target, target_path(dir, r.file));
    csv += fmt::format("{},{},{},{},{},{}\n", r.file, opt(r.area), opt(r.perimeter),
                       opt(r.class_label), opt(r.scale), r.noise_sigma);
  }
  std::ofstream out(dir / "manifest.csv", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "manifest.csv").string());
  out << csv;
}

std::vector<DatasetRecord> read_dataset_split(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.csv", std::ios::binary);
  if (!in) throw IoError("cannot open " + (dir / "manifest.csv").string());
  std::vector<DatasetRecord> out;
  std::string line;
  bool header = false;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "file,area,perimeter,class,scale,noise_sigma") {
        throw ParseError("unexpected manifest header '" + line + "'", line_start);
      }
      header = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 6) throw ParseError("manifest row needs 6 fields", line_start);
    DatasetRecord r;
    r.file = f[0];
    try {
      if (!f[1].empty()) r.area = std::stod(f[1]);
      if (!f[2].empty()) r.perimeter = std::stod(f[2]);
      if (!f[3].empty()) r.class_label = std::stoi(f[3]);
      if (!f[4].empty()) r.scale = std::stod(f[4]);
      r.noise_sigma = f[5].empty() ? 0.0 : std::stod(f[5]);
    } catch (const std::exception&) {
      throw ParseError("malformed number in manifest row", line_start);
    }
    r.image = read_lonr(dir / r.file);
    if (const auto t = target_path(dir, r.file); std::filesystem::exists(t)) r.target = read_lonr(t);
    out.push_back(std::move(r));
  }
  if (!header) throw ParseError("manifest has no header", offset);
  return out;
}

}  // namespace lon
