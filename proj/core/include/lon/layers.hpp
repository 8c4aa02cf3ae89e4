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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lon/activation.hpp"
#include "lon/image.hpp"

namespace lon {

// A single conv -> activation -> (smoothing) -> linear-head network.
//
// Locally orderless (Lon) networks evaluate, for kernel j and bin i,
//   h_ij(x) = (W_j * f_{sigma_ij}(b_ij - (I * K_j)))(x)
// with the bell f, and feed the M*N channels to the head.  Convolutional
// (Cnn) networks use the same structure with a sigmoid-family or ReLU
// activation, usually with one bias per kernel (N = 1).
enum class ModelKind { Lon, Cnn };

// Dense: one weight per (output, channel, pixel) plus one bias per output;
// bound to a fixed image size.  OneByOne: a 1x1 convolution over channels
// (one output map, one bias), optionally mean-pooled to a scalar.
enum class HeadKind { Dense, OneByOne };
enum class Pooling { None, Mean };

struct Head {
  HeadKind kind = HeadKind::OneByOne;
  int outputs = 1;
  int width = 0;  // Dense only
  int height = 0;
  Pooling pooling = Pooling::None;
  // Dense: [output][channel][pixel]; OneByOne: [channel].
  std::vector<double> weights;
  std::vector<double> bias;
};

struct Network {
  ModelKind kind = ModelKind::Lon;
  ActivationKind activation = ActivationKind::GaussBell;
  int kernel_count = 1;  // M
  int bins = 1;          // N
  std::vector<Kernel> kernels;    // M learnable filters K_j
  std::vector<Kernel> smoothers;  // M fixed W_j; empty means delta
  std::vector<double> bias;       // b_ij, channel c = j * N + i
  std::vector<double> log_sigma;  // log sigma_ij, same indexing
  bool sigma_learnable = true;
  BoundaryMode boundary = BoundaryMode::Reflect;
  Head head;

  int channels() const { return kernel_count * bins; }
  int kernel_side() const { return kernels.empty() ? 0 : kernels.front().side(); }
  double sigma(int channel) const;
  // Throws DimensionError when the parameter arrays are inconsistent.
  void validate() const;
};

struct NetworkSpec {
  ModelKind kind = ModelKind::Lon;
  ActivationKind activation = ActivationKind::GaussBell;
  int kernels = 2;
  int bins = 1;
  int kernel_side = 3;
  HeadKind head = HeadKind::OneByOne;
  int outputs = 1;
  int width = 0;  // required for Dense heads
  int height = 0;
  Pooling pooling = Pooling::None;
  bool sigma_learnable = true;
  BoundaryMode boundary = BoundaryMode::Reflect;
  std::optional<double> smoother_sigma;  // Gaussian W_j; delta when unset
};

// Builds and initializes a network:
//  * kernels uniform in [-1/|K|, 1/|K|],
//  * for each kernel, N biases spread over the response range [lo, hi] of
//    `init_batch`, ends included (b_ij = lo + i db, db = (hi - lo) / (N - 1));
//    a single bias sits at the middle with db = hi - lo,
//  * sigma_ij = db / 2,
//  * head weights uniform in +-1/sqrt(fan_in), head bias 0.
Network build_network(const NetworkSpec& spec, std::uint64_t seed,
                      std::span<const Image> init_batch);

// Spatial outputs (OneByOne without pooling) carry width/height; vector
// outputs leave them 0.
struct Output {
  std::vector<double> values;
  int width = 0;
  int height = 0;
  bool spatial() const { return width > 0; }
};

// Intermediates needed by backward().
struct ForwardTape {
  Image input;
  std::vector<Image> responses;    // I * K_j, size M
  std::vector<Image> activations;  // f(b_ij - I*K_j), size M*N
  std::vector<Image> smoothed;     // W_j * activations; empty when W = delta
  Output output;

  const Image& channel(int c) const { return smoothed.empty() ? activations[c] : smoothed[c]; }
};

struct ForwardResult {
  Output output;
  ForwardTape tape;
};

ForwardResult forward(const Network& net, const Image& img);
// Cheaper forward pass that keeps no tape.
Output predict(const Network& net, const Image& img);

ForwardResult lon_forward(const Network& net, const Image& img);
ForwardResult cnn_forward(const Network& net, const Image& img);

// Gradient with respect to every parameter (flattened in param_layout order)
// and, optionally, the input image.
struct Gradients {
  std::vector<double> params;
  Image input;  // empty unless requested
};

Gradients backward(const Network& net, const ForwardTape& tape, std::span<const double> upstream,
                   bool input_gradient = false);
Gradients lon_backward(const Network& net, const ForwardTape& tape,
                       std::span<const double> upstream, bool input_gradient = false);
Gradients cnn_backward(const Network& net, const ForwardTape& tape,
                       std::span<const double> upstream, bool input_gradient = false);

// Flat parameter views.  Groups appear in this order, each only if present:
// kernels, bias, log_sigma (width-based activations), head_weights, head_bias.
struct ParamGroup {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
  bool trainable = true;
};

struct ParamLayout {
  std::vector<ParamGroup> groups;
  std::size_t total = 0;
  const ParamGroup* find(std::string_view name) const;
  friend bool operator==(const ParamLayout&, const ParamLayout&) = default;
};

inline bool operator==(const ParamGroup& a, const ParamGroup& b) {
  return a.name == b.name && a.offset == b.offset && a.size == b.size && a.trainable == b.trainable;
}

ParamLayout param_layout(const Network& net);
std::vector<double> flatten_params(const Network& net);
void assign_params(Network& net, std::span<const double> params);

// Paper-formula count: M|K| + N*M*|Omega| for Dense heads (single output,
// no head bias) and M|K| + N*M + 1 for 1x1 heads.  Actual: every trainable
// scalar including biases, widths, all head outputs and head biases.
struct ParamCounts {
  std::size_t paper_formula = 0;
  std::size_t actual = 0;
};
ParamCounts count_params(const Network& net);

// Cumulative sums over the bin index of a Lon network's (pre-head) channels,
// scaled by the bin spacing: C_ji(x) = db * sum_{i' <= i} h_ji'(x).  Each C_ji
// approximates an IntegratedBell channel with bias equivalent_bias[c] =
// b_ji + db / 2 (the upper edge of bin i) and the same width.
struct EmulatedChannels {
  std::vector<Image> channels;
  std::vector<double> equivalent_bias;
  std::vector<double> spacing;  // db per kernel
};
// `spacing` overrides db; otherwise it comes from the bias grid (N >= 2) or
// 2 sigma (N = 1).  Throws ArgumentError for irregular grids.
EmulatedChannels emulate_cnn_from_lon(const Network& lon, const Image& img,
                                      std::optional<double> spacing = std::nullopt);

// Checkpoint ("LONC") serialization; see checkpoint.cpp for the field order.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const Network& net, std::ostream& out);
Network load_checkpoint(std::istream& in);
void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

std::string_view to_string(ModelKind kind);
std::string_view to_string(HeadKind kind);

}  // namespace lon
