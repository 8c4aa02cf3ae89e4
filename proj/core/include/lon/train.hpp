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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lon/image.hpp"
#include "lon/layers.hpp"

namespace lon {

enum class LossKind { PixelwiseMSE, ScalarMSE, SoftmaxCrossEntropy };

// One supervised pair.  Regression targets live in `target` (a full map for
// pixel-wise losses); classification uses `label`.
struct Example {
  Image input;
  std::vector<double> target;
  int label = -1;
};

struct LossResult {
  double value = 0.0;
  std::vector<double> grad;  // d value / d prediction
};

LossResult mean_squared_error(std::span<const double> prediction, std::span<const double> target);
// Numerically stable (log-sum-exp) softmax cross-entropy.
LossResult softmax_cross_entropy(std::span<const double> logits, int label);
LossResult loss(LossKind kind, std::span<const double> prediction, const Example& example);

std::string_view to_string(LossKind kind);

struct AdamOptions {
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamState() = default;
  AdamState(std::size_t n, AdamOptions options) : options(options), m(n, 0.0), v(n, 0.0) {}
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

// Bias-corrected Adam update in place.  Throws NumericError on non-finite
// gradients and DimensionError on length mismatch.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

struct TrainOptions {
  LossKind loss = LossKind::PixelwiseMSE;
  int epochs = 1;
  int batch_size = 32;  // clamped to the training set size
  AdamOptions adam;
  std::uint64_t seed = 0;
  int eval_every = 1;  // the last epoch is always evaluated
};

struct MetricsRow {
  int epoch = 0;
  std::string split;
  double loss = 0.0;
  std::optional<double> accuracy;
  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct TrainResult {
  Network net;
  std::vector<MetricsRow> log;
  bool diverged = false;
  std::string message;
};

struct EvalResult {
  double loss = 0.0;
  std::optional<double> accuracy;  // classification only
  std::vector<std::vector<double>> predictions;
};

EvalResult evaluate(const Network& net, std::span<const Example> data, LossKind kind,
                    bool keep_predictions = false);

// Mini-batch Adam.  Epoch 0 rows record the initial network.  The shuffle
// stream is derived from options.seed only, so changing the epoch count does
// not perturb the order of earlier epochs.  On a non-finite loss or gradient
// the run stops and returns the parameters of the last finished epoch.
TrainResult train(Network init, const TrainOptions& options, std::span<const Example> train_set,
                  std::span<const Example> validation_set = {});

using GradientFn = std::function<Gradients(const Network&, const ForwardTape&,
                                           std::span<const double>, bool)>;

struct GradcheckGroup {
  std::string name;  // kernels, bias, log_sigma, head_weights, head_bias, input
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradcheckReport {
  std::vector<GradcheckGroup> groups;
  double max_rel_error = 0.0;
  bool passed = true;
};

// Central differences against the analytic gradient for every parameter and
// input pixel.  Relative error is |a - n| / max(|a|, |n|, abs_floor).
// Throws ArgumentError if step <= 0.
GradcheckReport gradcheck(const Network& net, const Example& example, LossKind kind, double step,
                          double tolerance, const GradientFn& analytic = {},
                          double abs_floor = 1e-6);

}  // namespace lon
