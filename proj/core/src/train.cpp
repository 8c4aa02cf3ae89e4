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

#include "lon/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lon/errors.hpp"

namespace lon {

LossResult mean_squared_error(std::span<const double> prediction, std::span<const double> target) {
  if (prediction.size() != target.size() || prediction.empty()) {
    throw DimensionError("prediction/target size mismatch (" + std::to_string(prediction.size()) +
                         " vs " + std::to_string(target.size()) + ")");
  }
  const double n = static_cast<double>(prediction.size());
  LossResult r;
  r.grad.resize(prediction.size());
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = prediction[i] - target[i];
    r.value += d * d;
    r.grad[i] = 2.0 * d / n;
  }
  r.value /= n;
  return r;
}

LossResult softmax_cross_entropy(std::span<const double> logits, int label) {
  if (logits.empty()) throw DimensionError("cross-entropy needs at least one logit");
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw DimensionError("class label " + std::to_string(label) + " outside [0, " +
                         std::to_string(logits.size()) + ")");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double lse = mx + std::log(z);
  LossResult r;
  r.value = lse - logits[label];
  r.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) r.grad[i] = std::exp(logits[i] - lse);
  r.grad[label] -= 1.0;
  return r;
}

LossResult loss(LossKind kind, std::span<const double> prediction, const Example& example) {
  switch (kind) {
    case LossKind::PixelwiseMSE:
    case LossKind::ScalarMSE:
      return mean_squared_error(prediction, example.target);
    case LossKind::SoftmaxCrossEntropy:
      return softmax_cross_entropy(prediction, example.label);
  }
  return {};
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::PixelwiseMSE: return "pixelwise_mse";
    case LossKind::ScalarMSE: return "scalar_mse";
    case LossKind::SoftmaxCrossEntropy: return "softmax_cross_entropy";
  }
  return "?";
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw DimensionError("adam: parameter, gradient and moment lengths differ");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericError("adam: non-finite gradient at index " + std::to_string(i) + " (step " +
                         std::to_string(state.step + 1) + ")");
    }
  }
  const auto& o = state.options;
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * grads[i];
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
  }
}

namespace {

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

EvalResult evaluate(const Network& net, std::span<const Example> data, LossKind kind,
                    bool keep_predictions) {
  EvalResult r;
  if (data.empty()) return r;
  std::size_t correct = 0;
  for (const auto& ex : data) {
    const Output out = predict(net, ex.input);
    r.loss += loss(kind, out.values, ex).value;
    if (kind == LossKind::SoftmaxCrossEntropy && argmax(out.values) == static_cast<std::size_t>(ex.label)) {
      ++correct;
    }
    if (keep_predictions) r.predictions.push_back(out.values);
  }
  r.loss /= static_cast<double>(data.size());
  if (kind == LossKind::SoftmaxCrossEntropy) {
    r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  }
  return r;
}

TrainResult train(Network init, const TrainOptions& options, std::span<const Example> train_set,
                  std::span<const Example> validation_set) {
  if (train_set.empty()) throw ArgumentError("training set is empty");
  if (options.epochs < 0) throw ArgumentError("epoch count must be non-negative");
  if (options.batch_size <= 0) throw ArgumentError("batch size must be positive");

  TrainResult result;
  result.net = std::move(init);
  Network& net = result.net;
  const ParamLayout layout = param_layout(net);
  std::vector<double> params = flatten_params(net);
  std::vector<double> last_good = params;
  AdamState adam(params.size(), options.adam);

  const auto log_epoch = [&](int epoch) {
    const auto tr = evaluate(net, train_set, options.loss);
    result.log.push_back({epoch, "train", tr.loss, tr.accuracy});
    if (!validation_set.empty()) {
      const auto va = evaluate(net, validation_set, options.loss);
      result.log.push_back({epoch, "validation", va.loss, va.accuracy});
    }
    return std::isfinite(tr.loss);
  };
  if (!log_epoch(0)) {
    result.diverged = true;
    result.message = "non-finite loss at initialization";
    return result;
  }

  std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                    static_cast<std::uint32_t>(options.seed >> 32), 0x5f5fu};
  std::mt19937_64 shuffle_rng(seq);
  const std::size_t n = train_set.size();
  const std::size_t batch = std::min<std::size_t>(n, static_cast<std::size_t>(options.batch_size));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad_acc(params.size());

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    try {
      for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t stop = std::min(n, start + batch);
        std::fill(grad_acc.begin(), grad_acc.end(), 0.0);
        for (std::size_t b = start; b < stop; ++b) {
          const Example& ex = train_set[order[b]];
          auto fwd = forward(net, ex.input);
          const auto l = loss(options.loss, fwd.output.values, ex);
          if (!std::isfinite(l.value)) {
            throw NumericError("non-finite loss in epoch " + std::to_string(epoch));
          }
          const auto g = backward(net, fwd.tape, l.grad);
          for (std::size_t i = 0; i < g.params.size(); ++i) grad_acc[i] += g.params[i];
        }
        const double scale = 1.0 / static_cast<double>(stop - start);
        for (double& v : grad_acc) v *= scale;
        for (const auto& group : layout.groups) {
          if (!group.trainable) {
            std::fill_n(grad_acc.begin() + static_cast<std::ptrdiff_t>(group.offset), group.size, 0.0);
          }
        }
        adam_step(adam, params, grad_acc);
        assign_params(net, params);
      }
    } catch (const NumericError& e) {
      assign_params(net, last_good);
      result.diverged = true;
      result.message = e.what();
      return result;
    }
    if (epoch == options.epochs || epoch % std::max(1, options.eval_every) == 0) {
      if (!log_epoch(epoch)) {
        assign_params(net, last_good);
        result.diverged = true;
        result.message = "non-finite training loss after epoch " + std::to_string(epoch);
        return result;
      }
    }
    last_good = params;
  }
  return result;
}

GradcheckReport gradcheck(const Network& net, const Example& example, LossKind kind, double step,
                          double tolerance, const GradientFn& analytic, double abs_floor) {
  if (!(step > 0.0)) throw ArgumentError("gradcheck step must be positive");
  const GradientFn grad_fn = analytic ? analytic : GradientFn(backward);

  const auto fwd = forward(net, example.input);
  const auto l = loss(kind, fwd.output.values, example);
  const Gradients g = grad_fn(net, fwd.tape, l.grad, true);

  GradcheckReport report;
  const auto rel = [&](double a, double num) {
    return std::abs(a - num) / std::max({std::abs(a), std::abs(num), abs_floor});
  };
  const auto record = [&](GradcheckGroup& group, double e) {
    ++group.checked;
    group.max_rel_error = std::max(group.max_rel_error, e);
  };

  Network probe = net;
  std::vector<double> params = flatten_params(net);
  for (const auto& group : param_layout(net).groups) {
    if (!group.trainable) continue;
    GradcheckGroup out{group.name};
    for (std::size_t i = group.offset; i < group.offset + group.size; ++i) {
      const double saved = params[i];
      params[i] = saved + step;
      assign_params(probe, params);
      const double up = loss(kind, predict(probe, example.input).values, example).value;
      params[i] = saved - step;
      assign_params(probe, params);
      const double down = loss(kind, predict(probe, example.input).values, example).value;
      params[i] = saved;
      record(out, rel(g.params[i], (up - down) / (2.0 * step)));
    }
    assign_params(probe, params);
    out.passed = out.max_rel_error < tolerance;
    report.groups.push_back(out);
  }

  GradcheckGroup input{"input"};
  Example shifted = example;
  for (std::size_t k = 0; k < example.input.size(); ++k) {
    shifted.input[k] = example.input[k] + step;
    const double up = loss(kind, predict(net, shifted.input).values, example).value;
    shifted.input[k] = example.input[k] - step;
    const double down = loss(kind, predict(net, shifted.input).values, example).value;
    shifted.input[k] = example.input[k];
    const double a = g.input.empty() ? 0.0 : g.input[k];
    record(input, rel(a, (up - down) / (2.0 * step)));
  }
  input.passed = input.max_rel_error < tolerance;
  report.groups.push_back(input);

  for (const auto& group : report.groups) {
    report.max_rel_error = std::max(report.max_rel_error, group.max_rel_error);
    report.passed = report.passed && group.passed;
  }
  return report;
}

}  // namespace lon
