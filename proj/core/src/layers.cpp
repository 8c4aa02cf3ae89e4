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

#include "lon/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "lon/errors.hpp"

namespace lon {

double Network::sigma(int channel) const { return std::exp(log_sigma[channel]); }

void Network::validate() const {
  const auto C = static_cast<std::size_t>(channels());
  if (kernel_count <= 0 || bins <= 0) throw DimensionError("network needs M >= 1 and N >= 1");
  if (kernels.size() != static_cast<std::size_t>(kernel_count)) {
    throw DimensionError("kernel count does not match M");
  }
  for (const auto& k : kernels) {
    if (k.side() != kernel_side()) throw DimensionError("kernels must share one side length");
  }
  if (!smoothers.empty() && smoothers.size() != kernels.size()) {
    throw DimensionError("smoother count does not match M");
  }
  if (bias.size() != C || log_sigma.size() != C) {
    throw DimensionError("bias/width arrays must have M*N entries");
  }
  if (head.outputs <= 0) throw DimensionError("head needs at least one output");
  if (head.kind == HeadKind::Dense) {
    if (head.width <= 0 || head.height <= 0) throw DimensionError("dense head needs a size");
    const std::size_t n = static_cast<std::size_t>(head.outputs) * C * head.width * head.height;
    if (head.weights.size() != n) throw DimensionError("dense head weight count mismatch");
  } else {
    if (head.outputs != 1) throw DimensionError("1x1 head has exactly one output map");
    if (head.weights.size() != C) throw DimensionError("1x1 head weight count mismatch");
  }
  if (head.bias.size() != static_cast<std::size_t>(head.outputs)) {
    throw DimensionError("head bias count mismatch");
  }
}

Network build_network(const NetworkSpec& spec, std::uint64_t seed,
                      std::span<const Image> init_batch) {
  if (spec.kernels <= 0 || spec.bins <= 0) throw ArgumentError("kernels and bins must be positive");
  if (spec.kernel_side <= 0 || spec.kernel_side % 2 == 0) {
    throw ArgumentError("kernel side must be odd and positive");
  }
  Network net;
  net.kind = spec.kind;
  net.activation = spec.activation;
  net.kernel_count = spec.kernels;
  net.bins = spec.bins;
  net.sigma_learnable = spec.sigma_learnable;
  net.boundary = spec.boundary;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x1417u};
  std::mt19937_64 rng(seq);

  const int taps = spec.kernel_side * spec.kernel_side;
  std::uniform_real_distribution<double> kernel_dist(-1.0 / taps, 1.0 / taps);
  for (int j = 0; j < spec.kernels; ++j) {
    std::vector<double> t(static_cast<std::size_t>(taps));
    for (double& v : t) v = kernel_dist(rng);
    net.kernels.emplace_back(spec.kernel_side, std::move(t));
  }
  if (spec.smoother_sigma) {
    for (int j = 0; j < spec.kernels; ++j) net.smoothers.push_back(gaussian_kernel(*spec.smoother_sigma));
  }

  const int C = spec.kernels * spec.bins;
  net.bias.assign(C, 0.0);
  net.log_sigma.assign(C, 0.0);
  for (int j = 0; j < spec.kernels; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& img : init_batch) {
      const auto r = convolve(img, net.kernels[j], net.boundary);
      const auto [mn, mx] = std::minmax_element(r.values().begin(), r.values().end());
      lo = std::min(lo, *mn);
      hi = std::max(hi, *mx);
    }
    if (!std::isfinite(lo) || hi - lo < 1e-9) {
      const double mid = std::isfinite(lo) ? 0.5 * (lo + hi) : 0.0;
      lo = mid - 0.5;
      hi = mid + 0.5;
    }
    // The grid includes both ends of the range, so the flat responses of a
    // piecewise-constant image sit on a bias.  A single bias takes the middle.
    const int n = spec.bins;
    const double db = n > 1 ? (hi - lo) / (n - 1) : hi - lo;
    for (int i = 0; i < n; ++i) {
      net.bias[j * n + i] = n > 1 ? lo + i * db : 0.5 * (lo + hi);
      net.log_sigma[j * n + i] = uses_width(spec.activation) ? std::log(0.5 * db) : 0.0;
    }
  }

  Head& head = net.head;
  head.kind = spec.head;
  head.pooling = spec.pooling;
  head.outputs = spec.head == HeadKind::Dense ? spec.outputs : 1;
  std::size_t fan_in = static_cast<std::size_t>(C);
  if (spec.head == HeadKind::Dense) {
    if (spec.width <= 0 || spec.height <= 0) throw ArgumentError("dense head needs width/height");
    head.width = spec.width;
    head.height = spec.height;
    fan_in *= static_cast<std::size_t>(spec.width) * spec.height;
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> head_dist(-bound, bound);
  head.weights.resize(fan_in * head.outputs);
  for (double& w : head.weights) w = head_dist(rng);
  head.bias.assign(head.outputs, 0.0);
  net.validate();
  return net;
}

namespace {

void check_input(const Network& net, const Image& img) {
  if (net.head.kind == HeadKind::Dense &&
      (img.width() != net.head.width || img.height() != net.head.height)) {
    throw DimensionError("image " + std::to_string(img.width()) + "x" +
                         std::to_string(img.height()) + " does not match dense head " +
                         std::to_string(net.head.width) + "x" + std::to_string(net.head.height));
  }
}

Output apply_head(const Head& head, const ForwardTape& tape, int C) {
  const Image& first = tape.channel(0);
  const std::size_t P = first.size();
  Output out;
  if (head.kind == HeadKind::Dense) {
    out.values.assign(head.bias.begin(), head.bias.end());
    for (int o = 0; o < head.outputs; ++o) {
      double acc = 0.0;
      for (int c = 0; c < C; ++c) {
        const double* w = &head.weights[(static_cast<std::size_t>(o) * C + c) * P];
        const auto h = tape.channel(c).values();
        for (std::size_t k = 0; k < P; ++k) acc += w[k] * h[k];
      }
      out.values[o] += acc;
    }
    return out;
  }
  std::vector<double> map(P, head.bias[0]);
  for (int c = 0; c < C; ++c) {
    const double w = head.weights[c];
    const auto h = tape.channel(c).values();
    for (std::size_t k = 0; k < P; ++k) map[k] += w * h[k];
  }
  if (head.pooling == Pooling::Mean) {
    double s = 0.0;
    for (double v : map) s += v;
    out.values = {s / static_cast<double>(P)};
    return out;
  }
  out.values = std::move(map);
  out.width = first.width();
  out.height = first.height();
  return out;
}

}  // namespace

ForwardResult forward(const Network& net, const Image& img) {
  check_input(net, img);
  const int M = net.kernel_count, N = net.bins;
  ForwardResult res;
  ForwardTape& tape = res.tape;
  tape.input = img;
  tape.responses.reserve(M);
  tape.activations.reserve(static_cast<std::size_t>(M) * N);
  for (int j = 0; j < M; ++j) {
    tape.responses.push_back(convolve(img, net.kernels[j], net.boundary));
    const auto r = tape.responses.back().values();
    for (int i = 0; i < N; ++i) {
      const int c = j * N + i;
      const double b = net.bias[c];
      const double sigma = net.sigma(c);
      Image a(img.width(), img.height());
      auto av = a.values();
      for (std::size_t k = 0; k < av.size(); ++k) av[k] = activate(net.activation, b - r[k], sigma);
      if (!net.smoothers.empty()) {
        tape.smoothed.push_back(convolve(a, net.smoothers[j], net.boundary));
      }
      tape.activations.push_back(std::move(a));
    }
  }
  tape.output = apply_head(net.head, tape, net.channels());
  res.output = tape.output;
  return res;
}

Output predict(const Network& net, const Image& img) { return forward(net, img).output; }

ForwardResult lon_forward(const Network& net, const Image& img) {
  if (net.kind != ModelKind::Lon) throw ArgumentError("lon_forward on a non-LON network");
  return forward(net, img);
}

ForwardResult cnn_forward(const Network& net, const Image& img) {
  if (net.kind != ModelKind::Cnn) throw ArgumentError("cnn_forward on a non-CNN network");
  return forward(net, img);
}

Gradients backward(const Network& net, const ForwardTape& tape, std::span<const double> upstream,
                   bool input_gradient) {
  if (upstream.size() != tape.output.values.size()) {
    throw DimensionError("upstream gradient size does not match the forward output");
  }
  if (tape.responses.size() != static_cast<std::size_t>(net.kernel_count) ||
      tape.activations.size() != static_cast<std::size_t>(net.channels())) {
    throw DimensionError("tape does not belong to this network");
  }
  const int M = net.kernel_count, N = net.bins, C = net.channels();
  const Head& head = net.head;
  const ParamLayout layout = param_layout(net);
  Gradients grads;
  grads.params.assign(layout.total, 0.0);
  double* g_kernels = grads.params.data() + layout.find("kernels")->offset;
  double* g_bias = grads.params.data() + layout.find("bias")->offset;
  const ParamGroup* sigma_group = layout.find("log_sigma");
  double* g_log_sigma = sigma_group ? grads.params.data() + sigma_group->offset : nullptr;
  double* g_head_w = grads.params.data() + layout.find("head_weights")->offset;
  double* g_head_b = grads.params.data() + layout.find("head_bias")->offset;

  const Image& input = tape.input;
  const int w = input.width(), h = input.height();
  const std::size_t P = input.size();

  // Head: d loss / d h_c.
  std::vector<Image> dh(C, Image(w, h));
  if (head.kind == HeadKind::Dense) {
    for (int o = 0; o < head.outputs; ++o) {
      const double g = upstream[o];
      g_head_b[o] = g;
      if (g == 0.0) continue;
      for (int c = 0; c < C; ++c) {
        const std::size_t base = (static_cast<std::size_t>(o) * C + c) * P;
        const auto hc = tape.channel(c).values();
        auto d = dh[c].values();
        for (std::size_t k = 0; k < P; ++k) {
          g_head_w[base + k] = g * hc[k];
          d[k] += g * head.weights[base + k];
        }
      }
    }
  } else {
    std::vector<double> gmap(P);
    if (head.pooling == Pooling::Mean) {
      std::fill(gmap.begin(), gmap.end(), upstream[0] / static_cast<double>(P));
    } else {
      std::copy(upstream.begin(), upstream.end(), gmap.begin());
    }
    double gb = 0.0;
    for (double v : gmap) gb += v;
    g_head_b[0] = gb;
    for (int c = 0; c < C; ++c) {
      const auto hc = tape.channel(c).values();
      auto d = dh[c].values();
      double gw = 0.0;
      for (std::size_t k = 0; k < P; ++k) {
        gw += gmap[k] * hc[k];
        d[k] = gmap[k] * head.weights[c];
      }
      g_head_w[c] = gw;
    }
  }

  const std::size_t side = static_cast<std::size_t>(net.kernel_side());
  if (input_gradient) grads.input = Image(w, h);
  for (int j = 0; j < M; ++j) {
    Image dr(w, h);
    auto drv = dr.values();
    const auto r = tape.responses[j].values();
    for (int i = 0; i < N; ++i) {
      const int c = j * N + i;
      const Image da = net.smoothers.empty() ? std::move(dh[c])
                                              : convolve_adjoint(dh[c], net.smoothers[j], net.boundary);
      const auto dav = da.values();
      const auto act = tape.activations[c].values();
      const double b = net.bias[c];
      const double sigma = net.sigma(c);
      double gb = 0.0, gs = 0.0;
      for (std::size_t k = 0; k < P; ++k) {
        if (dav[k] == 0.0) continue;
        const auto e = derivatives_from_value(net.activation, b - r[k], sigma, act[k]);
        const double dv = dav[k] * e.d_v;
        gb += dv;
        gs += dav[k] * e.d_log_sigma;
        drv[k] -= dv;
      }
      g_bias[c] = gb;
      if (g_log_sigma && sigma_group->trainable) g_log_sigma[c] = gs;
    }
    const auto gk = convolve_kernel_gradient(dr, input, static_cast<int>(side), net.boundary);
    std::copy(gk.begin(), gk.end(), g_kernels + j * side * side);
    if (input_gradient) {
      const Image di = convolve_adjoint(dr, net.kernels[j], net.boundary);
      auto out = grads.input.values();
      const auto in = di.values();
      for (std::size_t k = 0; k < P; ++k) out[k] += in[k];
    }
  }
  return grads;
}

Gradients lon_backward(const Network& net, const ForwardTape& tape,
                       std::span<const double> upstream, bool input_gradient) {
  if (net.kind != ModelKind::Lon) throw ArgumentError("lon_backward on a non-LON network");
  return backward(net, tape, upstream, input_gradient);
}

Gradients cnn_backward(const Network& net, const ForwardTape& tape,
                       std::span<const double> upstream, bool input_gradient) {
  if (net.kind != ModelKind::Cnn) throw ArgumentError("cnn_backward on a non-CNN network");
  return backward(net, tape, upstream, input_gradient);
}

const ParamGroup* ParamLayout::find(std::string_view name) const {
  for (const auto& g : groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

ParamLayout param_layout(const Network& net) {
  ParamLayout layout;
  auto add = [&](std::string name, std::size_t n, bool trainable) {
    layout.groups.push_back({std::move(name), layout.total, n, trainable});
    layout.total += n;
  };
  const auto C = static_cast<std::size_t>(net.channels());
  const auto side = static_cast<std::size_t>(net.kernel_side());
  add("kernels", static_cast<std::size_t>(net.kernel_count) * side * side, true);
  add("bias", C, true);
  if (uses_width(net.activation)) add("log_sigma", C, net.sigma_learnable);
  add("head_weights", net.head.weights.size(), true);
  add("head_bias", net.head.bias.size(), true);
  return layout;
}

std::vector<double> flatten_params(const Network& net) {
  std::vector<double> p;
  p.reserve(param_layout(net).total);
  for (const auto& k : net.kernels) p.insert(p.end(), k.taps().begin(), k.taps().end());
  p.insert(p.end(), net.bias.begin(), net.bias.end());
  if (uses_width(net.activation)) p.insert(p.end(), net.log_sigma.begin(), net.log_sigma.end());
  p.insert(p.end(), net.head.weights.begin(), net.head.weights.end());
  p.insert(p.end(), net.head.bias.begin(), net.head.bias.end());
  return p;
}

void assign_params(Network& net, std::span<const double> params) {
  const auto layout = param_layout(net);
  if (params.size() != layout.total) throw DimensionError("parameter vector length mismatch");
  const double* p = params.data();
  for (auto& k : net.kernels) {
    auto t = k.mutable_taps();
    std::copy(p, p + t.size(), t.begin());
    p += t.size();
  }
  std::copy(p, p + net.bias.size(), net.bias.begin());
  p += net.bias.size();
  if (uses_width(net.activation)) {
    std::copy(p, p + net.log_sigma.size(), net.log_sigma.begin());
    p += net.log_sigma.size();
  }
  std::copy(p, p + net.head.weights.size(), net.head.weights.begin());
  p += net.head.weights.size();
  std::copy(p, p + net.head.bias.size(), net.head.bias.begin());
}

ParamCounts count_params(const Network& net) {
  const auto M = static_cast<std::size_t>(net.kernel_count);
  const auto NM = static_cast<std::size_t>(net.channels());
  const auto K = static_cast<std::size_t>(net.kernel_side()) * net.kernel_side();
  ParamCounts counts;
  if (net.head.kind == HeadKind::Dense) {
    counts.paper_formula = NM * net.head.width * net.head.height + M * K;
  } else {
    counts.paper_formula = NM + 1 + M * K;
  }
  for (const auto& g : param_layout(net).groups) {
    if (g.trainable) counts.actual += g.size;
  }
  return counts;
}

EmulatedChannels emulate_cnn_from_lon(const Network& lon, const Image& img,
                                      std::optional<double> spacing) {
  if (lon.kind != ModelKind::Lon || lon.activation != ActivationKind::GaussBell) {
    throw ArgumentError("emulation needs a LON network with bell activations");
  }
  const auto fwd = forward(lon, img);
  const int M = lon.kernel_count, N = lon.bins;
  EmulatedChannels em;
  for (int j = 0; j < M; ++j) {
    double db = 0.0;
    if (spacing) {
      db = *spacing;
    } else if (N >= 2) {
      db = lon.bias[j * N + 1] - lon.bias[j * N];
      for (int i = 1; i < N; ++i) {
        const double d = lon.bias[j * N + i] - lon.bias[j * N + i - 1];
        if (std::abs(d - db) > 1e-9 * std::max(1.0, std::abs(db))) {
          throw ArgumentError("bias grid of kernel " + std::to_string(j) + " is not regular");
        }
      }
    } else {
      db = 2.0 * lon.sigma(j * N);
    }
    if (!(db > 0.0)) throw ArgumentError("bias grid spacing must be positive");
    em.spacing.push_back(db);
    Image acc(img.width(), img.height());
    for (int i = 0; i < N; ++i) {
      const int c = j * N + i;
      const auto h = fwd.tape.channel(c).values();
      auto a = acc.values();
      for (std::size_t k = 0; k < a.size(); ++k) a[k] += h[k];
      Image scaled = acc;
      for (double& v : scaled.values()) v *= db;
      em.channels.push_back(std::move(scaled));
      em.equivalent_bias.push_back(lon.bias[c] + 0.5 * db);
    }
  }
  return em;
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Lon ? "lon" : "cnn"; }

std::string_view to_string(HeadKind kind) { return kind == HeadKind::Dense ? "dense" : "one_by_one"; }

}  // namespace lon
