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

// LONC checkpoint layout (all little-endian):
//
//   char[4] "LONC"
//   u32 version (kCheckpointVersion)
//   u32 model kind      0 = lon, 1 = cnn
//   u32 activation      0 = gauss_bell, 1 = logistic_sigmoid, 2 = integrated_bell, 3 = relu
//   u32 M, u32 N, u32 kernel side
//   u32 boundary        0 = zero pad, 1 = reflect
//   u32 sigma learnable 0/1
//   u32 head kind       0 = dense, 1 = one_by_one
//   u32 head outputs, u32 head width, u32 head height
//   u32 pooling         0 = none, 1 = mean
//   u32 smoother side   0 = delta
//   f64 kernels[M][side][side]
//   f64 bias[M*N], f64 log_sigma[M*N]
//   f64 head weights, f64 head bias[outputs]
//   per smoother (only when smoother side > 0):
//     u32 separable 0/1
//     f64 taps[wside][wside]  or  f64 along_x[wside], f64 along_y[wside]
//
// Separable smoothers keep their factors so a reloaded network takes the same
// convolution path and reproduces predictions bit for bit.

#include <cstring>
#include <fstream>
#include <iterator>

#include "lon/errors.hpp"
#include "lon/layers.hpp"
#include "lon/raster_io.hpp"

namespace lon {

void save_checkpoint(const Network& net, std::ostream& out) {
  net.validate();
  std::vector<unsigned char> buf{'L', 'O', 'N', 'C'};
  const auto u = [&](auto v) { le::put_u32(buf, static_cast<std::uint32_t>(v)); };
  u(kCheckpointVersion);
  u(net.kind == ModelKind::Lon ? 0 : 1);
  u(static_cast<int>(net.activation));
  u(net.kernel_count);
  u(net.bins);
  u(net.kernel_side());
  u(net.boundary == BoundaryMode::ZeroPad ? 0 : 1);
  u(net.sigma_learnable ? 1 : 0);
  u(net.head.kind == HeadKind::Dense ? 0 : 1);
  u(net.head.outputs);
  u(net.head.width);
  u(net.head.height);
  u(net.head.pooling == Pooling::None ? 0 : 1);
  u(net.smoothers.empty() ? 0 : net.smoothers.front().side());
  const auto f = [&](std::span<const double> vs) {
    for (double v : vs) le::put_f64(buf, v);
  };
  for (const auto& k : net.kernels) f(k.taps());
  f(net.bias);
  f(net.log_sigma);
  f(net.head.weights);
  f(net.head.bias);
  for (const auto& w : net.smoothers) {
    u(w.is_separable() ? 1 : 0);
    if (w.is_separable()) {
      f(w.factor_x());
      f(w.factor_y());
    } else {
      f(w.taps());
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing checkpoint");
}

Network load_checkpoint(std::istream& in) {
  const std::vector<unsigned char> buf{std::istreambuf_iterator<char>(in),
                                       std::istreambuf_iterator<char>()};
  std::size_t pos = 0;
  const auto need = [&](std::size_t n) {
    if (pos + n > buf.size()) throw ParseError("truncated checkpoint", buf.size());
  };
  const auto u = [&] {
    need(4);
    const auto v = le::get_u32(&buf[pos]);
    pos += 4;
    return v;
  };
  const auto f = [&](std::size_t n) {
    need(8 * n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = le::get_f64(&buf[pos + 8 * i]);
    pos += 8 * n;
    return v;
  };
  need(4);
  if (std::memcmp(buf.data(), "LONC", 4) != 0) throw ParseError("bad checkpoint magic", 0);
  pos = 4;
  if (const auto version = u(); version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 4);
  }
  Network net;
  const auto kind = u();
  const auto activation = u();
  if (kind > 1 || activation > 3) throw ParseError("bad model kind or activation tag", pos);
  net.kind = kind == 0 ? ModelKind::Lon : ModelKind::Cnn;
  net.activation = static_cast<ActivationKind>(activation);
  net.kernel_count = static_cast<int>(u());
  net.bins = static_cast<int>(u());
  const int side = static_cast<int>(u());
  net.boundary = u() == 0 ? BoundaryMode::ZeroPad : BoundaryMode::Reflect;
  net.sigma_learnable = u() != 0;
  net.head.kind = u() == 0 ? HeadKind::Dense : HeadKind::OneByOne;
  net.head.outputs = static_cast<int>(u());
  net.head.width = static_cast<int>(u());
  net.head.height = static_cast<int>(u());
  net.head.pooling = u() == 0 ? Pooling::None : Pooling::Mean;
  const int wside = static_cast<int>(u());
  if (net.kernel_count <= 0 || net.bins <= 0 || side <= 0 || net.kernel_count > 4096 ||
      net.bins > 4096 || side > 255 || net.head.outputs <= 0 || net.head.width > 1 << 14 ||
      net.head.height > 1 << 14) {
    throw ParseError("implausible checkpoint dimensions", pos);
  }
  const auto C = static_cast<std::size_t>(net.kernel_count) * net.bins;
  const auto taps = static_cast<std::size_t>(side) * side;
  for (int j = 0; j < net.kernel_count; ++j) net.kernels.emplace_back(side, f(taps));
  net.bias = f(C);
  net.log_sigma = f(C);
  const std::size_t head_weights =
      net.head.kind == HeadKind::Dense
          ? static_cast<std::size_t>(net.head.outputs) * C * net.head.width * net.head.height
          : C;
  net.head.weights = f(head_weights);
  net.head.bias = f(static_cast<std::size_t>(net.head.outputs));
  if (wside > 0) {
    for (int j = 0; j < net.kernel_count; ++j) {
      if (u() != 0) {
        auto along_x = f(static_cast<std::size_t>(wside));
        net.smoothers.push_back(Kernel::separable(std::move(along_x), f(static_cast<std::size_t>(wside))));
      } else {
        net.smoothers.emplace_back(wside, f(static_cast<std::size_t>(wside) * wside));
      }
    }
  }
  net.validate();
  return net;
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save_checkpoint(net, out);
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return load_checkpoint(in);
}

}  // namespace lon
