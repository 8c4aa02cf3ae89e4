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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gtest/gtest.h"
#include "lon/activation.hpp"
#include "lon/errors.hpp"
#include "lon/layers.hpp"
#include "oracle_values.hpp"
#include "test_util.hpp"

namespace lon {
namespace {

using testing::HandNetwork;
using testing::RandomImage;
using testing::TinyImage;
using testing::TinyKernel;

constexpr double kSqrt2Pi = 2.5066282746310002;

TEST(ActivationTest, BellPeakIsOneForEverySigma) {
  for (double s : {10.0, 1.0, 0.1, 0.01}) EXPECT_EQ(activate(ActivationKind::GaussBell, 0.0, s), 1.0);
}

TEST(ActivationTest, BellAndSigmoidLimitsConvergeMonotonically) {
  for (double v : {0.5, -0.05, 0.02}) {
    double prev_bell = 2.0, prev_step = 2.0;
    for (double s : {1.0, 0.1, 0.01}) {
      const double bell = activate(ActivationKind::GaussBell, v, s);
      const double step = std::abs(activate(ActivationKind::LogisticSigmoid, v, s) - (v > 0 ? 1.0 : 0.0));
      EXPECT_LT(bell, prev_bell);
      EXPECT_LT(step, prev_step);
      prev_bell = bell;
      prev_step = step;
    }
    EXPECT_LT(prev_bell, 0.5);
  }
  EXPECT_LT(activate(ActivationKind::GaussBell, 0.5, 0.01), 1e-300);
  EXPECT_EQ(activate(ActivationKind::LogisticSigmoid, 0.5, 0.01), 1.0);
}

TEST(ActivationTest, IntegratedBellMatchesQuadrature) {
  for (int i = 0; i < 5; ++i) {
    const double v = oracle::kIntegratedBellArgs[2 * i], s = oracle::kIntegratedBellArgs[2 * i + 1];
    EXPECT_NEAR(activate(ActivationKind::IntegratedBell, v, s), oracle::kIntegratedBellValues[i], 1e-8);
  }
}

TEST(ActivationTest, IntegratedBellSlopeIsTheBell) {
  for (double v : {-0.4, 0.0, 0.13, 2.0}) {
    const auto e = activate_with_derivatives(ActivationKind::IntegratedBell, v, 0.3);
    EXPECT_EQ(e.d_v, activate(ActivationKind::GaussBell, v, 0.3));
  }
}

TEST(ActivationTest, DerivativesFromValueAgree) {
  for (auto kind : {ActivationKind::GaussBell, ActivationKind::LogisticSigmoid,
                    ActivationKind::IntegratedBell, ActivationKind::ReLU}) {
    for (double v : {-1.2, -0.01, 0.0, 0.3, 4.0}) {
      const auto a = activate_with_derivatives(kind, v, 0.4);
      const auto b = derivatives_from_value(kind, v, 0.4, activate(kind, v, 0.4));
      EXPECT_DOUBLE_EQ(a.value, b.value);
      EXPECT_DOUBLE_EQ(a.d_v, b.d_v);
      EXPECT_DOUBLE_EQ(a.d_log_sigma, b.d_log_sigma);
    }
  }
}

TEST(ActivationTest, ReluSubgradientAtZeroIsZero) {
  EXPECT_EQ(activate_with_derivatives(ActivationKind::ReLU, 0.0, 1.0).d_v, 0.0);
  EXPECT_EQ(activate_with_derivatives(ActivationKind::ReLU, 1e-9, 1.0).d_v, 1.0);
}

TEST(ActivationTest, ParseNames) {
  EXPECT_EQ(parse_activation("gauss_bell"), ActivationKind::GaussBell);
  EXPECT_EQ(parse_activation("sigmoid"), ActivationKind::LogisticSigmoid);
  EXPECT_EQ(parse_activation("integrated_bell"), ActivationKind::IntegratedBell);
  EXPECT_EQ(parse_activation("relu"), ActivationKind::ReLU);
  EXPECT_THROW(parse_activation("tanh"), ArgumentError);
}

TEST(LonForwardTest, MatchesReferenceOnTinyInput) {
  const Network net = HandNetwork(ModelKind::Lon, ActivationKind::GaussBell, TinyKernel(),
                                  {0.2, 0.5}, {0.15, 0.25}, {0.7, -0.4}, 0.1);
  const Output out = forward(net, TinyImage()).output;
  ASSERT_EQ(out.values.size(), 25u);
  EXPECT_EQ(out.width, 5);
  for (int i = 0; i < 25; ++i) EXPECT_NEAR(out.values[i], oracle::kTinyLonOutput[i], 1e-12);
}

TEST(LonForwardTest, ConstantImageAtBiasGivesOne) {
  const Kernel k(3, {0.1, 0.2, 0.0, -0.1, 0.3, 0.1, 0.0, 0.05, 0.15});
  const double c = 0.7;
  const Network net =
      HandNetwork(ModelKind::Lon, ActivationKind::GaussBell, k, {c * k.sum()}, {0.1}, {1.0}, 0.0);
  const auto fwd = forward(net, Image(6, 6, c));
  for (double v : fwd.tape.activations[0].values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(LonForwardTest, FarBiasGivesNegligibleChannel) {
  const Network net = HandNetwork(ModelKind::Lon, ActivationKind::GaussBell, Kernel::identity(3),
                                  {0.4 + 10 * 0.1}, {0.1}, {1.0}, 0.0);
  const auto fwd = forward(net, Image(6, 6, 0.4));
  for (double v : fwd.tape.activations[0].values()) EXPECT_LE(v, std::exp(-50.0) * (1 + 1e-9));
}

TEST(LonForwardTest, QuasiInterpolationSumIsConstant) {
  const Image img = RandomImage(8, 8, 21);
  const double sigma = 0.05, db = sigma;
  std::vector<double> bias, sig, w;
  for (double b = -6 * sigma; b <= 1.0 + 6 * sigma; b += db) {
    bias.push_back(b);
    sig.push_back(sigma);
    w.push_back(1.0);
  }
  const Network net = HandNetwork(ModelKind::Lon, ActivationKind::GaussBell, Kernel::identity(1),
                                  bias, sig, w, 0.0);
  const double expect = sigma * kSqrt2Pi / db;
  for (double v : forward(net, img).output.values) EXPECT_NEAR(v / expect, 1.0, 0.02);
}

TEST(LonForwardTest, DenseHeadRejectsWrongSize) {
  NetworkSpec spec;
  spec.head = HeadKind::Dense;
  spec.width = spec.height = 6;
  const Image init(6, 6, 0.5);
  const Network net = build_network(spec, 1, std::span(&init, 1));
  EXPECT_NO_THROW(forward(net, init));
  EXPECT_THROW(forward(net, Image(7, 6)), DimensionError);
}

TEST(LonForwardTest, ReplayIsBitIdentical) {
  NetworkSpec spec;
  spec.bins = 3;
  const Image img = RandomImage(9, 9, 3);
  const Network net = build_network(spec, 5, std::span(&img, 1));
  const auto a = forward(net, img);
  const auto b = forward(net, a.tape.input);
  EXPECT_EQ(a.output.values, b.output.values);
  EXPECT_EQ(a.tape.activations, b.tape.activations);
  EXPECT_EQ(predict(net, img).values, a.output.values);
}

TEST(CnnForwardTest, MatchesReferenceOnTinyInput) {
  const Network net = HandNetwork(ModelKind::Cnn, ActivationKind::LogisticSigmoid, TinyKernel(),
                                  {0.3}, {0.2}, {0.6}, -0.2);
  const Output out = forward(net, TinyImage()).output;
  for (int i = 0; i < 25; ++i) EXPECT_NEAR(out.values[i], oracle::kTinyCnnSigmoidOutput[i], 1e-12);
}

TEST(CnnForwardTest, SigmoidAtResponseIsOneHalf) {
  const Network net = HandNetwork(ModelKind::Cnn, ActivationKind::LogisticSigmoid,
                                  Kernel::identity(3), {0.25}, {0.3}, {1.0}, 0.0);
  for (double v : forward(net, Image(5, 5, 0.25)).output.values) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(CnnForwardTest, ReluSignConvention) {
  const Network net = HandNetwork(ModelKind::Cnn, ActivationKind::ReLU, Kernel::identity(1), {0.0},
                                  {1.0}, {1.0}, 0.0);
  for (double v : forward(net, RandomImage(6, 6, 4)).output.values) EXPECT_EQ(v, 0.0);
}

TEST(CnnForwardTest, IntegratedBellChannelMatchesQuadrature) {
  const double c = 0.3;
  for (int i = 0; i < 5; ++i) {
    const double v = oracle::kIntegratedBellArgs[2 * i], s = oracle::kIntegratedBellArgs[2 * i + 1];
    const Network net = HandNetwork(ModelKind::Cnn, ActivationKind::IntegratedBell,
                                    Kernel::identity(1), {c + v}, {s}, {1.0}, 0.0);
    for (double out : forward(net, Image(3, 3, c)).output.values) {
      EXPECT_NEAR(out, oracle::kIntegratedBellValues[i], 1e-8);
    }
  }
}

TEST(BackwardTest, ZeroUpstreamGivesZeroGradients) {
  NetworkSpec spec;
  spec.bins = 2;
  const Image img = RandomImage(5, 5, 7);
  const Network net = build_network(spec, 2, std::span(&img, 1));
  const auto fwd = forward(net, img);
  const std::vector<double> zero(fwd.output.values.size(), 0.0);
  const Gradients g = backward(net, fwd.tape, zero, true);
  for (double v : g.params) EXPECT_EQ(v, 0.0);
  for (double v : g.input.values()) EXPECT_EQ(v, 0.0);
}

TEST(BackwardTest, BiasGradientVanishesAtBellPeak) {
  const Network net = HandNetwork(ModelKind::Lon, ActivationKind::GaussBell, Kernel::identity(1),
                                  {0.4}, {0.2}, {1.0}, 0.0);
  const auto fwd = forward(net, Image(3, 3, 0.4));
  const std::vector<double> up(9, 1.0);
  const Gradients g = backward(net, fwd.tape, up);
  EXPECT_EQ(g.params[param_layout(net).find("bias")->offset], 0.0);
}

TEST(BackwardTest, DeadReluGivesZeroKernelGradient) {
  const Network net = HandNetwork(ModelKind::Cnn, ActivationKind::ReLU, TinyKernel(), {-5.0}, {1.0},
                                  {1.0}, 0.0);
  const auto fwd = forward(net, TinyImage());
  const std::vector<double> up(25, 1.0);
  const Gradients g = backward(net, fwd.tape, up, true);
  const auto* k = param_layout(net).find("kernels");
  for (std::size_t i = 0; i < k->size; ++i) EXPECT_EQ(g.params[k->offset + i], 0.0);
}

TEST(ParamLayoutTest, FlattenAssignRoundTrip) {
  NetworkSpec spec;
  spec.bins = 4;
  spec.head = HeadKind::Dense;
  spec.outputs = 3;
  spec.width = spec.height = 5;
  const Image img = RandomImage(5, 5, 8);
  Network net = build_network(spec, 9, std::span(&img, 1));
  const auto layout = param_layout(net);
  std::vector<std::string> names;
  for (const auto& g : layout.groups) names.push_back(g.name);
  EXPECT_EQ(names, (std::vector<std::string>{"kernels", "bias", "log_sigma", "head_weights", "head_bias"}));
  auto p = flatten_params(net);
  ASSERT_EQ(p.size(), layout.total);
  for (double& v : p) v += 0.25;
  assign_params(net, p);
  EXPECT_EQ(flatten_params(net), p);
  EXPECT_THROW(assign_params(net, std::vector<double>(3)), DimensionError);
}

TEST(ParamLayoutTest, FrozenSigmaIsNotCountedAsActual) {
  NetworkSpec spec;
  spec.bins = 2;
  spec.sigma_learnable = false;
  const Image img = RandomImage(5, 5, 8);
  const Network net = build_network(spec, 9, std::span(&img, 1));
  EXPECT_FALSE(param_layout(net).find("log_sigma")->trainable);
  EXPECT_EQ(count_params(net).actual, 18u + 4u + 4u + 1u);
}

TEST(CountParamsTest, DenseFormulas) {
  NetworkSpec spec;
  spec.head = HeadKind::Dense;
  spec.width = spec.height = 128;
  spec.kernels = 2;
  spec.kernel_side = 3;
  const Image init(128, 128, 0.5);
  spec.kind = ModelKind::Cnn;
  spec.activation = ActivationKind::ReLU;
  spec.bins = 1;
  EXPECT_EQ(count_params(build_network(spec, 1, std::span(&init, 1))).paper_formula, 32786u);
  spec.kind = ModelKind::Lon;
  spec.activation = ActivationKind::GaussBell;
  spec.bins = 2;
  EXPECT_EQ(count_params(build_network(spec, 1, std::span(&init, 1))).paper_formula, 65554u);
}

TEST(CountParamsTest, OneByOneGradNetsStayInPublishedRange) {
  const Image init = RandomImage(28, 28, 1);
  for (int bins : {1, 2, 8}) {
    NetworkSpec spec;
    spec.bins = bins;
    if (bins == 1) {
      spec.kind = ModelKind::Cnn;
      spec.activation = ActivationKind::LogisticSigmoid;
    }
    const auto n = count_params(build_network(spec, 1, std::span(&init, 1))).paper_formula;
    EXPECT_GE(n, 21u);
    EXPECT_LE(n, 35u);
  }
}

TEST(BuildNetworkTest, BiasGridSpansTheResponseRange) {
  NetworkSpec spec;
  spec.kernels = 1;
  spec.bins = 4;
  const Image img = RandomImage(10, 10, 11);
  const Network net = build_network(spec, 3, std::span(&img, 1));
  const Image r = convolve(img, net.kernels[0], net.boundary);
  const auto [lo, hi] = std::minmax_element(r.values().begin(), r.values().end());
  const double db = (*hi - *lo) / 3;
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(net.bias[i], *lo + i * db, 1e-12);
    EXPECT_NEAR(net.sigma(i), db / 2, 1e-12);
  }
  EXPECT_NEAR(net.bias[3], *hi, 1e-12);
  for (double t : net.kernels[0].taps()) EXPECT_LE(std::abs(t), 1.0 / 9);
  EXPECT_EQ(flatten_params(build_network(spec, 3, std::span(&img, 1))), flatten_params(net));
  EXPECT_NE(flatten_params(build_network(spec, 4, std::span(&img, 1))), flatten_params(net));
}

TEST(BuildNetworkTest, SingleBiasSitsMidRange) {
  NetworkSpec spec;
  spec.kind = ModelKind::Cnn;
  spec.activation = ActivationKind::LogisticSigmoid;
  spec.kernels = 1;
  const Image img = RandomImage(10, 10, 12);
  const Network net = build_network(spec, 3, std::span(&img, 1));
  const Image r = convolve(img, net.kernels[0], net.boundary);
  const auto [lo, hi] = std::minmax_element(r.values().begin(), r.values().end());
  EXPECT_NEAR(net.bias[0], 0.5 * (*lo + *hi), 1e-12);
  EXPECT_NEAR(net.sigma(0), 0.5 * (*hi - *lo), 1e-12);
}

TEST(PermutationTest, SwappingKernelsWithHeadWeightsKeepsOutput) {
  NetworkSpec spec;
  spec.kernels = 2;
  spec.bins = 3;
  const Image img = RandomImage(8, 8, 12);
  const Network net = build_network(spec, 6, std::span(&img, 1));
  Network swapped = net;
  std::swap(swapped.kernels[0], swapped.kernels[1]);
  for (int i = 0; i < 3; ++i) {
    std::swap(swapped.bias[i], swapped.bias[3 + i]);
    std::swap(swapped.log_sigma[i], swapped.log_sigma[3 + i]);
    std::swap(swapped.head.weights[i], swapped.head.weights[3 + i]);
  }
  const auto a = predict(net, img).values;
  const auto b = predict(swapped, img).values;
  // Channel accumulation order changes, so allow a few ulps.
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-15);
}

Network EmulationNet(int n, double sigma, const Image& img) {
  const auto [mn, mx] = std::minmax_element(img.values().begin(), img.values().end());
  const double lo = *mn - 6 * sigma, hi = *mx + 6 * sigma;
  const double db = (hi - lo) / n;
  std::vector<double> bias, sig;
  for (int i = 0; i < n; ++i) {
    bias.push_back(lo + (i + 0.5) * db);
    sig.push_back(sigma);
  }
  return HandNetwork(ModelKind::Lon, ActivationKind::GaussBell, Kernel::identity(1), bias, sig,
                     std::vector<double>(n, 1.0), 0.0);
}

Image EmulationImage() {
  Image img(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) img.at(x, y) = 0.5 + 0.3 * std::sin(0.9 * x + 0.4) * std::cos(0.7 * y - 0.2);
  }
  return img;
}

double EmulationDeviation(int n) {
  const double sigma = 0.1;
  const Image img = EmulationImage();
  const Network net = EmulationNet(n, sigma, img);
  const auto em = emulate_cnn_from_lon(net, img);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < img.size(); ++p) {
      const double ref = activate(ActivationKind::IntegratedBell, em.equivalent_bias[i] - img[p], sigma);
      worst = std::max(worst, std::abs(em.channels[i][p] - ref));
    }
  }
  return worst / (sigma * kSqrt2Pi);
}

TEST(EmulationTest, DeviationMatchesReferenceAndShrinks) {
  double prev = 1e9;
  for (int k = 0; k < 3; ++k) {
    const int n = static_cast<int>(oracle::kEmulationBins[k]);
    const double d = EmulationDeviation(n);
    EXPECT_NEAR(d, oracle::kEmulationDeviation[k], 1e-6 + 1e-6 * oracle::kEmulationDeviation[k]);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(EmulationTest, SingleBinIsBellTimesSpacing) {
  const Image img = EmulationImage();
  const Network net = HandNetwork(ModelKind::Lon, ActivationKind::GaussBell, Kernel::identity(1),
                                  {0.5}, {0.1}, {1.0}, 0.0);
  const auto em = emulate_cnn_from_lon(net, img, 0.3);
  const auto fwd = forward(net, img);
  for (std::size_t p = 0; p < img.size(); ++p) {
    EXPECT_DOUBLE_EQ(em.channels[0][p], 0.3 * fwd.tape.activations[0][p]);
  }
  EXPECT_DOUBLE_EQ(emulate_cnn_from_lon(net, img).spacing[0], 0.2);
}

TEST(EmulationTest, CumulativeChannelsAreNonDecreasing) {
  const Image img = EmulationImage();
  const auto em = emulate_cnn_from_lon(EmulationNet(16, 0.1, img), img);
  for (int i = 1; i < 16; ++i) {
    for (std::size_t p = 0; p < img.size(); ++p) EXPECT_GE(em.channels[i][p], em.channels[i - 1][p]);
  }
}

TEST(EmulationTest, RejectsIrregularGridAndCnn) {
  const Image img = EmulationImage();
  Network net = EmulationNet(4, 0.1, img);
  net.bias[2] += 0.01;
  EXPECT_THROW(emulate_cnn_from_lon(net, img), ArgumentError);
  const Network cnn = HandNetwork(ModelKind::Cnn, ActivationKind::ReLU, Kernel::identity(1), {0.0},
                                  {1.0}, {1.0}, 0.0);
  EXPECT_THROW(emulate_cnn_from_lon(cnn, img), ArgumentError);
}

TEST(CheckpointTest, RoundTripPreservesEverything) {
  NetworkSpec spec;
  spec.bins = 2;
  spec.head = HeadKind::Dense;
  spec.outputs = 3;
  spec.width = 6;
  spec.height = 5;
  spec.smoother_sigma = 0.3;
  spec.sigma_learnable = false;
  const Image img = RandomImage(6, 5, 13);
  const Network net = build_network(spec, 14, std::span(&img, 1));
  std::stringstream ss;
  save_checkpoint(net, ss);
  EXPECT_EQ(ss.str().substr(0, 4), "LONC");
  const Network back = load_checkpoint(ss);
  EXPECT_EQ(flatten_params(back), flatten_params(net));
  EXPECT_EQ(param_layout(back), param_layout(net));
  EXPECT_EQ(back.smoothers.size(), 2u);
  EXPECT_EQ(back.head.kind, HeadKind::Dense);
  EXPECT_EQ(predict(back, img).values, predict(net, img).values);
}

TEST(CheckpointTest, CorruptInputIsParseError) {
  NetworkSpec spec;
  const Image img = RandomImage(5, 5, 15);
  std::stringstream ss;
  save_checkpoint(build_network(spec, 1, std::span(&img, 1)), ss);
  const std::string bytes = ss.str();
  std::stringstream bad_magic("XONC" + bytes.substr(4));
  EXPECT_THROW(load_checkpoint(bad_magic), ParseError);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(load_checkpoint(truncated), ParseError);
  std::string future = bytes;
  future[4] = 9;
  std::stringstream version(future);
  EXPECT_THROW(load_checkpoint(version), ParseError);
}

}  // namespace
}  // namespace lon
