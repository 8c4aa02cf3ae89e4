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

#include "gtest/gtest.h"
#include "lon/analysis.hpp"
#include "lon/datasets.hpp"
#include "lon/errors.hpp"
#include "test_util.hpp"

namespace lon {
namespace {

using std::numbers::pi;
using testing::RandomImage;

constexpr double kSqrt2Pi = 2.5066282746310002;

double RelativeRmse(const Image& est, const Image& ref, int border) {
  double num = 0.0, den = 0.0;
  for (int y = border; y < ref.height() - border; ++y) {
    for (int x = border; x < ref.width() - border; ++x) {
      num += (est.at(x, y) - ref.at(x, y)) * (est.at(x, y) - ref.at(x, y));
      den += ref.at(x, y) * ref.at(x, y);
    }
  }
  return std::sqrt(num / den);
}

TEST(HistogramTest, ConstantImageGivesClosedFormBell) {
  const auto bins = bin_centres(0.0, 1.0, 5);
  const auto stack = local_histogram(Image(6, 6, 0.37), Kernel::identity(1), std::nullopt, bins, 0.1);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double expect = std::exp(-(bins[i] - 0.37) * (bins[i] - 0.37) / (2 * 0.01));
    for (double v : stack.planes[i].values()) EXPECT_NEAR(v, expect, 1e-15);
  }
  EXPECT_THROW(local_histogram(Image(6, 6), Kernel::identity(1), std::nullopt, bins, 0.0),
               ArgumentError);
}

TEST(HistogramTest, TwoValuedImageSplitsMassByPixelCount) {
  Image img(32, 32, 0.8);
  for (int y = 0; y < 32; y += 2) {
    for (int x = 0; x < 32; x += 2) img.at(x, y) = 0.2;
  }
  const std::vector<double> bins{0.2, 0.8};
  const auto stack = local_histogram(img, Kernel::identity(1), gaussian_kernel(3.0), bins, 0.05);
  const auto p = probe_at(stack, 16, 16, 3.0);
  EXPECT_NEAR(p.values[0] / p.values[1], 1.0 / 3.0, 0.05 / 3.0);
  for (double v : p.values) EXPECT_GE(v, 0.0);
  EXPECT_THROW(probe_at(stack, 32, 0, 3.0), DimensionError);
}

TEST(HistogramTest, CoveringGridSumsToBellIntegral) {
  const Image img = RandomImage(8, 8, 2);
  const double sigma = 0.04;
  const int n = 60;
  const auto bins = bin_centres(-6 * sigma, 1 + 6 * sigma, n);
  const double db = bins[1] - bins[0];
  const auto stack = local_histogram(img, Kernel::identity(1), std::nullopt, bins, sigma);
  for (std::size_t p = 0; p < img.size(); ++p) {
    double s = 0.0;
    for (const auto& plane : stack.planes) s += plane[p];
    EXPECT_NEAR(s * db / (sigma * kSqrt2Pi), 1.0, 0.02);
  }
}

TEST(LusTest, UnitWeightsGiveOne) {
  const auto bins = bin_centres(0.0, 1.0, 6);
  const auto stack = local_histogram(RandomImage(8, 8, 3), Kernel::identity(1), std::nullopt, bins,
                                     1.0 / 12);
  const std::vector<double> ones(6, 1.0);
  const Image e = lus_expectation(stack, ones);
  for (double v : e.values()) EXPECT_NEAR(v, 1.0, 1e-14);
  EXPECT_THROW(lus_expectation(stack, std::vector<double>(5, 1.0)), DimensionError);
}

TEST(LusTest, MeanRecoveryWithinHalfABin) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Image img = RandomImage(8, 8, 10 + seed);
    const int n = 10;
    const auto bins = bin_centres(0.0, 1.0, n);
    const double db = 1.0 / n;
    const auto stack = local_histogram(img, Kernel::identity(1), std::nullopt, bins, db / 2);
    const Image mean = lus_expectation(stack, bins);
    // Outside the span of bin centres the grid is one-sided and pulls inward.
    for (std::size_t p = 0; p < img.size(); ++p) {
      if (img[p] < bins.front() || img[p] > bins.back()) continue;
      EXPECT_LE(std::abs(mean[p] - img[p]), db / 2);
    }
  }
}

TEST(Grad2Test, ConstantImageIsZero) {
  const auto est = grad2_estimator(Image(20, 20, 0.6));
  // Derivative filters leave rounding noise of order 1e-19, squared here.
  for (double v : est.value.values()) EXPECT_NEAR(v, 0.0, 1e-20);
}

TEST(Grad2Test, RampGivesOneOnTheInterior) {
  Image ramp(48, 48);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) ramp.at(x, y) = x;
  }
  const auto est = grad2_estimator(ramp);
  EXPECT_EQ(est.bins.size(), 8u);
  for (int y = 14; y < 34; ++y) {
    for (int x = 14; x < 34; ++x) EXPECT_NEAR(est.value.at(x, y), 1.0, 0.02);
  }
}

TEST(Grad2Test, TracksDirectFormulaOnBlobs) {
  for (const auto& s : generate_blobs(7, 3)) {
    const auto est = grad2_estimator(s.image);
    EXPECT_FALSE(est.grid_warning);
    EXPECT_LT(RelativeRmse(est.value, grad2_direct(s.image, 3.0, 1.0), 0), 0.10);
  }
}

TEST(Grad2Test, InvariantToAddedConstant) {
  const Image img = generate_blobs(8, 1)[0].image;
  Image shifted = img;
  for (double& v : shifted.values()) v += 0.75;
  const Image a = grad2_estimator(img).value, b = grad2_estimator(shifted).value;
  for (std::size_t p = 0; p < a.size(); ++p) EXPECT_NEAR(a[p], b[p], 1e-6);
}

TEST(Grad2Test, ScalesQuadratically) {
  const Image img = generate_blobs(8, 1)[0].image;
  Grad2Options o;
  const auto base = grad2_estimator(img, o);
  for (double u : {0.5, 2.0}) {
    Image scaled = img;
    for (double& v : scaled.values()) v *= u;
    const Image e = grad2_estimator(scaled, o).value;
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < e.size(); ++p) {
      num += std::abs(e[p] - u * u * base.value[p]);
      den += u * u * std::abs(base.value[p]);
    }
    EXPECT_LT(num / den, 0.02);
  }
}

TEST(Grad2Test, NarrowGridRaisesWarning) {
  const Image img = generate_blobs(8, 1)[0].image;
  Grad2Options o;
  o.range = 0.01;
  EXPECT_TRUE(grad2_estimator(img, o).grid_warning);
  o.range = -1.0;
  EXPECT_THROW(grad2_estimator(img, o), ArgumentError);
}

class ShapeEstimatorTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { cal_ = calibrate_on_disk({}); }
  static Calibration cal_;
};
Calibration ShapeEstimatorTest::cal_;

TEST_F(ShapeEstimatorTest, BlankImage) {
  const ShapeEstimatorOptions o;
  const double bound = 128.0 * 128.0 * std::exp(-0.125 / (o.tonal_sigma * o.tonal_sigma));
  EXPECT_LE(circumference_raw(Image(128, 128), o), bound * (1 + 1e-12));
  EXPECT_LT(bound, 0.1);
  EXPECT_NEAR(area_raw(Image(128, 128), o), 0.0, 1.0);
  EXPECT_NEAR(area_raw(Image(128, 128, 1.0), o), 128.0 * 128.0, 1.0);
}

TEST_F(ShapeEstimatorTest, RawCircumferenceIsProportionalToRadius) {
  const ShapeEstimatorOptions o;
  std::vector<double> ratio;
  for (double r : {20.0, 30.0, 40.0}) {
    ratio.push_back(circumference_raw(make_disk(128, 63.5, 63.5, r), o) / r);
  }
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  EXPECT_LT(*hi / *lo - 1.0, 0.05);
}

TEST_F(ShapeEstimatorTest, CalibratedEstimatesOnDisks) {
  for (double r : {20.0, 25.0, 30.0, 40.0}) {
    const Image disk = make_disk(128, 63.5, 63.5, r);
    EXPECT_NEAR(circumference_estimator(disk, cal_) / (2 * pi * r), 1.0, 0.10) << r;
    EXPECT_NEAR(area_estimator(disk, cal_) / (pi * r * r), 1.0, 0.03) << r;
  }
}

TEST_F(ShapeEstimatorTest, TranslationInvariance) {
  const ShapeEstimatorOptions o;
  const double a = circumference_raw(make_disk(128, 50.0, 60.0, 20.0), o);
  const double b = circumference_raw(make_disk(128, 73.0, 67.0, 20.0), o);
  EXPECT_NEAR(a, b, 1e-9 * a);
}

TEST(SaliencyTest, ZeroHeadGivesZeroMap) {
  NetworkSpec spec;
  spec.bins = 2;
  spec.head = HeadKind::Dense;
  spec.outputs = 3;
  spec.width = spec.height = 8;
  const Image img = RandomImage(8, 8, 4);
  Network net = build_network(spec, 1, std::span(&img, 1));
  std::fill(net.head.weights.begin(), net.head.weights.end(), 0.0);
  const auto s = saliency(net, Example{img, {}, 2}, LossKind::SoftmaxCrossEntropy, "a", "m");
  for (double v : s.map.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(s.true_class, 2);
  EXPECT_EQ(s.sample_id, "a");
}

TEST(SaliencyTest, MatchesPixelPerturbation) {
  NetworkSpec spec;
  spec.bins = 2;
  spec.head = HeadKind::Dense;
  spec.outputs = 3;
  spec.width = spec.height = 8;
  const Image img = RandomImage(8, 8, 5);
  const Network net = build_network(spec, 2, std::span(&img, 1));
  const Example ex{img, {}, 0};
  const auto s = saliency(net, ex, LossKind::SoftmaxCrossEntropy, "a", "m");
  ASSERT_TRUE(s.map.same_shape(img));
  for (double v : s.map.values()) EXPECT_GE(v, 0.0);
  const double h = 1e-6;
  for (int k : {0, 9, 27, 40, 63}) {
    Example up = ex, down = ex;
    up.input[k] += h;
    down.input[k] -= h;
    const double lu = loss(LossKind::SoftmaxCrossEntropy, predict(net, up.input).values, ex).value;
    const double ld = loss(LossKind::SoftmaxCrossEntropy, predict(net, down.input).values, ex).value;
    const double num = std::abs((lu - ld) / (2 * h));
    EXPECT_LE(std::abs(num - s.map[k]), 1e-4 * std::max({num, s.map[k], 1e-6}));
  }
  ASSERT_TRUE(s.predicted_class.has_value());
}

TEST(BoundaryBandTest, SquareBand) {
  Image mask(12, 12);
  for (int y = 3; y < 9; ++y) {
    for (int x = 3; x < 9; ++x) mask.at(x, y) = 1.0;
  }
  const auto band = boundary_band(mask, 1.0);
  // Reach 1.5 px: the outer ring of the square and the ring just outside it.
  EXPECT_TRUE(band[3 * 12 + 3]);
  EXPECT_TRUE(band[2 * 12 + 5]);
  EXPECT_FALSE(band[5 * 12 + 5]);
  EXPECT_FALSE(band[0]);
  EXPECT_TRUE(band[2 * 12 + 2]);  // diagonal distance sqrt(2) < 1.5
  Image sal(12, 12);
  sal.at(3, 3) = 2.0;
  sal.at(5, 5) = 2.0;
  EXPECT_DOUBLE_EQ(boundary_mass_ratio(sal, mask, 1.0), 0.5);
  EXPECT_EQ(boundary_mass_ratio(Image(12, 12), mask, 1.0), 0.0);
  EXPECT_THROW(boundary_mass_ratio(Image(3, 3), mask), DimensionError);
}

}  // namespace
}  // namespace lon
