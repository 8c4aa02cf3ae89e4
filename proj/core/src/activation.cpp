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

#include "lon/activation.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lon/errors.hpp"

namespace lon {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

double activate(ActivationKind kind, double v, double sigma) {
  switch (kind) {
    case ActivationKind::GaussBell:
      return std::exp(-0.5 * (v * v) / (sigma * sigma));
    case ActivationKind::LogisticSigmoid:
      return logistic(v / sigma);
    case ActivationKind::IntegratedBell:
      return sigma * kSqrt2Pi * 0.5 * std::erfc(-v / (sigma * std::numbers::sqrt2));
    case ActivationKind::ReLU:
      return v > 0.0 ? v : 0.0;
  }
  return 0.0;
}

ActivationEval activate_with_derivatives(ActivationKind kind, double v, double sigma) {
  switch (kind) {
    case ActivationKind::GaussBell: {
      const double f = std::exp(-0.5 * (v * v) / (sigma * sigma));
      const double q = v / sigma;
      return {f, -v / (sigma * sigma) * f, q * q * f};
    }
    case ActivationKind::LogisticSigmoid: {
      const double s = logistic(v / sigma);
      const double ds = s * (1.0 - s);
      return {s, ds / sigma, -ds * v / sigma};
    }
    case ActivationKind::IntegratedBell: {
      // g' = f exactly; d g / d log sigma = g - v f.
      const double f = std::exp(-0.5 * (v * v) / (sigma * sigma));
      const double g = sigma * kSqrt2Pi * 0.5 * std::erfc(-v / (sigma * std::numbers::sqrt2));
      return {g, f, g - v * f};
    }
    case ActivationKind::ReLU:
      // Subgradient at 0 is 0.
      return v > 0.0 ? ActivationEval{v, 1.0, 0.0} : ActivationEval{0.0, 0.0, 0.0};
  }
  return {0.0, 0.0, 0.0};
}

ActivationEval derivatives_from_value(ActivationKind kind, double v, double sigma, double value) {
  switch (kind) {
    case ActivationKind::GaussBell: {
      const double q = v / sigma;
      return {value, -q / sigma * value, q * q * value};
    }
    case ActivationKind::LogisticSigmoid: {
      const double ds = value * (1.0 - value);
      return {value, ds / sigma, -ds * v / sigma};
    }
    case ActivationKind::IntegratedBell: {
      const double f = std::exp(-0.5 * (v * v) / (sigma * sigma));
      return {value, f, value - v * f};
    }
    case ActivationKind::ReLU:
      return v > 0.0 ? ActivationEval{v, 1.0, 0.0} : ActivationEval{0.0, 0.0, 0.0};
  }
  return {0.0, 0.0, 0.0};
}

bool uses_width(ActivationKind kind) { return kind != ActivationKind::ReLU; }

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::GaussBell: return "gauss_bell";
    case ActivationKind::LogisticSigmoid: return "logistic_sigmoid";
    case ActivationKind::IntegratedBell: return "integrated_bell";
    case ActivationKind::ReLU: return "relu";
  }
  return "?";
}

ActivationKind parse_activation(std::string_view name) {
  if (name == "gauss_bell" || name == "bell") return ActivationKind::GaussBell;
  if (name == "logistic_sigmoid" || name == "sigmoid") return ActivationKind::LogisticSigmoid;
  if (name == "integrated_bell") return ActivationKind::IntegratedBell;
  if (name == "relu") return ActivationKind::ReLU;
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

}  // namespace lon
