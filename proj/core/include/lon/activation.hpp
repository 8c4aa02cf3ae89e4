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

#include <string>
#include <string_view>

namespace lon {

// Pointwise nonlinearities evaluated at v = b - (I*K)(x) with width sigma.
//   GaussBell        f(v) = exp(-v^2 / (2 sigma^2)),           f(0) = 1
//   IntegratedBell   g(v) = integral of f from -inf to v
//                         = sigma * sqrt(2 pi) * Phi(v / sigma)
//   LogisticSigmoid  s(v) = 1 / (1 + exp(-v / sigma))
//   ReLU             max(0, v), sigma unused
enum class ActivationKind { GaussBell, LogisticSigmoid, IntegratedBell, ReLU };

struct ActivationEval {
  double value;
  double d_v;          // d value / d v
  double d_log_sigma;  // d value / d log(sigma)
};

double activate(ActivationKind kind, double v, double sigma);
ActivationEval activate_with_derivatives(ActivationKind kind, double v, double sigma);
// Same result, reusing an already computed activate(kind, v, sigma).
ActivationEval derivatives_from_value(ActivationKind kind, double v, double sigma, double value);

bool uses_width(ActivationKind kind);

std::string_view to_string(ActivationKind kind);
// Accepts gauss_bell, logistic_sigmoid (or sigmoid), integrated_bell, relu.
ActivationKind parse_activation(std::string_view name);

}  // namespace lon
