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

// Generated by tests/oracles/oracles.py; do not edit by hand.
#pragma once

namespace lon::oracle {

inline constexpr double kGaussianCentreTapSigma1Radius3 = 0.15924112569070245;
inline constexpr double kIntegratedBellArgs[] = {-0.29999999999999999, 0.10000000000000001, 0, 0.25, 0.17000000000000001, 0.10000000000000001, 1.3, 0.69999999999999996, -2, 1.5};
inline constexpr double kIntegratedBellValues[] = {0.00033836925739527359, 0.31332853432887503, 0.23949192256084215, 1.6991134858813401, 0.34294893349266181};
inline constexpr double kDiskRadii[] = {20, 25, 30, 40};
inline constexpr double kDiskAreaRatio[] = {1.0058592403407784, 1.0063685361586725, 1.0002003979197334, 0.9994930426171027};
inline constexpr double kDiskPerimeterRatio[] = {1.0588086883027819, 1.0569440721598917, 1.0557009947312987, 1.0541471479455575};
inline constexpr double kSquare10Perimeter = 38.828427124746192;
inline constexpr double kSinglePixelPerimeter = 2.8284271247461903;
inline constexpr double kEmulationBins[] = {4, 16, 64};
inline constexpr double kEmulationDeviation[] = {0.78850577932490362, 0.013498269999189417, 0.00078334627644081206};
inline constexpr double kTinyLonOutput[] = {0.40401537128414633, -0.16057507188555728, 0.24777656322785735, -0.11183842371434349, -0.19625309945853209, 0.54218532631110516, 0.52161090441254365, 0.023045522190841439, 0.61745953469520354, -0.1338715980148763, -0.24067140263200021, 0.61795132535162667, -0.097497148645492193, 0.50794355637469712, 0.5499357027613796, 0.61692974305707682, 0.11511390657384329, 0.59874111667657337, -0.2279280920036727, -0.19625309945853214, 0.46862472352512269, 0.019657595359102498, 0.57070857122285634, 0.27768604148934245, -0.16187816698772292};
inline constexpr double kTinyCnnSigmoidOutput[] = {0.27559964935644005, -0.021013829955294522, 0.074348503529608534, -0.0058693600090877762, -0.034601454825490402, 0.24094181591780489, 0.24712462201700375, 0.027532437498467149, 0.19972313738458791, -0.012376568118322495, -0.060542244172599957, 0.18861781360930363, -0.0018617171566829849, 0.13387280327882412, 0.2384244046379026, 0.18616656602864773, 0.04725036011694711, 0.21763166872235629, -0.11022154432200568, -0.03460145482549043, 0.26092417752495795, 0.026776245976346702, 0.23093989046764546, 0.080474071061204411, -0.021462052168587376};

}  // namespace lon::oracle
