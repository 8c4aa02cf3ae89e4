# Copyright 2026 The LON Authors
# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Independent reference values for the C++ tests.

Everything here is computed with numpy/scipy from the defining formulas and
written to tests/oracle_values.hpp.  Re-run after changing a definition:

    python3 tests/oracles/oracles.py > tests/oracle_values.hpp
"""

import math

import numpy as np
from scipy import integrate, ndimage


def gaussian_centre_tap(sigma, radius):
    r = np.arange(-radius, radius + 1)
    g = np.exp(-(r[:, None] ** 2 + r[None, :] ** 2) / (2 * sigma * sigma))
    return g[radius, radius] / g.sum()


def integrated_bell(v, sigma):
    val, _ = integrate.quad(lambda w: math.exp(-w * w / (2 * sigma * sigma)), v - 40 * sigma, v,
                            epsabs=1e-16, epsrel=1e-12)
    return val


def marching_squares_binary(mask):
    """Case-table length of the 0.5 contour of a 0/1 mask, zero padded."""
    m = np.pad(mask.astype(int), 1)
    h = math.sqrt(0.5)
    total = 0.0
    for y in range(m.shape[0] - 1):
        for x in range(m.shape[1] - 1):
            a, b, c, d = m[y, x], m[y, x + 1], m[y + 1, x + 1], m[y + 1, x]
            n = a + b + c + d
            if n in (1, 3):
                total += h
            elif n == 2:
                total += 2 * h if a == c else 1.0
    return total


def disk(size, r, c=63.5):
    yy, xx = np.mgrid[0:size, 0:size]
    return ((xx - c) ** 2 + (yy - c) ** 2 <= r * r).astype(float)


def test_image():
    yy, xx = np.mgrid[0:8, 0:8].astype(float)
    return 0.5 + 0.3 * np.sin(0.9 * xx + 0.4) * np.cos(0.7 * yy - 0.2)


def emulation_deviation(n, sigma=0.1):
    """Cumulative bell sums vs the integrated bell at the bin upper edges,
    max over bins and pixels, relative to the channel range sigma*sqrt(2pi)."""
    r = test_image()
    lo, hi = r.min() - 6 * sigma, r.max() + 6 * sigma
    db = (hi - lo) / n
    b = lo + (np.arange(n) + 0.5) * db
    acc = np.zeros_like(r)
    worst = 0.0
    for i in range(n):
        acc += np.exp(-(b[i] - r) ** 2 / (2 * sigma * sigma))
        edge = b[i] + db / 2
        ref = np.vectorize(lambda v: integrated_bell(v, sigma))(edge - r)
        worst = max(worst, np.abs(db * acc - ref).max())
    return worst / (sigma * math.sqrt(2 * math.pi))


def conv_reflect(img, k):
    # scipy "reflect" repeats the edge sample (d c b a | a b c d).
    return ndimage.convolve(img, k, mode="reflect")


def tiny_net_inputs():
    img = np.array([[(3 * x + 5 * y) % 7 / 7.0 + 0.05 * x for x in range(5)] for y in range(5)])
    k = np.array([[0.1, -0.2, 0.05], [0.3, 0.15, -0.1], [-0.05, 0.2, 0.1]])
    return img, k


def tiny_lon_output():
    img, k = tiny_net_inputs()
    r = conv_reflect(img, k)
    bias = [0.2, 0.5]
    sigma = [0.15, 0.25]
    weights = [0.7, -0.4]
    out = np.full_like(r, 0.1)
    for b, s, w in zip(bias, sigma, weights):
        out += w * np.exp(-(b - r) ** 2 / (2 * s * s))
    return out


def tiny_cnn_sigmoid_output():
    img, k = tiny_net_inputs()
    r = conv_reflect(img, k)
    b, s = 0.3, 0.2
    return 0.6 / (1 + np.exp(-(b - r) / s)) - 0.2


def cpp_array(name, values):
    body = ", ".join(f"{v:.17g}" for v in values)
    return f"inline constexpr double {name}[] = {{{body}}};"


def main():
    # Same licence header as every other source file.
    with open(__file__) as f:
        header = [line for line in f.read().splitlines()[:14]]
    print("\n".join("//" + line[1:] for line in header) + "\n")
    print("// Generated by tests/oracles/oracles.py; do not edit by hand.")
    print("#pragma once\n")
    print("namespace lon::oracle {\n")
    print(f"inline constexpr double kGaussianCentreTapSigma1Radius3 = {gaussian_centre_tap(1.0, 3):.17g};")
    pairs = [(-0.3, 0.1), (0.0, 0.25), (0.17, 0.1), (1.3, 0.7), (-2.0, 1.5)]
    print(cpp_array("kIntegratedBellArgs", [p for vs in pairs for p in vs]))
    print(cpp_array("kIntegratedBellValues", [integrated_bell(v, s) for v, s in pairs]))
    radii = [20, 25, 30, 40]
    print(cpp_array("kDiskRadii", radii))
    print(cpp_array("kDiskAreaRatio", [disk(128, r).sum() / (math.pi * r * r) for r in radii]))
    print(cpp_array("kDiskPerimeterRatio",
                    [marching_squares_binary(disk(128, r)) / (2 * math.pi * r) for r in radii]))
    sq = np.zeros((12, 12))
    sq[1:11, 1:11] = 1
    print(f"inline constexpr double kSquare10Perimeter = {marching_squares_binary(sq):.17g};")
    px = np.zeros((3, 3))
    px[1, 1] = 1
    print(f"inline constexpr double kSinglePixelPerimeter = {marching_squares_binary(px):.17g};")
    print(cpp_array("kEmulationBins", [4, 16, 64]))
    print(cpp_array("kEmulationDeviation", [emulation_deviation(n) for n in (4, 16, 64)]))
    print(cpp_array("kTinyLonOutput", tiny_lon_output().ravel()))
    print(cpp_array("kTinyCnnSigmoidOutput", tiny_cnn_sigmoid_output().ravel()))
    print("\n}  // namespace lon::oracle")


if __name__ == "__main__":
    main()
