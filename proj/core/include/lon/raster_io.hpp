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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lon/image.hpp"

namespace lon {

// LONR raw raster: "LONR", u32 width, u32 height, u32 reserved (0), then
// width*height little-endian doubles in row-major order.
void write_lonr(const Image& img, std::ostream& out);
Image read_lonr(std::istream& in);
void write_lonr(const Image& img, const std::filesystem::path& path);
Image read_lonr(const std::filesystem::path& path);

// Binary PGM (P5).  Reading maps samples to value / maxval.  Writing maps
// [lo, hi] linearly onto [0, maxval] (clamped); maxval is 255 for 8 bits and
// 65535 for 16 bits (big-endian samples, per the netpbm convention).
struct PgmScaling {
  double lo = 0.0;
  double hi = 1.0;
};
Image read_pgm(std::istream& in);
Image read_pgm(const std::filesystem::path& path);
void write_pgm(const Image& img, std::ostream& out, int bits = 8, PgmScaling scaling = {});
void write_pgm(const Image& img, const std::filesystem::path& path, int bits = 8,
               PgmScaling scaling = {});

// Min/max of the image, with hi > lo guaranteed (flat images get hi = lo + 1).
PgmScaling minmax_scaling(const Image& img);

// Either format, chosen by extension (.pgm, otherwise LONR).
Image read_image(const std::filesystem::path& path);

namespace le {
void put_u32(std::vector<unsigned char>& buf, std::uint32_t v);
void put_f64(std::vector<unsigned char>& buf, double v);
std::uint32_t get_u32(const unsigned char* p);
double get_f64(const unsigned char* p);
}  // namespace le

}  // namespace lon
