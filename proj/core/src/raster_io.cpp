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

#include "lon/raster_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "lon/errors.hpp"

namespace lon {

namespace le {

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& buf, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = bits << 8 | p[i];
  return std::bit_cast<double>(bits);
}

}  // namespace le

namespace {

std::vector<unsigned char> slurp(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for reading");
  return f;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  return f;
}

}  // namespace

void write_lonr(const Image& img, std::ostream& out) {
  std::vector<unsigned char> buf;
  buf.reserve(16 + 8 * img.size());
  buf.insert(buf.end(), {'L', 'O', 'N', 'R'});
  le::put_u32(buf, static_cast<std::uint32_t>(img.width()));
  le::put_u32(buf, static_cast<std::uint32_t>(img.height()));
  le::put_u32(buf, 0);
  for (double v : img.values()) le::put_f64(buf, v);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing LONR raster");
}

Image read_lonr(std::istream& in) {
  const auto buf = slurp(in);
  if (buf.size() < 16) throw ParseError("truncated LONR header", buf.size());
  if (std::memcmp(buf.data(), "LONR", 4) != 0) throw ParseError("bad LONR magic", 0);
  const auto w = le::get_u32(&buf[4]);
  const auto h = le::get_u32(&buf[8]);
  if (w == 0 || h == 0) throw ParseError("LONR raster with zero dimension", 4);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (buf.size() < 16 + 8 * n) throw ParseError("truncated LONR payload", buf.size());
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = le::get_f64(&buf[16 + 8 * i]);
  return Image(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

void write_lonr(const Image& img, const std::filesystem::path& path) {
  auto f = open_out(path);
  write_lonr(img, f);
}

Image read_lonr(const std::filesystem::path& path) {
  auto f = open_in(path);
  return read_lonr(f);
}

Image read_pgm(std::istream& in) {
  const auto buf = slurp(in);
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < buf.size()) {
      if (buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
      } else if (std::isspace(buf[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space();
    if (pos >= buf.size() || !std::isdigit(buf[pos])) throw ParseError("expected integer in PGM header", pos);
    long v = 0;
    while (pos < buf.size() && std::isdigit(buf[pos])) {
      v = v * 10 + (buf[pos++] - '0');
      if (v > 1 << 24) throw ParseError("PGM header value too large", pos);
    }
    return static_cast<int>(v);
  };
  if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5') throw ParseError("not a binary PGM (P5)", 0);
  pos = 2;
  const int w = read_int();
  const int h = read_int();
  const int maxval = read_int();
  if (w <= 0 || h <= 0) throw ParseError("PGM with zero dimension", pos);
  if (maxval <= 0 || maxval > 65535) throw ParseError("PGM maxval out of range", pos);
  if (pos >= buf.size() || !std::isspace(buf[pos])) throw ParseError("missing PGM header terminator", pos);
  ++pos;
  const int bytes = maxval < 256 ? 1 : 2;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (buf.size() < pos + n * bytes) throw ParseError("truncated PGM payload", buf.size());
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = bytes == 1 ? buf[pos + i]
                                  : (static_cast<unsigned>(buf[pos + 2 * i]) << 8) | buf[pos + 2 * i + 1];
    data[i] = static_cast<double>(v) / maxval;
  }
  return Image(w, h, std::move(data));
}

Image read_pgm(const std::filesystem::path& path) {
  auto f = open_in(path);
  return read_pgm(f);
}

void write_pgm(const Image& img, std::ostream& out, int bits, PgmScaling scaling) {
  if (bits != 8 && bits != 16) throw ArgumentError("PGM depth must be 8 or 16 bits");
  if (!(scaling.hi > scaling.lo)) throw ArgumentError("PGM scaling needs hi > lo");
  const int maxval = bits == 8 ? 255 : 65535;
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n" + std::to_string(maxval) + "\n";
  std::vector<unsigned char> buf(header.begin(), header.end());
  for (double v : img.values()) {
    const double t = std::clamp((v - scaling.lo) / (scaling.hi - scaling.lo), 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(t * maxval));
    if (bits == 16) buf.push_back(static_cast<unsigned char>(q >> 8));
    buf.push_back(static_cast<unsigned char>(q & 0xff));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing PGM");
}

void write_pgm(const Image& img, const std::filesystem::path& path, int bits, PgmScaling scaling) {
  auto f = open_out(path);
  write_pgm(img, f, bits, scaling);
}

PgmScaling minmax_scaling(const Image& img) {
  const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
  PgmScaling s{*lo, *hi};
  if (!(s.hi > s.lo)) s.hi = s.lo + 1.0;
  return s;
}

Image read_image(const std::filesystem::path& path) {
  if (path.extension() == ".pgm") return read_pgm(path);
  return read_lonr(path);
}

}  // namespace lon
