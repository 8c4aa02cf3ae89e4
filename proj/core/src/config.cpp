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

#include "lon/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <memory>

#include "lon/errors.hpp"

namespace lon {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

}  // namespace

IniDocument parse_ini(std::string_view text) {
  IniDocument doc;
  IniSection* current = nullptr;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::size_t line_start = pos;
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_start);
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name)) {
        throw ParseError("invalid section name '" + std::string(name) + "'", line_start);
      }
      if (doc.contains(std::string(name))) {
        throw ParseError("duplicate section [" + std::string(name) + "]", line_start);
      }
      current = &doc[std::string(name)];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_start);
    if (!current) throw ParseError("key outside of any section", line_start);
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_name(key)) throw ParseError("invalid key '" + key + "'", line_start);
    if (current->contains(key)) throw ParseError("duplicate key '" + key + "'", line_start);
    (*current)[key] = std::string(trim(line.substr(eq + 1)));
  }
  return doc;
}

std::string canonical_ini(const IniDocument& doc) {
  std::string out;
  for (const auto& [section, entries] : doc) {
    out += "[" + section + "]\n";
    for (const auto& [key, value] : entries) out += key + "=" + value + "\n";
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw NumericError("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

}  // namespace lon
