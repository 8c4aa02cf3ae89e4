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

#include <map>
#include <string>
#include <string_view>

namespace lon {

// Minimal INI dialect used for experiment configs:
//
//   # comment            (also "; comment"; full lines only)
//   [section]
//   key = value          (whitespace around key and value is trimmed)
//
// Keys must appear inside a section; section and key names are lowercase
// [a-z0-9_]; duplicates are an error.  Values are kept verbatim.
using IniSection = std::map<std::string, std::string>;
using IniDocument = std::map<std::string, IniSection>;

// Throws ParseError carrying the byte offset of the offending line.
IniDocument parse_ini(std::string_view text);

// Sorted "[section]\nkey=value\n" form; comments and spacing dropped.
std::string canonical_ini(const IniDocument& doc);

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace lon
