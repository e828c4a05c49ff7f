// Copyright 2026 The DriftArena Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace driftarena::csv {

// RFC 4180 tables: CRLF line ends, fields quoted only when they contain a
// comma, quote, CR or LF.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  const std::string& at(std::size_t row, std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

std::string quote(std::string_view field);
// Shortest representation that round-trips.
std::string format(double v);
std::string format(std::size_t v);

std::string to_string(const Table& t);
Table parse(std::string_view text);

void write(const std::filesystem::path& path, const Table& t);
Table read(const std::filesystem::path& path);

}  // namespace driftarena::csv
