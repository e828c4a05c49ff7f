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

#include <filesystem>
#include <string>
#include <vector>

namespace driftarena::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, int width = 760, int height = 420);

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one per series
};

std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& series_names, const std::vector<BarGroup>& groups,
                      int width = 760, int height = 420);

void write(const std::filesystem::path& path, const std::string& svg);

}  // namespace driftarena::svg
