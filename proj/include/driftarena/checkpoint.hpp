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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace driftarena {

// Versioned text dump shared by classifier and policy checkpoints:
//
//   driftarena-checkpoint 1
//   kind <name>
//   meta <key> <value>         (repeated)
//   array <name> <count>       (followed by <count> hex-float lines)
//   end
//
// Hex floats make the reload bit-exact.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  std::string kind;
  std::map<std::string, std::string> meta;
  std::map<std::string, std::vector<double>> arrays;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  const std::string& meta_at(const std::string& key) const;
  std::uint64_t meta_u64(const std::string& key) const;
  // Doubles are stored as hex floats.
  void set_double(const std::string& key, double v);
  double meta_double(const std::string& key) const;
  const std::vector<double>& array_at(const std::string& name) const;
};

}  // namespace driftarena
