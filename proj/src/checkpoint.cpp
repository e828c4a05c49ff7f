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

#include "driftarena/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "driftarena/common.hpp"

namespace driftarena {

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  out << "driftarena-checkpoint " << kFormatVersion << '\n';
  out << "kind " << kind << '\n';
  for (const auto& [k, v] : meta) out << "meta " << k << ' ' << v << '\n';
  char buf[64];
  for (const auto& [name, values] : arrays) {
    out << "array " << name << ' ' << values.size() << '\n';
    for (double v : values) {
      std::snprintf(buf, sizeof(buf), "%a\n", v);
      out << buf;
    }
  }
  out << "end\n";
  if (!out) throw ConfigError("failed writing checkpoint " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "driftarena-checkpoint") {
    throw ParseError("not a checkpoint file: " + path.string());
  }
  if (version != kFormatVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  bool ended = false;
  while (in >> tag) {
    if (tag == "kind") {
      in >> ck.kind;
    } else if (tag == "meta") {
      std::string k, v;
      in >> k;
      std::getline(in >> std::ws, v);
      ck.meta[k] = v;
    } else if (tag == "array") {
      std::string name;
      std::size_t n = 0;
      in >> name >> n;
      auto& values = ck.arrays[name];
      values.resize(n);
      std::string tok;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> tok)) throw ParseError("checkpoint array " + name + " truncated");
        char* end = nullptr;
        values[i] = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str()) throw ParseError("bad number in checkpoint array " + name);
      }
    } else if (tag == "end") {
      ended = true;
      break;
    } else {
      throw ParseError("unexpected checkpoint record '" + tag + "'");
    }
  }
  if (!ended) throw ParseError("checkpoint missing end marker");
  return ck;
}

const std::string& Checkpoint::meta_at(const std::string& key) const {
  const auto it = meta.find(key);
  if (it == meta.end()) throw ParseError("checkpoint lacks meta key " + key);
  return it->second;
}

std::uint64_t Checkpoint::meta_u64(const std::string& key) const {
  try {
    return std::stoull(meta_at(key));
  } catch (const std::logic_error&) {
    throw ParseError("checkpoint meta " + key + " is not an integer");
  }
}

void Checkpoint::set_double(const std::string& key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  meta[key] = buf;
}

double Checkpoint::meta_double(const std::string& key) const {
  const std::string& s = meta_at(key);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw ParseError("checkpoint meta " + key + " is not a number");
  return v;
}

const std::vector<double>& Checkpoint::array_at(const std::string& name) const {
  const auto it = arrays.find(name);
  if (it == arrays.end()) throw ParseError("checkpoint lacks array " + name);
  return it->second;
}

}  // namespace driftarena
