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
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace driftarena {

// Per-packet capture ceiling; longer records are truncated on ingestion.
inline constexpr std::size_t kMaxPacketBytes = 1594;
inline constexpr std::size_t kPayloadBytes = 1460;
inline constexpr std::size_t kHeaderFeatureBytes = 65;
inline constexpr std::size_t kFeatureDim = kHeaderFeatureBytes + kPayloadBytes;
static_assert(kFeatureDim == 1525);

enum class Label : std::uint8_t { kBenign = 0, kMalicious = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }
Label label_from_int(int v);

using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or invalid arguments (empty sets, out-of-range knobs).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unrecoverable input format problem (pcap headers, checkpoints, CSV).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Packet is well formed but not IPv4/TCP.
class RejectedPacket : public Error {
 public:
  using Error::Error;
};

// Header length fields disagree with the buffer.
class MalformedPacket : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace driftarena
