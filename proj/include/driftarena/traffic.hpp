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
#include <optional>
#include <span>
#include <vector>

#include "driftarena/common.hpp"

namespace driftarena {

struct RawPacket {
  std::vector<std::uint8_t> bytes;
  Label label = Label::kBenign;
  double timestamp = 0.0;
  bool has_link_header = false;

  bool operator==(const RawPacket&) const = default;
};

struct FeatureVector {
  std::vector<double> values;
  Label label = Label::kBenign;

  bool operator==(const FeatureVector&) const = default;
};

struct Batch {
  std::vector<FeatureVector> samples;
  std::size_t index = 0;
  // Present when the batch was built from packets, so byte-level
  // perturbation can revisit the originals.
  std::optional<std::vector<RawPacket>> raw;
};

// Canonical feature layout. The IPv4 addresses, protocol byte, TCP ports and
// urgent pointer are dropped; TCP options always occupy a 40-byte region so
// option edits never shift the payload block.
//
//   offset  bytes  field
//   0       1      IPv4 version / IHL
//   1       1      TOS
//   2       2      IPv4 total length
//   4       2      identification
//   6       2      flags / fragment offset
//   8       1      TTL
//   9       2      IPv4 header checksum
//   11      4      TCP sequence number
//   15      4      TCP acknowledgement number
//   19      1      TCP data offset / reserved
//   20      1      TCP flags
//   21      2      TCP window
//   23      2      TCP checksum
//   25      40     TCP options, zero padded
//   65      1460   payload, truncated or zero padded
//
// IPv4 options (IHL > 5) are not represented.
namespace feature_offset {
inline constexpr std::size_t kVersionIhl = 0;
inline constexpr std::size_t kTos = 1;
inline constexpr std::size_t kTotalLength = 2;
inline constexpr std::size_t kIdentification = 4;
inline constexpr std::size_t kFlagsFragment = 6;
inline constexpr std::size_t kTtl = 8;
inline constexpr std::size_t kIpChecksum = 9;
inline constexpr std::size_t kSequence = 11;
inline constexpr std::size_t kAcknowledgement = 15;
inline constexpr std::size_t kDataOffset = 19;
inline constexpr std::size_t kTcpFlags = 20;
inline constexpr std::size_t kWindow = 21;
inline constexpr std::size_t kTcpChecksum = 23;
inline constexpr std::size_t kOptions = 25;
inline constexpr std::size_t kOptionsLen = 40;
inline constexpr std::size_t kPayload = 65;
}  // namespace feature_offset

// Canonical 1,525 raw bytes (before normalization).
std::vector<std::uint8_t> canonical_bytes(const RawPacket& pkt);

// Normalized feature vector: canonical bytes divided by 255.
FeatureVector preprocess(const RawPacket& pkt);

// Sizes for splitting n items into k ordered parts; earlier parts get the
// remainder so sizes differ by at most one.
std::vector<std::size_t> split_sizes(std::size_t n, std::size_t k);

std::vector<Batch> batch_split(std::span<const FeatureVector> data, std::size_t n_batches);

// Packet overload: keeps the raw packets on each batch.
std::vector<Batch> batch_split(std::span<const RawPacket> packets, std::size_t n_batches);

}  // namespace driftarena
