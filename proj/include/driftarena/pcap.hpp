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
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "driftarena/traffic.hpp"

namespace driftarena {

inline constexpr std::uint32_t kPcapMagicMicros = 0xA1B2C3D4;
inline constexpr std::uint32_t kPcapMagicNanos = 0xA1B23C4D;
inline constexpr std::uint32_t kLinkTypeEthernet = 1;
inline constexpr std::uint32_t kLinkTypeRaw = 101;
inline constexpr std::uint32_t kLinkTypeIpv4 = 228;

// record_index -> label, from a "record_index,label" text sidecar.
using LabelMap = std::map<std::size_t, Label>;

LabelMap read_label_sidecar(const std::filesystem::path& path);

// Streams TCP/IPv4 records from a classic pcap capture (either byte order).
// Records that are not IPv4/TCP are skipped; a truncated trailing record ends
// the stream and is counted.
class PcapReader {
 public:
  explicit PcapReader(const std::filesystem::path& path, LabelMap labels = {});

  std::optional<RawPacket> next();

  std::uint32_t link_type() const { return link_type_; }
  std::size_t records_read() const { return records_read_; }
  std::size_t skipped() const { return skipped_; }
  std::size_t truncated() const { return truncated_; }

 private:
  std::uint32_t read_u32(const std::uint8_t* p) const;

  std::ifstream in_;
  LabelMap labels_;
  bool swapped_ = false;
  bool nanos_ = false;
  std::uint32_t link_type_ = 0;
  std::size_t records_read_ = 0;
  std::size_t skipped_ = 0;
  std::size_t truncated_ = 0;
  bool done_ = false;
};

struct PcapContents {
  std::vector<RawPacket> packets;
  std::size_t records = 0;
  std::size_t skipped = 0;
  std::size_t truncated = 0;
};

PcapContents parse_pcap(const std::filesystem::path& path, LabelMap labels = {});

// Writes microsecond little-endian pcap. All packets must agree on whether
// they carry an Ethernet header.
void write_pcap(const std::filesystem::path& path, std::span<const RawPacket> packets);

void write_label_sidecar(const std::filesystem::path& path, std::span<const RawPacket> packets);

}  // namespace driftarena
