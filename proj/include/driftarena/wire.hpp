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
#include <span>

namespace driftarena::wire {

inline constexpr std::size_t kEthernetHeaderBytes = 14;
inline constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
inline constexpr std::uint8_t kProtocolTcp = 6;
inline constexpr std::size_t kMinIpv4Header = 20;
inline constexpr std::size_t kMinTcpHeader = 20;
inline constexpr std::size_t kMaxTcpOptions = 40;

// IPv4 flags live in the top three bits of the flags/fragment-offset word.
inline constexpr std::uint16_t kFlagDontFragment = 0x4000;
inline constexpr std::uint16_t kFlagMoreFragments = 0x2000;

// Byte offsets of one Ethernet(optional)/IPv4/TCP packet inside its buffer.
struct Layout {
  std::size_t ip_offset = 0;
  std::size_t ip_header_len = 0;
  std::size_t tcp_offset = 0;
  std::size_t tcp_header_len = 0;
  std::size_t payload_offset = 0;
  // Payload bytes actually present (bounded by the IP total length field).
  std::size_t payload_len = 0;
  std::size_t ip_total_len = 0;
};

// Throws RejectedPacket for non-IPv4/non-TCP and MalformedPacket when the
// IHL, data-offset or total-length fields disagree with the buffer.
Layout parse_layout(std::span<const std::uint8_t> bytes, bool has_link_header);

inline std::uint16_t load_be16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>((b[off] << 8) | b[off + 1]);
}

inline void store_be16(std::span<std::uint8_t> b, std::size_t off, std::uint16_t v) {
  b[off] = static_cast<std::uint8_t>(v >> 8);
  b[off + 1] = static_cast<std::uint8_t>(v & 0xFF);
}

// RFC 1071 one's-complement sum folded to 16 bits (not inverted).
std::uint32_t ones_complement_accumulate(std::span<const std::uint8_t> data, std::uint32_t acc = 0);
std::uint16_t fold(std::uint32_t acc);

// Checksum of an IPv4 header with its checksum field taken as zero.
std::uint16_t ipv4_header_checksum(std::span<const std::uint8_t> header);

// TCP checksum over pseudo-header and segment, checksum field taken as zero.
// Only the captured bytes contribute when the capture is truncated.
std::uint16_t tcp_checksum(std::span<const std::uint8_t> packet, const Layout& layout);

// Rewrites both checksum fields in place.
void write_checksums(std::span<std::uint8_t> packet, const Layout& layout);

bool checksums_valid(std::span<const std::uint8_t> packet, const Layout& layout);

}  // namespace driftarena::wire
