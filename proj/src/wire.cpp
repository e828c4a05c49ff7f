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

#include "driftarena/wire.hpp"

#include <algorithm>
#include <string>

#include "driftarena/common.hpp"

namespace driftarena::wire {

Layout parse_layout(std::span<const std::uint8_t> bytes, bool has_link_header) {
  Layout l;
  if (has_link_header) {
    if (bytes.size() < kEthernetHeaderBytes) {
      throw MalformedPacket("frame shorter than an Ethernet header");
    }
    if (load_be16(bytes, 12) != kEtherTypeIpv4) {
      throw RejectedPacket("ethertype is not IPv4");
    }
    l.ip_offset = kEthernetHeaderBytes;
  }
  if (bytes.size() <= l.ip_offset) throw MalformedPacket("no network-layer bytes");
  const auto ip = bytes.subspan(l.ip_offset);
  if ((ip[0] >> 4) != 4) throw RejectedPacket("IP version is not 4");
  if (ip.size() < kMinIpv4Header) throw MalformedPacket("truncated IPv4 header");
  l.ip_header_len = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
  if (l.ip_header_len < kMinIpv4Header || l.ip_header_len > ip.size()) {
    throw MalformedPacket("IHL inconsistent with buffer");
  }
  if (ip[9] != kProtocolTcp) throw RejectedPacket("IP protocol is not TCP");
  if ((load_be16(ip, 6) & 0x1FFF) != 0) {
    throw RejectedPacket("non-initial IPv4 fragment carries no TCP header");
  }
  l.ip_total_len = load_be16(ip, 2);
  if (l.ip_total_len < l.ip_header_len + kMinTcpHeader) {
    throw MalformedPacket("IP total length too small for a TCP header");
  }
  l.tcp_offset = l.ip_offset + l.ip_header_len;
  if (bytes.size() < l.tcp_offset + kMinTcpHeader) throw MalformedPacket("truncated TCP header");
  l.tcp_header_len = static_cast<std::size_t>(bytes[l.tcp_offset + 12] >> 4) * 4;
  if (l.tcp_header_len < kMinTcpHeader) throw MalformedPacket("TCP data offset below 5");
  if (l.ip_header_len + l.tcp_header_len > l.ip_total_len) {
    throw MalformedPacket("TCP data offset exceeds IP total length");
  }
  if (l.tcp_offset + l.tcp_header_len > bytes.size()) {
    throw MalformedPacket("TCP options truncated");
  }
  l.payload_offset = l.tcp_offset + l.tcp_header_len;
  const std::size_t end = std::min(bytes.size(), l.ip_offset + l.ip_total_len);
  l.payload_len = end - l.payload_offset;
  return l;
}

std::uint32_t ones_complement_accumulate(std::span<const std::uint8_t> data, std::uint32_t acc) {
  std::size_t i = 0;
  for (; i + 1 < data.size(); i += 2) {
    acc += static_cast<std::uint32_t>((data[i] << 8) | data[i + 1]);
    acc = (acc & 0xFFFF) + (acc >> 16);
  }
  if (i < data.size()) {
    acc += static_cast<std::uint32_t>(data[i] << 8);
    acc = (acc & 0xFFFF) + (acc >> 16);
  }
  return acc;
}

std::uint16_t fold(std::uint32_t acc) {
  while (acc >> 16) acc = (acc & 0xFFFF) + (acc >> 16);
  return static_cast<std::uint16_t>(acc);
}

std::uint16_t ipv4_header_checksum(std::span<const std::uint8_t> header) {
  std::uint32_t acc = ones_complement_accumulate(header.first(10));
  acc = ones_complement_accumulate(header.subspan(12), acc);
  return static_cast<std::uint16_t>(~fold(acc));
}

std::uint16_t tcp_checksum(std::span<const std::uint8_t> packet, const Layout& l) {
  const auto ip = packet.subspan(l.ip_offset);
  const std::size_t segment_len = l.ip_total_len - l.ip_header_len;
  std::uint8_t pseudo[12];
  std::copy_n(ip.begin() + 12, 8, pseudo);
  pseudo[8] = 0;
  pseudo[9] = kProtocolTcp;
  pseudo[10] = static_cast<std::uint8_t>(segment_len >> 8);
  pseudo[11] = static_cast<std::uint8_t>(segment_len & 0xFF);
  std::uint32_t acc = ones_complement_accumulate(pseudo);
  const auto seg = packet.subspan(l.tcp_offset, l.tcp_header_len + l.payload_len);
  acc = ones_complement_accumulate(seg.first(16), acc);
  acc = ones_complement_accumulate(seg.subspan(18), acc);
  return static_cast<std::uint16_t>(~fold(acc));
}

void write_checksums(std::span<std::uint8_t> packet, const Layout& l) {
  const auto ip = packet.subspan(l.ip_offset, l.ip_header_len);
  store_be16(ip, 10, ipv4_header_checksum(ip));
  store_be16(packet, l.tcp_offset + 16, tcp_checksum(packet, l));
}

bool checksums_valid(std::span<const std::uint8_t> packet, const Layout& l) {
  const auto ip = packet.subspan(l.ip_offset, l.ip_header_len);
  return load_be16(ip, 10) == ipv4_header_checksum(ip) &&
         load_be16(packet, l.tcp_offset + 16) == tcp_checksum(packet, l);
}

}  // namespace driftarena::wire
