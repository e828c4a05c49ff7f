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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "driftarena/traffic.hpp"

namespace driftarena {

// Header and payload fields for building one IPv4/TCP packet.
struct TcpPacketFields {
  bool ethernet = true;
  std::array<std::uint8_t, 6> dst_mac{0x02, 0x00, 0x00, 0x00, 0x00, 0x01};
  std::array<std::uint8_t, 6> src_mac{0x02, 0x00, 0x00, 0x00, 0x00, 0x02};
  std::uint8_t tos = 0;
  std::uint16_t identification = 0;
  bool dont_fragment = true;
  bool more_fragments = false;
  std::uint8_t ttl = 64;
  std::array<std::uint8_t, 4> src_ip{10, 0, 0, 1};
  std::array<std::uint8_t, 4> dst_ip{10, 0, 0, 2};
  std::uint16_t src_port = 40000;
  std::uint16_t dst_port = 80;
  std::uint32_t seq = 1;
  std::uint32_t ack = 1;
  std::uint8_t tcp_flags = 0x18;  // PSH|ACK
  std::uint16_t window = 65535;
  std::uint16_t urgent = 0;
  // Raw option bytes; padded with EOL to a multiple of four when built.
  std::vector<std::uint8_t> options;
  std::vector<std::uint8_t> payload;
};

// Serializes the fields with correct length fields and checksums.
RawPacket build_tcp_packet(const TcpPacketFields& fields, Label label = Label::kBenign,
                           double timestamp = 0.0);

std::vector<std::uint8_t> mss_option(std::uint16_t mss);
// NOP-prefixed so the option stays 4-byte aligned.
std::vector<std::uint8_t> wscale_option(std::uint8_t shift);
std::vector<std::uint8_t> timestamp_option(std::uint32_t value, std::uint32_t echo);

enum class PayloadStyle { kText, kBinary, kMixed };

// Byte-pattern distribution for one traffic class.
struct ClassProfile {
  std::uint8_t ttl_min = 64;
  std::uint8_t ttl_max = 64;
  std::uint16_t window_min = 1024;
  std::uint16_t window_max = 65535;
  double dont_fragment_probability = 1.0;
  double mss_probability = 0.0;
  std::uint16_t mss_min = 536;
  std::uint16_t mss_max = 1460;
  double wscale_probability = 0.0;
  std::uint8_t wscale_min = 0;
  std::uint8_t wscale_max = 14;
  double timestamp_probability = 0.0;
  std::size_t payload_min = 0;
  std::size_t payload_max = 1200;
  PayloadStyle payload_style = PayloadStyle::kMixed;
  // Written at the start of the payload with motif_probability.
  std::string motif;
  double motif_probability = 0.0;
  std::vector<std::uint16_t> dst_ports{80};
  std::uint8_t tcp_flags = 0x18;
};

struct SynthProfile {
  ClassProfile benign;
  ClassProfile malicious;
  double malicious_fraction = 0.5;
  double mean_interarrival = 0.01;
};

// Two classes that differ mostly in TCP option usage and window size, with
// weaker payload-motif and TTL differences.
SynthProfile default_profile();

void validate(const SynthProfile& profile);

// Deterministic for fixed (profile, n, seed). Packets carry Ethernet headers
// and valid checksums.
std::vector<RawPacket> synth_generate(const SynthProfile& profile, std::size_t n,
                                      std::uint64_t seed);

}  // namespace driftarena
