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

#include "driftarena/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string_view>

#include "driftarena/wire.hpp"

namespace driftarena {

RawPacket build_tcp_packet(const TcpPacketFields& f, Label label, double timestamp) {
  std::vector<std::uint8_t> options = f.options;
  while (options.size() % 4 != 0) options.push_back(0);
  if (options.size() > wire::kMaxTcpOptions) throw ConfigError("TCP options exceed 40 bytes");
  const std::size_t link = f.ethernet ? wire::kEthernetHeaderBytes : 0;
  const std::size_t tcp_len = wire::kMinTcpHeader + options.size();
  const std::size_t total = wire::kMinIpv4Header + tcp_len + f.payload.size();
  if (total > 0xFFFF || link + total > kMaxPacketBytes) {
    throw ConfigError("packet exceeds the capture size limit");
  }

  std::vector<std::uint8_t> b(link + total, 0);
  std::span<std::uint8_t> s(b);
  if (f.ethernet) {
    std::copy(f.dst_mac.begin(), f.dst_mac.end(), b.begin());
    std::copy(f.src_mac.begin(), f.src_mac.end(), b.begin() + 6);
    wire::store_be16(s, 12, wire::kEtherTypeIpv4);
  }
  auto ip = s.subspan(link);
  ip[0] = 0x45;
  ip[1] = f.tos;
  wire::store_be16(ip, 2, static_cast<std::uint16_t>(total));
  wire::store_be16(ip, 4, f.identification);
  std::uint16_t flags = 0;
  if (f.dont_fragment) flags |= wire::kFlagDontFragment;
  if (f.more_fragments) flags |= wire::kFlagMoreFragments;
  wire::store_be16(ip, 6, flags);
  ip[8] = f.ttl;
  ip[9] = wire::kProtocolTcp;
  std::copy(f.src_ip.begin(), f.src_ip.end(), ip.begin() + 12);
  std::copy(f.dst_ip.begin(), f.dst_ip.end(), ip.begin() + 16);

  auto tcp = ip.subspan(wire::kMinIpv4Header);
  wire::store_be16(tcp, 0, f.src_port);
  wire::store_be16(tcp, 2, f.dst_port);
  for (int i = 0; i < 4; ++i) {
    tcp[4 + i] = static_cast<std::uint8_t>(f.seq >> (24 - 8 * i));
    tcp[8 + i] = static_cast<std::uint8_t>(f.ack >> (24 - 8 * i));
  }
  tcp[12] = static_cast<std::uint8_t>((tcp_len / 4) << 4);
  tcp[13] = f.tcp_flags;
  wire::store_be16(tcp, 14, f.window);
  wire::store_be16(tcp, 18, f.urgent);
  std::copy(options.begin(), options.end(), tcp.begin() + 20);
  std::copy(f.payload.begin(), f.payload.end(), tcp.begin() + static_cast<std::ptrdiff_t>(tcp_len));

  const auto layout = wire::parse_layout(b, f.ethernet);
  wire::write_checksums(b, layout);
  return RawPacket{std::move(b), label, timestamp, f.ethernet};
}

std::vector<std::uint8_t> mss_option(std::uint16_t mss) {
  return {2, 4, static_cast<std::uint8_t>(mss >> 8), static_cast<std::uint8_t>(mss & 0xFF)};
}

std::vector<std::uint8_t> wscale_option(std::uint8_t shift) { return {1, 3, 3, shift}; }

std::vector<std::uint8_t> timestamp_option(std::uint32_t value, std::uint32_t echo) {
  std::vector<std::uint8_t> o{1, 1, 8, 10};
  for (int i = 0; i < 4; ++i) o.push_back(static_cast<std::uint8_t>(value >> (24 - 8 * i)));
  for (int i = 0; i < 4; ++i) o.push_back(static_cast<std::uint8_t>(echo >> (24 - 8 * i)));
  return o;
}

SynthProfile default_profile() {
  SynthProfile p;
  p.malicious_fraction = 0.5;

  auto& b = p.benign;
  b.ttl_min = 56;
  b.ttl_max = 128;
  b.window_min = 28672;
  b.window_max = 65535;
  b.dont_fragment_probability = 0.85;
  b.mss_probability = 0.95;
  b.mss_min = 1360;
  b.mss_max = 1440;
  b.wscale_probability = 0.95;
  b.wscale_min = 4;
  b.wscale_max = 6;
  b.timestamp_probability = 0.3;
  b.payload_min = 0;
  b.payload_max = 160;
  b.payload_style = PayloadStyle::kMixed;
  b.motif = "GET /index";
  b.motif_probability = 0.3;
  b.dst_ports = {80, 443, 8080};

  auto& m = p.malicious;
  m.ttl_min = 40;
  m.ttl_max = 112;
  m.window_min = 1024;
  m.window_max = 26624;
  m.dont_fragment_probability = 0.85;
  m.mss_probability = 0.05;
  m.mss_min = 536;
  m.mss_max = 1460;
  m.wscale_probability = 0.05;
  m.wscale_min = 0;
  m.wscale_max = 4;
  m.timestamp_probability = 0.3;
  m.payload_min = 0;
  m.payload_max = 160;
  m.payload_style = PayloadStyle::kMixed;
  m.motif = "\x90\x90\xeb\x1f";
  m.motif_probability = 0.3;
  m.dst_ports = {22, 80, 445};
  return p;
}

namespace {

void validate_class(const ClassProfile& c, const char* name) {
  auto prob = [&](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError(std::string(name) + "." + what + " must be a probability");
    }
  };
  prob(c.dont_fragment_probability, "dont_fragment_probability");
  prob(c.mss_probability, "mss_probability");
  prob(c.wscale_probability, "wscale_probability");
  prob(c.timestamp_probability, "timestamp_probability");
  prob(c.motif_probability, "motif_probability");
  if (c.ttl_min == 0 || c.ttl_min > c.ttl_max) throw ConfigError(std::string(name) + ": bad TTL range");
  if (c.window_min == 0 || c.window_min > c.window_max) {
    throw ConfigError(std::string(name) + ": bad window range");
  }
  if (c.mss_min > c.mss_max || c.wscale_min > c.wscale_max || c.wscale_max > 14) {
    throw ConfigError(std::string(name) + ": bad option range");
  }
  if (c.payload_min > c.payload_max || c.payload_max > kPayloadBytes) {
    throw ConfigError(std::string(name) + ": bad payload range");
  }
  if (c.dst_ports.empty()) throw ConfigError(std::string(name) + ": no destination ports");
}

constexpr std::string_view kTextAlphabet =
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 /:.-=&?\r\n";

template <typename T>
T uniform(Rng& rng, T lo, T hi) {
  return static_cast<T>(std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng));
}

bool coin(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

RawPacket synth_one(const ClassProfile& c, Label label, double ts, Rng& rng) {
  TcpPacketFields f;
  f.src_ip = {192, 168, static_cast<std::uint8_t>(uniform<std::uint32_t>(rng, 0, 3)),
              static_cast<std::uint8_t>(uniform<std::uint32_t>(rng, 2, 254))};
  f.dst_ip = {10, 0, static_cast<std::uint8_t>(uniform<std::uint32_t>(rng, 0, 3)),
              static_cast<std::uint8_t>(uniform<std::uint32_t>(rng, 2, 254))};
  f.src_port = uniform<std::uint16_t>(rng, 1024, 65535);
  f.dst_port = c.dst_ports[uniform<std::size_t>(rng, 0, c.dst_ports.size() - 1)];
  f.identification = uniform<std::uint16_t>(rng, 0, 65535);
  f.dont_fragment = coin(rng, c.dont_fragment_probability);
  f.ttl = uniform<std::uint8_t>(rng, c.ttl_min, c.ttl_max);
  f.seq = static_cast<std::uint32_t>(rng());
  f.ack = static_cast<std::uint32_t>(rng());
  f.tcp_flags = c.tcp_flags;
  f.window = uniform<std::uint16_t>(rng, c.window_min, c.window_max);
  if (coin(rng, c.mss_probability)) {
    const auto o = mss_option(uniform<std::uint16_t>(rng, c.mss_min, c.mss_max));
    f.options.insert(f.options.end(), o.begin(), o.end());
  }
  if (coin(rng, c.wscale_probability)) {
    const auto o = wscale_option(uniform<std::uint8_t>(rng, c.wscale_min, c.wscale_max));
    f.options.insert(f.options.end(), o.begin(), o.end());
  }
  if (coin(rng, c.timestamp_probability)) {
    const auto o = timestamp_option(static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng()));
    f.options.insert(f.options.end(), o.begin(), o.end());
  }

  const std::size_t len = uniform<std::size_t>(rng, c.payload_min, c.payload_max);
  const bool text = c.payload_style == PayloadStyle::kText ||
                    (c.payload_style == PayloadStyle::kMixed && coin(rng, 0.5));
  f.payload.resize(len);
  for (auto& byte : f.payload) {
    byte = text ? static_cast<std::uint8_t>(kTextAlphabet[uniform<std::size_t>(rng, 0, kTextAlphabet.size() - 1)])
                : uniform<std::uint8_t>(rng, 0, 255);
  }
  if (!c.motif.empty() && coin(rng, c.motif_probability)) {
    const std::size_t k = std::min(c.motif.size(), f.payload.size());
    std::copy_n(c.motif.begin(), k, f.payload.begin());
  }
  return build_tcp_packet(f, label, ts);
}

}  // namespace

void validate(const SynthProfile& profile) {
  if (!(profile.malicious_fraction > 0.0 && profile.malicious_fraction < 1.0)) {
    throw ConfigError("class mix must lie strictly between 0 and 1");
  }
  if (!(profile.mean_interarrival > 0.0)) throw ConfigError("mean_interarrival must be positive");
  validate_class(profile.benign, "benign");
  validate_class(profile.malicious, "malicious");
}

std::vector<RawPacket> synth_generate(const SynthProfile& profile, std::size_t n, std::uint64_t seed) {
  validate(profile);
  std::vector<RawPacket> out;
  out.reserve(n);
  Rng rng(seed);
  std::exponential_distribution<double> gap(1.0 / profile.mean_interarrival);
  double ts = 1'500'000'000.0;
  for (std::size_t i = 0; i < n; ++i) {
    ts += gap(rng);
    // Round to whole microseconds so the pcap round trip is exact.
    ts = std::round(ts * 1e6) / 1e6;
    const bool malicious = coin(rng, profile.malicious_fraction);
    out.push_back(synth_one(malicious ? profile.malicious : profile.benign,
                            malicious ? Label::kMalicious : Label::kBenign, ts, rng));
  }
  return out;
}

}  // namespace driftarena
