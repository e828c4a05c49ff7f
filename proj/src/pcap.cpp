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

#include "driftarena/pcap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "driftarena/wire.hpp"

namespace driftarena {

namespace {

std::uint32_t bswap32(std::uint32_t v) {
  return ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
}

void put_le32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF),
                              static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}

void put_le16(std::ostream& out, std::uint16_t v) {
  const std::array<char, 2> b{static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b.data(), 2);
}

}  // namespace

LabelMap read_label_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open label sidecar " + path.string());
  LabelMap labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("label sidecar line " + std::to_string(lineno) + ": expected index,label");
    }
    try {
      const auto index = std::stoul(line.substr(0, comma));
      const std::string value = line.substr(comma + 1);
      if (value == "benign") {
        labels[index] = Label::kBenign;
      } else if (value == "malicious") {
        labels[index] = Label::kMalicious;
      } else {
        labels[index] = label_from_int(std::stoi(value));
      }
    } catch (const std::logic_error&) {
      throw ParseError("label sidecar line " + std::to_string(lineno) + ": bad value");
    }
  }
  return labels;
}

PcapReader::PcapReader(const std::filesystem::path& path, LabelMap labels)
    : in_(path, std::ios::binary), labels_(std::move(labels)) {
  if (!in_) throw ParseError("cannot open capture " + path.string());
  std::array<std::uint8_t, 24> hdr{};
  in_.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
  if (in_.gcount() != static_cast<std::streamsize>(hdr.size())) {
    throw ParseError("capture shorter than the 24-byte pcap global header");
  }
  const std::uint32_t magic = read_u32(hdr.data());
  if (magic == kPcapMagicMicros || magic == kPcapMagicNanos) {
    swapped_ = false;
  } else if (bswap32(magic) == kPcapMagicMicros || bswap32(magic) == kPcapMagicNanos) {
    swapped_ = true;
  } else {
    throw ParseError("bad pcap magic number (pcapng is not supported)");
  }
  nanos_ = (swapped_ ? bswap32(magic) : magic) == kPcapMagicNanos;
  link_type_ = read_u32(hdr.data() + 20) & 0x0FFFFFFF;
  if (link_type_ != kLinkTypeEthernet && link_type_ != kLinkTypeRaw &&
      link_type_ != kLinkTypeIpv4) {
    throw ParseError("unsupported pcap link type " + std::to_string(link_type_));
  }
}

std::uint32_t PcapReader::read_u32(const std::uint8_t* p) const {
  const std::uint32_t v = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                          (static_cast<std::uint32_t>(p[2]) << 16) |
                          (static_cast<std::uint32_t>(p[3]) << 24);
  return swapped_ ? bswap32(v) : v;
}

std::optional<RawPacket> PcapReader::next() {
  while (!done_) {
    std::array<std::uint8_t, 16> rec{};
    in_.read(reinterpret_cast<char*>(rec.data()), rec.size());
    const auto got = in_.gcount();
    if (got == 0) {
      done_ = true;
      break;
    }
    if (got != static_cast<std::streamsize>(rec.size())) {
      ++truncated_;
      done_ = true;
      break;
    }
    const std::uint32_t sec = read_u32(rec.data());
    const std::uint32_t frac = read_u32(rec.data() + 4);
    const std::uint32_t caplen = read_u32(rec.data() + 8);
    std::vector<std::uint8_t> data(caplen);
    in_.read(reinterpret_cast<char*>(data.data()), caplen);
    if (in_.gcount() != static_cast<std::streamsize>(caplen)) {
      ++truncated_;
      done_ = true;
      break;
    }
    const std::size_t index = records_read_++;

    RawPacket pkt;
    pkt.has_link_header = link_type_ == kLinkTypeEthernet;
    pkt.timestamp = sec + frac * (nanos_ ? 1e-9 : 1e-6);
    try {
      wire::parse_layout(data, pkt.has_link_header);
    } catch (const Error&) {
      ++skipped_;
      continue;
    }
    if (data.size() > kMaxPacketBytes) data.resize(kMaxPacketBytes);
    pkt.bytes = std::move(data);
    if (auto it = labels_.find(index); it != labels_.end()) pkt.label = it->second;
    return pkt;
  }
  return std::nullopt;
}

PcapContents parse_pcap(const std::filesystem::path& path, LabelMap labels) {
  PcapReader reader(path, std::move(labels));
  PcapContents out;
  while (auto pkt = reader.next()) out.packets.push_back(std::move(*pkt));
  out.records = reader.records_read();
  out.skipped = reader.skipped();
  out.truncated = reader.truncated();
  return out;
}

void write_pcap(const std::filesystem::path& path, std::span<const RawPacket> packets) {
  const bool link = packets.empty() || packets.front().has_link_header;
  for (const auto& p : packets) {
    if (p.has_link_header != link) throw ConfigError("mixed link-layer framing in one capture");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write capture " + path.string());
  put_le32(out, kPcapMagicMicros);
  put_le16(out, 2);
  put_le16(out, 4);
  put_le32(out, 0);
  put_le32(out, 0);
  put_le32(out, 65535);
  put_le32(out, link ? kLinkTypeEthernet : kLinkTypeRaw);
  for (const auto& p : packets) {
    const double whole = std::floor(p.timestamp);
    put_le32(out, static_cast<std::uint32_t>(whole));
    put_le32(out, static_cast<std::uint32_t>(std::llround((p.timestamp - whole) * 1e6)) % 1000000);
    put_le32(out, static_cast<std::uint32_t>(p.bytes.size()));
    put_le32(out, static_cast<std::uint32_t>(p.bytes.size()));
    out.write(reinterpret_cast<const char*>(p.bytes.data()),
              static_cast<std::streamsize>(p.bytes.size()));
  }
  if (!out) throw ConfigError("failed writing capture " + path.string());
}

void write_label_sidecar(const std::filesystem::path& path, std::span<const RawPacket> packets) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write label sidecar " + path.string());
  for (std::size_t i = 0; i < packets.size(); ++i) {
    out << i << ',' << to_int(packets[i].label) << '\n';
  }
}

}  // namespace driftarena
