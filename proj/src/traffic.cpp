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

#include "driftarena/traffic.hpp"

#include <algorithm>
#include <string>

#include "driftarena/wire.hpp"

namespace driftarena {

Label label_from_int(int v) {
  if (v == 0) return Label::kBenign;
  if (v == 1) return Label::kMalicious;
  throw ConfigError("label must be 0 or 1, got " + std::to_string(v));
}

std::vector<std::uint8_t> canonical_bytes(const RawPacket& pkt) {
  namespace fo = feature_offset;
  const std::span<const std::uint8_t> bytes(pkt.bytes);
  const wire::Layout l = wire::parse_layout(bytes, pkt.has_link_header);
  const auto ip = bytes.subspan(l.ip_offset);
  const auto tcp = bytes.subspan(l.tcp_offset);

  std::vector<std::uint8_t> out(kFeatureDim, 0);
  auto put = [&](std::size_t dst, std::span<const std::uint8_t> src) {
    std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(dst));
  };
  put(fo::kVersionIhl, ip.subspan(0, 9));   // ver/ihl .. ttl
  put(fo::kIpChecksum, ip.subspan(10, 2));
  put(fo::kSequence, tcp.subspan(4, 12));  // seq .. window
  put(fo::kTcpChecksum, tcp.subspan(16, 2));
  put(fo::kOptions, tcp.subspan(wire::kMinTcpHeader, l.tcp_header_len - wire::kMinTcpHeader));
  put(fo::kPayload, bytes.subspan(l.payload_offset, std::min(l.payload_len, kPayloadBytes)));
  return out;
}

FeatureVector preprocess(const RawPacket& pkt) {
  const auto raw = canonical_bytes(pkt);
  FeatureVector fv;
  fv.label = pkt.label;
  fv.values.resize(kFeatureDim);
  std::transform(raw.begin(), raw.end(), fv.values.begin(),
                 [](std::uint8_t b) { return static_cast<double>(b) / 255.0; });
  return fv;
}

std::vector<std::size_t> split_sizes(std::size_t n, std::size_t k) {
  if (k == 0) throw ConfigError("n_batches must be at least 1");
  if (n == 0) throw ConfigError("cannot split an empty dataset");
  if (k > n) {
    throw ConfigError("n_batches (" + std::to_string(k) + ") exceeds dataset size (" +
                      std::to_string(n) + ")");
  }
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t i = 0; i < n % k; ++i) ++sizes[i];
  return sizes;
}

std::vector<Batch> batch_split(std::span<const FeatureVector> data, std::size_t n_batches) {
  const auto sizes = split_sizes(data.size(), n_batches);
  std::vector<Batch> out(n_batches);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < n_batches; ++b) {
    out[b].index = b;
    out[b].samples.assign(data.begin() + static_cast<std::ptrdiff_t>(pos),
                          data.begin() + static_cast<std::ptrdiff_t>(pos + sizes[b]));
    pos += sizes[b];
  }
  return out;
}

std::vector<Batch> batch_split(std::span<const RawPacket> packets, std::size_t n_batches) {
  const auto sizes = split_sizes(packets.size(), n_batches);
  std::vector<Batch> out(n_batches);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < n_batches; ++b) {
    out[b].index = b;
    out[b].raw.emplace(packets.begin() + static_cast<std::ptrdiff_t>(pos),
                       packets.begin() + static_cast<std::ptrdiff_t>(pos + sizes[b]));
    out[b].samples.reserve(sizes[b]);
    for (const auto& p : *out[b].raw) out[b].samples.push_back(preprocess(p));
    pos += sizes[b];
  }
  return out;
}

}  // namespace driftarena
