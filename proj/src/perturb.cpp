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

#include "driftarena/perturb.hpp"

#include <algorithm>
#include <string>

namespace driftarena {

namespace {

constexpr std::uint8_t kOptEol = 0;
constexpr std::uint8_t kOptNop = 1;
constexpr std::uint8_t kOptMss = 2;
constexpr std::uint8_t kOptWScale = 3;
constexpr std::uint8_t kMaxWScale = 14;

}  // namespace

PacketView::PacketView(RawPacket pkt) : pkt_(std::move(pkt)) { reparse(); }

PacketView PacketView::from_raw(const RawPacket& pkt) {
  const auto layout = wire::parse_layout(pkt.bytes, pkt.has_link_header);
  const std::size_t end = layout.ip_offset + layout.ip_total_len;
  if (end > pkt.bytes.size()) {
    throw MalformedPacket("truncated capture cannot be perturbed");
  }
  RawPacket copy = pkt;
  copy.bytes.resize(end);
  return PacketView(std::move(copy));
}

void PacketView::reparse() { layout_ = wire::parse_layout(pkt_.bytes, pkt_.has_link_header); }

std::uint8_t PacketView::ip_flags() const {
  return static_cast<std::uint8_t>(pkt_.bytes[layout_.ip_offset + 6] >> 5);
}

std::uint8_t PacketView::ttl() const { return pkt_.bytes[layout_.ip_offset + 8]; }

std::uint16_t PacketView::window() const {
  return wire::load_be16(pkt_.bytes, layout_.tcp_offset + 14);
}

std::span<const std::uint8_t> PacketView::options() const {
  return std::span<const std::uint8_t>(pkt_.bytes)
      .subspan(layout_.tcp_offset + wire::kMinTcpHeader, layout_.tcp_header_len - wire::kMinTcpHeader);
}

std::span<const std::uint8_t> PacketView::payload() const {
  return std::span<const std::uint8_t>(pkt_.bytes).subspan(layout_.payload_offset, layout_.payload_len);
}

std::optional<std::size_t> PacketView::find_option(std::uint8_t kind) const {
  const auto opts = options();
  std::size_t i = 0;
  while (i < opts.size()) {
    const std::uint8_t k = opts[i];
    if (k == kOptEol) break;
    if (k == kOptNop) {
      ++i;
      continue;
    }
    if (i + 1 >= opts.size() || opts[i + 1] < 2 || i + opts[i + 1] > opts.size()) break;
    if (k == kind) return i;
    i += opts[i + 1];
  }
  return std::nullopt;
}

std::optional<std::uint16_t> PacketView::mss() const {
  const auto at = find_option(kOptMss);
  if (!at || options()[*at + 1] != 4) return std::nullopt;
  return wire::load_be16(options(), *at + 2);
}

std::optional<std::uint8_t> PacketView::window_scale() const {
  const auto at = find_option(kOptWScale);
  if (!at || options()[*at + 1] != 3) return std::nullopt;
  return options()[*at + 2];
}

void PacketView::set_ip_flags(std::uint8_t flags) {
  auto& b = pkt_.bytes[layout_.ip_offset + 6];
  b = static_cast<std::uint8_t>((b & 0x1F) | ((flags & 0x7) << 5));
}

void PacketView::set_ttl(std::uint8_t ttl) { pkt_.bytes[layout_.ip_offset + 8] = ttl; }

void PacketView::set_window(std::uint16_t window) {
  wire::store_be16(pkt_.bytes, layout_.tcp_offset + 14, window);
}

void PacketView::set_mss(std::uint16_t mss) {
  const auto at = find_option(kOptMss);
  if (!at) throw StateError("no MSS option to update");
  wire::store_be16(pkt_.bytes, layout_.tcp_offset + wire::kMinTcpHeader + *at + 2, mss);
}

void PacketView::set_window_scale(std::uint8_t shift) {
  const auto at = find_option(kOptWScale);
  if (!at) throw StateError("no window-scale option to update");
  pkt_.bytes[layout_.tcp_offset + wire::kMinTcpHeader + *at + 2] = shift;
}

void PacketView::set_total_length(std::size_t ip_total) {
  wire::store_be16(pkt_.bytes, layout_.ip_offset + 2, static_cast<std::uint16_t>(ip_total));
}

bool PacketView::insert_option(std::span<const std::uint8_t> option) {
  const auto opts = options();
  // Keep everything up to the last byte that is not EOL padding.
  std::size_t used = opts.size();
  while (used > 0 && opts[used - 1] == kOptEol) --used;
  std::vector<std::uint8_t> rebuilt(opts.begin(), opts.begin() + static_cast<std::ptrdiff_t>(used));
  rebuilt.insert(rebuilt.end(), option.begin(), option.end());
  while (rebuilt.size() % 4 != 0) rebuilt.push_back(kOptEol);
  if (rebuilt.size() > wire::kMaxTcpOptions) return false;
  const std::size_t grow = rebuilt.size() - opts.size();
  if (pkt_.bytes.size() + grow > kMaxPacketBytes) return false;

  const auto begin = pkt_.bytes.begin() + static_cast<std::ptrdiff_t>(layout_.tcp_offset + wire::kMinTcpHeader);
  pkt_.bytes.erase(begin, begin + static_cast<std::ptrdiff_t>(opts.size()));
  pkt_.bytes.insert(pkt_.bytes.begin() + static_cast<std::ptrdiff_t>(layout_.tcp_offset + wire::kMinTcpHeader),
                    rebuilt.begin(), rebuilt.end());
  auto& doff = pkt_.bytes[layout_.tcp_offset + 12];
  doff = static_cast<std::uint8_t>((doff & 0x0F) | (((wire::kMinTcpHeader + rebuilt.size()) / 4) << 4));
  set_total_length(layout_.ip_total_len + grow);
  reparse();
  return true;
}

void PacketView::append_payload(std::span<const std::uint8_t> bytes) {
  pkt_.bytes.insert(pkt_.bytes.end(), bytes.begin(), bytes.end());
  set_total_length(layout_.ip_total_len + bytes.size());
  reparse();
}

void PacketView::update_checksums() { wire::write_checksums(pkt_.bytes, layout_); }

bool PacketView::valid() const {
  try {
    const auto l = wire::parse_layout(pkt_.bytes, pkt_.has_link_header);
    return l.ip_offset + l.ip_total_len == pkt_.bytes.size() && wire::checksums_valid(pkt_.bytes, l);
  } catch (const Error&) {
    return false;
  }
}

PerturbAction perturb_action_from_int(int id) {
  if (id < 0 || id >= static_cast<int>(kPerturbActionCount)) {
    throw ConfigError("perturbation action id out of range: " + std::to_string(id));
  }
  return static_cast<PerturbAction>(id);
}

std::string_view perturb_action_name(PerturbAction a) {
  switch (a) {
    case PerturbAction::kSetFragment: return "set_fragment";
    case PerturbAction::kSetMoreFragments: return "set_more_fragments";
    case PerturbAction::kTtlInc: return "ttl_inc";
    case PerturbAction::kTtlDec: return "ttl_dec";
    case PerturbAction::kWindowInc: return "window_inc";
    case PerturbAction::kWindowDec: return "window_dec";
    case PerturbAction::kMssAddOrInc: return "mss_add_or_inc";
    case PerturbAction::kMssDec: return "mss_dec";
    case PerturbAction::kWScaleAddOrInc: return "wscale_add_or_inc";
    case PerturbAction::kWScaleDec: return "wscale_dec";
    case PerturbAction::kAppendSegmentInfo: return "append_segment_info";
  }
  return "unknown";
}

namespace {

template <typename T>
T saturating_add(T v, int delta, int lo, int hi) {
  return static_cast<T>(std::clamp(static_cast<int>(v) + delta, lo, hi));
}

// Returns whether the header/payload changed.
bool mutate(PacketView& v, PerturbAction action, const PerturbConfig& c) {
  switch (action) {
    case PerturbAction::kSetFragment: {
      if (!v.dont_fragment()) return false;
      v.set_ip_flags(static_cast<std::uint8_t>(v.ip_flags() & ~0x2));
      return true;
    }
    case PerturbAction::kSetMoreFragments: {
      if (!v.dont_fragment() && v.more_fragments()) return false;
      v.set_ip_flags(static_cast<std::uint8_t>((v.ip_flags() & ~0x2) | 0x1));
      return true;
    }
    case PerturbAction::kTtlInc:
    case PerturbAction::kTtlDec: {
      const int d = action == PerturbAction::kTtlInc ? c.ttl_step : -static_cast<int>(c.ttl_step);
      const auto ttl = saturating_add(v.ttl(), d, 1, 255);
      if (ttl == v.ttl()) return false;
      v.set_ttl(ttl);
      return true;
    }
    case PerturbAction::kWindowInc:
    case PerturbAction::kWindowDec: {
      const int d = action == PerturbAction::kWindowInc ? c.window_step : -static_cast<int>(c.window_step);
      const auto w = saturating_add(v.window(), d, 1, 65535);
      if (w == v.window()) return false;
      v.set_window(w);
      return true;
    }
    case PerturbAction::kMssAddOrInc: {
      if (const auto mss = v.mss()) {
        const auto next = saturating_add(*mss, c.mss_step, 1, 65535);
        if (next == *mss) return false;
        v.set_mss(next);
        return true;
      }
      const std::array<std::uint8_t, 4> opt{kOptMss, 4, static_cast<std::uint8_t>(c.mss_insert_value >> 8),
                                            static_cast<std::uint8_t>(c.mss_insert_value & 0xFF)};
      return v.insert_option(opt);
    }
    case PerturbAction::kMssDec: {
      const auto mss = v.mss();
      if (!mss) return false;
      const auto next = saturating_add(*mss, -static_cast<int>(c.mss_step), 1, 65535);
      if (next == *mss) return false;
      v.set_mss(next);
      return true;
    }
    case PerturbAction::kWScaleAddOrInc: {
      if (const auto ws = v.window_scale()) {
        const auto next = saturating_add(*ws, c.wscale_step, 0, kMaxWScale);
        if (next == *ws) return false;
        v.set_window_scale(next);
        return true;
      }
      const std::array<std::uint8_t, 4> opt{kOptNop, kOptWScale, 3,
                                            std::min<std::uint8_t>(c.wscale_insert_value, kMaxWScale)};
      return v.insert_option(opt);
    }
    case PerturbAction::kWScaleDec: {
      const auto ws = v.window_scale();
      if (!ws) return false;
      const auto next = saturating_add(*ws, -static_cast<int>(c.wscale_step), 0, kMaxWScale);
      if (next == *ws) return false;
      v.set_window_scale(next);
      return true;
    }
    case PerturbAction::kAppendSegmentInfo: {
      const std::size_t have = v.payload().size();
      if (have >= kPayloadBytes || c.segment_filler.empty() || c.segment_bytes == 0) return false;
      const std::size_t k = std::min({c.segment_bytes, kPayloadBytes - have,
                                      kMaxPacketBytes - v.raw().bytes.size()});
      if (k == 0) return false;
      std::vector<std::uint8_t> fill(k);
      for (std::size_t i = 0; i < k; ++i) {
        fill[i] = static_cast<std::uint8_t>(c.segment_filler[i % c.segment_filler.size()]);
      }
      v.append_payload(fill);
      return true;
    }
  }
  return false;
}

}  // namespace

PerturbOutcome apply(const PacketView& view, PerturbAction action, const PerturbConfig& config) {
  PacketView next = view;
  if (!mutate(next, action, config)) return PerturbOutcome{view, false};
  return PerturbOutcome{recompute_checksums(std::move(next)), true};
}

PacketView recompute_checksums(PacketView view) {
  view.update_checksums();
  return view;
}

FeatureVector to_features(const PacketView& view) { return preprocess(view.raw()); }

}  // namespace driftarena
