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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driftarena/traffic.hpp"
#include "driftarena/wire.hpp"

namespace driftarena {

// A complete (untruncated) IPv4/TCP packet with accessors for the header
// fields the perturbations touch. Setters keep the length fields consistent
// but leave checksums alone; call recompute_checksums afterwards.
class PacketView {
 public:
  // Throws RejectedPacket / MalformedPacket; truncated captures are rejected
  // as malformed. Trailing link-layer padding is dropped.
  static PacketView from_raw(const RawPacket& pkt);

  const RawPacket& raw() const { return pkt_; }
  const wire::Layout& layout() const { return layout_; }
  Label label() const { return pkt_.label; }

  // Top three bits of the flags/fragment word: bit 1 = DF, bit 0 = MF.
  std::uint8_t ip_flags() const;
  bool dont_fragment() const { return (ip_flags() & 0x2) != 0; }
  bool more_fragments() const { return (ip_flags() & 0x1) != 0; }
  std::uint8_t ttl() const;
  std::uint16_t window() const;
  std::optional<std::uint16_t> mss() const;
  std::optional<std::uint8_t> window_scale() const;
  std::span<const std::uint8_t> options() const;
  std::span<const std::uint8_t> payload() const;

  void set_ip_flags(std::uint8_t flags);
  void set_ttl(std::uint8_t ttl);
  void set_window(std::uint16_t window);
  void set_mss(std::uint16_t mss);            // option must exist
  void set_window_scale(std::uint8_t shift);  // option must exist
  // Returns false when the options region cannot hold the new option.
  bool insert_option(std::span<const std::uint8_t> option);
  void append_payload(std::span<const std::uint8_t> bytes);
  void update_checksums();

  // Length fields agree with the buffer and both checksums verify.
  bool valid() const;

 private:
  explicit PacketView(RawPacket pkt);
  std::optional<std::size_t> find_option(std::uint8_t kind) const;
  void set_total_length(std::size_t ip_total);
  void reparse();

  RawPacket pkt_;
  wire::Layout layout_;
};

enum class PerturbAction : std::uint8_t {
  kSetFragment = 0,
  kSetMoreFragments = 1,
  kTtlInc = 2,
  kTtlDec = 3,
  kWindowInc = 4,
  kWindowDec = 5,
  kMssAddOrInc = 6,
  kMssDec = 7,
  kWScaleAddOrInc = 8,
  kWScaleDec = 9,
  kAppendSegmentInfo = 10,
};

inline constexpr std::size_t kPerturbActionCount = 11;

PerturbAction perturb_action_from_int(int id);
std::string_view perturb_action_name(PerturbAction a);

struct PerturbConfig {
  std::uint8_t ttl_step = 1;
  std::uint16_t window_step = 1024;
  std::uint16_t mss_step = 64;
  std::uint8_t wscale_step = 1;
  std::size_t segment_bytes = 32;
  // Values used when an absent option is inserted.
  std::uint16_t mss_insert_value = 1460;
  std::uint8_t wscale_insert_value = 7;
  std::string segment_filler = "X-Seg: ";
};

struct PerturbOutcome {
  PacketView view;
  // False when the action hit a saturation bound, a missing option, a full
  // options region or a full payload; the view is then unchanged.
  bool effective = true;
};

PerturbOutcome apply(const PacketView& view, PerturbAction action, const PerturbConfig& config = {});

PacketView recompute_checksums(PacketView view);

// Equal to preprocess(view.raw()).
FeatureVector to_features(const PacketView& view);

}  // namespace driftarena
