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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "driftarena/perturb.hpp"
#include "driftarena/synth.hpp"
#include "helpers.hpp"

namespace da = driftarena;
using A = da::PerturbAction;

namespace {

da::PacketView view_of(const da::TcpPacketFields& f, da::Label label = da::Label::kMalicious) {
  return da::PacketView::from_raw(da::build_tcp_packet(f, label));
}

da::TcpPacketFields bare() {
  da::TcpPacketFields f;
  f.payload = {1, 2, 3, 4, 5, 6, 7};
  return f;
}

}  // namespace

TEST(Perturb, ActionIdsAndNames) {
  for (int i = 0; i < 11; ++i) EXPECT_FALSE(da::perturb_action_name(da::perturb_action_from_int(i)).empty());
  EXPECT_THROW(da::perturb_action_from_int(11), da::ConfigError);
  EXPECT_THROW(da::perturb_action_from_int(-1), da::ConfigError);
}

TEST(Perturb, FragmentFlags) {
  const auto v = view_of(bare());
  ASSERT_TRUE(v.dont_fragment());
  const auto a = da::apply(v, A::kSetFragment);
  EXPECT_TRUE(a.effective);
  EXPECT_FALSE(a.view.dont_fragment());
  EXPECT_FALSE(da::apply(a.view, A::kSetFragment).effective);
  const auto b = da::apply(v, A::kSetMoreFragments);
  EXPECT_TRUE(b.view.more_fragments());
  EXPECT_FALSE(b.view.dont_fragment());
  EXPECT_FALSE(da::apply(b.view, A::kSetMoreFragments).effective);
}

TEST(Perturb, TtlSaturates) {
  auto f = bare();
  f.ttl = 255;
  const auto v = view_of(f);
  EXPECT_FALSE(da::apply(v, A::kTtlInc).effective);
  EXPECT_EQ(da::apply(v, A::kTtlDec).view.ttl(), 254);
  f.ttl = 1;
  EXPECT_FALSE(da::apply(view_of(f), A::kTtlDec).effective);
}

TEST(Perturb, WindowSteps) {
  auto f = bare();
  f.window = 5000;
  const auto v = view_of(f);
  EXPECT_EQ(da::apply(v, A::kWindowInc).view.window(), 6024);
  EXPECT_EQ(da::apply(v, A::kWindowDec).view.window(), 3976);
  f.window = 65535;
  EXPECT_FALSE(da::apply(view_of(f), A::kWindowInc).effective);
}

TEST(Perturb, MssInsertThenStep) {
  const auto v = view_of(bare());
  ASSERT_FALSE(v.mss().has_value());
  EXPECT_FALSE(da::apply(v, A::kMssDec).effective);
  const auto a = da::apply(v, A::kMssAddOrInc);
  ASSERT_TRUE(a.effective);
  EXPECT_EQ(a.view.mss(), 1460);
  EXPECT_EQ(a.view.layout().tcp_header_len, 24u);
  EXPECT_EQ(da::apply(a.view, A::kMssAddOrInc).view.mss(), 1524);
  EXPECT_EQ(da::apply(a.view, A::kMssDec).view.mss(), 1396);
}

TEST(Perturb, WindowScaleInsertThenStep) {
  const auto v = view_of(bare());
  const auto a = da::apply(v, A::kWScaleAddOrInc);
  ASSERT_TRUE(a.effective);
  EXPECT_EQ(a.view.window_scale(), 7);
  EXPECT_EQ(da::apply(a.view, A::kWScaleDec).view.window_scale(), 6);
  auto f = bare();
  f.options = da::wscale_option(14);
  EXPECT_FALSE(da::apply(view_of(f), A::kWScaleAddOrInc).effective);
}

TEST(Perturb, OptionsRegionFull) {
  auto f = bare();
  f.options.assign(40, 1);  // all NOPs
  const auto v = view_of(f);
  EXPECT_FALSE(da::apply(v, A::kMssAddOrInc).effective);
  EXPECT_FALSE(da::apply(v, A::kWScaleAddOrInc).effective);
}

TEST(Perturb, AppendSegmentGrowsPayload) {
  const auto v = view_of(bare());
  const auto a = da::apply(v, A::kAppendSegmentInfo);
  ASSERT_TRUE(a.effective);
  EXPECT_EQ(a.view.payload().size(), 7u + 32u);
  EXPECT_EQ(a.view.payload()[7], 'X');
  auto f = bare();
  f.payload.assign(1460, 0x41);
  EXPECT_FALSE(da::apply(view_of(f), A::kAppendSegmentInfo).effective);
}

TEST(Perturb, IneffectiveLeavesPacketUnchanged) {
  auto f = bare();
  f.ttl = 255;
  const auto v = view_of(f);
  const auto a = da::apply(v, A::kTtlInc);
  EXPECT_EQ(a.view.raw(), v.raw());
}

TEST(Perturb, TruncatedCaptureRejected) {
  auto p = da::build_tcp_packet(bare());
  p.bytes.pop_back();
  EXPECT_THROW(da::PacketView::from_raw(p), da::MalformedPacket);
}

TEST(Perturb, FeaturesMatchPreprocess) {
  const auto v = da::apply(view_of(bare()), A::kMssAddOrInc).view;
  EXPECT_EQ(da::to_features(v), da::preprocess(v.raw()));
}

// 10,000 random (packet, action) pairs, including chained actions, checked
// against an independent length and checksum verifier.
TEST(PerturbProperty, WireValidityAndInvariants) {
  const auto pkts = testing_util::packets(500, 21);
  std::mt19937_64 rng(99);
  std::size_t checked = 0;
  std::size_t effective = 0;
  for (std::size_t trial = 0; trial < 10000; ++trial) {
    const auto& src = pkts[rng() % pkts.size()];
    auto view = da::PacketView::from_raw(src);
    const std::vector<std::uint8_t> payload0(view.payload().begin(), view.payload().end());
    const std::size_t chain = 1 + rng() % 4;
    for (std::size_t k = 0; k < chain; ++k) {
      const auto a = static_cast<A>(rng() % da::kPerturbActionCount);
      auto out = da::apply(view, a);
      effective += out.effective;
      view = std::move(out.view);
      const auto c = testing_util::verify_frame(view.raw().bytes, view.raw().has_link_header);
      ASSERT_TRUE(c.lengths_ok) << "trial " << trial;
      ASSERT_TRUE(c.ip_checksum_ok) << "trial " << trial;
      ASSERT_TRUE(c.tcp_checksum_ok) << "trial " << trial;
      ASSERT_TRUE(view.valid());
      ASSERT_EQ(view.label(), src.label);
      ASSERT_LE(view.raw().bytes.size(), da::kMaxPacketBytes);
      // Original payload is untouched; only appends may follow it.
      const auto& b = view.raw().bytes;
      ASSERT_GE(c.payload_len, payload0.size());
      ASSERT_TRUE(std::equal(payload0.begin(), payload0.end(), b.begin() + static_cast<long>(c.payload_offset)));
      ++checked;
    }
  }
  EXPECT_GE(checked, 10000u);
  EXPECT_GT(effective, checked / 2);
}
