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

// Independent oracles and small fixtures shared by the test suites.

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <random>
#include <vector>

#include "driftarena/synth.hpp"
#include "driftarena/traffic.hpp"

namespace testing_util {

// RFC 1071 verification: summing a region that includes its own checksum
// field yields 0xFFFF. Written without the library's accumulate/fold helpers.
inline std::uint16_t ones_sum(const std::vector<std::uint8_t>& data) {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < data.size(); i += 2) {
    const std::uint64_t hi = data[i];
    const std::uint64_t lo = i + 1 < data.size() ? data[i + 1] : 0;
    sum += (hi << 8) | lo;
  }
  while (sum > 0xFFFF) sum = (sum & 0xFFFF) + (sum >> 16);
  return static_cast<std::uint16_t>(sum);
}

struct WireCheck {
  bool lengths_ok = false;
  bool ip_checksum_ok = false;
  bool tcp_checksum_ok = false;
  std::size_t payload_offset = 0;
  std::size_t payload_len = 0;
  bool ok() const { return lengths_ok && ip_checksum_ok && tcp_checksum_ok; }
};

// Re-derives every length and checksum of an Ethernet/IPv4/TCP frame.
inline WireCheck verify_frame(const std::vector<std::uint8_t>& b, bool link) {
  WireCheck c;
  const std::size_t ip = link ? 14 : 0;
  if (b.size() < ip + 40) return c;
  const std::size_t ihl = (b[ip] & 0x0F) * 4u;
  const std::size_t total = (static_cast<std::size_t>(b[ip + 2]) << 8) | b[ip + 3];
  const std::size_t tcp = ip + ihl;
  if (tcp + 20 > b.size()) return c;
  const std::size_t doff = (b[tcp + 12] >> 4) * 4u;
  c.lengths_ok = (b[ip] >> 4) == 4 && ihl >= 20 && doff >= 20 && doff <= 60 && ip + total == b.size() &&
                 ihl + doff <= total;
  if (!c.lengths_ok) return c;
  c.ip_checksum_ok = ones_sum({b.begin() + static_cast<long>(ip), b.begin() + static_cast<long>(ip + ihl)}) == 0xFFFF;
  std::vector<std::uint8_t> pseudo(b.begin() + static_cast<long>(ip + 12), b.begin() + static_cast<long>(ip + 20));
  const std::size_t seg = total - ihl;
  pseudo.push_back(0);
  pseudo.push_back(6);
  pseudo.push_back(static_cast<std::uint8_t>(seg >> 8));
  pseudo.push_back(static_cast<std::uint8_t>(seg & 0xFF));
  pseudo.insert(pseudo.end(), b.begin() + static_cast<long>(tcp), b.end());
  c.tcp_checksum_ok = ones_sum(pseudo) == 0xFFFF;
  c.payload_offset = tcp + doff;
  c.payload_len = b.size() - c.payload_offset;
  return c;
}

inline std::vector<driftarena::RawPacket> packets(std::size_t n, std::uint64_t seed) {
  return driftarena::synth_generate(driftarena::default_profile(), n, seed);
}

inline std::vector<driftarena::FeatureVector> features(const std::vector<driftarena::RawPacket>& pkts) {
  std::vector<driftarena::FeatureVector> out;
  for (const auto& p : pkts) out.push_back(driftarena::preprocess(p));
  return out;
}

inline driftarena::FeatureVector constant_vector(double v, driftarena::Label label = driftarena::Label::kBenign) {
  return {std::vector<double>(driftarena::kFeatureDim, v), label};
}

// Histogram KL without smoothing, written out directly.
inline double kl_oracle(const std::vector<double>& p, const std::vector<double>& q, std::size_t bins) {
  std::vector<double> hp(bins, 0.0), hq(bins, 0.0);
  auto bin = [bins](double v) {
    long b = static_cast<long>(std::floor(v * static_cast<double>(bins)));
    return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(bins) - 1));
  };
  for (double v : p) hp[bin(v)] += 1.0 / static_cast<double>(p.size());
  for (double v : q) hq[bin(v)] += 1.0 / static_cast<double>(q.size());
  double d = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    if (hp[i] == 0.0) continue;
    if (hq[i] == 0.0) return std::numeric_limits<double>::infinity();
    d += hp[i] * std::log(hp[i] / hq[i]);
  }
  return d;
}

// W1 as the integral of |Qa(u) - Qb(u)| over u in [0,1].
inline double w1_oracle(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> cuts{0.0, 1.0};
  for (std::size_t i = 1; i < a.size(); ++i) cuts.push_back(static_cast<double>(i) / static_cast<double>(a.size()));
  for (std::size_t j = 1; j < b.size(); ++j) cuts.push_back(static_cast<double>(j) / static_cast<double>(b.size()));
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    const auto qa = a[std::min(a.size() - 1, static_cast<std::size_t>(mid * static_cast<double>(a.size())))];
    const auto qb = b[std::min(b.size() - 1, static_cast<std::size_t>(mid * static_cast<double>(b.size())))];
    total += std::abs(qa - qb) * (hi - lo);
  }
  return total;
}

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, bool on_grid) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> level(0, 255);
  std::vector<double> v(n);
  for (double& x : v) x = on_grid ? level(rng) / 255.0 : u(rng);
  return v;
}

// Binary entropy in nats, 0 log 0 = 0.
inline double entropy_oracle(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

}  // namespace testing_util
