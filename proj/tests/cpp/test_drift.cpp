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
#include <cmath>
#include <random>
#include <set>

#include "driftarena/drift.hpp"
#include "helpers.hpp"

namespace da = driftarena;

namespace {

using testing_util::kl_oracle;
using testing_util::random_values;
using testing_util::w1_oracle;

da::FeatureVector random_vector(std::mt19937_64& rng, bool on_grid = true) {
  return {random_values(rng, da::kFeatureDim, on_grid), da::Label::kBenign};
}

std::vector<std::size_t> as_vector(std::initializer_list<std::size_t> v) { return v; }

}  // namespace

TEST(Drift, ActiveExamples) {
  da::AdaptationBudget b;
  b.B = 2;
  EXPECT_EQ(da::select_active_from_confidence(std::vector<double>{0.55, 0.90, 0.45, 0.50}, b), as_vector({3, 2}));
  b.B = 3;
  EXPECT_EQ(da::select_active_from_confidence(std::vector<double>(5, 0.5), b), as_vector({0, 1, 2}));
}

TEST(Drift, ActiveProperty) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  for (int t = 0; t < 1000; ++t) {
    da::AdaptationBudget b;
    b.B = 1 + rng() % 10;
    std::vector<double> c(1 + rng() % 40);
    for (double& x : c) x = u(rng);
    const auto sel = da::select_active_from_confidence(c, b);
    std::size_t in_band = 0;
    for (double x : c) in_band += x >= b.p_low && x <= b.p_high;
    EXPECT_EQ(sel.size(), std::min<std::size_t>(b.B, in_band));
    for (std::size_t k = 1; k < sel.size(); ++k) {
      EXPECT_LE(std::abs(c[sel[k - 1]] - 0.5), std::abs(c[sel[k]] - 0.5));
    }
  }
}

TEST(Drift, ContinualExample) {
  da::AdaptationBudget b;
  const auto s = da::select_continual_from_entropy(std::vector<double>{0.1, 0.4, 0.65}, b);
  EXPECT_EQ(s.representative, as_vector({0}));
  EXPECT_EQ(s.discriminative, as_vector({2}));
}

TEST(Drift, ContinualPartitionMatchesBruteForce) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, std::log(2.0));
  for (int t = 0; t < 1000; ++t) {
    da::AdaptationBudget b;
    b.tau_low = u(rng) * 0.5;
    b.tau_high = b.tau_low + u(rng) * 0.5;
    std::vector<double> h(1 + rng() % 50);
    for (double& x : h) x = u(rng);
    const auto s = da::select_continual_from_entropy(h, b);
    std::vector<std::size_t> rep, disc;
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (h[i] < b.tau_low) rep.push_back(i);
      if (h[i] > b.tau_high) disc.push_back(i);
    }
    ASSERT_EQ(s.representative, rep);
    ASSERT_EQ(s.discriminative, disc);
  }
}

TEST(Drift, PseudoLabelThreshold) {
  da::AdaptationBudget b;
  const std::vector<da::ProbabilityPair> p{{0.97, 0.03}, {0.94, 0.06}, {0.01, 0.99}};
  const auto sel = da::select_pseudo_from_proba(p, b);
  ASSERT_EQ(sel.size(), 2u);
  EXPECT_EQ(sel[0], (da::PseudoLabel{0, da::Label::kBenign}));
  EXPECT_EQ(sel[1], (da::PseudoLabel{2, da::Label::kMalicious}));
}

TEST(Drift, KlExamples) {
  const std::vector<double> p{0.5, 0.5}, q{0.25, 0.75};
  EXPECT_NEAR(da::kl_divergence_discrete(p, q), 0.1438, 1e-4);
  EXPECT_EQ(da::kl_divergence_discrete(p, p), 0.0);
  const std::vector<double> z{1.0, 0.0};
  EXPECT_TRUE(std::isinf(da::kl_divergence_discrete(p, z)));
  // Smoothing keeps it finite.
  EXPECT_TRUE(std::isfinite(da::kl_divergence_1d(std::vector<double>{0.9}, std::vector<double>{0.1})));
}

TEST(Drift, KlMatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::size_t finite = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t bins = 1 + rng() % 20;
    const auto p = random_values(rng, 1 + rng() % 30, t % 2 == 0);
    const auto q = random_values(rng, 1 + rng() % 60, t % 3 == 0);
    const double got = da::kl_divergence_1d(p, q, bins, false);
    const double want = kl_oracle(p, q, bins);
    if (std::isinf(want)) {
      EXPECT_TRUE(std::isinf(got));
    } else {
      ++finite;
      EXPECT_NEAR(got, want, 1e-9);
    }
  }
  EXPECT_GT(finite, 100u);
}

TEST(Drift, WassersteinExamples) {
  EXPECT_DOUBLE_EQ(da::wasserstein_1d(std::vector<double>{0.0}, std::vector<double>{0.5}), 0.5);
  EXPECT_DOUBLE_EQ(da::wasserstein_1d(std::vector<double>{0.2, 0.4}, std::vector<double>{0.4, 0.2}), 0.0);
  EXPECT_NEAR(da::wasserstein_1d(std::vector<double>{0.0, 1.0}, std::vector<double>{0.5}), 0.5, 1e-12);
}

TEST(Drift, WassersteinMatchesBruteForce) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_values(rng, 1 + rng() % 40, t % 2 == 0);
    const auto b = random_values(rng, 1 + rng() % 40, t % 3 == 0);
    ASSERT_NEAR(da::wasserstein_1d(a, b), w1_oracle(a, b), 1e-9) << "case " << t;
  }
}

TEST(Drift, WassersteinIsAMetric) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 300; ++t) {
    const auto a = random_values(rng, 1 + rng() % 20, false);
    const auto b = random_values(rng, 1 + rng() % 20, false);
    const auto c = random_values(rng, 1 + rng() % 20, false);
    EXPECT_NEAR(da::wasserstein_1d(a, b), da::wasserstein_1d(b, a), 1e-12);
    EXPECT_LE(da::wasserstein_1d(a, c), da::wasserstein_1d(a, b) + da::wasserstein_1d(b, c) + 1e-12);
    EXPECT_EQ(da::wasserstein_1d(a, a), 0.0);
  }
}

TEST(Drift, FeatureDiffMatchesBruteForce) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 1000; ++t) {
    da::SeenStats seen(4, t);
    std::vector<da::FeatureVector> hist(1 + rng() % 6), batch(1 + rng() % 4);
    for (auto& x : hist) x = random_vector(rng, false);
    for (auto& x : batch) x = random_vector(rng, false);
    seen.ingest(hist);
    const auto d = da::feature_diff(batch, seen);
    ASSERT_FALSE(d.cold_start);
    // Spot-check a handful of coordinates per case.
    for (int k = 0; k < 5; ++k) {
      const std::size_t j = rng() % da::kFeatureDim;
      double mb = 0.0, mh = 0.0;
      for (const auto& x : batch) mb += x.values[j];
      for (const auto& x : hist) mh += x.values[j];
      const double want = mb / static_cast<double>(batch.size()) - mh / static_cast<double>(hist.size());
      ASSERT_NEAR(d.f[j], want, 1e-9);
    }
  }
}

TEST(Drift, FeatureDiffColdStart) {
  da::SeenStats seen;
  const auto d = da::feature_diff(std::vector<da::FeatureVector>{testing_util::constant_vector(0.4)}, seen);
  EXPECT_TRUE(d.cold_start);
  EXPECT_DOUBLE_EQ(d.f[0], 0.4);
}

TEST(Drift, GridFastPathMatchesGenericPath) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 3; ++t) {
    da::SeenStats grid(40, t);
    std::vector<da::FeatureVector> hist(60), batch(12);
    for (auto& x : hist) x = random_vector(rng, true);
    for (auto& x : batch) x = random_vector(rng, true);
    grid.ingest(hist);
    ASSERT_TRUE(grid.on_grid());
    double kl = 0.0, w = 0.0;
    for (std::size_t j = 0; j < da::kFeatureDim; ++j) {
      std::vector<double> a, b;
      for (const auto& x : batch) a.push_back(x.values[j]);
      for (const auto& x : grid.reservoir()) b.push_back(x.values[j]);
      kl += da::kl_divergence_1d(a, b, da::kKlBins, true);
      w += da::wasserstein_1d(a, b);
    }
    EXPECT_NEAR(da::kl_divergence(batch, grid), kl / da::kFeatureDim, 1e-9);
    EXPECT_NEAR(da::wasserstein(batch, grid), w / da::kFeatureDim, 1e-9);
  }
}

TEST(Drift, SeenStatsReservoirAndMean) {
  da::SeenStats seen(10, 1);
  std::mt19937_64 rng(8);
  std::vector<double> sum(da::kFeatureDim, 0.0);
  for (int i = 0; i < 50; ++i) {
    const auto x = random_vector(rng);
    for (std::size_t j = 0; j < da::kFeatureDim; ++j) sum[j] += x.values[j];
    seen.ingest(x);
  }
  EXPECT_EQ(seen.count(), 50u);
  EXPECT_EQ(seen.reservoir().size(), 10u);
  const auto m = seen.mean();
  EXPECT_NEAR(m[17], sum[17] / 50.0, 1e-12);
  std::uint32_t total = 0;
  for (auto c : seen.grid_counts(3)) total += c;
  EXPECT_EQ(total, 10u);
  EXPECT_TRUE(seen.on_grid());
  da::SeenStats off(10, 1);
  off.ingest(testing_util::constant_vector(0.123456));
  EXPECT_FALSE(off.on_grid());
}

TEST(Drift, BudgetValidation) {
  da::AdaptationBudget b;
  EXPECT_NO_THROW(b.validate());
  b.B = 0;
  EXPECT_THROW(b.validate(), da::ConfigError);
  b = {};
  b.p_low = 0.7;
  EXPECT_THROW(b.validate(), da::ConfigError);
  b = {};
  b.conf_threshold = 0.5;
  EXPECT_THROW(b.validate(), da::ConfigError);
}

class AdaptationTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto x = testing_util::features(testing_util::packets(400, 9));
    model_ = da::Classifier::fit_initial(std::span(x).first(200), 1);
    batch_.assign(x.begin() + 200, x.begin() + 300);
    seen_.ingest(std::span(x).first(200));
  }
  da::AdaptationOutcome run(da::AdaptationAction a) {
    queried_.clear();
    da::LabelOracle oracle = [this](std::size_t i) {
      queried_.insert(i);
      return batch_[i].label;
    };
    return da::apply_adaptation(model_, a, batch_, budget_, oracle, seen_, rng_);
  }
  da::Classifier model_;
  std::vector<da::FeatureVector> batch_;
  da::SeenStats seen_{500, 3};
  da::AdaptationBudget budget_;
  da::Rng rng_{4};
  std::set<std::size_t> queried_;
};

TEST_F(AdaptationTest, OnlineUsesBudget) {
  const auto out = run(da::AdaptationAction::kOnline);
  EXPECT_EQ(out.labels_queried, 30u);
  EXPECT_EQ(out.samples_used, 30u);
  EXPECT_EQ(queried_.size(), 30u);
  EXPECT_EQ(std::set<std::size_t>(out.selected_indices.begin(), out.selected_indices.end()).size(), 30u);
  EXPECT_EQ(model_.version(), 1u);
}

TEST_F(AdaptationTest, ActiveWithinBudget) {
  const auto out = run(da::AdaptationAction::kActive);
  EXPECT_LE(out.samples_used, budget_.B);
  EXPECT_EQ(out.labels_queried, out.samples_used);
}

TEST_F(AdaptationTest, ContinualCapsBatchSamples) {
  budget_.tau_low = 0.69;  // nearly everything is representative
  budget_.tau_high = 0.69;
  const auto out = run(da::AdaptationAction::kContinual);
  EXPECT_EQ(out.samples_used, budget_.B);
  EXPECT_EQ(out.replay_used, out.samples_used);
  EXPECT_EQ(out.labels_queried, out.samples_used);
}

TEST_F(AdaptationTest, PseudoLabelQueriesNothing) {
  const auto out = run(da::AdaptationAction::kPseudoLabel);
  EXPECT_EQ(out.labels_queried, 0u);
  EXPECT_TRUE(queried_.empty());
}

TEST_F(AdaptationTest, EmptySelectionLeavesModel) {
  budget_.p_low = 0.5;
  budget_.p_high = 0.5;
  const auto before = model_.network().params();
  const auto out = run(da::AdaptationAction::kActive);
  if (out.samples_used == 0) {
    EXPECT_TRUE(out.update.skipped);
    EXPECT_EQ(model_.version(), 0u);
    EXPECT_EQ(model_.network().params(), before);
  }
}

TEST(Drift, OnlineSelectionIsUniformSubset) {
  da::Rng rng(10);
  std::vector<std::size_t> hits(10, 0);
  for (int t = 0; t < 10000; ++t) {
    const auto s = da::select_online(10, 3, rng);
    ASSERT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 3u);
    for (auto i : s) ++hits[i];
  }
  for (auto h : hits) EXPECT_NEAR(h / 30000.0, 0.1, 0.01);
  EXPECT_EQ(da::select_online(4, 30, rng).size(), 4u);
}
