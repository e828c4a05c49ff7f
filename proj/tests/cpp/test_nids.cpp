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

#include <cmath>
#include <filesystem>
#include <random>

#include "driftarena/nids.hpp"
#include "helpers.hpp"

namespace da = driftarena;

namespace {

struct Split {
  std::vector<da::FeatureVector> train;
  std::vector<da::FeatureVector> test;
};

const Split& default_split() {
  static const Split s = [] {
    const auto x = testing_util::features(testing_util::packets(1000, 1));
    return Split{{x.begin(), x.begin() + 800}, {x.begin() + 800, x.end()}};
  }();
  return s;
}

const da::Classifier& fitted() {
  static const da::Classifier c = da::Classifier::fit_initial(default_split().train, 42);
  return c;
}

std::vector<da::FeatureVector> random_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<da::FeatureVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    da::FeatureVector x;
    x.values.resize(da::kFeatureDim);
    for (double& v : x.values) v = byte(rng) / 255.0;
    x.label = i % 2 ? da::Label::kMalicious : da::Label::kBenign;
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

TEST(Nids, InitialFitReachesAccuracy) {
  const auto m = da::evaluate(fitted(), default_split().test);
  EXPECT_GE(m.acc, 0.95);
  EXPECT_EQ(m.confusion.total(), 200u);
}

TEST(Nids, ZeroParametersPredictHalf) {
  da::Classifier c;
  const auto p = c.predict_proba(testing_util::constant_vector(0.7));
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  // Ties go to benign.
  EXPECT_EQ(c.predict(testing_util::constant_vector(0.1)), da::Label::kBenign);
}

TEST(Nids, ProbabilitiesSumToOne) {
  for (const auto& x : random_samples(50, 3)) {
    const auto p = fitted().predict_proba(x);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
    EXPECT_GE(p[0], 0.0);
    EXPECT_GE(p[1], 0.0);
  }
}

TEST(Nids, BatchAndSinglePredictAgree) {
  const auto xs = random_samples(10, 4);
  const auto m = fitted().predict_proba(xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto p = fitted().predict_proba(xs[i]);
    EXPECT_NEAR(m(static_cast<long>(i), 0), p[0], 1e-12);
    EXPECT_NEAR(m(static_cast<long>(i), 1), p[1], 1e-12);
  }
}

TEST(Nids, PartialFitZeroRateLeavesModel) {
  da::Classifier c = fitted();
  c.set_incremental_learning_rate(0.0);
  const auto before = c.network().params();
  c.partial_fit(random_samples(30, 5));
  EXPECT_EQ(c.network().params(), before);
}

TEST(Nids, PartialFitLossNonIncreasing) {
  da::Classifier c = fitted();
  // Drifted samples: malicious packets relabelled as the classifier's blind spot.
  std::vector<da::FeatureVector> drift(default_split().test.begin(), default_split().test.begin() + 30);
  for (auto& x : drift) x.label = x.label == da::Label::kBenign ? da::Label::kMalicious : da::Label::kBenign;
  const auto rep = c.partial_fit(drift, 5);
  ASSERT_EQ(rep.losses.size(), 6u);
  for (std::size_t i = 1; i < rep.losses.size(); ++i) EXPECT_LE(rep.losses[i], rep.losses[i - 1] + 1e-12);
}

TEST(Nids, VersionIncrementsPerCall) {
  da::Classifier c = fitted();
  const auto v0 = c.version();
  EXPECT_EQ(v0, 0u);
  for (std::uint64_t k = 1; k <= 3; ++k) {
    c.partial_fit(random_samples(5, k));
    EXPECT_EQ(c.version(), v0 + k);
  }
  const auto rep = c.partial_fit({});
  EXPECT_TRUE(rep.skipped);
  EXPECT_EQ(c.version(), v0 + 3);
}

TEST(Nids, EntropyExamples) {
  EXPECT_NEAR(da::entropy({0.9, 0.1}), 0.3251, 1e-4);
  EXPECT_NEAR(da::entropy({0.5, 0.5}), std::log(2.0), 1e-12);
  EXPECT_EQ(da::entropy({1.0, 0.0}), 0.0);
}

TEST(Nids, EntropyMatchesBruteForce) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng);
    const double oracle = -(p * std::log(p) + (1 - p) * std::log1p(-p));
    EXPECT_NEAR(da::entropy({p, 1 - p}), oracle, 1e-9);
  }
}

TEST(Nids, MetricsFromConfusion) {
  const da::Confusion c{40, 50, 5, 5};
  const auto m = da::metrics_from_confusion(c);
  EXPECT_DOUBLE_EQ(m.acc, 0.9);
  EXPECT_DOUBLE_EQ(m.fpr, 5.0 / 55.0);
  EXPECT_DOUBLE_EQ(m.fnr, 5.0 / 45.0);
  EXPECT_DOUBLE_EQ(m.balanced_acc, 0.5 * (40.0 / 45.0 + 50.0 / 55.0));
  const auto only_benign = da::metrics_from_confusion({0, 10, 0, 0});
  EXPECT_TRUE(only_benign.fnr_undefined);
  EXPECT_EQ(only_benign.fnr, 0.0);
}

TEST(Nids, ConfusionCounts) {
  using L = da::Label;
  const std::vector<L> pred{L::kMalicious, L::kBenign, L::kMalicious, L::kBenign};
  const std::vector<L> truth{L::kMalicious, L::kMalicious, L::kBenign, L::kBenign};
  const auto c = da::confusion_of(pred, truth);
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.tn, 1u);
}

TEST(Nids, FitRejectsSingleClass) {
  auto xs = random_samples(10, 1);
  for (auto& x : xs) x.label = da::Label::kBenign;
  EXPECT_THROW(da::Classifier::fit_initial(xs, 1), da::ConfigError);
  EXPECT_THROW(da::Classifier::fit_initial({}, 1), da::ConfigError);
}

TEST(Nids, WrongDimensionThrows) {
  const std::vector<double> x(10, 0.0);
  EXPECT_THROW(fitted().predict_proba(std::span<const double>(x)), da::DimensionError);
}

TEST(Nids, CheckpointRoundTrip) {
  da::Classifier c = fitted();
  c.partial_fit(random_samples(8, 2));
  const auto path = std::filesystem::temp_directory_path() / "driftarena_test_clf.ckpt";
  c.save(path);
  const auto back = da::Classifier::load(path);
  EXPECT_TRUE(back == c);
  EXPECT_EQ(back.version(), c.version());
  for (const auto& x : random_samples(5, 6)) EXPECT_EQ(back.predict_proba(x), c.predict_proba(x));
  std::filesystem::remove(path);
}

// Central differences on a small network over random parameters.
TEST(NidsGradient, MatchesFiniteDifferences) {
  da::ClassifierConfig cfg;
  cfg.hidden = 6;
  cfg.epochs = 1;
  const auto train = random_samples(40, 11);
  da::Classifier c = da::Classifier::fit_initial(train, 3, cfg);
  const auto batch = random_samples(6, 12);
  const auto [loss, grad] = c.loss_and_gradient(batch);
  EXPECT_NEAR(loss, c.loss(batch), 1e-12);
  std::mt19937_64 rng(5);
  const double h = 1e-5;
  std::size_t checked = 0;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto i = static_cast<long>(rng() % c.network().param_count());
    auto& p = c.network().params();
    const double orig = p[i];
    p[i] = orig + h;
    const double lp = c.loss(batch);
    p[i] = orig - h;
    const double lm = c.loss(batch);
    p[i] = orig;
    const double fd = (lp - lm) / (2 * h);
    if (std::abs(fd) < 1e-7 && std::abs(grad[i]) < 1e-7) continue;
    worst = std::max(worst, std::abs(fd - grad[i]) / std::max(std::abs(fd), std::abs(grad[i])));
    ++checked;
  }
  EXPECT_GT(checked, 50u);
  EXPECT_LE(worst, 1e-4);
}
