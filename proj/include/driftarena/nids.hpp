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
#include <filesystem>
#include <span>
#include <vector>

#include "driftarena/nn.hpp"
#include "driftarena/traffic.hpp"

namespace driftarena {

// (p_benign, p_malicious)
using ProbabilityPair = std::array<double, 2>;

struct ClassifierConfig {
  std::size_t hidden = 64;
  // Initial fit.
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  // L2 penalty added to the training gradient (not to loss()).
  double weight_decay = 0.02;
  // Incremental updates.
  double incremental_learning_rate = 0.05;
  std::size_t passes = 5;
};

// Binary packet classifier: 1,525 -> hidden (ReLU) -> 2 with softmax output,
// fitted with Adam on mean cross-entropy. Incremental updates are plain
// gradient steps at the incremental learning rate.
class Classifier {
 public:
  // All-zero parameters; predicts (0.5, 0.5) everywhere.
  explicit Classifier(ClassifierConfig config = {}, std::uint64_t seed = 0);

  static Classifier fit_initial(std::span<const FeatureVector> train, std::uint64_t seed,
                                ClassifierConfig config = {});

  ProbabilityPair predict_proba(std::span<const double> x) const;
  ProbabilityPair predict_proba(const FeatureVector& x) const { return predict_proba(x.values); }
  // n x 2.
  nn::Matrix predict_proba(std::span<const FeatureVector> xs) const;
  Label predict(const FeatureVector& x) const;

  struct UpdateReport {
    // Mean loss on the update set before each pass, plus after the last one.
    std::vector<double> losses;
    bool skipped = false;
  };

  // `passes` shuffled minibatch sweeps over `samples` (using each sample's
  // label) at the incremental learning rate. Empty input is a no-op.
  UpdateReport partial_fit(std::span<const FeatureVector> samples, std::size_t passes);
  UpdateReport partial_fit(std::span<const FeatureVector> samples) {
    return partial_fit(samples, config_.passes);
  }

  double loss(std::span<const FeatureVector> samples) const;
  // Mean cross-entropy and its gradient w.r.t. the flat parameter vector.
  std::pair<double, nn::Vector> loss_and_gradient(std::span<const FeatureVector> samples) const;

  const nn::Mlp& network() const { return net_; }
  nn::Mlp& network() { return net_; }
  const ClassifierConfig& config() const { return config_; }
  void set_incremental_learning_rate(double lr) { config_.incremental_learning_rate = lr; }
  std::uint64_t version() const { return version_; }
  std::uint64_t seed() const { return seed_; }

  void save(const std::filesystem::path& path) const;
  static Classifier load(const std::filesystem::path& path);

  bool operator==(const Classifier& o) const { return net_ == o.net_ && version_ == o.version_; }

 private:
  // opt == nullptr takes plain gradient steps at the incremental rate.
  nn::Matrix inputs(std::span<const FeatureVector> xs) const;
  void run_epoch(std::span<const FeatureVector> samples, nn::Adam* opt);

  ClassifierConfig config_;
  std::uint64_t seed_ = 0;
  std::uint64_t version_ = 0;
  nn::Mlp net_;
  // Mean of the initial training inputs, subtracted before the network.
  nn::Vector input_mean_;
  Rng rng_;
};

struct Confusion {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t total() const { return tp + tn + fp + fn; }
};

// Positive class is malicious.
struct Metrics {
  double acc = 0.0;
  double balanced_acc = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  // Set when the test set lacks benign (fpr) or malicious (fnr) samples;
  // the rate is then reported as 0.
  bool fpr_undefined = false;
  bool fnr_undefined = false;
  Confusion confusion;
};

Metrics metrics_from_confusion(const Confusion& c);
Confusion confusion_of(std::span<const Label> predicted, std::span<const Label> truth);
Metrics evaluate(const Classifier& model, std::span<const FeatureVector> test);

// Shannon entropy in nats, 0 ln 0 = 0.
double entropy(const ProbabilityPair& p);

}  // namespace driftarena
