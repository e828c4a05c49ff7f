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
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "driftarena/nids.hpp"
#include "driftarena/traffic.hpp"

namespace driftarena {

inline constexpr std::size_t kKlBins = 16;

// Running statistics of everything the defender has trained on: exact mean,
// count, and a uniform reservoir sample for divergences and replay.
class SeenStats {
 public:
  explicit SeenStats(std::size_t reservoir_cap = 2000, std::uint64_t seed = 0);

  void ingest(const FeatureVector& x);
  void ingest(std::span<const FeatureVector> xs);

  std::size_t count() const { return count_; }
  std::size_t reservoir_cap() const { return cap_; }
  // Zero vector while count() == 0.
  std::vector<double> mean() const;
  const std::vector<FeatureVector>& reservoir() const { return reservoir_; }

  // Per-feature reservoir counts on the 256-level byte grid. Empty once an
  // off-grid value has been ingested.
  bool on_grid() const { return on_grid_; }
  std::span<const std::uint32_t> grid_counts(std::size_t feature) const;

 private:
  void add_to_grid(const FeatureVector& x, int sign);

  std::size_t cap_;
  std::size_t count_ = 0;
  std::vector<long double> sum_;
  std::vector<FeatureVector> reservoir_;
  Rng rng_;
  bool on_grid_ = true;
  // kFeatureDim x 256, row-major.
  std::vector<std::uint32_t> grid_;
};

// Byte level (0..255) of a normalized value, or -1 when it is off the grid.
int grid_level(double v);

struct FeatureDiff {
  std::vector<double> f;
  bool cold_start = false;
};

// mean(batch) - seen.mean.
FeatureDiff feature_diff(std::span<const FeatureVector> batch, const SeenStats& seen);

// KL(p || q) over `bins` equal-width histogram bins on [0,1]. Add-one
// smoothing when `smoothing` is set; without it an empty q-bin under a
// non-empty p-bin yields +inf.
double kl_divergence_1d(std::span<const double> p_samples, std::span<const double> q_samples,
                        std::size_t bins = kKlBins, bool smoothing = true);
// KL between two discrete distributions given as counts or probabilities.
double kl_divergence_discrete(std::span<const double> p, std::span<const double> q);

// Mean over features of the per-feature KL(batch || reservoir).
double kl_divergence(std::span<const FeatureVector> batch, const SeenStats& seen,
                     std::size_t bins = kKlBins, bool smoothing = true);

// Wasserstein-1 distance between two empirical distributions.
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

// Mean over features of the per-feature W1(batch, reservoir).
double wasserstein(std::span<const FeatureVector> batch, const SeenStats& seen);

struct AdaptationBudget {
  std::size_t B = 30;
  double p_low = 0.4;
  double p_high = 0.6;
  double tau_low = 0.2;
  double tau_high = 0.6;
  double conf_threshold = 0.95;

  void validate() const;
};

enum class AdaptationAction : std::uint8_t {
  kOnline = 0,
  kActive = 1,
  kContinual = 2,
  kPseudoLabel = 3,
};
inline constexpr std::size_t kAdaptationActionCount = 4;
AdaptationAction adaptation_action_from_int(int id);
std::string_view adaptation_action_name(AdaptationAction a);

std::vector<std::size_t> select_online(std::size_t batch_size, std::size_t B, Rng& rng);

// Confidence = max class probability.
std::vector<std::size_t> select_active_from_confidence(std::span<const double> confidence,
                                                       const AdaptationBudget& budget);
std::vector<std::size_t> select_active(const Classifier& model, std::span<const FeatureVector> batch,
                                       const AdaptationBudget& budget);

struct ContinualSelection {
  std::vector<std::size_t> representative;
  std::vector<std::size_t> discriminative;
};
ContinualSelection select_continual_from_entropy(std::span<const double> entropies,
                                                 const AdaptationBudget& budget);
ContinualSelection select_continual(const Classifier& model, std::span<const FeatureVector> batch,
                                    const AdaptationBudget& budget);

struct PseudoLabel {
  std::size_t index = 0;
  Label label = Label::kBenign;
  bool operator==(const PseudoLabel&) const = default;
};
std::vector<PseudoLabel> select_pseudo_from_proba(std::span<const ProbabilityPair> proba,
                                                  const AdaptationBudget& budget);
std::vector<PseudoLabel> select_pseudo(const Classifier& model, std::span<const FeatureVector> batch,
                                       const AdaptationBudget& budget);

// Returns the true label of batch sample i. Every call counts as one query.
using LabelOracle = std::function<Label(std::size_t)>;

struct AdaptationOutcome {
  AdaptationAction action = AdaptationAction::kOnline;
  // Batch samples trained on (replay draws excluded).
  std::size_t samples_used = 0;
  std::size_t labels_queried = 0;
  std::vector<std::size_t> selected_indices;
  std::size_t replay_used = 0;
  Classifier::UpdateReport update;
};

// One adaptation step. Continual learning trains on at most B batch samples
// (split between the discriminative and representative sets) plus up to B
// replay draws from the seen reservoir. `seen` is read only; callers ingest
// the batch once the blue turn is over.
AdaptationOutcome apply_adaptation(Classifier& model, AdaptationAction action,
                                   std::span<const FeatureVector> batch, const AdaptationBudget& budget,
                                   const LabelOracle& oracle, const SeenStats& seen, Rng& rng);

}  // namespace driftarena
