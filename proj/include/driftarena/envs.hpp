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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "driftarena/drift.hpp"
#include "driftarena/nids.hpp"
#include "driftarena/perturb.hpp"

namespace driftarena {

struct StepResult {
  std::vector<double> state;
  double reward = 0.0;
  bool done = false;
};

// Episodic environment with flat numeric states and integer actions.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::vector<double> reset(Rng& rng) = 0;
  virtual StepResult step(std::size_t action) = 0;
};

struct RedEnvConfig {
  std::size_t max_steps = 10;
  double step_penalty = 0.1;
  double evasion_bonus = 10.0;
  double prob_shaping_weight = 10.0;
  PerturbConfig perturb;

  void validate() const;
};

// w * (p_after - p_before) - penalty + bonus * evaded - penalty * ineffective.
double red_reward(double p_benign_before, double p_benign_after, bool evaded, bool effective,
                  const RedEnvConfig& config);

// Evasion MDP: perturb one malicious packet until the frozen classifier
// calls it benign or the step limit is hit.
class RedEnv : public Environment {
 public:
  struct StepLog {
    PerturbAction action = PerturbAction::kSetFragment;
    double p_benign_before = 0.0;
    double p_benign_after = 0.0;
    bool effective = true;
    bool evaded = false;
    double reward = 0.0;
  };

  // Keeps the malicious packets of `packets` that parse and that the
  // snapshot currently classifies as malicious.
  RedEnv(std::shared_ptr<const Classifier> snapshot, std::span<const RawPacket> packets,
         RedEnvConfig config = {});

  std::size_t state_dim() const override { return kFeatureDim; }
  std::size_t action_count() const override { return kPerturbActionCount; }
  // Uniform draw from the pool; throws StateError when it is empty.
  std::vector<double> reset(Rng& rng) override;
  std::vector<double> reset_to(std::size_t pool_index);
  StepResult step(std::size_t action) override;

  std::size_t pool_size() const { return pool_.size(); }
  const PacketView& pool_packet(std::size_t i) const { return pool_.at(i); }
  const Classifier& snapshot() const { return *snapshot_; }
  std::uint64_t snapshot_version() const { return snapshot_->version(); }
  const RedEnvConfig& config() const { return config_; }

  bool active() const { return active_; }
  bool evaded() const { return evaded_; }
  std::size_t steps() const { return steps_; }
  double p_benign() const { return p_benign_; }
  const PacketView& current() const;
  const std::vector<double>& state() const { return state_.values; }
  const StepLog& last_step() const { return last_; }

 private:
  std::shared_ptr<const Classifier> snapshot_;
  RedEnvConfig config_;
  std::vector<PacketView> pool_;
  std::optional<PacketView> current_;
  FeatureVector state_;
  double p_benign_ = 0.0;
  std::size_t steps_ = 0;
  bool active_ = false;
  bool evaded_ = false;
  StepLog last_;
};

enum class StateMask : std::uint8_t { kNone, kModel, kData };
StateMask state_mask_from_string(std::string_view s);
std::string_view state_mask_name(StateMask m);

inline constexpr std::size_t kBlueStateDim = 5 + kFeatureDim;
static_assert(kBlueStateDim == 1530);

// [acc, fpr, fnr, kl, w, f_t...]; kModel zeros the first three entries,
// kData zeros the remaining 1,527.
std::vector<double> compose_blue_state(const Metrics& metrics, double kl, double w,
                                       std::span<const double> f_t, StateMask mask);

struct BlueEnvConfig {
  double threshold = 0.9;
  std::size_t max_actions_per_batch = 5;
  double success_reward = 10.0;
  double sample_penalty = 10.0;
  double gain_weight = 50.0;
  AdaptationBudget budget;
  StateMask mask = StateMask::kNone;

  void validate() const;
};

// success_reward when acc > T, else -sample_penalty * r + gain_weight * (acc - acc_prev).
// BlueEnv takes r as the fraction of the batch first trained on by this
// action, so the per-batch sum of samples used never exceeds the batch.
double blue_reward(double acc, double acc_prev, double r, const BlueEnvConfig& config);

// Adaptation MDP over one batch at a time. Holds references to the live
// classifier and seen statistics owned by the caller.
class BlueEnv {
 public:
  struct StepLog {
    AdaptationAction action = AdaptationAction::kOnline;
    double acc_prev = 0.0;
    double acc = 0.0;
    double r = 0.0;
    double reward = 0.0;
    // Batch samples trained on for the first time this batch; r counts only these.
    std::size_t samples_used = 0;
    // Batch samples the action trained on, repeats included.
    std::size_t samples_selected = 0;
    std::size_t labels_queried = 0;
    std::size_t replay_used = 0;
    std::uint64_t model_version = 0;
    bool done = false;
    Metrics metrics;
  };

  BlueEnv(Classifier& model, SeenStats& seen, BlueEnvConfig config, std::uint64_t seed);

  std::size_t state_dim() const { return kBlueStateDim; }
  std::size_t action_count() const { return kAdaptationActionCount; }

  // Starts a batch: the data block is measured once against `seen`, and the
  // current model's accuracy on `test` becomes the first acc_prev.
  std::vector<double> begin_batch(std::vector<FeatureVector> batch, std::vector<FeatureVector> test);
  std::vector<double> observe() const;
  StepResult step(std::size_t action);
  // Folds the batch into the seen statistics.
  void end_batch();

  bool active() const { return active_; }
  std::size_t actions_taken() const { return actions_; }
  const Metrics& metrics() const { return metrics_; }
  double kl() const { return kl_; }
  double w() const { return w_; }
  const FeatureDiff& diff() const { return diff_; }
  const StepLog& last_step() const { return last_; }
  const BlueEnvConfig& config() const { return config_; }
  void set_mask(StateMask m) { config_.mask = m; }
  const std::vector<FeatureVector>& batch() const { return batch_; }

 private:
  Classifier& model_;
  SeenStats& seen_;
  BlueEnvConfig config_;
  Rng rng_;
  std::vector<FeatureVector> batch_;
  std::vector<FeatureVector> test_;
  std::vector<bool> used_;
  Metrics metrics_;
  double kl_ = 0.0;
  double w_ = 0.0;
  FeatureDiff diff_;
  std::size_t actions_ = 0;
  bool active_ = false;
  bool done_ = false;
  StepLog last_;
};

}  // namespace driftarena
