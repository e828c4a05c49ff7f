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
#include <memory>
#include <string>
#include <vector>

#include "driftarena/agents.hpp"
#include "driftarena/config.hpp"
#include "driftarena/drift.hpp"
#include "driftarena/envs.hpp"
#include "driftarena/nids.hpp"
#include "driftarena/traffic.hpp"

namespace driftarena {

// Packets for one run, split in order into initial training, held-out test
// and the batch stream.
struct GameData {
  std::vector<RawPacket> train;
  std::vector<RawPacket> test;
  std::vector<RawPacket> stream;
};

GameData load_game_data(const GameConfig& config);

// Greedy perturbation of one packet against a frozen classifier.
struct PerturbResult {
  FeatureVector features;
  std::size_t steps = 0;
  bool evaded = false;
  // True when the classifier already called the clean packet benign.
  bool missed_clean = false;
};
PerturbResult perturb_greedy(const Agent& agent, std::shared_ptr<const Classifier> snapshot,
                             const RawPacket& packet, const RedEnvConfig& config);

// Red policy against a fixed classifier over a set of malicious packets.
struct RedEvaluation {
  std::size_t packets = 0;
  std::size_t detected_clean = 0;
  std::size_t detected_perturbed = 0;
  // Among packets detected clean: evaded within max_steps.
  std::size_t evaded = 0;
  double acc_clean = 0.0;
  double acc_perturbed = 0.0;
  double success_rate = 0.0;
  double mean_steps = 0.0;
};
RedEvaluation evaluate_red(const Agent& agent, std::shared_ptr<const Classifier> snapshot,
                           std::span<const RawPacket> malicious, const RedEnvConfig& config);

struct RoundRecord {
  std::size_t round = 0;
  std::uint64_t red_model_version = 0;
  std::uint64_t blue_model_version = 0;
  std::size_t batch_size = 0;
  std::size_t batch_malicious = 0;
  std::size_t red_attempted = 0;
  std::size_t red_evaded = 0;
  std::size_t red_steps = 0;
  double red_reward = 0.0;
  double acc_clean = 0.0;
  double acc_post_red = 0.0;
  std::size_t blue_batch_size = 0;
  std::size_t blue_actions = 0;
  std::size_t samples_used = 0;
  std::size_t labels_queried = 0;
  double blue_reward = 0.0;
  double acc_after_blue = 0.0;
  // Accuracy after the last of the first three blue actions.
  double acc_within_3 = 0.0;
  double kl = 0.0;
  double w = 0.0;

  double drop() const { return acc_clean - acc_post_red; }
  double recovery() const { return acc_after_blue - acc_post_red; }
  double recovery_within_3() const { return acc_within_3 - acc_post_red; }
};

struct BlueActionRecord {
  std::size_t round = 0;
  std::size_t step = 0;
  std::size_t action = 0;
  double acc_prev = 0.0;
  double acc = 0.0;
  double r = 0.0;
  double reward = 0.0;
  std::size_t samples_used = 0;
  std::size_t samples_selected = 0;
  std::size_t labels_queried = 0;
  std::size_t replay_used = 0;
  std::uint64_t model_version = 0;
  bool done = false;
  double epsilon = 0.0;
};

struct RedStepRecord {
  // Round 0 is pretraining.
  std::size_t round = 0;
  std::size_t episode = 0;
  std::size_t step = 0;
  std::size_t action = 0;
  double p_benign_before = 0.0;
  double p_benign_after = 0.0;
  bool effective = true;
  bool evaded = false;
  double reward = 0.0;
  std::uint64_t model_version = 0;
};

// One batch of the post-game recovery evaluation: the initial classifier is
// attacked by the trained red policy and repaired by the trained blue policy,
// both acting greedily.
struct RecoveryRecord {
  std::size_t batch = 0;
  double acc_clean = 0.0;
  double acc_post_red = 0.0;
  std::size_t red_evaded = 0;
  // Accuracy after each blue action, in order.
  std::vector<double> acc_after;
  std::vector<std::size_t> actions;

  double drop() const { return acc_clean - acc_post_red; }
  // Best accuracy gain over the first `k` actions (0 when none were taken).
  double recovery_within(std::size_t k) const;
};

struct RunReport {
  std::string config_text;
  std::uint64_t seed = 0;
  std::string blue_algorithm;
  StateMask mask = StateMask::kNone;
  bool complete = false;
  std::string error;

  double initial_accuracy = 0.0;
  RedEvaluation red_initial;
  std::vector<RoundRecord> rounds;
  std::vector<BlueActionRecord> blue_actions;
  std::vector<RedStepRecord> red_steps;
  EpisodeLog red_episodes;
  EpisodeLog blue_episodes;
  EpisodeLog blue_pretrain;
  std::vector<RecoveryRecord> recovery;

  struct RecoverySummary {
    std::size_t batches = 0;
    // Batches whose red drop reached min_drop.
    std::size_t post_drift = 0;
    // Post-drift batches recovered by min_gain within the action limit.
    std::size_t recovered = 0;
    double recovered_fraction = 0.0;
    double mean_drop = 0.0;
    double mean_recovery = 0.0;
  };
  RecoverySummary recovery_summary(double min_drop = 0.2, double min_gain = 0.15, std::size_t within = 3) const;

  // Mean post-blue accuracy over all rounds.
  double final_accuracy() const;
  // Mean reward per blue action id; count 0 rows report mean 0.
  std::array<double, kAdaptationActionCount> action_mean_rewards() const;
  std::array<std::size_t, kAdaptationActionCount> action_counts() const;
  // [third][action] counts over blue_actions in order.
  std::array<std::array<std::size_t, kAdaptationActionCount>, 3> action_frequency_by_thirds() const;
};

// Models and policies at the end of a run.
struct RunArtifacts {
  std::unique_ptr<Classifier> classifier;
  std::unique_ptr<Agent> red;
  std::unique_ptr<Agent> blue;
};

// Plays the alternating game. Errors abort the loop; the partial report is
// returned with `complete == false` and the message in `error`.
RunReport run_game(const GameConfig& config, RunArtifacts* artifacts = nullptr);

// The post-game recovery evaluation on its own: rebuilds the data and the
// initial classifier from `config`, attacks with `red` and repairs with
// `blue`. Drift statistics use the initial training data as the seen set.
std::vector<RecoveryRecord> recovery_evaluation(const GameConfig& config, const Agent& red, const Agent& blue);

// Pretrains the red agent against the initial classifier only.
struct RedTraining {
  EpisodeLog log;
  RedEvaluation evaluation;
  double initial_accuracy = 0.0;
};
RedTraining train_red(const GameConfig& config, RunArtifacts* artifacts = nullptr);

struct AblationCell {
  std::string algorithm;
  StateMask mask = StateMask::kNone;
  std::uint64_t seed = 0;
  double final_accuracy = 0.0;
  double mean_recovery = 0.0;
};

// DQN and PPO blue agents with the full state, the model block masked and
// the data block masked, for every seed.
std::vector<AblationCell> run_ablation(const GameConfig& config, const std::vector<std::uint64_t>& seeds);

}  // namespace driftarena
