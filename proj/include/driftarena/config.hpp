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
#include <filesystem>
#include <string>
#include <vector>

#include "driftarena/agents.hpp"
#include "driftarena/envs.hpp"
#include "driftarena/nids.hpp"

namespace driftarena {

struct DataConfig {
  // "synthetic" or "pcap:<path>".
  std::string source = "synthetic";
  std::size_t packets = 5000;
  // Label sidecar for pcap input; defaults to <capture>.labels.
  std::string labels;
  double train_fraction = 0.2;
  double test_fraction = 0.1;
};

struct TestConfig {
  // Held-out benign packets in every round's test set.
  std::size_t benign = 100;
  // Held-out malicious packets per round, rotated and perturbed by red.
  std::size_t malicious = 100;
};

struct RedConfig {
  bool enabled = true;
  AgentSpec agent;
  RedEnvConfig env;
  std::size_t pretrain_episodes = 1500;
  // Keep learning from the batch episodes during the game.
  bool learn_online = true;
};

struct BlueConfig {
  AgentSpec agent;
  BlueEnvConfig env;
  // Warm-up episodes on resampled training batches attacked by the pretrained
  // red agent, each starting from the initial classifier. Needs red enabled.
  std::size_t pretrain_episodes = 0;
};

struct EvalConfig {
  // After the game, replay every batch against the initial classifier with
  // the trained agents acting greedily.
  bool recovery = true;
};

struct GameConfig {
  std::uint64_t seed = 1;
  std::size_t n_batches = 120;
  DataConfig data;
  TestConfig test;
  ClassifierConfig classifier;
  std::size_t reservoir_cap = 2000;
  RedConfig red;
  BlueConfig blue;
  EvalConfig eval;

  GameConfig();
  void validate() const;
};

// Flat "dotted.key = value" settings; '#' starts a comment.
void apply_setting(GameConfig& config, const std::string& key, const std::string& value);
void apply_config_text(GameConfig& config, const std::string& text);
GameConfig load_config(const std::filesystem::path& path);
// Every key with its resolved value, one "key = value" line each, sorted.
std::string dump_config(const GameConfig& config);
std::vector<std::string> config_keys();

}  // namespace driftarena
