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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driftarena/envs.hpp"
#include "driftarena/nn.hpp"

namespace driftarena {

struct Transition {
  std::vector<double> state;
  std::size_t action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

// Fixed-capacity ring; the oldest transition is overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;
  // n distinct indices drawn uniformly; n must not exceed size().
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::vector<Transition> data_;
};

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::size_t decay_steps = 5000;

  // Linear from start to end over decay_steps, then flat.
  double at(std::size_t step) const;
};

// Seeded Gaussian map in -> out, entries N(0, 1/out).
// The first `keep` inputs pass through unchanged; the rest are projected.
class RandomProjection {
 public:
  RandomProjection() = default;
  RandomProjection(std::size_t in, std::size_t out, std::uint64_t seed, std::size_t keep = 0);

  std::size_t in_dim() const { return keep_ + static_cast<std::size_t>(m_.cols()); }
  std::size_t out_dim() const { return keep_ + static_cast<std::size_t>(m_.rows()); }
  std::size_t keep() const { return keep_; }
  void set_keep(std::size_t keep) { keep_ = keep; }
  std::vector<double> apply(std::span<const double> x) const;
  const nn::Matrix& matrix() const { return m_; }
  nn::Matrix& matrix() { return m_; }

 private:
  nn::Matrix m_;
  std::size_t keep_ = 0;
};

// Index of the largest entry, lowest index on ties.
std::size_t argmax_lowest(std::span<const double> v);

struct DqnConfig {
  std::size_t hidden = 64;
  double gamma = 0.99;
  double learning_rate = 1e-3;
  std::size_t buffer_capacity = 10000;
  std::size_t minibatch = 64;
  std::size_t target_sync = 250;
  EpsilonSchedule epsilon;
  // One gradient step every `train_every` observed transitions.
  std::size_t train_every = 1;
  // 0 keeps the raw state.
  std::size_t projection_dim = 0;
  // Leading state entries kept as they are when projecting.
  std::size_t projection_keep = 0;

  void validate() const;
};

struct PpoConfig {
  std::size_t hidden = 64;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  double learning_rate = 1e-3;
  std::size_t epochs = 4;
  // Transitions collected before each update.
  std::size_t horizon = 128;
  std::size_t minibatch = 64;
  double entropy_coef = 0.0;
  std::size_t projection_dim = 0;
  // Leading state entries kept as they are when projecting.
  std::size_t projection_keep = 0;

  void validate() const;
};

// epsilon-greedy over net(state): uniform action with probability epsilon,
// otherwise the lowest-index argmax.
std::size_t dqn_act(const nn::Mlp& net, std::span<const double> state, double epsilon, Rng& rng);

// Mean squared TD error over a minibatch and its gradient w.r.t. the online
// parameters; targets y = r + gamma * (1 - done) * max_a' target(s', a').
struct TdResult {
  double loss = 0.0;
  nn::Vector gradient;
  std::vector<double> targets;
};
TdResult td_loss_and_gradient(const nn::Mlp& online, const nn::Mlp& target,
                              std::span<const Transition* const> batch, double gamma);

// Clipped surrogate (negated, so lower is better) averaged over samples and
// its gradient w.r.t. the logits.
struct SurrogateResult {
  double loss = 0.0;
  nn::Matrix d_logits;
  std::vector<double> ratios;
};
SurrogateResult ppo_surrogate(const nn::Matrix& logits, std::span<const std::size_t> actions,
                              std::span<const double> old_log_probs, std::span<const double> advantages,
                              double clip, double entropy_coef = 0.0);

// Generalized advantage estimates and returns for one rollout; dones[k] != 0
// marks a terminal transition.
struct Gae {
  std::vector<double> advantages;
  std::vector<double> returns;
};
Gae compute_gae(std::span<const double> rewards, std::span<const double> values,
                std::span<const double> next_values, std::span<const std::uint8_t> dones, double gamma,
                double lambda);

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string_view algorithm() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_count() const = 0;
  // Exploring action; may record what observe() needs about it.
  virtual std::size_t act(std::span<const double> state) = 0;
  virtual std::size_t greedy(std::span<const double> state) const = 0;
  virtual void observe(const Transition& t) = 0;
  virtual double epsilon() const { return 0.0; }
  virtual std::size_t updates() const = 0;
  virtual void save(const std::filesystem::path& path) const = 0;
};

class DqnAgent : public Agent {
 public:
  DqnAgent(std::size_t state_dim, std::size_t action_count, DqnConfig config, std::uint64_t seed);

  std::string_view algorithm() const override { return "dqn"; }
  std::size_t state_dim() const override { return state_dim_; }
  std::size_t action_count() const override { return action_count_; }
  std::size_t act(std::span<const double> state) override;
  std::size_t greedy(std::span<const double> state) const override;
  void observe(const Transition& t) override;
  double epsilon() const override { return config_.epsilon.at(steps_); }
  std::size_t updates() const override { return updates_; }
  void save(const std::filesystem::path& path) const override;
  static std::unique_ptr<DqnAgent> load(const std::filesystem::path& path);

  // One gradient step on a minibatch from the buffer; nullopt when the
  // buffer holds fewer than `minibatch` transitions.
  std::optional<double> update();

  std::vector<double> q_values(std::span<const double> state) const;
  const nn::Mlp& online() const { return online_; }
  nn::Mlp& online() { return online_; }
  const nn::Mlp& target() const { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const DqnConfig& config() const { return config_; }
  std::size_t steps() const { return steps_; }
  void set_epsilon_schedule(EpsilonSchedule s) { config_.epsilon = s; }

 private:
  std::vector<double> project(std::span<const double> state) const;

  std::size_t state_dim_;
  std::size_t action_count_;
  DqnConfig config_;
  std::uint64_t seed_;
  RandomProjection projection_;
  nn::Mlp online_;
  nn::Mlp target_;
  nn::Adam opt_;
  ReplayBuffer buffer_;
  Rng rng_;
  std::size_t steps_ = 0;
  std::size_t updates_ = 0;
};

class PpoAgent : public Agent {
 public:
  PpoAgent(std::size_t state_dim, std::size_t action_count, PpoConfig config, std::uint64_t seed);

  std::string_view algorithm() const override { return "ppo"; }
  std::size_t state_dim() const override { return state_dim_; }
  std::size_t action_count() const override { return action_count_; }
  std::size_t act(std::span<const double> state) override;
  std::size_t greedy(std::span<const double> state) const override;
  void observe(const Transition& t) override;
  std::size_t updates() const override { return updates_; }
  void save(const std::filesystem::path& path) const override;
  static std::unique_ptr<PpoAgent> load(const std::filesystem::path& path);

  std::vector<double> action_probabilities(std::span<const double> state) const;
  double value(std::span<const double> state) const;
  // Runs the clipped-surrogate update on the pending rollout, if any.
  void update();
  std::size_t pending() const { return rollout_.size(); }
  const nn::Mlp& policy() const { return policy_; }
  const PpoConfig& config() const { return config_; }

 private:
  struct Step {
    std::vector<double> state;  // projected
    std::size_t action;
    double reward;
    bool done;
    double log_prob;
    double value;
    double next_value;
  };
  std::vector<double> project(std::span<const double> state) const;

  std::size_t state_dim_;
  std::size_t action_count_;
  PpoConfig config_;
  std::uint64_t seed_;
  RandomProjection projection_;
  nn::Mlp policy_;
  nn::Mlp value_;
  nn::Adam policy_opt_;
  nn::Adam value_opt_;
  Rng rng_;
  std::vector<Step> rollout_;
  // Set by act(): log-probability of the chosen action in the last state.
  std::optional<std::pair<std::size_t, double>> last_act_;
  std::size_t updates_ = 0;
};

struct AgentSpec {
  std::string algorithm = "dqn";
  DqnConfig dqn;
  PpoConfig ppo;
};

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, std::size_t state_dim, std::size_t action_count,
                                  std::uint64_t seed);
// Dispatches on the checkpoint kind.
std::unique_ptr<Agent> load_agent(const std::filesystem::path& path);

struct EpisodeRecord {
  std::size_t episode = 0;
  double reward = 0.0;
  std::size_t steps = 0;
  double epsilon = 0.0;
  double rolling_mean = 0.0;
  double rolling_std = 0.0;
};

class EpisodeLog {
 public:
  explicit EpisodeLog(std::size_t window = 10) : window_(window) {}

  // Fills in the episode number and rolling statistics over the last
  // `window` episodes (population std).
  void add(double reward, std::size_t steps, double epsilon);
  const std::vector<EpisodeRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  double mean_reward(std::size_t begin, std::size_t end) const;

 private:
  std::size_t window_;
  std::vector<EpisodeRecord> records_;
};

// Runs `episodes` exploring episodes, feeding every transition to the agent.
// `max_steps` guards against environments that never terminate.
EpisodeLog train_loop(Environment& env, Agent& agent, std::size_t episodes, Rng& rng,
                      std::size_t max_steps = 10000);

}  // namespace driftarena
