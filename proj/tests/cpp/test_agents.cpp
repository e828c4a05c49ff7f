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
#include <memory>
#include <random>

#include "driftarena/agents.hpp"
#include "driftarena/config.hpp"
#include "helpers.hpp"

namespace da = driftarena;

namespace {

// One-step contextual bandit: two one-hot states, the matching action pays 1.
class BanditEnv : public da::Environment {
 public:
  std::size_t state_dim() const override { return 2; }
  std::size_t action_count() const override { return 2; }
  std::vector<double> reset(da::Rng& rng) override {
    state_ = rng() % 2;
    return observe();
  }
  da::StepResult step(std::size_t a) override { return {observe(), a == state_ ? 1.0 : 0.0, true}; }
  std::vector<double> observe() const { return {state_ == 0 ? 1.0 : 0.0, state_ == 1 ? 1.0 : 0.0}; }

 private:
  std::size_t state_ = 0;
};

// Three states in a row; moving right from the last one ends with reward 1.
class ChainEnv : public da::Environment {
 public:
  std::size_t state_dim() const override { return 3; }
  std::size_t action_count() const override { return 2; }
  std::vector<double> reset(da::Rng&) override {
    pos_ = 0;
    return observe();
  }
  da::StepResult step(std::size_t a) override {
    if (a == 1 && pos_ == 2) return {observe(), 1.0, true};
    pos_ = a == 1 ? pos_ + 1 : 0;
    return {observe(), 0.0, false};
  }
  std::vector<double> observe() const {
    std::vector<double> s(3, 0.0);
    s[pos_] = 1.0;
    return s;
  }

 private:
  std::size_t pos_ = 0;
};

da::Transition random_transition(std::mt19937_64& rng, std::size_t dim, std::size_t actions) {
  std::normal_distribution<double> n(0.0, 1.0);
  da::Transition t;
  t.state.resize(dim);
  t.next_state.resize(dim);
  for (auto& v : t.state) v = n(rng);
  for (auto& v : t.next_state) v = n(rng);
  t.action = rng() % actions;
  t.reward = n(rng);
  t.done = rng() % 3 == 0;
  return t;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-7}); }

}  // namespace

TEST(Agents, EpsilonOneIsUniform) {
  da::nn::Mlp net(4, 8, 5);
  da::Rng init(1);
  net.init(init);
  da::Rng rng(2);
  std::vector<std::size_t> counts(5, 0);
  const std::vector<double> s{0.1, 0.2, 0.3, 0.4};
  for (int i = 0; i < 50000; ++i) ++counts[da::dqn_act(net, s, 1.0, rng)];
  for (auto c : counts) EXPECT_NEAR(c / 50000.0, 0.2, 0.2 * 0.05);
}

TEST(Agents, TiedQValuesPickActionZero) {
  da::nn::Mlp net(3, 4, 4);  // all-zero parameters
  da::Rng rng(1);
  EXPECT_EQ(da::dqn_act(net, std::vector<double>{1, 2, 3}, 0.0, rng), 0u);
  EXPECT_EQ(da::argmax_lowest(std::vector<double>{1.0, 3.0, 3.0}), 1u);
}

TEST(Agents, TerminalTargetIsReward) {
  da::nn::Mlp online(3, 5, 2), target(3, 5, 2);
  da::Rng rng(3);
  online.init(rng);
  target.init(rng);
  da::Transition t{{1, 0, 0}, 1, 2.5, {0, 1, 0}, true};
  da::Transition u{{1, 0, 0}, 0, 1.0, {0, 1, 0}, false};
  const da::Transition* batch[] = {&t, &u};
  const auto res = da::td_loss_and_gradient(online, target, batch, 0.9);
  EXPECT_EQ(res.targets[0], 2.5);
  const auto q_next = target.forward_one(u.next_state);
  EXPECT_NEAR(res.targets[1], 1.0 + 0.9 * q_next.maxCoeff(), 1e-12);
}

TEST(AgentsGradient, TdLossMatchesFiniteDifferences) {
  std::mt19937_64 gen(4);
  da::nn::Mlp online(3, 6, 2), target(3, 6, 2);
  da::Rng rng(5);
  online.init(rng);
  target.init(rng);
  std::vector<da::Transition> ts;
  for (int i = 0; i < 8; ++i) ts.push_back(random_transition(gen, 3, 2));
  std::vector<const da::Transition*> batch;
  for (const auto& t : ts) batch.push_back(&t);
  const auto res = da::td_loss_and_gradient(online, target, batch, 0.95);
  const double h = 1e-6;
  double worst = 0.0;
  for (long i = 0; i < static_cast<long>(online.param_count()); ++i) {
    auto& p = online.params();
    const double orig = p[i];
    p[i] = orig + h;
    const double lp = da::td_loss_and_gradient(online, target, batch, 0.95).loss;
    p[i] = orig - h;
    const double lm = da::td_loss_and_gradient(online, target, batch, 0.95).loss;
    p[i] = orig;
    const double fd = (lp - lm) / (2 * h);
    if (std::abs(fd) < 1e-7 && std::abs(res.gradient[i]) < 1e-7) continue;
    worst = std::max(worst, rel(fd, res.gradient[i]));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(AgentsGradient, SurrogateMatchesFiniteDifferences) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::size_t rows = 6, k = 3;
  da::nn::Matrix logits(rows, k);
  for (long i = 0; i < logits.size(); ++i) logits.data()[i] = n(gen);
  std::vector<std::size_t> actions(rows);
  std::vector<double> old_lp(rows), adv(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    actions[i] = gen() % k;
    old_lp[i] = std::log(0.2 + 0.3 * (i % 3) / 2.0);
    adv[i] = n(gen);
  }
  const auto res = da::ppo_surrogate(logits, actions, old_lp, adv, 0.2, 0.01);
  const double h = 1e-6;
  double worst = 0.0;
  for (long i = 0; i < logits.size(); ++i) {
    da::nn::Matrix lp = logits, lm = logits;
    lp.data()[i] += h;
    lm.data()[i] -= h;
    const double fd = (da::ppo_surrogate(lp, actions, old_lp, adv, 0.2, 0.01).loss -
                       da::ppo_surrogate(lm, actions, old_lp, adv, 0.2, 0.01).loss) /
                      (2 * h);
    if (std::abs(fd) < 1e-7 && std::abs(res.d_logits.data()[i]) < 1e-7) continue;
    worst = std::max(worst, rel(fd, res.d_logits.data()[i]));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(Agents, ClipZeroPinsRatio) {
  da::nn::Matrix logits(2, 2);
  logits << 1.0, 0.0, 0.0, 1.0;
  // Current probability of action 0 in row 0 is above the old one, so the
  // ratio exceeds 1; with positive advantage the clipped term wins.
  const std::vector<std::size_t> actions{0, 1};
  const std::vector<double> old_lp{std::log(0.5), std::log(0.5)};
  const std::vector<double> adv{1.0, 2.0};
  const auto res = da::ppo_surrogate(logits, actions, old_lp, adv, 0.0);
  EXPECT_GT(res.ratios[0], 1.0);
  EXPECT_NEAR(res.loss, -(1.0 + 2.0) / 2.0, 1e-12);
  EXPECT_EQ(res.d_logits.norm(), 0.0);
}

TEST(Agents, GaeMatchesBruteForce) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t len = 1 + gen() % 12;
    std::vector<double> r(len), v(len), nv(len);
    std::vector<std::uint8_t> d(len);
    for (std::size_t i = 0; i < len; ++i) {
      r[i] = n(gen);
      v[i] = n(gen);
      nv[i] = n(gen);
      d[i] = gen() % 4 == 0;
    }
    const double g = 0.9, l = 0.8;
    const auto out = da::compute_gae(r, v, nv, d, g, l);
    for (std::size_t i = 0; i < len; ++i) {
      double want = 0.0, w = 1.0;
      for (std::size_t j = i; j < len; ++j) {
        const double delta = r[j] + g * (d[j] ? 0.0 : nv[j]) - v[j];
        want += w * delta;
        if (d[j]) break;
        w *= g * l;
      }
      ASSERT_NEAR(out.advantages[i], want, 1e-9);
      ASSERT_NEAR(out.returns[i], want + v[i], 1e-9);
    }
  }
}

TEST(Agents, ReplayBufferRing) {
  da::ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.push({{static_cast<double>(i)}, 0, 0.0, {0.0}, false});
  EXPECT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.at(0).state[0], 2.0);
  EXPECT_EQ(buf.at(2).state[0], 4.0);
  da::Rng rng(1);
  const auto idx = buf.sample_indices(3, rng);
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 3u);
  EXPECT_THROW(buf.sample_indices(4, rng), da::ConfigError);
}

TEST(Agents, EpsilonScheduleIsLinear) {
  const da::EpsilonSchedule s{1.0, 0.1, 100};
  EXPECT_EQ(s.at(0), 1.0);
  EXPECT_NEAR(s.at(50), 0.55, 1e-12);
  EXPECT_EQ(s.at(100), 0.1);
  EXPECT_EQ(s.at(1000), 0.1);
}

TEST(Agents, ProjectionKeepsLeadingEntries) {
  const da::RandomProjection p(10, 4, 3, 2);
  EXPECT_EQ(p.in_dim(), 10u);
  EXPECT_EQ(p.out_dim(), 6u);
  std::vector<double> x(10);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) + 1.0;
  const auto y = p.apply(x);
  EXPECT_EQ(y[0], 1.0);
  EXPECT_EQ(y[1], 2.0);
  double want = 0.0;
  for (long j = 0; j < 8; ++j) want += p.matrix()(0, j) * x[static_cast<std::size_t>(j) + 2];
  EXPECT_NEAR(y[2], want, 1e-12);
  EXPECT_THROW(da::RandomProjection(4, 2, 1, 4), da::ConfigError);
}

TEST(Agents, PpoSolvesBandit) {
  BanditEnv env;
  da::PpoConfig cfg;
  cfg.horizon = 64;
  cfg.minibatch = 32;
  cfg.learning_rate = 3e-3;
  da::PpoAgent agent(2, 2, cfg, 11);
  da::Rng rng(12);
  double p_best = 0.0;
  std::size_t steps = 0;
  while (steps < 5000) {
    da::train_loop(env, agent, 100, rng);
    steps += 100;
    p_best = 0.5 * (agent.action_probabilities(std::vector<double>{1, 0})[0] +
                    agent.action_probabilities(std::vector<double>{0, 1})[1]);
    if (p_best >= 0.95) break;
  }
  EXPECT_GE(p_best, 0.95) << "after " << steps << " steps";
}

TEST(Agents, DqnSolvesChain) {
  ChainEnv env;
  da::DqnConfig cfg;
  cfg.minibatch = 16;
  cfg.target_sync = 50;
  cfg.epsilon = {1.0, 0.05, 1500};
  da::DqnAgent agent(3, 2, cfg, 13);
  da::Rng rng(14);
  da::train_loop(env, agent, 400, rng, 50);
  for (std::size_t pos = 0; pos < 3; ++pos) {
    std::vector<double> s(3, 0.0);
    s[pos] = 1.0;
    EXPECT_EQ(agent.greedy(s), 1u) << "state " << pos;
  }
}

TEST(Agents, FixedSeedGivesIdenticalLog) {
  auto run = [] {
    ChainEnv env;
    da::DqnConfig cfg;
    cfg.minibatch = 8;
    da::DqnAgent agent(3, 2, cfg, 21);
    da::Rng rng(22);
    return da::train_loop(env, agent, 60, rng, 30).records();
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].reward, b[i].reward);
    EXPECT_EQ(a[i].steps, b[i].steps);
    EXPECT_EQ(a[i].epsilon, b[i].epsilon);
  }
}

TEST(Agents, EpisodeLogRollingStats) {
  da::EpisodeLog log(3);
  const std::vector<double> r{1, 2, 3, 4, 10};
  for (double x : r) log.add(x, 1, 0.0);
  const auto& rec = log.records();
  EXPECT_EQ(rec[1].rolling_mean, 1.5);
  EXPECT_NEAR(rec[4].rolling_mean, (3 + 4 + 10) / 3.0, 1e-12);
  const double m = 17.0 / 3.0;
  EXPECT_NEAR(rec[4].rolling_std, std::sqrt(((3 - m) * (3 - m) + (4 - m) * (4 - m) + (10 - m) * (10 - m)) / 3.0),
              1e-12);
  EXPECT_EQ(log.mean_reward(0, 2), 1.5);
  EXPECT_EQ(rec[4].episode, 4u);
}

TEST(Agents, CheckpointsRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path();
  da::DqnConfig dc;
  dc.projection_dim = 4;
  dc.projection_keep = 2;
  dc.minibatch = 4;
  da::DqnAgent dqn(10, 3, dc, 31);
  da::PpoConfig pc;
  pc.horizon = 4;
  da::PpoAgent ppo(10, 3, pc, 32);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 12; ++i) {
    const auto t = random_transition(gen, 10, 3);
    dqn.act(t.state);
    dqn.observe(t);
    ppo.act(t.state);
    ppo.observe(t);
  }
  dqn.save(dir / "driftarena_test_dqn.ckpt");
  ppo.save(dir / "driftarena_test_ppo.ckpt");
  const auto d2 = da::load_agent(dir / "driftarena_test_dqn.ckpt");
  const auto p2 = da::load_agent(dir / "driftarena_test_ppo.ckpt");
  EXPECT_EQ(d2->algorithm(), "dqn");
  EXPECT_EQ(p2->algorithm(), "ppo");
  const auto& dq = dynamic_cast<const da::DqnAgent&>(*d2);
  const auto& pp = dynamic_cast<const da::PpoAgent&>(*p2);
  for (int i = 0; i < 5; ++i) {
    const auto t = random_transition(gen, 10, 3);
    EXPECT_EQ(dq.q_values(t.state), dqn.q_values(t.state));
    EXPECT_EQ(pp.action_probabilities(t.state), ppo.action_probabilities(t.state));
  }
  EXPECT_EQ(dq.steps(), dqn.steps());
  std::filesystem::remove(dir / "driftarena_test_dqn.ckpt");
  std::filesystem::remove(dir / "driftarena_test_ppo.ckpt");
}

TEST(Agents, FactoryRejectsUnknownAlgorithm) {
  da::AgentSpec s;
  s.algorithm = "sarsa";
  EXPECT_THROW(da::make_agent(s, 3, 2, 1), da::ConfigError);
}

TEST(Agents, RedDqnImprovesOverTraining) {
  const auto pkts = testing_util::packets(800, 17);
  const auto x = testing_util::features(pkts);
  const auto model = std::make_shared<const da::Classifier>(da::Classifier::fit_initial(std::span(x).first(400), 3));
  da::RedEnv env(model, std::span(pkts).subspan(400), {});
  ASSERT_GT(env.pool_size(), 20u);
  const da::GameConfig game;
  auto agent = da::make_agent(game.red.agent, da::kFeatureDim, da::kPerturbActionCount, 19);
  da::Rng rng(20);
  const auto log = da::train_loop(env, *agent, 100, rng);
  EXPECT_GT(log.records().back().rolling_mean, log.mean_reward(0, 10));
}
