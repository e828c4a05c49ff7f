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

#include "driftarena/arena.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "driftarena/pcap.hpp"
#include "driftarena/synth.hpp"

namespace driftarena {

namespace {

// Independent sub-seeds from one run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum SeedStream : std::uint64_t {
  kSeedData = 1,
  kSeedClassifier,
  kSeedRedAgent,
  kSeedBlueAgent,
  kSeedBlueEnv,
  kSeedSeen,
  kSeedRedEnv,
  kSeedEval,
  kSeedBluePretrain,
};

std::vector<FeatureVector> features_of(std::span<const RawPacket> packets) {
  std::vector<FeatureVector> out;
  out.reserve(packets.size());
  for (const auto& p : packets) out.push_back(preprocess(p));
  return out;
}

struct Prepared {
  GameData data;
  std::vector<FeatureVector> train_x;
  std::vector<FeatureVector> test_x;
  std::vector<FeatureVector> test_benign_x;
  std::vector<RawPacket> test_malicious;
  std::unique_ptr<Classifier> model;
  double initial_accuracy = 0.0;
};

Prepared prepare(const GameConfig& config) {
  Prepared p;
  p.data = load_game_data(config);
  p.train_x = features_of(p.data.train);
  p.test_x = features_of(p.data.test);
  for (const auto& pkt : p.data.test) {
    if (pkt.label == Label::kMalicious) {
      p.test_malicious.push_back(pkt);
    } else if (p.test_benign_x.size() < config.test.benign) {
      p.test_benign_x.push_back(preprocess(pkt));
    }
  }
  p.model = std::make_unique<Classifier>(
      Classifier::fit_initial(p.train_x, derive_seed(config.seed, kSeedClassifier), config.classifier));
  p.initial_accuracy = evaluate(*p.model, p.test_x).acc;
  return p;
}

struct EpisodeResult {
  double reward = 0.0;
  std::size_t steps = 0;
  bool evaded = false;
};

// One red episode from the current reset state; learns when `learn` is set.
EpisodeResult red_episode(RedEnv& env, Agent& agent, bool learn, std::size_t round, std::size_t episode,
                          RunReport& report) {
  EpisodeResult res;
  std::vector<double> s = env.state();
  while (env.active()) {
    const std::size_t a = learn ? agent.act(s) : agent.greedy(s);
    StepResult step = env.step(a);
    const auto& log = env.last_step();
    report.red_steps.push_back({round, episode, res.steps, a, log.p_benign_before, log.p_benign_after,
                                log.effective, log.evaded, log.reward, env.snapshot_version()});
    if (learn) agent.observe({s, a, step.reward, step.state, step.done});
    res.reward += step.reward;
    ++res.steps;
    s = std::move(step.state);
  }
  res.evaded = env.evaded();
  if (learn) report.red_episodes.add(res.reward, res.steps, agent.epsilon());
  return res;
}

void pretrain_red(const GameConfig& config, const Prepared& prep, Agent& red, RunReport& report) {
  auto snapshot = std::make_shared<const Classifier>(*prep.model);
  RedEnv env(snapshot, prep.data.train, config.red.env);
  if (env.pool_size() == 0) return;
  Rng rng(derive_seed(config.seed, kSeedRedEnv));
  for (std::size_t ep = 0; ep < config.red.pretrain_episodes; ++ep) {
    env.reset(rng);
    red_episode(env, red, true, 0, ep, report);
  }
}

void pretrain_blue(const GameConfig& config, const Prepared& prep, const Agent& red, Agent& blue,
                   std::size_t batch_size, RunReport& report) {
  auto snapshot = std::make_shared<const Classifier>(*prep.model);
  std::vector<FeatureVector> benign, attacked;
  std::vector<bool> evaded;
  for (const auto& pkt : prep.data.train) {
    if (pkt.label == Label::kMalicious) {
      PerturbResult r = perturb_greedy(red, snapshot, pkt, config.red.env);
      evaded.push_back(r.evaded && !r.missed_clean);
      attacked.push_back(std::move(r.features));
    } else {
      benign.push_back(preprocess(pkt));
    }
  }
  if (benign.empty() || attacked.empty() || batch_size == 0) return;
  Rng rng(derive_seed(config.seed, kSeedBluePretrain));
  std::uniform_int_distribution<std::size_t> pick_train(0, prep.train_x.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_benign(0, benign.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_attacked(0, attacked.size() - 1);
  Classifier work = *prep.model;
  SeenStats seen(config.reservoir_cap, derive_seed(config.seed, kSeedSeen));
  seen.ingest(prep.train_x);
  BlueEnv env(work, seen, config.blue.env, derive_seed(config.seed, kSeedBluePretrain) + 1);
  for (std::size_t ep = 0; ep < config.blue.pretrain_episodes; ++ep) {
    std::vector<FeatureVector> batch;
    for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(prep.train_x[pick_train(rng)]);
    for (std::size_t i = 0; i < batch_size; ++i) {
      const std::size_t j = pick_attacked(rng);
      if (evaded[j] && rng() % 2 == 0) batch.push_back(attacked[j]);
    }
    std::vector<FeatureVector> test;
    for (std::size_t i = 0; i < config.test.benign; ++i) test.push_back(benign[pick_benign(rng)]);
    for (std::size_t i = 0; i < config.test.malicious; ++i) test.push_back(attacked[pick_attacked(rng)]);
    work = *prep.model;
    std::vector<double> s = env.begin_batch(std::move(batch), std::move(test));
    double total = 0.0;
    for (;;) {
      const std::size_t a = blue.act(s);
      StepResult step = env.step(a);
      blue.observe({s, a, step.reward, step.state, step.done});
      total += step.reward;
      s = std::move(step.state);
      if (step.done) break;
    }
    env.end_batch();
    report.blue_pretrain.add(total, env.actions_taken(), blue.epsilon());
  }
}

// Rotating window of the held-out malicious packets used in round k.
std::vector<std::size_t> slice_indices(std::size_t round, std::size_t per_round, std::size_t available) {
  std::vector<std::size_t> idx;
  if (available == 0) return idx;
  const std::size_t n = std::min(per_round, available);
  const std::size_t offset = (round * n) % available;
  for (std::size_t i = 0; i < n; ++i) idx.push_back((offset + i) % available);
  return idx;
}

std::vector<RecoveryRecord> evaluate_recovery(const GameConfig& config, const Prepared& prep,
                                              const Classifier& initial, const std::vector<Batch>& batches,
                                              const Agent& red, const Agent& blue, const SeenStats& seen) {
  auto snapshot = std::make_shared<const Classifier>(initial);
  std::vector<FeatureVector> clean_mal, attacked_mal;
  for (const auto& p : prep.test_malicious) {
    clean_mal.push_back(preprocess(p));
    attacked_mal.push_back(perturb_greedy(red, snapshot, p, config.red.env).features);
  }
  Classifier work = initial;
  SeenStats seen_copy = seen;
  BlueEnv env(work, seen_copy, config.blue.env, derive_seed(config.seed, kSeedEval));
  std::vector<RecoveryRecord> out;
  for (std::size_t k = 0; k < batches.size(); ++k) {
    RecoveryRecord rec;
    rec.batch = k + 1;
    std::vector<FeatureVector> clean_test = prep.test_benign_x;
    std::vector<FeatureVector> test = prep.test_benign_x;
    for (std::size_t i : slice_indices(k, config.test.malicious, clean_mal.size())) {
      clean_test.push_back(clean_mal[i]);
      test.push_back(attacked_mal[i]);
    }
    rec.acc_clean = evaluate(initial, clean_test).acc;
    rec.acc_post_red = evaluate(initial, test).acc;

    std::vector<FeatureVector> blue_batch;
    for (const auto& pkt : *batches[k].raw) {
      if (pkt.label != Label::kMalicious) continue;
      PerturbResult r = perturb_greedy(red, snapshot, pkt, config.red.env);
      if (r.evaded && !r.missed_clean) {
        blue_batch.push_back(std::move(r.features));
        ++rec.red_evaded;
      }
    }
    blue_batch.insert(blue_batch.end(), batches[k].samples.begin(), batches[k].samples.end());
    work = initial;
    std::vector<double> s = env.begin_batch(std::move(blue_batch), std::move(test));
    for (;;) {
      const std::size_t a = blue.greedy(s);
      StepResult step = env.step(a);
      rec.actions.push_back(a);
      rec.acc_after.push_back(env.metrics().acc);
      s = std::move(step.state);
      if (step.done) break;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

double RecoveryRecord::recovery_within(std::size_t k) const {
  double best = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < std::min(k, acc_after.size()); ++i) {
    const double g = acc_after[i] - acc_post_red;
    if (!any || g > best) best = g;
    any = true;
  }
  return best;
}

RunReport::RecoverySummary RunReport::recovery_summary(double min_drop, double min_gain, std::size_t within) const {
  RecoverySummary out;
  out.batches = recovery.size();
  for (const auto& r : recovery) {
    out.mean_drop += r.drop();
    if (r.drop() < min_drop) continue;
    ++out.post_drift;
    const double g = r.recovery_within(within);
    out.mean_recovery += g;
    if (g >= min_gain) ++out.recovered;
  }
  if (out.batches > 0) out.mean_drop /= static_cast<double>(out.batches);
  if (out.post_drift > 0) {
    out.mean_recovery /= static_cast<double>(out.post_drift);
    out.recovered_fraction = static_cast<double>(out.recovered) / static_cast<double>(out.post_drift);
  }
  return out;
}

GameData load_game_data(const GameConfig& config) {
  std::vector<RawPacket> packets;
  if (config.data.source == "synthetic") {
    packets = synth_generate(default_profile(), config.data.packets, derive_seed(config.seed, kSeedData));
  } else {
    const std::filesystem::path path = config.data.source.substr(5);
    std::filesystem::path labels = config.data.labels.empty() ? path.string() + ".labels" : config.data.labels;
    LabelMap map;
    if (std::filesystem::exists(labels)) {
      map = read_label_sidecar(labels);
    } else if (!config.data.labels.empty()) {
      throw ConfigError("label sidecar not found: " + labels.string());
    }
    packets = parse_pcap(path, std::move(map)).packets;
    if (config.data.packets > 0 && packets.size() > config.data.packets) packets.resize(config.data.packets);
  }
  const std::size_t n = packets.size();
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * config.data.train_fraction));
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * config.data.test_fraction));
  if (n_train + n_test >= n || n - n_train - n_test < config.n_batches) {
    throw ConfigError("not enough packets (" + std::to_string(n) + ") for the split and " +
                      std::to_string(config.n_batches) + " batches");
  }
  GameData d;
  d.train.assign(packets.begin(), packets.begin() + static_cast<std::ptrdiff_t>(n_train));
  d.test.assign(packets.begin() + static_cast<std::ptrdiff_t>(n_train),
                packets.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  d.stream.assign(packets.begin() + static_cast<std::ptrdiff_t>(n_train + n_test), packets.end());
  return d;
}

PerturbResult perturb_greedy(const Agent& agent, std::shared_ptr<const Classifier> snapshot,
                             const RawPacket& packet, const RedEnvConfig& config) {
  PerturbResult out;
  out.features = preprocess(packet);
  if (snapshot->predict(out.features) == Label::kBenign) {
    out.missed_clean = true;
    out.evaded = true;
    return out;
  }
  const RawPacket one[] = {packet};
  RedEnv env(std::move(snapshot), one, config);
  if (env.pool_size() == 0) return out;  // unparseable; left as is
  std::vector<double> s = env.reset_to(0);
  while (env.active()) {
    StepResult step = env.step(agent.greedy(s));
    s = std::move(step.state);
  }
  out.features = {env.state(), packet.label};
  out.steps = env.steps();
  out.evaded = env.evaded();
  return out;
}

RedEvaluation evaluate_red(const Agent& agent, std::shared_ptr<const Classifier> snapshot,
                           std::span<const RawPacket> malicious, const RedEnvConfig& config) {
  RedEvaluation ev;
  std::size_t steps = 0;
  for (const auto& pkt : malicious) {
    if (pkt.label != Label::kMalicious) continue;
    ++ev.packets;
    const PerturbResult r = perturb_greedy(agent, snapshot, pkt, config);
    if (!r.missed_clean) {
      ++ev.detected_clean;
      if (r.evaded) ++ev.evaded;
      steps += r.steps;
    }
    if (!r.evaded) ++ev.detected_perturbed;
  }
  if (ev.packets > 0) {
    ev.acc_clean = static_cast<double>(ev.detected_clean) / static_cast<double>(ev.packets);
    ev.acc_perturbed = static_cast<double>(ev.detected_perturbed) / static_cast<double>(ev.packets);
  }
  if (ev.detected_clean > 0) {
    ev.success_rate = static_cast<double>(ev.evaded) / static_cast<double>(ev.detected_clean);
    ev.mean_steps = static_cast<double>(steps) / static_cast<double>(ev.detected_clean);
  }
  return ev;
}

double RunReport::final_accuracy() const {
  if (rounds.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rounds) s += r.acc_after_blue;
  return s / static_cast<double>(rounds.size());
}

std::array<std::size_t, kAdaptationActionCount> RunReport::action_counts() const {
  std::array<std::size_t, kAdaptationActionCount> c{};
  for (const auto& a : blue_actions) ++c.at(a.action);
  return c;
}

std::array<double, kAdaptationActionCount> RunReport::action_mean_rewards() const {
  std::array<double, kAdaptationActionCount> sum{};
  const auto counts = action_counts();
  for (const auto& a : blue_actions) sum.at(a.action) += a.reward;
  for (std::size_t k = 0; k < kAdaptationActionCount; ++k) {
    sum[k] = counts[k] == 0 ? 0.0 : sum[k] / static_cast<double>(counts[k]);
  }
  return sum;
}

std::array<std::array<std::size_t, kAdaptationActionCount>, 3> RunReport::action_frequency_by_thirds() const {
  std::array<std::array<std::size_t, kAdaptationActionCount>, 3> f{};
  const std::size_t n = rounds.size();
  for (const auto& a : blue_actions) {
    const std::size_t third = n == 0 ? 0 : std::min<std::size_t>(2, (a.round - 1) * 3 / n);
    ++f[third].at(a.action);
  }
  return f;
}

RunReport run_game(const GameConfig& config, RunArtifacts* artifacts) {
  config.validate();
  RunReport report;
  report.config_text = dump_config(config);
  report.seed = config.seed;
  report.blue_algorithm = config.blue.agent.algorithm;
  report.mask = config.blue.env.mask;
  std::unique_ptr<Classifier> model;
  std::unique_ptr<Agent> red;
  std::unique_ptr<Agent> blue;
  try {
    Prepared prep = prepare(config);
    report.initial_accuracy = prep.initial_accuracy;
    red = make_agent(config.red.agent, kFeatureDim, kPerturbActionCount, derive_seed(config.seed, kSeedRedAgent));
    blue = make_agent(config.blue.agent, kBlueStateDim, kAdaptationActionCount,
                      derive_seed(config.seed, kSeedBlueAgent));
    if (config.red.enabled) {
      pretrain_red(config, prep, *red, report);
      report.red_initial = evaluate_red(*red, std::make_shared<const Classifier>(*prep.model), prep.test_malicious,
                                        config.red.env);
    }
    const std::vector<Batch> batches = batch_split(std::span<const RawPacket>(prep.data.stream), config.n_batches);
    if (config.red.enabled && config.blue.pretrain_episodes > 0 && !batches.empty()) {
      pretrain_blue(config, prep, *red, *blue, batches.front().samples.size(), report);
    }
    const Classifier initial = *prep.model;
    model = std::move(prep.model);

    SeenStats seen(config.reservoir_cap, derive_seed(config.seed, kSeedSeen));
    seen.ingest(prep.train_x);
    BlueEnv blue_env(*model, seen, config.blue.env, derive_seed(config.seed, kSeedBlueEnv));

    std::size_t red_episode_index = config.red.pretrain_episodes;
    for (std::size_t k = 0; k < batches.size(); ++k) {
      const Batch& batch = batches[k];
      RoundRecord rec;
      rec.round = k + 1;
      rec.batch_size = batch.samples.size();
      for (const auto& x : batch.samples) rec.batch_malicious += x.label == Label::kMalicious ? 1 : 0;

      auto snapshot = std::make_shared<const Classifier>(*model);
      rec.red_model_version = snapshot->version();

      std::vector<RawPacket> slice;
      for (std::size_t i : slice_indices(k, config.test.malicious, prep.test_malicious.size())) {
        slice.push_back(prep.test_malicious[i]);
      }

      std::vector<FeatureVector> clean_test = prep.test_benign_x;
      for (const auto& p : slice) clean_test.push_back(preprocess(p));
      rec.acc_clean = evaluate(*snapshot, clean_test).acc;

      std::vector<FeatureVector> evaders;
      std::vector<FeatureVector> round_test;
      if (config.red.enabled) {
        RedEnv env(snapshot, *batch.raw, config.red.env);
        for (std::size_t i = 0; i < env.pool_size(); ++i) {
          env.reset_to(i);
          const EpisodeResult er =
              red_episode(env, *red, config.red.learn_online, rec.round, red_episode_index++, report);
          ++rec.red_attempted;
          rec.red_steps += er.steps;
          rec.red_reward += er.reward;
          if (er.evaded) {
            ++rec.red_evaded;
            evaders.push_back({env.state(), Label::kMalicious});
          }
        }
        round_test = prep.test_benign_x;
        for (const auto& p : slice) round_test.push_back(perturb_greedy(*red, snapshot, p, config.red.env).features);
      } else {
        round_test = clean_test;
      }
      rec.acc_post_red = evaluate(*snapshot, round_test).acc;

      std::vector<FeatureVector> blue_batch = evaders;
      blue_batch.insert(blue_batch.end(), batch.samples.begin(), batch.samples.end());
      rec.blue_batch_size = blue_batch.size();
      std::vector<double> s = blue_env.begin_batch(std::move(blue_batch), std::move(round_test));
      rec.kl = blue_env.kl();
      rec.w = blue_env.w();
      double episode_reward = 0.0;
      for (;;) {
        const std::size_t a = blue->act(s);
        const double eps = blue->epsilon();
        StepResult step = blue_env.step(a);
        blue->observe({s, a, step.reward, step.state, step.done});
        const auto& log = blue_env.last_step();
        report.blue_actions.push_back({rec.round, blue_env.actions_taken(), a, log.acc_prev, log.acc, log.r,
                                       log.reward, log.samples_used, log.samples_selected, log.labels_queried, log.replay_used,
                                       log.model_version, log.done, eps});
        rec.samples_used += log.samples_used;
        rec.labels_queried += log.labels_queried;
        episode_reward += step.reward;
        if (blue_env.actions_taken() <= 3) rec.acc_within_3 = log.acc;
        s = std::move(step.state);
        if (step.done) break;
      }
      rec.blue_actions = blue_env.actions_taken();
      rec.blue_reward = episode_reward;
      rec.acc_after_blue = blue_env.metrics().acc;
      rec.blue_model_version = model->version();
      blue_env.end_batch();
      report.blue_episodes.add(episode_reward, rec.blue_actions, blue->epsilon());
      report.rounds.push_back(rec);
    }
    if (config.eval.recovery && config.red.enabled) {
      report.recovery = evaluate_recovery(config, prep, initial, batches, *red, *blue, seen);
    }
    report.complete = true;
  } catch (const std::exception& e) {
    report.error = e.what();
  }
  if (artifacts) {
    artifacts->classifier = std::move(model);
    artifacts->red = std::move(red);
    artifacts->blue = std::move(blue);
  }
  return report;
}

std::vector<RecoveryRecord> recovery_evaluation(const GameConfig& config, const Agent& red, const Agent& blue) {
  config.validate();
  const Prepared prep = prepare(config);
  SeenStats seen(config.reservoir_cap, derive_seed(config.seed, kSeedSeen));
  seen.ingest(prep.train_x);
  const std::vector<Batch> batches = batch_split(std::span<const RawPacket>(prep.data.stream), config.n_batches);
  return evaluate_recovery(config, prep, *prep.model, batches, red, blue, seen);
}

RedTraining train_red(const GameConfig& config, RunArtifacts* artifacts) {
  config.validate();
  Prepared prep = prepare(config);
  RunReport scratch;
  auto red = make_agent(config.red.agent, kFeatureDim, kPerturbActionCount, derive_seed(config.seed, kSeedRedAgent));
  pretrain_red(config, prep, *red, scratch);
  RedTraining out;
  out.log = scratch.red_episodes;
  out.initial_accuracy = prep.initial_accuracy;
  out.evaluation =
      evaluate_red(*red, std::make_shared<const Classifier>(*prep.model), prep.test_malicious, config.red.env);
  if (artifacts) {
    artifacts->classifier = std::move(prep.model);
    artifacts->red = std::move(red);
  }
  return out;
}

std::vector<AblationCell> run_ablation(const GameConfig& config, const std::vector<std::uint64_t>& seeds) {
  std::vector<AblationCell> cells;
  for (std::uint64_t seed : seeds) {
    for (const char* algo : {"dqn", "ppo"}) {
      for (StateMask mask : {StateMask::kNone, StateMask::kModel, StateMask::kData}) {
        GameConfig c = config;
        c.seed = seed;
        c.blue.agent.algorithm = algo;
        c.blue.env.mask = mask;
        c.eval.recovery = false;
        const RunReport r = run_game(c);
        if (!r.complete) throw Error("ablation run failed: " + r.error);
        double rec = 0.0;
        for (const auto& round : r.rounds) rec += round.recovery();
        if (!r.rounds.empty()) rec /= static_cast<double>(r.rounds.size());
        cells.push_back({algo, mask, seed, r.final_accuracy(), rec});
      }
    }
  }
  return cells;
}

}  // namespace driftarena
