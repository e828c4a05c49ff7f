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

#include "driftarena/envs.hpp"

#include <string>

namespace driftarena {

void RedEnvConfig::validate() const {
  if (max_steps == 0) throw ConfigError("red max_steps must be at least 1");
}

double red_reward(double p_benign_before, double p_benign_after, bool evaded, bool effective,
                  const RedEnvConfig& config) {
  double r = config.prob_shaping_weight * (p_benign_after - p_benign_before) - config.step_penalty;
  if (evaded) r += config.evasion_bonus;
  if (!effective) r -= config.step_penalty;
  return r;
}

RedEnv::RedEnv(std::shared_ptr<const Classifier> snapshot, std::span<const RawPacket> packets,
               RedEnvConfig config)
    : snapshot_(std::move(snapshot)), config_(config) {
  if (!snapshot_) throw ConfigError("red environment needs a classifier snapshot");
  config_.validate();
  for (const auto& pkt : packets) {
    if (pkt.label != Label::kMalicious) continue;
    try {
      PacketView view = PacketView::from_raw(pkt);
      if (snapshot_->predict(to_features(view)) == Label::kMalicious) pool_.push_back(std::move(view));
    } catch (const RejectedPacket&) {
    } catch (const MalformedPacket&) {
    }
  }
}

std::vector<double> RedEnv::reset(Rng& rng) {
  if (pool_.empty()) throw StateError("red environment has no malicious packets to perturb");
  std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
  return reset_to(pick(rng));
}

std::vector<double> RedEnv::reset_to(std::size_t pool_index) {
  current_ = pool_.at(pool_index);
  state_ = to_features(*current_);
  p_benign_ = snapshot_->predict_proba(state_)[0];
  steps_ = 0;
  evaded_ = false;
  active_ = true;
  last_ = {};
  return state_.values;
}

const PacketView& RedEnv::current() const {
  if (!current_) throw StateError("red environment has not been reset");
  return *current_;
}

StepResult RedEnv::step(std::size_t action) {
  if (!active_) throw StateError("red episode is over; call reset first");
  if (action >= kPerturbActionCount) {
    throw ConfigError("perturbation action out of range: " + std::to_string(action));
  }
  const auto a = static_cast<PerturbAction>(action);
  PerturbOutcome out = apply(*current_, a, config_.perturb);
  const double before = p_benign_;
  if (out.effective) {
    current_ = std::move(out.view);
    state_ = to_features(*current_);
  }
  const ProbabilityPair p = snapshot_->predict_proba(state_);
  p_benign_ = p[0];
  ++steps_;
  evaded_ = !(p[1] > p[0]);
  const double reward = red_reward(before, p_benign_, evaded_, out.effective, config_);
  last_ = {a, before, p_benign_, out.effective, evaded_, reward};
  const bool done = evaded_ || steps_ >= config_.max_steps;
  if (done) active_ = false;
  return {state_.values, reward, done};
}

StateMask state_mask_from_string(std::string_view s) {
  if (s == "none") return StateMask::kNone;
  if (s == "model") return StateMask::kModel;
  if (s == "data") return StateMask::kData;
  throw ConfigError("unknown state mask '" + std::string(s) + "' (expected none, model or data)");
}

std::string_view state_mask_name(StateMask m) {
  switch (m) {
    case StateMask::kNone: return "none";
    case StateMask::kModel: return "model";
    case StateMask::kData: return "data";
  }
  return "none";
}

std::vector<double> compose_blue_state(const Metrics& metrics, double kl, double w,
                                       std::span<const double> f_t, StateMask mask) {
  if (f_t.size() != kFeatureDim) throw DimensionError("feature diff must have 1525 entries");
  std::vector<double> s(kBlueStateDim, 0.0);
  if (mask != StateMask::kModel) {
    s[0] = metrics.acc;
    s[1] = metrics.fpr;
    s[2] = metrics.fnr;
  }
  if (mask != StateMask::kData) {
    s[3] = kl;
    s[4] = w;
    std::copy(f_t.begin(), f_t.end(), s.begin() + 5);
  }
  return s;
}

void BlueEnvConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("blue threshold must lie in (0, 1)");
  if (max_actions_per_batch == 0) throw ConfigError("blue max_actions must be at least 1");
  budget.validate();
}

double blue_reward(double acc, double acc_prev, double r, const BlueEnvConfig& config) {
  if (acc > config.threshold) return config.success_reward;
  return -config.sample_penalty * r + config.gain_weight * (acc - acc_prev);
}

BlueEnv::BlueEnv(Classifier& model, SeenStats& seen, BlueEnvConfig config, std::uint64_t seed)
    : model_(model), seen_(seen), config_(config), rng_(seed) {
  config_.validate();
}

std::vector<double> BlueEnv::begin_batch(std::vector<FeatureVector> batch, std::vector<FeatureVector> test) {
  if (batch.empty()) throw ConfigError("blue batch is empty");
  if (test.empty()) throw ConfigError("blue test set is empty");
  batch_ = std::move(batch);
  test_ = std::move(test);
  diff_ = feature_diff(batch_, seen_);
  if (seen_.reservoir().empty()) {
    kl_ = 0.0;
    w_ = 0.0;
  } else {
    kl_ = kl_divergence(batch_, seen_);
    w_ = wasserstein(batch_, seen_);
  }
  metrics_ = evaluate(model_, test_);
  used_.assign(batch_.size(), false);
  actions_ = 0;
  active_ = true;
  done_ = false;
  last_ = {};
  return observe();
}

std::vector<double> BlueEnv::observe() const {
  return compose_blue_state(metrics_, kl_, w_, diff_.f, config_.mask);
}

StepResult BlueEnv::step(std::size_t action) {
  if (!active_ || done_) throw StateError("no blue batch in progress");
  const AdaptationAction a = adaptation_action_from_int(static_cast<int>(action));
  const double acc_prev = metrics_.acc;
  const LabelOracle oracle = [this](std::size_t i) { return batch_.at(i).label; };
  const AdaptationOutcome out = apply_adaptation(model_, a, batch_, config_.budget, oracle, seen_, rng_);
  metrics_ = evaluate(model_, test_);
  ++actions_;
  std::size_t fresh = 0;
  for (std::size_t i : out.selected_indices) {
    if (!used_[i]) {
      used_[i] = true;
      ++fresh;
    }
  }
  const double r = static_cast<double>(fresh) / static_cast<double>(batch_.size());
  const double reward = blue_reward(metrics_.acc, acc_prev, r, config_);
  done_ = metrics_.acc > config_.threshold || actions_ >= config_.max_actions_per_batch;
  last_ = {a,     acc_prev,         metrics_.acc,       r,
           reward, fresh,           out.samples_used,   out.labels_queried,
           out.replay_used, model_.version(), done_, metrics_};
  return {observe(), reward, done_};
}

void BlueEnv::end_batch() {
  if (!active_) throw StateError("no blue batch in progress");
  seen_.ingest(batch_);
  active_ = false;
}

}  // namespace driftarena
