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

#include "driftarena/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "driftarena/checkpoint.hpp"

namespace driftarena {

namespace {

std::vector<double> to_std(const nn::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void fill(nn::Vector& dst, const std::vector<double>& src, const std::string& what) {
  if (static_cast<std::size_t>(dst.size()) != src.size()) {
    throw ParseError("policy checkpoint: " + what + " has wrong length");
  }
  std::copy(src.begin(), src.end(), dst.data());
}

std::string rng_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void rng_restore(Rng& rng, const std::string& s) {
  std::istringstream is(s);
  is >> rng;
  if (!is) throw ParseError("policy checkpoint: bad rng state");
}

nn::Matrix rows_of(std::span<const std::vector<double>* const> rows, std::size_t dim) {
  nn::Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i]->size() != dim) throw DimensionError("state has wrong dimension");
    m.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[i]->data(), static_cast<Eigen::Index>(dim));
  }
  return m;
}

std::vector<double> log_softmax(const nn::Vector& z) {
  const double mx = z.maxCoeff();
  const double lse = mx + std::log((z.array() - mx).exp().sum());
  std::vector<double> out(static_cast<std::size_t>(z.size()));
  for (Eigen::Index k = 0; k < z.size(); ++k) out[static_cast<std::size_t>(k)] = z[k] - lse;
  return out;
}

void save_projection(Checkpoint& ck, const RandomProjection& p) {
  ck.meta["projection_rows"] = std::to_string(p.matrix().rows());
  ck.meta["projection_cols"] = std::to_string(p.matrix().cols());
  ck.meta["projection_keep"] = std::to_string(p.keep());
  const auto& m = p.matrix();
  ck.arrays["projection"] = std::vector<double>(m.data(), m.data() + m.size());
}

void load_projection(const Checkpoint& ck, RandomProjection& p) {
  const auto rows = ck.meta_u64("projection_rows");
  const auto cols = ck.meta_u64("projection_cols");
  const auto& data = ck.array_at("projection");
  if (data.size() != rows * cols) throw ParseError("policy checkpoint: projection has wrong size");
  p.matrix().resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(data.begin(), data.end(), p.matrix().data());
  p.set_keep(ck.meta_u64("projection_keep"));
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    return;
  }
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw ConfigError("replay index out of range");
  return data_[(head_ + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  if (n > data_.size()) throw ConfigError("cannot sample more transitions than stored");
  std::vector<std::size_t> idx(data_.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(n);
  return idx;
}

double EpsilonSchedule::at(std::size_t step) const {
  if (decay_steps == 0 || step >= decay_steps) return end;
  const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
  return start + (end - start) * frac;
}

RandomProjection::RandomProjection(std::size_t in, std::size_t out, std::uint64_t seed, std::size_t keep)
    : keep_(keep) {
  if (in == 0 || out == 0) throw ConfigError("projection dimensions must be positive");
  if (keep >= in) throw ConfigError("projection must leave at least one input to project");
  m_.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in - keep));
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(out)));
  for (Eigen::Index i = 0; i < m_.size(); ++i) m_.data()[i] = normal(rng);
}

std::vector<double> RandomProjection::apply(std::span<const double> x) const {
  if (x.size() != in_dim()) throw DimensionError("projection input has wrong dimension");
  const Eigen::Map<const nn::Vector> tail(x.data() + keep_, static_cast<Eigen::Index>(x.size() - keep_));
  const nn::Vector y = m_ * tail;
  std::vector<double> out(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(keep_));
  out.insert(out.end(), y.data(), y.data() + y.size());
  return out;
}

std::size_t argmax_lowest(std::span<const double> v) {
  if (v.empty()) throw ConfigError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

void DqnConfig::validate() const {
  if (hidden == 0) throw ConfigError("dqn hidden size must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("dqn gamma must lie in [0, 1]");
  if (minibatch == 0 || buffer_capacity < minibatch) throw ConfigError("dqn buffer must hold a minibatch");
  if (target_sync == 0) throw ConfigError("dqn target_sync must be positive");
  if (train_every == 0) throw ConfigError("dqn train_every must be positive");
  if (epsilon.end > epsilon.start) throw ConfigError("epsilon schedule must be non-increasing");
  if (epsilon.start > 1.0 || epsilon.end < 0.0) throw ConfigError("epsilon must lie in [0, 1]");
}

void PpoConfig::validate() const {
  if (hidden == 0) throw ConfigError("ppo hidden size must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("ppo gamma must lie in [0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("ppo lambda must lie in [0, 1]");
  if (clip < 0.0) throw ConfigError("ppo clip must be non-negative");
  if (horizon == 0 || minibatch == 0 || epochs == 0) throw ConfigError("ppo horizon, minibatch and epochs must be positive");
}

std::size_t dqn_act(const nn::Mlp& net, std::span<const double> state, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double draw = u(rng);
  if (draw < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, net.out_dim() - 1);
    return pick(rng);
  }
  const nn::Vector q = net.forward_one(state);
  return argmax_lowest(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

TdResult td_loss_and_gradient(const nn::Mlp& online, const nn::Mlp& target,
                              std::span<const Transition* const> batch, double gamma) {
  TdResult res;
  const std::size_t n = batch.size();
  if (n == 0) {
    res.gradient = nn::Vector::Zero(static_cast<Eigen::Index>(online.param_count()));
    return res;
  }
  std::vector<const std::vector<double>*> s(n), s2(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = &batch[i]->state;
    s2[i] = &batch[i]->next_state;
  }
  nn::Mlp::Cache cache;
  const nn::Matrix q = online.forward(rows_of(s, online.in_dim()), &cache);
  const nn::Matrix q_next = target.forward(rows_of(s2, target.in_dim()));
  nn::Matrix d_out = nn::Matrix::Zero(q.rows(), q.cols());
  res.targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const Transition& t = *batch[i];
    if (t.action >= static_cast<std::size_t>(q.cols())) throw ConfigError("transition action out of range");
    const double y = t.done ? t.reward : t.reward + gamma * q_next.row(r).maxCoeff();
    res.targets[i] = y;
    const double err = q(r, static_cast<Eigen::Index>(t.action)) - y;
    res.loss += err * err;
    d_out(r, static_cast<Eigen::Index>(t.action)) = 2.0 * err / static_cast<double>(n);
  }
  res.loss /= static_cast<double>(n);
  res.gradient = online.backward(cache, d_out);
  return res;
}

SurrogateResult ppo_surrogate(const nn::Matrix& logits, std::span<const std::size_t> actions,
                              std::span<const double> old_log_probs, std::span<const double> advantages,
                              double clip, double entropy_coef) {
  const auto n = static_cast<std::size_t>(logits.rows());
  if (actions.size() != n || old_log_probs.size() != n || advantages.size() != n) {
    throw DimensionError("surrogate inputs disagree in length");
  }
  SurrogateResult res;
  res.d_logits = nn::Matrix::Zero(logits.rows(), logits.cols());
  res.ratios.resize(n);
  if (n == 0) return res;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const nn::Vector z = logits.row(r).transpose();
    const std::vector<double> lp = log_softmax(z);
    const std::size_t a = actions[i];
    if (a >= lp.size()) throw ConfigError("surrogate action out of range");
    const double ratio = std::exp(lp[a] - old_log_probs[i]);
    res.ratios[i] = ratio;
    const double adv = advantages[i];
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped * adv;
    res.loss -= std::min(unclipped_term, clipped_term) * inv_n;
    const bool grad_flows = unclipped_term <= clipped_term;
    double h = 0.0;
    for (double l : lp) h -= std::exp(l) * l;
    res.loss -= entropy_coef * h * inv_n;
    for (std::size_t k = 0; k < lp.size(); ++k) {
      const double pk = std::exp(lp[k]);
      double g = 0.0;
      if (grad_flows) g -= adv * ratio * ((k == a ? 1.0 : 0.0) - pk) * inv_n;
      g += entropy_coef * pk * (lp[k] + h) * inv_n;
      res.d_logits(r, static_cast<Eigen::Index>(k)) = g;
    }
  }
  return res;
}

Gae compute_gae(std::span<const double> rewards, std::span<const double> values,
                std::span<const double> next_values, std::span<const std::uint8_t> dones, double gamma,
                double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || dones.size() != n) {
    throw DimensionError("GAE inputs disagree in length");
  }
  Gae g;
  g.advantages.assign(n, 0.0);
  g.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double mask = dones[k] != 0 ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * mask * next_values[k] - values[k];
    // The last entry has no successor in the rollout.
    const double carry = k + 1 < n ? running : 0.0;
    running = delta + gamma * lambda * mask * carry;
    g.advantages[k] = running;
    g.returns[k] = running + values[k];
  }
  return g;
}

DqnAgent::DqnAgent(std::size_t state_dim, std::size_t action_count, DqnConfig config, std::uint64_t seed)
    : state_dim_(state_dim), action_count_(action_count), config_(config), seed_(seed),
      buffer_(config.buffer_capacity), rng_(seed) {
  config_.validate();
  if (state_dim == 0 || action_count == 0) throw ConfigError("agent dimensions must be positive");
  std::size_t in = state_dim;
  if (config_.projection_dim > 0) {
    projection_ = RandomProjection(state_dim, config_.projection_dim, seed ^ 0x9e3779b97f4a7c15ULL,
                                   config_.projection_keep);
    in = projection_.out_dim();
  }
  online_ = nn::Mlp(in, config_.hidden, action_count);
  online_.init(rng_);
  target_ = online_;
  opt_ = nn::Adam(online_.param_count(), nn::AdamConfig{config_.learning_rate});
}

std::vector<double> DqnAgent::project(std::span<const double> state) const {
  if (state.size() != state_dim_) throw DimensionError("agent state has wrong dimension");
  if (config_.projection_dim == 0) return {state.begin(), state.end()};
  return projection_.apply(state);
}

std::vector<double> DqnAgent::q_values(std::span<const double> state) const {
  return to_std(online_.forward_one(project(state)));
}

std::size_t DqnAgent::act(std::span<const double> state) {
  return dqn_act(online_, project(state), epsilon(), rng_);
}

std::size_t DqnAgent::greedy(std::span<const double> state) const {
  const auto q = q_values(state);
  return argmax_lowest(q);
}

void DqnAgent::observe(const Transition& t) {
  Transition stored{project(t.state), t.action, t.reward, project(t.next_state), t.done};
  buffer_.push(std::move(stored));
  ++steps_;
  if (steps_ % config_.train_every == 0) update();
}

std::optional<double> DqnAgent::update() {
  if (buffer_.size() < config_.minibatch) return std::nullopt;
  const auto idx = buffer_.sample_indices(config_.minibatch, rng_);
  std::vector<const Transition*> batch(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) batch[i] = &buffer_.at(idx[i]);
  TdResult td = td_loss_and_gradient(online_, target_, batch, config_.gamma);
  opt_.step(online_.params(), td.gradient);
  ++updates_;
  if (updates_ % config_.target_sync == 0) target_ = online_;
  return td.loss;
}

void DqnAgent::save(const std::filesystem::path& path) const {
  Checkpoint ck;
  ck.kind = "dqn";
  ck.meta["state_dim"] = std::to_string(state_dim_);
  ck.meta["action_count"] = std::to_string(action_count_);
  ck.meta["hidden"] = std::to_string(config_.hidden);
  ck.meta["buffer_capacity"] = std::to_string(config_.buffer_capacity);
  ck.meta["minibatch"] = std::to_string(config_.minibatch);
  ck.meta["target_sync"] = std::to_string(config_.target_sync);
  ck.meta["train_every"] = std::to_string(config_.train_every);
  ck.meta["projection_dim"] = std::to_string(config_.projection_dim);
  ck.meta["projection_keep"] = std::to_string(config_.projection_keep);
  ck.meta["epsilon_decay_steps"] = std::to_string(config_.epsilon.decay_steps);
  ck.set_double("gamma", config_.gamma);
  ck.set_double("learning_rate", config_.learning_rate);
  ck.set_double("epsilon_start", config_.epsilon.start);
  ck.set_double("epsilon_end", config_.epsilon.end);
  ck.meta["seed"] = std::to_string(seed_);
  ck.meta["steps"] = std::to_string(steps_);
  ck.meta["updates"] = std::to_string(updates_);
  ck.meta["adam_steps"] = std::to_string(opt_.steps());
  ck.meta["rng_state"] = rng_string(rng_);
  ck.arrays["online"] = to_std(online_.params());
  ck.arrays["target"] = to_std(target_.params());
  ck.arrays["adam_m"] = to_std(opt_.first_moment());
  ck.arrays["adam_v"] = to_std(opt_.second_moment());
  if (config_.projection_dim > 0) save_projection(ck, projection_);
  ck.save(path);
}

std::unique_ptr<DqnAgent> DqnAgent::load(const std::filesystem::path& path) {
  const Checkpoint ck = Checkpoint::load(path);
  if (ck.kind != "dqn") throw ParseError("checkpoint is not a dqn policy: " + ck.kind);
  DqnConfig cfg;
  cfg.hidden = ck.meta_u64("hidden");
  cfg.buffer_capacity = ck.meta_u64("buffer_capacity");
  cfg.minibatch = ck.meta_u64("minibatch");
  cfg.target_sync = ck.meta_u64("target_sync");
  cfg.train_every = ck.meta_u64("train_every");
  cfg.projection_dim = ck.meta_u64("projection_dim");
  cfg.projection_keep = ck.meta_u64("projection_keep");
  cfg.epsilon.decay_steps = ck.meta_u64("epsilon_decay_steps");
  cfg.gamma = ck.meta_double("gamma");
  cfg.learning_rate = ck.meta_double("learning_rate");
  cfg.epsilon.start = ck.meta_double("epsilon_start");
  cfg.epsilon.end = ck.meta_double("epsilon_end");
  auto agent = std::make_unique<DqnAgent>(ck.meta_u64("state_dim"), ck.meta_u64("action_count"), cfg,
                                          ck.meta_u64("seed"));
  agent->steps_ = ck.meta_u64("steps");
  agent->updates_ = ck.meta_u64("updates");
  agent->opt_.set_steps(ck.meta_u64("adam_steps"));
  rng_restore(agent->rng_, ck.meta_at("rng_state"));
  fill(agent->online_.params(), ck.array_at("online"), "online");
  fill(agent->target_.params(), ck.array_at("target"), "target");
  fill(agent->opt_.first_moment(), ck.array_at("adam_m"), "adam_m");
  fill(agent->opt_.second_moment(), ck.array_at("adam_v"), "adam_v");
  if (cfg.projection_dim > 0) load_projection(ck, agent->projection_);
  return agent;
}

PpoAgent::PpoAgent(std::size_t state_dim, std::size_t action_count, PpoConfig config, std::uint64_t seed)
    : state_dim_(state_dim), action_count_(action_count), config_(config), seed_(seed), rng_(seed) {
  config_.validate();
  if (state_dim == 0 || action_count == 0) throw ConfigError("agent dimensions must be positive");
  std::size_t in = state_dim;
  if (config_.projection_dim > 0) {
    projection_ = RandomProjection(state_dim, config_.projection_dim, seed ^ 0x9e3779b97f4a7c15ULL,
                                   config_.projection_keep);
    in = projection_.out_dim();
  }
  policy_ = nn::Mlp(in, config_.hidden, action_count);
  policy_.init(rng_);
  // Small output layer keeps the initial policy close to uniform.
  {
    auto& p = policy_.params();
    const std::size_t w2 = config_.hidden * in + config_.hidden;
    for (std::size_t i = w2; i < static_cast<std::size_t>(p.size()); ++i) p[static_cast<Eigen::Index>(i)] *= 0.01;
  }
  value_ = nn::Mlp(in, config_.hidden, 1);
  value_.init(rng_);
  policy_opt_ = nn::Adam(policy_.param_count(), nn::AdamConfig{config_.learning_rate});
  value_opt_ = nn::Adam(value_.param_count(), nn::AdamConfig{config_.learning_rate});
}

std::vector<double> PpoAgent::project(std::span<const double> state) const {
  if (state.size() != state_dim_) throw DimensionError("agent state has wrong dimension");
  if (config_.projection_dim == 0) return {state.begin(), state.end()};
  return projection_.apply(state);
}

std::vector<double> PpoAgent::action_probabilities(std::span<const double> state) const {
  const auto lp = log_softmax(policy_.forward_one(project(state)));
  std::vector<double> p(lp.size());
  for (std::size_t k = 0; k < lp.size(); ++k) p[k] = std::exp(lp[k]);
  return p;
}

double PpoAgent::value(std::span<const double> state) const { return value_.forward_one(project(state))[0]; }

std::size_t PpoAgent::act(std::span<const double> state) {
  const auto lp = log_softmax(policy_.forward_one(project(state)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double draw = u(rng_);
  double acc = 0.0;
  std::size_t a = lp.size() - 1;
  for (std::size_t k = 0; k < lp.size(); ++k) {
    acc += std::exp(lp[k]);
    if (draw < acc) {
      a = k;
      break;
    }
  }
  last_act_ = std::make_pair(a, lp[a]);
  return a;
}

std::size_t PpoAgent::greedy(std::span<const double> state) const {
  const nn::Vector z = policy_.forward_one(project(state));
  return argmax_lowest(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
}

void PpoAgent::observe(const Transition& t) {
  if (t.action >= action_count_) throw ConfigError("transition action out of range");
  std::vector<double> s = project(t.state);
  double log_prob;
  if (last_act_ && last_act_->first == t.action) {
    log_prob = last_act_->second;
  } else {
    log_prob = log_softmax(policy_.forward_one(s))[t.action];
  }
  last_act_.reset();
  const double v = value_.forward_one(s)[0];
  const double v_next = t.done ? 0.0 : value_.forward_one(project(t.next_state))[0];
  rollout_.push_back({std::move(s), t.action, t.reward, t.done, log_prob, v, v_next});
  if (rollout_.size() >= config_.horizon) update();
}

void PpoAgent::update() {
  const std::size_t n = rollout_.size();
  if (n == 0) return;
  std::vector<double> rewards(n), values(n), next_values(n);
  std::vector<std::uint8_t> dones(n);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = rollout_[i].reward;
    values[i] = rollout_[i].value;
    next_values[i] = rollout_[i].next_value;
    dones[i] = rollout_[i].done ? 1 : 0;
  }
  Gae gae = compute_gae(rewards, values, next_values, dones, config_.gamma, config_.lambda);
  std::vector<double> adv = gae.advantages;
  if (n > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t in = policy_.in_dim();
  for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng_);
    for (std::size_t start = 0; start < n; start += config_.minibatch) {
      const std::size_t end = std::min(n, start + config_.minibatch);
      const std::size_t m = end - start;
      nn::Matrix x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(in));
      std::vector<std::size_t> actions(m);
      std::vector<double> old_lp(m), mb_adv(m);
      nn::Matrix d_value(static_cast<Eigen::Index>(m), 1);
      for (std::size_t j = 0; j < m; ++j) {
        const Step& st = rollout_[order[start + j]];
        x.row(static_cast<Eigen::Index>(j)) =
            Eigen::Map<const Eigen::RowVectorXd>(st.state.data(), static_cast<Eigen::Index>(in));
        actions[j] = st.action;
        old_lp[j] = st.log_prob;
        mb_adv[j] = adv[order[start + j]];
      }
      nn::Mlp::Cache pc;
      const nn::Matrix logits = policy_.forward(x, &pc);
      const SurrogateResult sur = ppo_surrogate(logits, actions, old_lp, mb_adv, config_.clip, config_.entropy_coef);
      policy_opt_.step(policy_.params(), policy_.backward(pc, sur.d_logits));

      nn::Mlp::Cache vc;
      const nn::Matrix v = value_.forward(x, &vc);
      for (std::size_t j = 0; j < m; ++j) {
        const auto r = static_cast<Eigen::Index>(j);
        d_value(r, 0) = 2.0 * (v(r, 0) - gae.returns[order[start + j]]) / static_cast<double>(m);
      }
      value_opt_.step(value_.params(), value_.backward(vc, d_value));
    }
  }
  rollout_.clear();
  ++updates_;
}

void PpoAgent::save(const std::filesystem::path& path) const {
  Checkpoint ck;
  ck.kind = "ppo";
  ck.meta["state_dim"] = std::to_string(state_dim_);
  ck.meta["action_count"] = std::to_string(action_count_);
  ck.meta["hidden"] = std::to_string(config_.hidden);
  ck.meta["epochs"] = std::to_string(config_.epochs);
  ck.meta["horizon"] = std::to_string(config_.horizon);
  ck.meta["minibatch"] = std::to_string(config_.minibatch);
  ck.meta["projection_dim"] = std::to_string(config_.projection_dim);
  ck.meta["projection_keep"] = std::to_string(config_.projection_keep);
  ck.set_double("gamma", config_.gamma);
  ck.set_double("lambda", config_.lambda);
  ck.set_double("clip", config_.clip);
  ck.set_double("learning_rate", config_.learning_rate);
  ck.set_double("entropy_coef", config_.entropy_coef);
  ck.meta["seed"] = std::to_string(seed_);
  ck.meta["updates"] = std::to_string(updates_);
  ck.meta["policy_adam_steps"] = std::to_string(policy_opt_.steps());
  ck.meta["value_adam_steps"] = std::to_string(value_opt_.steps());
  ck.meta["rng_state"] = rng_string(rng_);
  ck.arrays["policy"] = to_std(policy_.params());
  ck.arrays["value"] = to_std(value_.params());
  ck.arrays["policy_adam_m"] = to_std(policy_opt_.first_moment());
  ck.arrays["policy_adam_v"] = to_std(policy_opt_.second_moment());
  ck.arrays["value_adam_m"] = to_std(value_opt_.first_moment());
  ck.arrays["value_adam_v"] = to_std(value_opt_.second_moment());
  if (config_.projection_dim > 0) save_projection(ck, projection_);
  ck.save(path);
}

std::unique_ptr<PpoAgent> PpoAgent::load(const std::filesystem::path& path) {
  const Checkpoint ck = Checkpoint::load(path);
  if (ck.kind != "ppo") throw ParseError("checkpoint is not a ppo policy: " + ck.kind);
  PpoConfig cfg;
  cfg.hidden = ck.meta_u64("hidden");
  cfg.epochs = ck.meta_u64("epochs");
  cfg.horizon = ck.meta_u64("horizon");
  cfg.minibatch = ck.meta_u64("minibatch");
  cfg.projection_dim = ck.meta_u64("projection_dim");
  cfg.projection_keep = ck.meta_u64("projection_keep");
  cfg.gamma = ck.meta_double("gamma");
  cfg.lambda = ck.meta_double("lambda");
  cfg.clip = ck.meta_double("clip");
  cfg.learning_rate = ck.meta_double("learning_rate");
  cfg.entropy_coef = ck.meta_double("entropy_coef");
  auto agent = std::make_unique<PpoAgent>(ck.meta_u64("state_dim"), ck.meta_u64("action_count"), cfg,
                                          ck.meta_u64("seed"));
  agent->updates_ = ck.meta_u64("updates");
  agent->policy_opt_.set_steps(ck.meta_u64("policy_adam_steps"));
  agent->value_opt_.set_steps(ck.meta_u64("value_adam_steps"));
  rng_restore(agent->rng_, ck.meta_at("rng_state"));
  fill(agent->policy_.params(), ck.array_at("policy"), "policy");
  fill(agent->value_.params(), ck.array_at("value"), "value");
  fill(agent->policy_opt_.first_moment(), ck.array_at("policy_adam_m"), "policy_adam_m");
  fill(agent->policy_opt_.second_moment(), ck.array_at("policy_adam_v"), "policy_adam_v");
  fill(agent->value_opt_.first_moment(), ck.array_at("value_adam_m"), "value_adam_m");
  fill(agent->value_opt_.second_moment(), ck.array_at("value_adam_v"), "value_adam_v");
  if (cfg.projection_dim > 0) load_projection(ck, agent->projection_);
  return agent;
}

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, std::size_t state_dim, std::size_t action_count,
                                  std::uint64_t seed) {
  if (spec.algorithm == "dqn") return std::make_unique<DqnAgent>(state_dim, action_count, spec.dqn, seed);
  if (spec.algorithm == "ppo") return std::make_unique<PpoAgent>(state_dim, action_count, spec.ppo, seed);
  throw ConfigError("unknown agent algorithm '" + spec.algorithm + "' (expected dqn or ppo)");
}

std::unique_ptr<Agent> load_agent(const std::filesystem::path& path) {
  const Checkpoint ck = Checkpoint::load(path);
  if (ck.kind == "dqn") return DqnAgent::load(path);
  if (ck.kind == "ppo") return PpoAgent::load(path);
  throw ParseError("checkpoint is not a policy: " + ck.kind);
}

void EpisodeLog::add(double reward, std::size_t steps, double epsilon) {
  EpisodeRecord rec;
  rec.episode = records_.size();
  rec.reward = reward;
  rec.steps = steps;
  rec.epsilon = epsilon;
  records_.push_back(rec);
  const std::size_t w = std::max<std::size_t>(1, window_);
  const std::size_t begin = records_.size() > w ? records_.size() - w : 0;
  const double n = static_cast<double>(records_.size() - begin);
  double mean = 0.0;
  for (std::size_t i = begin; i < records_.size(); ++i) mean += records_[i].reward;
  mean /= n;
  double var = 0.0;
  for (std::size_t i = begin; i < records_.size(); ++i) {
    var += (records_[i].reward - mean) * (records_[i].reward - mean);
  }
  records_.back().rolling_mean = mean;
  records_.back().rolling_std = std::sqrt(var / n);
}

double EpisodeLog::mean_reward(std::size_t begin, std::size_t end) const {
  end = std::min(end, records_.size());
  if (begin >= end) return 0.0;
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += records_[i].reward;
  return s / static_cast<double>(end - begin);
}

EpisodeLog train_loop(Environment& env, Agent& agent, std::size_t episodes, Rng& rng, std::size_t max_steps) {
  if (episodes == 0) throw ConfigError("train_loop needs at least one episode");
  EpisodeLog log;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    std::vector<double> s = env.reset(rng);
    double total = 0.0;
    std::size_t steps = 0;
    for (;;) {
      const std::size_t a = agent.act(s);
      StepResult res = env.step(a);
      total += res.reward;
      ++steps;
      agent.observe({s, a, res.reward, res.state, res.done});
      if (res.done || steps >= max_steps) break;
      s = std::move(res.state);
    }
    log.add(total, steps, agent.epsilon());
  }
  return log;
}

}  // namespace driftarena
