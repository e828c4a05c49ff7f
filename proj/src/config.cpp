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

#include "driftarena/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace driftarena {

namespace {

struct Binding {
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

using Table = std::map<std::string, Binding>;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("setting " + key + ": '" + s + "' is not a number");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("setting " + key + ": '" + s + "' is not a non-negative integer");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("setting " + key + ": '" + s + "' is not a boolean");
}

void bind_key(Table& t, const std::string& key, double& v) {
  t[key] = {[&v, key](const std::string& s) { v = parse_double(key, s); }, [&v] { return format_double(v); }};
}

void bind_key(Table& t, const std::string& key, std::size_t& v) {
  t[key] = {[&v, key](const std::string& s) { v = parse_uint(key, s); }, [&v] { return std::to_string(v); }};
}

template <typename Small>
void bind_small(Table& t, const std::string& key, Small& v) {
  t[key] = {[&v, key](const std::string& s) {
              const auto x = parse_uint(key, s);
              if (x > std::numeric_limits<Small>::max()) throw ConfigError("setting " + key + " is out of range");
              v = static_cast<Small>(x);
            },
            [&v] { return std::to_string(static_cast<unsigned>(v)); }};
}

void bind_key(Table& t, const std::string& key, bool& v) {
  t[key] = {[&v, key](const std::string& s) { v = parse_bool(key, s); }, [&v] { return std::string(v ? "true" : "false"); }};
}

// Strings with edge whitespace or '#' are written in double quotes.
void bind_key(Table& t, const std::string& key, std::string& v) {
  auto get = [&v] {
    const bool plain = v.empty() || (v.find('#') == std::string::npos && v.front() != ' ' && v.back() != ' ' &&
                                     v.front() != '"');
    return plain ? v : '"' + v + '"';
  };
  auto set = [&v](const std::string& s) {
    v = s.size() >= 2 && s.front() == '"' && s.back() == '"' ? s.substr(1, s.size() - 2) : s;
  };
  t[key] = {set, get};
}

void bind_key(Table& t, const std::string& key, StateMask& v) {
  t[key] = {[&v](const std::string& s) { v = state_mask_from_string(s); },
            [&v] { return std::string(state_mask_name(v)); }};
}

void bind_agent(Table& t, const std::string& prefix, AgentSpec& a) {
  bind_key(t, prefix + ".algo", a.algorithm);
  bind_key(t, prefix + ".dqn.hidden", a.dqn.hidden);
  bind_key(t, prefix + ".dqn.gamma", a.dqn.gamma);
  bind_key(t, prefix + ".dqn.learning_rate", a.dqn.learning_rate);
  bind_key(t, prefix + ".dqn.buffer_capacity", a.dqn.buffer_capacity);
  bind_key(t, prefix + ".dqn.minibatch", a.dqn.minibatch);
  bind_key(t, prefix + ".dqn.target_sync", a.dqn.target_sync);
  bind_key(t, prefix + ".dqn.train_every", a.dqn.train_every);
  bind_key(t, prefix + ".dqn.projection_dim", a.dqn.projection_dim);
  bind_key(t, prefix + ".dqn.projection_keep", a.dqn.projection_keep);
  bind_key(t, prefix + ".dqn.epsilon_start", a.dqn.epsilon.start);
  bind_key(t, prefix + ".dqn.epsilon_end", a.dqn.epsilon.end);
  bind_key(t, prefix + ".dqn.epsilon_decay_steps", a.dqn.epsilon.decay_steps);
  bind_key(t, prefix + ".ppo.hidden", a.ppo.hidden);
  bind_key(t, prefix + ".ppo.gamma", a.ppo.gamma);
  bind_key(t, prefix + ".ppo.lambda", a.ppo.lambda);
  bind_key(t, prefix + ".ppo.clip", a.ppo.clip);
  bind_key(t, prefix + ".ppo.learning_rate", a.ppo.learning_rate);
  bind_key(t, prefix + ".ppo.epochs", a.ppo.epochs);
  bind_key(t, prefix + ".ppo.horizon", a.ppo.horizon);
  bind_key(t, prefix + ".ppo.minibatch", a.ppo.minibatch);
  bind_key(t, prefix + ".ppo.entropy_coef", a.ppo.entropy_coef);
  bind_key(t, prefix + ".ppo.projection_dim", a.ppo.projection_dim);
  bind_key(t, prefix + ".ppo.projection_keep", a.ppo.projection_keep);
}

Table table_for(GameConfig& c) {
  Table t;
  bind_key(t, "seed", c.seed);
  bind_key(t, "batches", c.n_batches);
  bind_key(t, "data.source", c.data.source);
  bind_key(t, "data.packets", c.data.packets);
  bind_key(t, "data.labels", c.data.labels);
  bind_key(t, "data.train_fraction", c.data.train_fraction);
  bind_key(t, "data.test_fraction", c.data.test_fraction);
  bind_key(t, "test.benign", c.test.benign);
  bind_key(t, "test.malicious", c.test.malicious);
  bind_key(t, "classifier.hidden", c.classifier.hidden);
  bind_key(t, "classifier.epochs", c.classifier.epochs);
  bind_key(t, "classifier.batch_size", c.classifier.batch_size);
  bind_key(t, "classifier.learning_rate", c.classifier.learning_rate);
  bind_key(t, "classifier.weight_decay", c.classifier.weight_decay);
  bind_key(t, "classifier.incremental_learning_rate", c.classifier.incremental_learning_rate);
  bind_key(t, "classifier.passes", c.classifier.passes);
  bind_key(t, "seen.reservoir_cap", c.reservoir_cap);
  bind_key(t, "red.enabled", c.red.enabled);
  bind_key(t, "red.pretrain_episodes", c.red.pretrain_episodes);
  bind_key(t, "red.learn_online", c.red.learn_online);
  bind_key(t, "blue.pretrain_episodes", c.blue.pretrain_episodes);
  bind_key(t, "red.max_steps", c.red.env.max_steps);
  bind_key(t, "red.step_penalty", c.red.env.step_penalty);
  bind_key(t, "red.evasion_bonus", c.red.env.evasion_bonus);
  bind_key(t, "red.prob_shaping_weight", c.red.env.prob_shaping_weight);
  bind_small(t, "red.perturb.ttl_step", c.red.env.perturb.ttl_step);
  bind_small(t, "red.perturb.window_step", c.red.env.perturb.window_step);
  bind_small(t, "red.perturb.mss_step", c.red.env.perturb.mss_step);
  bind_small(t, "red.perturb.wscale_step", c.red.env.perturb.wscale_step);
  bind_key(t, "red.perturb.segment_bytes", c.red.env.perturb.segment_bytes);
  bind_small(t, "red.perturb.mss_insert_value", c.red.env.perturb.mss_insert_value);
  bind_small(t, "red.perturb.wscale_insert_value", c.red.env.perturb.wscale_insert_value);
  bind_key(t, "red.perturb.segment_filler", c.red.env.perturb.segment_filler);
  bind_agent(t, "red", c.red.agent);
  bind_key(t, "blue.threshold", c.blue.env.threshold);
  bind_key(t, "blue.max_actions", c.blue.env.max_actions_per_batch);
  bind_key(t, "blue.success_reward", c.blue.env.success_reward);
  bind_key(t, "blue.sample_penalty", c.blue.env.sample_penalty);
  bind_key(t, "blue.gain_weight", c.blue.env.gain_weight);
  bind_key(t, "blue.mask", c.blue.env.mask);
  bind_key(t, "blue.budget.B", c.blue.env.budget.B);
  bind_key(t, "blue.budget.p_low", c.blue.env.budget.p_low);
  bind_key(t, "blue.budget.p_high", c.blue.env.budget.p_high);
  bind_key(t, "blue.budget.tau_low", c.blue.env.budget.tau_low);
  bind_key(t, "blue.budget.tau_high", c.blue.env.budget.tau_high);
  bind_key(t, "blue.budget.conf_threshold", c.blue.env.budget.conf_threshold);
  bind_agent(t, "blue", c.blue.agent);
  bind_key(t, "eval.recovery", c.eval.recovery);
  return t;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

GameConfig::GameConfig() {
  // Game-scale agent settings: a 120-round game gives the blue agent a few
  // hundred decisions, far fewer than the generic schedule assumes.
  red.agent.algorithm = "dqn";
  red.agent.dqn.minibatch = 32;
  red.agent.dqn.train_every = 2;
  red.agent.dqn.target_sync = 100;
  red.agent.dqn.epsilon.decay_steps = 1000;
  red.agent.ppo.horizon = 64;
  red.agent.ppo.minibatch = 32;

  blue.agent.algorithm = "dqn";
  blue.agent.dqn.projection_dim = 64;
  blue.agent.dqn.projection_keep = 5;
  blue.pretrain_episodes = 200;
  blue.agent.dqn.minibatch = 32;
  blue.agent.dqn.target_sync = 50;
  blue.agent.dqn.epsilon.decay_steps = 150;
  blue.agent.ppo.projection_dim = 64;
  blue.agent.ppo.projection_keep = 5;
  blue.agent.ppo.horizon = 16;
  blue.agent.ppo.minibatch = 16;
}

void GameConfig::validate() const {
  if (n_batches < 2) throw ConfigError("batches must be at least 2");
  if (data.source != "synthetic" && data.source.rfind("pcap:", 0) != 0) {
    throw ConfigError("data.source must be 'synthetic' or 'pcap:<path>'");
  }
  if (data.source == "pcap:") throw ConfigError("data.source pcap: needs a path");
  if (!(data.train_fraction > 0.0 && data.test_fraction > 0.0 &&
        data.train_fraction + data.test_fraction < 1.0)) {
    throw ConfigError("data fractions must be positive and leave room for the stream");
  }
  if (test.benign == 0 && test.malicious == 0) throw ConfigError("test set would be empty");
  if (classifier.hidden == 0 || classifier.batch_size == 0) throw ConfigError("classifier sizes must be positive");
  if (reservoir_cap == 0) throw ConfigError("seen.reservoir_cap must be positive");
  red.env.validate();
  blue.env.validate();
  for (const AgentSpec* a : {&red.agent, &blue.agent}) {
    if (a->algorithm != "dqn" && a->algorithm != "ppo") {
      throw ConfigError("agent algorithm must be dqn or ppo, got '" + a->algorithm + "'");
    }
    a->dqn.validate();
    a->ppo.validate();
  }
}

void apply_setting(GameConfig& config, const std::string& key, const std::string& value) {
  Table t = table_for(config);
  const auto it = t.find(key);
  if (it == t.end()) throw ConfigError("unknown setting '" + key + "'");
  it->second.set(value);
}

void apply_config_text(GameConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

GameConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  GameConfig c;
  apply_config_text(c, ss.str());
  return c;
}

std::string dump_config(const GameConfig& config) {
  GameConfig copy = config;
  const Table t = table_for(copy);
  std::string out;
  for (const auto& [k, b] : t) out += k + " = " + b.get() + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  GameConfig c;
  std::vector<std::string> keys;
  for (const auto& [k, b] : table_for(c)) keys.push_back(k);
  return keys;
}

}  // namespace driftarena
