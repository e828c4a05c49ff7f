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

#include "driftarena/report.hpp"

#include <fstream>
#include <map>
#include <string>

#include "driftarena/svg.hpp"

namespace driftarena {

namespace {

using csv::format;

std::string flag(bool b) { return b ? "1" : "0"; }

std::string u64(std::uint64_t v) { return std::to_string(v); }

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw ConfigError("cannot create report directory " + dir.string());
}

std::vector<double> numbers(const csv::Table& t, std::string_view col) {
  std::vector<double> v;
  for (std::size_t i = 0; i < t.rows.size(); ++i) v.push_back(t.number(i, col));
  return v;
}

bool load(const std::filesystem::path& p, csv::Table& t) {
  if (!std::filesystem::exists(p)) return false;
  t = csv::read(p);
  return true;
}

}  // namespace

csv::Table episode_table(const EpisodeLog& log) {
  csv::Table t{{"episode", "reward", "steps", "epsilon", "rolling_mean", "rolling_std"}, {}};
  for (const auto& r : log.records()) {
    t.rows.push_back({format(r.episode), format(r.reward), format(r.steps), format(r.epsilon),
                      format(r.rolling_mean), format(r.rolling_std)});
  }
  return t;
}

csv::Table rounds_table(const RunReport& report) {
  csv::Table t{{"round", "phase", "model_version", "accuracy_before", "accuracy_after", "actions", "samples_used",
                "labels_queried", "reward", "batch_size", "attempted", "evaded"},
               {}};
  for (const auto& r : report.rounds) {
    t.rows.push_back({format(r.round), "red", u64(r.red_model_version), format(r.acc_clean), format(r.acc_post_red),
                      format(r.red_steps), "0", "0", format(r.red_reward), format(r.batch_size),
                      format(r.red_attempted), format(r.red_evaded)});
    t.rows.push_back({format(r.round), "blue", u64(r.blue_model_version), format(r.acc_post_red),
                      format(r.acc_after_blue), format(r.blue_actions), format(r.samples_used),
                      format(r.labels_queried), format(r.blue_reward), format(r.blue_batch_size), "0", "0"});
  }
  return t;
}

csv::Table blue_actions_table(const RunReport& report) {
  csv::Table t{{"round", "step", "action", "action_name", "acc_prev", "acc", "r", "reward", "samples_used",
                "samples_selected", "labels_queried", "replay_used", "model_version", "done", "epsilon"},
               {}};
  for (const auto& a : report.blue_actions) {
    t.rows.push_back({format(a.round), format(a.step), format(a.action),
                      std::string(adaptation_action_name(static_cast<AdaptationAction>(a.action))),
                      format(a.acc_prev), format(a.acc), format(a.r), format(a.reward), format(a.samples_used),
                      format(a.samples_selected), format(a.labels_queried), format(a.replay_used), u64(a.model_version), flag(a.done),
                      format(a.epsilon)});
  }
  return t;
}

csv::Table red_steps_table(const RunReport& report) {
  csv::Table t{{"round", "episode", "step", "action", "action_name", "p_benign_before", "p_benign_after",
                "effective", "evaded", "reward", "model_version"},
               {}};
  for (const auto& s : report.red_steps) {
    t.rows.push_back({format(s.round), format(s.episode), format(s.step), format(s.action),
                      std::string(perturb_action_name(static_cast<PerturbAction>(s.action))),
                      format(s.p_benign_before), format(s.p_benign_after), flag(s.effective), flag(s.evaded),
                      format(s.reward), u64(s.model_version)});
  }
  return t;
}

csv::Table accuracy_table(const RunReport& report) {
  csv::Table t{{"round", "acc_clean", "acc_post_red", "drop", "acc_after_blue", "recovery", "acc_within_3",
                "recovery_within_3", "blue_actions", "kl", "wasserstein"},
               {}};
  for (const auto& r : report.rounds) {
    t.rows.push_back({format(r.round), format(r.acc_clean), format(r.acc_post_red), format(r.drop()),
                      format(r.acc_after_blue), format(r.recovery()), format(r.acc_within_3),
                      format(r.recovery_within_3()), format(r.blue_actions), format(r.kl), format(r.w)});
  }
  return t;
}

csv::Table action_frequency_table(const RunReport& report) {
  csv::Table t{{"third", "action", "action_name", "count"}, {}};
  const auto f = report.action_frequency_by_thirds();
  for (std::size_t third = 0; third < 3; ++third) {
    for (std::size_t a = 0; a < kAdaptationActionCount; ++a) {
      t.rows.push_back({format(third + 1), format(a),
                        std::string(adaptation_action_name(static_cast<AdaptationAction>(a))),
                        format(f[third][a])});
    }
  }
  return t;
}

csv::Table action_rewards_table(const RunReport& report) {
  csv::Table t{{"action", "action_name", "count", "mean_reward"}, {}};
  const auto counts = report.action_counts();
  const auto means = report.action_mean_rewards();
  for (std::size_t a = 0; a < kAdaptationActionCount; ++a) {
    t.rows.push_back({format(a), std::string(adaptation_action_name(static_cast<AdaptationAction>(a))),
                      format(counts[a]), format(means[a])});
  }
  return t;
}

csv::Table recovery_table(const RunReport& report) {
  csv::Table t{{"batch", "acc_clean", "acc_post_red", "drop", "red_evaded", "blue_actions", "actions", "acc_after",
                "recovery_within_3"},
               {}};
  for (const auto& r : report.recovery) {
    std::string actions, accs;
    for (std::size_t i = 0; i < r.actions.size(); ++i) {
      if (i > 0) {
        actions += ';';
        accs += ';';
      }
      actions += adaptation_action_name(static_cast<AdaptationAction>(r.actions[i]));
      accs += format(r.acc_after[i]);
    }
    t.rows.push_back({format(r.batch), format(r.acc_clean), format(r.acc_post_red), format(r.drop()),
                      format(r.red_evaded), format(r.actions.size()), actions, accs,
                      format(r.recovery_within(3))});
  }
  return t;
}

csv::Table summary_table(const RunReport& report) {
  csv::Table t{{"key", "value"}, {}};
  auto add = [&t](const std::string& k, const std::string& v) { t.rows.push_back({k, v}); };
  add("seed", u64(report.seed));
  add("blue_algorithm", report.blue_algorithm);
  add("mask", std::string(state_mask_name(report.mask)));
  add("complete", flag(report.complete));
  add("error", report.error);
  add("rounds", format(report.rounds.size()));
  add("initial_accuracy", format(report.initial_accuracy));
  add("final_accuracy", format(report.final_accuracy()));
  add("red_eval_packets", format(report.red_initial.packets));
  add("red_eval_acc_clean", format(report.red_initial.acc_clean));
  add("red_eval_acc_perturbed", format(report.red_initial.acc_perturbed));
  add("red_eval_success_rate", format(report.red_initial.success_rate));
  add("red_eval_mean_steps", format(report.red_initial.mean_steps));
  add("blue_actions", format(report.blue_actions.size()));
  const auto rs = report.recovery_summary();
  add("recovery_batches", format(rs.batches));
  add("recovery_mean_drop", format(rs.mean_drop));
  add("recovery_post_drift", format(rs.post_drift));
  add("recovery_recovered", format(rs.recovered));
  add("recovery_fraction", format(rs.recovered_fraction));
  add("recovery_mean_gain", format(rs.mean_recovery));
  return t;
}

csv::Table ablation_table(std::span<const AblationCell> cells) {
  csv::Table t{{"algorithm", "seed", "full", "without_model", "without_data", "recovery_full",
                "recovery_without_model", "recovery_without_data"},
               {}};
  // (algorithm, seed) -> [mask] values, in first-seen order.
  std::vector<std::pair<std::string, std::uint64_t>> order;
  std::map<std::pair<std::string, std::uint64_t>, std::array<const AblationCell*, 3>> grid;
  for (const auto& c : cells) {
    const auto key = std::make_pair(c.algorithm, c.seed);
    if (!grid.count(key)) {
      order.push_back(key);
      grid[key] = {nullptr, nullptr, nullptr};
    }
    grid[key][static_cast<std::size_t>(c.mask)] = &c;
  }
  auto val = [](const AblationCell* c, bool recovery) {
    if (!c) return std::string();
    return format(recovery ? c->mean_recovery : c->final_accuracy);
  };
  for (const auto& key : order) {
    const auto& g = grid[key];
    t.rows.push_back({key.first, u64(key.second), val(g[0], false), val(g[1], false), val(g[2], false),
                      val(g[0], true), val(g[1], true), val(g[2], true)});
  }
  return t;
}

void report_emit(const RunReport& report, const std::filesystem::path& dir) {
  ensure_dir(dir);
  {
    std::ofstream out(dir / "config.txt", std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (dir / "config.txt").string());
    out << report.config_text;
  }
  csv::write(dir / "summary.csv", summary_table(report));
  csv::write(dir / "rounds.csv", rounds_table(report));
  csv::write(dir / "accuracy.csv", accuracy_table(report));
  csv::write(dir / "blue_actions.csv", blue_actions_table(report));
  csv::write(dir / "red_steps.csv", red_steps_table(report));
  csv::write(dir / "red_episodes.csv", episode_table(report.red_episodes));
  csv::write(dir / "blue_episodes.csv", episode_table(report.blue_episodes));
  csv::write(dir / "blue_pretrain_episodes.csv", episode_table(report.blue_pretrain));
  csv::write(dir / "action_frequency.csv", action_frequency_table(report));
  csv::write(dir / "action_rewards.csv", action_rewards_table(report));
  csv::write(dir / "recovery.csv", recovery_table(report));
  render_charts(dir);
}

void ablation_emit(std::span<const AblationCell> cells, const std::filesystem::path& dir) {
  ensure_dir(dir);
  csv::write(dir / "ablation.csv", ablation_table(cells));
  render_charts(dir);
}

std::size_t render_charts(const std::filesystem::path& dir) {
  std::size_t written = 0;
  csv::Table t;
  if (load(dir / "accuracy.csv", t) && !t.rows.empty()) {
    const auto x = numbers(t, "round");
    svg::write(dir / "accuracy.svg",
               svg::line_chart("Test accuracy per round", "round", "accuracy",
                               {{"clean", x, numbers(t, "acc_clean")},
                                {"after red", x, numbers(t, "acc_post_red")},
                                {"after blue", x, numbers(t, "acc_after_blue")}}));
    ++written;
  }
  for (const char* name : {"red_episodes", "blue_episodes"}) {
    if (load(dir / (std::string(name) + ".csv"), t) && !t.rows.empty()) {
      const auto x = numbers(t, "episode");
      const auto mean = numbers(t, "rolling_mean");
      const auto sd = numbers(t, "rolling_std");
      std::vector<double> lo(mean.size()), hi(mean.size());
      for (std::size_t i = 0; i < mean.size(); ++i) {
        lo[i] = mean[i] - sd[i];
        hi[i] = mean[i] + sd[i];
      }
      const std::string title = std::string(name) == "red_episodes" ? "Red episodic reward" : "Blue episodic reward";
      svg::write(dir / (std::string(name) + ".svg"),
                 svg::line_chart(title, "episode", "reward",
                                 {{"rolling mean", x, mean}, {"mean - std", x, lo}, {"mean + std", x, hi}}));
      ++written;
    }
  }
  if (load(dir / "action_frequency.csv", t) && !t.rows.empty()) {
    std::map<std::size_t, std::vector<double>> by_third;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto third = static_cast<std::size_t>(t.number(i, "third"));
      by_third[third].push_back(t.number(i, "count"));
      if (third == 1) names.push_back(t.at(i, "action_name"));
    }
    std::vector<svg::BarGroup> groups;
    for (const auto& [third, v] : by_third) groups.push_back({"third " + std::to_string(third), v});
    svg::write(dir / "action_frequency.svg",
               svg::bar_chart("Blue action frequency by training third", "count", names, groups));
    ++written;
  }
  if (load(dir / "action_rewards.csv", t) && !t.rows.empty()) {
    std::vector<svg::BarGroup> groups;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      groups.push_back({t.at(i, "action_name"), {t.number(i, "mean_reward")}});
    }
    svg::write(dir / "action_rewards.svg", svg::bar_chart("Mean reward per blue action", "reward", {"mean"}, groups));
    ++written;
  }
  if (load(dir / "ablation.csv", t) && !t.rows.empty()) {
    std::vector<svg::BarGroup> groups;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      std::vector<double> v;
      for (const char* col : {"full", "without_model", "without_data"}) {
        const std::string& s = t.at(i, col);
        v.push_back(s.empty() ? std::nan("") : t.number(i, col));
      }
      groups.push_back({t.at(i, "algorithm") + " / " + t.at(i, "seed"), v});
    }
    svg::write(dir / "ablation.svg", svg::bar_chart("Final adapted accuracy by state variant", "accuracy",
                                                    {"full", "without model", "without data"}, groups));
    ++written;
  }
  return written;
}

}  // namespace driftarena
