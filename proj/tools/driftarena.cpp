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

// Command-line front end: run games and ablations, train agents, render
// reports and emit synthetic captures.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "driftarena/arena.hpp"
#include "driftarena/config.hpp"
#include "driftarena/pcap.hpp"
#include "driftarena/report.hpp"
#include "driftarena/synth.hpp"

namespace da = driftarena;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> batches;
  std::string data;
  std::string mask;
  std::string out = "out";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Flat key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--batches", o.batches, "Number of sequential batches");
  cmd->add_option("--data", o.data, "synthetic or pcap:<path>");
  cmd->add_option("--mask", o.mask, "Blue state ablation mask")->check(CLI::IsMember({"none", "model", "data"}));
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--set", o.overrides, "Extra key=value settings (repeatable)");
}

da::GameConfig resolve(const CommonOptions& o) {
  da::GameConfig c = o.config.empty() ? da::GameConfig{} : da::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.batches) c.n_batches = *o.batches;
  if (!o.data.empty()) c.data.source = o.data;
  if (!o.mask.empty()) c.blue.env.mask = da::state_mask_from_string(o.mask);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw da::ConfigError("--set expects key=value, got '" + kv + "'");
    da::apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  c.validate();
  return c;
}

void print_round_summary(const da::RunReport& r) {
  std::cout << "rounds: " << r.rounds.size() << "  initial accuracy: " << r.initial_accuracy
            << "  final adapted accuracy: " << r.final_accuracy() << '\n';
  const auto means = r.action_mean_rewards();
  const auto counts = r.action_counts();
  for (std::size_t a = 0; a < da::kAdaptationActionCount; ++a) {
    std::cout << "  " << da::adaptation_action_name(static_cast<da::AdaptationAction>(a)) << ": n=" << counts[a]
              << " mean reward=" << means[a] << '\n';
  }
}

int cmd_run(const CommonOptions& o, bool blue_only) {
  const da::GameConfig c = resolve(o);
  da::RunArtifacts art;
  const da::RunReport r = da::run_game(c, &art);
  const std::filesystem::path out = o.out;
  da::report_emit(r, out);
  if (art.classifier) art.classifier->save(out / "classifier.ckpt");
  if (art.blue) art.blue->save(out / "blue_policy.ckpt");
  if (art.red && !blue_only) art.red->save(out / "red_policy.ckpt");
  print_round_summary(r);
  if (!r.complete) {
    std::cerr << "run aborted: " << r.error << '\n';
    return 1;
  }
  std::cout << "report written to " << out.string() << '\n';
  return 0;
}

int cmd_train_red(const CommonOptions& o) {
  const da::GameConfig c = resolve(o);
  da::RunArtifacts art;
  const da::RedTraining t = da::train_red(c, &art);
  const std::filesystem::path out = o.out;
  std::filesystem::create_directories(out);
  da::csv::write(out / "red_episodes.csv", da::episode_table(t.log));
  da::csv::Table s{{"key", "value"}, {}};
  s.rows.push_back({"initial_accuracy", da::csv::format(t.initial_accuracy)});
  s.rows.push_back({"packets", da::csv::format(t.evaluation.packets)});
  s.rows.push_back({"acc_clean", da::csv::format(t.evaluation.acc_clean)});
  s.rows.push_back({"acc_perturbed", da::csv::format(t.evaluation.acc_perturbed)});
  s.rows.push_back({"success_rate", da::csv::format(t.evaluation.success_rate)});
  s.rows.push_back({"mean_steps", da::csv::format(t.evaluation.mean_steps)});
  da::csv::write(out / "red_evaluation.csv", s);
  art.red->save(out / "red_policy.ckpt");
  art.classifier->save(out / "classifier.ckpt");
  da::render_charts(out);
  std::cout << "red success rate " << t.evaluation.success_rate << ", malicious accuracy "
            << t.evaluation.acc_clean << " -> " << t.evaluation.acc_perturbed << '\n';
  return 0;
}

int cmd_ablate(const CommonOptions& o, std::size_t runs) {
  const da::GameConfig c = resolve(o);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < runs; ++i) seeds.push_back(c.seed + i);
  const auto cells = da::run_ablation(c, seeds);
  da::ablation_emit(cells, o.out);
  for (const auto& cell : cells) {
    std::cout << cell.algorithm << " seed " << cell.seed << " mask " << da::state_mask_name(cell.mask)
              << ": final accuracy " << cell.final_accuracy << '\n';
  }
  return 0;
}

int cmd_synth(const std::string& out, std::size_t packets, std::uint64_t seed) {
  const auto pkts = da::synth_generate(da::default_profile(), packets, seed);
  const std::filesystem::path path = out;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  da::write_pcap(path, pkts);
  da::write_label_sidecar(path.string() + ".labels", pkts);
  std::cout << "wrote " << pkts.size() << " packets to " << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial drift game between a packet-perturbing attacker and a drift-adapting defender"};
  app.require_subcommand(1);

  CommonOptions run_opts, ablate_opts, red_opts, blue_opts;
  auto* run = app.add_subcommand("run", "Play the full alternating game");
  add_common(run, run_opts);
  auto* ablate = app.add_subcommand("ablate", "State-representation ablation for DQN and PPO blue agents");
  add_common(ablate, ablate_opts);
  std::size_t runs = 3;
  ablate->add_option("--runs", runs, "Number of consecutive seeds")->check(CLI::PositiveNumber);
  auto* train_red = app.add_subcommand("train-red", "Train the red agent against the initial classifier");
  add_common(train_red, red_opts);
  auto* train_blue = app.add_subcommand("train-blue", "Train the blue agent through a full game");
  add_common(train_blue, blue_opts);

  std::string report_dir = "out";
  auto* report = app.add_subcommand("report", "Re-render SVG charts from the CSVs in a report directory");
  report->add_option("--out", report_dir, "Report directory");

  std::string synth_out = "synthetic.pcap";
  std::size_t synth_packets = 5000;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "Write a synthetic labelled capture");
  synth->add_option("--out", synth_out, "Output pcap path");
  synth->add_option("--packets", synth_packets, "Packet count");
  synth->add_option("--seed", synth_seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts, false);
    if (*train_blue) return cmd_run(blue_opts, true);
    if (*train_red) return cmd_train_red(red_opts);
    if (*ablate) return cmd_ablate(ablate_opts, runs);
    if (*report) {
      const std::size_t n = da::render_charts(report_dir);
      std::cout << "rendered " << n << " charts in " << report_dir << '\n';
      return 0;
    }
    if (*synth) return cmd_synth(synth_out, synth_packets, synth_seed);
  } catch (const da::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
