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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "driftarena/arena.hpp"
#include "driftarena/config.hpp"
#include "driftarena/csv.hpp"
#include "driftarena/report.hpp"

namespace da = driftarena;
namespace fs = std::filesystem;

namespace {

da::GameConfig small_config(std::uint64_t seed = 3) {
  da::GameConfig c;
  c.seed = seed;
  c.n_batches = 8;
  c.data.packets = 1200;
  c.test.benign = 40;
  c.test.malicious = 40;
  c.red.pretrain_episodes = 40;
  c.blue.pretrain_episodes = 5;
  c.eval.recovery = false;
  return c;
}

const da::RunReport& small_game() {
  static const da::RunReport report = da::run_game(small_config());
  return report;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("driftarena_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(da::GameConfig().validate()); }

TEST(Config, TextOverridesAndComments) {
  da::GameConfig c;
  da::apply_config_text(c, "# comment\nseed = 9\nbatches = 12  # trailing\n\nblue.mask = data\nblue.algo = ppo\n");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.n_batches, 12u);
  EXPECT_EQ(c.blue.env.mask, da::StateMask::kData);
  EXPECT_EQ(c.blue.agent.algorithm, "ppo");
}

TEST(Config, DumpRoundTrips) {
  da::GameConfig c;
  da::apply_config_text(c, "seed = 77\nclassifier.incremental_learning_rate = 0.125\nred.enabled = false\n");
  const std::string text = da::dump_config(c);
  da::GameConfig d;
  da::apply_config_text(d, text);
  EXPECT_EQ(da::dump_config(d), text);
  EXPECT_EQ(d.seed, 77u);
  EXPECT_FALSE(d.red.enabled);
  EXPECT_EQ(d.red.env.perturb.segment_filler, c.red.env.perturb.segment_filler);
}

TEST(Config, QuotedStrings) {
  da::GameConfig c;
  da::apply_config_text(c, "red.perturb.segment_filler = \" a#b \"  # note\n");
  EXPECT_EQ(c.red.env.perturb.segment_filler, " a#b ");
}

TEST(Config, Errors) {
  da::GameConfig c;
  EXPECT_THROW(da::apply_setting(c, "no.such.key", "1"), da::ConfigError);
  EXPECT_THROW(da::apply_setting(c, "batches", "many"), da::ConfigError);
  EXPECT_THROW(da::apply_setting(c, "blue.mask", "header"), da::ConfigError);
  c.n_batches = 1;
  EXPECT_THROW(c.validate(), da::ConfigError);
  c = da::GameConfig();
  c.data.source = "csv:x";
  EXPECT_THROW(c.validate(), da::ConfigError);
  c = da::GameConfig();
  c.blue.agent.algorithm = "a2c";
  EXPECT_THROW(c.validate(), da::ConfigError);
}

TEST(Config, EveryKeyIsDumped) {
  const std::string text = da::dump_config(da::GameConfig());
  for (const auto& k : da::config_keys()) EXPECT_NE(text.find(k + " = "), std::string::npos) << k;
}

TEST(Arena, SmallGameCompletes) {
  const auto& r = small_game();
  ASSERT_TRUE(r.complete) << r.error;
  EXPECT_EQ(r.rounds.size(), 8u);
  EXPECT_GE(r.initial_accuracy, 0.9);
}

TEST(Arena, ClassifierVersionMovesOnlyInBluePhase) {
  const auto& r = small_game();
  ASSERT_TRUE(r.complete) << r.error;
  for (std::size_t k = 0; k < r.rounds.size(); ++k) {
    const auto& rec = r.rounds[k];
    EXPECT_LE(rec.red_model_version, rec.blue_model_version);
    if (k > 0) EXPECT_EQ(rec.red_model_version, r.rounds[k - 1].blue_model_version) << "round " << rec.round;
  }
  std::uint64_t prev = r.rounds.front().red_model_version;
  for (const auto& a : r.blue_actions) {
    EXPECT_GE(a.model_version, prev);
    prev = a.model_version;
  }
  for (const auto& s : r.red_steps) {
    if (s.round == 0) continue;
    EXPECT_EQ(s.model_version, r.rounds[s.round - 1].red_model_version);
  }
}

TEST(Arena, SamplesUsedNeverExceedBlueBatch) {
  const auto& r = small_game();
  ASSERT_TRUE(r.complete) << r.error;
  for (const auto& rec : r.rounds) {
    EXPECT_LE(rec.samples_used, rec.blue_batch_size) << "round " << rec.round;
    EXPECT_EQ(rec.blue_batch_size, rec.batch_size + rec.red_evaded);
  }
  for (const auto& a : r.blue_actions) EXPECT_LE(a.samples_used, a.samples_selected);
}

TEST(Arena, RewardsRecomputeFromLoggedInputs) {
  const auto& r = small_game();
  ASSERT_TRUE(r.complete) << r.error;
  const da::GameConfig c = small_config();
  for (const auto& a : r.blue_actions) {
    const auto& rec = r.rounds[a.round - 1];
    EXPECT_DOUBLE_EQ(a.r, static_cast<double>(a.samples_used) / static_cast<double>(rec.blue_batch_size));
    EXPECT_DOUBLE_EQ(a.reward, da::blue_reward(a.acc, a.acc_prev, a.r, c.blue.env));
  }
  for (const auto& s : r.red_steps) {
    EXPECT_DOUBLE_EQ(s.reward, da::red_reward(s.p_benign_before, s.p_benign_after, s.evaded, s.effective, c.red.env));
  }
}

TEST(Arena, EpisodeAndActionCountsAgree) {
  const auto& r = small_game();
  ASSERT_TRUE(r.complete) << r.error;
  EXPECT_EQ(r.blue_episodes.size(), r.rounds.size());
  std::size_t actions = 0;
  for (const auto& rec : r.rounds) actions += rec.blue_actions;
  EXPECT_EQ(actions, r.blue_actions.size());

  const fs::path dir = scratch("counts");
  da::report_emit(r, dir);
  EXPECT_EQ(da::csv::read(dir / "blue_episodes.csv").rows.size(), r.blue_episodes.size());
  EXPECT_EQ(da::csv::read(dir / "red_episodes.csv").rows.size(), r.red_episodes.size());
  const auto freq = da::csv::read(dir / "action_frequency.csv");
  double total = 0.0;
  for (std::size_t i = 0; i < freq.rows.size(); ++i) total += freq.number(i, "count");
  EXPECT_EQ(static_cast<std::size_t>(total), r.blue_actions.size());
  const auto rewards = da::csv::read(dir / "action_rewards.csv");
  double counted = 0.0;
  for (std::size_t i = 0; i < rewards.rows.size(); ++i) counted += rewards.number(i, "count");
  EXPECT_EQ(static_cast<std::size_t>(counted), r.blue_actions.size());
  EXPECT_TRUE(fs::exists(dir / "accuracy.svg"));
  fs::remove_all(dir);
}

TEST(Arena, SameSeedGivesIdenticalReports) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  da::report_emit(small_game(), a);
  da::report_emit(da::run_game(small_config()), b);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
  }
  EXPECT_GE(files, 12u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Arena, DifferentSeedsDiffer) {
  const auto other = da::run_game(small_config(4));
  ASSERT_TRUE(other.complete) << other.error;
  EXPECT_NE(da::csv::to_string(da::rounds_table(other)), da::csv::to_string(da::rounds_table(small_game())));
}

TEST(Arena, EmptyReportWritesHeadersOnly) {
  const fs::path dir = scratch("empty");
  da::report_emit(da::RunReport{}, dir);
  for (const char* name : {"rounds.csv", "accuracy.csv", "blue_actions.csv", "red_steps.csv", "red_episodes.csv",
                           "blue_episodes.csv", "blue_pretrain_episodes.csv", "recovery.csv"}) {
    const auto t = da::csv::read(dir / name);
    EXPECT_FALSE(t.header.empty()) << name;
    EXPECT_TRUE(t.rows.empty()) << name;
  }
  fs::remove_all(dir);
}

TEST(Arena, RedDisabledKeepsAccuracy) {
  da::GameConfig c = small_config();
  c.red.enabled = false;
  c.data.packets = 3000;
  c.test.benign = 100;
  c.test.malicious = 100;
  const auto r = da::run_game(c);
  ASSERT_TRUE(r.complete) << r.error;
  EXPECT_TRUE(r.red_steps.empty());
  for (const auto& rec : r.rounds) {
    EXPECT_EQ(rec.red_evaded, 0u);
    EXPECT_DOUBLE_EQ(rec.acc_post_red, rec.acc_clean);
    EXPECT_NEAR(rec.acc_after_blue, r.initial_accuracy, 0.02) << "round " << rec.round;
  }
}

TEST(Arena, BadDataSourceIsReportedNotThrown) {
  da::GameConfig c = small_config();
  c.data.source = "pcap:/nonexistent/capture.pcap";
  const auto r = da::run_game(c);
  EXPECT_FALSE(r.complete);
  EXPECT_FALSE(r.error.empty());
  EXPECT_TRUE(r.rounds.empty());
}

TEST(Arena, ArtifactsRoundTripThroughCheckpoints) {
  da::RunArtifacts art;
  const auto r = da::run_game(small_config(), &art);
  ASSERT_TRUE(r.complete) << r.error;
  ASSERT_TRUE(art.classifier && art.red && art.blue);
  const fs::path dir = scratch("ckpt");
  fs::create_directories(dir);
  art.classifier->save(dir / "classifier.ckpt");
  art.blue->save(dir / "blue.ckpt");
  const auto model = da::Classifier::load(dir / "classifier.ckpt");
  const auto blue = da::load_agent(dir / "blue.ckpt");
  EXPECT_EQ(model.version(), art.classifier->version());
  EXPECT_EQ(model.version(), r.rounds.back().blue_model_version);
  std::vector<double> x(da::kFeatureDim, 0.25);
  EXPECT_EQ(model.predict_proba(x), art.classifier->predict_proba(x));
  std::vector<double> s(da::kBlueStateDim, 0.1);
  EXPECT_EQ(blue->greedy(s), art.blue->greedy(s));
  fs::remove_all(dir);
}

TEST(Arena, RecoveryEvaluationCoversEveryBatch) {
  da::GameConfig c = small_config();
  c.n_batches = 4;
  c.eval.recovery = true;
  const auto r = da::run_game(c);
  ASSERT_TRUE(r.complete) << r.error;
  ASSERT_EQ(r.recovery.size(), 4u);
  for (const auto& rec : r.recovery) {
    EXPECT_EQ(rec.actions.size(), rec.acc_after.size());
    EXPECT_LE(rec.actions.size(), c.blue.env.max_actions_per_batch);
    EXPECT_GE(rec.recovery_within(3), 0.0);
  }
  const auto s = r.recovery_summary();
  EXPECT_EQ(s.batches, 4u);
  EXPECT_LE(s.recovered, s.post_drift);
}

TEST(Arena, AblationTableIsTwoAlgorithmsByThreeVariants) {
  da::GameConfig c = small_config();
  c.n_batches = 3;
  const auto cells = da::run_ablation(c, {5});
  ASSERT_EQ(cells.size(), 6u);
  const auto t = da::ablation_table(cells);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.at(0, "algorithm"), "dqn");
  EXPECT_EQ(t.at(1, "algorithm"), "ppo");
  for (std::size_t i = 0; i < 2; ++i) {
    for (const char* col : {"full", "without_model", "without_data"}) {
      const double v = t.number(i, col);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}
