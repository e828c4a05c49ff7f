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

#include <filesystem>
#include <span>

#include "driftarena/agents.hpp"
#include "driftarena/arena.hpp"
#include "driftarena/csv.hpp"

namespace driftarena {

csv::Table episode_table(const EpisodeLog& log);
csv::Table rounds_table(const RunReport& report);
csv::Table blue_actions_table(const RunReport& report);
csv::Table red_steps_table(const RunReport& report);
csv::Table accuracy_table(const RunReport& report);
csv::Table action_frequency_table(const RunReport& report);
csv::Table action_rewards_table(const RunReport& report);
csv::Table recovery_table(const RunReport& report);
csv::Table summary_table(const RunReport& report);
csv::Table ablation_table(std::span<const AblationCell> cells);

// Writes config.txt and every CSV for the run into `dir` (created if
// missing), then renders the charts.
void report_emit(const RunReport& report, const std::filesystem::path& dir);
void ablation_emit(std::span<const AblationCell> cells, const std::filesystem::path& dir);

// Re-renders SVG charts from whichever CSVs exist in `dir`. Returns the
// number of charts written.
std::size_t render_charts(const std::filesystem::path& dir);

}  // namespace driftarena
