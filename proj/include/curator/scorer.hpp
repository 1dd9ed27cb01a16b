// Copyright 2026 The Curator Authors.
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

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace curator {

enum class Direction { kHigherBetter, kLowerBetter };

struct Scenario {
  std::string scenario_id;
  std::string metric_id;
  Direction direction = Direction::kHigherBetter;
};

// submissions x scenarios grid; cells may be missing.
struct ScoreMatrix {
  std::vector<std::string> submissions;
  std::vector<Scenario> scenarios;
  // values[submission index][scenario index]
  std::vector<std::vector<std::optional<double>>> values;

  std::size_t submission_index(const std::string& id) const;
  std::size_t scenario_index(const std::string& scenario_id,
                             const std::string& metric_id) const;
};

// Loads a delimited table: submission,scenario,metric,direction,value
// (CSV with a header line; direction is higher_better / lower_better).
ScoreMatrix load_score_matrix_csv(const std::string& path);

// MWR(s, c): mean over the other submissions with a value in scenario c of
// 1 for a win, 0.5 for a tie, 0 for a loss, respecting the scenario's
// direction. Scenarios with fewer than two values give missing MWRs, never
// zeros.
std::vector<std::vector<std::optional<double>>> mean_win_rates(const ScoreMatrix& m);

// Geometric mean of per-scenario MWRs. Entries below `floor_epsilon` are
// floored first so a single zero cannot annihilate the score. Throws on an
// empty list.
double stage_score(const std::vector<double>& mwrs, double floor_epsilon = 0.01);

struct RankedSubmission {
  std::string id;
  double score = 0.0;
};

// Keeps submissions with score >= threshold, ordered by score descending
// (ties keep input order).
std::vector<RankedSubmission> apply_threshold(
    const std::vector<RankedSubmission>& scores, double threshold);

// (1/3) * open + (2/3) * closed.
double final_score(double open_score, double closed_score);

// Round half-up to 2 decimals; the reporting layer only.
double round2(double x);

struct StageResult {
  // per submission: scenario -> MWR (missing scenarios omitted)
  std::vector<std::map<std::string, double>> mwrs_by_submission;
  std::vector<RankedSubmission> ranking;  // score descending
};

// Full stage evaluation of a score matrix: MWRs, stage scores, ranking.
StageResult evaluate_stage(const ScoreMatrix& m, double floor_epsilon = 0.01);

// Human/machine-readable stage report (JSON).
std::string stage_report_json(const StageResult& open_stage,
                              const StageResult& closed_stage);

}  // namespace curator
