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

#include "curator/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace curator {

using ordered_json = nlohmann::ordered_json;

std::size_t ScoreMatrix::submission_index(const std::string& id) const {
  for (std::size_t i = 0; i < submissions.size(); ++i) {
    if (submissions[i] == id) return i;
  }
  throw std::runtime_error("unknown submission: " + id);
}

std::size_t ScoreMatrix::scenario_index(const std::string& scenario_id,
                                        const std::string& metric_id) const {
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (scenarios[i].scenario_id == scenario_id &&
        scenarios[i].metric_id == metric_id) {
      return i;
    }
  }
  throw std::runtime_error("unknown scenario: " + scenario_id + "/" + metric_id);
}

ScoreMatrix load_score_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open score table: " + path);

  ScoreMatrix m;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {  // submission,scenario,metric,direction,value
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string submission, scenario, metric, direction, value;
    std::getline(ss, submission, ',');
    std::getline(ss, scenario, ',');
    std::getline(ss, metric, ',');
    std::getline(ss, direction, ',');
    std::getline(ss, value, ',');

    if (std::find(m.submissions.begin(), m.submissions.end(), submission) ==
        m.submissions.end()) {
      m.submissions.push_back(submission);
    }
    Direction dir;
    if (direction == "higher_better") {
      dir = Direction::kHigherBetter;
    } else if (direction == "lower_better") {
      dir = Direction::kLowerBetter;
    } else {
      throw std::runtime_error(path + ": bad direction '" + direction + "'");
    }
    std::size_t col = m.scenarios.size();
    for (std::size_t i = 0; i < m.scenarios.size(); ++i) {
      if (m.scenarios[i].scenario_id == scenario && m.scenarios[i].metric_id == metric) {
        col = i;
        break;
      }
    }
    if (col == m.scenarios.size()) {
      m.scenarios.push_back({scenario, metric, dir});
    } else if (m.scenarios[col].direction != dir) {
      throw std::runtime_error(path + ": conflicting directions for " + scenario);
    }
    // Cells default missing; fill below.
    const std::size_t row = m.submission_index(submission);
    if (m.values.size() < m.submissions.size()) m.values.resize(m.submissions.size());
    for (auto& r : m.values) r.resize(m.scenarios.size());
    if (!value.empty() && value != "-") {
      m.values[row][col] = std::stod(value);
    }
  }
  for (auto& r : m.values) r.resize(m.scenarios.size());
  return m;
}

std::vector<std::vector<std::optional<double>>> mean_win_rates(const ScoreMatrix& m) {
  const std::size_t n_sub = m.submissions.size();
  const std::size_t n_sc = m.scenarios.size();
  std::vector<std::vector<std::optional<double>>> mwrs(
      n_sub, std::vector<std::optional<double>>(n_sc));

  for (std::size_t c = 0; c < n_sc; ++c) {
    const bool higher = m.scenarios[c].direction == Direction::kHigherBetter;
    for (std::size_t s = 0; s < n_sub; ++s) {
      if (!m.values[s][c]) continue;
      const double mine = *m.values[s][c];
      double credit = 0.0;
      std::size_t opponents = 0;
      for (std::size_t t = 0; t < n_sub; ++t) {
        if (t == s || !m.values[t][c]) continue;
        const double theirs = *m.values[t][c];
        ++opponents;
        if (mine == theirs) {
          credit += 0.5;
        } else if ((mine > theirs) == higher) {
          credit += 1.0;
        }
      }
      if (opponents > 0) {
        mwrs[s][c] = credit / static_cast<double>(opponents);
      }
      // A scenario with a single value leaves the MWR missing.
    }
  }
  return mwrs;
}

double stage_score(const std::vector<double>& mwrs, double floor_epsilon) {
  if (mwrs.empty()) {
    throw std::invalid_argument("stage_score: empty MWR list");
  }
  double log_sum = 0.0;
  for (double v : mwrs) {
    if (v < 0.0) throw std::invalid_argument("stage_score: negative MWR");
    log_sum += std::log(std::max(v, floor_epsilon));
  }
  return std::exp(log_sum / static_cast<double>(mwrs.size()));
}

std::vector<RankedSubmission> apply_threshold(
    const std::vector<RankedSubmission>& scores, double threshold) {
  std::vector<RankedSubmission> surviving;
  for (const auto& s : scores) {
    if (s.score >= threshold) surviving.push_back(s);
  }
  std::stable_sort(surviving.begin(), surviving.end(),
                   [](const RankedSubmission& a, const RankedSubmission& b) {
                     return a.score > b.score;
                   });
  return surviving;
}

double final_score(double open_score, double closed_score) {
  return open_score / 3.0 + 2.0 * closed_score / 3.0;
}

double round2(double x) {
  return std::floor(x * 100.0 + 0.5) / 100.0;
}

StageResult evaluate_stage(const ScoreMatrix& m, double floor_epsilon) {
  if (m.submissions.size() < 2) {
    throw std::runtime_error("evaluate_stage: need at least 2 submissions");
  }
  const auto mwrs = mean_win_rates(m);
  StageResult result;
  result.mwrs_by_submission.resize(m.submissions.size());
  std::vector<RankedSubmission> scores;
  for (std::size_t s = 0; s < m.submissions.size(); ++s) {
    std::vector<double> row;
    for (std::size_t c = 0; c < m.scenarios.size(); ++c) {
      if (mwrs[s][c]) {
        result.mwrs_by_submission[s][m.scenarios[c].scenario_id + "/" +
                                     m.scenarios[c].metric_id] = *mwrs[s][c];
        row.push_back(*mwrs[s][c]);
      }
    }
    scores.push_back({m.submissions[s],
                      row.empty() ? 0.0 : stage_score(row, floor_epsilon)});
  }
  result.ranking = apply_threshold(scores, 0.0);
  return result;
}

std::string stage_report_json(const StageResult& open_stage,
                              const StageResult& closed_stage) {
  auto stage_to_json = [](const StageResult& stage) {
    ordered_json out;
    ordered_json ranking = ordered_json::array();
    for (const auto& r : stage.ranking) {
      ranking.push_back({{"submission", r.id},
                         {"score", r.score},
                         {"score_2dp", round2(r.score)}});
    }
    out["ranking"] = std::move(ranking);
    return out;
  };

  ordered_json doc;
  doc["open"] = stage_to_json(open_stage);
  doc["closed"] = stage_to_json(closed_stage);

  // Final scores for submissions present in both stages.
  ordered_json finals = ordered_json::array();
  for (const auto& open_entry : open_stage.ranking) {
    for (const auto& closed_entry : closed_stage.ranking) {
      if (open_entry.id == closed_entry.id) {
        const double fs = final_score(open_entry.score, closed_entry.score);
        finals.push_back({{"submission", open_entry.id},
                          {"final_score", fs},
                          {"final_score_2dp", round2(fs)}});
      }
    }
  }
  doc["final"] = std::move(finals);
  return doc.dump(2) + "\n";
}

}  // namespace curator
