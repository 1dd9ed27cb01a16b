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

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curator/corpus.hpp"
#include "curator/metrics.hpp"

namespace curator {

struct EndpointConfig {
  std::string base_url;  // e.g. http://localhost:8000
  std::string model;     // optional; forwarded when non-empty
  int max_tokens = 256;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences = {"\n\n"};
  double timeout_seconds = 60.0;
  int max_in_flight = 4;
  int retries = 3;
};

struct TaskScoreReport {
  std::string task_id;
  TaskKind kind = TaskKind::kExactMatch;
  std::vector<std::pair<std::string, double>> per_example;  // (instance_id, score)
  std::size_t n_evaluated = 0;
  double accuracy = 0.0;  // mean of per_example; primary signal for EM tasks
  std::uint64_t prompt_fingerprint = 0;
};

// Thrown when the endpoint stays unreachable or keeps failing past the
// retry budget.
struct EndpointError : std::runtime_error {
  EndpointError(const std::string& what, int attempts_made)
      : std::runtime_error(what), attempts(attempts_made) {}
  int attempts;
};

// Completion callable: prompt -> generated text. The HTTP client below is
// the production implementation; tests plug in deterministic lambdas.
using CompletionFn = std::function<std::string(const std::string& prompt)>;

// Builds the few-shot prompt: definition, k demonstrations, then the target
// input with a trailing "Output:" cue. Demonstrations come from
// positive_examples, falling back to other instances when there are fewer
// than k; selection is deterministic in (task, target, k, seed) and never
// includes the target instance itself.
std::string build_fewshot_prompt(const TaskDefinition& task,
                                 const TaskInstance& target, int k,
                                 std::uint64_t seed);

// Fingerprint of the prompt recipe; stored in each report so runs with
// different templates are never compared by accident.
std::uint64_t prompt_fingerprint(int k, std::uint64_t seed);

// POST {base_url}/v1/completions; returns choices[0].text truncated at the
// first stop sequence and trimmed. Retries transient failures (transport
// errors and 5xx) up to cfg.retries.
std::string complete(const std::string& prompt, const EndpointConfig& cfg);

// Truncates text at the first occurrence of any stop sequence, then trims
// leading/trailing whitespace.
std::string truncate_at_stop(const std::string& text,
                             const std::vector<std::string>& stops);

// Makes a CompletionFn backed by `complete` with the given config.
CompletionFn http_completion_fn(const EndpointConfig& cfg);

// Scores up to max_instances seeded-deterministically-chosen instances of
// one task. Issues up to max_in_flight completions concurrently; results
// are merged by instance id so the report is deterministic regardless of
// completion order. Throws EndpointError if every completion fails.
TaskScoreReport evaluate_task(const TaskDefinition& task, TaskKind kind,
                              const CompletionFn& complete_fn, int k,
                              std::size_t max_instances, std::uint64_t seed,
                              int max_in_flight = 1,
                              RougeVariant variant = RougeVariant::kRougeL);

struct ReportRow {
  std::string task_id;
  TaskKind kind;
  std::size_t n_evaluated;
  double accuracy;
  double score_p25, score_p50, score_p75;
};

std::vector<ReportRow> summarize_reports(const std::vector<TaskScoreReport>& reports);

// Line-delimited report serialization, stable field order.
std::string report_to_jsonl_line(const TaskScoreReport& report);
TaskScoreReport report_from_jsonl_line(const std::string& line);
void save_reports(const std::vector<TaskScoreReport>& reports, const std::string& path);
std::vector<TaskScoreReport> load_reports(const std::string& path);

}  // namespace curator
