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

#include "curator/fewshot.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "curator/hash.hpp"
#include "curator/rng.hpp"

namespace curator {

using ordered_json = nlohmann::ordered_json;

std::uint64_t prompt_fingerprint(int k, std::uint64_t seed) {
  // Template version is baked in; bump it if the layout below changes.
  std::string recipe = "fewshot-v1|k=" + std::to_string(k) +
                       "|seed=" + std::to_string(seed);
  return fnv1a64(recipe);
}

std::string build_fewshot_prompt(const TaskDefinition& task,
                                 const TaskInstance& target, int k,
                                 std::uint64_t seed) {
  if (k < 0) throw std::invalid_argument("build_fewshot_prompt: k must be >= 0");

  struct Demo {
    const std::string* input;
    const std::string* output;
  };
  std::vector<Demo> pool;
  for (const auto& ex : task.positive_examples) {
    pool.push_back({&ex.input, &ex.output});
  }
  std::vector<Demo> fallback;
  for (const auto& inst : task.instances) {
    if (inst.id == target.id) continue;  // leakage guard
    fallback.push_back({&inst.input, &inst.outputs.front()});
  }
  if (static_cast<std::size_t>(k) > pool.size() + fallback.size()) {
    throw std::runtime_error("build_fewshot_prompt: task " + task.task_id +
                             " has too few demonstrations for k=" + std::to_string(k));
  }

  Rng rng(derive_seed(seed, task.task_id + "|" + target.id));
  std::vector<Demo> demos;
  if (pool.size() >= static_cast<std::size_t>(k)) {
    demos = rng.sample(pool, static_cast<std::size_t>(k));
  } else {
    demos = pool;
    auto extra = rng.sample(fallback, static_cast<std::size_t>(k) - pool.size());
    demos.insert(demos.end(), extra.begin(), extra.end());
  }

  std::string prompt = task.definition;
  prompt += "\n\n";
  for (const auto& demo : demos) {
    prompt += "Input: " + *demo.input + "\nOutput: " + *demo.output + "\n\n";
  }
  prompt += "Input: " + target.input + "\nOutput:";
  return prompt;
}

std::string truncate_at_stop(const std::string& text,
                             const std::vector<std::string>& stops) {
  std::size_t cut = text.size();
  for (const auto& stop : stops) {
    if (stop.empty()) continue;
    auto pos = text.find(stop);
    if (pos != std::string::npos) cut = std::min(cut, pos);
  }
  std::string out = text.substr(0, cut);
  auto begin = out.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = out.find_last_not_of(" \t\r\n");
  return out.substr(begin, end - begin + 1);
}

std::string complete(const std::string& prompt, const EndpointConfig& cfg) {
  httplib::Client client(cfg.base_url);
  client.set_connection_timeout(std::chrono::milliseconds(
      static_cast<int>(cfg.timeout_seconds * 1000)));
  client.set_read_timeout(std::chrono::milliseconds(
      static_cast<int>(cfg.timeout_seconds * 1000)));

  ordered_json body;
  if (!cfg.model.empty()) body["model"] = cfg.model;
  body["prompt"] = prompt;
  body["max_tokens"] = cfg.max_tokens;
  body["temperature"] = cfg.temperature;
  body["stop"] = cfg.stop_sequences;
  const std::string payload = body.dump();

  const int max_attempts = cfg.retries > 0 ? cfg.retries : 1;
  std::string last_error;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    auto res = client.Post("/v1/completions", payload, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {  // transient server error, retry
      last_error = "server error: HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw EndpointError("completion request rejected: HTTP " +
                              std::to_string(res->status),
                          attempt);
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw EndpointError(std::string("protocol error: bad response body: ") +
                              e.what(),
                          attempt);
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty() || !doc["choices"][0].contains("text")) {
      throw EndpointError("protocol error: response missing choices[0].text",
                          attempt);
    }
    return truncate_at_stop(doc["choices"][0]["text"].get<std::string>(),
                            cfg.stop_sequences);
  }
  throw EndpointError("completion failed after " + std::to_string(max_attempts) +
                          " attempts: " + last_error,
                      max_attempts);
}

CompletionFn http_completion_fn(const EndpointConfig& cfg) {
  return [cfg](const std::string& prompt) { return complete(prompt, cfg); };
}

TaskScoreReport evaluate_task(const TaskDefinition& task, TaskKind kind,
                              const CompletionFn& complete_fn, int k,
                              std::size_t max_instances, std::uint64_t seed,
                              int max_in_flight, RougeVariant variant) {
  if (max_instances < 1) {
    throw std::invalid_argument("evaluate_task: max_instances must be >= 1");
  }
  if (max_in_flight < 1) {
    throw std::invalid_argument("evaluate_task: max_in_flight must be >= 1");
  }

  // Deterministic instance subset, then a stable order for aggregation.
  std::vector<std::size_t> indices(task.instances.size());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "eval|" + task.task_id));
  auto chosen = rng.sample(indices, std::min(max_instances, indices.size()));
  std::sort(chosen.begin(), chosen.end());

  struct Slot {
    double score = 0.0;
    bool ok = false;
    std::string error;
  };
  std::vector<Slot> slots(chosen.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t w = next.fetch_add(1);
      if (w >= chosen.size()) return;
      const TaskInstance& inst = task.instances[chosen[w]];
      try {
        const std::string prompt = build_fewshot_prompt(task, inst, k, seed);
        const std::string completion = complete_fn(prompt);
        slots[w].score = score_prediction(kind, completion, inst.outputs, variant);
        slots[w].ok = true;
      } catch (const std::exception& e) {
        slots[w].error = e.what();
      }
    }
  };

  const int n_threads =
      static_cast<int>(std::min<std::size_t>(max_in_flight, chosen.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  TaskScoreReport report;
  report.task_id = task.task_id;
  report.kind = kind;
  report.prompt_fingerprint = prompt_fingerprint(k, seed);
  for (std::size_t w = 0; w < chosen.size(); ++w) {
    if (slots[w].ok) {
      report.per_example.emplace_back(task.instances[chosen[w]].id, slots[w].score);
    }
  }
  if (report.per_example.empty()) {
    throw EndpointError("evaluate_task: all completions failed for " +
                            task.task_id + " (" + slots.front().error + ")",
                        0);
  }
  report.n_evaluated = report.per_example.size();
  double sum = 0.0;
  for (const auto& [id, s] : report.per_example) sum += s;
  report.accuracy = sum / static_cast<double>(report.n_evaluated);
  return report;
}

namespace {

double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<ReportRow> summarize_reports(const std::vector<TaskScoreReport>& reports) {
  std::vector<ReportRow> rows;
  rows.reserve(reports.size());
  for (const auto& r : reports) {
    std::vector<double> scores;
    scores.reserve(r.per_example.size());
    for (const auto& [id, s] : r.per_example) scores.push_back(s);
    std::sort(scores.begin(), scores.end());
    rows.push_back({r.task_id, r.kind, r.n_evaluated, r.accuracy,
                    quantile(scores, 0.25), quantile(scores, 0.5),
                    quantile(scores, 0.75)});
  }
  return rows;
}

std::string report_to_jsonl_line(const TaskScoreReport& report) {
  ordered_json doc;
  doc["task_id"] = report.task_id;
  doc["kind"] = to_string(report.kind);
  ordered_json examples = ordered_json::array();
  for (const auto& [id, score] : report.per_example) {
    examples.push_back(ordered_json::array({id, score}));
  }
  doc["per_example"] = std::move(examples);
  doc["n_evaluated"] = report.n_evaluated;
  doc["accuracy"] = report.accuracy;
  doc["prompt_fingerprint"] = report.prompt_fingerprint;
  return doc.dump();
}

TaskScoreReport report_from_jsonl_line(const std::string& line) {
  auto doc = nlohmann::json::parse(line);
  TaskScoreReport report;
  report.task_id = doc.at("task_id").get<std::string>();
  report.kind = task_kind_from_string(doc.at("kind").get<std::string>());
  for (const auto& entry : doc.at("per_example")) {
    report.per_example.emplace_back(entry.at(0).get<std::string>(),
                                    entry.at(1).get<double>());
  }
  report.n_evaluated = doc.at("n_evaluated").get<std::size_t>();
  report.accuracy = doc.at("accuracy").get<double>();
  report.prompt_fingerprint = doc.at("prompt_fingerprint").get<std::uint64_t>();
  return report;
}

void save_reports(const std::vector<TaskScoreReport>& reports,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write reports: " + path);
  for (const auto& r : reports) out << report_to_jsonl_line(r) << "\n";
}

std::vector<TaskScoreReport> load_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reports: " + path);
  std::vector<TaskScoreReport> reports;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) reports.push_back(report_from_jsonl_line(line));
  }
  return reports;
}

}  // namespace curator
