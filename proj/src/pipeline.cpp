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

#include "curator/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "curator/hash.hpp"

namespace curator {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::kFilter: return "filter";
    case Stage::kScore: return "score";
    case Stage::kSample: return "sample";
    case Stage::kAssemble: return "assemble";
  }
  return "?";
}

namespace {

struct Stamp {
  std::map<std::string, std::string> inputs;   // name -> digest or literal
  std::map<std::string, std::string> outputs;  // path -> digest
};

std::string stamp_path(const RunConfig& cfg, Stage stage) {
  return (fs::path(cfg.run_dir) / (std::string(to_string(stage)) + ".stamp.json"))
      .string();
}

void write_stamp(const std::string& path, const Stamp& stamp) {
  ordered_json doc;
  doc["inputs"] = stamp.inputs;
  doc["outputs"] = stamp.outputs;
  std::ofstream out(path, std::ios::binary);
  out << doc.dump(2) << "\n";
}

bool stamp_matches(const std::string& path, const Stamp& expected_inputs) {
  std::ifstream in(path);
  if (!in) return false;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (...) {
    return false;
  }
  auto inputs = doc.value("inputs", nlohmann::json::object())
                    .get<std::map<std::string, std::string>>();
  if (inputs != expected_inputs.inputs) return false;
  for (const auto& [out_path, digest] :
       doc.value("outputs", nlohmann::json::object())
           .get<std::map<std::string, std::string>>()) {
    if (!fs::exists(out_path) || sha256_file_hex(out_path) != digest) return false;
  }
  return true;
}

void require_artifact(const std::string& path, const char* producing_stage) {
  if (!fs::exists(path)) {
    throw std::runtime_error("missing upstream artifact " + path +
                             "; run the '" + producing_stage +
                             "' stage to produce it");
  }
}

std::vector<std::string> list_task_files(const std::string& tasks_dir) {
  if (!fs::is_directory(tasks_dir)) {
    throw std::runtime_error("tasks directory not found: " + tasks_dir);
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(tasks_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string run_file(const RunConfig& cfg, const char* name) {
  return (fs::path(cfg.run_dir) / name).string();
}

void atomic_write(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
  }
  fs::rename(tmp, path);
}

FilterPolicy policy_for(const RunConfig& cfg) {
  if (cfg.filter_policy_path.empty()) return FilterPolicy{};
  return load_filter_policy(cfg.filter_policy_path);
}

InstructionRecord record_from_instance(const TaskDefinition& task,
                                       const TaskInstance& inst) {
  InstructionRecord rec;
  rec.instruction = task.definition;
  rec.input = inst.input;
  rec.output = inst.outputs.front();
  rec.source = Source::kNaturalInstructions;
  rec.origin_id = task.task_id + "/" + inst.id;
  rec.content_hash = content_hash(rec.instruction, rec.input, rec.output);
  return rec;
}

std::map<std::string, TaskDefinition> load_selected_tasks(const RunConfig& cfg) {
  require_artifact(run_file(cfg, "selected_tasks.txt"), "filter");
  std::map<std::string, TaskDefinition> tasks;
  const auto ids = load_task_id_list(run_file(cfg, "selected_tasks.txt"));
  const std::set<std::string> wanted(ids.begin(), ids.end());
  for (const auto& file : list_task_files(cfg.tasks_dir)) {
    const std::string id = fs::path(file).stem().string();
    if (wanted.count(id)) tasks.emplace(id, parse_ni_task(file));
  }
  for (const auto& id : ids) {
    if (!tasks.count(id)) {
      throw std::runtime_error("selected task " + id + " not found in " +
                               cfg.tasks_dir);
    }
  }
  return tasks;
}

StageOutcome run_filter(const RunConfig& cfg) {
  Stamp stamp;
  for (const auto& file : list_task_files(cfg.tasks_dir)) {
    stamp.inputs[file] = sha256_file_hex(file);
  }
  if (!cfg.filter_policy_path.empty()) {
    stamp.inputs["policy"] = sha256_file_hex(cfg.filter_policy_path);
  } else {
    stamp.inputs["policy"] = "default";
  }

  StageOutcome outcome;
  outcome.artifacts = {run_file(cfg, "selected_tasks.txt"),
                       run_file(cfg, "rejected_tasks.jsonl")};
  if (stamp_matches(stamp_path(cfg, Stage::kFilter), stamp)) {
    outcome.skipped = true;
    return outcome;
  }

  std::vector<TaskDefinition> tasks;
  for (const auto& file : list_task_files(cfg.tasks_dir)) {
    tasks.push_back(parse_ni_task(file));
  }
  const auto result = apply_filter_policy(tasks, policy_for(cfg));

  std::string selected;
  for (const auto& task : result.selected) selected += task.task_id + "\n";
  atomic_write(outcome.artifacts[0], selected);

  std::string rejected;
  for (const auto& [id, reason] : result.rejected) {
    ordered_json doc;
    doc["task_id"] = id;
    doc["reason"] = reason;
    rejected += doc.dump() + "\n";
  }
  atomic_write(outcome.artifacts[1], rejected);

  for (const auto& path : outcome.artifacts) {
    stamp.outputs[path] = sha256_file_hex(path);
  }
  write_stamp(stamp_path(cfg, Stage::kFilter), stamp);
  return outcome;
}

StageOutcome run_score(const RunConfig& cfg) {
  require_artifact(run_file(cfg, "selected_tasks.txt"), "filter");
  if (cfg.category_map_path.empty()) {
    throw std::runtime_error("score stage requires a category map path");
  }

  Stamp stamp;
  stamp.inputs["selected"] = sha256_file_hex(run_file(cfg, "selected_tasks.txt"));
  stamp.inputs["category_map"] = sha256_file_hex(cfg.category_map_path);
  stamp.inputs["params"] =
      "k=" + std::to_string(cfg.fewshot_k) +
      "|max_instances=" + std::to_string(cfg.max_instances_per_task) +
      "|seed=" + std::to_string(cfg.master_seed) +
      "|variant=" + to_string(cfg.rouge_variant);
  for (const auto& file : list_task_files(cfg.tasks_dir)) {
    stamp.inputs[file] = sha256_file_hex(file);
  }

  StageOutcome outcome;
  outcome.artifacts = {run_file(cfg, "task_reports.jsonl"),
                       run_file(cfg, "score_exclusions.jsonl")};
  if (stamp_matches(stamp_path(cfg, Stage::kScore), stamp)) {
    outcome.skipped = true;
    return outcome;
  }

  const auto tasks = load_selected_tasks(cfg);
  const auto category_map = load_category_map(cfg.category_map_path);
  std::vector<TaskDefinition> selected;
  for (const auto& [id, task] : tasks) selected.push_back(task);
  categorize_tasks(selected, category_map);  // verifies coverage up front

  const CompletionFn complete_fn = cfg.completion_override
                                       ? cfg.completion_override
                                       : http_completion_fn(cfg.endpoint);

  std::vector<TaskScoreReport> reports;
  std::string exclusions;
  for (const auto& [id, task] : tasks) {
    const TaskKind kind = category_map.kinds.at(id);
    try {
      reports.push_back(evaluate_task(task, kind, complete_fn, cfg.fewshot_k,
                                      cfg.max_instances_per_task,
                                      cfg.master_seed, cfg.endpoint.max_in_flight,
                                      cfg.rouge_variant));
    } catch (const EndpointError& e) {
      ordered_json doc;
      doc["task_id"] = id;
      doc["reason"] = e.what();
      exclusions += doc.dump() + "\n";
      if (cfg.verbosity > 0) {
        std::cerr << "score: excluding task " << id << ": " << e.what() << "\n";
      }
    }
  }
  save_reports(reports, outcome.artifacts[0]);
  atomic_write(outcome.artifacts[1], exclusions);

  for (const auto& path : outcome.artifacts) {
    stamp.outputs[path] = sha256_file_hex(path);
  }
  write_stamp(stamp_path(cfg, Stage::kScore), stamp);
  return outcome;
}

StageOutcome run_sample(const RunConfig& cfg) {
  require_artifact(run_file(cfg, "task_reports.jsonl"), "score");

  Stamp stamp;
  stamp.inputs["reports"] = sha256_file_hex(run_file(cfg, "task_reports.jsonl"));
  stamp.inputs["gen_scheme"] = cfg.gen_scheme_path.empty()
                                   ? "default"
                                   : sha256_file_hex(cfg.gen_scheme_path);
  stamp.inputs["em_scheme"] = cfg.em_scheme_path.empty()
                                  ? "default"
                                  : sha256_file_hex(cfg.em_scheme_path);
  stamp.inputs["params"] = "em_target=" + std::to_string(cfg.em_pool_target) +
                           "|gen_target=" + std::to_string(cfg.gen_pool_target) +
                           "|seed=" + std::to_string(cfg.master_seed);
  // Materialization reads the task files, so they are inputs here too.
  for (const auto& file : list_task_files(cfg.tasks_dir)) {
    stamp.inputs[file] = sha256_file_hex(file);
  }

  StageOutcome outcome;
  outcome.artifacts = {run_file(cfg, "ni_em_pool.jsonl"),
                       run_file(cfg, "ni_gen_pool.jsonl"),
                       run_file(cfg, "sample_plan.json")};
  if (stamp_matches(stamp_path(cfg, Stage::kSample), stamp)) {
    outcome.skipped = true;
    return outcome;
  }

  const auto reports = load_reports(run_file(cfg, "task_reports.jsonl"));
  std::vector<TaskScoreReport> em_reports, gen_reports;
  for (const auto& r : reports) {
    (r.kind == TaskKind::kExactMatch ? em_reports : gen_reports).push_back(r);
  }

  const BucketScheme gen_scheme = cfg.gen_scheme_path.empty()
                                      ? default_generation_scheme()
                                      : load_bucket_scheme(cfg.gen_scheme_path);
  const BucketScheme em_scheme = cfg.em_scheme_path.empty()
                                     ? default_em_scheme()
                                     : load_bucket_scheme(cfg.em_scheme_path);

  const auto gen_buckets = bucket_generation_examples(gen_reports, gen_scheme);
  const auto em_buckets = bucket_em_tasks(em_reports, em_scheme);
  const auto gen_sel =
      sample_generation_pool(gen_buckets, gen_scheme, cfg.gen_pool_target,
                             derive_seed(cfg.master_seed, "gen-pool"));
  const auto em_sel =
      sample_em_pool(em_buckets, em_reports, em_scheme, cfg.em_pool_target,
                     derive_seed(cfg.master_seed, "em-pool"));

  const auto tasks = load_selected_tasks(cfg);
  auto materialize = [&](const PoolSelection& sel) {
    std::vector<InstructionRecord> records;
    for (const auto& id : sel.ids) {
      const auto& task = tasks.at(id.task_id);
      auto it = std::find_if(task.instances.begin(), task.instances.end(),
                             [&](const TaskInstance& inst) {
                               return inst.id == id.instance_id;
                             });
      if (it == task.instances.end()) {
        throw std::runtime_error("sample: instance " + id.instance_id +
                                 " not found in task " + id.task_id);
      }
      records.push_back(record_from_instance(task, *it));
    }
    return records;
  };
  write_records_jsonl(materialize(em_sel), outcome.artifacts[0]);
  write_records_jsonl(materialize(gen_sel), outcome.artifacts[1]);

  ordered_json plan;
  plan["em"] = {{"target", cfg.em_pool_target},
                {"aggregate", em_sel.aggregate_before_truncation},
                {"selected", em_sel.ids.size()},
                {"short_of_target", em_sel.short_of_target},
                {"dropped_tasks", em_buckets.dropped_tasks}};
  plan["gen"] = {{"target", cfg.gen_pool_target},
                 {"aggregate", gen_sel.aggregate_before_truncation},
                 {"selected", gen_sel.ids.size()},
                 {"short_of_target", gen_sel.short_of_target},
                 {"dropped_examples", gen_buckets.dropped}};
  atomic_write(outcome.artifacts[2], plan.dump(2) + "\n");

  for (const auto& path : outcome.artifacts) {
    stamp.outputs[path] = sha256_file_hex(path);
  }
  write_stamp(stamp_path(cfg, Stage::kSample), stamp);
  return outcome;
}

StageOutcome run_assemble(const RunConfig& cfg) {
  const MixtureSpec spec = [&] {
    auto s = mixture_preset(cfg.mixture_preset, cfg.master_seed);
    s.seed = derive_seed(cfg.master_seed, "assemble");
    return s;
  }();

  Stamp stamp;
  for (const auto& [key, quota] : spec.quotas) {
    if (quota == 0) continue;
    if (key == "NI_exact_match") {
      require_artifact(run_file(cfg, "ni_em_pool.jsonl"), "sample");
      stamp.inputs[key] = sha256_file_hex(run_file(cfg, "ni_em_pool.jsonl"));
    } else if (key == "NI_generation") {
      require_artifact(run_file(cfg, "ni_gen_pool.jsonl"), "sample");
      stamp.inputs[key] = sha256_file_hex(run_file(cfg, "ni_gen_pool.jsonl"));
    } else {
      auto it = cfg.sources.find(key);
      if (it == cfg.sources.end()) {
        throw std::runtime_error("assemble: no source configured for '" + key + "'");
      }
      stamp.inputs[key] = sha256_file_hex(it->second.path);
    }
  }
  stamp.inputs["params"] = "preset=" + cfg.mixture_preset +
                           "|seed=" + std::to_string(cfg.master_seed) +
                           "|validation_n=" + std::to_string(cfg.validation_n);

  StageOutcome outcome;
  outcome.artifacts = {run_file(cfg, "train.jsonl"),
                       run_file(cfg, "validation.jsonl"),
                       run_file(cfg, "training_config.yml"),
                       run_file(cfg, "manifest.json")};
  if (stamp_matches(stamp_path(cfg, Stage::kAssemble), stamp)) {
    outcome.skipped = true;
    return outcome;
  }

  std::map<std::string, std::vector<InstructionRecord>> sources;
  for (const auto& [key, quota] : spec.quotas) {
    if (quota == 0) continue;
    if (key == "NI_exact_match") {
      sources[key] = read_records_jsonl(run_file(cfg, "ni_em_pool.jsonl"));
    } else if (key == "NI_generation") {
      sources[key] = read_records_jsonl(run_file(cfg, "ni_gen_pool.jsonl"));
    } else {
      const auto& src = cfg.sources.at(key);
      sources[key] = load_instruction_file(src.path, src.source, src.schema).records;
    }
  }

  auto mixture = assemble_mixture(spec, sources);
  auto deduped = dedupe_records(std::move(mixture.records));
  mixture.manifest.dedupe_removed = deduped.removed;
  auto split = split_validation(std::move(deduped.records), cfg.validation_n,
                                spec.seed);

  write_records_jsonl(split.train, outcome.artifacts[0]);
  write_records_jsonl(split.validation, outcome.artifacts[1]);
  // Dataset paths are relative to the config so the run dir is relocatable.
  emit_training_config(spec, outcome.artifacts[2], "train.jsonl",
                       "validation.jsonl");

  for (const auto& rec : split.validation) {
    mixture.manifest.validation_hashes.push_back(rec.content_hash);
  }
  mixture.manifest.master_seed = cfg.master_seed;
  mixture.manifest.parameters["fewshot_k"] = std::to_string(cfg.fewshot_k);
  mixture.manifest.parameters["max_instances_per_task"] =
      std::to_string(cfg.max_instances_per_task);
  mixture.manifest.parameters["rouge_variant"] = to_string(cfg.rouge_variant);
  mixture.manifest.parameters["em_pool_target"] = std::to_string(cfg.em_pool_target);
  mixture.manifest.parameters["gen_pool_target"] =
      std::to_string(cfg.gen_pool_target);
  mixture.manifest.parameters["validation_n"] = std::to_string(cfg.validation_n);

  // Digest every artifact the run has produced so far, this stage's included.
  for (const char* name :
       {"selected_tasks.txt", "rejected_tasks.jsonl", "task_reports.jsonl",
        "score_exclusions.jsonl", "ni_em_pool.jsonl", "ni_gen_pool.jsonl",
        "sample_plan.json", "train.jsonl", "validation.jsonl",
        "training_config.yml"}) {
    const std::string path = run_file(cfg, name);
    if (fs::exists(path)) {
      mixture.manifest.file_digests[name] = sha256_file_hex(path);
    }
  }
  atomic_write(outcome.artifacts[3], mixture.manifest.to_json());

  for (const auto& path : outcome.artifacts) {
    stamp.outputs[path] = sha256_file_hex(path);
  }
  write_stamp(stamp_path(cfg, Stage::kAssemble), stamp);
  return outcome;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg, const std::set<Stage>& stages) {
  if (cfg.run_dir.empty()) throw std::runtime_error("run_dir must be set");
  fs::create_directories(cfg.run_dir);

  PipelineResult result;
  for (Stage stage : {Stage::kFilter, Stage::kScore, Stage::kSample, Stage::kAssemble}) {
    if (!stages.count(stage)) continue;
    StageOutcome outcome;
    switch (stage) {
      case Stage::kFilter: outcome = run_filter(cfg); break;
      case Stage::kScore: outcome = run_score(cfg); break;
      case Stage::kSample: outcome = run_sample(cfg); break;
      case Stage::kAssemble: outcome = run_assemble(cfg); break;
    }
    if (cfg.verbosity > 0) {
      std::cerr << "stage " << to_string(stage)
                << (outcome.skipped ? ": up to date\n" : ": done\n");
    }
    result.stages[to_string(stage)] = std::move(outcome);
  }
  return result;
}

}  // namespace curator
