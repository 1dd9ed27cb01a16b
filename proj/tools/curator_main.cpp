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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "curator/pipeline.hpp"
#include "curator/scorer.hpp"
#include "curator/version.hpp"

namespace {

using curator::RunConfig;
using curator::Stage;

// --sources file: {"LIMA": {"path": "...", "source": "LIMA",
//                           "instruction_field": "...", ...}, ...}
void load_sources_config(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sources config: " + path);
  auto doc = nlohmann::json::parse(in);
  for (const auto& [key, entry] : doc.items()) {
    curator::SourceSpec spec;
    spec.path = entry.at("path").get<std::string>();
    spec.source = curator::source_from_string(entry.value("source", "Other"));
    spec.schema.instruction_field = entry.value("instruction_field", "instruction");
    spec.schema.input_field = entry.value("input_field", "input");
    spec.schema.output_field = entry.value("output_field", "output");
    cfg.sources[key] = std::move(spec);
  }
}

void apply_env_overrides(RunConfig& cfg) {
  if (const char* url = std::getenv("CURATOR_ENDPOINT_URL")) {
    cfg.endpoint.base_url = url;
  }
  if (const char* seed = std::getenv("CURATOR_SEED")) {
    cfg.master_seed = std::stoull(seed);
  }
}

int run_stages(const RunConfig& cfg, const std::set<Stage>& stages,
               bool manifest_only) {
  auto result = curator::run_pipeline(cfg, stages);
  if (manifest_only) {
    nlohmann::ordered_json doc;
    for (const auto& [stage, outcome] : result.stages) {
      doc[stage] = {{"skipped", outcome.skipped}, {"artifacts", outcome.artifacts}};
    }
    std::cout << doc.dump(2) << "\n";
  }
  return 0;
}

int run_leaderboard(const std::string& open_path, const std::string& closed_path,
                    double threshold, const std::string& out_path) {
  const auto open_matrix = curator::load_score_matrix_csv(open_path);
  const auto closed_matrix = curator::load_score_matrix_csv(closed_path);
  auto open_stage = curator::evaluate_stage(open_matrix);
  auto closed_stage = curator::evaluate_stage(closed_matrix);
  open_stage.ranking = curator::apply_threshold(open_stage.ranking, threshold);
  const std::string report =
      curator::stage_report_json(open_stage, closed_stage);
  if (out_path.empty()) {
    std::cout << report;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    out << report;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instruction-dataset curation and competition scoring toolkit"};
  app.set_version_flag("--version", curator::kVersion);
  app.require_subcommand(1);

  RunConfig cfg;
  bool manifest_only = false;
  std::string sources_path;
  std::string rouge_name = "rouge-l";

  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--run-dir", cfg.run_dir, "Directory for stage artifacts")
        ->required();
    cmd->add_option("--seed", cfg.master_seed, "Master seed");
    cmd->add_option("--tasks-dir", cfg.tasks_dir, "Directory of NI task JSON files");
    cmd->add_option("--filter-policy", cfg.filter_policy_path, "Filter policy JSON");
    cmd->add_option("--category-map", cfg.category_map_path, "Category map JSON");
    cmd->add_option("--gen-scheme", cfg.gen_scheme_path, "Generation bucket scheme");
    cmd->add_option("--em-scheme", cfg.em_scheme_path, "Exact-match bucket scheme");
    cmd->add_option("--preset", cfg.mixture_preset, "Mixture preset (200K/400K/700K)");
    cmd->add_option("--sources", sources_path, "Sources config JSON");
    cmd->add_option("--endpoint-url", cfg.endpoint.base_url, "Completion endpoint");
    cmd->add_option("--endpoint-model", cfg.endpoint.model, "Model name to request");
    cmd->add_option("--max-tokens", cfg.endpoint.max_tokens, "Completion max tokens");
    cmd->add_option("--max-in-flight", cfg.endpoint.max_in_flight,
                    "Concurrent endpoint requests");
    cmd->add_option("--retries", cfg.endpoint.retries, "Endpoint retry budget");
    cmd->add_option("--timeout", cfg.endpoint.timeout_seconds, "Endpoint timeout (s)");
    cmd->add_option("--k", cfg.fewshot_k, "Few-shot demonstrations per prompt");
    cmd->add_option("--rouge", rouge_name,
                    "Generation metric: rouge-1, rouge-2, rouge-l");
    cmd->add_option("--max-instances", cfg.max_instances_per_task,
                    "Instances scored per task");
    cmd->add_option("--em-target", cfg.em_pool_target, "Exact-match pool size");
    cmd->add_option("--gen-target", cfg.gen_pool_target, "Generation pool size");
    cmd->add_option("--validation-n", cfg.validation_n, "Validation split size");
    cmd->add_option("-v,--verbosity", cfg.verbosity, "0 = quiet");
    cmd->add_flag("--manifest-only", manifest_only,
                  "Print machine-readable stage summary only");
  };

  auto* filter_cmd = app.add_subcommand("filter", "Select tasks per the filter policy");
  auto* score_cmd = app.add_subcommand("score", "Few-shot difficulty scoring");
  auto* sample_cmd = app.add_subcommand("sample", "Difficulty-weighted sampling");
  auto* assemble_cmd = app.add_subcommand("assemble", "Assemble the final mixture");
  auto* all_cmd = app.add_subcommand("all", "Run every stage in order");
  for (auto* cmd : {filter_cmd, score_cmd, sample_cmd, assemble_cmd, all_cmd}) {
    add_run_options(cmd);
  }

  auto* lb_cmd = app.add_subcommand("score-leaderboard",
                                    "Mean-win-rate / geometric-mean scoring");
  std::string open_path, closed_path, lb_out;
  double threshold = 0.0;
  lb_cmd->add_option("--open", open_path, "Open-stage score table (CSV)")->required();
  lb_cmd->add_option("--closed", closed_path, "Closed-stage score table (CSV)")
      ->required();
  lb_cmd->add_option("--threshold", threshold, "Elimination threshold (open stage)");
  lb_cmd->add_option("--out", lb_out, "Write the report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (lb_cmd->parsed()) {
      return run_leaderboard(open_path, closed_path, threshold, lb_out);
    }
    apply_env_overrides(cfg);
    cfg.rouge_variant = curator::rouge_variant_from_string(rouge_name);
    if (!sources_path.empty()) load_sources_config(sources_path, cfg);

    std::set<Stage> stages;
    if (filter_cmd->parsed()) stages = {Stage::kFilter};
    if (score_cmd->parsed()) stages = {Stage::kScore};
    if (sample_cmd->parsed()) stages = {Stage::kSample};
    if (assemble_cmd->parsed()) stages = {Stage::kAssemble};
    if (all_cmd->parsed()) {
      stages = {Stage::kFilter, Stage::kScore, Stage::kSample, Stage::kAssemble};
    }
    return run_stages(cfg, stages, manifest_only);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
