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
#include <map>
#include <optional>
#include <set>
#include <string>

#include "curator/assembler.hpp"
#include "curator/fewshot.hpp"
#include "curator/sampler.hpp"

namespace curator {

enum class Stage { kFilter, kScore, kSample, kAssemble };

// A generic instruction source feeding the mixture (LIMA, Open-Platypus,
// the HELM training sets, MathInstruct).
struct SourceSpec {
  std::string path;
  Source source = Source::kOther;
  InstructionSchema schema;
};

struct RunConfig {
  std::uint64_t master_seed = 0;
  std::string run_dir;
  std::string tasks_dir;  // directory of NI task JSON files

  EndpointConfig endpoint;
  // Test hook: when set, used instead of the HTTP endpoint.
  CompletionFn completion_override;

  std::string filter_policy_path;  // optional; default policy when empty
  std::string category_map_path;
  std::string gen_scheme_path;     // optional; defaults when empty
  std::string em_scheme_path;

  std::string mixture_preset = "200K";
  // source key (see mixture_source_keys) -> spec; NI pools come from the
  // sample stage and need no entry here.
  std::map<std::string, SourceSpec> sources;

  int fewshot_k = 3;
  std::size_t max_instances_per_task = 100;
  RougeVariant rouge_variant = RougeVariant::kRougeL;
  std::size_t em_pool_target = 50000;
  std::size_t gen_pool_target = 50000;
  std::size_t validation_n = 2000;

  int verbosity = 1;
};

struct StageOutcome {
  bool skipped = false;  // inputs and outputs unchanged since last run
  std::vector<std::string> artifacts;
};

struct PipelineResult {
  std::map<std::string, StageOutcome> stages;  // stage name -> outcome
};

const char* to_string(Stage stage);

// Runs the requested stages in order. Each stage writes its artifacts plus
// a stamp of input/output digests into run_dir; a rerun whose digests all
// match is a no-op for that stage. A missing upstream artifact raises an
// error naming the file and the stage that produces it.
PipelineResult run_pipeline(const RunConfig& cfg, const std::set<Stage>& stages);

}  // namespace curator
