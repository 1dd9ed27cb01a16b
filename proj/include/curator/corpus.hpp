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
#include <utility>
#include <vector>

namespace curator {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class TaskKind { kExactMatch, kGeneration };

const char* to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& s);

enum class Source {
  kLima,
  kOpenPlatypus,
  kNaturalInstructions,
  kOpenbookQa,
  kQuac,
  kCnnDailyMail,
  kMathInstruct,
  kOther,
};

const char* to_string(Source source);
Source source_from_string(const std::string& s);

struct DemonstrationExample {
  std::string input;
  std::string output;
  std::string explanation;  // may be empty
};

struct TaskInstance {
  std::string id;
  std::string input;
  std::vector<std::string> outputs;  // never empty for a parsed task
};

// One Natural-Instructions task: definition text, metadata, demonstration
// examples, and scored instances.
struct TaskDefinition {
  std::string task_id;
  std::string definition;
  std::vector<std::string> categories;
  std::vector<std::string> domains;
  std::vector<std::string> input_language;
  std::vector<std::string> output_language;
  std::vector<DemonstrationExample> positive_examples;
  std::vector<TaskInstance> instances;
};

struct FilterPolicy {
  std::set<std::string> allowed_languages = {"English"};
  std::set<std::string> excluded_categories;
  std::set<std::string> excluded_task_ids;
  // When present, overrides all other rules: tasks on the list are selected,
  // tasks off the list are rejected.
  std::optional<std::vector<std::string>> explicit_allowlist;
};

// task_id -> ExactMatch | Generation. Ships as an editable fixture; there is
// no automatic inference.
struct CategoryMap {
  std::map<std::string, TaskKind> kinds;
};

struct InstructionRecord {
  std::string instruction;
  std::string input;   // may be empty
  std::string output;  // never empty
  Source source = Source::kOther;
  std::string origin_id;
  std::uint64_t content_hash = 0;
};

// Field-name mapping for generic line-delimited instruction files.
struct InstructionSchema {
  std::string instruction_field = "instruction";
  std::string input_field = "input";  // empty string means "no input field"
  std::string output_field = "output";
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Parses a single NI task document (JSON, public Natural-Instructions
// layout). Throws std::runtime_error naming the missing/ill-typed field;
// an empty Instances list is a structural error.
TaskDefinition parse_ni_task(const std::string& path);
TaskDefinition parse_ni_task_json(const std::string& json_text,
                                  const std::string& task_id);

// Inverse of parse: emits the task back in the same document layout.
// parse -> serialize -> parse is a fixed point.
std::string serialize_ni_task(const TaskDefinition& task);

struct FilterOutcome {
  std::vector<TaskDefinition> selected;
  // (task_id, reason) for each rejected task; reason is the first matching
  // rule.
  std::vector<std::pair<std::string, std::string>> rejected;
};

FilterOutcome apply_filter_policy(const std::vector<TaskDefinition>& tasks,
                                  const FilterPolicy& policy);

struct LoadResult {
  std::vector<InstructionRecord> records;
  std::size_t dropped_empty_output = 0;
};

// Loads a line-delimited instruction file, mapping fields per schema.
// Records with an empty output are dropped and counted. An unmappable
// schema field throws std::runtime_error.
LoadResult load_instruction_file(const std::string& path, Source source,
                                 const InstructionSchema& schema);

struct CategorizedTasks {
  std::vector<TaskDefinition> em_tasks;
  std::vector<TaskDefinition> gen_tasks;
};

// Splits selected tasks by the category map. Throws if any task is not
// covered, listing every missing id.
CategorizedTasks categorize_tasks(const std::vector<TaskDefinition>& selected,
                                  const CategoryMap& map);

// ---------------------------------------------------------------------------
// Config file round-trips
// ---------------------------------------------------------------------------

FilterPolicy load_filter_policy(const std::string& path);
void save_filter_policy(const FilterPolicy& policy, const std::string& path);

CategoryMap load_category_map(const std::string& path);
void save_category_map(const CategoryMap& map, const std::string& path);

// One task id per line; '#' starts a comment.
std::vector<std::string> load_task_id_list(const std::string& path);

}  // namespace curator
