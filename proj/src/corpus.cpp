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

#include "curator/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "curator/hash.hpp"

namespace curator {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* to_string(TaskKind kind) {
  return kind == TaskKind::kExactMatch ? "exact_match" : "generation";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "exact_match" || s == "ExactMatch" || s == "EM") {
    return TaskKind::kExactMatch;
  }
  if (s == "generation" || s == "Generation" || s == "GEN") {
    return TaskKind::kGeneration;
  }
  throw std::runtime_error("unknown task kind: " + s);
}

const char* to_string(Source source) {
  switch (source) {
    case Source::kLima: return "LIMA";
    case Source::kOpenPlatypus: return "OpenPlatypus";
    case Source::kNaturalInstructions: return "NI";
    case Source::kOpenbookQa: return "OpenbookQA";
    case Source::kQuac: return "QUAC";
    case Source::kCnnDailyMail: return "CNNDailyMail";
    case Source::kMathInstruct: return "MathInstruct";
    case Source::kOther: return "Other";
  }
  return "Other";
}

Source source_from_string(const std::string& s) {
  if (s == "LIMA") return Source::kLima;
  if (s == "OpenPlatypus") return Source::kOpenPlatypus;
  if (s == "NI") return Source::kNaturalInstructions;
  if (s == "OpenbookQA") return Source::kOpenbookQa;
  if (s == "QUAC") return Source::kQuac;
  if (s == "CNNDailyMail") return Source::kCnnDailyMail;
  if (s == "MathInstruct") return Source::kMathInstruct;
  if (s == "Other") return Source::kOther;
  throw std::runtime_error("unknown source: " + s);
}

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

const json& require_field(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) {
    throw std::runtime_error(std::string("missing field: ") + name);
  }
  return *it;
}

std::vector<std::string> string_list(const json& value, const char* name) {
  if (!value.is_array()) {
    throw std::runtime_error(std::string("field is not a list: ") + name);
  }
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw std::runtime_error(std::string("non-string entry in field: ") + name);
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '\n';
    out += parts[i];
  }
  return out;
}

}  // namespace

TaskDefinition parse_ni_task_json(const std::string& json_text,
                                  const std::string& task_id) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed task document: " + std::string(e.what()));
  }
  if (!doc.is_object()) {
    throw std::runtime_error("malformed task document: not an object");
  }

  TaskDefinition task;
  task.task_id = task_id;
  if (task.task_id.empty()) {
    throw std::runtime_error("missing field: task_id");
  }

  task.definition = join_lines(string_list(require_field(doc, "Definition"), "Definition"));
  task.categories = string_list(require_field(doc, "Categories"), "Categories");
  task.domains = string_list(require_field(doc, "Domains"), "Domains");
  task.input_language = string_list(require_field(doc, "Input_language"), "Input_language");
  task.output_language = string_list(require_field(doc, "Output_language"), "Output_language");

  const json& positives = require_field(doc, "Positive Examples");
  if (!positives.is_array()) {
    throw std::runtime_error("field is not a list: Positive Examples");
  }
  for (const auto& ex : positives) {
    DemonstrationExample demo;
    demo.input = require_field(ex, "input").get<std::string>();
    demo.output = require_field(ex, "output").get<std::string>();
    if (ex.contains("explanation") && ex["explanation"].is_string()) {
      demo.explanation = ex["explanation"].get<std::string>();
    }
    task.positive_examples.push_back(std::move(demo));
  }

  const json& instances = require_field(doc, "Instances");
  if (!instances.is_array()) {
    throw std::runtime_error("field is not a list: Instances");
  }
  if (instances.empty()) {
    throw std::runtime_error("structural error: empty Instances list in " + task_id);
  }
  for (const auto& inst : instances) {
    TaskInstance instance;
    instance.id = require_field(inst, "id").get<std::string>();
    instance.input = require_field(inst, "input").get<std::string>();
    instance.outputs = string_list(require_field(inst, "output"), "output");
    if (instance.outputs.empty()) {
      throw std::runtime_error("structural error: instance " + instance.id +
                               " has no reference outputs");
    }
    task.instances.push_back(std::move(instance));
  }
  return task;
}

TaskDefinition parse_ni_task(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open task file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ni_task_json(buf.str(), std::filesystem::path(path).stem().string());
}

std::string serialize_ni_task(const TaskDefinition& task) {
  ordered_json doc;
  doc["Definition"] = json::array({task.definition});
  doc["Categories"] = task.categories;
  doc["Domains"] = task.domains;
  doc["Input_language"] = task.input_language;
  doc["Output_language"] = task.output_language;
  ordered_json positives = json::array();
  for (const auto& ex : task.positive_examples) {
    ordered_json entry;
    entry["input"] = ex.input;
    entry["output"] = ex.output;
    entry["explanation"] = ex.explanation;
    positives.push_back(std::move(entry));
  }
  doc["Positive Examples"] = std::move(positives);
  ordered_json instances = json::array();
  for (const auto& inst : task.instances) {
    ordered_json entry;
    entry["id"] = inst.id;
    entry["input"] = inst.input;
    entry["output"] = inst.outputs;
    instances.push_back(std::move(entry));
  }
  doc["Instances"] = std::move(instances);
  return doc.dump(2) + "\n";
}

FilterOutcome apply_filter_policy(const std::vector<TaskDefinition>& tasks,
                                  const FilterPolicy& policy) {
  FilterOutcome outcome;

  if (policy.explicit_allowlist) {
    const std::set<std::string> allow(policy.explicit_allowlist->begin(),
                                      policy.explicit_allowlist->end());
    for (const auto& task : tasks) {
      if (allow.count(task.task_id)) {
        outcome.selected.push_back(task);
      } else {
        outcome.rejected.emplace_back(task.task_id, "not on allowlist");
      }
    }
    return outcome;
  }

  for (const auto& task : tasks) {
    std::string reason;
    if (policy.excluded_task_ids.count(task.task_id)) {
      reason = "excluded task id";
    } else {
      auto non_allowed = [&](const std::vector<std::string>& langs) {
        return std::any_of(langs.begin(), langs.end(), [&](const std::string& l) {
          return policy.allowed_languages.count(trim(l)) == 0;
        });
      };
      if (non_allowed(task.input_language) || non_allowed(task.output_language)) {
        reason = "non-English";
      } else {
        for (const auto& cat : task.categories) {
          if (policy.excluded_categories.count(cat)) {
            reason = "excluded category";
            break;
          }
        }
      }
    }
    if (reason.empty()) {
      outcome.selected.push_back(task);
    } else {
      outcome.rejected.emplace_back(task.task_id, reason);
    }
  }
  return outcome;
}

LoadResult load_instruction_file(const std::string& path, Source source,
                                 const InstructionSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open instruction file: " + path);
  }
  if (schema.instruction_field.empty() || schema.output_field.empty()) {
    throw std::runtime_error("schema must name instruction and output fields");
  }

  LoadResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": bad record: " + e.what());
    }
    auto fetch = [&](const std::string& field, bool required) -> std::string {
      if (field.empty()) return "";
      auto it = row.find(field);
      if (it == row.end() || !it->is_string()) {
        if (required) {
          throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                   ": unmappable schema field: " + field);
        }
        return "";
      }
      return it->get<std::string>();
    };
    InstructionRecord rec;
    rec.instruction = fetch(schema.instruction_field, true);
    rec.input = fetch(schema.input_field, false);
    rec.output = fetch(schema.output_field, true);
    if (rec.output.empty()) {
      ++result.dropped_empty_output;
      continue;
    }
    rec.source = source;
    rec.origin_id = std::filesystem::path(path).filename().string() + ":" +
                    std::to_string(line_no);
    rec.content_hash = content_hash(rec.instruction, rec.input, rec.output);
    result.records.push_back(std::move(rec));
  }
  return result;
}

CategorizedTasks categorize_tasks(const std::vector<TaskDefinition>& selected,
                                  const CategoryMap& map) {
  std::vector<std::string> missing;
  for (const auto& task : selected) {
    if (!map.kinds.count(task.task_id)) {
      missing.push_back(task.task_id);
    }
  }
  if (!missing.empty()) {
    std::string msg = "category map missing tasks:";
    for (const auto& id : missing) msg += " " + id;
    throw std::runtime_error(msg);
  }
  CategorizedTasks out;
  for (const auto& task : selected) {
    if (map.kinds.at(task.task_id) == TaskKind::kExactMatch) {
      out.em_tasks.push_back(task);
    } else {
      out.gen_tasks.push_back(task);
    }
  }
  return out;
}

FilterPolicy load_filter_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open filter policy: " + path);
  }
  json doc = json::parse(in);
  FilterPolicy policy;
  if (doc.contains("allowed_languages")) {
    policy.allowed_languages.clear();
    for (const auto& l : doc["allowed_languages"]) {
      policy.allowed_languages.insert(l.get<std::string>());
    }
  }
  for (const auto& c : doc.value("excluded_categories", json::array())) {
    policy.excluded_categories.insert(c.get<std::string>());
  }
  for (const auto& t : doc.value("excluded_task_ids", json::array())) {
    policy.excluded_task_ids.insert(t.get<std::string>());
  }
  if (doc.contains("explicit_allowlist") && !doc["explicit_allowlist"].is_null()) {
    std::vector<std::string> allow;
    for (const auto& t : doc["explicit_allowlist"]) {
      allow.push_back(t.get<std::string>());
    }
    policy.explicit_allowlist = std::move(allow);
  }
  return policy;
}

void save_filter_policy(const FilterPolicy& policy, const std::string& path) {
  ordered_json doc;
  doc["allowed_languages"] = policy.allowed_languages;
  doc["excluded_categories"] = policy.excluded_categories;
  doc["excluded_task_ids"] = policy.excluded_task_ids;
  if (policy.explicit_allowlist) {
    doc["explicit_allowlist"] = *policy.explicit_allowlist;
  } else {
    doc["explicit_allowlist"] = nullptr;
  }
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
}

CategoryMap load_category_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open category map: " + path);
  }
  json doc = json::parse(in);
  CategoryMap map;
  for (const auto& [task_id, kind] : doc.items()) {
    map.kinds[task_id] = task_kind_from_string(kind.get<std::string>());
  }
  return map;
}

void save_category_map(const CategoryMap& map, const std::string& path) {
  ordered_json doc = ordered_json::object();
  for (const auto& [task_id, kind] : map.kinds) {
    doc[task_id] = to_string(kind);
  }
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
}

std::vector<std::string> load_task_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open task id list: " + path);
  }
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

}  // namespace curator
