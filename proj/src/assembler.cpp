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

#include "curator/assembler.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "curator/hash.hpp"
#include "curator/rng.hpp"
#include "curator/version.hpp"

namespace curator {

using ordered_json = nlohmann::ordered_json;

MixtureSpec mixture_preset(const std::string& name, std::uint64_t seed) {
  MixtureSpec spec;
  spec.name = name;
  spec.seed = seed;
  if (name == "200K") {
    spec.quotas = {{"LIMA", 1000},       {"OpenPlatypus", 25000},
                   {"NI_exact_match", 50000}, {"NI_generation", 50000},
                   {"OpenbookQA", 5000}, {"QUAC", 10000},
                   {"CNNDailyMail", 15000},   {"MathInstruct", 50000}};
    spec.epochs = 3;
  } else if (name == "400K") {
    spec.quotas = {{"LIMA", 1000},       {"OpenPlatypus", 25000},
                   {"NI_exact_match", 110000}, {"NI_generation", 110000},
                   {"OpenbookQA", 5000}, {"QUAC", 10000},
                   {"CNNDailyMail", 28000},    {"MathInstruct", 100000}};
    spec.epochs = 2;
  } else if (name == "700K") {
    spec.quotas = {{"LIMA", 1000},       {"OpenPlatypus", 25000},
                   {"NI_exact_match", 220000}, {"NI_generation", 220000},
                   {"OpenbookQA", 5000}, {"QUAC", 10000},
                   {"CNNDailyMail", 28000},    {"MathInstruct", 200000}};
    spec.epochs = 1;
  } else {
    throw std::runtime_error("unknown mixture preset '" + name +
                             "'; known presets: 200K, 400K, 700K");
  }
  return spec;
}

std::string CurationManifest::to_json() const {
  ordered_json doc;
  doc["mixture_name"] = mixture_name;
  ordered_json sources = ordered_json::object();
  for (const auto& [key, count] : per_source) {
    sources[key] = {{"requested", count.requested}, {"delivered", count.delivered}};
  }
  doc["per_source"] = std::move(sources);
  doc["dedupe_removed"] = dedupe_removed;
  doc["validation_hashes"] = validation_hashes;
  doc["master_seed"] = master_seed;
  doc["parameters"] = parameters;
  doc["tool_version"] = tool_version;
  doc["file_digests"] = file_digests;
  return doc.dump(2) + "\n";
}

CurationManifest CurationManifest::from_json(const std::string& text) {
  auto doc = nlohmann::json::parse(text);
  CurationManifest m;
  m.mixture_name = doc.at("mixture_name").get<std::string>();
  for (const auto& [key, counts] : doc.at("per_source").items()) {
    m.per_source[key] = {counts.at("requested").get<std::size_t>(),
                         counts.at("delivered").get<std::size_t>()};
  }
  m.dedupe_removed = doc.at("dedupe_removed").get<std::size_t>();
  m.validation_hashes = doc.at("validation_hashes").get<std::vector<std::uint64_t>>();
  m.master_seed = doc.at("master_seed").get<std::uint64_t>();
  m.parameters = doc.at("parameters").get<std::map<std::string, std::string>>();
  m.tool_version = doc.at("tool_version").get<std::string>();
  m.file_digests = doc.at("file_digests").get<std::map<std::string, std::string>>();
  return m;
}

AssembledMixture assemble_mixture(
    const MixtureSpec& spec,
    const std::map<std::string, std::vector<InstructionRecord>>& sources) {
  for (const auto& [key, quota] : spec.quotas) {
    if (quota > 0 && !sources.count(key)) {
      throw std::runtime_error("assemble_mixture: no stream for source '" + key + "'");
    }
  }

  AssembledMixture out;
  out.manifest.mixture_name = spec.name;
  out.manifest.master_seed = spec.seed;
  out.manifest.tool_version = kVersion;

  for (const auto& [key, quota] : spec.quotas) {
    SourceCount count;
    count.requested = quota;
    if (quota > 0) {
      const auto& stream = sources.at(key);
      count.delivered = std::min(quota, stream.size());
      Rng rng(derive_seed(spec.seed, "mix|" + key));
      auto drawn = rng.sample(stream, count.delivered);
      out.records.insert(out.records.end(),
                         std::make_move_iterator(drawn.begin()),
                         std::make_move_iterator(drawn.end()));
    }
    out.manifest.per_source[key] = count;
  }

  Rng shuffle_rng(derive_seed(spec.seed, "mix-shuffle"));
  shuffle_rng.shuffle(out.records);
  return out;
}

DedupeResult dedupe_records(std::vector<InstructionRecord> records) {
  DedupeResult out;
  out.records.reserve(records.size());
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(records.size() * 2);
  for (auto& rec : records) {
    if (seen.insert(rec.content_hash).second) {
      out.records.push_back(std::move(rec));
    } else {
      ++out.removed;
    }
  }
  return out;
}

SplitResult split_validation(std::vector<InstructionRecord> records,
                             std::size_t n, std::uint64_t seed) {
  if (n > records.size()) {
    throw std::runtime_error("split_validation: n=" + std::to_string(n) +
                             " exceeds record count " + std::to_string(records.size()));
  }
  std::vector<std::size_t> indices(records.size());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "validation-split"));
  auto val_indices = rng.sample(indices, n);
  std::vector<bool> is_val(records.size(), false);
  for (auto i : val_indices) is_val[i] = true;

  SplitResult out;
  out.train.reserve(records.size() - n);
  out.validation.reserve(n);
  for (std::size_t i = 0; i < records.size(); ++i) {
    (is_val[i] ? out.validation : out.train).push_back(std::move(records[i]));
  }
  return out;
}

TrainingConfigPreset training_config_for(const MixtureSpec& spec) {
  TrainingConfigPreset preset;
  preset.epochs = spec.epochs;
  return preset;
}

std::string render_training_config(const TrainingConfigPreset& preset,
                                   const std::string& dataset_path,
                                   const std::string& validation_path) {
  std::string out;
  auto kv = [&out](const std::string& key, const std::string& value) {
    out += key + ": " + value + "\n";
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return std::string(buf);
  };
  kv("base_model", preset.base_model);
  kv("quantization", preset.quantization);
  kv("lora_rank", std::to_string(preset.lora_rank));
  kv("lora_alpha", std::to_string(preset.lora_alpha));
  kv("lora_targets", preset.lora_targets);
  kv("optimizer", preset.optimizer);
  kv("schedule", preset.schedule);
  kv("learning_rate", num(preset.learning_rate));
  kv("weight_decay", num(preset.weight_decay));
  kv("warmup_steps", std::to_string(preset.warmup_steps));
  kv("gradient_accumulation", std::to_string(preset.gradient_accumulation));
  kv("micro_batch", std::to_string(preset.micro_batch));
  kv("sample_packing", preset.sample_packing ? "true" : "false");
  kv("embedding_noise", preset.embedding_noise ? "true" : "false");
  kv("embedding_noise_alpha", num(preset.embedding_noise_alpha));
  kv("epochs", std::to_string(preset.epochs));
  kv("checkpoint_selection", preset.checkpoint_selection);
  if (!dataset_path.empty()) kv("dataset_path", dataset_path);
  if (!validation_path.empty()) kv("validation_path", validation_path);
  return out;
}

void emit_training_config(const MixtureSpec& spec, const std::string& path,
                          const std::string& dataset_path,
                          const std::string& validation_path) {
  const std::string body =
      render_training_config(training_config_for(spec), dataset_path, validation_path);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write training config: " + path);
    out << body;
  }
  std::filesystem::rename(tmp, path);
}

void write_records_jsonl(const std::vector<InstructionRecord>& records,
                         const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    for (const auto& rec : records) {
      ordered_json doc;
      doc["instruction"] = rec.instruction;
      doc["input"] = rec.input;
      doc["output"] = rec.output;
      doc["source"] = to_string(rec.source);
      doc["origin_id"] = rec.origin_id;
      out << doc.dump() << "\n";
    }
  }
  std::filesystem::rename(tmp, path);
}

std::vector<InstructionRecord> read_records_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::vector<InstructionRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto doc = nlohmann::json::parse(line);
    InstructionRecord rec;
    rec.instruction = doc.at("instruction").get<std::string>();
    rec.input = doc.at("input").get<std::string>();
    rec.output = doc.at("output").get<std::string>();
    rec.source = source_from_string(doc.at("source").get<std::string>());
    rec.origin_id = doc.at("origin_id").get<std::string>();
    rec.content_hash = content_hash(rec.instruction, rec.input, rec.output);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace curator
