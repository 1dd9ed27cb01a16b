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
#include <string>
#include <vector>

#include "curator/corpus.hpp"

namespace curator {

// Source keys used in mixture quotas. NI appears twice because the
// Exact-Match and Generation pools are drawn separately.
inline const std::vector<std::string>& mixture_source_keys() {
  static const std::vector<std::string> keys = {
      "LIMA",         "OpenPlatypus", "NI_exact_match", "NI_generation",
      "OpenbookQA",   "QUAC",         "CNNDailyMail",   "MathInstruct"};
  return keys;
}

struct MixtureSpec {
  std::string name;
  std::map<std::string, std::size_t> quotas;  // source key -> count
  int epochs = 1;
  std::uint64_t seed = 0;
};

// Presets "200K", "400K", "700K". Throws on unknown name, listing the known
// presets. The nominal labels do not equal the quota sums (206K/389K/709K);
// callers get the real totals from the manifest.
MixtureSpec mixture_preset(const std::string& name, std::uint64_t seed = 0);

struct SourceCount {
  std::size_t requested = 0;
  std::size_t delivered = 0;
};

struct CurationManifest {
  std::string mixture_name;
  std::map<std::string, SourceCount> per_source;
  std::size_t dedupe_removed = 0;
  std::vector<std::uint64_t> validation_hashes;
  std::uint64_t master_seed = 0;
  std::map<std::string, std::string> parameters;   // scheme / policy knobs
  std::string tool_version;
  std::map<std::string, std::string> file_digests; // file name -> sha256 hex

  std::string to_json() const;
  static CurationManifest from_json(const std::string& text);
};

struct AssembledMixture {
  std::vector<InstructionRecord> records;
  CurationManifest manifest;
};

// Draws min(quota, available) records per source without replacement,
// shuffles the aggregate, and records everything in the manifest.
// A quota whose source stream is missing is a configuration error raised
// before any sampling.
AssembledMixture assemble_mixture(
    const MixtureSpec& spec,
    const std::map<std::string, std::vector<InstructionRecord>>& sources);

struct DedupeResult {
  std::vector<InstructionRecord> records;
  std::size_t removed = 0;
};

// Keeps the first occurrence of each content_hash; order otherwise preserved.
DedupeResult dedupe_records(std::vector<InstructionRecord> records);

struct SplitResult {
  std::vector<InstructionRecord> train;
  std::vector<InstructionRecord> validation;
};

// Random disjoint split with |validation| = n. Throws if n > |records|.
SplitResult split_validation(std::vector<InstructionRecord> records,
                             std::size_t n, std::uint64_t seed);

// The fine-tuning recipe; every field lands verbatim in the emitted config.
struct TrainingConfigPreset {
  std::string base_model = "mistralai/Mistral-7B-v0.1";
  std::string quantization = "4bit";
  int lora_rank = 128;
  int lora_alpha = 256;
  std::string lora_targets = "q_proj,k_proj,v_proj,linear";
  std::string optimizer = "paged_adamw_32bit";
  std::string schedule = "cosine";
  double learning_rate = 2e-5;
  double weight_decay = 0.01;
  int warmup_steps = 100;
  int gradient_accumulation = 3;
  int micro_batch = 2;
  bool sample_packing = true;
  bool embedding_noise = true;
  double embedding_noise_alpha = 5.0;
  int epochs = 1;
  std::string checkpoint_selection = "min_validation_loss";
};

TrainingConfigPreset training_config_for(const MixtureSpec& spec);

// Writes the config as a flat key: value document whose keys mirror the
// TrainingConfigPreset field names.
void emit_training_config(const MixtureSpec& spec, const std::string& path,
                          const std::string& dataset_path = "",
                          const std::string& validation_path = "");
std::string render_training_config(const TrainingConfigPreset& preset,
                                   const std::string& dataset_path = "",
                                   const std::string& validation_path = "");

// Dataset file IO: one JSON record per line, stable key order
// {instruction, input, output, source, origin_id}, UTF-8, LF endings.
// Writes are atomic (temp file + rename).
void write_records_jsonl(const std::vector<InstructionRecord>& records,
                         const std::string& path);
std::vector<InstructionRecord> read_records_jsonl(const std::string& path);

}  // namespace curator
