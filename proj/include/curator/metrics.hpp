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

#include <string>
#include <string_view>
#include <vector>

#include "curator/corpus.hpp"

namespace curator {

struct NormalizationPolicy {
  bool case_fold = true;
  bool strip_punctuation = true;
  bool collapse_whitespace = true;
};

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

enum class RougeVariant { kRouge1, kRouge2, kRougeL };

RougeVariant rouge_variant_from_string(const std::string& s);
const char* to_string(RougeVariant v);

// Idempotent text normalization: case fold (ASCII), strip punctuation,
// collapse runs of whitespace and trim.
std::string normalize_text(std::string_view s, const NormalizationPolicy& p = {});

// Whitespace tokenization, no stemming, no stopword removal.
std::vector<std::string> tokenize(std::string_view s);

// 1 if the normalized prediction equals any normalized reference, else 0.
// refs must be non-empty.
int exact_match(std::string_view pred, const std::vector<std::string>& refs,
                const NormalizationPolicy& p = {});

// Clipped n-gram overlap. Empty n-gram sets give zero components.
RougeScore rouge_n(std::string_view pred, std::string_view ref, int n);

// LCS-based ROUGE over whitespace tokens.
RougeScore rouge_l(std::string_view pred, std::string_view ref);

// LCS length over pre-tokenized sequences; shared with rouge_l.
std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b);

// EM tasks: exact_match against refs. Generation tasks: max rouge f1 over
// refs (variant defaults to ROUGE-L).
double score_prediction(TaskKind kind, std::string_view pred,
                        const std::vector<std::string>& refs,
                        RougeVariant variant = RougeVariant::kRougeL,
                        const NormalizationPolicy& p = {});

}  // namespace curator
