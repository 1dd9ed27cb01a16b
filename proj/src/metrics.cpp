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

#include "curator/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace curator {

RougeVariant rouge_variant_from_string(const std::string& s) {
  if (s == "rouge-1" || s == "rouge1") return RougeVariant::kRouge1;
  if (s == "rouge-2" || s == "rouge2") return RougeVariant::kRouge2;
  if (s == "rouge-l" || s == "rougeL" || s == "rougel") return RougeVariant::kRougeL;
  throw std::runtime_error("unknown rouge variant: " + s);
}

const char* to_string(RougeVariant v) {
  switch (v) {
    case RougeVariant::kRouge1: return "rouge-1";
    case RougeVariant::kRouge2: return "rouge-2";
    case RougeVariant::kRougeL: return "rouge-l";
  }
  return "rouge-l";
}

std::string normalize_text(std::string_view s, const NormalizationPolicy& p) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (p.strip_punctuation && std::ispunct(c)) continue;
    if (p.collapse_whitespace && std::isspace(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(p.case_fold ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(static_cast<char>(c));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

int exact_match(std::string_view pred, const std::vector<std::string>& refs,
                const NormalizationPolicy& p) {
  if (refs.empty()) {
    throw std::invalid_argument("exact_match: refs must be non-empty");
  }
  const std::string norm_pred = normalize_text(pred, p);
  for (const auto& ref : refs) {
    if (norm_pred == normalize_text(ref, p)) return 1;
  }
  return 0;
}

namespace {

RougeScore from_counts(double overlap, double pred_total, double ref_total) {
  RougeScore s;
  s.precision = pred_total > 0 ? overlap / pred_total : 0.0;
  s.recall = ref_total > 0 ? overlap / ref_total : 0.0;
  s.f1 = (s.precision + s.recall) > 0
             ? 2 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (tokens.size() >= n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      counts[{tokens.begin() + i, tokens.begin() + i + n}]++;
    }
  }
  return counts;
}

}  // namespace

RougeScore rouge_n(std::string_view pred, std::string_view ref, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  const auto pred_counts = ngram_counts(tokenize(pred), static_cast<std::size_t>(n));
  const auto ref_counts = ngram_counts(tokenize(ref), static_cast<std::size_t>(n));
  double pred_total = 0, ref_total = 0, overlap = 0;
  for (const auto& [g, c] : pred_counts) pred_total += static_cast<double>(c);
  for (const auto& [g, c] : ref_counts) ref_total += static_cast<double>(c);
  for (const auto& [gram, count] : pred_counts) {
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) {
      overlap += static_cast<double>(std::min(count, it->second));  // clipped
    }
  }
  return from_counts(overlap, pred_total, ref_total);
}

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  // Two-row DP over token sequences.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1
                                      : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(std::string_view pred, std::string_view ref) {
  const auto pred_tokens = tokenize(pred);
  const auto ref_tokens = tokenize(ref);
  const double lcs = static_cast<double>(lcs_length(pred_tokens, ref_tokens));
  return from_counts(lcs, static_cast<double>(pred_tokens.size()),
                     static_cast<double>(ref_tokens.size()));
}

double score_prediction(TaskKind kind, std::string_view pred,
                        const std::vector<std::string>& refs,
                        RougeVariant variant, const NormalizationPolicy& p) {
  if (refs.empty()) {
    throw std::invalid_argument("score_prediction: refs must be non-empty");
  }
  if (kind == TaskKind::kExactMatch) {
    return static_cast<double>(exact_match(pred, refs, p));
  }
  double best = 0.0;
  for (const auto& ref : refs) {
    RougeScore s;
    switch (variant) {
      case RougeVariant::kRouge1: s = rouge_n(pred, ref, 1); break;
      case RougeVariant::kRouge2: s = rouge_n(pred, ref, 2); break;
      case RougeVariant::kRougeL: s = rouge_l(pred, ref); break;
    }
    best = std::max(best, s.f1);
  }
  return best;
}

}  // namespace curator
