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
#include <string>
#include <vector>

#include "curator/fewshot.hpp"

namespace curator {

// Half-open [lo, hi).
struct ScoreInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x < hi; }
  bool operator<(const ScoreInterval& o) const { return lo < o.lo; }
  bool operator==(const ScoreInterval& o) const { return lo == o.lo && hi == o.hi; }
  std::string label() const;
};

struct BucketScheme {
  std::vector<ScoreInterval> boundaries;        // disjoint, ordered
  std::map<std::string, double> rates;          // interval label -> rate in [0,1]
  std::optional<double> drop_above;             // scores >= this are discarded
  double drop_below_task_accuracy = 0.0;        // EM bucketing only

  double rate_for(const ScoreInterval& interval) const;
  void validate() const;  // throws on overlap, gaps in rates, bad ranges
};

// Generation-side default: buckets [0,0.2) .. [0.7,0.8), rate 0.40 for the
// first, 0.10 for the rest, scores >= 0.8 dropped.
BucketScheme default_generation_scheme();

// Exact-Match-side default: accuracy cutoff 0.05, decile buckets over
// [0.05, 1.0], monotone non-increasing rate ladder
// 0.40 0.35 0.30 0.25 0.20 0.15 0.10 0.10 0.10 0.10.
BucketScheme default_em_scheme();

BucketScheme load_bucket_scheme(const std::string& path);
void save_bucket_scheme(const BucketScheme& scheme, const std::string& path);

// (task_id, instance_id) — the unit every selection is made of.
struct ExampleId {
  std::string task_id;
  std::string instance_id;

  bool operator==(const ExampleId& o) const {
    return task_id == o.task_id && instance_id == o.instance_id;
  }
  bool operator<(const ExampleId& o) const {
    return task_id != o.task_id ? task_id < o.task_id
                                : instance_id < o.instance_id;
  }
};

struct GenBuckets {
  // (task_id, interval) -> instance ids, insertion order preserved.
  std::map<std::pair<std::string, ScoreInterval>, std::vector<std::string>> buckets;
  std::size_t dropped = 0;
};

GenBuckets bucket_generation_examples(const std::vector<TaskScoreReport>& reports,
                                      const BucketScheme& scheme);

struct EmBuckets {
  std::map<ScoreInterval, std::vector<std::string>> buckets;  // interval -> task ids
  std::vector<std::string> dropped_tasks;                     // below accuracy cutoff
};

EmBuckets bucket_em_tasks(const std::vector<TaskScoreReport>& reports,
                          const BucketScheme& scheme);

struct PoolSelection {
  std::vector<ExampleId> ids;  // sorted for stable files
  bool short_of_target = false;
  std::size_t aggregate_before_truncation = 0;
};

// Per-(task, bucket) draw of floor(rate * bucket size) without replacement,
// then uniform truncation of the aggregate to target_total.
PoolSelection sample_generation_pool(const GenBuckets& buckets,
                                     const BucketScheme& scheme,
                                     std::size_t target_total,
                                     std::uint64_t seed);

// Per-task draw of floor(rate(bucket) * instance count) without replacement.
// Rates must be monotone non-increasing in bucket accuracy.
PoolSelection sample_em_pool(const EmBuckets& buckets,
                             const std::vector<TaskScoreReport>& reports,
                             const BucketScheme& scheme,
                             std::size_t target_total, std::uint64_t seed);

// Uniform sample without replacement of min(target, |ids|); output sorted.
std::vector<ExampleId> truncate_pool(std::vector<ExampleId> ids,
                                     std::size_t target, std::uint64_t seed);

}  // namespace curator
