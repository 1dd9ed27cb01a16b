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

#include "curator/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "curator/hash.hpp"
#include "curator/rng.hpp"

namespace curator {

using ordered_json = nlohmann::ordered_json;

std::string ScoreInterval::label() const {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "[%.4f,%.4f)", lo, hi);
  return buf;
}

double BucketScheme::rate_for(const ScoreInterval& interval) const {
  auto it = rates.find(interval.label());
  if (it == rates.end()) {
    throw std::runtime_error("bucket scheme: no rate for interval " + interval.label());
  }
  return it->second;
}

void BucketScheme::validate() const {
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    const auto& iv = boundaries[i];
    if (!(iv.lo < iv.hi)) {
      throw std::runtime_error("bucket scheme: empty interval " + iv.label());
    }
    if (i > 0 && boundaries[i - 1].hi > iv.lo) {
      throw std::runtime_error("bucket scheme: intervals overlap or are unordered at " +
                               iv.label());
    }
    const double rate = rate_for(iv);
    if (rate < 0.0 || rate > 1.0) {
      throw std::runtime_error("bucket scheme: rate out of [0,1] for " + iv.label());
    }
  }
}

BucketScheme default_generation_scheme() {
  BucketScheme scheme;
  scheme.boundaries = {{0.0, 0.2}, {0.2, 0.3}, {0.3, 0.4}, {0.4, 0.5},
                       {0.5, 0.6}, {0.6, 0.7}, {0.7, 0.8}};
  for (const auto& iv : scheme.boundaries) {
    scheme.rates[iv.label()] = iv.lo == 0.0 ? 0.40 : 0.10;
  }
  scheme.drop_above = 0.8;
  return scheme;
}

BucketScheme default_em_scheme() {
  BucketScheme scheme;
  scheme.drop_below_task_accuracy = 0.05;
  const double lo = scheme.drop_below_task_accuracy;
  const double width = (1.0 - lo) / 10.0;
  const double ladder[10] = {0.40, 0.35, 0.30, 0.25, 0.20,
                             0.15, 0.10, 0.10, 0.10, 0.10};
  for (int i = 0; i < 10; ++i) {
    ScoreInterval iv{lo + i * width, lo + (i + 1) * width};
    if (i == 9) iv.hi = 1.0 + 1e-9;  // accuracy exactly 1.0 lands in the top bucket
    scheme.boundaries.push_back(iv);
    scheme.rates[iv.label()] = ladder[i];
  }
  return scheme;
}

BucketScheme load_bucket_scheme(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bucket scheme: " + path);
  auto doc = nlohmann::json::parse(in);
  BucketScheme scheme;
  for (const auto& pair : doc.at("boundaries")) {
    scheme.boundaries.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
  }
  for (const auto& [label, rate] : doc.at("rates").items()) {
    scheme.rates[label] = rate.get<double>();
  }
  if (doc.contains("drop_above") && !doc["drop_above"].is_null()) {
    scheme.drop_above = doc["drop_above"].get<double>();
  }
  scheme.drop_below_task_accuracy = doc.value("drop_below_task_accuracy", 0.0);
  scheme.validate();
  return scheme;
}

void save_bucket_scheme(const BucketScheme& scheme, const std::string& path) {
  ordered_json doc;
  ordered_json bounds = ordered_json::array();
  for (const auto& iv : scheme.boundaries) {
    bounds.push_back(ordered_json::array({iv.lo, iv.hi}));
  }
  doc["boundaries"] = std::move(bounds);
  ordered_json rates = ordered_json::object();
  for (const auto& iv : scheme.boundaries) rates[iv.label()] = scheme.rates.at(iv.label());
  doc["rates"] = std::move(rates);
  if (scheme.drop_above) {
    doc["drop_above"] = *scheme.drop_above;
  } else {
    doc["drop_above"] = nullptr;
  }
  doc["drop_below_task_accuracy"] = scheme.drop_below_task_accuracy;
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
}

namespace {

const ScoreInterval* find_interval(const BucketScheme& scheme, double score) {
  for (const auto& iv : scheme.boundaries) {
    if (iv.contains(score)) return &iv;
  }
  return nullptr;
}

}  // namespace

GenBuckets bucket_generation_examples(const std::vector<TaskScoreReport>& reports,
                                      const BucketScheme& scheme) {
  scheme.validate();
  GenBuckets out;
  for (const auto& report : reports) {
    for (const auto& [instance_id, score] : report.per_example) {
      if (scheme.drop_above && score >= *scheme.drop_above) {
        ++out.dropped;
        continue;
      }
      const ScoreInterval* iv = find_interval(scheme, score);
      if (!iv) {
        ++out.dropped;
        continue;
      }
      out.buckets[{report.task_id, *iv}].push_back(instance_id);
    }
  }
  return out;
}

EmBuckets bucket_em_tasks(const std::vector<TaskScoreReport>& reports,
                          const BucketScheme& scheme) {
  scheme.validate();
  EmBuckets out;
  for (const auto& report : reports) {
    if (report.accuracy < scheme.drop_below_task_accuracy) {
      out.dropped_tasks.push_back(report.task_id);
      continue;
    }
    const ScoreInterval* iv = find_interval(scheme, report.accuracy);
    if (!iv) {
      out.dropped_tasks.push_back(report.task_id);
      continue;
    }
    out.buckets[*iv].push_back(report.task_id);
  }
  return out;
}

PoolSelection sample_generation_pool(const GenBuckets& buckets,
                                     const BucketScheme& scheme,
                                     std::size_t target_total,
                                     std::uint64_t seed) {
  scheme.validate();
  Rng rng(derive_seed(seed, "gen-draw"));
  std::vector<ExampleId> aggregate;
  for (const auto& [key, instance_ids] : buckets.buckets) {
    const auto& [task_id, interval] = key;
    const double rate = scheme.rate_for(interval);
    const std::size_t quota = static_cast<std::size_t>(
        std::floor(rate * static_cast<double>(instance_ids.size())));
    for (const auto& id : rng.sample(instance_ids, quota)) {
      aggregate.push_back({task_id, id});
    }
  }
  PoolSelection sel;
  sel.aggregate_before_truncation = aggregate.size();
  sel.short_of_target = aggregate.size() < target_total;
  sel.ids = truncate_pool(std::move(aggregate), target_total,
                          derive_seed(seed, "gen-truncate"));
  return sel;
}

PoolSelection sample_em_pool(const EmBuckets& buckets,
                             const std::vector<TaskScoreReport>& reports,
                             const BucketScheme& scheme,
                             std::size_t target_total, std::uint64_t seed) {
  scheme.validate();
  // The difficulty weighting only makes sense if harder buckets never get a
  // smaller rate than easier ones.
  for (std::size_t i = 1; i < scheme.boundaries.size(); ++i) {
    if (scheme.rate_for(scheme.boundaries[i]) >
        scheme.rate_for(scheme.boundaries[i - 1])) {
      throw std::runtime_error(
          "em scheme: rates must be non-increasing in accuracy");
    }
  }

  std::map<std::string, const TaskScoreReport*> by_task;
  for (const auto& r : reports) by_task[r.task_id] = &r;

  Rng rng(derive_seed(seed, "em-draw"));
  std::vector<ExampleId> aggregate;
  for (const auto& [interval, task_ids] : buckets.buckets) {
    const double rate = scheme.rate_for(interval);
    for (const auto& task_id : task_ids) {
      auto it = by_task.find(task_id);
      if (it == by_task.end()) {
        throw std::runtime_error("sample_em_pool: no report for task " + task_id);
      }
      std::vector<std::string> instance_ids;
      instance_ids.reserve(it->second->per_example.size());
      for (const auto& [id, score] : it->second->per_example) {
        instance_ids.push_back(id);
      }
      const std::size_t quota = static_cast<std::size_t>(
          std::floor(rate * static_cast<double>(instance_ids.size())));
      for (const auto& id : rng.sample(instance_ids, quota)) {
        aggregate.push_back({task_id, id});
      }
    }
  }
  PoolSelection sel;
  sel.aggregate_before_truncation = aggregate.size();
  sel.short_of_target = aggregate.size() < target_total;
  sel.ids = truncate_pool(std::move(aggregate), target_total,
                          derive_seed(seed, "em-truncate"));
  return sel;
}

std::vector<ExampleId> truncate_pool(std::vector<ExampleId> ids,
                                     std::size_t target, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t k = std::min(target, ids.size());
  std::vector<ExampleId> out = rng.sample(std::move(ids), k);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace curator
