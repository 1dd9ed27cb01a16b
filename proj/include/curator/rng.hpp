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
#include <random>
#include <vector>

namespace curator {

// Deterministic generator. mt19937_64 output is specified bit-for-bit by the
// standard; bounded draws below avoid std::uniform_int_distribution, whose
// output is implementation-defined, so every selection in the pipeline is
// reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform draw in [0, n). n must be > 0. Rejection sampling on the top
  // multiple of n keeps the draw unbiased.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[bounded(i)]);
    }
  }

  // Draws k elements without replacement, k <= v.size(). Order of the
  // returned elements is the draw order; callers needing stable files sort
  // afterwards.
  template <typename T>
  std::vector<T> sample(std::vector<T> v, std::size_t k) {
    std::vector<T> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(bounded(v.size() - i));
      std::swap(v[i], v[j]);
      out.push_back(v[i]);
    }
    return out;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace curator
