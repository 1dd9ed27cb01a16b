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
#include <string>
#include <string_view>

namespace curator {

// FNV-1a, 64-bit. Stable across platforms; used for record content hashes
// and for deriving per-pool seeds from the master seed.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t h = kFnvOffset) {
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// Hash of an (instruction, input, output) triple. Fields are separated by
// a 0x1f unit separator so concatenation cannot collide across boundaries.
std::uint64_t content_hash(std::string_view instruction, std::string_view input,
                           std::string_view output);

// Derives an independent seed for a named pool from the master seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view pool_name);

// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

// Lowercase hex SHA-256 of a file's contents. Throws std::runtime_error if
// the file cannot be read.
std::string sha256_file_hex(const std::string& path);

}  // namespace curator
