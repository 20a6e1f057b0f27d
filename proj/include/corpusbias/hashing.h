//
// Copyright 2026 The corpusbias Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef CORPUSBIAS_HASHING_H_
#define CORPUSBIAS_HASHING_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace corpusbias {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

// 64-bit FNV-1a. Stable across platforms; used for feature hashing.
constexpr uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace corpusbias

#endif  // CORPUSBIAS_HASHING_H_
