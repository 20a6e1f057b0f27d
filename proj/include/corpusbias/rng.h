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

#ifndef CORPUSBIAS_RNG_H_
#define CORPUSBIAS_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace corpusbias {

// Seeded generator whose outputs are identical on every platform. The
// standard distributions are implementation-defined, so sampling helpers are
// written out here on top of the raw mt19937_64 stream.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : engine_(seed) {}

  // Independent stream for item `index` of a run seeded with `seed`.
  static SeededRng for_item(uint64_t seed, uint64_t index);

  uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be positive.
  size_t uniform_index(size_t n);

  // Uniform in [0, 1).
  double uniform_real() { return (next() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace corpusbias

#endif  // CORPUSBIAS_RNG_H_
