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

#ifndef CORPUSBIAS_CHECKPOINT_H_
#define CORPUSBIAS_CHECKPOINT_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"

namespace corpusbias {

// Per-item results of a long-running external-service operation, persisted so
// that a failed run can resume where it stopped. A checkpoint only resumes
// runs with the same operation name and input fingerprint; a mismatching file
// is ignored (and overwritten on the next save).
class Checkpoint {
 public:
  // An empty path gives an in-memory checkpoint that never touches disk.
  Checkpoint(std::filesystem::path path, std::string operation,
             std::string fingerprint);

  bool persistent() const { return !path_.empty(); }
  const std::filesystem::path& path() const { return path_; }
  size_t size() const;

  std::optional<nlohmann::json> get(size_t index) const;
  void put(size_t index, nlohmann::json value);

  // Atomically rewrites the file (no-op without a path).
  void save() const;
  // Deletes the file after a successful run.
  void remove() const;

 private:
  std::filesystem::path path_;
  std::string operation_;
  std::string fingerprint_;
  mutable std::mutex mu_;
  std::map<size_t, nlohmann::json> entries_;
};

}  // namespace corpusbias

#endif  // CORPUSBIAS_CHECKPOINT_H_
