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

#include "corpusbias/checkpoint.h"

#include <fstream>
#include <sstream>

#include "corpusbias/error.h"
#include "corpusbias/logging.h"

namespace corpusbias {
namespace fs = std::filesystem;
using nlohmann::json;

Checkpoint::Checkpoint(fs::path path, std::string operation,
                       std::string fingerprint)
    : path_(std::move(path)),
      operation_(std::move(operation)),
      fingerprint_(std::move(fingerprint)) {
  if (path_.empty() || !fs::exists(path_)) return;
  std::ifstream in(path_, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error&) {
    log_warning("ignoring unreadable checkpoint " + path_.string());
    return;
  }
  if (j.value("operation", "") != operation_ ||
      j.value("fingerprint", "") != fingerprint_) {
    log_warning("checkpoint " + path_.string() +
                " belongs to a different run; starting from scratch");
    return;
  }
  const json entries = j.value("entries", json::object());
  for (const auto& [key, value] : entries.items()) {
    entries_[std::stoull(key)] = value;
  }
  log_info("resuming " + operation_ + " from " + path_.string() + " (" +
           std::to_string(entries_.size()) + " items done)");
}

size_t Checkpoint::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

std::optional<json> Checkpoint::get(size_t index) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(index);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Checkpoint::put(size_t index, json value) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_[index] = std::move(value);
}

void Checkpoint::save() const {
  if (path_.empty()) return;
  json entries = json::object();
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [k, v] : entries_) entries[std::to_string(k)] = v;
  }
  const json doc = {{"operation", operation_},
                    {"fingerprint", fingerprint_},
                    {"entries", std::move(entries)}};
  if (path_.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path_.parent_path(), ec);
  }
  fs::path tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + tmp.string());
    out << doc.dump();
  }
  fs::rename(tmp, path_);
}

void Checkpoint::remove() const {
  if (path_.empty()) return;
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace corpusbias
