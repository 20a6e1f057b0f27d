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

#include "corpusbias/resources.h"

#include <map>
#include <memory>
#include <mutex>

#include "corpusbias/error.h"
#include "corpusbias/text.h"

namespace corpusbias {
namespace internal {
const std::map<std::string, std::string_view, std::less<>>& embedded_files();
}  // namespace internal

std::string_view resource(std::string_view name) {
  const auto& files = internal::embedded_files();
  auto it = files.find(name);
  if (it == files.end()) {
    throw InvalidInput("unknown resource: " + std::string(name));
  }
  return it->second;
}

std::vector<std::string> resource_lines(std::string_view name) {
  std::vector<std::string> lines;
  std::string_view content = resource(name);
  while (!content.empty()) {
    const size_t nl = content.find('\n');
    std::string line = collapse_whitespace(content.substr(0, nl));
    content.remove_prefix(nl == std::string_view::npos ? content.size()
                                                       : nl + 1);
    if (line.empty() || line.front() == '#') continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

const std::unordered_set<std::string>& resource_set(std::string_view name) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<std::unordered_set<std::string>>,
                  std::less<>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(name);
  if (it == cache.end()) {
    auto lines = resource_lines(name);
    auto set = std::make_unique<std::unordered_set<std::string>>(lines.begin(),
                                                                 lines.end());
    it = cache.emplace(std::string(name), std::move(set)).first;
  }
  return *it->second;
}

}  // namespace corpusbias
