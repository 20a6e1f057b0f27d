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

#ifndef CORPUSBIAS_RESOURCES_H_
#define CORPUSBIAS_RESOURCES_H_

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace corpusbias {

// Contents of a data file shipped with the library (see data/). Throws
// InvalidInput for unknown names.
std::string_view resource(std::string_view name);

// Non-empty, non-comment lines of a shipped word list, trimmed.
std::vector<std::string> resource_lines(std::string_view name);

// Same lines as a set; parsed once per name and cached.
const std::unordered_set<std::string>& resource_set(std::string_view name);

}  // namespace corpusbias

#endif  // CORPUSBIAS_RESOURCES_H_
