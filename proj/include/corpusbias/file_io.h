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

#ifndef CORPUSBIAS_FILE_IO_H_
#define CORPUSBIAS_FILE_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace corpusbias {

// Whole-file read. Throws InvalidInput "cannot open <what>: <path>".
std::string read_text_file(const std::filesystem::path& path,
                           std::string_view what = "file");
// Parses a JSON file; parse errors become InvalidInput naming the path.
nlohmann::json read_json_file(const std::filesystem::path& path,
                              std::string_view what = "file");
// Writes through a temporary file and a rename, creating parent
// directories. Throws Error when the destination is not writable.
void write_text_file(const std::filesystem::path& path,
                     std::string_view content);

}  // namespace corpusbias

#endif  // CORPUSBIAS_FILE_IO_H_
