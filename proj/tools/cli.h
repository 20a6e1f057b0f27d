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

#ifndef CORPUSBIAS_TOOLS_CLI_H_
#define CORPUSBIAS_TOOLS_CLI_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace corpusbias::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kInvalidInput = 1;
inline constexpr int kServiceUnavailable = 2;
inline constexpr int kInternalError = 3;

struct Invocation {
  std::string command;  // audit, intervene, bench, debias, analyze, sweep
  std::filesystem::path config;
  std::optional<uint64_t> seed;   // overrides the config's "seed"
  std::filesystem::path resume;   // checkpoint file from an interrupted run
};

// Runs one pipeline and maps failures to exit statuses, reporting them on
// stderr.
int run(const Invocation& invocation);

// Parses `<tool> <subcommand> --config <path> [--seed N] [--resume <path>]`.
int cli_main(int argc, const char* const* argv);

}  // namespace corpusbias::cli

#endif  // CORPUSBIAS_TOOLS_CLI_H_
