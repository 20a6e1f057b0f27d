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

#ifndef CORPUSBIAS_CSV_H_
#define CORPUSBIAS_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace corpusbias {

using CsvRow = std::vector<std::string>;

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and line
// breaks. Accepts \n or \r\n line endings. Throws InvalidInput on an
// unterminated quote.
std::vector<CsvRow> parse_csv(std::string_view content);

// Quotes a field when it contains a comma, quote or line break.
std::string csv_field(std::string_view value);
std::string csv_line(const CsvRow& fields);

// Shortest round-trippable decimal form ("%.17g" trimmed), "nan"/"inf" for
// non-finite values. Deterministic across runs.
std::string format_number(double value);

}  // namespace corpusbias

#endif  // CORPUSBIAS_CSV_H_
