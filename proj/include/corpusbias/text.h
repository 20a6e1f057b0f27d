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

#ifndef CORPUSBIAS_TEXT_H_
#define CORPUSBIAS_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace corpusbias {

bool is_valid_utf8(std::string_view text);

// Number of code points; assumes valid UTF-8.
size_t utf8_length(std::string_view text);

// ASCII-only case folding. Bytes outside ASCII pass through unchanged.
std::string ascii_lower(std::string_view text);

// Trims and collapses every run of ASCII whitespace to a single space.
std::string collapse_whitespace(std::string_view text);

// A token with its byte range in the text it was cut from.
struct TokenSpan {
  std::string text;
  size_t begin = 0;
  size_t end = 0;
};

// Whitespace split after separating leading/trailing punctuation into their
// own tokens. A trailing period stays attached when the token is a known
// abbreviation ("Dr.", "e.g."). Apostrophes inside words are kept.
std::vector<TokenSpan> tokenize_spans(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

// Splits one line of running text into sentences. A boundary is a run of
// . ! ? (plus closing quotes/brackets) followed by whitespace and an
// uppercase letter, or by the end of the text. A lone period after a
// stop-listed abbreviation never splits. Returned sentences are
// whitespace-collapsed and non-empty.
std::vector<std::string> split_sentences(std::string_view text);

bool is_abbreviation(std::string_view token);

// True when the token has at least one ASCII letter or digit, or any
// non-ASCII byte (non-Latin scripts count as words).
bool is_word(std::string_view token);

enum class CasePattern { kLower, kTitle, kUpper };

CasePattern case_pattern(std::string_view token);

// Re-applies a casing pattern to a lowercase replacement.
std::string apply_case(std::string_view lower, CasePattern pattern);

}  // namespace corpusbias

#endif  // CORPUSBIAS_TEXT_H_
