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

#ifndef CORPUSBIAS_LEXICON_H_
#define CORPUSBIAS_LEXICON_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace corpusbias {

// A lowercase token sequence; multi-token terms match contiguous runs.
using Term = std::vector<std::string>;

// Splits and lowercases a term written as text ("grand mother").
Term parse_term(std::string_view text);
std::string term_text(const Term& term);

// category -> subcategory -> terms.
struct Lexicon {
  std::map<std::string, std::map<std::string, std::vector<Term>>> categories;

  bool empty() const { return categories.empty(); }

  // JSON {category: {subcategory: [terms]}}. Validates: no empty term lists,
  // no duplicate terms within a subcategory, and no term shared by two
  // subcategories of the same category (percentages must not double count).
  static Lexicon from_json(const nlohmann::json& j);
  static Lexicon load(const std::filesystem::path& path);
};

// Longest-first, left-to-right matcher over labelled terms. Matches never
// overlap.
class TermMatcher {
 public:
  struct Match {
    size_t begin = 0;
    size_t length = 0;
    size_t label = 0;  // index into labels()
  };

  TermMatcher() = default;
  explicit TermMatcher(
      const std::map<std::string, std::vector<Term>>& terms_by_label);
  // Single-label convenience.
  explicit TermMatcher(std::span<const Term> terms);

  const std::vector<std::string>& labels() const { return labels_; }
  bool empty() const { return by_first_.empty(); }

  std::vector<Match> find(std::span<const std::string> lower_tokens) const;
  bool contains_any(std::span<const std::string> lower_tokens) const;

 private:
  struct Entry {
    Term term;
    size_t label;
  };
  void add(const Term& term, size_t label);

  std::vector<std::string> labels_;
  // Entries keyed by first token, longest term first.
  std::unordered_map<std::string, std::vector<Entry>> by_first_;
};

// Word -> emotion tags, NRC style. Every word listed in the file is part of
// the vocabulary, including words whose flags are all 0.
struct EmotionLexicon {
  std::vector<std::string> emotions;  // sorted
  std::unordered_map<std::string, std::vector<size_t>> tags;  // word -> emotions
  std::unordered_map<std::string, bool> vocabulary;           // word -> tagged

  // TSV "term<TAB>emotion<TAB>0|1". Blank and '#' lines are skipped.
  static EmotionLexicon parse_tsv(std::string_view content);
  static EmotionLexicon load(const std::filesystem::path& path);
  static EmotionLexicon from_map(
      const std::map<std::string, std::vector<std::string>>& terms_by_emotion);
};

// Reads a newline-separated term list ('#' comments allowed).
std::vector<Term> load_term_list(const std::filesystem::path& path);
std::vector<Term> terms_from_lines(std::span<const std::string> lines);

}  // namespace corpusbias

#endif  // CORPUSBIAS_LEXICON_H_
