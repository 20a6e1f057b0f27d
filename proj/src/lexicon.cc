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

#include "corpusbias/lexicon.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "corpusbias/error.h"
#include "corpusbias/file_io.h"
#include "corpusbias/text.h"

namespace corpusbias {
namespace fs = std::filesystem;
using nlohmann::json;

Term parse_term(std::string_view text) {
  Term term;
  for (auto& token : tokenize(text)) term.push_back(ascii_lower(token));
  return term;
}

std::string term_text(const Term& term) {
  std::string out;
  for (const auto& t : term) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

Lexicon Lexicon::from_json(const json& j) {
  if (!j.is_object()) {
    throw InvalidInput("lexicon must be a JSON object of categories");
  }
  Lexicon lex;
  for (const auto& [category, subs] : j.items()) {
    if (!subs.is_object()) {
      throw InvalidInput("lexicon category \"" + category +
                         "\" must map subcategories to term lists");
    }
    std::map<std::string, std::string> owner;  // term -> subcategory
    for (const auto& [sub, terms] : subs.items()) {
      if (!terms.is_array() || terms.empty()) {
        throw InvalidInput("lexicon " + category + "/" + sub +
                           " must be a non-empty list of terms");
      }
      std::set<Term> seen;
      auto& list = lex.categories[category][sub];
      for (const auto& t : terms) {
        if (!t.is_string()) {
          throw InvalidInput("lexicon " + category + "/" + sub +
                             " contains a non-string term");
        }
        Term term = parse_term(t.get<std::string>());
        if (term.empty()) {
          throw InvalidInput("lexicon " + category + "/" + sub +
                             " contains an empty term");
        }
        if (!seen.insert(term).second) {
          throw InvalidInput("lexicon " + category + "/" + sub +
                             " lists \"" + term_text(term) + "\" twice");
        }
        auto [it, inserted] = owner.emplace(term_text(term), sub);
        if (!inserted) {
          throw InvalidInput("lexicon category " + category + ": term \"" +
                             term_text(term) + "\" appears in both " +
                             it->second + " and " + sub);
        }
        list.push_back(std::move(term));
      }
    }
  }
  return lex;
}

Lexicon Lexicon::load(const fs::path& path) {
  try {
    return from_json(read_json_file(path, "lexicon"));
  } catch (const json::parse_error& e) {
    throw InvalidInput("lexicon " + path.string() + " is not valid JSON: " +
                       e.what());
  }
}

TermMatcher::TermMatcher(
    const std::map<std::string, std::vector<Term>>& terms_by_label) {
  for (const auto& [label, terms] : terms_by_label) {
    labels_.push_back(label);
    for (const auto& term : terms) add(term, labels_.size() - 1);
  }
}

TermMatcher::TermMatcher(std::span<const Term> terms) {
  labels_.push_back("");
  for (const auto& term : terms) add(term, 0);
}

void TermMatcher::add(const Term& term, size_t label) {
  if (term.empty()) return;
  auto& entries = by_first_[term.front()];
  entries.push_back({term, label});
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) {
                     return a.term.size() > b.term.size();
                   });
}

std::vector<TermMatcher::Match> TermMatcher::find(
    std::span<const std::string> tokens) const {
  std::vector<Match> out;
  size_t i = 0;
  while (i < tokens.size()) {
    auto it = by_first_.find(tokens[i]);
    bool matched = false;
    if (it != by_first_.end()) {
      for (const auto& entry : it->second) {
        const size_t len = entry.term.size();
        if (i + len > tokens.size()) continue;
        if (std::equal(entry.term.begin(), entry.term.end(),
                       tokens.begin() + static_cast<ptrdiff_t>(i))) {
          out.push_back({i, len, entry.label});
          i += len;
          matched = true;
          break;
        }
      }
    }
    if (!matched) ++i;
  }
  return out;
}

bool TermMatcher::contains_any(std::span<const std::string> tokens) const {
  return !find(tokens).empty();
}

EmotionLexicon EmotionLexicon::parse_tsv(std::string_view content) {
  std::map<std::string, std::set<std::string>> by_word;
  std::set<std::string> emotions;
  std::set<std::string> words;
  size_t line_no = 0;
  std::istringstream in{std::string(content)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (collapse_whitespace(line).empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::istringstream fs_line(line);
    for (std::string f; std::getline(fs_line, f, '\t');) fields.push_back(f);
    if (fields.size() != 3 || (fields[2] != "0" && fields[2] != "1")) {
      throw InvalidInput("emotion lexicon line " + std::to_string(line_no) +
                         ": expected term<TAB>emotion<TAB>0|1");
    }
    const std::string word = ascii_lower(collapse_whitespace(fields[0]));
    const std::string emotion = ascii_lower(collapse_whitespace(fields[1]));
    words.insert(word);
    emotions.insert(emotion);
    if (fields[2] == "1") by_word[word].insert(emotion);
  }
  EmotionLexicon lex;
  lex.emotions.assign(emotions.begin(), emotions.end());
  for (const auto& w : words) lex.vocabulary[w] = by_word.contains(w);
  for (const auto& [word, tags] : by_word) {
    auto& idx = lex.tags[word];
    for (const auto& e : tags) {
      idx.push_back(static_cast<size_t>(
          std::lower_bound(lex.emotions.begin(), lex.emotions.end(), e) -
          lex.emotions.begin()));
    }
  }
  return lex;
}

EmotionLexicon EmotionLexicon::load(const fs::path& path) {
  return parse_tsv(read_text_file(path, "emotion lexicon"));
}

EmotionLexicon EmotionLexicon::from_map(
    const std::map<std::string, std::vector<std::string>>& terms_by_emotion) {
  EmotionLexicon lex;
  for (const auto& [emotion, terms] : terms_by_emotion) {
    lex.emotions.push_back(ascii_lower(emotion));
  }
  std::sort(lex.emotions.begin(), lex.emotions.end());
  for (const auto& [emotion, terms] : terms_by_emotion) {
    const size_t idx = static_cast<size_t>(
        std::lower_bound(lex.emotions.begin(), lex.emotions.end(),
                         ascii_lower(emotion)) -
        lex.emotions.begin());
    for (const auto& t : terms) {
      const std::string word = ascii_lower(t);
      auto& tags = lex.tags[word];
      if (std::find(tags.begin(), tags.end(), idx) == tags.end()) {
        tags.push_back(idx);
      }
      lex.vocabulary[word] = true;
    }
  }
  return lex;
}

std::vector<Term> terms_from_lines(std::span<const std::string> lines) {
  std::vector<Term> terms;
  for (const auto& line : lines) {
    if (line.empty() || line.front() == '#') continue;
    Term t = parse_term(line);
    if (!t.empty()) terms.push_back(std::move(t));
  }
  return terms;
}

std::vector<Term> load_term_list(const fs::path& path) {
  std::istringstream in(read_text_file(path, "term list"));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    lines.push_back(collapse_whitespace(line));
  }
  return terms_from_lines(lines);
}

}  // namespace corpusbias
