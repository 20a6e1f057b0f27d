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

#include "corpusbias/text.h"

#include <cctype>

#include "corpusbias/resources.h"

namespace corpusbias {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_ascii_lower(char c) { return c >= 'a' && c <= 'z'; }

// Multi-byte quote marks treated as punctuation.
constexpr std::string_view kOpenQuotes[] = {"“", "‘", "«"};
constexpr std::string_view kCloseQuotes[] = {"”", "’", "»"};

// Length of the leading-punctuation unit at the start of `s`, or 0.
size_t leading_punct(std::string_view s) {
  if (s.empty()) return 0;
  switch (s.front()) {
    case '"':
    case '(':
    case '[':
    case '{':
      return 1;
    default:
      break;
  }
  for (auto q : kOpenQuotes) {
    if (s.starts_with(q)) return q.size();
  }
  return 0;
}

// Length of the trailing-punctuation unit at the end of `s`, or 0.
size_t trailing_punct(std::string_view s) {
  if (s.empty()) return 0;
  switch (s.back()) {
    case '.':
    case ',':
    case '!':
    case '?':
    case ';':
    case ':':
    case '"':
    case ')':
    case ']':
    case '}':
      return 1;
    default:
      break;
  }
  for (auto q : kCloseQuotes) {
    if (s.ends_with(q)) return q.size();
  }
  return 0;
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(std::string_view s, size_t i, size_t* len) {
  const char c = s[i];
  if (c == '"' || c == '\'' || c == ')' || c == ']' || c == '}') {
    *len = 1;
    return true;
  }
  for (auto q : kCloseQuotes) {
    if (s.substr(i).starts_with(q)) {
      *len = q.size();
      return true;
    }
  }
  return false;
}

// Whether the sentence may start at position i (after whitespace).
bool starts_sentence(std::string_view s, size_t i) {
  while (i < s.size()) {
    const size_t open = leading_punct(s.substr(i));
    if (open == 0) break;
    i += open;
  }
  return i < s.size() && is_ascii_upper(s[i]);
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    size_t extra = 0;
    uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= n) return false;
    for (size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong encodings, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

size_t utf8_length(std::string_view text) {
  size_t count = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++count;
  }
  return count;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (is_ascii_upper(c)) c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

bool is_abbreviation(std::string_view token) {
  return resource_set("abbreviations.txt").contains(ascii_lower(token));
}

std::vector<TokenSpan> tokenize_spans(std::string_view text) {
  std::vector<TokenSpan> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j == i) break;
    size_t begin = i;
    size_t end = j;
    std::vector<TokenSpan> tail;
    while (begin < end) {
      const size_t n = leading_punct(text.substr(begin, end - begin));
      if (n == 0) break;
      out.push_back({std::string(text.substr(begin, n)), begin, begin + n});
      begin += n;
    }
    while (begin < end) {
      const std::string_view piece = text.substr(begin, end - begin);
      const size_t n = trailing_punct(piece);
      if (n == 0) break;
      if (piece.back() == '.' && piece.size() > 1 && is_abbreviation(piece)) {
        break;
      }
      tail.push_back({std::string(text.substr(end - n, n)), end - n, end});
      end -= n;
    }
    if (begin < end) {
      out.push_back({std::string(text.substr(begin, end - begin)), begin, end});
    }
    out.insert(out.end(), tail.rbegin(), tail.rend());
    i = j;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& span : tokenize_spans(text)) out.push_back(std::move(span.text));
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  auto emit = [&](std::string_view piece) {
    std::string sentence = collapse_whitespace(piece);
    if (!sentence.empty()) out.push_back(std::move(sentence));
  };
  size_t start = 0;
  size_t i = 0;
  while (i < text.size()) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    const size_t terminal_begin = i;
    while (i < text.size() && is_terminal(text[i])) ++i;
    size_t closer_len = 0;
    while (i < text.size() && is_closer(text, i, &closer_len)) i += closer_len;
    const size_t end = i;

    if (end - terminal_begin == 1 && text[terminal_begin] == '.') {
      // Word ending in this period, from the previous whitespace.
      size_t w = terminal_begin;
      while (w > start && !is_space(text[w - 1])) --w;
      std::string_view word = text.substr(w, terminal_begin + 1 - w);
      while (!word.empty() && leading_punct(word) > 0) {
        word.remove_prefix(leading_punct(word));
      }
      if (word.size() > 1 && is_abbreviation(word)) continue;
    }

    size_t k = end;
    while (k < text.size() && is_space(text[k])) ++k;
    if (k == text.size()) break;
    if (k > end && starts_sentence(text, k)) {
      emit(text.substr(start, end - start));
      start = k;
      i = k;
    }
  }
  emit(text.substr(start));
  return out;
}

bool is_word(std::string_view token) {
  for (unsigned char c : token) {
    if (c >= 0x80 || std::isalnum(c)) return true;
  }
  return false;
}

CasePattern case_pattern(std::string_view token) {
  size_t letters = 0;
  size_t upper = 0;
  for (char c : token) {
    if (is_ascii_upper(c)) {
      ++letters;
      ++upper;
    } else if (is_ascii_lower(c)) {
      ++letters;
    }
  }
  if (letters > 1 && upper == letters) return CasePattern::kUpper;
  for (char c : token) {
    if (is_ascii_upper(c)) return CasePattern::kTitle;
    if (is_ascii_lower(c)) return CasePattern::kLower;
  }
  return CasePattern::kLower;
}

std::string apply_case(std::string_view lower, CasePattern pattern) {
  std::string out(lower);
  switch (pattern) {
    case CasePattern::kLower:
      break;
    case CasePattern::kUpper:
      for (char& c : out) {
        if (is_ascii_lower(c)) c = static_cast<char>(c - 'a' + 'A');
      }
      break;
    case CasePattern::kTitle:
      for (char& c : out) {
        if (is_ascii_lower(c)) {
          c = static_cast<char>(c - 'a' + 'A');
          break;
        }
        if (is_ascii_upper(c)) break;
      }
      break;
  }
  return out;
}

}  // namespace corpusbias
