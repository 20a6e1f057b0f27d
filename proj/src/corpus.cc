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

#include "corpusbias/corpus.h"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "corpusbias/error.h"
#include "corpusbias/file_io.h"
#include "corpusbias/hashing.h"
#include "corpusbias/logging.h"
#include "corpusbias/text.h"

namespace corpusbias {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  while (!content.empty()) {
    const size_t nl = content.find('\n');
    std::string_view line = content.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    content.remove_prefix(nl + 1);
  }
  return lines;
}

void check_utf8(std::string_view content, const fs::path& path) {
  if (is_valid_utf8(content)) return;
  size_t line_no = 1;
  for (std::string_view line : split_lines(content)) {
    if (!is_valid_utf8(line)) break;
    ++line_no;
  }
  throw InvalidInput("malformed UTF-8 in " + path.string() + " at line " +
                     std::to_string(line_no));
}

json flags_to_json(const SentenceFlags& flags) {
  json out = json::object();
  if (flags.toxic) out["toxic"] = *flags.toxic;
  if (flags.hate) out["hate"] = *flags.hate;
  if (flags.sentiment) out["sentiment"] = sentiment_name(*flags.sentiment);
  return out;
}

SentenceFlags flags_from_json(const json& record, size_t line_no) {
  SentenceFlags flags;
  auto read_bool = [&](const char* key) -> std::optional<bool> {
    auto it = record.find(key);
    if (it == record.end() || it->is_null()) return std::nullopt;
    if (!it->is_boolean()) {
      throw InvalidInput("line " + std::to_string(line_no) + ": field \"" +
                         key + "\" must be a boolean");
    }
    return it->get<bool>();
  };
  flags.toxic = read_bool("toxic");
  flags.hate = read_bool("hate");
  if (auto it = record.find("sentiment");
      it != record.end() && !it->is_null()) {
    auto parsed =
        it->is_string() ? parse_sentiment(it->get<std::string>()) : std::nullopt;
    if (!parsed) {
      throw InvalidInput("line " + std::to_string(line_no) +
                         ": field \"sentiment\" must be pos, neu or neg");
    }
    flags.sentiment = parsed;
  }
  return flags;
}

json manifest_json(const Corpus& corpus, CorpusFormat format) {
  json provenance = json::array();
  for (const auto& entry : corpus.provenance()) {
    provenance.push_back(
        {{"operation", entry.operation}, {"details", entry.details}});
  }
  return {{"name", corpus.name()},
          {"format", corpus_format_name(format)},
          {"sentences", corpus.size()},
          {"provenance", std::move(provenance)}};
}

}  // namespace

std::string_view sentiment_name(Sentiment s) {
  switch (s) {
    case Sentiment::kNegative:
      return "neg";
    case Sentiment::kNeutral:
      return "neu";
    case Sentiment::kPositive:
      return "pos";
  }
  return "neu";
}

std::optional<Sentiment> parse_sentiment(std::string_view name) {
  const std::string lower = ascii_lower(name);
  if (lower == "pos" || lower == "positive") return Sentiment::kPositive;
  if (lower == "neu" || lower == "neutral") return Sentiment::kNeutral;
  if (lower == "neg" || lower == "negative") return Sentiment::kNegative;
  return std::nullopt;
}

Sentence Sentence::make(int64_t id, int64_t doc_id, std::string_view text,
                        SentenceFlags flags) {
  Sentence s;
  s.id = id;
  s.doc_id = doc_id;
  s.text = collapse_whitespace(text);
  if (s.text.empty()) {
    throw InvalidInput("sentence " + std::to_string(id) + " has empty text");
  }
  s.tokens = tokenize(s.text);
  s.lower_tokens.reserve(s.tokens.size());
  for (const auto& t : s.tokens) s.lower_tokens.push_back(ascii_lower(t));
  s.flags = flags;
  return s;
}

Corpus::Corpus(std::string name, std::vector<Sentence> sentences,
               std::vector<ProvenanceEntry> provenance)
    : name_(std::move(name)),
      sentences_(std::move(sentences)),
      provenance_(std::move(provenance)) {
  for (size_t i = 1; i < sentences_.size(); ++i) {
    if (sentences_[i].id <= sentences_[i - 1].id) {
      throw InvalidInput("sentence ids must be strictly increasing (id " +
                         std::to_string(sentences_[i].id) + " follows " +
                         std::to_string(sentences_[i - 1].id) + ")");
    }
  }
}

std::vector<std::span<const Sentence>> Corpus::documents() const {
  std::vector<std::span<const Sentence>> docs;
  size_t begin = 0;
  for (size_t i = 1; i <= sentences_.size(); ++i) {
    if (i == sentences_.size() ||
        sentences_[i].doc_id != sentences_[begin].doc_id) {
      if (i > begin) {
        docs.emplace_back(sentences_.data() + begin, i - begin);
      }
      begin = i;
    }
  }
  return docs;
}

Corpus Corpus::derive(std::vector<Sentence> sentences,
                      ProvenanceEntry entry) const {
  for (size_t i = 0; i < sentences.size(); ++i) {
    sentences[i].id = static_cast<int64_t>(i);
  }
  auto provenance = provenance_;
  provenance.push_back(std::move(entry));
  return Corpus(name_, std::move(sentences), std::move(provenance));
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "plaintext" || name == "txt") return CorpusFormat::kPlaintext;
  if (name == "jsonl") return CorpusFormat::kJsonl;
  throw InvalidInput("unknown corpus format: " + std::string(name) +
                     " (expected plaintext or jsonl)");
}

std::string_view corpus_format_name(CorpusFormat format) {
  return format == CorpusFormat::kPlaintext ? "plaintext" : "jsonl";
}

fs::path manifest_path(const fs::path& corpus_path) {
  fs::path out = corpus_path;
  out.replace_extension(".manifest.json");
  return out;
}

std::vector<Sentence> segment_and_tokenize(std::string_view raw_text) {
  std::vector<Sentence> out;
  for (std::string_view line : split_lines(raw_text)) {
    for (const auto& text : split_sentences(line)) {
      out.push_back(
          Sentence::make(static_cast<int64_t>(out.size()), 0, text));
    }
  }
  return out;
}

Corpus load_corpus(const fs::path& path, CorpusFormat format) {
  if (!fs::exists(path)) {
    throw InvalidInput("corpus file not found: " + path.string());
  }
  const std::string content = read_text_file(path, "corpus file");
  check_utf8(content, path);

  std::vector<Sentence> sentences;
  auto add = [&](int64_t doc_id, std::string_view text, SentenceFlags flags) {
    for (const auto& piece : split_sentences(text)) {
      sentences.push_back(Sentence::make(
          static_cast<int64_t>(sentences.size()), doc_id, piece, flags));
    }
  };

  const auto lines = split_lines(content);
  if (format == CorpusFormat::kPlaintext) {
    int64_t doc_id = 0;
    bool doc_has_text = false;
    for (std::string_view line : lines) {
      if (collapse_whitespace(line).empty()) {
        if (doc_has_text) ++doc_id;
        doc_has_text = false;
        continue;
      }
      add(doc_id, line, {});
      doc_has_text = true;
    }
  } else {
    int64_t record_index = 0;
    for (size_t i = 0; i < lines.size(); ++i) {
      const size_t line_no = i + 1;
      if (collapse_whitespace(lines[i]).empty()) continue;
      json record;
      try {
        record = json::parse(lines[i]);
      } catch (const json::parse_error& e) {
        throw InvalidInput(path.string() + ": line " + std::to_string(line_no) +
                           " is not valid JSON");
      }
      auto text = record.find("text");
      if (!record.is_object() || text == record.end() || !text->is_string()) {
        throw InvalidInput(path.string() + ": line " + std::to_string(line_no) +
                           " lacks a string \"text\" field");
      }
      int64_t doc_id = record_index;
      if (auto d = record.find("doc_id"); d != record.end() && !d->is_null()) {
        if (!d->is_number_integer()) {
          throw InvalidInput(path.string() + ": line " +
                             std::to_string(line_no) +
                             " has a non-integer \"doc_id\"");
        }
        doc_id = d->get<int64_t>();
      }
      add(doc_id, text->get<std::string>(), flags_from_json(record, line_no));
      ++record_index;
    }
  }

  std::string name = path.stem().string();
  std::vector<ProvenanceEntry> provenance;
  if (const fs::path sidecar = manifest_path(path); fs::exists(sidecar)) {
    try {
      const json manifest = json::parse(read_text_file(sidecar, "manifest"));
      name = manifest.value("name", name);
      for (const auto& entry : manifest.value("provenance", json::array())) {
        provenance.push_back({entry.at("operation").get<std::string>(),
                              entry.value("details", json::object())});
      }
    } catch (const json::exception& e) {
      throw InvalidInput("malformed corpus manifest " + sidecar.string() +
                         ": " + e.what());
    }
  }
  provenance.push_back({"load_corpus",
                        {{"path", path.string()},
                         {"format", corpus_format_name(format)}}});
  if (sentences.empty()) {
    log_warning("corpus " + path.string() + " contains no sentences");
  }
  return Corpus(std::move(name), std::move(sentences), std::move(provenance));
}

void write_corpus(const Corpus& corpus, const fs::path& path,
                  CorpusFormat format) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write corpus file: " + path.string());
  if (format == CorpusFormat::kPlaintext) {
    bool first = true;
    for (auto doc : corpus.documents()) {
      if (!first) out << '\n';
      first = false;
      for (const auto& s : doc) out << s.text << '\n';
    }
  } else {
    for (const auto& s : corpus.sentences()) {
      json record = {{"doc_id", s.doc_id}, {"text", s.text}};
      record.update(flags_to_json(s.flags));
      out << record.dump() << '\n';
    }
  }
  out.close();
  if (!out) throw InvalidInput("failed writing corpus file: " + path.string());

  std::ofstream manifest(manifest_path(path), std::ios::binary | std::ios::trunc);
  if (!manifest) {
    throw InvalidInput("cannot write corpus manifest: " +
                       manifest_path(path).string());
  }
  manifest << manifest_json(corpus, format).dump(2) << '\n';
}

std::vector<Chunk> chunk_tokens(const Corpus& corpus, size_t n) {
  if (n == 0) throw InvalidInput("chunk length must be at least 1");
  std::vector<Chunk> chunks;
  for (auto doc : corpus.documents()) {
    std::vector<std::string> tokens;
    for (const auto& s : doc) {
      tokens.insert(tokens.end(), s.tokens.begin(), s.tokens.end());
    }
    for (size_t start = 0; start < tokens.size(); start += n) {
      const size_t end = std::min(tokens.size(), start + n);
      Chunk chunk;
      chunk.tokens.assign(tokens.begin() + static_cast<ptrdiff_t>(start),
                          tokens.begin() + static_cast<ptrdiff_t>(end));
      chunk.doc_id = doc.front().doc_id;
      chunk.start = start;
      chunks.push_back(std::move(chunk));
    }
  }
  return chunks;
}

CorpusSummary corpus_summary(const Corpus& corpus) {
  CorpusSummary summary;
  std::unordered_set<std::string> types;
  summary.sentences = corpus.size();
  summary.documents = corpus.documents().size();
  for (const auto& s : corpus.sentences()) {
    summary.tokens += s.tokens.size();
    types.insert(s.lower_tokens.begin(), s.lower_tokens.end());
  }
  summary.unique_tokens = types.size();
  return summary;
}

double token_growth(const Corpus& before, const Corpus& after) {
  const auto b = corpus_summary(before).tokens;
  if (b == 0) return 1.0;
  return static_cast<double>(corpus_summary(after).tokens) /
         static_cast<double>(b);
}

json summary_to_json(const CorpusSummary& summary) {
  return {{"sentences", summary.sentences},
          {"tokens", summary.tokens},
          {"documents", summary.documents},
          {"unique_tokens", summary.unique_tokens}};
}

std::string corpus_fingerprint(const Corpus& corpus) {
  std::string data;
  for (const auto& s : corpus.sentences()) {
    data += std::to_string(s.doc_id);
    data.push_back('\t');
    data += s.text;
    data.push_back('\n');
  }
  return sha256_hex(data);
}

}  // namespace corpusbias
