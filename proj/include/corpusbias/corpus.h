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

#ifndef CORPUSBIAS_CORPUS_H_
#define CORPUSBIAS_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace corpusbias {

enum class Sentiment { kNegative, kNeutral, kPositive };

std::string_view sentiment_name(Sentiment s);  // "neg", "neu", "pos"
std::optional<Sentiment> parse_sentiment(std::string_view name);

struct SentenceFlags {
  std::optional<bool> toxic;
  std::optional<bool> hate;
  std::optional<Sentiment> sentiment;

  bool operator==(const SentenceFlags&) const = default;
};

struct Sentence {
  int64_t id = 0;
  int64_t doc_id = 0;
  std::string text;
  std::vector<std::string> tokens;
  std::vector<std::string> lower_tokens;
  SentenceFlags flags;

  // Builds a sentence with tokens derived from `text`. The text is
  // whitespace-collapsed; throws InvalidInput when it ends up empty.
  static Sentence make(int64_t id, int64_t doc_id, std::string_view text,
                       SentenceFlags flags = {});

  bool has_toxicity_flags() const {
    return flags.toxic.has_value() && flags.hate.has_value();
  }
  bool flagged() const {
    return flags.toxic.value_or(false) || flags.hate.value_or(false);
  }
};

// One step in a corpus's history: loading, an intervention, an annotation.
struct ProvenanceEntry {
  std::string operation;
  nlohmann::json details = nlohmann::json::object();
};

// Ordered sentences grouped into documents. Documents are maximal runs of
// consecutive sentences sharing a doc_id. Immutable: transformations return a
// new corpus via derive().
class Corpus {
 public:
  Corpus() = default;
  // Throws InvalidInput unless sentence ids are strictly increasing.
  Corpus(std::string name, std::vector<Sentence> sentences,
         std::vector<ProvenanceEntry> provenance = {});

  const std::string& name() const { return name_; }
  std::span<const Sentence> sentences() const { return sentences_; }
  const Sentence& operator[](size_t i) const { return sentences_[i]; }
  const std::vector<ProvenanceEntry>& provenance() const {
    return provenance_;
  }
  size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }

  // Document runs, in order.
  std::vector<std::span<const Sentence>> documents() const;

  // New corpus with the same name, renumbered sentence ids and `entry`
  // appended to the provenance.
  Corpus derive(std::vector<Sentence> sentences, ProvenanceEntry entry) const;

 private:
  std::string name_;
  std::vector<Sentence> sentences_;
  std::vector<ProvenanceEntry> provenance_;
};

enum class CorpusFormat { kPlaintext, kJsonl };

CorpusFormat parse_corpus_format(std::string_view name);
std::string_view corpus_format_name(CorpusFormat format);

// Plaintext: blank lines separate documents; every other line is segmented
// into sentences. Jsonl: one object per line with a required "text" and an
// optional "doc_id" (record index otherwise); optional "toxic", "hate" and
// "sentiment" fields restore annotations. A sidecar manifest next to the file
// (see manifest_path) restores the name and provenance.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

// Writes one sentence per line (plaintext) or per record (jsonl) plus the
// sidecar manifest.
void write_corpus(const Corpus& corpus, const std::filesystem::path& path,
                  CorpusFormat format);

// "<dir>/<stem>.manifest.json" for "<dir>/<stem>.<ext>".
std::filesystem::path manifest_path(const std::filesystem::path& corpus_path);

// Segments raw text (one line or many) into sentences of document 0 with ids
// starting at 0.
std::vector<Sentence> segment_and_tokenize(std::string_view raw_text);

struct Chunk {
  std::vector<std::string> tokens;
  int64_t doc_id = 0;
  size_t start = 0;  // token offset within the document
};

// Tiles every document into windows of n tokens; only a document's final
// window may be shorter. Throws InvalidInput for n == 0.
std::vector<Chunk> chunk_tokens(const Corpus& corpus, size_t n);

struct CorpusSummary {
  size_t sentences = 0;
  size_t tokens = 0;
  size_t documents = 0;
  size_t unique_tokens = 0;  // case-insensitive

  bool operator==(const CorpusSummary&) const = default;
};

CorpusSummary corpus_summary(const Corpus& corpus);

// Token-count ratio after/before, e.g. the growth caused by augmentation.
double token_growth(const Corpus& before, const Corpus& after);

nlohmann::json summary_to_json(const CorpusSummary& summary);

// SHA-256 over document ids and sentence texts; identifies a corpus's
// content independent of its name and provenance.
std::string corpus_fingerprint(const Corpus& corpus);

}  // namespace corpusbias

#endif  // CORPUSBIAS_CORPUS_H_
