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

#ifndef CORPUSBIAS_AUDIT_H_
#define CORPUSBIAS_AUDIT_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "corpusbias/clients.h"
#include "corpusbias/corpus.h"
#include "corpusbias/lexicon.h"
#include "json.hpp"

namespace corpusbias {

// category -> subcategory -> value.
template <typename T>
using CategoryTable = std::map<std::string, std::map<std::string, T>>;

// Percentage of all corpus tokens covered by each subcategory's terms.
// Matching is case-insensitive; multi-token terms match contiguous runs and
// overlaps resolve longest-first, left-to-right within a category. Throws
// InvalidInput for an empty lexicon or a corpus without tokens.
CategoryTable<double> keyword_frequency(const Corpus& corpus,
                                        const Lexicon& lexicon);

struct StructuralStats {
  double avg_syllables_per_word = 0;
  double avg_word_length = 0;     // code points per word
  double avg_sentence_length = 0; // words per sentence
  double fkgl = 0;
  double ttr = 0;                 // unique lowercased tokens / tokens
  double pronoun_noun_ratio = 0;  // pronouns / content-word proxy
  size_t words = 0;
  size_t sentences = 0;
};

// Flesch-Kincaid grade level from average sentence length (words) and
// average syllables per word.
constexpr double flesch_kincaid_grade(double avg_sentence_length,
                                      double avg_syllables_per_word) {
  return 0.39 * avg_sentence_length + 11.8 * avg_syllables_per_word - 15.59;
}

// Vowel-group heuristic: maximal runs of a/e/i/o/u/y, minus one for a
// terminal silent 'e' when more than one run was found, at least 1.
int count_syllables(std::string_view word);

// Words are tokens containing a letter or digit. The content-word proxy
// counts words that are neither pronouns nor function words (shipped
// closed-class lists). Throws InvalidInput on a corpus without words.
StructuralStats structural_stats(const Corpus& corpus);

// Share of each emotion among the eligible tokens, i.e. tokens that appear in
// the lexicon vocabulary. A token tagged with several emotions counts toward
// each. All zeros (with a warning) when nothing is eligible. The lexicon must
// cover joy, sadness, fear, surprise, anger and disgust.
std::map<std::string, double> emotion_scores(const Corpus& corpus,
                                             const EmotionLexicon& lexicon);

struct BatchOptions {
  size_t batch_size = 64;
  size_t concurrency = 1;
  // Resume file for external-service runs; empty disables checkpointing.
  std::filesystem::path checkpoint;
};

struct SentimentResult {
  double pos_pct = 0;
  double neu_pct = 0;
  double neg_pct = 0;
  // pos% - neg% over sentences mentioning the topic; nullopt if none do.
  CategoryTable<std::optional<double>> stance;
  size_t failures = 0;  // sentences counted neutral after a failure
  Corpus annotated;     // sentiment flags set
};

SentimentResult sentiment_analysis(const Corpus& corpus,
                                   const SentimentClassifier& classifier,
                                   const Lexicon& topics,
                                   const BatchOptions& options = {});

struct ToxicityResult {
  double toxic_pct = 0;
  double hate_pct = 0;
  double flagged_pct = 0;  // toxic or hateful
  size_t toxic = 0;
  size_t hate = 0;
  size_t flagged = 0;
  Corpus flagged_corpus;  // toxic/hate flags set on every sentence
};

// Flags a sentence when a classifier's probability is >= threshold. When a
// classifier becomes unreachable the finished batches are written to
// options.checkpoint and ServiceUnavailable is rethrown naming that file;
// rerunning with the same checkpoint skips the finished batches.
ToxicityResult toxicity_rates(const Corpus& corpus,
                              const ProbabilityClassifier& toxicity,
                              const ProbabilityClassifier& hate,
                              double threshold = 0.5,
                              const BatchOptions& options = {});

// Mean cosine similarity of consecutive sentences within documents, pooled
// over all pairs (documents weighted by pair count). Throws InvalidInput
// when no document has two sentences.
double first_order_coherence(const Corpus& corpus,
                             const SentenceEmbedder& embedder);

struct AuditReport {
  CorpusSummary summary;
  std::optional<CategoryTable<double>> keyword_pct;
  std::optional<StructuralStats> structural;
  std::optional<std::map<std::string, double>> emotion;
  std::optional<SentimentResult> sentiment;
  std::optional<ToxicityResult> toxicity;
  std::optional<double> coherence;
};

nlohmann::json audit_to_json(const AuditReport& report);

// One CSV per populated table (keywords.csv, structural.csv, emotion.csv,
// sentiment.csv, stance.csv, toxicity.csv) in `dir`.
void write_audit_csv(const AuditReport& report,
                     const std::filesystem::path& dir);

}  // namespace corpusbias

#endif  // CORPUSBIAS_AUDIT_H_
