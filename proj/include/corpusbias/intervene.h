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

#ifndef CORPUSBIAS_INTERVENE_H_
#define CORPUSBIAS_INTERVENE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corpusbias/audit.h"
#include "corpusbias/clients.h"
#include "corpusbias/corpus.h"
#include "json.hpp"

namespace corpusbias {

// Bidirectional single-token swap table with optional context rules.
//
// A term may appear in several pairs as long as it always sits on the same
// side; the first pair listing it gives its default replacement and context
// rules choose among the others ("her" -> "his" by default, "him" when no
// content word follows).
class WordPairTable {
 public:
  enum class Predicate {
    kAlways,
    kNextContentWord,
    kNextNotContentWord,
    kNextIn,
    kNextNotIn,
  };
  struct Rule {
    std::string term;
    Predicate predicate = Predicate::kAlways;
    std::string replacement;
    std::set<std::string> words;  // for kNextIn / kNextNotIn
  };

  WordPairTable() = default;
  // Throws InvalidInput for non-lowercase or multi-token terms, a pair
  // mapping a term to itself, a term on both sides, or a rule whose term or
  // replacement is not paired with each other.
  WordPairTable(std::vector<std::pair<std::string, std::string>> pairs,
                std::vector<Rule> rules = {});

  // CSV "term_a,term_b" plus an optional JSON rules sidecar
  // [{"term", "predicate", "replacement", "words"?}].
  static WordPairTable load(const std::filesystem::path& csv,
                            const std::optional<std::filesystem::path>& rules);
  static WordPairTable parse(std::string_view csv, const nlohmann::json& rules);
  // Pronoun, kinship and occupation pairs shipped with the library.
  static WordPairTable default_gender();

  bool empty() const { return pairs_.empty(); }
  const std::vector<std::pair<std::string, std::string>>& pairs() const {
    return pairs_;
  }
  bool contains(const std::string& lower_token) const {
    return defaults_.contains(lower_token);
  }
  // Terms on the a (or b) side, deduplicated in table order.
  std::vector<std::string> side(bool a_side) const;

  // Swaps every table term in one simultaneous pass, keeping each token's
  // capitalization and the original spacing. nullopt when nothing matched.
  std::optional<std::string> swap(std::string_view sentence) const;

 private:
  std::string replacement(const std::string& lower,
                          const std::string* next_lower) const;

  std::vector<std::pair<std::string, std::string>> pairs_;
  std::map<std::string, std::string> defaults_;
  std::map<std::string, bool> on_a_side_;
  std::map<std::string, std::vector<Rule>> rules_;
};

struct InterventionCounts {
  size_t input_sentences = 0;
  size_t output_sentences = 0;
  size_t modified = 0;
  size_t discarded = 0;
};

struct InterventionManifest {
  std::string operation;
  nlohmann::json parameters = nlohmann::json::object();
  InterventionCounts counts;
  std::optional<uint64_t> seed;  // set by every stochastic operation
  nlohmann::json statistics = nlohmann::json::object();
};

nlohmann::json manifest_to_json(const InterventionManifest& manifest);
InterventionManifest manifest_from_json(const nlohmann::json& j);

struct InterventionResult {
  Corpus corpus;  // provenance ends with the manifest
  InterventionManifest manifest;
};

// Appends a swapped copy right after every sentence containing a table term.
// Statistics: matched_fraction, growth_ratio (sentences) and token_growth.
InterventionResult cda_augment(const Corpus& corpus,
                               const WordPairTable& table);

// Swaps table terms in place; modified counts the changed sentences.
InterventionResult cds_substitute(const Corpus& corpus,
                                  const WordPairTable& table);

// Samples n sentences uniformly with replacement and inserts each copy right
// after its original. Throws InvalidInput on an empty corpus.
InterventionResult duplicate_random(const Corpus& corpus, size_t n,
                                    uint64_t seed);

// Drops sentences flagged toxic or hateful. Throws InvalidInput unless every
// sentence carries toxicity flags.
InterventionResult remove_toxic(const Corpus& corpus);

// Drops n sentences sampled uniformly without replacement from the unflagged
// ones. Throws InvalidInput when fewer than n are available.
InterventionResult remove_random(const Corpus& corpus, size_t n,
                                 uint64_t seed);

struct DetoxOptions {
  size_t max_attempts = 3;
  double threshold = 0.5;
  // Instruction sent with each sentence; "{sentence}" is substituted.
  std::string prompt_template;  // empty: shipped template
  size_t concurrency = 1;
  std::filesystem::path checkpoint;
};

// Rewrites every flagged sentence until both classifiers score it below the
// threshold, feeding each attempt's output into the next. Sentences still
// flagged after max_attempts are discarded. Accepted rewrites are
// re-segmented and keep the document id. Needs toxicity flags on every
// sentence. An unreachable service aborts with ServiceUnavailable after
// saving finished sentences to options.checkpoint.
InterventionResult detox_rewrite(const Corpus& corpus, const Rewriter& rewriter,
                                 const ProbabilityClassifier& toxicity,
                                 const ProbabilityClassifier& hate,
                                 const DetoxOptions& options = {});

// Target word -> eligible demographic categories, plus the subcategories of
// each category.
struct PerturbationTargets {
  std::map<std::string, std::vector<std::string>> words;
  std::map<std::string, std::vector<std::string>> subcategories;

  // Gender {man, woman, non-binary} and race {White, Black, Asian, Hispanic,
  // Native-American, Pacific-Islander}.
  static std::map<std::string, std::vector<std::string>>
  default_subcategories();
  // JSON {"words": {word: [category...]}, "subcategories"?: {...}}.
  static PerturbationTargets from_json(const nlohmann::json& j);
  static PerturbationTargets load(const std::filesystem::path& path);
};

struct PerturbOptions {
  size_t chunk_len = 128;
  uint64_t seed = 0;
  size_t concurrency = 1;
  std::filesystem::path checkpoint;
};

// Splits documents into chunk_len-token chunks. For each chunk the target
// words it contains are tried in a seeded random order; each try draws one of
// the word's categories and then a subcategory uniformly. The first perturber
// output that differs from the chunk replaces it. Documents with a changed
// chunk are re-segmented; other documents pass through untouched.
// Statistics: total_chunks, changed, no_targets, exhausted, and per-category
// and per-subcategory change counts.
InterventionResult perturb_corpus(const Corpus& corpus,
                                  const Perturber& perturber,
                                  const PerturbationTargets& targets,
                                  const PerturbOptions& options = {});

struct ChangeDistribution {
  double any_change = 0;
  std::map<std::string, double> category;
  CategoryTable<double> subcategory;
};

// Percentages of all chunks from a perturb_corpus manifest; zeros when the
// manifest has no chunks.
ChangeDistribution perturbation_stats(const InterventionManifest& manifest);

}  // namespace corpusbias

#endif  // CORPUSBIAS_INTERVENE_H_
