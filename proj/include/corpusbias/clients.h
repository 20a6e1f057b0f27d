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

#ifndef CORPUSBIAS_CLIENTS_H_
#define CORPUSBIAS_CLIENTS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "corpusbias/corpus.h"
#include "corpusbias/http_client.h"
#include "corpusbias/lexicon.h"

namespace corpusbias {

// Sentence -> probability in [0, 1] (toxicity, hate speech). Implementations
// throw ServiceUnavailable when their backend cannot be reached.
class ProbabilityClassifier {
 public:
  virtual ~ProbabilityClassifier() = default;
  virtual std::vector<double> score(
      std::span<const std::string> sentences) const = 0;
};

// Offline fallback: 1 when the sentence contains any listed term, else 0.
class LexiconProbabilityClassifier : public ProbabilityClassifier {
 public:
  explicit LexiconProbabilityClassifier(std::span<const Term> terms);
  static LexiconProbabilityClassifier default_toxicity();
  static LexiconProbabilityClassifier default_hate();

  std::vector<double> score(
      std::span<const std::string> sentences) const override;

 private:
  TermMatcher matcher_;
};

// POST /classify {"sentences": [...]} -> {"scores": [...]}.
class RemoteProbabilityClassifier : public ProbabilityClassifier {
 public:
  explicit RemoteProbabilityClassifier(HttpEndpoint endpoint);
  std::vector<double> score(
      std::span<const std::string> sentences) const override;

 private:
  JsonHttpClient client_;
};

// Sentence -> sentiment label; nullopt marks a per-sentence failure.
class SentimentClassifier {
 public:
  virtual ~SentimentClassifier() = default;
  virtual std::vector<std::optional<Sentiment>> classify(
      std::span<const std::string> sentences) const = 0;
};

// Offline fallback: counts positive and negative words; the sentence is
// neutral unless the counts differ by more than one.
class LexiconSentimentClassifier : public SentimentClassifier {
 public:
  LexiconSentimentClassifier(std::unordered_set<std::string> positive,
                             std::unordered_set<std::string> negative);
  static LexiconSentimentClassifier make_default();

  Sentiment label(std::span<const std::string> lower_tokens) const;
  std::vector<std::optional<Sentiment>> classify(
      std::span<const std::string> sentences) const override;

 private:
  std::unordered_set<std::string> positive_;
  std::unordered_set<std::string> negative_;
};

// POST /classify {"sentences": [...]} -> {"labels": [...]}. A batch rejected
// by the service is retried sentence by sentence; sentences that still fail
// come back nullopt. An unreachable service throws ServiceUnavailable.
class RemoteSentimentClassifier : public SentimentClassifier {
 public:
  explicit RemoteSentimentClassifier(HttpEndpoint endpoint);
  std::vector<std::optional<Sentiment>> classify(
      std::span<const std::string> sentences) const override;

 private:
  JsonHttpClient client_;
};

class SentenceEmbedder {
 public:
  virtual ~SentenceEmbedder() = default;
  virtual std::vector<double> embed(std::string_view sentence) const = 0;
};

// L2-normalized bag of lowercased word tokens hashed into `dimension`
// buckets. Word order does not matter. A sentence with no word tokens maps to
// the zero vector.
class HashedBowEmbedder : public SentenceEmbedder {
 public:
  explicit HashedBowEmbedder(size_t dimension = 256) : dimension_(dimension) {}
  std::vector<double> embed(std::string_view sentence) const override;
  size_t dimension() const { return dimension_; }

 private:
  size_t dimension_;
};

// Rewrites a toxic sentence. POST /rewrite {"prompt", "sentence"} ->
// {"rewritten"} for the remote implementation.
class Rewriter {
 public:
  virtual ~Rewriter() = default;
  virtual std::string rewrite(const std::string& prompt,
                              const std::string& sentence) const = 0;
};

class RemoteRewriter : public Rewriter {
 public:
  explicit RemoteRewriter(HttpEndpoint endpoint);
  std::string rewrite(const std::string& prompt,
                      const std::string& sentence) const override;

 private:
  JsonHttpClient client_;
};

// Rewrites a chunk so the person referred to by `target_word` takes on the
// given demographic subcategory. POST /perturb {"chunk", "target_word",
// "category", "subcategory"} -> {"perturbed"} remotely.
class Perturber {
 public:
  virtual ~Perturber() = default;
  virtual std::string perturb(const std::string& chunk,
                              const std::string& target_word,
                              const std::string& category,
                              const std::string& subcategory) const = 0;
};

class RemotePerturber : public Perturber {
 public:
  explicit RemotePerturber(HttpEndpoint endpoint);
  std::string perturb(const std::string& chunk, const std::string& target_word,
                      const std::string& category,
                      const std::string& subcategory) const override;

 private:
  JsonHttpClient client_;
};

}  // namespace corpusbias

#endif  // CORPUSBIAS_CLIENTS_H_
