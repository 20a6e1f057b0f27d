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

#ifndef CORPUSBIAS_LM_SCORER_H_
#define CORPUSBIAS_LM_SCORER_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpusbias/clients.h"
#include "corpusbias/corpus.h"
#include "corpusbias/http_client.h"
#include "json.hpp"

namespace corpusbias {

using TokenList = std::vector<std::string>;
using IndexList = std::vector<size_t>;

enum class ScorerKind { kNGram, kRemote, kOther };

struct Capabilities {
  bool sequence_logprob = false;
  bool masked_logprob = false;
  bool embed = false;
};

struct SequenceScore {
  double total = 0;  // sum of token log-probabilities
  double mean = 0;   // total / token count
};

// Likelihood and embedding interface over a model. The public methods
// validate their inputs and capabilities and then call the protected hooks,
// which see only non-empty, in-range requests.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual ScorerKind kind() const = 0;
  virtual Capabilities capabilities() const = 0;
  // Model id plus version; part of every cache key.
  virtual std::string identity() const = 0;

  // Throws InvalidInput for an empty token list, Error when the capability
  // is missing.
  std::vector<SequenceScore> sequence_logprob(
      std::span<const TokenList> sentences) const;
  // One log-probability per target index, in the order given.
  std::vector<std::vector<double>> masked_logprob(
      std::span<const TokenList> sentences,
      std::span<const IndexList> targets) const;
  std::vector<std::vector<double>> embed(
      std::span<const std::string> sentences) const;

  SequenceScore sequence_logprob(const TokenList& tokens) const;
  std::vector<double> masked_logprob(const TokenList& tokens,
                                     const IndexList& targets) const;
  std::vector<double> embed(const std::string& sentence) const;

 protected:
  virtual std::vector<double> sequence_totals(
      std::span<const TokenList> sentences) const = 0;
  virtual std::vector<std::vector<double>> masked_values(
      std::span<const TokenList> sentences,
      std::span<const IndexList> targets) const = 0;
  virtual std::vector<std::vector<double>> embed_values(
      std::span<const std::string> sentences) const = 0;

  friend class CachedScorer;
};

// Add-k smoothed n-gram model over lowercased tokens. Tokens seen fewer than
// min_count times become <unk>. Sentences carry no start or end markers, so
// the vocabulary is the kept tokens plus <unk>. Positions with fewer than
// order - 1 preceding tokens, and contexts never seen in training, use the
// add-k unigram distribution.
class NGramModel {
 public:
  static constexpr std::string_view kUnk = "<unk>";

  // Throws InvalidInput for order 0, k <= 0 or a corpus without tokens.
  static NGramModel train(const Corpus& corpus, size_t order = 3,
                          double k = 0.5, size_t min_count = 2);
  static NGramModel train(std::span<const TokenList> sentences,
                          size_t order = 3, double k = 0.5,
                          size_t min_count = 2);

  size_t order() const { return order_; }
  double smoothing() const { return k_; }
  size_t vocabulary_size() const { return vocabulary_.size() + 1; }
  bool in_vocabulary(const std::string& lower) const;
  // Kept tokens plus <unk>, sorted.
  std::vector<std::string> vocabulary() const;
  // SHA-256 of the training data and settings.
  const std::string& fingerprint() const { return fingerprint_; }

  // P(word | context) with context the preceding tokens (any length; only
  // the last order - 1 are used). Inputs are lowercased and mapped to <unk>
  // as needed.
  double probability(std::span<const std::string> context,
                     const std::string& word) const;
  // log P of each token given its left context.
  std::vector<double> token_logprobs(const TokenList& tokens) const;

 private:
  struct Counts {
    size_t total = 0;
    std::unordered_map<std::string, size_t> next;
  };
  std::string normalize(const std::string& token) const;

  size_t order_ = 3;
  double k_ = 0.5;
  std::unordered_map<std::string, size_t> vocabulary_;  // kept token counts
  size_t unk_count_ = 0;
  size_t total_tokens_ = 0;
  std::unordered_map<std::string, Counts> contexts_;  // key: joined context
  std::string fingerprint_;
};

// Built-in scorer: the n-gram model for both scoring modes (masked scores
// use the left context only) and the hashed bag-of-words embedder.
class NGramScorer : public Scorer {
 public:
  explicit NGramScorer(NGramModel model) : model_(std::move(model)) {}

  ScorerKind kind() const override { return ScorerKind::kNGram; }
  Capabilities capabilities() const override { return {true, true, true}; }
  std::string identity() const override;
  const NGramModel& model() const { return model_; }

 protected:
  std::vector<double> sequence_totals(
      std::span<const TokenList> sentences) const override;
  std::vector<std::vector<double>> masked_values(
      std::span<const TokenList> sentences,
      std::span<const IndexList> targets) const override;
  std::vector<std::vector<double>> embed_values(
      std::span<const std::string> sentences) const override;

 private:
  NGramModel model_;
  HashedBowEmbedder embedder_;
};

struct BridgeInfo {
  std::string model_id;
  std::string model_type;  // "masked" or "causal"
  size_t embedding_dim = 0;
  size_t max_length = 0;
};

// Client for the scoring bridge: GET /info, POST /logprob, POST /embed.
// Sentences are sent as their tokens joined by single spaces so that the
// bridge's whitespace tokens are exactly the caller's tokens. Masked models
// provide sequence scores as the pseudo-log-likelihood over all tokens;
// causal models provide sequence scores only.
class RemoteScorer : public Scorer {
 public:
  // Fetches /info; throws ServiceUnavailable when the bridge is down.
  explicit RemoteScorer(HttpEndpoint endpoint, std::string pooling = "mean",
                        size_t batch_size = 32);

  ScorerKind kind() const override { return ScorerKind::kRemote; }
  Capabilities capabilities() const override;
  std::string identity() const override { return "remote:" + info_.model_id; }
  const BridgeInfo& info() const { return info_; }

 protected:
  std::vector<double> sequence_totals(
      std::span<const TokenList> sentences) const override;
  std::vector<std::vector<double>> masked_values(
      std::span<const TokenList> sentences,
      std::span<const IndexList> targets) const override;
  std::vector<std::vector<double>> embed_values(
      std::span<const std::string> sentences) const override;

 private:
  JsonHttpClient client_;
  BridgeInfo info_;
  std::string pooling_;
  size_t batch_size_;
};

// Wraps a scorer with an append-only JSONL cache of
// {"key", "value", "scorer_identity"} records. Keys hash the identity, the
// operation and the canonical input, so records from another model are
// never reused. Results are identical with and without the cache.
class CachedScorer : public Scorer {
 public:
  // An empty path caches in memory only.
  CachedScorer(const Scorer& inner, std::filesystem::path path);

  ScorerKind kind() const override { return inner_.kind(); }
  Capabilities capabilities() const override { return inner_.capabilities(); }
  std::string identity() const override { return identity_; }
  size_t hits() const { return hits_; }
  size_t size() const;

 protected:
  std::vector<double> sequence_totals(
      std::span<const TokenList> sentences) const override;
  std::vector<std::vector<double>> masked_values(
      std::span<const TokenList> sentences,
      std::span<const IndexList> targets) const override;
  std::vector<std::vector<double>> embed_values(
      std::span<const std::string> sentences) const override;

 private:
  // Looks up every key; computes the misses with one call to `compute`.
  std::vector<nlohmann::json> lookup(
      const std::vector<std::string>& keys,
      const std::function<std::vector<nlohmann::json>(
          const std::vector<size_t>& misses)>& compute) const;
  std::string key(std::string_view op, const nlohmann::json& input) const;

  const Scorer& inner_;
  std::string identity_;
  std::filesystem::path path_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, nlohmann::json> entries_;
  mutable size_t hits_ = 0;
};

}  // namespace corpusbias

#endif  // CORPUSBIAS_LM_SCORER_H_
