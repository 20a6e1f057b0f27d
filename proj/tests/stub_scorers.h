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

#ifndef CORPUSBIAS_TESTS_STUB_SCORERS_H_
#define CORPUSBIAS_TESTS_STUB_SCORERS_H_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "corpusbias/error.h"
#include "corpusbias/hashing.h"
#include "corpusbias/lm_scorer.h"
#include "corpusbias/rng.h"

namespace corpusbias::testing {

// Token log-probability as a function of the sentence and position.
using TokenFn = std::function<double(const TokenList&, size_t)>;

// Scorer defined by a per-token function. Sequence scores sum it, masked
// scores read it at the target positions. Sentences containing the token
// "POISON" raise Error; "OFFLINE" raises ServiceUnavailable.
class TokenFnScorer : public Scorer {
 public:
  explicit TokenFnScorer(TokenFn fn, std::string id = "stub")
      : fn_(std::move(fn)), id_(std::move(id)) {}

  ScorerKind kind() const override { return ScorerKind::kOther; }
  Capabilities capabilities() const override { return {true, true, false}; }
  std::string identity() const override { return id_; }

  mutable size_t batches = 0;

 protected:
  std::vector<double> sequence_totals(
      std::span<const TokenList> sentences) const override {
    ++batches;
    std::vector<double> out;
    for (const auto& s : sentences) {
      check(s);
      double total = 0.0;
      for (size_t i = 0; i < s.size(); ++i) total += fn_(s, i);
      out.push_back(total);
    }
    return out;
  }

  std::vector<std::vector<double>> masked_values(
      std::span<const TokenList> sentences,
      std::span<const IndexList> targets) const override {
    ++batches;
    std::vector<std::vector<double>> out;
    for (size_t k = 0; k < sentences.size(); ++k) {
      check(sentences[k]);
      std::vector<double> v;
      for (size_t i : targets[k]) v.push_back(fn_(sentences[k], i));
      out.push_back(std::move(v));
    }
    return out;
  }

  std::vector<std::vector<double>> embed_values(
      std::span<const std::string>) const override {
    throw Error("stub has no embeddings");
  }

 private:
  static void check(const TokenList& s) {
    for (const auto& t : s) {
      if (t == "POISON") throw Error("poisoned sentence");
      if (t == "OFFLINE") throw ServiceUnavailable("scorer offline");
    }
  }

  TokenFn fn_;
  std::string id_;
};

// Zero log-probability per token keeps both sums and means constant.
inline TokenFnScorer constant_scorer(double value = 0.0) {
  return TokenFnScorer([value](const TokenList&, size_t) { return value; });
}

// Integer-valued and position dependent, so sums compare exactly.
inline double length_position(const TokenList& s, size_t i) {
  return -static_cast<double>(s[i].size()) - static_cast<double>(i);
}

// Pseudo-random per-token values in (-10, 0), fixed by the sentence text.
inline TokenFn hashed_uniform(uint64_t seed) {
  return [seed](const TokenList& s, size_t i) {
    std::string joined;
    for (const auto& t : s) joined += t + " ";
    auto rng = SeededRng::for_item(seed ^ fnv1a64(joined), i);
    return -10.0 * rng.uniform_real() - 1e-9;
  };
}

// Adds `per_token` to every token log-probability and `per_sequence` to
// every sequence total of an inner scorer.
class ShiftedScorer : public Scorer {
 public:
  ShiftedScorer(const Scorer& inner, double per_token, double per_sequence)
      : inner_(inner), per_token_(per_token), per_sequence_(per_sequence) {}

  ScorerKind kind() const override { return inner_.kind(); }
  Capabilities capabilities() const override { return inner_.capabilities(); }
  std::string identity() const override { return inner_.identity() + "+"; }

 protected:
  std::vector<double> sequence_totals(
      std::span<const TokenList> sentences) const override {
    const auto scores = inner_.sequence_logprob(sentences);
    std::vector<double> out;
    for (size_t k = 0; k < scores.size(); ++k) {
      out.push_back(scores[k].total + per_sequence_ +
                    per_token_ * static_cast<double>(sentences[k].size()));
    }
    return out;
  }

  std::vector<std::vector<double>> masked_values(
      std::span<const TokenList> sentences,
      std::span<const IndexList> targets) const override {
    auto out = inner_.masked_logprob(sentences, targets);
    for (auto& v : out) {
      for (double& x : v) x += per_token_;
    }
    return out;
  }

  std::vector<std::vector<double>> embed_values(
      std::span<const std::string> sentences) const override {
    return inner_.embed(sentences);
  }

 private:
  const Scorer& inner_;
  double per_token_;
  double per_sequence_;
};

}  // namespace corpusbias::testing

#endif  // CORPUSBIAS_TESTS_STUB_SCORERS_H_
