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

#include "corpusbias/clients.h"

#include <cmath>

#include "corpusbias/error.h"
#include "corpusbias/hashing.h"
#include "corpusbias/logging.h"
#include "corpusbias/resources.h"
#include "corpusbias/text.h"

namespace corpusbias {
using nlohmann::json;

namespace {

std::vector<std::string> lower_tokens(std::string_view sentence) {
  std::vector<std::string> out;
  for (auto& t : tokenize(sentence)) out.push_back(ascii_lower(t));
  return out;
}

json sentence_batch(std::span<const std::string> sentences) {
  return {{"sentences", json(std::vector<std::string>(sentences.begin(),
                                                      sentences.end()))}};
}

// Pulls a list field of the expected length out of a response.
const json& response_list(const json& response, const char* field,
                          size_t expected, std::string_view service) {
  auto it = response.find(field);
  if (it == response.end() || !it->is_array() || it->size() != expected) {
    throw Error(std::string(service) + " response must carry \"" + field +
                "\" with " + std::to_string(expected) + " entries");
  }
  return *it;
}

std::string response_string(const json& response, const char* field,
                            std::string_view service) {
  auto it = response.find(field);
  if (it == response.end() || !it->is_string()) {
    throw Error(std::string(service) + " response lacks string \"" + field +
                "\"");
  }
  return it->get<std::string>();
}

}  // namespace

LexiconProbabilityClassifier::LexiconProbabilityClassifier(
    std::span<const Term> terms)
    : matcher_(terms) {}

LexiconProbabilityClassifier LexiconProbabilityClassifier::default_toxicity() {
  const auto terms = terms_from_lines(resource_lines("toxic_terms.txt"));
  return LexiconProbabilityClassifier(terms);
}

LexiconProbabilityClassifier LexiconProbabilityClassifier::default_hate() {
  const auto terms = terms_from_lines(resource_lines("hate_terms.txt"));
  return LexiconProbabilityClassifier(terms);
}

std::vector<double> LexiconProbabilityClassifier::score(
    std::span<const std::string> sentences) const {
  std::vector<double> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    out.push_back(matcher_.contains_any(lower_tokens(s)) ? 1.0 : 0.0);
  }
  return out;
}

RemoteProbabilityClassifier::RemoteProbabilityClassifier(HttpEndpoint endpoint)
    : client_(std::move(endpoint)) {}

std::vector<double> RemoteProbabilityClassifier::score(
    std::span<const std::string> sentences) const {
  if (sentences.empty()) return {};
  const json response = client_.post("/classify", sentence_batch(sentences));
  const json& scores =
      response_list(response, "scores", sentences.size(), "classifier");
  std::vector<double> out;
  for (const auto& s : scores) {
    if (!s.is_number()) throw Error("classifier returned a non-numeric score");
    const double p = s.get<double>();
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error("classifier returned probability outside [0, 1]");
    }
    out.push_back(p);
  }
  return out;
}

LexiconSentimentClassifier::LexiconSentimentClassifier(
    std::unordered_set<std::string> positive,
    std::unordered_set<std::string> negative)
    : positive_(std::move(positive)), negative_(std::move(negative)) {}

LexiconSentimentClassifier LexiconSentimentClassifier::make_default() {
  return LexiconSentimentClassifier(resource_set("sentiment_positive.txt"),
                                    resource_set("sentiment_negative.txt"));
}

Sentiment LexiconSentimentClassifier::label(
    std::span<const std::string> tokens) const {
  long pos = 0;
  long neg = 0;
  for (const auto& t : tokens) {
    pos += positive_.contains(t);
    neg += negative_.contains(t);
  }
  if (std::labs(pos - neg) <= 1) return Sentiment::kNeutral;
  return pos > neg ? Sentiment::kPositive : Sentiment::kNegative;
}

std::vector<std::optional<Sentiment>> LexiconSentimentClassifier::classify(
    std::span<const std::string> sentences) const {
  std::vector<std::optional<Sentiment>> out;
  for (const auto& s : sentences) out.push_back(label(lower_tokens(s)));
  return out;
}

RemoteSentimentClassifier::RemoteSentimentClassifier(HttpEndpoint endpoint)
    : client_(std::move(endpoint)) {}

std::vector<std::optional<Sentiment>> RemoteSentimentClassifier::classify(
    std::span<const std::string> sentences) const {
  std::vector<std::optional<Sentiment>> out(sentences.size());
  if (sentences.empty()) return out;
  auto parse_labels = [](const json& labels, size_t n) {
    std::vector<std::optional<Sentiment>> parsed;
    for (size_t i = 0; i < n; ++i) {
      parsed.push_back(labels[i].is_string()
                           ? parse_sentiment(labels[i].get<std::string>())
                           : std::nullopt);
    }
    return parsed;
  };
  try {
    const json response = client_.post("/classify", sentence_batch(sentences));
    return parse_labels(
        response_list(response, "labels", sentences.size(), "sentiment"),
        sentences.size());
  } catch (const ServiceUnavailable&) {
    throw;
  } catch (const Error& e) {
    log_warning(std::string("sentiment batch failed, retrying per sentence: ") +
                e.what());
  }
  for (size_t i = 0; i < sentences.size(); ++i) {
    try {
      const json response =
          client_.post("/classify", sentence_batch(sentences.subspan(i, 1)));
      out[i] = parse_labels(response_list(response, "labels", 1, "sentiment"),
                            1)[0];
    } catch (const Error& e) {
      out[i] = std::nullopt;
    }
  }
  return out;
}

std::vector<double> HashedBowEmbedder::embed(std::string_view sentence) const {
  std::vector<double> v(dimension_, 0.0);
  for (const auto& token : tokenize(sentence)) {
    if (!is_word(token)) continue;
    v[fnv1a64(ascii_lower(token)) % dimension_] += 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

RemoteRewriter::RemoteRewriter(HttpEndpoint endpoint)
    : client_(std::move(endpoint)) {}

std::string RemoteRewriter::rewrite(const std::string& prompt,
                                    const std::string& sentence) const {
  const json response =
      client_.post("/rewrite", {{"prompt", prompt}, {"sentence", sentence}});
  return response_string(response, "rewritten", "rewriter");
}

RemotePerturber::RemotePerturber(HttpEndpoint endpoint)
    : client_(std::move(endpoint)) {}

std::string RemotePerturber::perturb(const std::string& chunk,
                                     const std::string& target_word,
                                     const std::string& category,
                                     const std::string& subcategory) const {
  const json response = client_.post("/perturb", {{"chunk", chunk},
                                                  {"target_word", target_word},
                                                  {"category", category},
                                                  {"subcategory", subcategory}});
  return response_string(response, "perturbed", "perturber");
}

}  // namespace corpusbias
