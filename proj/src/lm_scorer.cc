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

#include "corpusbias/lm_scorer.h"

#include <cmath>
#include <fstream>
#include <map>

#include "corpusbias/error.h"
#include "corpusbias/hashing.h"
#include "corpusbias/logging.h"
#include "corpusbias/text.h"

namespace corpusbias {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kSep = '\x1f';

std::string join_context(std::span<const std::string> tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += kSep;
    out += tokens[i];
  }
  return out;
}

std::string join_words(const TokenList& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

void require(bool capability, std::string_view what, const Scorer& scorer) {
  if (!capability) {
    throw Error("scorer " + scorer.identity() + " does not support " +
                std::string(what));
  }
}

template <typename T>
std::vector<T> checked_list(const json& response, const char* field,
                            size_t expected) {
  auto it = response.find(field);
  if (it == response.end() || !it->is_array() || it->size() != expected) {
    throw Error(std::string("bridge response must carry \"") + field +
                "\" with " + std::to_string(expected) + " entries");
  }
  try {
    return it->get<std::vector<T>>();
  } catch (const json::exception& e) {
    throw Error(std::string("malformed bridge \"") + field + "\": " + e.what());
  }
}

}  // namespace

std::vector<SequenceScore> Scorer::sequence_logprob(
    std::span<const TokenList> sentences) const {
  require(capabilities().sequence_logprob, "sequence log-probabilities", *this);
  for (const auto& s : sentences) {
    if (s.empty()) throw InvalidInput("cannot score an empty token list");
  }
  if (sentences.empty()) return {};
  const auto totals = sequence_totals(sentences);
  std::vector<SequenceScore> out;
  out.reserve(totals.size());
  for (size_t i = 0; i < totals.size(); ++i) {
    out.push_back(
        {totals[i], totals[i] / static_cast<double>(sentences[i].size())});
  }
  return out;
}

std::vector<std::vector<double>> Scorer::masked_logprob(
    std::span<const TokenList> sentences,
    std::span<const IndexList> targets) const {
  require(capabilities().masked_logprob, "masked log-probabilities", *this);
  if (sentences.size() != targets.size()) {
    throw InvalidInput("masked scoring needs one index list per sentence");
  }
  for (size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].empty()) {
      throw InvalidInput("cannot score an empty token list");
    }
    for (size_t t : targets[i]) {
      if (t >= sentences[i].size()) {
        throw InvalidInput("target index " + std::to_string(t) +
                           " out of range for a " +
                           std::to_string(sentences[i].size()) +
                           "-token sentence");
      }
    }
  }
  if (sentences.empty()) return {};
  return masked_values(sentences, targets);
}

std::vector<std::vector<double>> Scorer::embed(
    std::span<const std::string> sentences) const {
  require(capabilities().embed, "embeddings", *this);
  for (const auto& s : sentences) {
    if (collapse_whitespace(s).empty()) {
      throw InvalidInput("cannot embed an empty sentence");
    }
  }
  if (sentences.empty()) return {};
  return embed_values(sentences);
}

SequenceScore Scorer::sequence_logprob(const TokenList& tokens) const {
  return sequence_logprob(std::span<const TokenList>(&tokens, 1))[0];
}

std::vector<double> Scorer::masked_logprob(const TokenList& tokens,
                                           const IndexList& targets) const {
  return masked_logprob(std::span<const TokenList>(&tokens, 1),
                        std::span<const IndexList>(&targets, 1))[0];
}

std::vector<double> Scorer::embed(const std::string& sentence) const {
  return embed(std::span<const std::string>(&sentence, 1))[0];
}

NGramModel NGramModel::train(const Corpus& corpus, size_t order, double k,
                             size_t min_count) {
  std::vector<TokenList> sentences;
  sentences.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) sentences.push_back(s.tokens);
  return train(sentences, order, k, min_count);
}

NGramModel NGramModel::train(std::span<const TokenList> sentences,
                             size_t order, double k, size_t min_count) {
  if (order == 0) throw InvalidInput("n-gram order must be at least 1");
  if (!(k > 0.0)) throw InvalidInput("smoothing k must be positive");
  NGramModel m;
  m.order_ = order;
  m.k_ = k;

  std::string digest = "ngram/" + std::to_string(order) + "/" +
                       std::to_string(k) + "/" + std::to_string(min_count);
  std::unordered_map<std::string, size_t> raw;
  std::vector<TokenList> lowered;
  lowered.reserve(sentences.size());
  for (const auto& s : sentences) {
    TokenList lower;
    for (const auto& t : s) {
      lower.push_back(ascii_lower(t));
      ++raw[lower.back()];
      digest += '\n';
      digest += lower.back();
    }
    digest += '\n';
    lowered.push_back(std::move(lower));
  }
  if (raw.empty()) throw InvalidInput("cannot train an n-gram model: no tokens");
  m.fingerprint_ = sha256_hex(digest);

  for (const auto& [token, count] : raw) {
    if (count >= min_count) {
      m.vocabulary_.emplace(token, count);
    } else {
      m.unk_count_ += count;
    }
  }
  for (auto& sentence : lowered) {
    for (auto& t : sentence) {
      if (!m.vocabulary_.contains(t)) t = std::string(kUnk);
    }
    m.total_tokens_ += sentence.size();
    for (size_t i = order - 1; i < sentence.size(); ++i) {
      auto& c = m.contexts_[join_context(
          std::span<const std::string>(sentence).subspan(i - (order - 1),
                                                        order - 1))];
      ++c.total;
      ++c.next[sentence[i]];
    }
  }
  return m;
}

bool NGramModel::in_vocabulary(const std::string& lower) const {
  return lower == kUnk || vocabulary_.contains(lower);
}

std::vector<std::string> NGramModel::vocabulary() const {
  std::vector<std::string> out;
  for (const auto& [token, count] : vocabulary_) out.push_back(token);
  out.emplace_back(kUnk);
  std::sort(out.begin(), out.end());
  return out;
}

std::string NGramModel::normalize(const std::string& token) const {
  if (token == kUnk) return token;
  std::string lower = ascii_lower(token);
  return vocabulary_.contains(lower) ? lower : std::string(kUnk);
}

double NGramModel::probability(std::span<const std::string> context,
                               const std::string& word) const {
  const std::string w = normalize(word);
  const double v = static_cast<double>(vocabulary_size());
  if (order_ > 1 && context.size() >= order_ - 1) {
    std::vector<std::string> ctx;
    for (size_t i = context.size() - (order_ - 1); i < context.size(); ++i) {
      ctx.push_back(normalize(context[i]));
    }
    if (auto it = contexts_.find(join_context(ctx)); it != contexts_.end()) {
      const auto hit = it->second.next.find(w);
      const double c = hit == it->second.next.end() ? 0.0 : hit->second;
      return (c + k_) / (static_cast<double>(it->second.total) + k_ * v);
    }
  }
  double c = 0.0;
  if (w == kUnk) {
    c = static_cast<double>(unk_count_);
  } else if (auto it = vocabulary_.find(w); it != vocabulary_.end()) {
    c = static_cast<double>(it->second);
  }
  return (c + k_) / (static_cast<double>(total_tokens_) + k_ * v);
}

std::vector<double> NGramModel::token_logprobs(const TokenList& tokens) const {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    out.push_back(std::log(probability(
        std::span<const std::string>(tokens).first(i), tokens[i])));
  }
  return out;
}

std::string NGramScorer::identity() const {
  return "ngram:" + model_.fingerprint();
}

std::vector<double> NGramScorer::sequence_totals(
    std::span<const TokenList> sentences) const {
  std::vector<double> out;
  for (const auto& s : sentences) {
    double total = 0.0;
    for (double lp : model_.token_logprobs(s)) total += lp;
    out.push_back(total);
  }
  return out;
}

std::vector<std::vector<double>> NGramScorer::masked_values(
    std::span<const TokenList> sentences,
    std::span<const IndexList> targets) const {
  std::vector<std::vector<double>> out;
  for (size_t i = 0; i < sentences.size(); ++i) {
    const auto& tokens = sentences[i];
    std::vector<double> values;
    for (size_t t : targets[i]) {
      values.push_back(std::log(model_.probability(
          std::span<const std::string>(tokens).first(t), tokens[t])));
    }
    out.push_back(std::move(values));
  }
  return out;
}

std::vector<std::vector<double>> NGramScorer::embed_values(
    std::span<const std::string> sentences) const {
  std::vector<std::vector<double>> out;
  for (const auto& s : sentences) out.push_back(embedder_.embed(s));
  return out;
}

RemoteScorer::RemoteScorer(HttpEndpoint endpoint, std::string pooling,
                           size_t batch_size)
    : client_(std::move(endpoint)),
      pooling_(std::move(pooling)),
      batch_size_(std::max<size_t>(batch_size, 1)) {
  const json info = client_.get("/info");
  try {
    info_.model_id = info.at("model_id");
    info_.model_type = info.at("model_type");
    info_.embedding_dim = info.at("embedding_dim");
    info_.max_length = info.value("max_length", size_t{0});
  } catch (const json::exception& e) {
    throw Error(std::string("malformed bridge /info response: ") + e.what());
  }
  if (info_.model_type != "masked" && info_.model_type != "causal") {
    throw Error("bridge reports unknown model_type \"" + info_.model_type +
                "\"");
  }
}

Capabilities RemoteScorer::capabilities() const {
  const bool masked = info_.model_type == "masked";
  return {true, masked, true};
}

std::vector<double> RemoteScorer::sequence_totals(
    std::span<const TokenList> sentences) const {
  if (info_.model_type == "masked") {
    std::vector<IndexList> all;
    for (const auto& s : sentences) {
      IndexList idx(s.size());
      for (size_t i = 0; i < s.size(); ++i) idx[i] = i;
      all.push_back(std::move(idx));
    }
    std::vector<double> out;
    for (const auto& values : masked_values(sentences, all)) {
      double total = 0.0;
      for (double v : values) total += v;
      out.push_back(total);
    }
    return out;
  }
  std::vector<double> out;
  for (size_t b = 0; b < sentences.size(); b += batch_size_) {
    const auto batch = sentences.subspan(b, std::min(batch_size_,
                                                     sentences.size() - b));
    json texts = json::array();
    for (const auto& s : batch) texts.push_back(join_words(s));
    const json response = client_.post(
        "/logprob", {{"sentences", texts}, {"mode", "sequence"}});
    for (double v : checked_list<double>(response, "logprobs", batch.size())) {
      out.push_back(v);
    }
  }
  return out;
}

std::vector<std::vector<double>> RemoteScorer::masked_values(
    std::span<const TokenList> sentences,
    std::span<const IndexList> targets) const {
  std::vector<std::vector<double>> out;
  for (size_t b = 0; b < sentences.size(); b += batch_size_) {
    const size_t n = std::min(batch_size_, sentences.size() - b);
    json texts = json::array();
    json indices = json::array();
    for (size_t i = b; i < b + n; ++i) {
      texts.push_back(join_words(sentences[i]));
      indices.push_back(targets[i]);
    }
    const json response = client_.post(
        "/logprob",
        {{"sentences", texts}, {"mode", "pll"}, {"target_indices", indices}});
    auto lists =
        checked_list<std::vector<double>>(response, "token_logprobs", n);
    for (size_t i = 0; i < n; ++i) {
      if (lists[i].size() != targets[b + i].size()) {
        throw Error("bridge returned " + std::to_string(lists[i].size()) +
                    " token log-probabilities for " +
                    std::to_string(targets[b + i].size()) + " targets");
      }
      out.push_back(std::move(lists[i]));
    }
  }
  return out;
}

std::vector<std::vector<double>> RemoteScorer::embed_values(
    std::span<const std::string> sentences) const {
  std::vector<std::vector<double>> out;
  for (size_t b = 0; b < sentences.size(); b += batch_size_) {
    const size_t n = std::min(batch_size_, sentences.size() - b);
    json texts(std::vector<std::string>(sentences.begin() + b,
                                        sentences.begin() + b + n));
    const json response =
        client_.post("/embed", {{"sentences", texts}, {"pooling", pooling_}});
    for (auto& v : checked_list<std::vector<double>>(response, "vectors", n)) {
      if (v.size() != info_.embedding_dim) {
        throw Error("bridge vector width " + std::to_string(v.size()) +
                    " differs from embedding_dim " +
                    std::to_string(info_.embedding_dim));
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

CachedScorer::CachedScorer(const Scorer& inner, fs::path path)
    : inner_(inner), identity_(inner.identity()), path_(std::move(path)) {
  if (path_.empty() || !fs::exists(path_)) return;
  std::ifstream in(path_);
  std::string line;
  size_t line_no = 0;
  size_t skipped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json record = json::parse(line);
      if (record.at("scorer_identity") != identity_) continue;
      entries_[record.at("key").get<std::string>()] = record.at("value");
    } catch (const json::exception&) {
      ++skipped;
    }
  }
  if (skipped) {
    log_warning("score cache " + path_.string() + ": skipped " +
                std::to_string(skipped) + " unreadable records");
  }
}

size_t CachedScorer::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

std::string CachedScorer::key(std::string_view op, const json& input) const {
  return sha256_hex(identity_ + '\n' + std::string(op) + '\n' + input.dump());
}

std::vector<json> CachedScorer::lookup(
    const std::vector<std::string>& keys,
    const std::function<std::vector<json>(const std::vector<size_t>&)>&
        compute) const {
  std::vector<json> out(keys.size());
  std::vector<size_t> misses;  // first occurrence of each missing key
  std::vector<std::pair<size_t, size_t>> repeats;  // (index, miss slot)
  {
    std::lock_guard<std::mutex> lock(mu_);
    std::unordered_map<std::string, size_t> pending;
    for (size_t i = 0; i < keys.size(); ++i) {
      if (auto it = entries_.find(keys[i]); it != entries_.end()) {
        out[i] = it->second;
        ++hits_;
      } else if (auto p = pending.find(keys[i]); p != pending.end()) {
        repeats.emplace_back(i, p->second);
        ++hits_;
      } else {
        pending.emplace(keys[i], misses.size());
        misses.push_back(i);
      }
    }
  }
  if (misses.empty()) return out;
  std::vector<json> fresh = compute(misses);
  std::lock_guard<std::mutex> lock(mu_);
  std::ofstream file;
  if (!path_.empty()) {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    file.open(path_, std::ios::app);
    if (!file) throw Error("cannot append to score cache " + path_.string());
  }
  for (size_t m = 0; m < misses.size(); ++m) {
    const size_t i = misses[m];
    out[i] = fresh[m];
    if (entries_.emplace(keys[i], fresh[m]).second && file.is_open()) {
      file << json{{"key", keys[i]},
                   {"value", fresh[m]},
                   {"scorer_identity", identity_}}
                  .dump()
           << '\n';
    }
  }
  for (const auto& [i, slot] : repeats) out[i] = fresh[slot];
  return out;
}

std::vector<double> CachedScorer::sequence_totals(
    std::span<const TokenList> sentences) const {
  std::vector<std::string> keys;
  for (const auto& s : sentences) keys.push_back(key("sequence", s));
  auto values = lookup(keys, [&](const std::vector<size_t>& misses) {
    std::vector<TokenList> batch;
    for (size_t i : misses) batch.push_back(sentences[i]);
    std::vector<json> out;
    for (double v : inner_.sequence_totals(batch)) out.push_back(v);
    return out;
  });
  std::vector<double> out;
  for (const auto& v : values) out.push_back(v.get<double>());
  return out;
}

std::vector<std::vector<double>> CachedScorer::masked_values(
    std::span<const TokenList> sentences,
    std::span<const IndexList> targets) const {
  std::vector<std::string> keys;
  for (size_t i = 0; i < sentences.size(); ++i) {
    keys.push_back(
        key("masked", {{"tokens", sentences[i]}, {"targets", targets[i]}}));
  }
  auto values = lookup(keys, [&](const std::vector<size_t>& misses) {
    std::vector<TokenList> batch;
    std::vector<IndexList> idx;
    for (size_t i : misses) {
      batch.push_back(sentences[i]);
      idx.push_back(targets[i]);
    }
    std::vector<json> out;
    for (auto& v : inner_.masked_values(batch, idx)) out.push_back(v);
    return out;
  });
  std::vector<std::vector<double>> out;
  for (const auto& v : values) out.push_back(v.get<std::vector<double>>());
  return out;
}

std::vector<std::vector<double>> CachedScorer::embed_values(
    std::span<const std::string> sentences) const {
  std::vector<std::string> keys;
  for (const auto& s : sentences) keys.push_back(key("embed", s));
  auto values = lookup(keys, [&](const std::vector<size_t>& misses) {
    std::vector<std::string> batch;
    for (size_t i : misses) batch.push_back(sentences[i]);
    std::vector<json> out;
    for (auto& v : inner_.embed_values(batch)) out.push_back(v);
    return out;
  });
  std::vector<std::vector<double>> out;
  for (const auto& v : values) out.push_back(v.get<std::vector<double>>());
  return out;
}

}  // namespace corpusbias
