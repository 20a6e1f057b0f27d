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

#include "corpusbias/audit.h"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include "corpusbias/checkpoint.h"
#include "corpusbias/csv.h"
#include "corpusbias/error.h"
#include "corpusbias/hashing.h"
#include "corpusbias/logging.h"
#include "corpusbias/parallel.h"
#include "corpusbias/resources.h"
#include "corpusbias/text.h"

namespace corpusbias {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool is_vowel(char c) {
  switch (c) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
    case 'y':
      return true;
    default:
      return false;
  }
}

double percent(size_t part, size_t whole) {
  return whole == 0 ? 0.0
                    : 100.0 * static_cast<double>(part) /
                          static_cast<double>(whole);
}

std::vector<std::string> sentence_texts(const Corpus& corpus, size_t begin,
                                        size_t end) {
  std::vector<std::string> texts;
  texts.reserve(end - begin);
  for (size_t i = begin; i < end; ++i) texts.push_back(corpus[i].text);
  return texts;
}

size_t batch_count(size_t n, size_t batch_size) {
  return (n + batch_size - 1) / batch_size;
}

void check_batch_options(const BatchOptions& options) {
  if (options.batch_size == 0) {
    throw InvalidInput("batch_size must be at least 1");
  }
}

std::vector<double> checked_scores(const ProbabilityClassifier& classifier,
                                   const std::vector<std::string>& texts) {
  auto scores = classifier.score(texts);
  if (scores.size() != texts.size()) {
    throw Error("classifier returned " + std::to_string(scores.size()) +
                " scores for " + std::to_string(texts.size()) + " sentences");
  }
  return scores;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error("embedder returned vectors of different dimensions");
  }
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

void write_csv_file(const fs::path& path, const std::vector<CsvRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  for (const auto& row : rows) out << csv_line(row) << '\n';
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

CategoryTable<double> keyword_frequency(const Corpus& corpus,
                                        const Lexicon& lexicon) {
  if (lexicon.empty()) throw InvalidInput("lexicon is empty");
  size_t total = 0;
  for (const auto& s : corpus.sentences()) total += s.tokens.size();
  if (total == 0) throw InvalidInput("no tokens");

  CategoryTable<double> out;
  for (const auto& [category, subs] : lexicon.categories) {
    TermMatcher matcher(subs);
    std::vector<size_t> counts(matcher.labels().size(), 0);
    for (const auto& s : corpus.sentences()) {
      for (const auto& m : matcher.find(s.lower_tokens)) {
        counts[m.label] += m.length;
      }
    }
    for (size_t i = 0; i < counts.size(); ++i) {
      out[category][matcher.labels()[i]] = percent(counts[i], total);
    }
  }
  return out;
}

int count_syllables(std::string_view word) {
  std::string letters;
  for (char c : ascii_lower(word)) {
    if (c >= 'a' && c <= 'z') letters.push_back(c);
  }
  int groups = 0;
  bool in_group = false;
  for (char c : letters) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  if (groups > 1 && letters.back() == 'e') --groups;
  return std::max(groups, 1);
}

StructuralStats structural_stats(const Corpus& corpus) {
  const auto& pronouns = resource_set("pronouns.txt");
  const auto& function_words = resource_set("function_words.txt");
  StructuralStats stats;
  size_t tokens = 0;
  size_t syllables = 0;
  size_t chars = 0;
  size_t pronoun_count = 0;
  size_t content_count = 0;
  std::unordered_set<std::string> types;
  for (const auto& s : corpus.sentences()) {
    tokens += s.tokens.size();
    types.insert(s.lower_tokens.begin(), s.lower_tokens.end());
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      if (!is_word(s.tokens[i])) continue;
      ++stats.words;
      syllables += static_cast<size_t>(count_syllables(s.tokens[i]));
      chars += utf8_length(s.tokens[i]);
      const std::string& lower = s.lower_tokens[i];
      if (pronouns.contains(lower)) {
        ++pronoun_count;
      } else if (!function_words.contains(lower)) {
        ++content_count;
      }
    }
  }
  if (stats.words == 0) throw InvalidInput("corpus has no words");
  stats.sentences = corpus.size();
  const double words = static_cast<double>(stats.words);
  stats.avg_sentence_length = words / static_cast<double>(stats.sentences);
  stats.avg_syllables_per_word = static_cast<double>(syllables) / words;
  stats.avg_word_length = static_cast<double>(chars) / words;
  stats.fkgl = flesch_kincaid_grade(stats.avg_sentence_length,
                                    stats.avg_syllables_per_word);
  stats.ttr = static_cast<double>(types.size()) / static_cast<double>(tokens);
  stats.pronoun_noun_ratio =
      content_count == 0 ? 0.0
                         : static_cast<double>(pronoun_count) /
                               static_cast<double>(content_count);
  return stats;
}

std::map<std::string, double> emotion_scores(const Corpus& corpus,
                                             const EmotionLexicon& lexicon) {
  for (const char* required :
       {"joy", "sadness", "fear", "surprise", "anger", "disgust"}) {
    if (!std::binary_search(lexicon.emotions.begin(), lexicon.emotions.end(),
                            std::string(required))) {
      throw InvalidInput(std::string("emotion lexicon lacks \"") + required +
                         "\"");
    }
  }
  std::vector<size_t> counts(lexicon.emotions.size(), 0);
  size_t eligible = 0;
  for (const auto& s : corpus.sentences()) {
    for (const auto& t : s.lower_tokens) {
      if (!lexicon.vocabulary.contains(t)) continue;
      ++eligible;
      if (auto it = lexicon.tags.find(t); it != lexicon.tags.end()) {
        for (size_t e : it->second) ++counts[e];
      }
    }
  }
  if (eligible == 0) log_warning("no emotion-lexicon words in corpus");
  std::map<std::string, double> out;
  for (size_t e = 0; e < counts.size(); ++e) {
    out[lexicon.emotions[e]] =
        eligible == 0 ? 0.0
                      : static_cast<double>(counts[e]) /
                            static_cast<double>(eligible);
  }
  return out;
}

SentimentResult sentiment_analysis(const Corpus& corpus,
                                   const SentimentClassifier& classifier,
                                   const Lexicon& topics,
                                   const BatchOptions& options) {
  check_batch_options(options);
  const size_t n = corpus.size();
  std::vector<std::optional<Sentiment>> labels(n);
  parallel_for(batch_count(n, options.batch_size), options.concurrency,
               [&](size_t b) {
                 const size_t begin = b * options.batch_size;
                 const size_t end = std::min(n, begin + options.batch_size);
                 auto got =
                     classifier.classify(sentence_texts(corpus, begin, end));
                 if (got.size() != end - begin) {
                   throw Error("sentiment classifier returned " +
                               std::to_string(got.size()) + " labels for " +
                               std::to_string(end - begin) + " sentences");
                 }
                 std::copy(got.begin(), got.end(),
                           labels.begin() + static_cast<ptrdiff_t>(begin));
               });

  SentimentResult result;
  std::vector<Sentence> annotated(corpus.sentences().begin(),
                                  corpus.sentences().end());
  size_t pos = 0, neu = 0, neg = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!labels[i]) {
      ++result.failures;
      log_warning("sentiment classification failed for sentence " +
                  std::to_string(corpus[i].id) + "; counted as neutral");
      labels[i] = Sentiment::kNeutral;
    }
    annotated[i].flags.sentiment = labels[i];
    switch (*labels[i]) {
      case Sentiment::kPositive:
        ++pos;
        break;
      case Sentiment::kNeutral:
        ++neu;
        break;
      case Sentiment::kNegative:
        ++neg;
        break;
    }
  }
  result.pos_pct = percent(pos, n);
  result.neu_pct = percent(neu, n);
  result.neg_pct = percent(neg, n);

  for (const auto& [category, subs] : topics.categories) {
    for (const auto& [sub, terms] : subs) {
      TermMatcher matcher{std::span<const Term>(terms)};
      size_t mentions = 0, tpos = 0, tneg = 0;
      for (size_t i = 0; i < n; ++i) {
        if (!matcher.contains_any(corpus[i].lower_tokens)) continue;
        ++mentions;
        tpos += *labels[i] == Sentiment::kPositive;
        tneg += *labels[i] == Sentiment::kNegative;
      }
      result.stance[category][sub] =
          mentions == 0 ? std::nullopt
                        : std::optional<double>(percent(tpos, mentions) -
                                                percent(tneg, mentions));
    }
  }
  result.annotated = corpus.derive(
      std::move(annotated),
      {"sentiment_analysis", {{"failures", result.failures}}});
  return result;
}

ToxicityResult toxicity_rates(const Corpus& corpus,
                              const ProbabilityClassifier& toxicity,
                              const ProbabilityClassifier& hate,
                              double threshold, const BatchOptions& options) {
  check_batch_options(options);
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InvalidInput("toxicity threshold must lie in [0, 1]");
  }
  const size_t n = corpus.size();
  const size_t batches = batch_count(n, options.batch_size);
  Checkpoint checkpoint(options.checkpoint, "toxicity_rates",
                        sha256_hex(corpus_fingerprint(corpus) + "/" +
                                   std::to_string(options.batch_size)));
  std::vector<double> tox_p(n), hate_p(n);
  try {
    parallel_for(batches, options.concurrency, [&](size_t b) {
      const size_t begin = b * options.batch_size;
      const size_t end = std::min(n, begin + options.batch_size);
      json entry;
      if (auto saved = checkpoint.get(b)) {
        entry = std::move(*saved);
      } else {
        const auto texts = sentence_texts(corpus, begin, end);
        entry = {{"toxicity", checked_scores(toxicity, texts)},
                 {"hate", checked_scores(hate, texts)}};
        checkpoint.put(b, entry);
      }
      for (size_t i = begin; i < end; ++i) {
        tox_p[i] = entry.at("toxicity").at(i - begin).get<double>();
        hate_p[i] = entry.at("hate").at(i - begin).get<double>();
      }
    });
  } catch (const ServiceUnavailable& e) {
    if (!checkpoint.persistent()) throw;
    checkpoint.save();
    throw ServiceUnavailable(
        std::string(e.what()) + "; progress saved to " +
            checkpoint.path().string() + " (" +
            std::to_string(checkpoint.size()) + "/" + std::to_string(batches) +
            " batches)",
        checkpoint.path().string());
  }

  ToxicityResult result;
  std::vector<Sentence> flagged(corpus.sentences().begin(),
                                corpus.sentences().end());
  for (size_t i = 0; i < n; ++i) {
    const bool is_toxic = tox_p[i] >= threshold;
    const bool is_hate = hate_p[i] >= threshold;
    flagged[i].flags.toxic = is_toxic;
    flagged[i].flags.hate = is_hate;
    result.toxic += is_toxic;
    result.hate += is_hate;
    result.flagged += is_toxic || is_hate;
  }
  if (n == 0) log_warning("toxicity_rates on an empty corpus");
  result.toxic_pct = percent(result.toxic, n);
  result.hate_pct = percent(result.hate, n);
  result.flagged_pct = percent(result.flagged, n);
  result.flagged_corpus =
      corpus.derive(std::move(flagged), {"toxicity_rates",
                                         {{"threshold", threshold},
                                          {"toxic", result.toxic},
                                          {"hate", result.hate}}});
  checkpoint.remove();
  return result;
}

double first_order_coherence(const Corpus& corpus,
                             const SentenceEmbedder& embedder) {
  double sum = 0.0;
  size_t pairs = 0;
  for (auto doc : corpus.documents()) {
    if (doc.size() < 2) continue;
    std::vector<double> prev = embedder.embed(doc[0].text);
    for (size_t i = 1; i < doc.size(); ++i) {
      std::vector<double> cur = embedder.embed(doc[i].text);
      sum += cosine(prev, cur);
      ++pairs;
      prev = std::move(cur);
    }
  }
  if (pairs == 0) {
    throw InvalidInput(
        "coherence needs a document with at least two sentences");
  }
  return sum / static_cast<double>(pairs);
}

json audit_to_json(const AuditReport& report) {
  json out = {{"summary", summary_to_json(report.summary)}};
  if (report.keyword_pct) out["keyword_pct"] = *report.keyword_pct;
  if (const auto& s = report.structural) {
    out["structural"] = {{"avg_syllables_per_word", s->avg_syllables_per_word},
                         {"avg_word_length", s->avg_word_length},
                         {"avg_sentence_length", s->avg_sentence_length},
                         {"fkgl", s->fkgl},
                         {"ttr", s->ttr},
                         {"pronoun_noun_ratio", s->pronoun_noun_ratio},
                         {"words", s->words},
                         {"sentences", s->sentences}};
  }
  if (report.emotion) out["emotion"] = *report.emotion;
  if (const auto& s = report.sentiment) {
    json stance = json::object();
    for (const auto& [cat, subs] : s->stance) {
      for (const auto& [sub, v] : subs) stance[cat][sub] = optional_number(v);
    }
    out["sentiment"] = {{"pos_pct", s->pos_pct},
                        {"neu_pct", s->neu_pct},
                        {"neg_pct", s->neg_pct},
                        {"failures", s->failures},
                        {"stance", std::move(stance)}};
  }
  if (const auto& t = report.toxicity) {
    out["toxicity"] = {{"toxic_pct", t->toxic_pct},
                       {"hate_pct", t->hate_pct},
                       {"flagged_pct", t->flagged_pct},
                       {"toxic", t->toxic},
                       {"hate", t->hate},
                       {"flagged", t->flagged}};
  }
  if (report.coherence) out["coherence"] = *report.coherence;
  return out;
}

void write_audit_csv(const AuditReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (report.keyword_pct) {
    std::vector<CsvRow> rows = {{"category", "subcategory", "percentage"}};
    for (const auto& [cat, subs] : *report.keyword_pct) {
      for (const auto& [sub, v] : subs) {
        rows.push_back({cat, sub, format_number(v)});
      }
    }
    write_csv_file(dir / "keywords.csv", rows);
  }
  if (const auto& s = report.structural) {
    write_csv_file(dir / "structural.csv",
                   {{"metric", "value"},
                    {"avg_syllables_per_word",
                     format_number(s->avg_syllables_per_word)},
                    {"avg_word_length", format_number(s->avg_word_length)},
                    {"avg_sentence_length",
                     format_number(s->avg_sentence_length)},
                    {"fkgl", format_number(s->fkgl)},
                    {"ttr", format_number(s->ttr)},
                    {"pronoun_noun_ratio",
                     format_number(s->pronoun_noun_ratio)}});
  }
  if (report.emotion) {
    std::vector<CsvRow> rows = {{"emotion", "score"}};
    for (const auto& [e, v] : *report.emotion) {
      rows.push_back({e, format_number(v)});
    }
    write_csv_file(dir / "emotion.csv", rows);
  }
  if (const auto& s = report.sentiment) {
    write_csv_file(dir / "sentiment.csv",
                   {{"label", "percentage"},
                    {"pos", format_number(s->pos_pct)},
                    {"neu", format_number(s->neu_pct)},
                    {"neg", format_number(s->neg_pct)}});
    std::vector<CsvRow> rows = {{"category", "topic", "stance"}};
    for (const auto& [cat, subs] : s->stance) {
      for (const auto& [sub, v] : subs) {
        rows.push_back({cat, sub, v ? format_number(*v) : ""});
      }
    }
    write_csv_file(dir / "stance.csv", rows);
  }
  if (const auto& t = report.toxicity) {
    write_csv_file(dir / "toxicity.csv",
                   {{"measure", "percentage"},
                    {"toxic", format_number(t->toxic_pct)},
                    {"hate", format_number(t->hate_pct)},
                    {"toxic_or_hate", format_number(t->flagged_pct)}});
  }
}

}  // namespace corpusbias
