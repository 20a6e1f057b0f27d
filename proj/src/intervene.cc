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

#include "corpusbias/intervene.h"

#include "corpusbias/checkpoint.h"
#include "corpusbias/csv.h"
#include "corpusbias/error.h"
#include "corpusbias/file_io.h"
#include "corpusbias/hashing.h"
#include "corpusbias/logging.h"
#include "corpusbias/parallel.h"
#include "corpusbias/resources.h"
#include "corpusbias/rng.h"
#include "corpusbias/text.h"

namespace corpusbias {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool is_content_word(const std::string& lower) {
  return is_word(lower) && !resource_set("function_words.txt").contains(lower) &&
         !resource_set("pronouns.txt").contains(lower);
}

WordPairTable::Predicate parse_predicate(const std::string& name) {
  using P = WordPairTable::Predicate;
  if (name == "always") return P::kAlways;
  if (name == "next_content_word") return P::kNextContentWord;
  if (name == "next_not_content_word") return P::kNextNotContentWord;
  if (name == "next_in") return P::kNextIn;
  if (name == "next_not_in") return P::kNextNotIn;
  throw InvalidInput("unknown context rule predicate \"" + name + "\"");
}

void check_term(const std::string& term) {
  const auto tokens = tokenize(term);
  if (tokens.size() != 1 || tokens[0] != term || ascii_lower(term) != term) {
    throw InvalidInput("word pair term \"" + term +
                       "\" must be a single lowercase token");
  }
}

double percent(size_t part, size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) /
                                static_cast<double>(whole);
}

double ratio(size_t after, size_t before) {
  return before == 0 ? 1.0 : static_cast<double>(after) /
                                 static_cast<double>(before);
}

size_t token_total(std::span<const Sentence> sentences) {
  size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

InterventionResult finish(const Corpus& input, std::vector<Sentence> output,
                          InterventionManifest manifest) {
  manifest.counts.input_sentences = input.size();
  manifest.counts.output_sentences = output.size();
  Corpus corpus = input.derive(std::move(output),
                               {manifest.operation, manifest_to_json(manifest)});
  return {std::move(corpus), std::move(manifest)};
}

void require_flags(const Corpus& corpus, std::string_view operation) {
  for (const auto& s : corpus.sentences()) {
    if (!s.has_toxicity_flags()) {
      throw InvalidInput(std::string(operation) + ": sentence " +
                         std::to_string(s.id) +
                         " has no toxicity flags; run the audit toxicity step "
                         "first");
    }
  }
}

std::string fill_prompt(const std::string& tmpl, const std::string& sentence) {
  static constexpr std::string_view kSlot = "{sentence}";
  std::string out;
  size_t pos = 0;
  for (size_t hit; (hit = tmpl.find(kSlot, pos)) != std::string::npos;
       pos = hit + kSlot.size()) {
    out.append(tmpl, pos, hit - pos);
    out += sentence;
  }
  out.append(tmpl, pos);
  return out;
}

ServiceUnavailable saved_outage(const ServiceUnavailable& e,
                                const Checkpoint& checkpoint, size_t total) {
  checkpoint.save();
  return ServiceUnavailable(std::string(e.what()) + "; progress saved to " +
                                checkpoint.path().string() + " (" +
                                std::to_string(checkpoint.size()) + "/" +
                                std::to_string(total) + " items)",
                            checkpoint.path().string());
}

// A document as one string with token offsets into it.
struct DocLayout {
  std::span<const Sentence> sentences;
  std::string text;
  std::vector<TokenSpan> spans;
  std::vector<size_t> sentence_start;  // first token of each sentence
};

DocLayout layout(std::span<const Sentence> sentences) {
  DocLayout doc{sentences, {}, {}, {}};
  for (const auto& s : sentences) {
    if (!doc.text.empty()) doc.text += ' ';
    const size_t offset = doc.text.size();
    doc.sentence_start.push_back(doc.spans.size());
    for (auto span : tokenize_spans(s.text)) {
      span.begin += offset;
      span.end += offset;
      doc.spans.push_back(std::move(span));
    }
    doc.text += s.text;
  }
  return doc;
}

struct PerturbOutcome {
  std::optional<std::string> perturbed;
  std::string category;
  std::string subcategory;
  size_t targets = 0;
  size_t tries = 0;
};

json outcome_to_json(const PerturbOutcome& o) {
  return {{"perturbed", o.perturbed ? json(*o.perturbed) : json(nullptr)},
          {"category", o.category},
          {"subcategory", o.subcategory},
          {"targets", o.targets},
          {"tries", o.tries}};
}

PerturbOutcome outcome_from_json(const json& j) {
  PerturbOutcome o;
  if (!j.at("perturbed").is_null()) o.perturbed = j.at("perturbed");
  o.category = j.at("category");
  o.subcategory = j.at("subcategory");
  o.targets = j.at("targets");
  o.tries = j.at("tries");
  return o;
}

}  // namespace

WordPairTable::WordPairTable(
    std::vector<std::pair<std::string, std::string>> pairs,
    std::vector<Rule> rules)
    : pairs_(std::move(pairs)) {
  std::map<std::string, std::set<std::string>> partners;
  auto place = [&](const std::string& term, bool a_side) {
    auto [it, inserted] = on_a_side_.emplace(term, a_side);
    if (!inserted && it->second != a_side) {
      throw InvalidInput("word pair term \"" + term +
                         "\" appears on both sides of the table");
    }
  };
  for (const auto& [a, b] : pairs_) {
    check_term(a);
    check_term(b);
    if (a == b) throw InvalidInput("word pair maps \"" + a + "\" to itself");
    place(a, true);
    place(b, false);
    defaults_.emplace(a, b);
    defaults_.emplace(b, a);
    partners[a].insert(b);
    partners[b].insert(a);
  }
  for (auto& rule : rules) {
    auto it = partners.find(rule.term);
    if (it == partners.end()) {
      throw InvalidInput("context rule term \"" + rule.term +
                         "\" is not in the pair table");
    }
    if (!it->second.contains(rule.replacement)) {
      throw InvalidInput("context rule replaces \"" + rule.term + "\" with \"" +
                         rule.replacement + "\", which is not its pair");
    }
    rules_[rule.term].push_back(std::move(rule));
  }
}

WordPairTable WordPairTable::parse(std::string_view csv, const json& rules) {
  const auto rows = parse_csv(csv);
  if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "term_a" ||
      rows[0][1] != "term_b") {
    throw InvalidInput("word pair CSV must start with header term_a,term_b");
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() == 1 && rows[r][0].empty()) continue;
    if (rows[r].size() != 2) {
      throw InvalidInput("word pair CSV row " + std::to_string(r + 1) +
                         " must have two fields");
    }
    pairs.emplace_back(rows[r][0], rows[r][1]);
  }
  if (!rules.is_null() && !rules.is_array()) {
    throw InvalidInput("context rules must be a JSON array");
  }
  std::vector<Rule> parsed;
  for (const auto& r : rules.is_array() ? rules : json::array()) {
    try {
      Rule rule{r.at("term").get<std::string>(),
                parse_predicate(r.at("predicate").get<std::string>()),
                r.at("replacement").get<std::string>(),
                {}};
      if (rule.predicate == Predicate::kNextIn ||
          rule.predicate == Predicate::kNextNotIn) {
        for (const auto& w : r.at("words")) rule.words.insert(ascii_lower(w.get<std::string>()));
      }
      parsed.push_back(std::move(rule));
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("malformed context rule: ") + e.what());
    }
  }
  return WordPairTable(std::move(pairs), std::move(parsed));
}

WordPairTable WordPairTable::load(const fs::path& csv,
                                  const std::optional<fs::path>& rules) {
  const json rule_json =
      rules ? read_json_file(*rules, "context rules") : json();
  return parse(read_text_file(csv, "word pair table"), rule_json);
}

WordPairTable WordPairTable::default_gender() {
  return parse(resource("gender_pairs.csv"),
               json::parse(resource("gender_rules.json")));
}

std::vector<std::string> WordPairTable::side(bool a_side) const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& [a, b] : pairs_) {
    const std::string& term = a_side ? a : b;
    if (seen.insert(term).second) out.push_back(term);
  }
  return out;
}

std::string WordPairTable::replacement(const std::string& lower,
                                       const std::string* next_lower) const {
  if (auto it = rules_.find(lower); it != rules_.end()) {
    for (const auto& rule : it->second) {
      bool holds = false;
      switch (rule.predicate) {
        case Predicate::kAlways:
          holds = true;
          break;
        case Predicate::kNextContentWord:
          holds = next_lower && is_content_word(*next_lower);
          break;
        case Predicate::kNextNotContentWord:
          holds = !next_lower || !is_content_word(*next_lower);
          break;
        case Predicate::kNextIn:
          holds = next_lower && rule.words.contains(*next_lower);
          break;
        case Predicate::kNextNotIn:
          holds = !next_lower || !rule.words.contains(*next_lower);
          break;
      }
      if (holds) return rule.replacement;
    }
  }
  return defaults_.at(lower);
}

std::optional<std::string> WordPairTable::swap(std::string_view sentence) const {
  const auto spans = tokenize_spans(sentence);
  std::vector<std::string> lower;
  lower.reserve(spans.size());
  for (const auto& s : spans) lower.push_back(ascii_lower(s.text));

  std::string out;
  size_t copied = 0;
  bool matched = false;
  for (size_t i = 0; i < spans.size(); ++i) {
    if (!contains(lower[i])) continue;
    matched = true;
    const std::string* next = i + 1 < spans.size() ? &lower[i + 1] : nullptr;
    out.append(sentence.substr(copied, spans[i].begin - copied));
    out += apply_case(replacement(lower[i], next), case_pattern(spans[i].text));
    copied = spans[i].end;
  }
  if (!matched) return std::nullopt;
  out.append(sentence.substr(copied));
  return out;
}

json manifest_to_json(const InterventionManifest& m) {
  return {{"operation", m.operation},
          {"parameters", m.parameters},
          {"counts",
           {{"input_sentences", m.counts.input_sentences},
            {"output_sentences", m.counts.output_sentences},
            {"modified", m.counts.modified},
            {"discarded", m.counts.discarded}}},
          {"seed", m.seed ? json(*m.seed) : json(nullptr)},
          {"statistics", m.statistics}};
}

InterventionManifest manifest_from_json(const json& j) {
  try {
    InterventionManifest m;
    m.operation = j.at("operation");
    m.parameters = j.value("parameters", json::object());
    const json& c = j.at("counts");
    m.counts = {c.at("input_sentences"), c.at("output_sentences"),
                c.at("modified"), c.at("discarded")};
    if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"];
    m.statistics = j.value("statistics", json::object());
    return m;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed intervention manifest: ") +
                       e.what());
  }
}

InterventionResult cda_augment(const Corpus& corpus,
                               const WordPairTable& table) {
  if (table.empty()) throw InvalidInput("cda_augment: word pair table is empty");
  std::vector<Sentence> out;
  out.reserve(corpus.size() * 2);
  size_t matched = 0;
  for (const auto& s : corpus.sentences()) {
    out.push_back(s);
    if (auto swapped = table.swap(s.text)) {
      ++matched;
      out.push_back(Sentence::make(0, s.doc_id, *swapped, s.flags));
    }
  }
  InterventionManifest m;
  m.operation = "cda_augment";
  m.parameters = {{"pairs", table.pairs().size()}};
  m.counts.modified = matched;
  m.statistics = {
      {"matched_fraction", corpus.empty() ? 0.0 : ratio(matched, corpus.size())},
      {"growth_ratio", ratio(out.size(), corpus.size())},
      {"token_growth", ratio(token_total(out), token_total(corpus.sentences()))}};
  return finish(corpus, std::move(out), std::move(m));
}

InterventionResult cds_substitute(const Corpus& corpus,
                                  const WordPairTable& table) {
  if (table.empty()) {
    throw InvalidInput("cds_substitute: word pair table is empty");
  }
  std::vector<Sentence> out;
  out.reserve(corpus.size());
  size_t modified = 0;
  for (const auto& s : corpus.sentences()) {
    if (auto swapped = table.swap(s.text)) {
      ++modified;
      out.push_back(Sentence::make(0, s.doc_id, *swapped, s.flags));
    } else {
      out.push_back(s);
    }
  }
  InterventionManifest m;
  m.operation = "cds_substitute";
  m.parameters = {{"pairs", table.pairs().size()}};
  m.counts.modified = modified;
  return finish(corpus, std::move(out), std::move(m));
}

InterventionResult duplicate_random(const Corpus& corpus, size_t n,
                                    uint64_t seed) {
  if (corpus.empty()) throw InvalidInput("duplicate_random: corpus is empty");
  SeededRng rng(seed);
  std::vector<size_t> copies(corpus.size(), 0);
  for (size_t k = 0; k < n; ++k) ++copies[rng.uniform_index(corpus.size())];
  std::vector<Sentence> out;
  out.reserve(corpus.size() + n);
  size_t distinct = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    for (size_t c = 0; c <= copies[i]; ++c) out.push_back(corpus[i]);
    distinct += copies[i] > 0;
  }
  InterventionManifest m;
  m.operation = "duplicate_random";
  m.seed = seed;
  m.parameters = {{"n_duplicates", n}};
  m.statistics = {{"distinct_sampled", distinct},
                  {"growth_ratio", ratio(out.size(), corpus.size())}};
  return finish(corpus, std::move(out), std::move(m));
}

InterventionResult remove_toxic(const Corpus& corpus) {
  require_flags(corpus, "remove_toxic");
  std::vector<Sentence> out;
  for (const auto& s : corpus.sentences()) {
    if (!s.flagged()) out.push_back(s);
  }
  const size_t removed = corpus.size() - out.size();
  if (out.empty() && !corpus.empty()) {
    log_warning("remove_toxic: every sentence was flagged; output is empty");
  }
  InterventionManifest m;
  m.operation = "remove_toxic";
  m.counts.discarded = removed;
  m.statistics = {{"removed_pct", percent(removed, corpus.size())}};
  return finish(corpus, std::move(out), std::move(m));
}

InterventionResult remove_random(const Corpus& corpus, size_t n,
                                 uint64_t seed) {
  std::vector<size_t> candidates;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].flagged()) candidates.push_back(i);
  }
  if (n > candidates.size()) {
    throw InvalidInput("remove_random: cannot remove " + std::to_string(n) +
                       " sentences; only " +
                       std::to_string(candidates.size()) + " are unflagged");
  }
  SeededRng rng(seed);
  std::vector<bool> drop(corpus.size(), false);
  for (size_t i = 0; i < n; ++i) {
    std::swap(candidates[i],
              candidates[i + rng.uniform_index(candidates.size() - i)]);
    drop[candidates[i]] = true;
  }
  std::vector<Sentence> out;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (!drop[i]) out.push_back(corpus[i]);
  }
  InterventionManifest m;
  m.operation = "remove_random";
  m.seed = seed;
  m.parameters = {{"n_remove", n}};
  m.counts.discarded = n;
  m.statistics = {{"removed_pct", percent(n, corpus.size())}};
  return finish(corpus, std::move(out), std::move(m));
}

InterventionResult detox_rewrite(const Corpus& corpus, const Rewriter& rewriter,
                                 const ProbabilityClassifier& toxicity,
                                 const ProbabilityClassifier& hate,
                                 const DetoxOptions& options) {
  require_flags(corpus, "detox_rewrite");
  if (options.max_attempts == 0) {
    throw InvalidInput("detox_rewrite: max_attempts must be at least 1");
  }
  if (!(options.threshold >= 0.0 && options.threshold <= 1.0)) {
    throw InvalidInput("detox_rewrite: threshold must lie in [0, 1]");
  }
  const std::string tmpl = options.prompt_template.empty()
                               ? std::string(resource("detox_prompt.txt"))
                               : options.prompt_template;
  std::vector<size_t> flagged;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].flagged()) flagged.push_back(i);
  }
  Checkpoint checkpoint(
      options.checkpoint, "detox_rewrite",
      sha256_hex(corpus_fingerprint(corpus) + "/" +
                 std::to_string(options.max_attempts) + "/" +
                 format_number(options.threshold) + "/" + sha256_hex(tmpl)));

  // Entry per flagged sentence: {"text": accepted rewrite or null,
  // "attempts": n}.
  std::vector<json> results(flagged.size());
  try {
    parallel_for(flagged.size(), options.concurrency, [&](size_t k) {
      if (auto saved = checkpoint.get(k)) {
        results[k] = std::move(*saved);
        return;
      }
      std::string current = corpus[flagged[k]].text;
      json entry = {{"text", nullptr}, {"attempts", 0}};
      for (size_t attempt = 1; attempt <= options.max_attempts; ++attempt) {
        entry["attempts"] = attempt;
        std::string candidate =
            collapse_whitespace(rewriter.rewrite(fill_prompt(tmpl, current),
                                                 current));
        if (candidate.empty()) continue;
        const std::vector<std::string> batch = {candidate};
        const double t = toxicity.score(batch).at(0);
        const double h = hate.score(batch).at(0);
        if (t < options.threshold && h < options.threshold) {
          entry["text"] = candidate;
          break;
        }
        current = std::move(candidate);
      }
      checkpoint.put(k, entry);
      results[k] = std::move(entry);
    });
  } catch (const ServiceUnavailable& e) {
    if (!checkpoint.persistent()) throw;
    throw saved_outage(e, checkpoint, flagged.size());
  }

  std::vector<Sentence> out;
  std::map<std::string, size_t> attempts;
  size_t rewritten = 0;
  size_t discarded = 0;
  size_t next_flagged = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (next_flagged >= flagged.size() || flagged[next_flagged] != i) {
      out.push_back(corpus[i]);
      continue;
    }
    const json& r = results[next_flagged++];
    if (r["text"].is_null()) {
      ++discarded;
      continue;
    }
    ++rewritten;
    ++attempts[std::to_string(r["attempts"].get<size_t>())];
    for (auto& s : segment_and_tokenize(r["text"].get<std::string>())) {
      s.doc_id = corpus[i].doc_id;
      s.flags = corpus[i].flags;
      s.flags.toxic = false;
      s.flags.hate = false;
      out.push_back(std::move(s));
    }
  }
  InterventionManifest m;
  m.operation = "detox_rewrite";
  m.parameters = {{"max_attempts", options.max_attempts},
                  {"threshold", options.threshold},
                  {"prompt_sha256", sha256_hex(tmpl)}};
  m.counts.modified = rewritten;
  m.counts.discarded = discarded;
  m.statistics = {{"flagged", flagged.size()},
                  {"rewritten", rewritten},
                  {"discarded", discarded},
                  {"discard_rate_pct", percent(discarded, corpus.size())},
                  {"attempts_to_success", attempts}};
  checkpoint.remove();
  return finish(corpus, std::move(out), std::move(m));
}

std::map<std::string, std::vector<std::string>>
PerturbationTargets::default_subcategories() {
  return {{"gender", {"man", "woman", "non-binary"}},
          {"race",
           {"White", "Black", "Asian", "Hispanic", "Native-American",
            "Pacific-Islander"}}};
}

PerturbationTargets PerturbationTargets::from_json(const json& j) {
  PerturbationTargets t;
  try {
    t.subcategories =
        j.contains("subcategories")
            ? j.at("subcategories")
                  .get<std::map<std::string, std::vector<std::string>>>()
            : default_subcategories();
    for (const auto& [word, cats] : j.at("words").items()) {
      t.words[ascii_lower(word)] = cats.get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed perturbation targets: ") +
                       e.what());
  }
  for (const auto& [cat, subs] : t.subcategories) {
    if (subs.empty()) {
      throw InvalidInput("perturbation category \"" + cat +
                         "\" has no subcategories");
    }
  }
  for (const auto& [word, cats] : t.words) {
    if (cats.empty()) {
      throw InvalidInput("target word \"" + word + "\" has no categories");
    }
    for (const auto& c : cats) {
      if (!t.subcategories.contains(c)) {
        throw InvalidInput("target word \"" + word +
                           "\" names unknown category \"" + c + "\"");
      }
    }
  }
  return t;
}

PerturbationTargets PerturbationTargets::load(const fs::path& path) {
  return from_json(read_json_file(path, "perturbation targets"));
}

InterventionResult perturb_corpus(const Corpus& corpus,
                                  const Perturber& perturber,
                                  const PerturbationTargets& targets,
                                  const PerturbOptions& options) {
  if (options.chunk_len == 0) {
    throw InvalidInput("perturb_corpus: chunk length must be positive");
  }
  struct ChunkRef {
    size_t doc;
    size_t begin;  // token range within the document
    size_t end;
  };
  std::vector<DocLayout> docs;
  std::vector<ChunkRef> chunks;
  for (auto sentences : corpus.documents()) {
    docs.push_back(layout(sentences));
    const size_t n = docs.back().spans.size();
    for (size_t b = 0; b < n; b += options.chunk_len) {
      chunks.push_back({docs.size() - 1, b, std::min(n, b + options.chunk_len)});
    }
  }
  auto chunk_text = [&](const ChunkRef& c) {
    const DocLayout& d = docs[c.doc];
    const size_t from = d.spans[c.begin].begin;
    return d.text.substr(from, d.spans[c.end - 1].end - from);
  };

  Checkpoint checkpoint(
      options.checkpoint, "perturb_corpus",
      sha256_hex(corpus_fingerprint(corpus) + "/" +
                 std::to_string(options.chunk_len) + "/" +
                 std::to_string(options.seed) + "/" +
                 json{{"words", targets.words},
                      {"subcategories", targets.subcategories}}
                     .dump()));
  std::vector<PerturbOutcome> outcomes(chunks.size());
  try {
    parallel_for(chunks.size(), options.concurrency, [&](size_t c) {
      if (auto saved = checkpoint.get(c)) {
        outcomes[c] = outcome_from_json(*saved);
        return;
      }
      const ChunkRef& ref = chunks[c];
      const DocLayout& d = docs[ref.doc];
      std::vector<std::string> found;
      std::set<std::string> seen;
      for (size_t t = ref.begin; t < ref.end; ++t) {
        std::string lower = ascii_lower(d.spans[t].text);
        if (targets.words.contains(lower) && seen.insert(lower).second) {
          found.push_back(std::move(lower));
        }
      }
      SeededRng rng = SeededRng::for_item(options.seed, c);
      rng.shuffle(std::span<std::string>(found));
      PerturbOutcome outcome;
      outcome.targets = found.size();
      const std::string text = chunk_text(ref);
      for (const auto& word : found) {
        const auto& cats = targets.words.at(word);
        const std::string& cat = cats[rng.uniform_index(cats.size())];
        const auto& subs = targets.subcategories.at(cat);
        const std::string& sub = subs[rng.uniform_index(subs.size())];
        ++outcome.tries;
        std::string result = perturber.perturb(text, word, cat, sub);
        if (result != text) {
          outcome.perturbed = std::move(result);
          outcome.category = cat;
          outcome.subcategory = sub;
          break;
        }
      }
      checkpoint.put(c, outcome_to_json(outcome));
      outcomes[c] = std::move(outcome);
    });
  } catch (const ServiceUnavailable& e) {
    if (!checkpoint.persistent()) throw;
    throw saved_outage(e, checkpoint, chunks.size());
  }

  // Tally and rebuild.
  json category = json::object();
  json subcategory = json::object();
  for (const auto& [cat, subs] : targets.subcategories) {
    category[cat] = 0;
    for (const auto& s : subs) subcategory[cat][s] = 0;
  }
  size_t changed = 0, no_targets = 0, exhausted = 0, tries = 0;
  for (const auto& o : outcomes) {
    tries += o.tries;
    if (o.perturbed) {
      ++changed;
      category[o.category] = category[o.category].get<size_t>() + 1;
      auto& slot = subcategory[o.category][o.subcategory];
      slot = slot.get<size_t>() + 1;
    } else if (o.targets == 0) {
      ++no_targets;
    } else {
      ++exhausted;
    }
  }

  std::vector<Sentence> out;
  size_t modified = 0;
  size_t next_chunk = 0;
  for (size_t di = 0; di < docs.size(); ++di) {
    const DocLayout& d = docs[di];
    std::string text;
    size_t copied = 0;
    bool doc_changed = false;
    std::vector<bool> touched(d.sentences.size(), false);
    for (; next_chunk < chunks.size() && chunks[next_chunk].doc == di;
         ++next_chunk) {
      const ChunkRef& ref = chunks[next_chunk];
      const auto& perturbed = outcomes[next_chunk].perturbed;
      if (!perturbed) continue;
      doc_changed = true;
      const size_t from = d.spans[ref.begin].begin;
      text.append(d.text, copied, from - copied);
      text += *perturbed;
      copied = d.spans[ref.end - 1].end;
      for (size_t s = 0; s < d.sentences.size(); ++s) {
        const size_t s_begin = d.sentence_start[s];
        const size_t s_end = s_begin + d.sentences[s].tokens.size();
        if (s_begin < ref.end && ref.begin < s_end) touched[s] = true;
      }
    }
    if (!doc_changed) {
      out.insert(out.end(), d.sentences.begin(), d.sentences.end());
      continue;
    }
    text.append(d.text, copied);
    for (bool t : touched) modified += t;
    for (auto& s : segment_and_tokenize(text)) {
      s.doc_id = d.sentences[0].doc_id;
      out.push_back(std::move(s));
    }
  }

  InterventionManifest m;
  m.operation = "perturb_corpus";
  m.seed = options.seed;
  m.parameters = {{"chunk_len", options.chunk_len},
                  {"target_words", targets.words.size()}};
  m.counts.modified = modified;
  m.statistics = {{"total_chunks", chunks.size()},
                  {"changed", changed},
                  {"no_targets", no_targets},
                  {"exhausted", exhausted},
                  {"tries", tries},
                  {"category", std::move(category)},
                  {"subcategory", std::move(subcategory)}};
  checkpoint.remove();
  return finish(corpus, std::move(out), std::move(m));
}

ChangeDistribution perturbation_stats(const InterventionManifest& manifest) {
  ChangeDistribution out;
  const json& s = manifest.statistics;
  const size_t total = s.value("total_chunks", size_t{0});
  out.any_change = percent(s.value("changed", size_t{0}), total);
  const json category = s.value("category", json::object());
  const json subcategory = s.value("subcategory", json::object());
  for (const auto& [cat, n] : category.items()) {
    out.category[cat] = percent(n.get<size_t>(), total);
  }
  for (const auto& [cat, subs] : subcategory.items()) {
    for (const auto& [sub, n] : subs.items()) {
      out.subcategory[cat][sub] = percent(n.get<size_t>(), total);
    }
  }
  return out;
}

}  // namespace corpusbias
