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

#include "cli.h"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <map>
#include <memory>
#include <vector>

#include "CLI11.hpp"
#include "corpusbias/analysis.h"
#include "corpusbias/audit.h"
#include "corpusbias/bench.h"
#include "corpusbias/clients.h"
#include "corpusbias/corpus.h"
#include "corpusbias/error.h"
#include "corpusbias/file_io.h"
#include "corpusbias/http_client.h"
#include "corpusbias/intervene.h"
#include "corpusbias/lexicon.h"
#include "corpusbias/lm_scorer.h"
#include "corpusbias/logging.h"
#include "corpusbias/projection_debias.h"

namespace corpusbias::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// Read access to one level of a JSON config. Relative paths resolve against
// the config file's directory and every error names the full key.
class Config {
 public:
  Config(json j, fs::path base, std::string prefix = "")
      : j_(std::move(j)), base_(std::move(base)), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw InvalidInput(where("") + "must be an object");
  }

  std::string key(std::string_view k) const { return prefix_ + std::string(k); }

  bool has(std::string_view k) const {
    return j_.contains(k) && !j_.at(std::string(k)).is_null();
  }

  const json& raw(std::string_view k) const {
    if (!has(k)) throw InvalidInput(where(k) + "is required");
    return j_.at(std::string(k));
  }

  Config child(std::string_view k) const {
    return Config(raw(k), base_, key(k) + ".");
  }

  std::string string(std::string_view k) const {
    const json& v = raw(k);
    if (!v.is_string()) throw InvalidInput(where(k) + "must be a string");
    return v.get<std::string>();
  }
  std::string string(std::string_view k, std::string fallback) const {
    return has(k) ? string(k) : fallback;
  }

  double number(std::string_view k, double fallback) const {
    if (!has(k)) return fallback;
    const json& v = raw(k);
    if (!v.is_number()) throw InvalidInput(where(k) + "must be a number");
    return v.get<double>();
  }

  uint64_t count(std::string_view k) const {
    const json& v = raw(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
      throw InvalidInput(where(k) + "must be a non-negative integer");
    }
    return v.get<uint64_t>();
  }
  uint64_t count(std::string_view k, uint64_t fallback) const {
    return has(k) ? count(k) : fallback;
  }

  bool flag(std::string_view k, bool fallback) const {
    if (!has(k)) return fallback;
    const json& v = raw(k);
    if (!v.is_boolean()) throw InvalidInput(where(k) + "must be true or false");
    return v.get<bool>();
  }

  fs::path path(std::string_view k) const {
    fs::path p = string(k);
    return p.is_absolute() ? p : base_ / p;
  }

  // Existing input file or directory.
  fs::path input(std::string_view k) const {
    fs::path p = path(k);
    if (!fs::exists(p)) {
      throw InvalidInput(where(k) + "no such file: " + p.string());
    }
    return p;
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (auto it = j_.begin(); it != j_.end(); ++it) out.push_back(it.key());
    return out;
  }

  const fs::path& base() const { return base_; }

  std::string where(std::string_view k) const {
    return "config key \"" + key(k) + "\": ";
  }

 private:
  json j_;
  fs::path base_;
  std::string prefix_;
};

// Runs `fn`, prefixing InvalidInput messages with the config key.
template <typename Fn>
auto keyed(const Config& cfg, std::string_view k, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InvalidInput& e) {
    const std::string what = e.what();
    if (what.starts_with("config key")) throw;
    throw InvalidInput(cfg.where(k) + what);
  }
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

// Endpoint from a URL string or {"url", "timeout_ms", "max_retries",
// "backoff_ms"}; the environment variable replaces the URL when set.
HttpEndpoint endpoint(const Config& cfg, std::string_view k,
                      const char* env_name) {
  HttpEndpoint e;
  const json& v = cfg.raw(k);
  if (v.is_string()) {
    e.base_url = v.get<std::string>();
  } else {
    const Config sub = cfg.child(k);
    e.base_url = sub.string("url");
    e.timeout = std::chrono::milliseconds(sub.count("timeout_ms", 30000));
    e.max_retries = static_cast<int>(sub.count("max_retries", 3));
    e.backoff = std::chrono::milliseconds(sub.count("backoff_ms", 100));
  }
  if (auto override_url = env(env_name)) e.base_url = *override_url;
  return e;
}

CorpusFormat format_for(const Config& cfg, std::string_view format_key,
                        const fs::path& path) {
  if (cfg.has(format_key)) {
    return keyed(cfg, format_key,
                 [&] { return parse_corpus_format(cfg.string(format_key)); });
  }
  return path.extension() == ".jsonl" ? CorpusFormat::kJsonl
                                      : CorpusFormat::kPlaintext;
}

Corpus load_corpus_key(const Config& cfg, std::string_view k = "corpus") {
  const fs::path p = cfg.input(k);
  const CorpusFormat format = format_for(cfg, "format", p);
  return keyed(cfg, k, [&] { return load_corpus(p, format); });
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunContext {
  Invocation invocation;
  Config cfg;
  json meta = json::object();  // extra sidecar fields

  std::optional<uint64_t> seed() const {
    if (invocation.seed) return invocation.seed;
    if (cfg.has("seed")) return cfg.count("seed");
    return std::nullopt;
  }

  uint64_t required_seed(std::string_view why) const {
    auto s = seed();
    if (!s) {
      throw InvalidInput(cfg.where("seed") + "is required for " +
                         std::string(why));
    }
    return *s;
  }

  // --resume wins over the config; otherwise `<output>.<name>.checkpoint.json`.
  fs::path checkpoint(const Config& sub, const fs::path& output,
                      std::string_view name) const {
    if (!invocation.resume.empty()) {
      if (!fs::exists(invocation.resume)) {
        throw InvalidInput("--resume: no such checkpoint: " +
                           invocation.resume.string());
      }
      return invocation.resume;
    }
    if (sub.has("checkpoint")) return sub.path("checkpoint");
    fs::path p = output;
    p.replace_extension("." + std::string(name) + ".checkpoint.json");
    return p;
  }

  size_t concurrency() const { return cfg.count("concurrency", 1); }
};

// Writes a report and its timestamp sidecar; the report alone is
// deterministic.
void write_report(const RunContext& ctx, const fs::path& path, const json& report) {
  write_text_file(path, report.dump(2) + "\n");
  json meta = ctx.meta;
  meta["generated_at"] = timestamp();
  meta["command"] = ctx.invocation.command;
  meta["config"] = fs::absolute(ctx.invocation.config).string();
  meta["tool_version"] = kToolVersion;
  if (auto s = ctx.seed()) meta["seed"] = *s;
  fs::path sidecar = path;
  sidecar.replace_extension(".meta.json");
  write_text_file(sidecar, meta.dump(2) + "\n");
  log_info("wrote " + path.string());
}

// ---------------------------------------------------------------- audit

std::unique_ptr<ProbabilityClassifier> probability_classifier(
    const Config& sub, std::string_view k, const char* env_name,
    bool hate) {
  if (sub.has(k)) {
    return std::make_unique<RemoteProbabilityClassifier>(
        endpoint(sub, k, env_name));
  }
  return std::make_unique<LexiconProbabilityClassifier>(
      hate ? LexiconProbabilityClassifier::default_hate()
           : LexiconProbabilityClassifier::default_toxicity());
}

int run_audit(RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  const fs::path output = cfg.path("output");
  const Corpus corpus = load_corpus_key(cfg);
  BatchOptions batch;
  batch.batch_size = cfg.count("batch_size", 64);
  batch.concurrency = ctx.concurrency();

  AuditReport report;
  report.summary = corpus_summary(corpus);
  Lexicon lexicon;
  if (cfg.has("lexicon")) {
    const fs::path p = cfg.input("lexicon");
    lexicon = keyed(cfg, "lexicon", [&] { return Lexicon::load(p); });
    report.keyword_pct = keyed(cfg, "lexicon",
                               [&] { return keyword_frequency(corpus, lexicon); });
  }
  if (cfg.flag("structural", true)) report.structural = structural_stats(corpus);
  if (cfg.has("emotion_lexicon")) {
    const fs::path p = cfg.input("emotion_lexicon");
    const auto emotions =
        keyed(cfg, "emotion_lexicon", [&] { return EmotionLexicon::load(p); });
    report.emotion = emotion_scores(corpus, emotions);
  }

  Corpus annotated = corpus;
  if (cfg.has("sentiment")) {
    const Config sub = cfg.child("sentiment");
    std::unique_ptr<SentimentClassifier> classifier;
    if (sub.has("endpoint")) {
      classifier = std::make_unique<RemoteSentimentClassifier>(
          endpoint(sub, "endpoint", "CORPUSBIAS_SENTIMENT_URL"));
    } else {
      classifier = std::make_unique<LexiconSentimentClassifier>(
          LexiconSentimentClassifier::make_default());
    }
    Lexicon topics = lexicon;
    if (sub.has("topics")) {
      const fs::path p = sub.input("topics");
      topics = keyed(sub, "topics", [&] { return Lexicon::load(p); });
    }
    report.sentiment = sentiment_analysis(annotated, *classifier, topics, batch);
    annotated = report.sentiment->annotated;
  }
  if (cfg.has("toxicity")) {
    const Config sub = cfg.child("toxicity");
    const auto toxic = probability_classifier(sub, "toxicity_endpoint",
                                              "CORPUSBIAS_TOXICITY_URL", false);
    const auto hate = probability_classifier(sub, "hate_endpoint",
                                             "CORPUSBIAS_HATE_URL", true);
    BatchOptions tox_batch = batch;
    if (sub.has("toxicity_endpoint") || sub.has("hate_endpoint")) {
      tox_batch.checkpoint = ctx.checkpoint(sub, output, "toxicity");
    }
    report.toxicity = toxicity_rates(annotated, *toxic, *hate,
                                     sub.number("threshold", 0.5), tox_batch);
    annotated = report.toxicity->flagged_corpus;
  }
  if (cfg.flag("coherence", false)) {
    report.coherence = first_order_coherence(
        corpus, HashedBowEmbedder(cfg.count("embedding_dimension", 256)));
  }

  write_report(ctx, output, audit_to_json(report));
  if (cfg.has("csv_dir")) write_audit_csv(report, cfg.path("csv_dir"));
  if (cfg.has("annotated_output")) {
    const fs::path p = cfg.path("annotated_output");
    write_corpus(annotated, p, CorpusFormat::kJsonl);
  }
  return kOk;
}

// ------------------------------------------------------------ intervene

// Last intervention recorded in a corpus manifest sidecar.
InterventionManifest last_intervention(const Config& cfg, std::string_view k) {
  const fs::path corpus_path = cfg.input(k);
  const fs::path sidecar = manifest_path(corpus_path);
  return keyed(cfg, k, [&] {
    const json j = read_json_file(sidecar, "corpus manifest");
    const json provenance = j.value("provenance", json::array());
    for (auto it = provenance.rbegin(); it != provenance.rend(); ++it) {
      if (it->value("operation", "") != "load_corpus") {
        return manifest_from_json(it->at("details"));
      }
    }
    throw InvalidInput("no intervention recorded in " + sidecar.string());
  });
}

// Ablation sizes: an explicit "count", or the sentences a reference
// intervention added (duplicate) or discarded (remove_random).
size_t ablation_count(const Config& cfg, bool added) {
  if (cfg.has("count")) return cfg.count("count");
  if (!cfg.has("match")) {
    throw InvalidInput(cfg.where("count") + "is required (or give \"match\")");
  }
  const auto m = last_intervention(cfg, "match");
  if (added) {
    if (m.counts.output_sentences < m.counts.input_sentences) {
      throw InvalidInput(cfg.where("match") + "reference run added no sentences");
    }
    return m.counts.output_sentences - m.counts.input_sentences;
  }
  return m.counts.discarded;
}

WordPairTable pair_table(const Config& cfg) {
  if (!cfg.has("word_pairs")) return WordPairTable::default_gender();
  const fs::path pairs = cfg.input("word_pairs");
  std::optional<fs::path> rules;
  if (cfg.has("rules")) rules = cfg.input("rules");
  return keyed(cfg, "word_pairs", [&] { return WordPairTable::load(pairs, rules); });
}

int run_intervene(RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  const fs::path output = cfg.path("output");
  const std::string op = cfg.string("operation");
  const Corpus corpus = load_corpus_key(cfg);

  InterventionResult result;
  if (op == "cda") {
    result = cda_augment(corpus, pair_table(cfg));
  } else if (op == "cds") {
    result = cds_substitute(corpus, pair_table(cfg));
  } else if (op == "duplicate") {
    const size_t n = ablation_count(cfg, true);
    result = duplicate_random(corpus, n, ctx.required_seed("duplicate"));
  } else if (op == "remove_toxic") {
    result = keyed(cfg, "corpus", [&] { return remove_toxic(corpus); });
  } else if (op == "remove_random") {
    const size_t n = ablation_count(cfg, false);
    result = keyed(cfg, "count", [&] {
      return remove_random(corpus, n, ctx.required_seed("remove_random"));
    });
  } else if (op == "detox") {
    const Config sub = cfg.child("detox");
    const RemoteRewriter rewriter(
        endpoint(sub, "rewriter_endpoint", "CORPUSBIAS_REWRITER_URL"));
    const auto toxic = probability_classifier(sub, "toxicity_endpoint",
                                              "CORPUSBIAS_TOXICITY_URL", false);
    const auto hate = probability_classifier(sub, "hate_endpoint",
                                             "CORPUSBIAS_HATE_URL", true);
    DetoxOptions options;
    options.max_attempts = sub.count("max_attempts", 3);
    options.threshold = sub.number("threshold", 0.5);
    if (sub.has("prompt_template")) {
      options.prompt_template =
          read_text_file(sub.input("prompt_template"), "prompt template");
    }
    options.concurrency = ctx.concurrency();
    options.checkpoint = ctx.checkpoint(sub, output, "detox");
    result = keyed(cfg, "corpus", [&] {
      return detox_rewrite(corpus, rewriter, *toxic, *hate, options);
    });
  } else if (op == "perturb") {
    const Config sub = cfg.child("perturb");
    const RemotePerturber perturber(
        endpoint(sub, "perturber_endpoint", "CORPUSBIAS_PERTURBER_URL"));
    const fs::path targets_path = sub.input("targets");
    const auto targets = keyed(sub, "targets",
                               [&] { return PerturbationTargets::load(targets_path); });
    PerturbOptions options;
    options.chunk_len = sub.count("chunk_len", 128);
    options.seed = ctx.required_seed("perturb");
    options.concurrency = ctx.concurrency();
    options.checkpoint = ctx.checkpoint(sub, output, "perturb");
    result = perturb_corpus(corpus, perturber, targets, options);
  } else {
    throw InvalidInput(cfg.where("operation") + "unknown operation \"" + op +
                       "\" (cda, cds, duplicate, remove_toxic, remove_random, "
                       "detox, perturb)");
  }

  write_corpus(result.corpus, output, format_for(cfg, "output_format", output));
  if (cfg.has("report")) {
    json report = manifest_to_json(result.manifest);
    if (op == "perturb") {
      const auto d = perturbation_stats(result.manifest);
      report["change_distribution"] = {{"any_change", d.any_change},
                                       {"category", d.category},
                                       {"subcategory", d.subcategory}};
    }
    write_report(ctx, cfg.path("report"), report);
  }
  return kOk;
}

// ---------------------------------------------------------------- bench

// Owns the scorer a cache wraps.
struct ScorerHolder {
  std::unique_ptr<Scorer> inner;
};

class OwningCachedScorer : private ScorerHolder, public CachedScorer {
 public:
  OwningCachedScorer(std::unique_ptr<Scorer> inner, const fs::path& path)
      : ScorerHolder{std::move(inner)}, CachedScorer(*ScorerHolder::inner, path) {}
};

fs::path cache_dir(const Config& cfg) {
  if (auto dir = env("CORPUSBIAS_CACHE_DIR")) return *dir;
  if (cfg.has("cache_dir")) return cfg.path("cache_dir");
  return {};
}

// {"kind": "ngram", "corpus", "order", "k", "min_count"} or
// {"kind": "remote", "endpoint", "pooling", "batch_size"}; cached when a
// cache directory is configured.
std::unique_ptr<Scorer> open_scorer(const Config& root, const Config& spec) {
  const std::string kind = spec.string("kind");
  std::unique_ptr<Scorer> scorer;
  if (kind == "ngram") {
    const Corpus corpus = load_corpus_key(spec);
    const auto order = spec.count("order", 3);
    const double k = spec.number("k", 0.5);
    const auto min_count = spec.count("min_count", 2);
    scorer = std::make_unique<NGramScorer>(keyed(spec, "order", [&] {
      return NGramModel::train(corpus, order, k, min_count);
    }));
  } else if (kind == "remote") {
    scorer = std::make_unique<RemoteScorer>(
        endpoint(spec, "endpoint", "CORPUSBIAS_SCORER_URL"),
        spec.string("pooling", "mean"), spec.count("batch_size", 32));
  } else {
    throw InvalidInput(spec.where("kind") + "must be \"ngram\" or \"remote\"");
  }
  const fs::path dir = cache_dir(root);
  if (dir.empty() || !root.flag("cache", true)) return scorer;
  return std::make_unique<OwningCachedScorer>(std::move(scorer),
                                              dir / "scores.jsonl");
}

BenchmarkSuite load_suite(const Config& cfg) {
  const Config b = cfg.child("benchmarks");
  BenchmarkSuite suite;
  auto load = [&](const char* k, auto loader, auto& slot) {
    if (!b.has(k)) return;
    const fs::path p = b.input(k);
    slot = keyed(b, k, [&] { return loader(p); });
  };
  load("blimp", load_minimal_pairs, suite.blimp);
  load("blimp_supplement", load_minimal_pairs, suite.blimp_supplement);
  load("ewok", load_ewok, suite.ewok);
  load("stereoset", load_stereoset, suite.stereoset);
  load("crows", load_crows, suite.crows);
  for (const auto& k : b.keys()) {
    if (k != "blimp" && k != "blimp_supplement" && k != "ewok" &&
        k != "stereoset" && k != "crows") {
      throw InvalidInput(b.where(k) + "unknown benchmark");
    }
  }
  return suite;
}

BenchOptions bench_options(const RunContext& ctx) {
  BenchOptions options;
  options.batch_size = ctx.cfg.count("batch_size", 64);
  options.concurrency = ctx.concurrency();
  return options;
}

int run_bench(RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  const fs::path output = cfg.path("output");
  const BenchmarkSuite suite = load_suite(cfg);
  const auto scorer = open_scorer(cfg, cfg.child("scorer"));
  const BenchReport report = run_benchmarks(*scorer, suite, bench_options(ctx));
  write_report(ctx, output, bench_report_to_json(report));
  return kOk;
}

// ---------------------------------------------------------------- sweep

int run_sweep(RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  const fs::path output = cfg.path("output");
  const BenchmarkSuite suite = load_suite(cfg);
  const json& list = cfg.raw("checkpoints");
  if (!list.is_array() || list.empty()) {
    throw InvalidInput(cfg.where("checkpoints") + "must be a non-empty list");
  }
  std::vector<SweepCheckpoint> checkpoints;
  for (size_t i = 0; i < list.size(); ++i) {
    const Config entry(list[i], cfg.base(),
                       cfg.key("checkpoints") + "[" + std::to_string(i) + "].");
    SweepCheckpoint cp;
    cp.step = entry.count("step");
    const Config spec = entry.child("scorer");
    cp.open = [&cfg, spec] { return open_scorer(cfg, spec); };
    checkpoints.push_back(std::move(cp));
  }
  TrajectorySeries series = keyed(cfg, "checkpoints", [&] {
    return checkpoint_sweep(checkpoints, suite, bench_options(ctx));
  });
  series.run_label = cfg.string("run_label", "");
  series.seed = ctx.seed();
  write_report(ctx, output, trajectory_to_json(series));
  if (cfg.has("plot_dir")) {
    emit_plot_data(std::span(&series, 1), cfg.path("plot_dir"));
  }
  size_t gaps = 0;
  for (const auto& p : series.points) gaps += !p.report;
  if (gaps > 0) {
    std::cerr << "error: " << gaps << " checkpoint(s) unreachable; partial "
              << "series with gap markers written to " << output.string()
              << "\n";
    return kServiceUnavailable;
  }
  return kOk;
}

// ---------------------------------------------------------------- debias

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) row[static_cast<size_t>(k)] = m(i, k);
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_debias(RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  const fs::path output = cfg.path("output");
  const std::string method = cfg.string("method");
  if (method == "inlp") {
    const fs::path p = cfg.input("embeddings");
    const EmbeddingMatrix data = keyed(cfg, "embeddings", [&] {
      auto m = load_embeddings(p);
      if (m.labels.empty()) throw InvalidInput("embeddings carry no labels");
      return m;
    });
    InlpOptions options;
    options.max_rounds = cfg.count("max_rounds", 35);
    options.stop_margin = cfg.number("stop_margin", 0.02);
    const auto result = keyed(cfg, "max_rounds",
                              [&] { return inlp_fit(data, options); });
    Eigen::MatrixXd removed(data.rows.cols(),
                            static_cast<Eigen::Index>(
                                result.projection.removed_directions.size()));
    for (size_t k = 0; k < result.projection.removed_directions.size(); ++k) {
      removed.col(static_cast<Eigen::Index>(k)) =
          result.projection.removed_directions[k];
    }
    const auto projected = apply_projection(result.projection, data);
    const double refit = fit_linear_probe(projected, options.probe).train_accuracy;
    write_report(ctx, output,
                 {{"method", "inlp"},
                  {"dimension", data.rows.cols()},
                  {"removed_directions", matrix_rows(removed.transpose())},
                  {"round_accuracy", result.round_accuracy},
                  {"majority", result.majority},
                  {"final_probe_accuracy", refit}});
    if (cfg.has("projected_output")) {
      save_embeddings(cfg.path("projected_output"), projected);
    }
    return kOk;
  }
  if (method == "sentdebias") {
    const fs::path pairs_path = cfg.input("pairs");
    const auto pairs = keyed(cfg, "pairs",
                             [&] { return load_counterfactual_pairs(pairs_path); });
    const auto embedder = open_scorer(cfg, cfg.child("embedder"));
    SentDebiasOptions options;
    if (cfg.has("k")) options.k = cfg.count("k");
    options.variance_threshold = cfg.number("variance_threshold", 0.5);
    const auto subspace =
        keyed(cfg, "pairs", [&] { return sentdebias_fit(pairs, *embedder, options); });
    write_report(ctx, output,
                 {{"method", "sentdebias"},
                  {"dimension", subspace.components.rows()},
                  {"components", matrix_rows(subspace.components.transpose())},
                  {"explained_variance", subspace.explained_variance}});
    if (cfg.has("apply_to")) {
      const fs::path p = cfg.input("apply_to");
      const auto vectors = keyed(cfg, "apply_to", [&] {
        return sentdebias_apply(subspace, load_embeddings(p));
      });
      save_embeddings(cfg.path("debiased_output"), vectors);
    }
    return kOk;
  }
  throw InvalidInput(cfg.where("method") + "must be \"inlp\" or \"sentdebias\"");
}

// --------------------------------------------------------------- analyze

BenchScores scores_from_report(const Config& cfg, std::string_view k) {
  const fs::path p = cfg.input(k);
  return keyed(cfg, k, [&] {
    const json j = read_json_file(p, "bench report");
    TrajectorySeries one = trajectory_from_json(
        {{"points", {{{"step", 0}, {"report", j}}}}});
    return one.points[0].report->scores;
  });
}

int run_analyze(RunContext& ctx) {
  const Config& cfg = ctx.cfg;
  const fs::path output = cfg.path("output");
  json report = json::object();

  std::vector<TrajectorySeries> series;
  if (cfg.has("trajectories")) {
    const json& list = cfg.raw("trajectories");
    if (!list.is_array()) {
      throw InvalidInput(cfg.where("trajectories") + "must be a list of paths");
    }
    for (size_t i = 0; i < list.size(); ++i) {
      const Config entry({{"path", list[i]}}, cfg.base(),
                         cfg.key("trajectories") + "[" + std::to_string(i) + "].");
      const fs::path p = entry.input("path");
      series.push_back(keyed(entry, "path", [&] {
        return trajectory_from_json(read_json_file(p, "trajectory"));
      }));
    }
    json correlations = json::array();
    for (const auto& s : series) {
      std::vector<double> perf, bias;
      for (const auto& p : s.points) {
        if (p.report && p.report->composite) {
          perf.push_back(p.report->composite->composite_performance);
          bias.push_back(p.report->composite->composite_bias);
        }
      }
      json entry = {{"run_label", s.run_label},
                    {"seed", s.seed ? json(*s.seed) : json(nullptr)},
                    {"points", perf.size()}};
      try {
        entry["pearson"] = pearson(perf, bias);
      } catch (const InvalidInput& e) {
        entry["pearson"] = nullptr;
        entry["note"] = e.what();
      }
      correlations.push_back(std::move(entry));
    }
    report["correlations"] = std::move(correlations);
    if (cfg.has("plot_dir")) emit_plot_data(series, cfg.path("plot_dir"));
  }

  if (cfg.has("shifts")) {
    const json& list = cfg.raw("shifts");
    if (!list.is_array()) {
      throw InvalidInput(cfg.where("shifts") + "must be a list");
    }
    std::vector<ShiftRecord> records;
    std::vector<std::array<double, 5>> component_rows;
    for (size_t i = 0; i < list.size(); ++i) {
      const Config entry(list[i], cfg.base(),
                         cfg.key("shifts") + "[" + std::to_string(i) + "].");
      const BenchScores baseline = scores_from_report(entry, "baseline");
      const Config treated_cfg = entry.child("treated");
      std::map<std::string, BenchScores> treated;
      for (const auto& method : treated_cfg.keys()) {
        treated[method] = scores_from_report(treated_cfg, method);
      }
      const std::string model = entry.string("model", "");
      auto table = keyed(entry, "baseline",
                         [&] { return shift_table(baseline, treated, model); });
      for (const auto& r : table) {
        const auto& t = treated[r.method];
        component_rows.push_back({*t.blimp - *baseline.blimp,
                                  *t.blimp_supplement - *baseline.blimp_supplement,
                                  *t.ewok - *baseline.ewok,
                                  *t.stereoset_ss - *baseline.stereoset_ss,
                                  *t.crows - *baseline.crows});
        records.push_back(r);
      }
    }
    json shifts = json::array();
    for (const auto& r : records) {
      shifts.push_back({{"method", r.method},
                        {"model", r.model},
                        {"delta_performance", r.delta_performance},
                        {"delta_bias", r.delta_bias}});
    }
    report["shifts"] = std::move(shifts);
    const double ridge = cfg.number("cca_ridge", 1e-6);
    ctx.meta["cca_relative_ridge"] = ridge;
    const auto n = static_cast<Eigen::Index>(records.size());
    Eigen::MatrixXd perf(n, 3), bias(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = component_rows[static_cast<size_t>(i)];
      perf.row(i) << row[0], row[1], row[2];
      bias.row(i) << row[3], row[4];
    }
    json cca = json::object();
    try {
      const auto [cp, cb] = shift_matrices(records);
      const auto composite = cca_first(cp, cb, ridge);
      const auto components = cca_first(perf, bias, ridge);
      cca = {{"composite_rho", composite.rho},
             {"component_rho", components.rho},
             {"ridge_x", components.ridge_x},
             {"ridge_y", components.ridge_y}};
    } catch (const InvalidInput& e) {
      cca = {{"note", e.what()}};
    }
    report["cca"] = std::move(cca);
    if (cfg.has("shift_csv")) emit_plot_data(records, cfg.path("shift_csv"));
  }
  if (report.empty()) {
    throw InvalidInput(cfg.where("trajectories") +
                       "nothing to analyze (give trajectories or shifts)");
  }
  write_report(ctx, output, report);
  return kOk;
}

int dispatch(RunContext& ctx) {
  const std::string& c = ctx.invocation.command;
  if (ctx.cfg.has("pipeline") && ctx.cfg.string("pipeline") != c) {
    throw InvalidInput(ctx.cfg.where("pipeline") + "is \"" +
                       ctx.cfg.string("pipeline") + "\" but the command is " + c);
  }
  if (c == "audit") return run_audit(ctx);
  if (c == "intervene") return run_intervene(ctx);
  if (c == "bench") return run_bench(ctx);
  if (c == "debias") return run_debias(ctx);
  if (c == "analyze") return run_analyze(ctx);
  if (c == "sweep") return run_sweep(ctx);
  throw InvalidInput("unknown command: " + c);
}

}  // namespace

int run(const Invocation& invocation) {
  try {
    const json j = keyed(Config(json::object(), {}), "config", [&] {
      return read_json_file(invocation.config, "config");
    });
    RunContext ctx{invocation,
                   Config(j, fs::absolute(invocation.config).parent_path())};
    return dispatch(ctx);
  } catch (const ServiceUnavailable& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.checkpoint().empty()) {
      std::cerr << "resume with: --resume " << e.checkpoint() << "\n";
    }
    return kServiceUnavailable;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Corpus bias auditing, intervention and evaluation toolkit"};
  app.require_subcommand(1);
  Invocation invocation;
  uint64_t seed = 0;
  for (const char* name : {"audit", "intervene", "bench", "debias", "analyze", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", invocation.config, "Run config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Seed, overriding the config");
    sub->add_option("--resume", invocation.resume,
                    "Checkpoint file of an interrupted run");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? kOk : kInvalidInput;
  }
  CLI::App* chosen = app.get_subcommands().front();
  invocation.command = chosen->get_name();
  if (chosen->count("--seed") > 0) invocation.seed = seed;
  return run(invocation);
}

}  // namespace corpusbias::cli
