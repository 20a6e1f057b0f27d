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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <mutex>
#include <numbers>
#include <set>
#include <random>
#include <sstream>

#include "bench_oracles.h"
#include "cli.h"
#include "corpusbias/analysis.h"
#include "corpusbias/audit.h"
#include "corpusbias/bench.h"
#include "corpusbias/clients.h"
#include "corpusbias/error.h"
#include "corpusbias/intervene.h"
#include "corpusbias/lm_scorer.h"
#include "corpusbias/logging.h"
#include "corpusbias/projection_debias.h"
#include "corpusbias/rng.h"
#include "stub_scorers.h"
#include "stub_server.h"
#include "test_util.h"

namespace corpusbias {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Accumulates failed conditions with their measured values.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& fact) { notes_.push_back(fact); }

  bool passed() const { return failures_.empty(); }
  std::string summary() const {
    const auto& parts = passed() ? notes_ : failures_;
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
    return out;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string num(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

struct Criterion {
  std::string name;
  double time_limit_s;  // 0 = none
  std::function<void(Verdict&)> check;
};

Eigen::MatrixXd gaussian(uint64_t seed, Eigen::Index n, Eigen::Index d) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = dist(engine);
  }
  return m;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<std::string> texts(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& s : c.sentences()) out.push_back(s.text);
  return out;
}

// ------------------------------------------------------------ readability

void check_fkgl(Verdict& v) {
  const double a = flesch_kincaid_grade(19.84, 1.38);
  const double b = flesch_kincaid_grade(15.91, 1.25);
  v.require(std::round(a * 100) / 100 == 8.43, "row 1 gives " + num(a));
  v.require(std::abs(b - 5.40) <= 0.05, "row 2 gives " + num(b));
  v.note("8.43 <- " + num(a) + ", 5.40 <- " + num(b));
}

// -------------------------------------------------------------------- CDA

std::vector<std::string> gendered_sentences(size_t n, uint64_t seed) {
  static const std::vector<std::string> words = {
      "he",  "she", "his",    "her",  "him",     "hers",  "mother", "father",
      "the", "dog", "walked", "home", "quickly", "a",     "Mr.",    "Queen",
      "and", "to",  "King",   "book", "HIS",     "sister"};
  SeededRng rng(seed);
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i) {
    std::string s;
    const size_t len = 1 + rng.uniform_index(10);
    for (size_t k = 0; k < len; ++k) {
      if (k) s += ' ';
      s += words[rng.uniform_index(words.size())];
    }
    out.push_back(s + ".");
  }
  return out;
}

void check_cda(Verdict& v) {
  const auto table = WordPairTable::default_gender();
  const Corpus c = testing::corpus_of(gendered_sentences(10000, 17));
  const Lexicon lex = Lexicon::from_json(
      json{{"gender", {{"male", table.side(true)}, {"female", table.side(false)}}}});
  auto gap = [&](const Corpus& x) {
    auto f = keyword_frequency(x, lex)["gender"];
    return f["male"] - f["female"];
  };
  const auto cda = cda_augment(c, table);
  size_t matched = 0;
  for (const auto& s : c.sentences()) {
    bool any = false;
    for (const auto& t : s.lower_tokens) any = any || table.contains(t);
    matched += any;
  }
  const double n = static_cast<double>(c.size());
  const double growth = cda.manifest.statistics["growth_ratio"].get<double>();
  const double before = gap(c);
  const double after = gap(cda.corpus);
  v.require(std::abs(after) <= 0.01, "gap after CDA " + num(after));
  v.require(cda.corpus.size() == c.size() + matched,
            "CDA size " + std::to_string(cda.corpus.size()));
  v.require(growth == 1.0 + static_cast<double>(matched) / n,
            "growth " + num(growth) + " vs 1 + " + std::to_string(matched) + "/" +
                std::to_string(c.size()));

  const auto dup = duplicate_random(c, matched, 5);
  const double dup_gap = gap(dup.corpus);
  v.require(dup.corpus.size() == cda.corpus.size(), "ablation size differs");
  v.require(std::abs(dup_gap - before) <= 0.1,
            "ablation moved the gap " + num(before) + " -> " + num(dup_gap));
  v.note("gap " + num(before) + " -> " + num(after) + " (CDA), " + num(dup_gap) +
         " (duplication); growth " + num(growth));
}

// ------------------------------------------------------------- neutrality

void check_neutrality(Verdict& v) {
  auto flat = testing::constant_scorer();
  const double crows = score_crows(flat, testing::random_crows(3, 40)).score;
  const double ss = score_stereoset_intra(flat, testing::random_stereo(3, 40)).ss;
  const double mp =
      score_minimal_pairs(flat, testing::random_minimal(3, 40)).score;
  v.require(crows == 50.0, "constant CrowS " + num(crows));
  v.require(ss == 50.0, "constant ss " + num(ss));
  v.require(mp == 50.0, "constant minimal pairs " + num(mp));

  const std::vector<std::string> subjects = {"he", "she", "the man", "the woman"};
  const std::vector<std::string> verbs = {"is", "was", "became", "seems"};
  const std::vector<std::string> roles = {"a doctor", "a nurse",     "strong",
                                          "caring",   "an engineer", "emotional",
                                          "a leader", "a cook"};
  SeededRng rng(31);
  std::vector<std::string> sentences;
  for (int i = 0; i < 400; ++i) {
    const size_t s = rng.uniform_index(4);
    const size_t r = s % 2 == 0 ? rng.uniform_index(4) : 4 + rng.uniform_index(4);
    std::string subject = subjects[s];
    subject[0] = static_cast<char>(std::toupper(subject[0]));
    sentences.push_back(subject + " " + verbs[rng.uniform_index(4)] + " " +
                        roles[r] + " .");
  }
  const auto symmetric =
      cda_augment(testing::corpus_of(sentences), WordPairTable::default_gender());
  std::vector<CrowsPairItem> pairs;
  for (const auto& role : roles) {
    for (const auto& verb : verbs) {
      pairs.push_back({role + verb, "He " + verb + " " + role + " .",
                       "She " + verb + " " + role + " .", "gender", "stereo"});
      pairs.push_back({role + verb + "/m", "The man " + verb + " " + role + " .",
                       "The woman " + verb + " " + role + " .", "gender",
                       "stereo"});
    }
  }
  NGramScorer ngram(NGramModel::train(symmetric.corpus, 3, 0.5, 1));
  const double swapped = score_crows(ngram, pairs).score;
  v.require(std::abs(swapped - 50.0) <= 1.0, "n-gram CrowS " + num(swapped));
  v.note("constant 50/50/50, n-gram CrowS " + num(swapped));
}

// ---------------------------------------------------------------- oracles

void check_oracles(Verdict& v) {
  const std::vector<std::pair<const char*, testing::TokenFn>> fns = {
      {"length_position", testing::length_position},
      {"hashed", testing::hashed_uniform(7)},
      {"constant", [](const TokenList&, size_t) { return -2.0; }}};
  size_t sets = 0;
  for (const auto& [name, fn] : fns) {
    testing::TokenFnScorer scorer(fn);
    for (uint64_t seed = 1; seed <= 25; ++seed) {
      const size_t n = 1 + seed % 10;
      const std::string at = std::string(name) + " seed " + std::to_string(seed);
      const auto crows = testing::random_crows(seed, n);
      v.require(score_crows(scorer, crows).score ==
                    testing::oracle_crows(fn, crows),
                "CrowS " + at);
      const auto stereo = testing::random_stereo(seed, n);
      const auto r = score_stereoset_intra(scorer, stereo);
      const auto [ss, lms] = testing::oracle_stereoset(fn, stereo);
      v.require(r.ss == ss && r.lms == lms, "StereoSet " + at);
      const auto ewok = testing::random_ewok(seed, n);
      v.require(score_ewok(scorer, ewok).score == testing::oracle_ewok(fn, ewok),
                "EWoK " + at);
      sets += 3;
    }
  }
  v.note(std::to_string(sets) + " toy sets equal brute force");
}

// ------------------------------------------------------------------- INLP

void check_inlp(Verdict& v) {
  EmbeddingMatrix data{gaussian(7, 500, 10), {}};
  for (Eigen::Index i = 0; i < 500; ++i) {
    const int label = static_cast<int>(i % 2);
    data.labels.push_back(label);
    data.rows(i, 3) += label ? 2.0 : -2.0;
  }
  const auto r = inlp_fit(data);
  const auto& p = r.projection.matrix;
  const auto k = static_cast<Eigen::Index>(r.projection.removed_directions.size());
  const double majority = majority_rate(data.labels);
  const double refit =
      fit_linear_probe(apply_projection(r.projection, data)).train_accuracy;
  const double idem = max_abs(p * p - p);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(p);
  lu.setThreshold(1e-8);
  v.require(k >= 1, "no direction removed");
  v.require(refit <= majority + 0.04,
            "probe " + num(refit) + " > majority " + num(majority) + " + 0.04");
  v.require(idem <= 1e-8, "idempotence error " + num(idem));
  v.require(lu.rank() == 10 - k, "rank " + std::to_string(lu.rank()) + " after " +
                                     std::to_string(k) + " removals");
  v.note(std::to_string(k) + " removed, probe " + num(refit) + " vs majority " +
         num(majority) + ", |P^2-P| " + num(idem));
}

// ------------------------------------------------------------ Sent-Debias

void check_sentdebias(Verdict& v) {
  const Eigen::MatrixXd a = gaussian(23, 40, 8);
  Eigen::MatrixXd b = a + 0.3 * gaussian(24, 40, 8);
  b.col(0) += Eigen::VectorXd::Constant(40, 2.0);
  b.col(5) -= Eigen::VectorXd::Constant(40, 1.0);
  SentDebiasOptions options;
  options.k = 3;
  const auto s = sentdebias_fit(a, b, options);
  const EmbeddingMatrix h{gaussian(25, 100, 8), {}};
  const double ortho =
      (sentdebias_apply(s, h).rows * s.components).cwiseAbs().maxCoeff();
  const EmbeddingMatrix inside{(s.components * gaussian(26, 3, 5)).transpose(), {}};
  const double zero = max_abs(sentdebias_apply(s, inside).rows);
  v.require(ortho <= 1e-8, "residual projection " + num(ortho));
  v.require(zero <= 1e-8, "in-subspace residual " + num(zero));
  v.note("max |h' . v| " + num(ortho) + ", max in-subspace " + num(zero));
}

// -------------------------------------------------------------------- CCA

double grid_rho(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int steps) {
  const Eigen::MatrixXd cx = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cy = y.rowwise() - y.colwise().mean();
  std::vector<Eigen::VectorXd> xs, ys;
  for (int i = 0; i < steps; ++i) {
    const double t = std::numbers::pi * i / steps;
    const Eigen::Vector2d dir(std::cos(t), std::sin(t));
    xs.push_back(cx * dir);
    ys.push_back(cy * dir);
  }
  double best = 0.0;
  for (const auto& u : xs) {
    for (const auto& w : ys) {
      best = std::max(best, std::abs(u.dot(w)) / (u.norm() * w.norm()));
    }
  }
  return best;
}

void check_cca(Verdict& v) {
  double worst_1d = 0.0, worst_grid = 0.0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = gaussian(seed, 12, 2);
    const std::vector<double> x(m.col(0).data(), m.col(0).data() + 12);
    const std::vector<double> y(m.col(1).data(), m.col(1).data() + 12);
    worst_1d = std::max(worst_1d, std::abs(cca_first(m.col(0), m.col(1), 1e-12).rho -
                                           std::abs(pearson(x, y))));
  }
  for (uint64_t seed = 10; seed < 16; ++seed) {
    const auto x = gaussian(seed, 6, 2);
    const auto y = gaussian(seed + 100, 6, 2);
    worst_grid = std::max(worst_grid,
                          std::abs(cca_first(x, y).rho - grid_rho(x, y, 1500)));
  }
  const std::vector<double> hx = {1, 2, 3, 4}, hy = {2, 1, 4, 3};
  const double hand = pearson(hx, hy);
  v.require(worst_1d <= 1e-8, "1-D error " + num(worst_1d));
  v.require(worst_grid <= 1e-3, "grid error " + num(worst_grid));
  v.require(std::abs(hand - 0.6) <= 1e-12, "pearson hand case " + num(hand));
  v.note("1-D " + num(worst_1d) + ", grid " + num(worst_grid) + ", pearson " +
         num(hand));
}

// ------------------------------------------------------ composite/invariance

void check_composite_invariance(Verdict& v) {
  SeededRng rng(99);
  for (int i = 0; i < 100; ++i) {
    BenchScores s;
    s.blimp = 100 * rng.uniform_real();
    s.blimp_supplement = 100 * rng.uniform_real();
    s.ewok = 100 * rng.uniform_real();
    s.stereoset_ss = 100 * rng.uniform_real();
    s.stereoset_lms = 100 * rng.uniform_real();
    s.crows = 100 * rng.uniform_real();
    const auto c = composite_scores(s);
    const double perf = (*s.blimp + *s.blimp_supplement + *s.ewok) / 3.0;
    const double bias = (*s.stereoset_ss + *s.crows) / 2.0;
    const double eps = std::numeric_limits<double>::epsilon() * 100;
    v.require(std::abs(c.composite_performance - perf) <= eps * 2 &&
                  std::abs(c.composite_bias - bias) <= eps * 2,
              "composite mismatch at draw " + std::to_string(i));
  }

  testing::TokenFnScorer base(testing::length_position);
  auto crows = testing::random_crows(11, 60);
  auto stereo = testing::random_stereo(11, 60);
  auto ewok = testing::random_ewok(11, 60);
  auto mp = testing::random_minimal(11, 60);
  const double c0 = score_crows(base, crows).score;
  const auto s0 = score_stereoset_intra(base, stereo);
  const double e0 = score_ewok(base, ewok).score;
  const double m0 = score_minimal_pairs(base, mp).score;
  SeededRng shuffle(5);
  shuffle.shuffle(std::span(crows));
  shuffle.shuffle(std::span(stereo));
  shuffle.shuffle(std::span(ewok));
  shuffle.shuffle(std::span(mp));
  const auto s1 = score_stereoset_intra(base, stereo);
  v.require(score_crows(base, crows).score == c0 && s1.ss == s0.ss &&
                s1.lms == s0.lms && score_ewok(base, ewok).score == e0 &&
                score_minimal_pairs(base, mp).score == m0,
            "a score changed under permutation");

  testing::ShiftedScorer per_token(base, 3.0, 0.0);
  const auto s2 = score_stereoset_intra(per_token, stereo);
  v.require(score_crows(per_token, crows).score == c0 && s2.ss == s0.ss &&
                s2.lms == s0.lms && score_ewok(per_token, ewok).score == e0,
            "a score changed under a per-token offset");
  testing::ShiftedScorer per_sequence(base, 0.0, 4.0);
  v.require(score_crows(per_sequence, crows).score == c0 &&
                score_ewok(per_sequence, ewok).score == e0 &&
                score_minimal_pairs(per_sequence, mp).score == m0,
            "a score changed under a per-sequence offset");
  v.note("100 composites, 4 benchmarks x (permutation, 2 offsets)");
}

// --------------------------------------------------------------- toxicity

void check_toxicity_removal(Verdict& v) {
  std::vector<std::string> lines;
  std::set<std::string> planted;
  for (int i = 0; i < 400; ++i) {
    std::string s = "Sentence number " + std::to_string(i) + " is calm.";
    if (i % 20 == 7) {
      s = "Sentence number " + std::to_string(i) +
          (i % 40 == 7 ? " calls you an idiot." : " says vermin like you.");
      planted.insert(s);
    }
    lines.push_back(s);
  }
  const Corpus c = testing::corpus_of(lines);
  const auto flagged = toxicity_rates(c, LexiconProbabilityClassifier::default_toxicity(),
                                      LexiconProbabilityClassifier::default_hate());
  const auto removed = remove_toxic(flagged.flagged_corpus);
  std::set<std::string> gone;
  const auto kept = texts(removed.corpus);
  const std::set<std::string> kept_set(kept.begin(), kept.end());
  for (const auto& t : lines) {
    if (!kept_set.contains(t)) gone.insert(t);
  }
  v.require(flagged.flagged_pct == 5.0, "flagged " + num(flagged.flagged_pct) + "%");
  v.require(gone == planted, "removed " + std::to_string(gone.size()) +
                                 " sentences, not the planted set");

  const auto ablation = remove_random(flagged.flagged_corpus, gone.size(), 3);
  size_t flagged_left = 0;
  for (const auto& s : ablation.corpus.sentences()) flagged_left += s.flagged();
  v.require(ablation.corpus.size() == removed.corpus.size(), "ablation size differs");
  v.require(flagged_left > 0, "ablation removed only flagged sentences");
  v.require(texts(remove_toxic(removed.corpus).corpus) == kept,
            "remove_toxic is not idempotent");
  v.note("removed " + std::to_string(gone.size()) + "/400 planted; ablation keeps " +
         std::to_string(flagged_left) + " flagged");
}

// ----------------------------------------------------------- perturbation

// Ten 4-token sentences, one chunk each: 3 gender changes via "he", 1 via
// "she"+"he", 1 race change via "kim", 2 exhausted ("she" only), 3 without
// targets.
Corpus perturb_fixture() {
  const std::vector<std::pair<int, std::string>> rows = {
      {0, "He ran home ."},   {0, "The sun set ."},   {0, "She sat down ."},
      {1, "Then he left ."},  {1, "Kim was here ."},  {2, "She and he met"},
      {2, "A cat slept ."},   {3, "He is tall ."},    {3, "Birds sang loud ."},
      {4, "She smiled again ."}};
  std::vector<Sentence> s;
  for (const auto& [doc, text] : rows) {
    s.push_back(Sentence::make(static_cast<int64_t>(s.size()), doc, text));
  }
  return Corpus("p", std::move(s));
}

void check_perturbation(Verdict& v) {
  std::mutex mu;
  CategoryTable<size_t> served;
  testing::StubServer server;
  server.on_post("/perturb", [&](const json& body) {
    const std::string chunk = body["chunk"];
    const std::string word = body["target_word"];
    if (word != "he" && word != "kim") return json{{"perturbed", chunk}};
    std::lock_guard<std::mutex> lock(mu);
    ++served[body["category"]][body["subcategory"]];
    return json{{"perturbed",
                 "[" + body["subcategory"].get<std::string>() + "] " + chunk}};
  });
  server.start();
  const RemotePerturber perturber(
      {server.url(), std::chrono::milliseconds(5000), 0, std::chrono::milliseconds(1)});
  const auto targets = PerturbationTargets::from_json(
      json::parse(R"({"words": {"he": ["gender"], "she": ["gender"], "kim": ["race"]}})"));
  PerturbOptions options;
  options.chunk_len = 4;
  options.seed = 1;
  const auto r = perturb_corpus(perturb_fixture(), perturber, targets, options);
  const json& st = r.manifest.statistics;
  const auto d = perturbation_stats(r.manifest);
  v.require(st["total_chunks"] == 10 && st["changed"] == 5 &&
                st["no_targets"] == 3 && st["exhausted"] == 2,
            "chunk counts " + st.dump());
  v.require(d.any_change == 50.0, "any change " + num(d.any_change));
  v.require(d.category.at("gender") == 40.0 && d.category.at("race") == 10.0,
            "category table differs");
  double worst = 0.0;
  for (const auto& [cat, subs] : d.subcategory) {
    double sum = 0.0;
    for (const auto& [sub, pct] : subs) {
      const size_t seen = served.contains(cat) && served[cat].contains(sub)
                              ? served[cat][sub]
                              : 0;
      v.require(pct == 10.0 * static_cast<double>(seen),
                "subcategory " + cat + "/" + sub + " is " + num(pct));
      sum += pct;
    }
    worst = std::max(worst, std::abs(sum - d.category.at(cat)));
  }
  v.require(worst <= 0.1, "subcategory sums off by " + num(worst));
  v.note("any 50, gender 40, race 10; subcategory sum error " + num(worst));
}

// ------------------------------------------------------------ determinism

int run_cli(const fs::path& config, const std::string& command,
            std::vector<std::string> extra = {}) {
  std::vector<std::string> args = {"corpusbias", command, "--config",
                                   config.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream sink;
  std::streambuf* old = std::cerr.rdbuf(sink.rdbuf());
  const int status = cli::cli_main(static_cast<int>(argv.size()), argv.data());
  std::cerr.rdbuf(old);
  return status;
}

void check_determinism(Verdict& v) {
  testing::TempDir dir;
  testing::StubServer server;
  server.on_post("/perturb", [](const json& body) {
    const std::string chunk = body["chunk"];
    return json{{"perturbed", body["target_word"] == "he"
                                  ? body["subcategory"].get<std::string>() + " " + chunk
                                  : chunk}};
  });
  server.start();

  std::string corpus;
  for (const auto& s : gendered_sentences(300, 8)) corpus += s + "\n";
  testing::write_file(dir / "corpus.txt", corpus);
  testing::write_file(dir / "targets.json",
                      R"({"words": {"he": ["gender"], "she": ["gender"]}})");
  testing::write_file(
      dir / "blimp.jsonl",
      R"({"UID":"a","pairID":"0","sentence_good":"he walked home.","sentence_bad":"he walk home."})"
      "\n");
  json rows = json::array(), labels = json::array();
  const Eigen::MatrixXd g = gaussian(4, 60, 4);
  for (Eigen::Index i = 0; i < 60; ++i) {
    rows.push_back({g(i, 0) + (i % 2 ? 2.0 : -2.0), g(i, 1), g(i, 2), g(i, 3)});
    labels.push_back(i % 2);
  }
  testing::write_file(dir / "emb.json", json{{"rows", rows}, {"labels", labels}}.dump());

  struct Run {
    std::string command;
    json config;
    std::vector<std::string> outputs;
  };
  const json scorer = {{"kind", "ngram"}, {"corpus", "corpus.txt"}, {"order", 3}};
  const std::vector<Run> runs = {
      {"audit",
       {{"corpus", "corpus.txt"}, {"output", "audit.json"}, {"sentiment", json::object()},
        {"toxicity", json::object()}, {"coherence", true}},
       {"audit.json"}},
      {"intervene",
       {{"corpus", "corpus.txt"}, {"operation", "cda"}, {"output", "cda.txt"},
        {"report", "cda.json"}},
       {"cda.txt", "cda.json"}},
      {"intervene",
       {{"corpus", "corpus.txt"}, {"operation", "duplicate"}, {"match", "cda.txt"},
        {"seed", 3}, {"output", "dup.txt"}},
       {"dup.txt"}},
      {"intervene",
       {{"corpus", "corpus.txt"}, {"operation", "remove_random"}, {"count", 30},
        {"seed", 3}, {"output", "rr.txt"}},
       {"rr.txt"}},
      {"intervene",
       {{"corpus", "corpus.txt"}, {"operation", "perturb"}, {"seed", 3},
        {"concurrency", 4}, {"output", "pert.txt"}, {"report", "pert.json"},
        {"perturb", {{"perturber_endpoint", server.url()}, {"targets", "targets.json"},
                     {"chunk_len", 16}}}},
       {"pert.txt", "pert.json"}},
      {"bench",
       {{"scorer", scorer}, {"benchmarks", {{"blimp", "blimp.jsonl"}}},
        {"concurrency", 3}, {"output", "bench.json"}},
       {"bench.json"}},
      {"sweep",
       {{"benchmarks", {{"blimp", "blimp.jsonl"}}},
        {"checkpoints", {{{"step", 1}, {"scorer", scorer}},
                         {{"step", 2}, {"scorer", {{"kind", "ngram"},
                                                   {"corpus", "dup.txt"}}}}}},
        {"run_label", "toy"}, {"seed", 3}, {"output", "traj.json"},
        {"plot_dir", "plots"}},
       {"traj.json", "plots/trajectory.csv"}},
      {"debias",
       {{"method", "inlp"}, {"embeddings", "emb.json"}, {"output", "inlp.json"},
        {"projected_output", "projected.json"}},
       {"inlp.json", "projected.json"}},
  };
  auto snapshot = [&](const std::string& tag) {
    std::vector<std::string> contents;
    for (const auto& r : runs) {
      const fs::path config = dir / (tag + "_" + r.outputs.front() + ".config.json");
      testing::write_file(config, r.config.dump());
      const int status = run_cli(config, r.command);
      v.require(status == 0, r.command + " -> " + r.outputs.front() + " exited " +
                                 std::to_string(status));
      for (const auto& o : r.outputs) contents.push_back(testing::read_file(dir / o));
    }
    return contents;
  };
  const auto first = snapshot("a");
  const auto second = snapshot("b");
  size_t files = 0;
  for (size_t i = 0; i < first.size(); ++i) {
    v.require(first[i] == second[i], "output " + std::to_string(i) + " differs");
    ++files;
  }
  v.note(std::to_string(runs.size()) + " pipelines, " + std::to_string(files) +
         " files byte-identical");
}

int run_all() {
  const std::vector<Criterion> criteria = {
      {"readability: FKGL reproduces both reference rows", 1, check_fkgl},
      {"CDA on 10k sentences equalizes the gender gap; ablation does not", 10,
       check_cda},
      {"bias-score neutrality", 30, check_neutrality},
      {"benchmark scores equal brute-force oracles", 0, check_oracles},
      {"INLP on n=500 d=10 synthetic embeddings", 30, check_inlp},
      {"Sent-Debias orthogonality", 0, check_sentdebias},
      {"CCA and Pearson accuracy", 0, check_cca},
      {"composite means; permutation and shift invariance", 0,
       check_composite_invariance},
      {"toxicity removal at 5% flagged", 0, check_toxicity_removal},
      {"perturbation change-distribution table", 0, check_perturbation},
      {"seeded pipelines rerun byte-identically", 0, check_determinism},
  };
  set_log_sink([](LogLevel, std::string_view) {});
  size_t failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.check(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("threw: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (c.time_limit_s > 0) {
      v.require(seconds < c.time_limit_s,
                "took " + num(seconds) + " s (limit " + num(c.time_limit_s) + " s)");
    }
    failed += !v.passed();
    std::printf("%s  %s  [%.2f s]  %s\n", v.passed() ? "PASS" : "FAIL",
                c.name.c_str(), seconds, v.summary().c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace corpusbias

int main() { return corpusbias::run_all(); }
