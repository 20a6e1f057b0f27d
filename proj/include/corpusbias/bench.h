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

#ifndef CORPUSBIAS_BENCH_H_
#define CORPUSBIAS_BENCH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "corpusbias/lm_scorer.h"
#include "json.hpp"

namespace corpusbias {

// Marker replaced by a fill in StereoSet contexts.
inline constexpr std::string_view kBlank = "BLANK";

struct MinimalPairItem {
  std::string id;
  std::string good_sentence;
  std::string bad_sentence;
  std::string category;
};

struct CrowsPairItem {
  std::string id;
  std::string stereo_sentence;
  std::string antistereo_sentence;
  std::string bias_type;
  std::string direction;  // "stereo" or "antistereo" as annotated
};

struct StereoIntraItem {
  std::string id;
  std::string context;  // exactly one BLANK
  std::string stereotype;
  std::string antistereotype;
  std::string unrelated;
  std::string bias_type;

  std::string fill(const std::string& option) const;
};

// Correct pairing is context_1 <-> target_1 and context_2 <-> target_2.
struct EwokItem {
  std::string id;
  std::string context_1;
  std::string context_2;
  std::string target_1;
  std::string target_2;
  std::string category;
};

// Loaders validate item invariants and skip offending items with a warning;
// structural problems (unreadable file, missing fields) throw InvalidInput.

// Native CrowS-Pairs CSV (sent_more, sent_less, stereo_antistereo,
// bias_type), or a JSON array / JSONL file with the same keys. sent_more is
// the stereotyping sentence in both directions, as in the benchmark's own
// metric.
std::vector<CrowsPairItem> load_crows(const std::filesystem::path& path);
// Native StereoSet JSON (data.intrasentence, fills derived from the labelled
// sentences) or a JSON array of {context, stereotype, anti-stereotype,
// unrelated, bias_type?}.
std::vector<StereoIntraItem> load_stereoset(const std::filesystem::path& path);
// BLiMP-style JSONL (sentence_good, sentence_bad, UID); a directory loads
// every *.jsonl file in name order.
std::vector<MinimalPairItem> load_minimal_pairs(
    const std::filesystem::path& path);
// EWoK JSONL with Context1/Context2/Target1/Target2 (any case).
std::vector<EwokItem> load_ewok(const std::filesystem::path& path);

// Shared (unmodified) tokens of two sentences: each token of `a`, left to
// right, claims the first unclaimed equal token of `b`. Returns the claimed
// index lists for a and b.
std::pair<IndexList, IndexList> shared_tokens(const TokenList& a,
                                              const TokenList& b);

struct BenchOptions {
  size_t batch_size = 64;
  size_t concurrency = 1;
};

struct ExcludedItem {
  std::string id;
  std::string reason;
};

struct BenchmarkResult {
  double score = 0;  // 0-100
  std::map<std::string, double> by_category;
  size_t scored = 0;
  std::vector<ExcludedItem> excluded;
};

struct StereoSetResult {
  double ss = 0;
  double lms = 0;
  std::map<std::string, double> ss_by_category;
  size_t scored = 0;
  std::vector<ExcludedItem> excluded;
};

// Scores below count exact ties as half a success (minimal pairs, CrowS,
// StereoSet) or as a failure (EWoK's strict comparisons). An item whose
// scoring raises an Error is excluded and logged in the result; an
// unreachable scorer (ServiceUnavailable) aborts the whole benchmark. Throws
// InvalidInput for an empty item list or when every item was excluded.

// Accuracy: sequence log-prob of the good sentence above the bad one.
BenchmarkResult score_minimal_pairs(const Scorer& scorer,
                                    const std::vector<MinimalPairItem>& items,
                                    const BenchOptions& options = {});
// Share of pairs whose stereotyping sentence has the higher masked
// log-prob summed over its shared tokens. Pairs without shared tokens are
// excluded.
BenchmarkResult score_crows(const Scorer& scorer,
                            const std::vector<CrowsPairItem>& items,
                            const BenchOptions& options = {});
// ss: stereotype fill above anti-stereotype fill; lms: over both meaningful
// fills, share above the unrelated fill. Fills are compared by per-token mean
// log-prob.
StereoSetResult score_stereoset_intra(const Scorer& scorer,
                                      const std::vector<StereoIntraItem>& items,
                                      const BenchOptions& options = {});
// Conditional score of a target = log P(context + target) - log P(context).
BenchmarkResult score_ewok(const Scorer& scorer,
                           const std::vector<EwokItem>& items,
                           const BenchOptions& options = {});

struct BenchScores {
  std::optional<double> blimp;
  std::optional<double> blimp_supplement;
  std::optional<double> ewok;
  std::optional<double> stereoset_ss;
  std::optional<double> stereoset_lms;
  std::optional<double> crows;
};

struct CompositeScores {
  double blimp = 0;
  double blimp_supplement = 0;
  double ewok = 0;
  double composite_performance = 0;  // mean of the three above
  double stereoset_ss = 0;
  double stereoset_lms = 0;
  double crows = 0;
  double composite_bias = 0;  // mean of stereoset_ss and crows
};

// Throws InvalidInput naming the first missing component.
CompositeScores composite_scores(const BenchScores& scores);

struct BenchmarkSuite {
  std::optional<std::vector<MinimalPairItem>> blimp;
  std::optional<std::vector<MinimalPairItem>> blimp_supplement;
  std::optional<std::vector<EwokItem>> ewok;
  std::optional<std::vector<StereoIntraItem>> stereoset;
  std::optional<std::vector<CrowsPairItem>> crows;
};

struct BenchReport {
  std::string scorer_identity;
  BenchScores scores;
  std::optional<CompositeScores> composite;  // when every component ran
  std::map<std::string, std::map<std::string, double>> categories;
  std::map<std::string, std::vector<ExcludedItem>> excluded;
};

BenchReport run_benchmarks(const Scorer& scorer, const BenchmarkSuite& suite,
                           const BenchOptions& options = {});
nlohmann::json bench_report_to_json(const BenchReport& report);

// Opens the scorer for one training checkpoint. May throw
// ServiceUnavailable.
struct SweepCheckpoint {
  uint64_t step = 0;
  std::function<std::unique_ptr<Scorer>()> open;
};

struct TrajectoryPoint {
  uint64_t step = 0;
  std::optional<BenchReport> report;  // nullopt marks a gap
  std::string gap_reason;
};

struct TrajectorySeries {
  std::string run_label;
  std::optional<uint64_t> seed;  // training seed of the run, when known
  std::vector<TrajectoryPoint> points;
};

// Runs the suite on every checkpoint in order. An unreachable checkpoint
// becomes a gap; other errors propagate. Throws InvalidInput unless steps
// are strictly increasing.
TrajectorySeries checkpoint_sweep(const std::vector<SweepCheckpoint>& checkpoints,
                                  const BenchmarkSuite& suite,
                                  const BenchOptions& options = {});
// Null scores and composites stand for benchmarks that did not run.
nlohmann::json trajectory_to_json(const TrajectorySeries& series);
TrajectorySeries trajectory_from_json(const nlohmann::json& j);

}  // namespace corpusbias

#endif  // CORPUSBIAS_BENCH_H_
