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

#include <fstream>
#include <iostream>
#include <sstream>

#include "cli.h"
#include "corpusbias/bench.h"
#include "corpusbias/corpus.h"
#include "doctest.h"
#include "json.hpp"
#include "stub_server.h"
#include "test_util.h"

namespace corpusbias {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::StubServer;
using testing::TempDir;
using testing::read_file;
using testing::write_file;

// Runs one subcommand in-process, capturing stderr.
struct Outcome {
  int status = -1;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::vector<const char*> argv = {"corpusbias"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream captured;
  std::streambuf* old = std::cerr.rdbuf(captured.rdbuf());
  Outcome out;
  out.status = cli::cli_main(static_cast<int>(argv.size()), argv.data());
  std::cerr.rdbuf(old);
  out.err = captured.str();
  return out;
}

Outcome run_config(const TempDir& dir, const std::string& command,
                   const json& config, std::vector<std::string> extra = {}) {
  const fs::path path = dir / (command + ".config.json");
  write_file(path, config.dump());
  std::vector<std::string> args = {command, "--config", path.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  return invoke(args);
}

void write_fixture_corpus(const TempDir& dir) {
  write_file(dir / "corpus.txt",
             "He went to the store. She stayed home.\n\n"
             "The man is a doctor. This is a bad day.\n");
}

TEST_CASE("audit writes a report and reruns byte-identically") {
  TempDir dir;
  write_fixture_corpus(dir);
  write_file(dir / "lexicon.json",
             R"({"gender": {"male": ["he", "man"], "female": ["she"]}})");
  const json config = {{"corpus", "corpus.txt"},
                       {"output", "out/audit.json"},
                       {"lexicon", "lexicon.json"},
                       {"sentiment", json::object()},
                       {"toxicity", json::object()},
                       {"coherence", true},
                       {"csv_dir", "out/csv"},
                       {"annotated_output", "out/annotated.jsonl"}};
  const Outcome first = run_config(dir, "audit", config);
  INFO(first.err);
  REQUIRE(first.status == cli::kOk);
  const std::string report = read_file(dir / "out/audit.json");
  const json j = json::parse(report);
  CHECK(j["summary"]["sentences"] == 4);
  CHECK(j["keyword_pct"]["gender"]["male"].get<double>() > 0);
  CHECK(fs::exists(dir / "out/audit.meta.json"));
  CHECK(fs::exists(dir / "out/csv/structural.csv"));
  CHECK(fs::exists(dir / "out/annotated.jsonl"));

  REQUIRE(run_config(dir, "audit", config).status == cli::kOk);
  CHECK(read_file(dir / "out/audit.json") == report);
}

TEST_CASE("invalid configs exit 1 and name the key") {
  TempDir dir;
  write_fixture_corpus(dir);
  Outcome o = run_config(dir, "audit",
                         {{"corpus", "corpus.txt"},
                          {"output", "a.json"},
                          {"lexicon", "missing.json"}});
  CHECK(o.status == cli::kInvalidInput);
  CHECK(o.err.find("\"lexicon\"") != std::string::npos);

  o = run_config(dir, "audit", {{"output", "a.json"}});
  CHECK(o.status == cli::kInvalidInput);
  CHECK(o.err.find("\"corpus\"") != std::string::npos);

  o = run_config(dir, "intervene", {{"corpus", "corpus.txt"},
                                    {"operation", "shuffle"},
                                    {"output", "x.txt"}});
  CHECK(o.status == cli::kInvalidInput);
  CHECK(o.err.find("operation") != std::string::npos);

  o = run_config(dir, "bench", {{"scorer", {{"kind", "ngram"}}},
                                {"benchmarks", json::object()},
                                {"output", "b.json"}});
  CHECK(o.status == cli::kInvalidInput);
  CHECK(o.err.find("scorer.corpus") != std::string::npos);

  CHECK(invoke({"audit"}).status == cli::kInvalidInput);
  CHECK(invoke({"nonsense"}).status == cli::kInvalidInput);
  CHECK(invoke({"audit", "--config", (dir / "none.json").string()}).status ==
        cli::kInvalidInput);
  write_file(dir / "broken.json", "{not json");
  CHECK(invoke({"audit", "--config", (dir / "broken.json").string()}).status ==
        cli::kInvalidInput);
}

TEST_CASE("intervene chains augmentation and a size-matched ablation") {
  TempDir dir;
  write_fixture_corpus(dir);
  REQUIRE(run_config(dir, "intervene", {{"corpus", "corpus.txt"},
                                        {"operation", "cda"},
                                        {"output", "cda.txt"},
                                        {"report", "cda_report.json"}})
              .status == cli::kOk);
  const json report = json::parse(read_file(dir / "cda_report.json"));
  const size_t added = report["counts"]["output_sentences"].get<size_t>() -
                       report["counts"]["input_sentences"].get<size_t>();
  CHECK(added == 3);

  const json dup = {{"corpus", "corpus.txt"},
                    {"operation", "duplicate"},
                    {"match", "cda.txt"},
                    {"output", "dup.txt"}};
  Outcome o = run_config(dir, "intervene", dup);
  CHECK(o.status == cli::kInvalidInput);
  CHECK(o.err.find("seed") != std::string::npos);

  REQUIRE(run_config(dir, "intervene", dup, {"--seed", "7"}).status == cli::kOk);
  const Corpus out = load_corpus(dir / "dup.txt", CorpusFormat::kPlaintext);
  CHECK(out.size() == 4 + added);
  const std::string first = read_file(dir / "dup.txt");
  REQUIRE(run_config(dir, "intervene", dup, {"--seed", "7"}).status == cli::kOk);
  CHECK(read_file(dir / "dup.txt") == first);
}

TEST_CASE("toxicity outage exits 2 and resumes from the checkpoint") {
  TempDir dir;
  write_fixture_corpus(dir);
  std::atomic<bool> up{false};
  StubServer server;
  server.on_post("/classify", [&](const json& body) {
    if (!up) throw testing::StubHttpError{503};
    json scores = json::array();
    for (const auto& s : body["sentences"]) {
      scores.push_back(s.get<std::string>().find("bad") != std::string::npos
                           ? 0.9
                           : 0.1);
    }
    return json{{"scores", scores}};
  });
  server.start();
  const json endpoint = {{"url", server.url()},
                         {"max_retries", 0},
                         {"backoff_ms", 1}};
  const json config = {{"corpus", "corpus.txt"},
                       {"output", "tox.json"},
                       {"batch_size", 1},
                       {"toxicity", {{"toxicity_endpoint", endpoint},
                                     {"hate_endpoint", endpoint}}}};
  const Outcome down = run_config(dir, "audit", config);
  CHECK(down.status == cli::kServiceUnavailable);
  CHECK(down.err.find("--resume") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "tox.json"));

  up = true;
  const fs::path checkpoint = dir / "tox.toxicity.checkpoint.json";
  REQUIRE(run_config(dir, "audit", config, {"--resume", checkpoint.string()})
              .status == cli::kOk);
  const json j = json::parse(read_file(dir / "tox.json"));
  CHECK(j["toxicity"]["flagged"] == 1);
}

TEST_CASE("bench and sweep over an n-gram scorer") {
  TempDir dir;
  write_file(dir / "train.txt",
             "the cat sits on the mat. the dog sits on the rug. a cat runs.\n");
  write_file(dir / "blimp.jsonl",
             R"({"UID":"agr","pairID":"0","sentence_good":"the cat sits.","sentence_bad":"the cat sit."})"
             "\n"
             R"({"UID":"agr","pairID":"1","sentence_good":"the dog sits.","sentence_bad":"dog the sits."})"
             "\n");
  const json scorer = {{"kind", "ngram"}, {"corpus", "train.txt"}, {"order", 2}};
  const json benchmarks = {{"blimp", "blimp.jsonl"}};
  REQUIRE(run_config(dir, "bench", {{"scorer", scorer},
                                    {"benchmarks", benchmarks},
                                    {"output", "bench.json"}})
              .status == cli::kOk);
  const json report = json::parse(read_file(dir / "bench.json"));
  CHECK(report["scores"]["blimp"].is_number());

  const json sweep = {
      {"benchmarks", benchmarks},
      {"run_label", "toy"},
      {"seed", 1},
      {"checkpoints",
       {{{"step", 100}, {"scorer", scorer}},
        {{"step", 200},
         {"scorer",
          {{"kind", "remote"},
           {"endpoint", {{"url", testing::unreachable_url()},
                         {"max_retries", 0},
                         {"timeout_ms", 500}}}}}}}},
      {"output", "traj.json"},
      {"plot_dir", "plots"}};
  const Outcome o = run_config(dir, "sweep", sweep);
  CHECK(o.status == cli::kServiceUnavailable);
  const TrajectorySeries series =
      trajectory_from_json(json::parse(read_file(dir / "traj.json")));
  REQUIRE(series.points.size() == 2);
  CHECK(series.points[0].report.has_value());
  CHECK_FALSE(series.points[1].report.has_value());
  CHECK(series.run_label == "toy");
  CHECK(read_file(dir / "plots/trajectory.csv").find("toy,1,200") !=
        std::string::npos);

  json bad = sweep;
  bad["checkpoints"][1]["step"] = 50;
  CHECK(run_config(dir, "sweep", bad).status == cli::kInvalidInput);
}

TEST_CASE("debias inlp and analyze shifts") {
  TempDir dir;
  json rows = json::array(), labels = json::array();
  for (int i = 0; i < 40; ++i) {
    const int label = i % 2;
    rows.push_back({label ? 1.0 : -1.0, 0.1 * (i % 7), 0.05 * (i % 5)});
    labels.push_back(label);
  }
  write_file(dir / "emb.json", json{{"rows", rows}, {"labels", labels}}.dump());
  REQUIRE(run_config(dir, "debias", {{"method", "inlp"},
                                     {"embeddings", "emb.json"},
                                     {"output", "inlp.json"},
                                     {"projected_output", "projected.json"}})
              .status == cli::kOk);
  const json inlp = json::parse(read_file(dir / "inlp.json"));
  CHECK(inlp["removed_directions"].size() >= 1);
  CHECK(inlp["final_probe_accuracy"].get<double>() <=
        inlp["majority"].get<double>() + 0.02 + 1e-9);

  auto report = [&](const std::string& name, double shift) {
    json scores = {{"blimp", 60 + shift},
                   {"blimp_supplement", 55 + 0.5 * shift},
                   {"ewok", 50 + shift * shift / 10},
                   {"stereoset_ss", 58 - shift},
                   {"stereoset_lms", 90},
                   {"crows", 57 - 0.3 * shift * shift}};
    write_file(dir / name, json{{"scores", scores}}.dump());
  };
  report("base.json", 0);
  json treated = json::object();
  for (int k = 1; k <= 4; ++k) {
    const std::string name = "t" + std::to_string(k) + ".json";
    report(name, k);
    treated["m" + std::to_string(k)] = name;
  }
  REQUIRE(run_config(dir, "analyze",
                     {{"shifts", {{{"model", "toy"},
                                   {"baseline", "base.json"},
                                   {"treated", treated}}}},
                      {"shift_csv", "shift.csv"},
                      {"output", "analysis.json"}})
              .status == cli::kOk);
  const json a = json::parse(read_file(dir / "analysis.json"));
  CHECK(a["shifts"].size() == 4);
  CHECK(a["shifts"][0]["delta_bias"].get<double>() ==
        doctest::Approx((-1 - 0.3) / 2.0));
  CHECK(a["cca"]["component_rho"].get<double>() <= 1.0);
  CHECK(fs::exists(dir / "shift.csv"));
  const json meta = json::parse(read_file(dir / "analysis.meta.json"));
  CHECK(meta["cca_relative_ridge"] == 1e-6);
}

}  // namespace
}  // namespace corpusbias
