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

#include "corpusbias/bench.h"

#include <algorithm>

#include "corpusbias/csv.h"
#include "corpusbias/error.h"
#include "corpusbias/file_io.h"
#include "corpusbias/logging.h"
#include "corpusbias/parallel.h"
#include "corpusbias/text.h"

namespace corpusbias {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double credit(double a, double b) { return a > b ? 1.0 : a == b ? 0.5 : 0.0; }

size_t count_blanks(std::string_view context) {
  size_t n = 0;
  for (size_t pos = context.find(kBlank); pos != std::string_view::npos;
       pos = context.find(kBlank, pos + kBlank.size())) {
    ++n;
  }
  return n;
}

// Records of a JSON array file or a JSONL file.
std::vector<json> read_records(const fs::path& path, std::string_view what) {
  const std::string content = read_text_file(path, what);
  const size_t first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '[') {
    const json j = read_json_file(path, what);
    return j.get<std::vector<json>>();
  }
  std::vector<json> out;
  size_t line_no = 0;
  size_t start = 0;
  while (start <= content.size()) {
    size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    ++line_no;
    const std::string line =
        collapse_whitespace(std::string_view(content).substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw InvalidInput(std::string(what) + " " + path.string() + " line " +
                         std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string string_field(const json& record, std::initializer_list<const char*> names,
                         std::string_view what, size_t index) {
  for (const char* name : names) {
    auto it = record.find(name);
    if (it != record.end() && it->is_string()) return it->get<std::string>();
  }
  throw InvalidInput(std::string(what) + " record " + std::to_string(index + 1) +
                     " lacks string field \"" + *names.begin() + "\"");
}

std::string optional_string(const json& record,
                            std::initializer_list<const char*> names,
                            std::string fallback) {
  for (const char* name : names) {
    auto it = record.find(name);
    if (it != record.end() && it->is_string()) return it->get<std::string>();
    if (it != record.end() && it->is_number()) return it->dump();
  }
  return fallback;
}

void skip(std::string_view what, const std::string& id, std::string_view why) {
  log_warning(std::string(what) + " item " + id + " skipped: " +
              std::string(why));
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() &&
         ascii_lower(s.substr(0, prefix.size())) == ascii_lower(prefix);
}

bool ends_with_ci(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         ascii_lower(s.substr(s.size() - suffix.size())) == ascii_lower(suffix);
}

// Fill of `sentence` relative to a context with one BLANK, or nullopt.
std::optional<std::string> derive_fill(const std::string& context,
                                       const std::string& sentence) {
  const size_t pos = context.find(kBlank);
  const std::string_view prefix = std::string_view(context).substr(0, pos);
  const std::string_view suffix =
      std::string_view(context).substr(pos + kBlank.size());
  if (sentence.size() < prefix.size() + suffix.size() ||
      !starts_with_ci(sentence, prefix) || !ends_with_ci(sentence, suffix)) {
    return std::nullopt;
  }
  std::string fill = sentence.substr(
      prefix.size(), sentence.size() - prefix.size() - suffix.size());
  if (fill.empty()) return std::nullopt;
  return fill;
}

bool valid_stereo(const StereoIntraItem& item) {
  if (count_blanks(item.context) != 1) {
    skip("StereoSet", item.id, "context must contain exactly one BLANK");
    return false;
  }
  if (item.stereotype == item.antistereotype ||
      item.stereotype == item.unrelated ||
      item.antistereotype == item.unrelated) {
    skip("StereoSet", item.id, "fills must be distinct");
    return false;
  }
  return true;
}

// Per-item credits, filled in batches; items whose batch fails are retried
// alone and excluded when they fail again.
struct Evaluation {
  std::vector<std::optional<std::vector<double>>> values;
  std::vector<ExcludedItem> excluded;
};

using BatchFn =
    std::function<std::vector<std::vector<double>>(const std::vector<size_t>&)>;

Evaluation evaluate(const std::vector<std::string>& ids,
                    std::vector<std::string> pre_excluded,
                    const BenchOptions& options, const BatchFn& fn) {
  const size_t n = ids.size();
  std::vector<std::optional<std::vector<double>>> values(n);
  std::vector<std::string> reasons = std::move(pre_excluded);
  reasons.resize(n);
  std::vector<size_t> eligible;
  for (size_t i = 0; i < n; ++i) {
    if (reasons[i].empty()) eligible.push_back(i);
  }
  const size_t batch = std::max<size_t>(options.batch_size, 1);
  const size_t batches = (eligible.size() + batch - 1) / batch;
  parallel_for(batches, options.concurrency, [&](size_t b) {
    const std::vector<size_t> indices(
        eligible.begin() + b * batch,
        eligible.begin() + std::min(eligible.size(), (b + 1) * batch));
    try {
      auto out = fn(indices);
      for (size_t k = 0; k < indices.size(); ++k) {
        values[indices[k]] = std::move(out[k]);
      }
      return;
    } catch (const ServiceUnavailable&) {
      throw;
    } catch (const Error&) {
      // Fall through to item-by-item scoring.
    }
    for (size_t i : indices) {
      try {
        values[i] = std::move(fn({i})[0]);
      } catch (const ServiceUnavailable&) {
        throw;
      } catch (const Error& e) {
        reasons[i] = e.what();
      }
    }
  });
  Evaluation eval{std::move(values), {}};
  for (size_t i = 0; i < n; ++i) {
    if (!reasons[i].empty()) eval.excluded.push_back({ids[i], reasons[i]});
  }
  return eval;
}

// Mean credit (component `c` of each item's values) over scored items,
// overall and per category, as percentages.
void aggregate(const Evaluation& eval, const std::vector<std::string>& categories,
               size_t c, double* score,
               std::map<std::string, double>* by_category, size_t* scored) {
  double total = 0.0;
  size_t count = 0;
  std::map<std::string, std::pair<double, size_t>> cat;
  for (size_t i = 0; i < eval.values.size(); ++i) {
    if (!eval.values[i]) continue;
    const double v = (*eval.values[i])[c];
    total += v;
    ++count;
    if (by_category) {
      auto& slot = cat[categories[i]];
      slot.first += v;
      ++slot.second;
    }
  }
  *score = 100.0 * total / static_cast<double>(count);
  if (scored) *scored = count;
  if (by_category) {
    for (const auto& [name, sum] : cat) {
      (*by_category)[name] = 100.0 * sum.first / static_cast<double>(sum.second);
    }
  }
}

void require_items(size_t n, std::string_view benchmark) {
  if (n == 0) throw InvalidInput(std::string(benchmark) + ": no items");
}

void require_scored(const Evaluation& eval, std::string_view benchmark) {
  for (const auto& v : eval.values) {
    if (v) return;
  }
  throw InvalidInput(std::string(benchmark) + ": every item was excluded");
}

TokenList concat(const TokenList& a, const TokenList& b) {
  TokenList out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> number_or_null(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

json excluded_to_json(const std::vector<ExcludedItem>& items) {
  json out = json::array();
  for (const auto& e : items) out.push_back({{"id", e.id}, {"reason", e.reason}});
  return out;
}

}  // namespace

std::string StereoIntraItem::fill(const std::string& option) const {
  std::string out = context;
  const size_t pos = out.find(kBlank);
  out.replace(pos, kBlank.size(), option);
  return out;
}

std::vector<CrowsPairItem> load_crows(const fs::path& path) {
  std::vector<json> records;
  if (path.extension() == ".csv") {
    const auto rows = parse_csv(read_text_file(path, "CrowS-Pairs file"));
    if (rows.empty()) throw InvalidInput("CrowS-Pairs CSV is empty");
    std::map<std::string, size_t> column;
    for (size_t c = 0; c < rows[0].size(); ++c) column[rows[0][c]] = c;
    for (const char* required :
         {"sent_more", "sent_less", "stereo_antistereo", "bias_type"}) {
      if (!column.contains(required)) {
        throw InvalidInput(std::string("CrowS-Pairs CSV lacks column \"") +
                           required + "\"");
      }
    }
    for (size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() == 1 && rows[r][0].empty()) continue;
      json record;
      for (const auto& [name, c] : column) {
        if (c < rows[r].size()) record[name.empty() ? "id" : name] = rows[r][c];
      }
      records.push_back(std::move(record));
    }
  } else {
    records = read_records(path, "CrowS-Pairs file");
  }
  std::vector<CrowsPairItem> items;
  for (size_t i = 0; i < records.size(); ++i) {
    const json& r = records[i];
    CrowsPairItem item;
    item.id = optional_string(r, {"id"}, std::to_string(i));
    item.stereo_sentence = string_field(r, {"sent_more"}, "CrowS-Pairs", i);
    item.antistereo_sentence = string_field(r, {"sent_less"}, "CrowS-Pairs", i);
    item.direction =
        string_field(r, {"stereo_antistereo", "direction"}, "CrowS-Pairs", i);
    item.bias_type = string_field(r, {"bias_type"}, "CrowS-Pairs", i);
    if (item.direction != "stereo" && item.direction != "antistereo") {
      throw InvalidInput("CrowS-Pairs record " + std::to_string(i + 1) +
                         ": direction must be stereo or antistereo");
    }
    if (item.stereo_sentence == item.antistereo_sentence) {
      skip("CrowS-Pairs", item.id, "sentences are identical");
      continue;
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<StereoIntraItem> load_stereoset(const fs::path& path) {
  const json j = read_json_file(path, "StereoSet file");
  std::vector<StereoIntraItem> items;
  if (j.is_object()) {
    const json* intra = nullptr;
    if (auto d = j.find("data"); d != j.end()) {
      if (auto it = d->find("intrasentence"); it != d->end()) intra = &*it;
    }
    if (!intra || !intra->is_array()) {
      throw InvalidInput("StereoSet JSON lacks data.intrasentence");
    }
    for (size_t i = 0; i < intra->size(); ++i) {
      const json& r = (*intra)[i];
      StereoIntraItem item;
      item.id = optional_string(r, {"id"}, std::to_string(i));
      item.context = string_field(r, {"context"}, "StereoSet", i);
      item.bias_type = optional_string(r, {"bias_type"}, "");
      if (count_blanks(item.context) != 1) {
        skip("StereoSet", item.id, "context must contain exactly one BLANK");
        continue;
      }
      bool ok = true;
      std::map<std::string, std::string> fills;
      for (const auto& s : r.value("sentences", json::array())) {
        const std::string label = s.value("gold_label", "");
        auto fill = derive_fill(item.context, s.value("sentence", ""));
        if (!fill) {
          ok = false;
          break;
        }
        fills[label] = *fill;
      }
      if (!ok || !fills.contains("stereotype") ||
          !fills.contains("anti-stereotype") || !fills.contains("unrelated")) {
        skip("StereoSet", item.id,
             "sentences do not match the context or lack a label");
        continue;
      }
      item.stereotype = fills["stereotype"];
      item.antistereotype = fills["anti-stereotype"];
      item.unrelated = fills["unrelated"];
      if (valid_stereo(item)) items.push_back(std::move(item));
    }
    return items;
  }
  if (!j.is_array()) {
    throw InvalidInput("StereoSet file must be native JSON or an item array");
  }
  for (size_t i = 0; i < j.size(); ++i) {
    const json& r = j[i];
    StereoIntraItem item;
    item.id = optional_string(r, {"id"}, std::to_string(i));
    item.context = string_field(r, {"context"}, "StereoSet", i);
    item.stereotype = string_field(r, {"stereotype"}, "StereoSet", i);
    item.antistereotype =
        string_field(r, {"anti-stereotype", "antistereotype"}, "StereoSet", i);
    item.unrelated = string_field(r, {"unrelated"}, "StereoSet", i);
    item.bias_type = optional_string(r, {"bias_type"}, "");
    if (valid_stereo(item)) items.push_back(std::move(item));
  }
  return items;
}

std::vector<MinimalPairItem> load_minimal_pairs(const fs::path& path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw InvalidInput("no .jsonl files in " + path.string());
    }
  } else {
    files.push_back(path);
  }
  std::vector<MinimalPairItem> items;
  for (const auto& file : files) {
    const auto records = read_records(file, "minimal-pair file");
    for (size_t i = 0; i < records.size(); ++i) {
      const json& r = records[i];
      MinimalPairItem item;
      item.category = optional_string(r, {"UID", "uid", "category"},
                                      file.stem().string());
      item.id = optional_string(r, {"pairID", "id"}, std::to_string(i));
      item.id = item.category + "/" + item.id;
      item.good_sentence = string_field(r, {"sentence_good"}, "minimal-pair", i);
      item.bad_sentence = string_field(r, {"sentence_bad"}, "minimal-pair", i);
      if (item.good_sentence == item.bad_sentence) {
        skip("minimal-pair", item.id, "sentences are identical");
        continue;
      }
      if (item.category.empty()) {
        skip("minimal-pair", item.id, "empty category");
        continue;
      }
      items.push_back(std::move(item));
    }
  }
  return items;
}

std::vector<EwokItem> load_ewok(const fs::path& path) {
  const auto records = read_records(path, "EWoK file");
  std::vector<EwokItem> items;
  for (size_t i = 0; i < records.size(); ++i) {
    const json& r = records[i];
    EwokItem item;
    item.id = optional_string(r, {"id", "Item", "item"}, std::to_string(i));
    item.context_1 = string_field(r, {"Context1", "context1"}, "EWoK", i);
    item.context_2 = string_field(r, {"Context2", "context2"}, "EWoK", i);
    item.target_1 = string_field(r, {"Target1", "target1"}, "EWoK", i);
    item.target_2 = string_field(r, {"Target2", "target2"}, "EWoK", i);
    item.category = optional_string(r, {"Domain", "domain", "category"}, "");
    if (item.context_1 == item.context_2 || item.target_1 == item.target_2) {
      skip("EWoK", item.id, "contexts and targets must be distinct");
      continue;
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::pair<IndexList, IndexList> shared_tokens(const TokenList& a,
                                              const TokenList& b) {
  std::vector<bool> claimed(b.size(), false);
  IndexList sa, sb;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < b.size(); ++j) {
      if (!claimed[j] && a[i] == b[j]) {
        claimed[j] = true;
        sa.push_back(i);
        sb.push_back(j);
        break;
      }
    }
  }
  std::sort(sb.begin(), sb.end());
  return {sa, sb};
}

BenchmarkResult score_minimal_pairs(const Scorer& scorer,
                                    const std::vector<MinimalPairItem>& items,
                                    const BenchOptions& options) {
  require_items(items.size(), "minimal pairs");
  std::vector<std::string> ids, categories;
  for (const auto& it : items) {
    ids.push_back(it.id);
    categories.push_back(it.category);
  }
  auto eval = evaluate(ids, {}, options, [&](const std::vector<size_t>& idx) {
    std::vector<TokenList> batch;
    for (size_t i : idx) {
      batch.push_back(tokenize(items[i].good_sentence));
      batch.push_back(tokenize(items[i].bad_sentence));
    }
    const auto scores = scorer.sequence_logprob(batch);
    std::vector<std::vector<double>> out;
    for (size_t k = 0; k < idx.size(); ++k) {
      out.push_back({credit(scores[2 * k].total, scores[2 * k + 1].total)});
    }
    return out;
  });
  require_scored(eval, "minimal pairs");
  BenchmarkResult r;
  aggregate(eval, categories, 0, &r.score, &r.by_category, &r.scored);
  r.excluded = std::move(eval.excluded);
  return r;
}

BenchmarkResult score_crows(const Scorer& scorer,
                            const std::vector<CrowsPairItem>& items,
                            const BenchOptions& options) {
  require_items(items.size(), "CrowS-Pairs");
  std::vector<std::string> ids, categories, pre(items.size());
  std::vector<TokenList> stereo, anti;
  std::vector<std::pair<IndexList, IndexList>> shared;
  for (size_t i = 0; i < items.size(); ++i) {
    ids.push_back(items[i].id);
    categories.push_back(items[i].bias_type);
    stereo.push_back(tokenize(items[i].stereo_sentence));
    anti.push_back(tokenize(items[i].antistereo_sentence));
    shared.push_back(shared_tokens(stereo.back(), anti.back()));
    if (shared.back().first.empty()) pre[i] = "no shared tokens";
  }
  auto eval =
      evaluate(ids, std::move(pre), options, [&](const std::vector<size_t>& idx) {
        std::vector<TokenList> batch;
        std::vector<IndexList> targets;
        for (size_t i : idx) {
          batch.push_back(stereo[i]);
          targets.push_back(shared[i].first);
          batch.push_back(anti[i]);
          targets.push_back(shared[i].second);
        }
        const auto values = scorer.masked_logprob(batch, targets);
        std::vector<std::vector<double>> out;
        for (size_t k = 0; k < idx.size(); ++k) {
          double s = 0.0, a = 0.0;
          for (double v : values[2 * k]) s += v;
          for (double v : values[2 * k + 1]) a += v;
          out.push_back({credit(s, a)});
        }
        return out;
      });
  require_scored(eval, "CrowS-Pairs");
  BenchmarkResult r;
  aggregate(eval, categories, 0, &r.score, &r.by_category, &r.scored);
  r.excluded = std::move(eval.excluded);
  return r;
}

StereoSetResult score_stereoset_intra(const Scorer& scorer,
                                      const std::vector<StereoIntraItem>& items,
                                      const BenchOptions& options) {
  require_items(items.size(), "StereoSet");
  std::vector<std::string> ids, categories;
  for (const auto& it : items) {
    ids.push_back(it.id);
    categories.push_back(it.bias_type);
  }
  auto eval = evaluate(ids, {}, options, [&](const std::vector<size_t>& idx) {
    std::vector<TokenList> batch;
    for (size_t i : idx) {
      batch.push_back(tokenize(items[i].fill(items[i].stereotype)));
      batch.push_back(tokenize(items[i].fill(items[i].antistereotype)));
      batch.push_back(tokenize(items[i].fill(items[i].unrelated)));
    }
    const auto scores = scorer.sequence_logprob(batch);
    std::vector<std::vector<double>> out;
    for (size_t k = 0; k < idx.size(); ++k) {
      const double s = scores[3 * k].mean;
      const double a = scores[3 * k + 1].mean;
      const double u = scores[3 * k + 2].mean;
      out.push_back({credit(s, a), (credit(s, u) + credit(a, u)) / 2.0});
    }
    return out;
  });
  require_scored(eval, "StereoSet");
  StereoSetResult r;
  aggregate(eval, categories, 0, &r.ss, &r.ss_by_category, &r.scored);
  aggregate(eval, categories, 1, &r.lms, nullptr, nullptr);
  r.excluded = std::move(eval.excluded);
  return r;
}

BenchmarkResult score_ewok(const Scorer& scorer,
                           const std::vector<EwokItem>& items,
                           const BenchOptions& options) {
  require_items(items.size(), "EWoK");
  std::vector<std::string> ids, categories;
  for (const auto& it : items) {
    ids.push_back(it.id);
    categories.push_back(it.category);
  }
  auto eval = evaluate(ids, {}, options, [&](const std::vector<size_t>& idx) {
    std::vector<TokenList> batch;
    for (size_t i : idx) {
      const TokenList c1 = tokenize(items[i].context_1);
      const TokenList c2 = tokenize(items[i].context_2);
      const TokenList t1 = tokenize(items[i].target_1);
      const TokenList t2 = tokenize(items[i].target_2);
      batch.push_back(concat(c1, t1));
      batch.push_back(concat(c2, t1));
      batch.push_back(concat(c2, t2));
      batch.push_back(concat(c1, t2));
      batch.push_back(c1);
      batch.push_back(c2);
    }
    const auto s = scorer.sequence_logprob(batch);
    std::vector<std::vector<double>> out;
    for (size_t k = 0; k < idx.size(); ++k) {
      const auto* v = &s[6 * k];
      const double t1_c1 = v[0].total - v[4].total;
      const double t1_c2 = v[1].total - v[5].total;
      const double t2_c2 = v[2].total - v[5].total;
      const double t2_c1 = v[3].total - v[4].total;
      out.push_back({t1_c1 > t1_c2 && t2_c2 > t2_c1 ? 1.0 : 0.0});
    }
    return out;
  });
  require_scored(eval, "EWoK");
  BenchmarkResult r;
  aggregate(eval, categories, 0, &r.score, &r.by_category, &r.scored);
  r.excluded = std::move(eval.excluded);
  return r;
}

CompositeScores composite_scores(const BenchScores& s) {
  auto need = [](const std::optional<double>& v, const char* name) {
    if (!v) throw InvalidInput(std::string("missing benchmark score: ") + name);
    return *v;
  };
  CompositeScores c;
  c.blimp = need(s.blimp, "blimp");
  c.blimp_supplement = need(s.blimp_supplement, "blimp_supplement");
  c.ewok = need(s.ewok, "ewok");
  c.stereoset_ss = need(s.stereoset_ss, "stereoset_ss");
  c.stereoset_lms = need(s.stereoset_lms, "stereoset_lms");
  c.crows = need(s.crows, "crows");
  c.composite_performance = (c.blimp + c.blimp_supplement + c.ewok) / 3.0;
  c.composite_bias = (c.stereoset_ss + c.crows) / 2.0;
  return c;
}

BenchReport run_benchmarks(const Scorer& scorer, const BenchmarkSuite& suite,
                           const BenchOptions& options) {
  BenchReport report;
  report.scorer_identity = scorer.identity();
  auto record = [&](const char* name, BenchmarkResult r) {
    report.categories[name] = std::move(r.by_category);
    report.excluded[name] = std::move(r.excluded);
    return r.score;
  };
  if (suite.blimp) {
    report.scores.blimp =
        record("blimp", score_minimal_pairs(scorer, *suite.blimp, options));
  }
  if (suite.blimp_supplement) {
    report.scores.blimp_supplement =
        record("blimp_supplement",
               score_minimal_pairs(scorer, *suite.blimp_supplement, options));
  }
  if (suite.ewok) {
    report.scores.ewok = record("ewok", score_ewok(scorer, *suite.ewok, options));
  }
  if (suite.stereoset) {
    auto r = score_stereoset_intra(scorer, *suite.stereoset, options);
    report.scores.stereoset_ss = r.ss;
    report.scores.stereoset_lms = r.lms;
    report.categories["stereoset"] = std::move(r.ss_by_category);
    report.excluded["stereoset"] = std::move(r.excluded);
  }
  if (suite.crows) {
    report.scores.crows =
        record("crows", score_crows(scorer, *suite.crows, options));
  }
  const auto& s = report.scores;
  if (s.blimp && s.blimp_supplement && s.ewok && s.stereoset_ss && s.crows) {
    report.composite = composite_scores(s);
  }
  return report;
}

json bench_report_to_json(const BenchReport& report) {
  const auto& s = report.scores;
  json scores = {{"blimp", optional_number(s.blimp)},
                 {"blimp_supplement", optional_number(s.blimp_supplement)},
                 {"ewok", optional_number(s.ewok)},
                 {"stereoset_ss", optional_number(s.stereoset_ss)},
                 {"stereoset_lms", optional_number(s.stereoset_lms)},
                 {"crows", optional_number(s.crows)}};
  json composite = nullptr;
  if (const auto& c = report.composite) {
    composite = {{"composite_performance", c->composite_performance},
                 {"composite_bias", c->composite_bias}};
  }
  json excluded = json::object();
  for (const auto& [name, items] : report.excluded) {
    excluded[name] = excluded_to_json(items);
  }
  return {{"scorer_identity", report.scorer_identity},
          {"scores", std::move(scores)},
          {"composite", std::move(composite)},
          {"categories", report.categories},
          {"excluded", std::move(excluded)}};
}

namespace {

BenchReport bench_report_from_json(const json& j) {
  BenchReport r;
  r.scorer_identity = j.value("scorer_identity", "");
  const json& s = j.at("scores");
  r.scores = {number_or_null(s, "blimp"),        number_or_null(s, "blimp_supplement"),
              number_or_null(s, "ewok"),         number_or_null(s, "stereoset_ss"),
              number_or_null(s, "stereoset_lms"), number_or_null(s, "crows")};
  const auto& sc = r.scores;
  if (sc.blimp && sc.blimp_supplement && sc.ewok && sc.stereoset_ss &&
      sc.stereoset_lms && sc.crows) {
    r.composite = composite_scores(r.scores);
  }
  r.categories = j.value("categories",
                         std::map<std::string, std::map<std::string, double>>{});
  const json excluded = j.value("excluded", json::object());
  for (const auto& [name, items] : excluded.items()) {
    auto& list = r.excluded[name];
    for (const auto& e : items) {
      list.push_back({e.at("id"), e.at("reason")});
    }
  }
  return r;
}

}  // namespace

TrajectorySeries checkpoint_sweep(const std::vector<SweepCheckpoint>& checkpoints,
                                  const BenchmarkSuite& suite,
                                  const BenchOptions& options) {
  for (size_t i = 1; i < checkpoints.size(); ++i) {
    if (checkpoints[i].step <= checkpoints[i - 1].step) {
      throw InvalidInput("checkpoint steps must be strictly increasing (" +
                         std::to_string(checkpoints[i - 1].step) + " then " +
                         std::to_string(checkpoints[i].step) + ")");
    }
  }
  TrajectorySeries series;
  for (const auto& cp : checkpoints) {
    TrajectoryPoint point{cp.step, std::nullopt, ""};
    try {
      const std::unique_ptr<Scorer> scorer = cp.open();
      point.report = run_benchmarks(*scorer, suite, options);
    } catch (const ServiceUnavailable& e) {
      point.gap_reason = e.what();
      log_warning("checkpoint at step " + std::to_string(cp.step) +
                  " unreachable; recorded as a gap");
    }
    series.points.push_back(std::move(point));
  }
  return series;
}

json trajectory_to_json(const TrajectorySeries& series) {
  json points = json::array();
  for (const auto& p : series.points) {
    json point = {{"step", p.step}};
    if (p.report) {
      point["report"] = bench_report_to_json(*p.report);
    } else {
      point["gap"] = p.gap_reason;
    }
    points.push_back(std::move(point));
  }
  json out = {{"run_label", series.run_label}, {"points", std::move(points)}};
  out["seed"] = series.seed ? json(*series.seed) : json(nullptr);
  return out;
}

TrajectorySeries trajectory_from_json(const json& j) {
  TrajectorySeries series;
  try {
    series.run_label = j.value("run_label", "");
    if (j.contains("seed") && !j["seed"].is_null()) {
      series.seed = j["seed"].get<uint64_t>();
    }
    for (const auto& p : j.at("points")) {
      TrajectoryPoint point{p.at("step").get<uint64_t>(), std::nullopt, ""};
      if (p.contains("report")) {
        point.report = bench_report_from_json(p["report"]);
      } else {
        point.gap_reason = p.value("gap", "");
      }
      series.points.push_back(std::move(point));
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed trajectory: ") + e.what());
  }
  return series;
}

}  // namespace corpusbias
