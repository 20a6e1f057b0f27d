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

#include "corpusbias/analysis.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "corpusbias/csv.h"
#include "corpusbias/error.h"
#include "corpusbias/file_io.h"

namespace corpusbias {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kTrajectorySchema =
    "# schema: corpusbias-trajectory/1; scores on 0-100; empty = not run\n";
constexpr std::string_view kBandSchema =
    "# schema: corpusbias-seed-band/1; composites over seeds per step\n";
constexpr std::string_view kShiftSchema =
    "# schema: corpusbias-shift/1; deltas are treated minus baseline\n";

std::string number_or_empty(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

Eigen::MatrixXd centered_covariance(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd ca = a.rowwise() - a.colwise().mean();
  const Eigen::MatrixXd cb = b.rowwise() - b.colwise().mean();
  return ca.transpose() * cb / static_cast<double>(a.rows() - 1);
}

// Inverse square root of a ridge-regularized covariance.
Eigen::MatrixXd whitener(Eigen::MatrixXd cov, double relative_ridge,
                         const char* name, double* ridge) {
  const double mean_diag = cov.diagonal().mean();
  if (!(mean_diag > 0.0)) {
    throw InvalidInput(std::string("cca: ") + name + " has no variance");
  }
  *ridge = relative_ridge * mean_diag;
  cov.diagonal().array() += *ridge;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  return eig.operatorInverseSqrt();
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InvalidInput("pearson: series lengths differ (" +
                       std::to_string(x.size()) + " vs " +
                       std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) throw InvalidInput("pearson: need at least three points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw InvalidInput("pearson: a series has zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CcaResult cca_first(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    double relative_ridge) {
  if (x.rows() != y.rows()) {
    throw InvalidInput("cca: x has " + std::to_string(x.rows()) +
                       " rows, y has " + std::to_string(y.rows()));
  }
  if (x.rows() < 3) throw InvalidInput("cca: need at least three observations");
  if (!(relative_ridge > 0.0)) throw InvalidInput("cca: ridge must be positive");
  CcaResult result;
  const Eigen::MatrixXd wx =
      whitener(centered_covariance(x, x), relative_ridge, "x", &result.ridge_x);
  const Eigen::MatrixXd wy =
      whitener(centered_covariance(y, y), relative_ridge, "y", &result.ridge_y);
  const Eigen::MatrixXd m = wx * centered_covariance(x, y) * wy;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  result.rho = std::clamp(svd.singularValues()(0), 0.0, 1.0);
  return result;
}

std::vector<ShiftRecord> shift_table(
    const CompositeScores& baseline,
    const std::map<std::string, CompositeScores>& treated,
    const std::string& model) {
  if (!std::isfinite(baseline.composite_performance) ||
      !std::isfinite(baseline.composite_bias)) {
    throw InvalidInput("shift table: baseline composites are not finite");
  }
  std::vector<ShiftRecord> out;
  for (const auto& [method, scores] : treated) {
    ShiftRecord r;
    r.method = method;
    r.model = model;
    r.delta_performance =
        scores.composite_performance - baseline.composite_performance;
    r.delta_bias = scores.composite_bias - baseline.composite_bias;
    if (!std::isfinite(r.delta_performance) || !std::isfinite(r.delta_bias)) {
      throw InvalidInput("shift table: method " + method +
                         " has non-finite composites");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ShiftRecord> shift_table(
    const BenchScores& baseline, const std::map<std::string, BenchScores>& treated,
    const std::string& model) {
  CompositeScores base;
  try {
    base = composite_scores(baseline);
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("shift table baseline: ") + e.what());
  }
  std::map<std::string, CompositeScores> composites;
  for (const auto& [method, scores] : treated) {
    try {
      composites[method] = composite_scores(scores);
    } catch (const InvalidInput& e) {
      throw InvalidInput("shift table method " + method + ": " + e.what());
    }
  }
  return shift_table(base, composites, model);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> shift_matrices(
    std::span<const ShiftRecord> records) {
  const auto n = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixXd performance(n, 1), bias(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    performance(i, 0) = records[static_cast<size_t>(i)].delta_performance;
    bias(i, 0) = records[static_cast<size_t>(i)].delta_bias;
  }
  return {performance, bias};
}

std::vector<SeedBand> seed_bands(std::span<const TrajectorySeries> series) {
  std::map<std::pair<std::string, uint64_t>, std::vector<const CompositeScores*>>
      groups;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (p.report && p.report->composite) {
        groups[{s.run_label, p.step}].push_back(&*p.report->composite);
      }
    }
  }
  std::vector<SeedBand> out;
  for (const auto& [key, members] : groups) {
    SeedBand band;
    band.run_label = key.first;
    band.step = key.second;
    band.seeds = members.size();
    band.performance_min = band.performance_max =
        members.front()->composite_performance;
    band.bias_min = band.bias_max = members.front()->composite_bias;
    for (const auto* c : members) {
      band.performance_mean += c->composite_performance;
      band.bias_mean += c->composite_bias;
      band.performance_min = std::min(band.performance_min, c->composite_performance);
      band.performance_max = std::max(band.performance_max, c->composite_performance);
      band.bias_min = std::min(band.bias_min, c->composite_bias);
      band.bias_max = std::max(band.bias_max, c->composite_bias);
    }
    band.performance_mean /= static_cast<double>(members.size());
    band.bias_mean /= static_cast<double>(members.size());
    out.push_back(std::move(band));
  }
  return out;
}

std::vector<fs::path> emit_plot_data(std::span<const TrajectorySeries> series,
                                     const fs::path& dir) {
  if (series.empty()) throw InvalidInput("plot data: no trajectory series");
  std::vector<const TrajectorySeries*> ordered;
  for (const auto& s : series) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) {
    return std::tie(a->run_label, a->seed) < std::tie(b->run_label, b->seed);
  });

  std::string csv(kTrajectorySchema);
  csv += csv_line({"run_label", "seed", "step", "blimp", "blimp_supplement",
                   "ewok", "stereoset_ss", "stereoset_lms", "crows",
                   "composite_performance", "composite_bias", "gap"}) + "\n";
  std::map<std::string, std::set<std::optional<uint64_t>>> seeds_per_label;
  for (const auto* s : ordered) {
    seeds_per_label[s->run_label].insert(s->seed);
    std::vector<const TrajectoryPoint*> points;
    for (const auto& p : s->points) points.push_back(&p);
    std::stable_sort(points.begin(), points.end(),
                     [](auto* a, auto* b) { return a->step < b->step; });
    const std::string seed = s->seed ? std::to_string(*s->seed) : "";
    for (const auto* p : points) {
      CsvRow row = {s->run_label, seed, std::to_string(p->step)};
      if (p->report) {
        const auto& sc = p->report->scores;
        for (const auto& v : {sc.blimp, sc.blimp_supplement, sc.ewok,
                              sc.stereoset_ss, sc.stereoset_lms, sc.crows}) {
          row.push_back(number_or_empty(v));
        }
        const auto& c = p->report->composite;
        row.push_back(c ? format_number(c->composite_performance) : "");
        row.push_back(c ? format_number(c->composite_bias) : "");
        row.push_back("");
      } else {
        row.resize(11);
        row.push_back(p->gap_reason.empty() ? "gap" : p->gap_reason);
      }
      csv += csv_line(row) + "\n";
    }
  }
  std::vector<fs::path> written = {dir / "trajectory.csv"};
  write_text_file(written.back(), csv);

  const bool multi_seed =
      std::any_of(seeds_per_label.begin(), seeds_per_label.end(),
                  [](const auto& entry) { return entry.second.size() > 1; });
  if (multi_seed) {
    std::string band_csv(kBandSchema);
    band_csv += csv_line({"run_label", "step", "seeds", "performance_mean",
                          "performance_min", "performance_max", "bias_mean",
                          "bias_min", "bias_max"}) + "\n";
    for (const auto& b : seed_bands(series)) {
      band_csv += csv_line(
          {b.run_label, std::to_string(b.step), std::to_string(b.seeds),
           format_number(b.performance_mean), format_number(b.performance_min),
           format_number(b.performance_max), format_number(b.bias_mean),
           format_number(b.bias_min), format_number(b.bias_max)}) + "\n";
    }
    written.push_back(dir / "seed_band.csv");
    write_text_file(written.back(), band_csv);
  }
  return written;
}

void emit_plot_data(std::span<const ShiftRecord> shifts, const fs::path& path) {
  if (shifts.empty()) throw InvalidInput("plot data: no shift records");
  std::string csv(kShiftSchema);
  csv += csv_line({"method", "model", "delta_performance", "delta_bias"}) + "\n";
  for (const auto& r : shifts) {
    csv += csv_line({r.method, r.model, format_number(r.delta_performance),
                     format_number(r.delta_bias)}) + "\n";
  }
  write_text_file(path, csv);
}

}  // namespace corpusbias
