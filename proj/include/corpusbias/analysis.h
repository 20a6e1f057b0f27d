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

#ifndef CORPUSBIAS_ANALYSIS_H_
#define CORPUSBIAS_ANALYSIS_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "corpusbias/bench.h"

namespace corpusbias {

// Product-moment correlation. Throws InvalidInput on a length mismatch,
// fewer than three points or a constant series.
double pearson(std::span<const double> x, std::span<const double> y);

struct CcaResult {
  double rho = 0;  // first canonical correlation, in [0, 1]
  double ridge_x = 0;
  double ridge_y = 0;
};

// First canonical correlation of the columns of x (n x p) and y (n x q):
// largest singular value of Cxx^-1/2 Cxy Cyy^-1/2 after centering. Each
// covariance gets ridge = relative_ridge * its mean diagonal. Throws
// InvalidInput for n < 3, mismatched rows, a non-positive ridge or an input
// without variance.
CcaResult cca_first(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    double relative_ridge = 1e-6);

struct ShiftRecord {
  std::string method;
  std::string model;
  double delta_performance = 0;
  double delta_bias = 0;
};

// Treated minus baseline composites, one record per method in name order.
std::vector<ShiftRecord> shift_table(
    const CompositeScores& baseline,
    const std::map<std::string, CompositeScores>& treated,
    const std::string& model = "");
// Same, from per-benchmark scores; a missing component throws InvalidInput
// naming it.
std::vector<ShiftRecord> shift_table(
    const BenchScores& baseline, const std::map<std::string, BenchScores>& treated,
    const std::string& model = "");

// Shift records as the (n x 1, n x 1) matrices cca_first expects.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> shift_matrices(
    std::span<const ShiftRecord> records);

struct SeedBand {
  std::string run_label;
  uint64_t step = 0;
  size_t seeds = 0;
  double performance_mean = 0;
  double performance_min = 0;
  double performance_max = 0;
  double bias_mean = 0;
  double bias_min = 0;
  double bias_max = 0;
};

// Per run label and step, mean and min-max of the composites over seeds.
// Gaps and points without composites are left out.
std::vector<SeedBand> seed_bands(std::span<const TrajectorySeries> series);

// Writes <dir>/trajectory.csv (one row per point, gaps included) and, when
// some run label has several seeds, <dir>/seed_band.csv. Rows are ordered by
// run label, seed and step. Returns the written paths. Throws InvalidInput
// on empty input.
std::vector<std::filesystem::path> emit_plot_data(
    std::span<const TrajectorySeries> series, const std::filesystem::path& dir);
// Writes one CSV row per shift record.
void emit_plot_data(std::span<const ShiftRecord> shifts,
                    const std::filesystem::path& path);

}  // namespace corpusbias

#endif  // CORPUSBIAS_ANALYSIS_H_
