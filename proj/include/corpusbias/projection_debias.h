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

#ifndef CORPUSBIAS_PROJECTION_DEBIAS_H_
#define CORPUSBIAS_PROJECTION_DEBIAS_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "corpusbias/lm_scorer.h"

namespace corpusbias {

// n vectors of dimension d, one per row, with optional protected-attribute
// labels (empty when absent).
struct EmbeddingMatrix {
  Eigen::MatrixXd rows;
  std::vector<int> labels;

  // Throws InvalidInput when labels are present but do not match the row
  // count or hold fewer than two classes.
  void validate() const;
};

// Reads the binary format (8-byte magic, n and d as little-endian u64, then
// row-major little-endian doubles) or, for a .json path, {"rows": [[...]],
// "labels": [...]}.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
// Binary unless the path ends in .json. Labels are kept in JSON only.
void save_embeddings(const std::filesystem::path& path,
                     const EmbeddingMatrix& data);

// JSON list of [sentence_a, sentence_b].
std::vector<std::pair<std::string, std::string>> load_counterfactual_pairs(
    const std::filesystem::path& path);

struct ProbeOptions {
  double learning_rate = 0.1;
  size_t epochs = 500;
  double l2 = 1e-4;
};

struct LinearProbe {
  Eigen::VectorXd weight;  // unit norm, or zero when nothing was learned
  double bias = 0;         // scaled with the weight
  double train_accuracy = 0;
};

// Binary logistic regression by full-batch gradient descent from zero.
// The larger label value is the positive class. Throws InvalidInput unless
// there are exactly two classes with at least two rows each.
LinearProbe fit_linear_probe(const EmbeddingMatrix& data,
                             const ProbeOptions& options = {});

// Share of rows carrying the most frequent label.
double majority_rate(std::span<const int> labels);

// P = I - B B^T for orthonormal removed directions B.
struct Projection {
  Eigen::MatrixXd matrix;
  std::vector<Eigen::VectorXd> removed_directions;

  static Projection identity(Eigen::Index d);
  // Rebuilds the matrix from removed_directions, symmetrized.
  static Projection from_directions(Eigen::Index d,
                                    std::vector<Eigen::VectorXd> directions);
};

struct InlpOptions {
  size_t max_rounds = 35;
  double stop_margin = 0.02;
  ProbeOptions probe;
};

struct InlpResult {
  Projection projection;
  std::vector<double> round_accuracy;  // probe accuracy before each round
  double majority = 0;
};

// Iterative nullspace projection. Each round fits a probe on the projected
// data and stops once its accuracy is within stop_margin of the majority
// rate, when the probe direction has no component outside the removed span,
// or when every dimension has been removed.
InlpResult inlp_fit(const EmbeddingMatrix& data,
                    const InlpOptions& options = {});

// Throws InvalidInput on a dimension mismatch. Labels are carried over.
EmbeddingMatrix apply_projection(const Projection& p,
                                 const EmbeddingMatrix& data);

struct BiasSubspace {
  Eigen::MatrixXd components;  // d x k, orthonormal columns
  std::vector<double> explained_variance;

  Eigen::Index size() const { return components.cols(); }
};

struct SentDebiasOptions {
  std::optional<size_t> k;  // fixed component count, clamped to [1, 20]
  double variance_threshold = 0.5;
};

// Sent-Debias subspace from paired embeddings (row i of a with row i of b).
// Each pair is centered on its own mean; components are the top
// eigenvectors of the centered collection's second-moment matrix, signed so
// their largest-magnitude entry is positive. Identical rows are excluded;
// throws InvalidInput when no pair remains.
BiasSubspace sentdebias_fit(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const SentDebiasOptions& options = {});
// Embeds both sides of every pair first. Pairs of identical sentences are
// excluded before embedding.
BiasSubspace sentdebias_fit(
    std::span<const std::pair<std::string, std::string>> pairs,
    const Scorer& embedder, const SentDebiasOptions& options = {});

// h' = h - V V^T h for every row.
EmbeddingMatrix sentdebias_apply(const BiasSubspace& subspace,
                                 const EmbeddingMatrix& vectors);

}  // namespace corpusbias

#endif  // CORPUSBIAS_PROJECTION_DEBIAS_H_
