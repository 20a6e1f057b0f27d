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

#include "corpusbias/projection_debias.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "corpusbias/error.h"
#include "corpusbias/file_io.h"
#include "corpusbias/logging.h"

namespace corpusbias {
namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "embedding files are read and written as little-endian");

namespace {

constexpr char kMagic[8] = {'C', 'B', 'E', 'M', 'B', 'D', '0', '1'};
constexpr size_t kMaxComponents = 20;

void require_dims(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got) {
    throw InvalidInput(std::string(what) + ": dimension mismatch (expected " +
                       std::to_string(expected) + ", got " +
                       std::to_string(got) + ")");
  }
}

// 0/1 targets with the larger label positive.
Eigen::VectorXd binary_targets(std::span<const int> labels) {
  std::map<int, size_t> counts;
  for (int l : labels) ++counts[l];
  if (counts.size() != 2) {
    throw InvalidInput("linear probe needs exactly two label classes, got " +
                       std::to_string(counts.size()));
  }
  for (const auto& [label, n] : counts) {
    if (n < 2) {
      throw InvalidInput("linear probe needs at least two rows of label " +
                         std::to_string(label));
    }
  }
  const int positive = counts.rbegin()->first;
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (size_t i = 0; i < labels.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = labels[i] == positive ? 1.0 : 0.0;
  }
  return y;
}

}  // namespace

void EmbeddingMatrix::validate() const {
  if (labels.empty()) return;
  if (static_cast<Eigen::Index>(labels.size()) != rows.rows()) {
    throw InvalidInput("embedding labels: " + std::to_string(labels.size()) +
                       " labels for " + std::to_string(rows.rows()) + " rows");
  }
  const int first = labels.front();
  if (std::all_of(labels.begin(), labels.end(),
                  [first](int l) { return l == first; })) {
    throw InvalidInput("embedding labels hold a single class");
  }
}

EmbeddingMatrix load_embeddings(const fs::path& path) {
  EmbeddingMatrix out;
  if (path.extension() == ".json") {
    const json j = read_json_file(path, "embedding file");
    try {
      const auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
      const size_t d = rows.empty() ? 0 : rows.front().size();
      out.rows.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(d));
      for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) {
          throw InvalidInput("embedding file " + path.string() + ": row " +
                             std::to_string(i) + " has dimension " +
                             std::to_string(rows[i].size()) + ", expected " +
                             std::to_string(d));
        }
        for (size_t k = 0; k < d; ++k) {
          out.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
              rows[i][k];
        }
      }
      out.labels = j.value("labels", std::vector<int>{});
    } catch (const json::exception& e) {
      throw InvalidInput("embedding file " + path.string() + ": " + e.what());
    }
    out.validate();
    return out;
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open embedding file: " + path.string());
  char magic[8];
  uint64_t n = 0, d = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&d), sizeof d);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw InvalidInput("not an embedding file: " + path.string());
  }
  const auto size = fs::file_size(path);
  if (d != 0 && (size - 24) / 8 / d != n) {
    throw InvalidInput("embedding file " + path.string() + " is truncated");
  }
  // Row-major on disk; Eigen's default is column-major.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(
      static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(n * d * sizeof(double)));
  if (!in) throw InvalidInput("embedding file " + path.string() + " is truncated");
  out.rows = m;
  return out;
}

void save_embeddings(const fs::path& path, const EmbeddingMatrix& data) {
  if (path.extension() == ".json") {
    json rows = json::array();
    for (Eigen::Index i = 0; i < data.rows.rows(); ++i) {
      std::vector<double> row(data.rows.cols());
      for (Eigen::Index k = 0; k < data.rows.cols(); ++k) row[k] = data.rows(i, k);
      rows.push_back(std::move(row));
    }
    json j = {{"rows", std::move(rows)}};
    if (!data.labels.empty()) j["labels"] = data.labels;
    write_text_file(path, j.dump() + "\n");
    return;
  }
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      m = data.rows;
  const uint64_t n = static_cast<uint64_t>(m.rows());
  const uint64_t d = static_cast<uint64_t>(m.cols());
  std::string bytes(kMagic, sizeof kMagic);
  bytes.append(reinterpret_cast<const char*>(&n), sizeof n);
  bytes.append(reinterpret_cast<const char*>(&d), sizeof d);
  bytes.append(reinterpret_cast<const char*>(m.data()), n * d * sizeof(double));
  write_text_file(path, bytes);
}

std::vector<std::pair<std::string, std::string>> load_counterfactual_pairs(
    const fs::path& path) {
  const json j = read_json_file(path, "counterfactual pair file");
  std::vector<std::pair<std::string, std::string>> out;
  if (!j.is_array()) {
    throw InvalidInput("counterfactual pair file must hold a JSON list: " +
                       path.string());
  }
  for (size_t i = 0; i < j.size(); ++i) {
    const json& p = j[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() ||
        !p[1].is_string()) {
      throw InvalidInput("counterfactual pair " + std::to_string(i) +
                         " must be [sentence_a, sentence_b]");
    }
    out.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
  }
  return out;
}

double majority_rate(std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  std::map<int, size_t> counts;
  for (int l : labels) ++counts[l];
  size_t best = 0;
  for (const auto& [label, n] : counts) best = std::max(best, n);
  return static_cast<double>(best) / static_cast<double>(labels.size());
}

LinearProbe fit_linear_probe(const EmbeddingMatrix& data,
                             const ProbeOptions& options) {
  require_dims(data.rows.rows(), static_cast<Eigen::Index>(data.labels.size()),
               "linear probe labels");
  const Eigen::VectorXd y = binary_targets(data.labels);
  const Eigen::MatrixXd& x = data.rows;
  const double n = static_cast<double>(x.rows());

  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  double b = 0.0;
  for (size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const Eigen::VectorXd z = (x * w).array() + b;
    const Eigen::VectorXd p = 1.0 / (1.0 + (-z.array()).exp());
    const Eigen::VectorXd r = p - y;
    const Eigen::VectorXd grad_w = x.transpose() * r / n + options.l2 * w;
    const double grad_b = r.sum() / n;
    w -= options.learning_rate * grad_w;
    b -= options.learning_rate * grad_b;
  }

  LinearProbe probe;
  const Eigen::VectorXd z = (x * w).array() + b;
  size_t correct = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    correct += (z(i) > 0.0) == (y(i) > 0.5);
  }
  probe.train_accuracy = static_cast<double>(correct) / n;
  const double norm = w.norm();
  if (norm > 0.0) {
    probe.weight = w / norm;
    probe.bias = b / norm;
  } else {
    probe.weight = w;
    probe.bias = b;
  }
  return probe;
}

Projection Projection::identity(Eigen::Index d) {
  return {Eigen::MatrixXd::Identity(d, d), {}};
}

Projection Projection::from_directions(Eigen::Index d,
                                       std::vector<Eigen::VectorXd> directions) {
  Eigen::MatrixXd basis(d, static_cast<Eigen::Index>(directions.size()));
  for (size_t k = 0; k < directions.size(); ++k) {
    require_dims(d, directions[k].size(), "projection direction");
    basis.col(static_cast<Eigen::Index>(k)) = directions[k];
  }
  Eigen::MatrixXd p =
      Eigen::MatrixXd::Identity(d, d) - basis * basis.transpose();
  p = (0.5 * (p + p.transpose())).eval();
  return {std::move(p), std::move(directions)};
}

InlpResult inlp_fit(const EmbeddingMatrix& data, const InlpOptions& options) {
  if (options.max_rounds < 1) throw InvalidInput("inlp: max_rounds must be >= 1");
  if (data.labels.empty()) throw InvalidInput("inlp: embeddings need labels");
  data.validate();
  const Eigen::Index d = data.rows.cols();

  InlpResult result;
  result.majority = majority_rate(data.labels);
  result.projection = Projection::identity(d);
  EmbeddingMatrix current = data;
  std::vector<Eigen::VectorXd> directions;

  for (size_t round = 0; round < options.max_rounds; ++round) {
    const LinearProbe probe = fit_linear_probe(current, options.probe);
    result.round_accuracy.push_back(probe.train_accuracy);
    if (probe.train_accuracy <= result.majority + options.stop_margin) break;
    if (static_cast<Eigen::Index>(directions.size()) >= d) {
      log_warning("inlp: every dimension removed after " +
                  std::to_string(directions.size()) + " rounds; stopping");
      break;
    }
    // Two Gram-Schmidt passes keep the basis orthonormal to rounding.
    Eigen::VectorXd v = probe.weight;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : directions) v -= u.dot(v) * u;
    }
    const double residual = v.norm();
    if (residual < 1e-10) {
      log_warning("inlp: probe direction already removed; stopping at round " +
                  std::to_string(round + 1));
      break;
    }
    directions.push_back(v / residual);
    result.projection = Projection::from_directions(d, directions);
    current.rows = data.rows * result.projection.matrix;
  }
  return result;
}

EmbeddingMatrix apply_projection(const Projection& p,
                                 const EmbeddingMatrix& data) {
  require_dims(p.matrix.rows(), data.rows.cols(), "apply_projection");
  // P is symmetric, so row-wise P x equals X P.
  return {data.rows * p.matrix, data.labels};
}

BiasSubspace sentdebias_fit(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const SentDebiasOptions& options) {
  require_dims(a.rows(), b.rows(), "sentdebias pair count");
  require_dims(a.cols(), b.cols(), "sentdebias");
  const Eigen::Index d = a.cols();

  // Pair-centered vectors are +-(a - b) / 2; each pair contributes both.
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a.row(i) != b.row(i)) kept.push_back(i);
  }
  const auto dropped = a.rows() - static_cast<Eigen::Index>(kept.size());
  if (dropped > 0) {
    log_warning("sentdebias: " + std::to_string(dropped) +
                " degenerate pairs excluded");
  }
  if (kept.empty()) throw InvalidInput("sentdebias: every pair is degenerate");
  Eigen::MatrixXd centered(static_cast<Eigen::Index>(2 * kept.size()), d);
  for (size_t k = 0; k < kept.size(); ++k) {
    const Eigen::RowVectorXd half = 0.5 * (a.row(kept[k]) - b.row(kept[k]));
    centered.row(static_cast<Eigen::Index>(2 * k)) = half;
    centered.row(static_cast<Eigen::Index>(2 * k + 1)) = -half;
  }
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(centered.rows());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw Error("sentdebias: eigen-decomposition failed");
  }
  // Eigenvalues come back ascending.
  const Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  const double total = values.sum();

  const size_t limit = std::min<size_t>(kMaxComponents, static_cast<size_t>(d));
  size_t k = 0;
  if (options.k) {
    k = std::clamp<size_t>(*options.k, 1, limit);
    if (k != *options.k) {
      log_warning("sentdebias: k=" + std::to_string(*options.k) +
                  " clamped to " + std::to_string(k));
    }
  } else {
    double cumulative = 0.0;
    while (k < static_cast<size_t>(d)) {
      cumulative += values(static_cast<Eigen::Index>(k)) / total;
      ++k;
      if (cumulative >= options.variance_threshold) break;
    }
    k = std::clamp<size_t>(k, 1, limit);
  }

  BiasSubspace subspace;
  subspace.components = vectors.leftCols(static_cast<Eigen::Index>(k));
  for (Eigen::Index j = 0; j < subspace.components.cols(); ++j) {
    auto col = subspace.components.col(j);
    Eigen::Index at = 0;
    col.cwiseAbs().maxCoeff(&at);
    if (col(at) < 0) col = -col;
    subspace.explained_variance.push_back(values(j) / total);
  }
  return subspace;
}

BiasSubspace sentdebias_fit(
    std::span<const std::pair<std::string, std::string>> pairs,
    const Scorer& embedder, const SentDebiasOptions& options) {
  if (pairs.size() < 2) {
    throw InvalidInput("sentdebias needs at least two counterfactual pairs");
  }
  std::vector<std::string> sentences;
  for (const auto& [x, y] : pairs) {
    if (x == y) continue;
    sentences.push_back(x);
    sentences.push_back(y);
  }
  if (sentences.size() < 2 * pairs.size()) {
    log_warning("sentdebias: " +
                std::to_string(pairs.size() - sentences.size() / 2) +
                " pairs of identical sentences excluded");
  }
  if (sentences.empty()) throw InvalidInput("sentdebias: every pair is degenerate");
  const auto vectors = embedder.embed(sentences);
  const auto n = static_cast<Eigen::Index>(sentences.size() / 2);
  const auto d = static_cast<Eigen::Index>(vectors.front().size());
  Eigen::MatrixXd a(n, d), b(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.row(i) = Eigen::Map<const Eigen::RowVectorXd>(vectors[2 * i].data(), d);
    b.row(i) = Eigen::Map<const Eigen::RowVectorXd>(vectors[2 * i + 1].data(), d);
  }
  return sentdebias_fit(a, b, options);
}

EmbeddingMatrix sentdebias_apply(const BiasSubspace& subspace,
                                 const EmbeddingMatrix& vectors) {
  require_dims(subspace.components.rows(), vectors.rows.cols(),
               "sentdebias_apply");
  const Eigen::MatrixXd& v = subspace.components;
  return {vectors.rows - (vectors.rows * v) * v.transpose(), vectors.labels};
}

}  // namespace corpusbias
