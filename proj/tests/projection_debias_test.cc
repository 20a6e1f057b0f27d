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
#include <cmath>
#include <numbers>
#include <random>

#include "corpusbias/error.h"
#include "corpusbias/rng.h"
#include "doctest.h"
#include "test_util.h"

namespace corpusbias {
namespace {

using testing::LogCapture;
using testing::TempDir;

// Standard normal draws from a seeded engine.
class Gaussian {
 public:
  explicit Gaussian(uint64_t seed) : engine_(seed) {}
  double operator()() { return dist_(engine_); }
  Eigen::MatrixXd matrix(Eigen::Index n, Eigen::Index d) {
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) m(i, k) = (*this)();
    }
    return m;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_;
};

// Two classes offset by +-shift along `axis`, noise elsewhere.
EmbeddingMatrix clusters(uint64_t seed, Eigen::Index n, Eigen::Index d,
                         Eigen::Index axis, double shift) {
  Gaussian g(seed);
  EmbeddingMatrix data{g.matrix(n, d), {}};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    data.labels.push_back(label);
    data.rows(i, axis) += label ? shift : -shift;
  }
  return data;
}

// Best accuracy of any threshold rule (either orientation) on 1-D scores.
double best_threshold_accuracy(const Eigen::VectorXd& s,
                               const std::vector<int>& labels) {
  std::vector<double> cuts(s.data(), s.data() + s.size());
  cuts.push_back(-1e300);
  double best = 0.0;
  const auto n = static_cast<double>(s.size());
  for (double cut : cuts) {
    double agree = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      agree += (s(i) > cut) == (labels[static_cast<size_t>(i)] == 1);
    }
    best = std::max({best, agree / n, 1.0 - agree / n});
  }
  return best;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

TEST_CASE("linear probe on separated clusters") {
  const auto data = clusters(1, 200, 2, 0, 3.0);
  const auto probe = fit_linear_probe(data);
  CHECK(probe.train_accuracy >= 0.95);
  CHECK(probe.weight.norm() == doctest::Approx(1.0));
  // No threshold on the probe's own projection does much better.
  const Eigen::VectorXd s = data.rows * probe.weight;
  const double oracle = best_threshold_accuracy(s, data.labels);
  CHECK(probe.train_accuracy <= oracle);
  CHECK(oracle - probe.train_accuracy <= 0.02);
  CHECK(std::abs(probe.weight(0)) > 0.9);
}

TEST_CASE("linear probe on uninformative labels") {
  for (uint64_t seed : {2, 3, 4}) {
    Gaussian g(seed);
    SeededRng rng(seed);
    EmbeddingMatrix data{g.matrix(300, 3), {}};
    for (int i = 0; i < 300; ++i) {
      data.labels.push_back(static_cast<int>(rng.uniform_index(2)));
    }
    const double acc = fit_linear_probe(data).train_accuracy;
    CHECK(std::abs(acc - majority_rate(data.labels)) <= 0.1);
  }

  EmbeddingMatrix same{Eigen::MatrixXd::Ones(4, 3), {0, 0, 1, 1}};
  CHECK(fit_linear_probe(same).train_accuracy == 0.5);

  EmbeddingMatrix one_class{Eigen::MatrixXd::Ones(4, 3), {1, 1, 1, 1}};
  CHECK_THROWS_AS(fit_linear_probe(one_class), InvalidInput);
  EmbeddingMatrix lonely{Eigen::MatrixXd::Ones(3, 3), {0, 0, 1}};
  CHECK_THROWS_AS(fit_linear_probe(lonely), InvalidInput);
}

TEST_CASE("inlp removes a separable axis") {
  const auto data = clusters(5, 400, 2, 1, 4.0);
  InlpOptions one;
  one.max_rounds = 1;
  const auto r = inlp_fit(data, one);
  REQUIRE(r.projection.removed_directions.size() == 1);
  const auto projected = apply_projection(r.projection, data);
  CHECK(fit_linear_probe(projected).train_accuracy <= 0.55);
  // The removed direction is essentially the informative axis.
  CHECK(std::abs(r.projection.removed_directions[0](1)) > 0.95);
  for (Eigen::Index i = 0; i < projected.rows.rows(); ++i) {
    CHECK(std::abs(projected.rows.row(i).dot(
              r.projection.removed_directions[0])) <= 1e-8);
  }
}

TEST_CASE("inlp on synthetic embeddings") {
  const auto data = clusters(7, 500, 10, 3, 2.0);
  const auto r = inlp_fit(data);
  const auto& p = r.projection;
  const auto k = static_cast<Eigen::Index>(p.removed_directions.size());
  CHECK(k >= 1);
  CHECK(max_abs(p.matrix * p.matrix - p.matrix) <= 1e-8);
  CHECK(max_abs(p.matrix - p.matrix.transpose()) == 0.0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(p.matrix);
  lu.setThreshold(1e-8);
  CHECK(lu.rank() == 10 - k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double dot = p.removed_directions[i].dot(p.removed_directions[j]);
      CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) <= 1e-8);
    }
  }
  const double majority = majority_rate(data.labels);
  const double refit =
      fit_linear_probe(apply_projection(p, data)).train_accuracy;
  CHECK(refit <= majority + 0.04);

  // A second run on projected data finds nothing more to remove.
  const auto again = inlp_fit(apply_projection(p, data));
  CHECK(again.projection.removed_directions.empty());
  CHECK(max_abs(again.projection.matrix - Eigen::MatrixXd::Identity(10, 10)) ==
        0.0);
}

TEST_CASE("inlp with random labels removes little") {
  for (uint64_t seed = 11; seed < 16; ++seed) {
    Gaussian g(seed);
    SeededRng rng(seed);
    EmbeddingMatrix data{g.matrix(2000, 3), {}};
    for (int i = 0; i < 2000; ++i) {
      data.labels.push_back(static_cast<int>(rng.uniform_index(2)));
    }
    const auto r = inlp_fit(data);
    CHECK(r.projection.removed_directions.size() <= 1);
  }
}

TEST_CASE("inlp stops when every dimension is gone") {
  auto data = clusters(13, 100, 1, 0, 3.0);
  InlpOptions never;
  never.stop_margin = -1.0;
  LogCapture logs;
  const auto r = inlp_fit(data, never);
  CHECK(r.projection.removed_directions.size() == 1);
  CHECK(logs.contains(LogLevel::kWarning, "every dimension"));
  CHECK_THROWS_AS(inlp_fit(EmbeddingMatrix{data.rows, {}}), InvalidInput);
  InlpOptions zero;
  zero.max_rounds = 0;
  CHECK_THROWS_AS(inlp_fit(data, zero), InvalidInput);
}

TEST_CASE("projection application") {
  Gaussian g(17);
  const EmbeddingMatrix x{g.matrix(20, 4), {}};
  CHECK(apply_projection(Projection::identity(4), x).rows == x.rows);

  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(4);
  e1(0) = 1.0;
  const auto p = Projection::from_directions(4, {e1});
  const auto once = apply_projection(p, x);
  CHECK(once.rows.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(once.rows.rightCols(3) == x.rows.rightCols(3));
  CHECK(max_abs(apply_projection(p, once).rows - once.rows) <= 1e-8);

  Eigen::VectorXd u = g.matrix(4, 1).col(0).normalized();
  const auto pu = Projection::from_directions(4, {u});
  const auto y = apply_projection(pu, x);
  CHECK((y.rows * u).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK_THROWS_AS(apply_projection(Projection::identity(3), x), InvalidInput);
}

TEST_CASE("sent-debias recovers a single differing coordinate") {
  Gaussian g(19);
  const Eigen::MatrixXd a = g.matrix(30, 6);
  Eigen::MatrixXd b = a;
  for (Eigen::Index i = 0; i < 30; ++i) b(i, 2) += 0.5 + g() * g();
  const auto s = sentdebias_fit(a, b);
  REQUIRE(s.size() == 1);
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(6);
  e2(2) = 1.0;
  CHECK(max_abs(s.components.col(0) - e2) <= 1e-12);
  CHECK(s.explained_variance[0] == doctest::Approx(1.0));

  // Duplicating the pair list leaves the subspace unchanged.
  Eigen::MatrixXd a2(60, 6), b2(60, 6);
  a2 << a, a;
  b2 << b, b;
  const auto s2 = sentdebias_fit(a2, b2);
  CHECK(max_abs(s2.components - s.components) <= 1e-12);

  LogCapture logs;
  const auto clamped = sentdebias_fit(a, b, {.k = 0});
  CHECK(clamped.size() == 1);
  CHECK(logs.contains(LogLevel::kWarning, "clamped"));
  CHECK(sentdebias_fit(a, b, {.k = 50}).size() == 6);
  CHECK_THROWS_AS(sentdebias_fit(a, a), InvalidInput);
}

TEST_CASE("sent-debias subspace properties") {
  Gaussian g(23);
  const Eigen::MatrixXd a = g.matrix(40, 8);
  Eigen::MatrixXd b = a + 0.3 * g.matrix(40, 8);
  b.col(0) += Eigen::VectorXd::Constant(40, 2.0);
  b.col(5) -= Eigen::VectorXd::Constant(40, 1.0);
  const auto s = sentdebias_fit(a, b, {.k = 3});
  REQUIRE(s.size() == 3);
  const Eigen::MatrixXd gram = s.components.transpose() * s.components;
  CHECK(max_abs(gram - Eigen::MatrixXd::Identity(3, 3)) <= 1e-8);
  double sum = 0.0;
  for (size_t j = 0; j < s.explained_variance.size(); ++j) {
    sum += s.explained_variance[j];
    if (j) CHECK(s.explained_variance[j] <= s.explained_variance[j - 1]);
  }
  CHECK(sum <= 1.0 + 1e-12);
  for (Eigen::Index j = 0; j < 3; ++j) {
    Eigen::Index at = 0;
    s.components.col(j).cwiseAbs().maxCoeff(&at);
    CHECK(s.components(at, j) > 0);
  }

  const EmbeddingMatrix h{g.matrix(100, 8), {}};
  const auto out = sentdebias_apply(s, h);
  CHECK((out.rows * s.components).cwiseAbs().maxCoeff() <= 1e-8);
  for (Eigen::Index i = 0; i < 100; ++i) {
    CHECK(out.rows.row(i).norm() <= h.rows.row(i).norm() + 1e-12);
  }
  CHECK(max_abs(sentdebias_apply(s, out).rows - out.rows) <= 1e-8);

  const EmbeddingMatrix inside{(s.components * g.matrix(3, 5)).transpose(), {}};
  CHECK(max_abs(sentdebias_apply(s, inside).rows) <= 1e-8);
  // A vector orthogonal to the subspace is unchanged.
  Eigen::VectorXd w = g.matrix(8, 1).col(0);
  w -= s.components * (s.components.transpose() * w);
  const EmbeddingMatrix orth{w.transpose(), {}};
  CHECK(max_abs(sentdebias_apply(s, orth).rows - orth.rows) <= 1e-12);
  CHECK_THROWS_AS(sentdebias_apply(s, EmbeddingMatrix{g.matrix(2, 3), {}}),
                  InvalidInput);
}

TEST_CASE("sent-debias over sentence pairs") {
  NGramScorer embedder(NGramModel::train(testing::corpus_of({"a b"}), 2));
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"he is a doctor", "she is a doctor"},
      {"his car is red", "her car is red"},
      {"same sentence", "same sentence"}};
  LogCapture logs;
  const auto s = sentdebias_fit(pairs, embedder);
  CHECK(s.size() >= 1);
  CHECK(logs.contains(LogLevel::kWarning, "identical"));
  CHECK_THROWS_AS(sentdebias_fit(std::span(pairs).subspan(2), embedder),
                  InvalidInput);
  const std::vector<std::pair<std::string, std::string>> degenerate = {
      {"x", "x"}, {"y", "y"}};
  CHECK_THROWS_AS(sentdebias_fit(degenerate, embedder), InvalidInput);
}

TEST_CASE("embedding files") {
  TempDir dir;
  Gaussian g(29);
  const EmbeddingMatrix m{g.matrix(7, 3), {0, 1, 0, 1, 1, 0, 0}};
  save_embeddings(dir / "m.bin", m);
  const auto back = load_embeddings(dir / "m.bin");
  CHECK(back.rows == m.rows);
  CHECK(back.labels.empty());
  CHECK(std::filesystem::file_size(dir / "m.bin") == 24 + 7 * 3 * 8);
  // Row-major on disk: the second value is row 0, column 1.
  const std::string bytes = testing::read_file(dir / "m.bin");
  double second = 0.0;
  std::memcpy(&second, bytes.data() + 24 + 8, 8);
  CHECK(second == m.rows(0, 1));

  save_embeddings(dir / "m.json", m);
  const auto js = load_embeddings(dir / "m.json");
  CHECK(js.rows == m.rows);
  CHECK(js.labels == m.labels);

  testing::write_file(dir / "short.bin", bytes.substr(0, bytes.size() - 8));
  CHECK_THROWS_AS(load_embeddings(dir / "short.bin"), InvalidInput);
  testing::write_file(dir / "junk.bin", "not an embedding file at all....");
  CHECK_THROWS_AS(load_embeddings(dir / "junk.bin"), InvalidInput);
  testing::write_file(dir / "ragged.json", R"({"rows": [[1, 2], [3]]})");
  CHECK_THROWS_AS(load_embeddings(dir / "ragged.json"), InvalidInput);
  testing::write_file(dir / "labels.json", R"({"rows": [[1], [2]], "labels": [1]})");
  CHECK_THROWS_AS(load_embeddings(dir / "labels.json"), InvalidInput);

  testing::write_file(dir / "pairs.json", R"([["he ran", "she ran"], ["a", "b"]])");
  const auto pairs = load_counterfactual_pairs(dir / "pairs.json");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].second == "she ran");
  testing::write_file(dir / "bad_pairs.json", R"([["only one"]])");
  CHECK_THROWS_AS(load_counterfactual_pairs(dir / "bad_pairs.json"), InvalidInput);
}

}  // namespace
}  // namespace corpusbias
