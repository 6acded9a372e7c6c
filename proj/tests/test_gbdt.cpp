/*
 * Copyright 2026 The iltm Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "iltm/gbdt.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>

using namespace iltm;

namespace {

Tree stump(int feature, double threshold, bool missing_left) {
  Tree t;
  t.feature = {feature, -1, -1};
  t.threshold = {threshold, 0, 0};
  t.missing_left = {static_cast<std::uint8_t>(missing_left), 0, 0};
  t.left = {1, -1, -1};
  t.right = {2, -1, -1};
  t.value = {0, -1, 1};
  t.finalize();
  return t;
}

// Root splits feature 1 at 0.3 into a leaf and a stump on feature 0.
Tree three_leaves() {
  Tree t;
  t.feature = {1, -1, 0, -1, -1};
  t.threshold = {0.3, 0, 0.5, 0, 0};
  t.missing_left = {0, 0, 0, 0, 0};
  t.left = {1, -1, 3, -1, -1};
  t.right = {2, -1, 4, -1, -1};
  t.value = {0, 0, 0, 0, 0};
  t.finalize();
  return t;
}

GbdtModel hand_model() {
  GbdtModel m;
  m.n_features = 2;
  m.trees = {stump(0, 0.5, true), three_leaves()};
  m.leaf_offset = {0, 2};
  m.total_leaves = 5;
  return m;
}

}  // namespace

TEST_CASE("single split routing") {
  const Tree t = stump(0, 0.5, true);
  const double a[] = {0.2}, b[] = {0.9}, nan[] = {std::numeric_limits<double>::quiet_NaN()};
  CHECK(t.leaf_of(a) == 0);
  CHECK(t.leaf_of(b) == 1);
  CHECK(t.leaf_of(nan) == 0);
  const Tree leaf = Tree::single_leaf(0.3);
  CHECK(leaf.n_leaves == 1);
  CHECK(leaf.leaf_of(b) == 0);
}

TEST_CASE("leaf embedding concatenates per-tree one-hots") {
  const GbdtModel m = hand_model();
  Mat X(1, 2);
  X << 0.9, 0.1;
  CHECK(leaf_indices(m, X.row(0).data()) == std::vector<int>{1, 0});
  const Mat E = Mat(embed(m, X));
  CHECK(E.row(0) == (RowVec(5) << 0, 1, 1, 0, 0).finished());
}

TEST_CASE("embedding row sums equal tree count and column sums equal occupancy") {
  const GbdtModel m = hand_model();
  Rng rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  Mat X(64, 2);
  for (Index i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
  const Mat E = Mat(embed(m, X));
  std::vector<double> occupancy(5, 0.0);
  for (Index r = 0; r < X.rows(); ++r) {
    CHECK(E.row(r).sum() == 2.0);
    const auto leaves = leaf_indices(m, X.row(r).data());
    for (std::size_t t = 0; t < leaves.size(); ++t) {
      occupancy[static_cast<std::size_t>(m.leaf_offset[t] + leaves[t])] += 1.0;
    }
  }
  for (Index c = 0; c < 5; ++c) CHECK(E.col(c).sum() == occupancy[static_cast<std::size_t>(c)]);
}

TEST_CASE("dynamic fit split sizes") {
  auto s = dynamic_fit_split(1500, 1);
  CHECK(s.gbdt_fit.size() == 1500);
  CHECK(s.hypernet_pool.size() == 1500);
  s = dynamic_fit_split(50000, 1);
  CHECK(s.gbdt_fit.size() == 25000);
  CHECK(s.hypernet_pool.size() == 25000);
  s = dynamic_fit_split(300000, 1);
  CHECK(s.gbdt_fit.size() == 100000);
}

TEST_CASE("XOR corners are fitted exactly with depth-2 trees") {
  const double corners[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const double labels[4] = {1, 2, 2, 1};
  Mat X(100, 2);
  std::vector<double> y(100);
  for (int i = 0; i < 100; ++i) {
    X(i, 0) = corners[i % 4][0];
    X(i, 1) = corners[i % 4][1];
    y[static_cast<std::size_t>(i)] = labels[i % 4];
  }
  GbdtConfig cfg;
  cfg.depth = 2;
  cfg.max_rounds = 30;
  cfg.learning_rate = 0.3;
  const GbdtModel m = fit_gbdt(X, y, 2, cfg, 3);
  // Brute force over the four points.
  Mat P(4, 2);
  for (int i = 0; i < 4; ++i) P.row(i) << corners[i][0], corners[i][1];
  const Mat raw = m.predict_raw(P);
  int correct = 0;
  for (int i = 0; i < 4; ++i) {
    REQUIRE(raw.cols() == 1);
    const int pred = raw(i, 0) > 0.0 ? 2 : 1;
    correct += pred == static_cast<int>(labels[i]);
  }
  CHECK(correct == 4);
}

TEST_CASE("labels outside 1..K are rejected") {
  Mat X = Mat::Zero(4, 1);
  const std::vector<double> y = {1, 2, 3, 0};
  CHECK_THROWS_AS(fit_gbdt(X, y, 3, GbdtConfig{}, 1), DataError);
}

TEST_CASE("single-class target yields single-leaf trees and an all-ones embedding") {
  Mat X(30, 3);
  Rng rng(2);
  std::normal_distribution<double> n;
  for (Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
  const std::vector<double> y(30, 1.0);
  const GbdtModel m = fit_gbdt(X, y, 2, GbdtConfig{}, 1);
  REQUIRE(m.n_trees() > 0);
  for (const auto& t : m.trees) CHECK(t.n_leaves == 1);
  const Mat E = Mat(embed(m, X));
  CHECK(E.cols() == m.n_trees());
  CHECK(E.isOnes());
}

TEST_CASE("defaults are recorded with the fitted model") {
  Mat X(40, 1);
  std::vector<double> y(40);
  for (int i = 0; i < 40; ++i) {
    X(i, 0) = i;
    y[static_cast<std::size_t>(i)] = 0.5 * i;
  }
  const GbdtModel m = fit_gbdt(X, y, 0, GbdtConfig{}, 1);
  CHECK(m.config.max_rounds == 100);
  CHECK(m.config.patience == 50);
  CHECK(m.rounds <= 100);
}

TEST_CASE("regression boosting reduces the training error") {
  Mat X(200, 2);
  std::vector<double> y(200);
  Rng rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    X(i, 0) = u(rng);
    X(i, 1) = u(rng);
    y[static_cast<std::size_t>(i)] = X(i, 0) > 0 ? 3.0 : -1.0;
  }
  GbdtConfig cfg;
  cfg.max_rounds = 50;
  cfg.patience = 50;
  const GbdtModel m = fit_gbdt(X, y, 0, cfg, 5);
  const Mat p = m.predict_raw(X);
  double err = 0.0, base = 0.0;
  for (int i = 0; i < 200; ++i) {
    err += std::pow(p(i, 0) - y[static_cast<std::size_t>(i)], 2);
    base += std::pow(1.0 - y[static_cast<std::size_t>(i)], 2);
  }
  CHECK(err < 0.05 * base);
}

TEST_CASE("oblivious trees share one split per level") {
  Mat X(300, 3);
  std::vector<double> y(300);
  Rng rng(12);
  std::normal_distribution<double> n;
  for (int i = 0; i < 300; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = n(rng);
    y[static_cast<std::size_t>(i)] = X(i, 0) + X(i, 1) > 0 ? 2.0 : 1.0;
  }
  const GbdtModel m = fit_gbdt(X, y, 2, GbdtConfig::variant_c(), 4);
  for (const auto& t : m.trees) {
    // Level-order check: every internal node at a given depth uses the same feature and threshold.
    std::vector<std::pair<int, int>> frontier = {{0, 0}};
    std::map<int, std::pair<int, double>> level_split;
    while (!frontier.empty()) {
      auto [node, depth] = frontier.back();
      frontier.pop_back();
      const auto u = static_cast<std::size_t>(node);
      if (t.feature[u] < 0) continue;
      auto it = level_split.find(depth);
      if (it == level_split.end()) {
        level_split[depth] = {t.feature[u], t.threshold[u]};
      } else {
        CHECK(it->second.first == t.feature[u]);
        CHECK(it->second.second == t.threshold[u]);
      }
      frontier.push_back({t.left[u], depth + 1});
      frontier.push_back({t.right[u], depth + 1});
    }
    CHECK(t.n_leaves <= 16);
  }
}

TEST_CASE("model container round trip preserves predictions and leaves") {
  Mat X(120, 2);
  std::vector<double> y(120);
  Rng rng(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 120; ++i) {
    X(i, 0) = n(rng);
    X(i, 1) = i % 5 == 0 ? std::numeric_limits<double>::quiet_NaN() : n(rng);
    y[static_cast<std::size_t>(i)] = 1.0 + (i % 3);
  }
  GbdtConfig cfg;
  cfg.max_rounds = 10;
  const GbdtModel m = fit_gbdt(X, y, 3, cfg, 2);
  Container c;
  m.save(c, "g.");
  const GbdtModel back = GbdtModel::load(Container::deserialize(c.serialize()), "g.");
  CHECK(back.predict_raw(X) == m.predict_raw(X));
  CHECK(Mat(embed(back, X)) == Mat(embed(m, X)));
}
