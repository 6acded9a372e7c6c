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


#include "iltm/tabular.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace iltm;

namespace {

Schema abc_schema() { return Schema::parse("a,numeric\nb,categorical,p,q\ny,class_target\n"); }

// Pair-counting AUC: P(score_pos > score_neg) + 0.5 P(tie).
double auc_oracle(const std::vector<double>& s, const std::vector<int>& pos) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!pos[i] || pos[j]) continue;
      den += 1.0;
      num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return num / den;
}

}  // namespace

TEST_CASE("parse a small CSV with numeric, categorical and class columns") {
  const auto t = parse_task_csv("a,b,y\n1,p,1\n2,q,2\n", abc_schema(), "tiny");
  CHECK(t.n_rows() == 2);
  CHECK(t.n_features() == 2);
  CHECK(t.K == 2);
  CHECK(t.X(1, 0) == 2.0);
  CHECK(t.X(1, 1) == 1.0);
  CHECK(t.y == std::vector<double>{1, 2});
}

TEST_CASE("empty numeric cells are missing and unknown categories get the reserved code") {
  const auto t = parse_task_csv("a,b,y\n,p,1\n2,zz,2\n", abc_schema(), "tiny");
  CHECK(std::isnan(t.X(0, 0)));
  CHECK(t.X(1, 1) == kUnknownCategory);
}

TEST_CASE("ingestion errors are data errors") {
  CHECK_THROWS_AS(parse_task_csv("a,b\n1,p\n", abc_schema(), "t"), DataError);
  CHECK_THROWS_AS(parse_task_csv("a,b,y\n", abc_schema(), "t"), DataError);
  CHECK_THROWS_AS(parse_task_csv("a,a,y\n1,2,1\n", abc_schema(), "t"), DataError);
}

TEST_CASE("quoted CSV fields round-trip") {
  const auto rows = parse_csv("x,\"a,b\",\"he said \"\"hi\"\"\"\r\n1,2,3\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][1] == "a,b");
  CHECK(rows[0][2] == "he said \"hi\"");
  CHECK(csv_escape("a,b") == "\"a,b\"");
}

TEST_CASE("save and load reproduce the task") {
  const auto dir = iltm_test::scratch_dir("tabular");
  auto t = parse_task_csv("a,b,y\n1.5,p,1\n,q,2\n3,p,2\n", abc_schema(), "roundtrip");
  t.splits = {{"train", {0, 2}}, {"test", {1}}};
  save_task(t, dir);
  const auto u = load_task(dir / "roundtrip.csv");
  CHECK(u.name == "roundtrip");
  CHECK(u.n_rows() == 3);
  CHECK(std::isnan(u.X(1, 0)));
  CHECK(u.X(0, 0) == 1.5);
  CHECK(u.split("test") == std::vector<int>{1});
  CHECK(serialize_task_csv(u) == serialize_task_csv(t));
  std::filesystem::remove_all(dir);
}

TEST_CASE("one_hot_labels") {
  const std::vector<double> y = {1, 3, 2};
  const Mat Y = one_hot_labels(y, 3);
  Mat expect(3, 3);
  expect << 1, 0, 0, 0, 0, 1, 0, 1, 0;
  CHECK(Y == expect);
  const std::vector<double> one = {1};
  CHECK(one_hot_labels(one, 1) == Mat::Ones(1, 1));
  for (Index r = 0; r < Y.rows(); ++r) CHECK(Y.row(r).sum() == 1.0);
}

TEST_CASE("binary AUC examples") {
  const std::vector<double> s = {0.9, 0.8, 0.2, 0.1};
  const std::vector<int> pos = {1, 1, 0, 0};
  const std::vector<int> neg = {0, 0, 1, 1};
  CHECK(auc_binary(s, pos) == 1.0);
  CHECK(auc_binary(s, neg) == 0.0);
  const std::vector<double> tie = {0.5, 0.5};
  const std::vector<int> pn = {1, 0};
  CHECK(auc_binary(tie, pn) == 0.5);
}

TEST_CASE("AUC matches pair counting with ties") {
  Rng rng(11);
  std::uniform_int_distribution<int> coarse(0, 4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(40);
    std::vector<int> pos(40);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = coarse(rng);
      pos[i] = static_cast<int>(i % 3 == 0);
    }
    CHECK(auc_binary(s, pos) == doctest::Approx(auc_oracle(s, pos)).epsilon(1e-12));
  }
}

TEST_CASE("rmse examples") {
  const std::vector<double> y = {3, 4};
  const std::vector<double> zero = {0, 0};
  CHECK(rmse(y, y) == 0.0);
  CHECK(rmse(zero, y) == doctest::Approx(5.0 / std::sqrt(2.0)).epsilon(1e-12));
  const std::vector<double> pred = {1, 7};
  const std::vector<double> scaled = {3 - 3 * 2.0, 4 + 3 * 3.0};
  CHECK(rmse(scaled, y) == doctest::Approx(3.0 * rmse(pred, y)).epsilon(1e-12));
}

TEST_CASE("mean_rank averages ties") {
  Mat a(2, 1);
  a << 1, 0;
  CHECK(mean_rank(a, true) == std::vector<double>{1.0, 2.0});
  Mat b(2, 2);
  b << 1, 1, 0, 0;
  CHECK(mean_rank(b.transpose(), true) == std::vector<double>{1.5, 1.5});
  Mat table(3, 1);
  table << 0.859, 0.866, 0.855;
  CHECK(mean_rank(table, true) == std::vector<double>{2.0, 1.0, 3.0});
}

TEST_CASE("format_double is the shortest round-trip text") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  const double v = 1.0 / 3.0;
  CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("random splits partition the rows") {
  const auto s = make_random_splits(100, 0.6, 0.2, 5);
  std::vector<int> all;
  for (const auto& [k, v] : s) all.insert(all.end(), v.begin(), v.end());
  std::sort(all.begin(), all.end());
  REQUIRE(all.size() == 100);
  for (int i = 0; i < 100; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
  CHECK(s.at("train").size() == 60);
}

TEST_CASE("collection roles must be disjoint by task name") {
  auto t = std::make_shared<const TabularTask>(parse_task_csv("a,b,y\n1,p,1\n2,q,2\n", abc_schema(), "x"));
  MetaCollection a{CollectionRole::kMetaTrain, {t}};
  MetaCollection b{CollectionRole::kMetaTest, {t}};
  std::vector<MetaCollection> both = {a, b};
  CHECK_THROWS_AS(check_disjoint_roles(both), DataError);
  std::vector<MetaCollection> one = {a};
  CHECK_NOTHROW(check_disjoint_roles(one));
}
