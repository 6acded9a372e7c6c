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


#include "iltm/synthetic.hpp"

#include <doctest.h>

#include <set>

using namespace iltm;

TEST_CASE("synthetic tasks are seeded and split 60/20/20") {
  SyntheticSpec s;
  s.n = 500;
  s.seed = 3;
  const auto a = make_synthetic(s, "a");
  const auto b = make_synthetic(s, "a");
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  CHECK(a.split("train").size() == 300);
  CHECK(a.split("val").size() == 100);
  CHECK(a.split("test").size() == 100);
  CHECK_NOTHROW(a.validate());
}

TEST_CASE("classification suite honours its ranges") {
  const auto suite = make_classification_suite(12, 7);
  REQUIRE(suite.size() == 12);
  std::set<std::string> names;
  for (const auto& t : suite) {
    names.insert(t.name);
    CHECK(t.n_features() >= 4);
    CHECK(t.n_features() <= 64);
    CHECK(t.n_rows() >= 200);
    CHECK(t.n_rows() <= 2000);
    CHECK(t.K >= 2);
    CHECK(t.K <= 4);
    std::set<double> classes(t.y.begin(), t.y.end());
    CHECK(static_cast<int>(classes.size()) == t.K);
  }
  CHECK(names.size() == 12);
}

TEST_CASE("regression suite has real targets") {
  const auto suite = make_regression_suite(3, 1);
  for (const auto& t : suite) {
    CHECK(t.K == 0);
    CHECK(t.kind() == TaskKind::kRegression);
    std::set<double> values(t.y.begin(), t.y.end());
    CHECK(values.size() > 50);
  }
}

TEST_CASE("XOR and moons are binary") {
  for (auto kind : {SyntheticKind::kXor, SyntheticKind::kMoons}) {
    SyntheticSpec s;
    s.kind = kind;
    s.K = 4;
    s.d = 6;
    const auto t = make_synthetic(s, "t");
    CHECK(t.K == 2);
    CHECK(t.n_features() == 6);
  }
}
