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


#include "iltm/common.hpp"

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <numeric>
#include <set>

using namespace iltm;

TEST_CASE("derive_seed is a pure function of its arguments") {
  CHECK(derive_seed(1, 2, 3, 4) == derive_seed(1, 2, 3, 4));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("sample_without_replacement draws distinct pool members") {
  std::vector<int> pool(50);
  std::iota(pool.begin(), pool.end(), 100);
  Rng rng(3);
  const auto s = sample_without_replacement(pool, 20, rng);
  REQUIRE(s.size() == 20);
  std::set<int> uniq(s.begin(), s.end());
  CHECK(uniq.size() == 20);
  for (int v : s) CHECK((v >= 100 && v < 150));

  Rng again(3);
  CHECK(sample_without_replacement(pool, 20, again) == s);
  Rng all(9);
  auto full = sample_without_replacement(pool, 50, all);
  std::sort(full.begin(), full.end());
  CHECK(full == pool);
}

TEST_CASE("parallel_for visits each index exactly once") {
  for (int threads : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(97, threads, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("take_rows and take keep the requested order") {
  Mat m(3, 2);
  m << 1, 2, 3, 4, 5, 6;
  const std::vector<int> idx = {2, 0, 2};
  const Mat t = take_rows(m, idx);
  CHECK(t(0, 0) == 5);
  CHECK(t(1, 1) == 2);
  CHECK(t(2, 1) == 6);
  const std::vector<double> v = {10, 20, 30};
  CHECK(take(v, idx) == std::vector<double>{30, 10, 30});
}

TEST_CASE("all_finite rejects NaN and infinity") {
  Mat m = Mat::Zero(2, 2);
  CHECK(all_finite(m));
  m(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_FALSE(all_finite(m));
  m(1, 0) = std::nan("");
  CHECK_FALSE(all_finite(m));
}
