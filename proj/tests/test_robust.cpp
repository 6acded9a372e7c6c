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


#include "iltm/robust.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace iltm;

namespace {

std::vector<Column> numeric_cols(int n) { return std::vector<Column>(static_cast<std::size_t>(n), Column{"x", ColumnKind::kNumeric, {}}); }

}  // namespace

TEST_CASE("median and IQR with linear interpolation on [1,2,3,100]") {
  const std::vector<double> v = {1, 2, 3, 100};
  // Position q(n-1): 1.5 -> 2.5, 0.75 -> 1.75, 2.25 -> 3 + 0.25 * 97.
  CHECK(quantile_sorted(v, 0.5) == 2.5);
  CHECK(quantile_sorted(v, 0.25) == 1.75);
  CHECK(quantile_sorted(v, 0.75) == 27.25);

  Mat X(4, 1);
  X << 1, 2, 3, 100;
  const auto st = fit_robust(X, numeric_cols(1));
  CHECK(st.numeric[0].median == 2.5);
  CHECK(st.numeric[0].scale == 25.5);
  Mat at_median(1, 1);
  at_median << 2.5;
  CHECK(apply_robust(st, at_median)(0, 0) == 0.0);
}

TEST_CASE("constant and all-missing columns fall back to unit scale") {
  Mat X(3, 2);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  X << 5, nan, 5, nan, 5, nan;
  const auto st = fit_robust(X, numeric_cols(2));
  CHECK(st.numeric[0].median == 5.0);
  CHECK(st.numeric[0].scale == 1.0);
  CHECK(st.numeric[1].median == 0.0);
  CHECK(st.numeric[1].scale == 1.0);
  const Mat out = apply_robust(st, X);
  for (Index r = 0; r < 3; ++r) CHECK(out(r, 0) == 0.0);
}

TEST_CASE("smooth clip is bounded, odd and saturates") {
  const double B = 3.0;
  for (double z : {-1e6, -10.0, -1.0, 0.0, 0.5, 7.0, 1e9}) {
    CHECK(std::abs(smooth_clip(z, B)) <= B);
    if (std::abs(z) <= 10.0) CHECK(std::abs(smooth_clip(z, B)) < B);
    CHECK(smooth_clip(-z, B) == -smooth_clip(z, B));
  }
  CHECK(smooth_clip(1e12, B) == doctest::Approx(B).epsilon(1e-9));
  CHECK(smooth_clip(0.0, B) == 0.0);
}

TEST_CASE("categorical columns become one-hot segments") {
  std::vector<Column> cols = {{"c", ColumnKind::kCategorical, {"a", "b", "c", "d"}}};
  Mat X(3, 1);
  X << 2, std::numeric_limits<double>::quiet_NaN(), kUnknownCategory;
  const auto st = fit_robust(X, cols);
  CHECK(st.width == 4);
  const Mat out = apply_robust(st, X);
  CHECK(out.row(0) == (RowVec(4) << 0, 0, 1, 0).finished());
  CHECK(out.row(1).isZero());
  CHECK(out.row(2).isZero());
}

TEST_CASE("state survives the container") {
  std::vector<Column> cols = {{"x", ColumnKind::kNumeric, {}}, {"c", ColumnKind::kCategorical, {"a", "b"}}};
  Mat X(3, 2);
  X << 1, 0, 4, 1, 9, 0;
  const auto st = fit_robust(X, cols);
  Container c;
  st.save(c, "r.");
  const auto back = RobustScalerState::load(Container::deserialize(c.serialize()), "r.");
  CHECK(apply_robust(back, X) == apply_robust(st, X));
}

TEST_CASE("column mismatch is a data error") {
  Mat X = Mat::Zero(2, 2);
  CHECK_THROWS_AS(fit_robust(X, numeric_cols(3)), DataError);
}
