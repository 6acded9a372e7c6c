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

// Robust preprocessing: one-hot categoricals, zero imputation, median/IQR
// scaling and smooth clipping.
#pragma once

#include <cmath>

#include "iltm/common.hpp"
#include "iltm/container.hpp"
#include "iltm/tabular.hpp"

namespace iltm {

inline constexpr double kDefaultClip = 3.0;

struct RobustScalerState {
  struct Numeric {
    int column = 0;
    double median = 0.0;
    double scale = 1.0;
  };
  struct Categorical {
    int column = 0;
    int size = 0;  // vocabulary size
  };
  // Per input column, in input order: index into numeric or categorical.
  std::vector<ColumnKind> kinds;
  std::vector<Numeric> numeric;
  std::vector<Categorical> categorical;
  double clip = kDefaultClip;
  int width = 0;

  void save(Container& c, const std::string& prefix) const;
  static RobustScalerState load(const Container& c, const std::string& prefix);
};

/// s(z) = z / sqrt(1 + (z/B)^2): odd, strictly increasing, |s| < B.
inline double smooth_clip(double z, double bound) {
  const double r = z / bound;
  return z / std::sqrt(1.0 + r * r);
}

/// Linear-interpolation quantile of sorted data (q in [0, 1]).
double quantile_sorted(std::span<const double> sorted, double q);

RobustScalerState fit_robust(const Mat& X, std::span<const Column> features,
                             double clip = kDefaultClip);
Mat apply_robust(const RobustScalerState& state, const Mat& X);

}  // namespace iltm
