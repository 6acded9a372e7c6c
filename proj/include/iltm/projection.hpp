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


// Fixed-size tail of the embedding: random ReLU features, PCA reduction and
// per-column standardization, mapping width-m inputs to d_main columns.
#pragma once

#include "iltm/container.hpp"
#include "iltm/gbdt.hpp"

namespace iltm {

inline constexpr int kDefaultRandomFeatures = 32768;
inline constexpr int kDefaultMainWidth = 512;
inline constexpr double kProjectionEps = 1e-6;
/// Components whose fit-batch variance is under this multiple of eps are zeroed.
inline constexpr double kMinComponentVarianceRatio = 1e4;
/// Omega is generated and consumed in column blocks of this width.
inline constexpr int kOmegaBlock = 512;

struct ProjectionParams {
  int m = 0;
  int r = kDefaultRandomFeatures;
  int d_main = kDefaultMainWidth;
  std::uint64_t seed = 0;
  int rank = 0;  // non-degenerate components
  double eps = kProjectionEps;
  RowVec mu_rf;  // r
  Mat U;         // r x d_main
  RowVec col_mean;
  RowVec col_std;

  /// Omega is stored as seed + shape only.
  void save(Container& c, const std::string& prefix) const;
  static ProjectionParams load(const Container& c, const std::string& prefix);
};

/// Entries N(0, 2/r), bit-deterministic in (m, r, seed). Each row and
/// column block has its own stream, so blocks can be built independently.
Mat sample_omega(int m, int r, std::uint64_t seed);
/// Columns [block * kOmegaBlock, ...) of sample_omega(m, r, seed).
Mat omega_block(int m, int r, std::uint64_t seed, int block);

ProjectionParams fit_projection(const SpMat& psi_fit, int r, int d_main, std::uint64_t seed);
Mat apply_projection(const ProjectionParams& params, const SpMat& psi);

}  // namespace iltm
