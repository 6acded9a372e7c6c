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


// Initial transformation psi(x) for the five embedding variants:
// R (robust only), X / C (GBDT leaves only) and RX / RC (both, robust first).
#pragma once

#include <optional>

#include "iltm/gbdt.hpp"
#include "iltm/robust.hpp"

namespace iltm {

enum class PsiTag { kR, kX, kC, kRX, kRC };

std::string_view to_string(PsiTag tag);
PsiTag parse_psi_tag(std::string_view s);
bool uses_robust(PsiTag tag);
bool uses_gbdt(PsiTag tag);
/// GBDT flavor implied by the tag (X or C); depthwise for R.
GbdtConfig gbdt_flavor(PsiTag tag);

struct PsiVariant {
  PsiTag tag = PsiTag::kRX;
  std::vector<Column> features;
  std::optional<RobustScalerState> robust;
  std::optional<GbdtModel> gbdt;

  int robust_width() const { return robust ? robust->width : 0; }
  int gbdt_width() const { return gbdt ? gbdt->total_leaves : 0; }
  int width() const { return robust_width() + gbdt_width(); }

  void save(Container& c, const std::string& prefix) const;
  static PsiVariant load(const Container& c, const std::string& prefix);
};

/// Fits the constituent states required by `tag` on the given rows.
/// `gbdt_config` overrides the tag's flavor except for the tree shape.
PsiVariant fit_psi(PsiTag tag, const Mat& X, std::span<const double> y, int K,
                   std::span<const Column> features, const GbdtConfig& gbdt_config,
                   std::uint64_t seed);

/// N x m sparse matrix [robust || leaf one-hot].
SpMat build_psi(const PsiVariant& variant, const Mat& X);

/// Column subset of a task-level feature matrix and its schema.
Mat select_columns(const Mat& X, std::span<const int> cols);

}  // namespace iltm
