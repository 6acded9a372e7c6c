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


#include "iltm/psi.hpp"

namespace iltm {

std::string_view to_string(PsiTag tag) {
  switch (tag) {
    case PsiTag::kR: return "R";
    case PsiTag::kX: return "X";
    case PsiTag::kC: return "C";
    case PsiTag::kRX: return "RX";
    case PsiTag::kRC: return "RC";
  }
  return "?";
}

PsiTag parse_psi_tag(std::string_view s) {
  for (auto t : {PsiTag::kR, PsiTag::kX, PsiTag::kC, PsiTag::kRX, PsiTag::kRC}) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown preprocessing variant '" + std::string(s) + "' (expected R, X, C, RX or RC)");
}

bool uses_robust(PsiTag tag) { return tag == PsiTag::kR || tag == PsiTag::kRX || tag == PsiTag::kRC; }
bool uses_gbdt(PsiTag tag) { return tag != PsiTag::kR; }

GbdtConfig gbdt_flavor(PsiTag tag) {
  return (tag == PsiTag::kC || tag == PsiTag::kRC) ? GbdtConfig::variant_c() : GbdtConfig::variant_x();
}

PsiVariant fit_psi(PsiTag tag, const Mat& X, std::span<const double> y, int K,
                   std::span<const Column> features, const GbdtConfig& gbdt_config,
                   std::uint64_t seed) {
  if (static_cast<std::size_t>(X.cols()) != features.size()) {
    throw DataError("fit_psi: column count does not match schema");
  }
  PsiVariant v;
  v.tag = tag;
  v.features.assign(features.begin(), features.end());
  if (uses_robust(tag)) v.robust = fit_robust(X, features);
  if (uses_gbdt(tag)) {
    GbdtConfig cfg = gbdt_config;
    cfg.shape = gbdt_flavor(tag).shape;
    v.gbdt = fit_gbdt(gbdt_input(X, features), y, K, cfg, seed);
  }
  return v;
}

SpMat build_psi(const PsiVariant& v, const Mat& X) {
  if (uses_robust(v.tag) && !v.robust) throw DataError("build_psi: robust state missing");
  if (uses_gbdt(v.tag) && !v.gbdt) throw DataError("build_psi: GBDT state missing");
  const Index n = X.rows();
  std::vector<Eigen::Triplet<double>> trip;
  Index offset = 0;
  if (v.robust) {
    const Mat R = apply_robust(*v.robust, X);
    trip.reserve(static_cast<std::size_t>(R.size()));
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < R.cols(); ++c) {
        if (R(r, c) != 0.0) trip.emplace_back(static_cast<int>(r), static_cast<int>(c), R(r, c));
      }
    }
    offset = R.cols();
  }
  if (v.gbdt) {
    const Mat G = gbdt_input(X, v.features);
    for (Index r = 0; r < n; ++r) {
      const double* row = G.row(r).data();
      for (std::size_t t = 0; t < v.gbdt->trees.size(); ++t) {
        trip.emplace_back(static_cast<int>(r),
                          static_cast<int>(offset) + v.gbdt->leaf_offset[t] + v.gbdt->trees[t].leaf_of(row), 1.0);
      }
    }
  }
  SpMat out(n, v.width());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Mat select_columns(const Mat& X, std::span<const int> cols) {
  Mat out(X.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = X.col(cols[j]);
  return out;
}

void PsiVariant::save(Container& c, const std::string& p) const {
  c.meta[p + "tag"] = std::string(to_string(tag));
  Schema s;
  s.columns = features;
  c.meta[p + "features"] = s.serialize();
  if (robust) robust->save(c, p + "robust.");
  if (gbdt) gbdt->save(c, p + "gbdt.");
}

PsiVariant PsiVariant::load(const Container& c, const std::string& p) {
  PsiVariant v;
  v.tag = parse_psi_tag(c.get_meta(p + "tag"));
  v.features = Schema::parse(c.get_meta(p + "features")).columns;
  if (uses_robust(v.tag)) v.robust = RobustScalerState::load(c, p + "robust.");
  if (uses_gbdt(v.tag)) v.gbdt = GbdtModel::load(c, p + "gbdt.");
  return v;
}

}  // namespace iltm
