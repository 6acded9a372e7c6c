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

#include <algorithm>
#include <cmath>

namespace iltm {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RobustScalerState fit_robust(const Mat& X, std::span<const Column> features, double clip) {
  if (static_cast<std::size_t>(X.cols()) != features.size()) {
    throw DataError("fit_robust: column count does not match schema");
  }
  RobustScalerState st;
  st.clip = clip;
  std::vector<double> values;
  for (std::size_t c = 0; c < features.size(); ++c) {
    const auto kind = features[c].kind;
    st.kinds.push_back(kind);
    if (kind == ColumnKind::kCategorical) {
      const int size = static_cast<int>(features[c].vocabulary.size());
      st.categorical.push_back({static_cast<int>(c), size});
      st.width += size;
      continue;
    }
    values.clear();
    for (Index r = 0; r < X.rows(); ++r) {
      const double v = X(r, static_cast<Index>(c));
      if (!std::isnan(v)) values.push_back(v);
    }
    RobustScalerState::Numeric num{static_cast<int>(c), 0.0, 1.0};
    if (!values.empty()) {
      std::sort(values.begin(), values.end());
      num.median = quantile_sorted(values, 0.5);
      double scale = quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25);
      if (!(scale > 0.0)) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        scale = std::sqrt(var / static_cast<double>(values.size()));
      }
      num.scale = scale > 0.0 ? scale : 1.0;
    }
    st.numeric.push_back(num);
    st.width += 1;
  }
  return st;
}

Mat apply_robust(const RobustScalerState& st, const Mat& X) {
  if (static_cast<std::size_t>(X.cols()) != st.kinds.size()) {
    throw DataError("apply_robust: expected " + std::to_string(st.kinds.size()) + " columns, got " +
                    std::to_string(X.cols()));
  }
  Mat out = Mat::Zero(X.rows(), st.width);
  std::size_t ni = 0;
  std::size_t ci = 0;
  Index offset = 0;
  for (std::size_t c = 0; c < st.kinds.size(); ++c) {
    if (st.kinds[c] == ColumnKind::kCategorical) {
      const int size = st.categorical[ci++].size;
      for (Index r = 0; r < X.rows(); ++r) {
        const double code = X(r, static_cast<Index>(c));
        // Missing and unknown categories both yield an all-zero segment.
        if (code >= 0 && code < size) out(r, offset + static_cast<Index>(code)) = 1.0;
      }
      offset += size;
      continue;
    }
    const auto& num = st.numeric[ni++];
    for (Index r = 0; r < X.rows(); ++r) {
      double v = X(r, static_cast<Index>(c));
      if (std::isnan(v)) v = 0.0;
      out(r, offset) = smooth_clip((v - num.median) / num.scale, st.clip);
    }
    offset += 1;
  }
  return out;
}

void RobustScalerState::save(Container& c, const std::string& prefix) const {
  std::vector<int> kind_codes;
  for (auto k : kinds) kind_codes.push_back(static_cast<int>(k));
  c.put_ints(prefix + "kinds", kind_codes);
  std::vector<double> med, sc;
  std::vector<int> ncol, ccol, csize;
  for (const auto& n : numeric) {
    ncol.push_back(n.column);
    med.push_back(n.median);
    sc.push_back(n.scale);
  }
  for (const auto& cat : categorical) {
    ccol.push_back(cat.column);
    csize.push_back(cat.size);
  }
  c.put_ints(prefix + "numeric_col", ncol);
  c.put(prefix + "median", med);
  c.put(prefix + "scale", sc);
  c.put_ints(prefix + "cat_col", ccol);
  c.put_ints(prefix + "cat_size", csize);
  c.put_scalar(prefix + "clip", clip);
  c.put_scalar(prefix + "width", width);
}

RobustScalerState RobustScalerState::load(const Container& c, const std::string& prefix) {
  RobustScalerState st;
  for (int k : c.get_ints(prefix + "kinds")) st.kinds.push_back(static_cast<ColumnKind>(k));
  const auto ncol = c.get_ints(prefix + "numeric_col");
  const auto med = c.get_vec(prefix + "median");
  const auto sc = c.get_vec(prefix + "scale");
  for (std::size_t i = 0; i < ncol.size(); ++i) st.numeric.push_back({ncol[i], med[i], sc[i]});
  const auto ccol = c.get_ints(prefix + "cat_col");
  const auto csize = c.get_ints(prefix + "cat_size");
  for (std::size_t i = 0; i < ccol.size(); ++i) st.categorical.push_back({ccol[i], csize[i]});
  st.clip = c.get_scalar(prefix + "clip");
  st.width = static_cast<int>(c.get_scalar(prefix + "width"));
  return st;
}

}  // namespace iltm
