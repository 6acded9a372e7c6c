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

#include <cmath>
#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>

namespace iltm {
namespace {

// Random column order so the informative pair is not always first.
std::vector<int> random_permutation(int d, Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(d));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace

TabularTask make_synthetic(const SyntheticSpec& spec, const std::string& name) {
  if (spec.n < 2 || spec.d < 2) throw ConfigError("synthetic task needs n >= 2 and d >= 2");
  Rng rng(spec.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = spec.n;
  const int d = spec.d;
  Mat X(n, d + spec.categorical);
  std::vector<double> y(static_cast<std::size_t>(n));
  int K = spec.K;

  switch (spec.kind) {
    case SyntheticKind::kBlobs: {
      if (K < 2) throw ConfigError("blobs need K >= 2");
      Mat centers(K, d);
      const double spread = 2.5 / std::sqrt(static_cast<double>(std::min(d, 8)));
      for (Index i = 0; i < centers.size(); ++i) centers.data()[i] = normal(rng) * spread;
      for (int i = 0; i < n; ++i) {
        const int k = static_cast<int>(unif(rng) * K) % K;
        y[static_cast<std::size_t>(i)] = k + 1;
        for (int j = 0; j < d; ++j) X(i, j) = centers(k, j) + normal(rng) * (0.6 + spec.noise);
      }
      break;
    }
    case SyntheticKind::kXor:
    case SyntheticKind::kMoons: {
      K = 2;
      const auto perm = random_permutation(d, rng);
      for (int i = 0; i < n; ++i) {
        RowVec z = RowVec::Zero(d);
        int label = 0;
        if (spec.kind == SyntheticKind::kXor) {
          z(0) = unif(rng) * 2.0 - 1.0;
          z(1) = unif(rng) * 2.0 - 1.0;
          label = (z(0) > 0) == (z(1) > 0) ? 0 : 1;
          z(0) += normal(rng) * spec.noise * 0.5;
          z(1) += normal(rng) * spec.noise * 0.5;
        } else {
          label = unif(rng) < 0.5 ? 0 : 1;
          const double t = unif(rng) * std::numbers::pi;
          z(0) = label == 0 ? std::cos(t) : 1.0 - std::cos(t);
          z(1) = label == 0 ? std::sin(t) : 0.5 - std::sin(t);
          z(0) += normal(rng) * spec.noise;
          z(1) += normal(rng) * spec.noise;
        }
        for (int j = 2; j < d; ++j) z(j) = normal(rng) * 0.5;
        y[static_cast<std::size_t>(i)] = label + 1;
        for (int j = 0; j < d; ++j) X(i, perm[static_cast<std::size_t>(j)]) = z(j);
      }
      break;
    }
    case SyntheticKind::kRegression: {
      K = 0;
      Vec w(d);
      for (int j = 0; j < d; ++j) w(j) = normal(rng) / std::sqrt(static_cast<double>(d));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) = normal(rng);
        const double lin = X.row(i).head(d).dot(w);
        const double nonlin = 0.5 * std::sin(2.0 * X(i, 0)) + 0.3 * X(i, 1) * X(i, std::min(2, d - 1));
        y[static_cast<std::size_t>(i)] = 3.0 * (lin + nonlin) + 10.0 + normal(rng) * spec.noise;
      }
      break;
    }
  }

  for (int c = 0; c < spec.categorical; ++c) {
    for (int i = 0; i < n; ++i) X(i, d + c) = static_cast<double>(static_cast<int>(unif(rng) * 3) % 3);
  }
  if (spec.missing > 0) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) {
        if (unif(rng) < spec.missing) X(i, j) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }

  TabularTask task;
  task.name = name;
  for (int j = 0; j < d; ++j) task.schema.columns.push_back({"x" + std::to_string(j), ColumnKind::kNumeric, {}});
  for (int c = 0; c < spec.categorical; ++c) {
    task.schema.columns.push_back({"c" + std::to_string(c), ColumnKind::kCategorical, {"a", "b", "c"}});
  }
  Column target{"y", K == 0 ? ColumnKind::kRegressionTarget : ColumnKind::kClassTarget, {}};
  for (int k = 1; k <= K; ++k) target.vocabulary.push_back(std::to_string(k));
  task.schema.columns.push_back(target);
  task.X = std::move(X);
  task.y = std::move(y);
  task.K = K;
  task.splits = make_random_splits(n, 0.6, 0.2, derive_seed(spec.seed, 0x5e1));
  task.validate();
  return task;
}

std::vector<TabularTask> make_classification_suite(int count, std::uint64_t seed, const std::string& prefix) {
  std::vector<TabularTask> out;
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, 0xc1a5, static_cast<std::uint64_t>(i)));
    std::uniform_int_distribution<int> dist_d(4, 64);
    std::uniform_int_distribution<int> dist_n(200, 2000);
    std::uniform_int_distribution<int> dist_k(2, 4);
    SyntheticSpec s;
    s.kind = static_cast<SyntheticKind>(i % 3);
    s.d = dist_d(rng);
    s.n = dist_n(rng);
    s.K = s.kind == SyntheticKind::kBlobs ? dist_k(rng) : 2;
    s.noise = s.kind == SyntheticKind::kMoons ? 0.15 : 0.1;
    s.seed = rng();
    out.push_back(make_synthetic(s, prefix + std::to_string(i)));
  }
  return out;
}

std::vector<TabularTask> make_regression_suite(int count, std::uint64_t seed, const std::string& prefix) {
  std::vector<TabularTask> out;
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, 0x4e9, static_cast<std::uint64_t>(i)));
    SyntheticSpec s;
    s.kind = SyntheticKind::kRegression;
    s.d = std::uniform_int_distribution<int>(4, 32)(rng);
    s.n = std::uniform_int_distribution<int>(300, 1200)(rng);
    s.noise = 0.3;
    s.seed = rng();
    out.push_back(make_synthetic(s, prefix + std::to_string(i)));
  }
  return out;
}

}  // namespace iltm
