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

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace iltm {

// Row-major throughout so that flat parameter vectors reshape without copies.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using Index = Eigen::Index;

using Rng = std::mt19937_64;

inline constexpr int kVersionMajor = 1;
inline constexpr int kVersionMinor = 0;
std::string version_string();

// Error categories map onto distinct CLI exit codes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// SplitMix64 finalizer; used to derive independent stream seeds from
// (base seed, tags) without depending on scheduling order.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  return mix_seed(mix_seed(mix_seed(mix_seed(base) ^ a) ^ b) ^ c);
}

/// k distinct indices drawn uniformly from `pool` (partial Fisher-Yates).
std::vector<int> sample_without_replacement(std::span<const int> pool, std::size_t k, Rng& rng);

/// Rows of `m` selected by `rows`, in order.
Mat take_rows(const Mat& m, std::span<const int> rows);
std::vector<double> take(std::span<const double> v, std::span<const int> idx);

/// Worker count from ILTM_THREADS (default: hardware concurrency, min 1).
int worker_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// processed exactly once; callers write results into pre-sized slots so the
/// outcome never depends on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

bool all_finite(const Mat& m);

}  // namespace iltm
