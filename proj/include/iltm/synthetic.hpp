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


// Seeded synthetic task generators used by tests, the acceptance harness and
// the CLI's demo corpus.
#pragma once

#include "iltm/tabular.hpp"

namespace iltm {

enum class SyntheticKind { kBlobs, kXor, kMoons, kRegression };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kBlobs;
  int n = 500;
  int d = 8;
  int K = 2;              // ignored for XOR/moons (2) and regression (0)
  double noise = 0.1;
  int categorical = 0;    // extra categorical noise columns
  double missing = 0.0;   // fraction of numeric cells blanked
  std::uint64_t seed = 0;
};

/// Builds the task with a 60/20/20 train/val/test split.
TabularTask make_synthetic(const SyntheticSpec& spec, const std::string& name);

/// `count` classification tasks mixing blobs, XOR and moons with
/// d in [4, 64], K in {2, 3, 4} (blobs) and N in [200, 2000].
std::vector<TabularTask> make_classification_suite(int count, std::uint64_t seed,
                                                   const std::string& prefix = "task");
std::vector<TabularTask> make_regression_suite(int count, std::uint64_t seed,
                                               const std::string& prefix = "reg");

}  // namespace iltm
