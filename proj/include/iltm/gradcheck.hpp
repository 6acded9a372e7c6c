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


// Finite-difference verification suite for the operator set and the full
// hypernetwork -> generated network -> retrieval -> cross-entropy pipeline.
#pragma once

#include "iltm/autodiff.hpp"

namespace iltm {

struct GradcheckOptions {
  int d_main = 8;
  int hidden = 16;
  int K = 3;
  int n_gen = 12;
  int n_query = 10;
  double alpha = 0.5;
  double tau = 2.0;
  double step = 1e-5;
  double tolerance = 1e-5;
  std::uint64_t seed = 7;
  bool mutate_relu = false;  // drops the ReLU mask to prove the check bites
};

struct GradcheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  Index coordinates = 0;
  bool pass = false;
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  double seconds = 0.0;
  bool pass() const;
  double worst() const;
};

/// Runs every operator check plus the full pipeline check.
GradcheckReport run_gradcheck(const GradcheckOptions& options);

/// Full pipeline only: loss as a function of the flattened hypernetwork
/// parameters, compared coordinate-wise against central differences.
GradcheckEntry pipeline_gradcheck(const GradcheckOptions& options);

}  // namespace iltm
