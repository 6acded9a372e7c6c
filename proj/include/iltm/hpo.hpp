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


// Random search space for inference hyperparameters.
#pragma once

#include "iltm/inference.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace iltm {

inline constexpr int kBatchChoices[] = {1024, 2048};
inline constexpr int kEnsembleChoices[] = {1, 2, 4, 8, 12, 16, 20};
inline constexpr double kDropoutChoices[] = {0.0, 0.15};
inline constexpr int kStepChoices[] = {4, 512, 1024};
inline constexpr int kEstimatorChoices[] = {100, 300};
inline constexpr PsiTag kPreprocessingChoices[] = {PsiTag::kR, PsiTag::kX, PsiTag::kC,
                                                   PsiTag::kRX, PsiTag::kRC};

struct HpSample {
  PsiTag preprocessing = PsiTag::kRX;
  int batch = 2048;
  int n_ens = 8;
  bool feature_bagging = true;
  bool finetune = true;
  double dropout = 0.0;
  int max_steps = 1024;
  double finetune_lr = 1e-4;  // log-uniform [1e-6, 1e-2]
  FineTuneData data = FineTuneData::kEntire;
  GbdtDataSplit gbdt_split = GbdtDataSplit::kDynamic;
  bool gbdt_fit_each = false;
  int n_estimators = 100;
  double gbdt_lr = 0.1;  // log-uniform [0.01, 0.5]; default is the booster's own
  bool retrieval = true;
  double tau = 2.0;    // uniform [0.5, 3]
  double alpha = 0.5;  // uniform [0, 1]

  static HpSample defaults() { return {}; }
  /// Every field inside its domain.
  bool in_domain() const;
  std::vector<std::pair<std::string, std::string>> fields() const;
  /// Overlays the sample on `base`, which supplies everything outside the search space.
  InferenceConfig apply(InferenceConfig base) const;
};

HpSample sample_hyperparams(std::uint64_t seed);

}  // namespace iltm
