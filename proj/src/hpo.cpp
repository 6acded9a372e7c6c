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


#include "iltm/hpo.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace iltm {

namespace {

template <typename T, std::size_t N>
T pick(const T (&choices)[N], Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, N - 1);
  return choices[d(rng)];
}

template <typename T, std::size_t N>
bool one_of(const T (&choices)[N], T v) {
  return std::find(std::begin(choices), std::end(choices), v) != std::end(choices);
}

bool coin(Rng& rng) { return std::uniform_int_distribution<int>(0, 1)(rng) == 1; }

double log_uniform(double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
  return std::clamp(std::exp(d(rng)), lo, hi);
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

}  // namespace

HpSample sample_hyperparams(std::uint64_t seed) {
  // Each field draws from its own stream so adding a field never shifts the others.
  auto stream = [seed](std::uint64_t field) { return Rng(derive_seed(seed, 0x4870, field)); };
  HpSample s;
  {
    Rng r = stream(0);
    s.preprocessing = pick(kPreprocessingChoices, r);
  }
  {
    Rng r = stream(1);
    s.batch = pick(kBatchChoices, r);
  }
  {
    Rng r = stream(2);
    s.n_ens = pick(kEnsembleChoices, r);
  }
  {
    Rng r = stream(3);
    s.feature_bagging = coin(r);
  }
  {
    Rng r = stream(4);
    s.finetune = coin(r);
  }
  {
    Rng r = stream(5);
    s.dropout = pick(kDropoutChoices, r);
  }
  {
    Rng r = stream(6);
    s.max_steps = pick(kStepChoices, r);
  }
  {
    Rng r = stream(7);
    s.finetune_lr = log_uniform(1e-6, 1e-2, r);
  }
  {
    Rng r = stream(8);
    s.data = coin(r) ? FineTuneData::kBootstrap : FineTuneData::kEntire;
  }
  {
    Rng r = stream(9);
    s.gbdt_split = coin(r) ? GbdtDataSplit::kEntire : GbdtDataSplit::kDynamic;
  }
  {
    Rng r = stream(10);
    s.gbdt_fit_each = coin(r);
  }
  {
    Rng r = stream(11);
    s.n_estimators = pick(kEstimatorChoices, r);
  }
  {
    Rng r = stream(12);
    s.gbdt_lr = log_uniform(0.01, 0.5, r);
  }
  {
    Rng r = stream(13);
    s.retrieval = coin(r);
  }
  {
    Rng r = stream(14);
    s.tau = std::uniform_real_distribution<double>(0.5, 3.0)(r);
  }
  {
    Rng r = stream(15);
    s.alpha = std::uniform_real_distribution<double>(0.0, 1.0)(r);
  }
  return s;
}

bool HpSample::in_domain() const {
  return one_of(kPreprocessingChoices, preprocessing) && one_of(kBatchChoices, batch) &&
         one_of(kEnsembleChoices, n_ens) && one_of(kDropoutChoices, dropout) &&
         one_of(kStepChoices, max_steps) && one_of(kEstimatorChoices, n_estimators) &&
         finetune_lr >= 1e-6 && finetune_lr <= 1e-2 && gbdt_lr >= 0.01 && gbdt_lr <= 0.5 &&
         tau >= 0.5 && tau <= 3.0 && alpha >= 0.0 && alpha <= 1.0;
}

std::vector<std::pair<std::string, std::string>> HpSample::fields() const {
  return {
      {"preprocessing", std::string(to_string(preprocessing))},
      {"batch", std::to_string(batch)},
      {"n_ens", std::to_string(n_ens)},
      {"feature_bagging", yes_no(feature_bagging)},
      {"finetune", yes_no(finetune)},
      {"dropout", format_double(dropout)},
      {"max_steps", std::to_string(max_steps)},
      {"finetune_lr", format_double(finetune_lr)},
      {"finetune_data", data == FineTuneData::kBootstrap ? "bootstrap" : "entire"},
      {"gbdt_split", gbdt_split == GbdtDataSplit::kDynamic ? "dynamic" : "entire"},
      {"gbdt_fit_each", yes_no(gbdt_fit_each)},
      {"n_estimators", std::to_string(n_estimators)},
      {"gbdt_lr", format_double(gbdt_lr)},
      {"retrieval", yes_no(retrieval)},
      {"tau", format_double(tau)},
      {"alpha", format_double(alpha)},
  };
}

InferenceConfig HpSample::apply(InferenceConfig base) const {
  base.preprocessing = preprocessing;
  base.batch = batch;
  base.n_ens = n_ens;
  base.feature_bagging = feature_bagging;
  base.finetune.enabled = finetune;
  base.finetune.dropout = dropout;
  base.finetune.max_steps = max_steps;
  base.finetune.learning_rate = finetune_lr;
  base.finetune.data = data;
  base.finetune.batch = batch;
  base.gbdt_split = gbdt_split;
  base.gbdt_fit_each = gbdt_fit_each;
  base.gbdt.max_rounds = n_estimators;
  base.gbdt.learning_rate = gbdt_lr;
  base.retrieval.enabled = retrieval;
  base.retrieval.tau = tau;
  base.retrieval.alpha = alpha;
  return base;
}

}  // namespace iltm
