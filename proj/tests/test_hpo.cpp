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

#include <doctest.h>

#include <cmath>
#include <set>

using namespace iltm;

TEST_CASE("defaults are the documented default column") {
  const HpSample d = HpSample::defaults();
  CHECK(d.preprocessing == PsiTag::kRX);
  CHECK(d.batch == 2048);
  CHECK(d.n_ens == 8);
  CHECK(d.feature_bagging);
  CHECK(d.finetune);
  CHECK(d.finetune_lr == 1e-4);
  CHECK(d.max_steps == 1024);
  CHECK(d.dropout == 0.0);
  CHECK(d.retrieval);
  CHECK(d.tau == 2.0);
  CHECK(d.alpha == 0.5);
  CHECK(d.in_domain());
}

TEST_CASE("a seeded draw is reproducible and seeds differ") {
  CHECK(sample_hyperparams(42).fields() == sample_hyperparams(42).fields());
  int same = 0;
  for (std::uint64_t s = 0; s < 20; ++s) same += sample_hyperparams(s).fields() == sample_hyperparams(s + 100).fields();
  CHECK(same == 0);
}

TEST_CASE("sampling audit over 10000 draws") {
  std::set<PsiTag> pre;
  std::set<int> batch, ens, steps, est;
  std::set<double> drop;
  std::set<bool> bag, ft, ret, fit_each;
  std::set<FineTuneData> data;
  std::set<GbdtDataSplit> split;
  double lr_min = 1, lr_max = 0, glr_min = 1, glr_max = 0;
  double tau_min = 10, tau_max = 0, a_min = 10, a_max = -1;
  int low_decades = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const HpSample h = sample_hyperparams(s);
    REQUIRE(h.in_domain());
    pre.insert(h.preprocessing);
    batch.insert(h.batch);
    ens.insert(h.n_ens);
    steps.insert(h.max_steps);
    est.insert(h.n_estimators);
    drop.insert(h.dropout);
    bag.insert(h.feature_bagging);
    ft.insert(h.finetune);
    ret.insert(h.retrieval);
    fit_each.insert(h.gbdt_fit_each);
    data.insert(h.data);
    split.insert(h.gbdt_split);
    lr_min = std::min(lr_min, h.finetune_lr);
    lr_max = std::max(lr_max, h.finetune_lr);
    glr_min = std::min(glr_min, h.gbdt_lr);
    glr_max = std::max(glr_max, h.gbdt_lr);
    tau_min = std::min(tau_min, h.tau);
    tau_max = std::max(tau_max, h.tau);
    a_min = std::min(a_min, h.alpha);
    a_max = std::max(a_max, h.alpha);
    low_decades += h.finetune_lr < 1e-4;
  }
  CHECK(pre.size() == std::size(kPreprocessingChoices));
  CHECK(batch.size() == std::size(kBatchChoices));
  CHECK(ens.size() == std::size(kEnsembleChoices));
  CHECK(steps.size() == std::size(kStepChoices));
  CHECK(est.size() == std::size(kEstimatorChoices));
  CHECK(drop.size() == std::size(kDropoutChoices));
  CHECK(bag.size() == 2);
  CHECK(ft.size() == 2);
  CHECK(ret.size() == 2);
  CHECK(fit_each.size() == 2);
  CHECK(data.size() == 2);
  CHECK(split.size() == 2);
  CHECK(lr_min >= 1e-6);
  CHECK(lr_max <= 1e-2);
  CHECK(glr_min >= 0.01);
  CHECK(glr_max <= 0.5);
  CHECK(tau_min >= 0.5);
  CHECK(tau_max <= 3.0);
  CHECK(a_min >= 0.0);
  CHECK(a_max <= 1.0);
  // Log-uniform over four decades puts half the mass below 1e-4.
  CHECK(std::abs(low_decades / 10000.0 - 0.5) < 0.03);
}

TEST_CASE("apply overlays the sample and keeps other fields") {
  InferenceConfig base;
  base.seed = 99;
  base.bag_fraction = 0.6;
  HpSample h = sample_hyperparams(3);
  const InferenceConfig c = h.apply(base);
  CHECK(c.seed == 99);
  CHECK(c.bag_fraction == 0.6);
  CHECK(c.n_ens == h.n_ens);
  CHECK(c.preprocessing == h.preprocessing);
  CHECK(c.retrieval.alpha == h.alpha);
  CHECK(c.retrieval.tau == h.tau);
  CHECK(c.finetune.learning_rate == h.finetune_lr);
  CHECK(c.gbdt.max_rounds == h.n_estimators);
}
