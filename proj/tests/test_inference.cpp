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


#include "iltm/inference.hpp"
#include "iltm/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace iltm;

namespace {

HyperNet small_phi() {
  HyperNetConfig c;
  c.d_main = 8;
  c.hidden = 16;
  c.k_max = 4;
  return HyperNet::init(c, 1);
}

InferenceConfig small_cfg() {
  InferenceConfig c;
  c.batch = 64;
  c.n_ens = 1;
  c.random_features = 64;
  c.gbdt.max_rounds = 5;
  c.gbdt.depth = 3;
  c.finetune.max_steps = 5;
  c.finetune.batch = 64;
  c.finetune.learning_rate = 1e-3;
  return c;
}

TabularTask task(SyntheticKind kind, int n = 200, int K = 3) {
  SyntheticSpec s;
  s.kind = kind;
  s.n = n;
  s.d = 5;
  s.K = K;
  s.seed = 21;
  return make_synthetic(s, "t");
}

Mat randn(Index r, Index c, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  Mat m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

}  // namespace

TEST_CASE("defaults") {
  const InferenceConfig c;
  CHECK(c.preprocessing == PsiTag::kRX);
  CHECK(c.n_ens == 8);
  CHECK(c.feature_bagging);
  CHECK(c.retrieval.enabled);
  CHECK(c.retrieval.alpha == 0.5);
  CHECK(c.retrieval.tau == 2.0);
  CHECK(c.finetune.enabled);
  CHECK(c.finetune.learning_rate == 1e-4);
  CHECK(c.finetune.max_steps == 1024);
  CHECK(c.batch == 2048);
}

TEST_CASE("identical members collapse to the single-member prediction") {
  const auto t = task(SyntheticKind::kBlobs);
  const HyperNet phi = small_phi();
  InferenceConfig c = small_cfg();
  c.feature_bagging = false;
  c.vary_member_seeds = false;
  const EnsembleModel one = fit_task(phi, t, c);
  c.n_ens = 2;
  const EnsembleModel two = fit_task(phi, t, c);
  REQUIRE(two.members.size() == 2);
  CHECK(two.members[0].theta.flatten() == two.members[1].theta.flatten());
  CHECK(predict(two, t.X) == predict(one, t.X));
}

TEST_CASE("probabilities are normalized and row-wise") {
  const auto t = task(SyntheticKind::kBlobs);
  InferenceConfig c = small_cfg();
  c.n_ens = 3;
  const EnsembleModel m = fit_task(small_phi(), t, c);
  const Mat P = predict(m, t.X);
  CHECK(P.cols() == 3);
  for (Index r = 0; r < P.rows(); ++r) CHECK(std::abs(P.row(r).sum() - 1.0) < 1e-9);

  std::vector<int> perm(static_cast<std::size_t>(t.n_rows()));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(2);
  std::shuffle(perm.begin(), perm.end(), rng);
  CHECK((predict(m, take_rows(t.X, perm)) - take_rows(P, perm)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("alpha zero with one member equals the plain network") {
  const auto t = task(SyntheticKind::kBlobs);
  InferenceConfig c = small_cfg();
  c.retrieval.alpha = 0.0;
  const EnsembleModel with = fit_task(small_phi(), t, c);
  c.retrieval.enabled = false;
  const EnsembleModel without = fit_task(small_phi(), t, c);
  CHECK(predict(with, t.X) == predict(without, t.X));
}

TEST_CASE("GBDT is fitted on every training row below the dynamic threshold") {
  const auto t = task(SyntheticKind::kBlobs, 2500);
  REQUIRE(t.split("train").size() == 1500);
  InferenceConfig c = small_cfg();
  c.finetune.enabled = false;
  c.feature_bagging = false;
  c.preprocessing = PsiTag::kX;
  const EnsembleModel m = fit_task(small_phi(), t, c);
  const auto& rows = t.split("train");
  const PsiVariant all = fit_psi(PsiTag::kX, take_rows(t.X, rows), take(t.y, rows), t.K, t.features(),
                                 c.gbdt, derive_seed(c.seed, 0x6bd7));
  CHECK(Mat(build_psi(m.members[0].psi, t.X)) == Mat(build_psi(all, t.X)));
}

TEST_CASE("zero learning rate leaves the weights unchanged and the kept loss never rises") {
  MainNet theta = random_main_net(6, 2, 3);
  const MainNet start = theta;
  const Mat x = randn(40, 6, 1), xh = randn(10, 6, 2);
  Mat t = Mat::Zero(40, 2), th = Mat::Zero(10, 2);
  for (int i = 0; i < 40; ++i) t(i, x(i, 0) > 0 ? 1 : 0) = 1;
  for (int i = 0; i < 10; ++i) th(i, xh(i, 0) > 0 ? 1 : 0) = 1;
  FineTuneConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.max_steps = 5;
  fine_tune(theta, x, t, xh, th, false, cfg, 1);
  CHECK(theta.flatten() == start.flatten());

  cfg.learning_rate = 0.05;
  cfg.max_steps = 30;
  const FineTuneTrace tr = fine_tune(theta, x, t, xh, th, false, cfg, 1);
  CHECK(tr.best_loss <= tr.initial_loss);
}

TEST_CASE("regression members have one output and invert the standardization") {
  const auto t = task(SyntheticKind::kRegression, 300);
  InferenceConfig c = small_cfg();
  c.finetune.enabled = false;
  EnsembleModel m = fit_task(small_phi(), t, c);
  REQUIRE(m.regression());
  auto& member = m.members[0];
  CHECK(member.theta.W3.rows() == 1);
  CHECK(member.theta.W3.cols() == 8);
  member.theta.W3.setZero();
  member.theta.b3.setZero();
  const Mat p = predict_member(m, member, t.X.topRows(3));
  for (Index i = 0; i < 3; ++i) CHECK(p(i, 0) == member.y_mean);
  const Evaluation ev = evaluate_rows(fit_task(small_phi(), t, c), t, t.split("test"));
  CHECK(ev.metric == "rmse");
}

TEST_CASE("model container round trip") {
  const auto t = task(SyntheticKind::kMoons);
  InferenceConfig c = small_cfg();
  c.n_ens = 2;
  const EnsembleModel m = fit_task(small_phi(), t, c);
  const Container bytes = m.to_container();
  const EnsembleModel back = EnsembleModel::from_container(Container::deserialize(bytes.serialize()));
  CHECK(predict(back, t.X) == predict(m, t.X));
  CHECK(back.to_container().serialize() == bytes.serialize());
  const Evaluation ev = evaluate_rows(m, t, t.split("test"));
  CHECK(ev.metric == "auc");
}

TEST_CASE("fits are deterministic and thread-count independent") {
  const auto t = task(SyntheticKind::kBlobs);
  InferenceConfig c = small_cfg();
  c.n_ens = 3;
  c.threads = 1;
  const Mat a = predict(fit_task(small_phi(), t, c), t.X);
  c.threads = 3;
  const Mat b = predict(fit_task(small_phi(), t, c), t.X, 3);
  CHECK(a == b);
}
