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


#include "iltm/gradcheck.hpp"

#include <chrono>

#include "iltm/hypernet.hpp"
#include "iltm/tabular.hpp"

namespace iltm {
namespace {

using Builder = std::function<Tape::Id(Tape&, const std::vector<Tape::Id>&)>;

Mat randn(Index r, Index c, Rng& rng) {
  std::normal_distribution<double> normal;
  Mat m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

// Evaluates the scalar built by `build` with `inputs` marked as parameters.
GradcheckEntry check_op(const std::string& name, const std::vector<Mat>& inputs, const Builder& build,
                        const GradcheckOptions& o) {
  ParamSet ps;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    ps.names.push_back("in" + std::to_string(i));
    ps.values.push_back(inputs[i]);
  }
  auto f = [&](const Vec& flat) {
    ParamSet q = ps;
    q.assign(flat);
    Tape t;
    return t.value(build(t, mark_params(t, q)))(0, 0);
  };
  Tape t;
  const auto loss = build(t, mark_params(t, ps));
  t.backward(loss);
  ParamSet g = ps.zeros_like();
  t.accumulate_grads(g);
  const auto rep = finite_diff_check(f, ps.flatten(), g.flatten(), o.step);
  return {name, rep.max_rel_error, rep.coordinates, rep.max_rel_error < o.tolerance};
}

}  // namespace

bool GradcheckReport::pass() const {
  for (const auto& e : entries) {
    if (!e.pass) return false;
  }
  return !entries.empty();
}

double GradcheckReport::worst() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.max_rel_error);
  return w;
}

GradcheckEntry pipeline_gradcheck(const GradcheckOptions& o) {
  Rng rng(o.seed);
  HyperNetConfig cfg;
  cfg.d_main = o.d_main;
  cfg.hidden = o.hidden;
  cfg.k_max = std::max(o.K, 16);
  const HyperNet phi = HyperNet::init(cfg, derive_seed(o.seed, 1));
  const Mat x_gen = randn(o.n_gen, o.d_main, rng);
  const Mat x_q = randn(o.n_query, o.d_main, rng);
  std::vector<int> gen_labels, q_labels;
  for (int i = 0; i < o.n_gen; ++i) gen_labels.push_back(i % o.K);
  std::vector<double> qy;
  for (int i = 0; i < o.n_query; ++i) qy.push_back(static_cast<double>((i * 7 + 1) % o.K + 1));
  const Mat y_gen = one_hot_labels(
      [&] {
        std::vector<double> v;
        for (int l : gen_labels) v.push_back(l + 1.0);
        return v;
      }(),
      o.K);
  const Mat y_q = one_hot_labels(qy, o.K);

  auto build = [&](Tape& t, const ParamSet& p) {
    const auto ids = mark_params(t, p);
    const Tape::Id xg = t.constant(x_gen);
    const MainIds net = generate_on_tape(t, cfg, ids, xg, gen_labels, o.K);
    const auto [h_ctx, unused] = forward_main_on_tape(t, net, xg);
    (void)unused;
    const auto [h_q, logits] = forward_main_on_tape(t, net, t.constant(x_q));
    const Tape::Id ret = retrieval_on_tape(t, h_q, h_ctx, y_gen, o.tau);
    return t.ce_loss(combine_on_tape(t, logits, ret, o.alpha), y_q);
  };
  Tape::set_relu_mutation(o.mutate_relu);
  Tape t;
  const Tape::Id loss = build(t, phi.params);
  t.backward(loss);
  ParamSet g = phi.params.zeros_like();
  t.accumulate_grads(g);
  Tape::set_relu_mutation(false);
  auto f = [&](const Vec& flat) {
    ParamSet q = phi.params;
    q.assign(flat);
    Tape tt;
    return tt.value(build(tt, q))(0, 0);
  };
  const auto rep = finite_diff_check(f, phi.params.flatten(), g.flatten(), o.step);
  return {"pipeline", rep.max_rel_error, rep.coordinates, rep.max_rel_error < o.tolerance};
}

GradcheckReport run_gradcheck(const GradcheckOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(derive_seed(o.seed, 2));
  GradcheckReport rep;
  auto R = [&](Index r, Index c) { return randn(r, c, rng); };
  const Mat target = R(4, 3);
  auto mse_to = [](Tape& t, Tape::Id x, const Mat& tg) { return t.mse_loss(x, tg); };

  Tape::set_relu_mutation(o.mutate_relu);
  rep.entries.push_back(check_op("affine", {R(4, 5), R(3, 5), R(1, 3)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.affine(in[0], in[1], in[2]), target);
  }, o));
  rep.entries.push_back(check_op("matmul", {R(4, 2), R(2, 3)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.matmul(in[0], in[1]), target);
  }, o));
  rep.entries.push_back(check_op("matmul_nt", {R(4, 2), R(3, 2)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.matmul_nt(in[0], in[1]), target);
  }, o));
  rep.entries.push_back(check_op("transpose", {R(3, 4)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.transpose(in[0]), target);
  }, o));
  rep.entries.push_back(check_op("relu", {R(4, 3)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.relu(in[0]), target);
  }, o));
  rep.entries.push_back(check_op("add", {R(4, 3), R(4, 3)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.add(in[0], t.add(in[1], in[0])), target);
  }, o));
  rep.entries.push_back(check_op("add_row", {R(4, 3), R(1, 3)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.add_row(in[0], in[1]), target);
  }, o));
  const Mat mask = R(4, 3);
  rep.entries.push_back(check_op("scale_mul_const", {R(4, 3)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.mul_const(t.scale(in[0], -1.7), mask), target);
  }, o));
  rep.entries.push_back(check_op("concat_slice", {R(4, 1), R(4, 3)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.slice_cols(t.concat_cols({in[0], in[1]}), 1, 4), target);
  }, o));
  rep.entries.push_back(check_op("reshape", {R(2, 6)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.reshape(in[0], 4, 3), target);
  }, o));
  rep.entries.push_back(check_op("mean_repeat", {R(5, 3)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.repeat_rows(t.mean_rows(in[0]), 4), target);
  }, o));
  const std::vector<int> groups{0, 2, 0, 2, 2};  // group 1 absent
  rep.entries.push_back(check_op("group_mean_gather", {R(5, 3)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.gather_rows(t.group_mean(in[0], groups, 3), {1, 0, 2, 2}), target);
  }, o));
  rep.entries.push_back(check_op("row_normalize", {R(4, 3)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.row_normalize(in[0]), target);
  }, o));
  rep.entries.push_back(check_op("standardize_rows", {R(4, 3)}, [&](Tape& t, const auto& in) {
    return mse_to(t, t.standardize_rows(in[0]), target);
  }, o));
  const Mat onehot = one_hot_labels(std::vector<double>{1, 3, 2, 3}, 3);
  rep.entries.push_back(check_op("ce_loss", {R(4, 3)}, [&](Tape& t, const auto& in) {
    return t.ce_loss(in[0], onehot);
  }, o));
  Tape::set_relu_mutation(false);
  rep.entries.push_back(pipeline_gradcheck(o));
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace iltm
