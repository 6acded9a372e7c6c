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


#include "iltm/hypernet.hpp"

#include <doctest.h>

#include <numeric>

using namespace iltm;

namespace {

Mat randn(Index r, Index c, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  Mat m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

double max_diff(const MainNet& a, const MainNet& b) { return (a.flatten() - b.flatten()).cwiseAbs().maxCoeff(); }

HyperNetConfig small_cfg() {
  HyperNetConfig c;
  c.d_main = 6;
  c.hidden = 10;
  c.k_max = 4;
  return c;
}

}  // namespace

TEST_CASE("generated shapes at full main width") {
  HyperNetConfig c;
  c.hidden = 4;  // keeps the heads small; the main network is still 512 wide
  const HyperNet phi = HyperNet::init(c, 1);
  const Mat x = randn(20, 512, 2);
  std::vector<double> y(20);
  for (int i = 0; i < 20; ++i) y[static_cast<std::size_t>(i)] = 1 + i % 7;
  const MainNet net = generate_weights(phi, x, y, 7);
  CHECK(net.W1.rows() == 512);
  CHECK(net.W1.cols() == 512);
  CHECK(net.W2.rows() == 512);
  CHECK(net.W2.cols() == 512);
  CHECK(net.W3.rows() == 7);
  CHECK(net.W3.cols() == 512);
  CHECK(net.b3.cols() == 7);
  CHECK(net.finite());
}

TEST_CASE("generation is invariant to row order and duplication") {
  const HyperNet phi = HyperNet::init(small_cfg(), 3);
  const Mat x = randn(9, 6, 4);
  const std::vector<double> y = {1, 2, 3, 1, 2, 3, 1, 1, 2};
  const MainNet base = generate_weights(phi, x, y, 3);

  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(5);
  std::shuffle(perm.begin(), perm.end(), rng);
  const MainNet permuted = generate_weights(phi, take_rows(x, perm), take(y, perm), 3);
  CHECK(max_diff(base, permuted) < 1e-9);

  Mat x2(18, 6);
  x2 << x, x;
  std::vector<double> y2 = y;
  y2.insert(y2.end(), y.begin(), y.end());
  CHECK(max_diff(base, generate_weights(phi, x2, y2, 3)) < 1e-9);
}

TEST_CASE("a zero main network is the residual identity") {
  MainNet net;
  net.W1 = Mat::Zero(5, 5);
  net.b1 = Mat::Zero(1, 5);
  net.W2 = Mat::Zero(5, 5);
  net.b2 = Mat::Zero(1, 5);
  net.W3 = Mat::Zero(3, 5);
  net.b3 = Mat::Zero(1, 3);
  const Mat x = randn(4, 5, 6);
  const auto out = forward_main(net, x);
  CHECK(out.H == x);
  CHECK(out.logits.isZero());
}

TEST_CASE("forward pass is row-wise") {
  const MainNet net = random_main_net(6, 3, 7);
  const Mat x = randn(8, 6, 8);
  const auto all = forward_main(net, x);
  for (Index i = 0; i < 8; ++i) {
    const auto one = forward_main(net, x.row(i));
    CHECK((one.logits - all.logits.row(i)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((one.H - all.H.row(i)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("retrieval examples") {
  Mat h(1, 3);
  h << 1, 2, 3;
  Mat y(1, 2);
  y << 1, 0;
  const Mat r = retrieval_logits(h, h, y, 2.0);
  CHECK(r(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r(0, 1) == 0.0);

  Mat hq(1, 2), hc(2, 2), yc(2, 2);
  hq << 1, 0;
  hc << 0, 1, 0, -2;
  yc << 1, 0, 0, 1;
  CHECK(retrieval_logits(hq, hc, yc, 1.0).isZero());

  const Mat q = randn(3, 4, 1), c = randn(5, 4, 2);
  Mat yk = Mat::Zero(5, 2);
  for (int i = 0; i < 5; ++i) yk(i, i % 2) = 1;
  const Mat base = retrieval_logits(q, c, yk, 2.0);
  const Mat scaled = retrieval_logits(3.7 * q, c, yk, 2.0);
  CHECK((base - scaled).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("combined logits endpoints are exact") {
  const Mat net = randn(4, 3, 3), ret = randn(4, 3, 4);
  CHECK(combined_logits(net, ret, 0.0) == net);
  CHECK(combined_logits(net, ret, 1.0) == ret);
  Mat a(1, 2), b(1, 2);
  a << 2, 0;
  b << 0, 2;
  CHECK(combined_logits(a, b, 0.5) == (Mat(1, 2) << 1, 1).finished());
  CHECK_THROWS_AS(combined_logits(a, b, 1.5), ConfigError);
}

TEST_CASE("regression adaptation emits a single output") {
  const HyperNet phi = HyperNet::init(small_cfg(), 9);
  const Mat x = randn(11, 6, 10);
  std::vector<double> y(11);
  for (int i = 0; i < 11; ++i) y[static_cast<std::size_t>(i)] = x(i, 0) * 0.5;
  const MainNet net = adapt_for_regression(phi, x, y);
  CHECK(net.W3.rows() == 1);
  CHECK(net.W3.cols() == 6);
  CHECK(net.b3.size() == 1);
}

TEST_CASE("class counts above k_max are rejected") {
  const HyperNet phi = HyperNet::init(small_cfg(), 1);
  const Mat x = randn(10, 6, 1);
  std::vector<double> y(10);
  for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = 1 + i % 5;
  CHECK_THROWS_AS(generate_weights(phi, x, y, 5), ConfigError);
}

TEST_CASE("hypernetwork and main network survive the container") {
  const HyperNet phi = HyperNet::init(small_cfg(), 2);
  Container c;
  phi.save(c, "phi.");
  const HyperNet back = HyperNet::load(Container::deserialize(c.serialize()), "phi.");
  CHECK(back.config.hidden == 10);
  CHECK(back.params.flatten() == phi.params.flatten());

  const MainNet net = random_main_net(6, 2, 3);
  Container d;
  net.save(d, "net.");
  CHECK(MainNet::load(Container::deserialize(d.serialize()), "net.").flatten() == net.flatten());
}

TEST_CASE("tape and value paths agree") {
  const HyperNet phi = HyperNet::init(small_cfg(), 4);
  const Mat x = randn(8, 6, 5);
  const std::vector<double> y = {1, 2, 1, 2, 1, 2, 2, 1};
  const MainNet net = generate_weights(phi, x, y, 2);
  Tape t;
  const auto ids = mark_params(t, phi.params);
  const std::vector<int> labels = {0, 1, 0, 1, 0, 1, 1, 0};
  const MainIds m = generate_on_tape(t, phi.config, ids, t.constant(x), labels, 2);
  CHECK(t.value(m.W1) == net.W1);
  CHECK(t.value(m.W3) == net.W3);
  const auto [h, logits] = forward_main_on_tape(t, m, t.constant(x));
  CHECK((t.value(logits) - forward_main(net, x).logits).cwiseAbs().maxCoeff() < 1e-12);
}
