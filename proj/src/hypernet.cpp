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

#include <cmath>

namespace iltm {
namespace {

Mat normal_mat(Index r, Index c, double sd, Rng& rng) {
  std::normal_distribution<double> normal(0.0, sd);
  Mat m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

int head_width(const HyperNetConfig& cfg, int layer) {
  return layer < kMainLayers ? cfg.d_main * (cfg.d_main + 1) : cfg.d_main + 1;
}

std::string pname(int layer, const std::string& what) { return "l" + std::to_string(layer) + "." + what; }

struct LayerIds {
  std::vector<std::pair<Tape::Id, Tape::Id>> block;
  Tape::Id head_w, head_b;
};

std::vector<LayerIds> layer_ids(const HyperNetConfig& cfg, const std::vector<Tape::Id>& phi) {
  std::vector<LayerIds> out;
  std::size_t at = 0;
  for (int l = 1; l <= kMainLayers; ++l) {
    LayerIds ids;
    for (int b = 0; b < cfg.block_depth; ++b) {
      ids.block.emplace_back(phi.at(at), phi.at(at + 1));
      at += 2;
    }
    ids.head_w = phi.at(at);
    ids.head_b = phi.at(at + 1);
    at += 2;
    out.push_back(ids);
  }
  return out;
}

Tape::Id run_block(Tape& tape, const LayerIds& ids, Tape::Id u) {
  Tape::Id v = u;
  for (const auto& [w, b] : ids.block) v = tape.relu(tape.affine(v, w, b));
  return v;
}

// Splits a (rows x d+1) node into W (scaled by 1/sqrt(d)) and a 1 x rows bias.
std::pair<Tape::Id, Tape::Id> split_weights(Tape& tape, Tape::Id m, int d) {
  const Tape::Id w = tape.scale(tape.slice_cols(m, 0, d), 1.0 / std::sqrt(static_cast<double>(d)));
  const Tape::Id b = tape.transpose(tape.slice_cols(m, d, d + 1));
  return {w, b};
}

// Shared generation loop. `labels` empty selects the regression form.
MainIds generate_impl(Tape& tape, const HyperNetConfig& cfg, const std::vector<Tape::Id>& phi,
                      Tape::Id x, const Mat& label_block, const std::vector<int>& labels, int K) {
  const int d = cfg.d_main;
  if (tape.cols(x) != d) {
    throw DataError("hypernetwork expects width " + std::to_string(d) + ", got " + std::to_string(tape.cols(x)));
  }
  const Index n = tape.rows(x);
  if (n < 1) throw DataError("generation set is empty");
  const bool classify = !labels.empty();
  const auto layers = layer_ids(cfg, phi);
  const Tape::Id lab = tape.constant(label_block);
  MainIds out{};
  Tape::Id a = x;
  for (int l = 1; l <= kMainLayers; ++l) {
    const auto& ids = layers[static_cast<std::size_t>(l - 1)];
    const Tape::Id mean = tape.repeat_rows(tape.mean_rows(a), n);
    const Tape::Id cmean = classify ? tape.gather_rows(tape.group_mean(a, labels, K), labels) : mean;
    const Tape::Id v = run_block(tape, ids, tape.concat_cols({a, x, lab, mean, cmean}));
    if (l < kMainLayers) {
      const Tape::Id z = tape.mean_rows(v);
      const Tape::Id flat = tape.affine(z, ids.head_w, ids.head_b);
      const auto [w, b] = split_weights(tape, tape.reshape(flat, d, d + 1), d);
      a = tape.relu(tape.affine(a, w, b));
      if (l == kMainLayers - 1) a = tape.add(a, x);
      if (l == 1) {
        out.W1 = w;
        out.b1 = b;
      } else {
        out.W2 = w;
        out.b2 = b;
      }
    } else {
      const Tape::Id per_sample = tape.affine(v, ids.head_w, ids.head_b);
      const Tape::Id pooled = classify ? tape.group_mean(per_sample, labels, K) : tape.mean_rows(per_sample);
      const auto [w, b] = split_weights(tape, pooled, d);
      out.W3 = w;
      out.b3 = b;
    }
  }
  return out;
}

MainNet read_main(const Tape& tape, const MainIds& ids) {
  MainNet net{tape.value(ids.W1), tape.value(ids.b1), tape.value(ids.W2),
              tape.value(ids.b2), tape.value(ids.W3), tape.value(ids.b3)};
  if (!net.finite()) throw NumericError("generated main-network weights are not finite");
  return net;
}

const char* kMainNames[] = {"W1", "b1", "W2", "b2", "W3", "b3"};

}  // namespace

HyperNet HyperNet::init(const HyperNetConfig& cfg, std::uint64_t seed) {
  if (cfg.d_main < 1 || cfg.hidden < 1 || cfg.k_max < 1 || cfg.block_depth < 1) {
    throw ConfigError("hypernetwork dimensions must be positive");
  }
  HyperNet h;
  h.config = cfg;
  Rng rng(seed);
  for (int l = 1; l <= kMainLayers; ++l) {
    int fan_in = cfg.cond_width();
    for (int b = 0; b < cfg.block_depth; ++b) {
      h.params.names.push_back(pname(l, "w" + std::to_string(b + 1)));
      h.params.values.push_back(normal_mat(cfg.hidden, fan_in, std::sqrt(2.0 / fan_in), rng));
      h.params.names.push_back(pname(l, "b" + std::to_string(b + 1)));
      h.params.values.push_back(Mat::Zero(1, cfg.hidden));
      fan_in = cfg.hidden;
    }
    const int out = head_width(cfg, l);
    h.params.names.push_back(pname(l, "head_w"));
    h.params.values.push_back(normal_mat(out, cfg.hidden, std::sqrt(1.0 / cfg.hidden), rng));
    h.params.names.push_back(pname(l, "head_b"));
    h.params.values.push_back(Mat::Zero(1, out));
  }
  return h;
}

void HyperNet::save(Container& c, const std::string& prefix) const {
  c.put_ints(prefix + "config", std::vector<int>{config.d_main, config.hidden, config.k_max, config.block_depth});
  for (std::size_t i = 0; i < params.size(); ++i) c.put(prefix + params.names[i], params.values[i]);
}

HyperNet HyperNet::load(const Container& c, const std::string& prefix) {
  const auto cfg = c.get_ints(prefix + "config");
  HyperNetConfig hc{cfg.at(0), cfg.at(1), cfg.at(2), cfg.at(3)};
  HyperNet h = HyperNet::init(hc, 0);
  for (std::size_t i = 0; i < h.params.size(); ++i) {
    Mat m = c.get_mat(prefix + h.params.names[i]);
    if (m.rows() != h.params.values[i].rows() || m.cols() != h.params.values[i].cols()) {
      throw DataError("hypernetwork tensor '" + h.params.names[i] + "' has the wrong shape");
    }
    h.params.values[i] = std::move(m);
  }
  return h;
}

ParamSet MainNet::as_params() const {
  ParamSet p;
  for (const char* n : kMainNames) p.names.emplace_back(n);
  p.values = {W1, b1, W2, b2, W3, b3};
  return p;
}

MainNet MainNet::from_params(const ParamSet& p) {
  if (p.size() != 6) throw DataError("main network needs 6 tensors");
  return {p.values[0], p.values[1], p.values[2], p.values[3], p.values[4], p.values[5]};
}

bool MainNet::finite() const {
  return all_finite(W1) && all_finite(b1) && all_finite(W2) && all_finite(b2) && all_finite(W3) &&
         all_finite(b3);
}

void MainNet::save(Container& c, const std::string& prefix) const {
  const auto p = as_params();
  for (std::size_t i = 0; i < p.size(); ++i) c.put(prefix + p.names[i], p.values[i]);
}

MainNet MainNet::load(const Container& c, const std::string& prefix) {
  ParamSet p;
  for (const char* n : kMainNames) {
    p.names.emplace_back(n);
    p.values.push_back(c.get_mat(prefix + n));
  }
  return from_params(p);
}

MainNet random_main_net(int d, int n_outputs, std::uint64_t seed) {
  Rng rng(seed);
  const double sd = std::sqrt(2.0 / d);
  MainNet net;
  net.W1 = normal_mat(d, d, sd, rng);
  net.b1 = Mat::Zero(1, d);
  net.W2 = normal_mat(d, d, sd, rng);
  net.b2 = Mat::Zero(1, d);
  net.W3 = normal_mat(n_outputs, d, std::sqrt(1.0 / d), rng);
  net.b3 = Mat::Zero(1, n_outputs);
  return net;
}

std::vector<Tape::Id> mark_params(Tape& tape, const ParamSet& p) {
  std::vector<Tape::Id> ids;
  for (std::size_t i = 0; i < p.size(); ++i) ids.push_back(tape.param(p.values[i], static_cast<int>(i)));
  return ids;
}

MainIds mark_main(Tape& tape, const MainNet& net) {
  const auto ids = mark_params(tape, net.as_params());
  return {ids[0], ids[1], ids[2], ids[3], ids[4], ids[5]};
}

MainIds generate_on_tape(Tape& tape, const HyperNetConfig& cfg, const std::vector<Tape::Id>& phi,
                         Tape::Id x_gen, const std::vector<int>& labels, int K) {
  if (K < 1) throw DataError("classification generation needs K >= 1");
  if (K > cfg.k_max) {
    throw ConfigError("task has " + std::to_string(K) + " classes but the hypernetwork supports at most " +
                      std::to_string(cfg.k_max));
  }
  if (static_cast<Index>(labels.size()) != tape.rows(x_gen)) throw DataError("label count mismatch");
  Mat lab = Mat::Zero(static_cast<Index>(labels.size()), cfg.k_max);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= K) throw DataError("generation label out of range");
    lab(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return generate_impl(tape, cfg, phi, x_gen, lab, labels, K);
}

MainIds generate_regression_on_tape(Tape& tape, const HyperNetConfig& cfg,
                                    const std::vector<Tape::Id>& phi, Tape::Id x_gen,
                                    std::span<const double> y_std) {
  if (static_cast<Index>(y_std.size()) != tape.rows(x_gen)) throw DataError("target count mismatch");
  Mat lab = Mat::Zero(static_cast<Index>(y_std.size()), cfg.k_max);
  for (std::size_t i = 0; i < y_std.size(); ++i) lab(static_cast<Index>(i), 0) = y_std[i];
  return generate_impl(tape, cfg, phi, x_gen, lab, {}, 1);
}

std::pair<Tape::Id, Tape::Id> forward_main_on_tape(Tape& tape, const MainIds& net, Tape::Id x,
                                                   DropoutSpec dropout) {
  auto drop = [&](Tape::Id h) {
    if (dropout.rate <= 0.0 || dropout.rng == nullptr) return h;
    std::bernoulli_distribution keep(1.0 - dropout.rate);
    Mat mask(tape.rows(h), tape.cols(h));
    const double s = 1.0 / (1.0 - dropout.rate);
    for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*dropout.rng) ? s : 0.0;
    return tape.mul_const(h, mask);
  };
  const Tape::Id a1 = drop(tape.relu(tape.affine(x, net.W1, net.b1)));
  const Tape::Id h = tape.add(drop(tape.relu(tape.affine(a1, net.W2, net.b2))), x);
  return {h, tape.affine(h, net.W3, net.b3)};
}

Tape::Id retrieval_on_tape(Tape& tape, Tape::Id h_query, Tape::Id h_context, const Mat& y_context,
                           double tau) {
  if (!(tau > 0.0)) throw ConfigError("retrieval temperature must be positive");
  const Tape::Id s = tape.matmul_nt(tape.row_normalize(h_query), tape.row_normalize(h_context));
  return tape.scale(tape.matmul(s, tape.constant(y_context)), 1.0 / tau);
}

Tape::Id combine_on_tape(Tape& tape, Tape::Id net_logits, Tape::Id ret_logits, double alpha) {
  if (alpha == 0.0) return net_logits;
  if (alpha == 1.0) return ret_logits;
  return tape.add(tape.scale(net_logits, 1.0 - alpha), tape.scale(ret_logits, alpha));
}

MainNet generate_weights(const HyperNet& phi, const Mat& x_gen, std::span<const double> y, int K) {
  Tape tape;
  const auto ids = mark_params(tape, phi.params);
  std::vector<int> labels;
  for (double v : y) labels.push_back(static_cast<int>(v) - 1);
  return read_main(tape, generate_on_tape(tape, phi.config, ids, tape.constant(x_gen), labels, K));
}

MainNet adapt_for_regression(const HyperNet& phi, const Mat& x_gen, std::span<const double> y_std) {
  Tape tape;
  const auto ids = mark_params(tape, phi.params);
  return read_main(tape, generate_regression_on_tape(tape, phi.config, ids, tape.constant(x_gen), y_std));
}

MainOutput forward_main(const MainNet& net, const Mat& x) {
  if (x.cols() != net.width()) throw DataError("forward_main: width mismatch");
  Mat a1 = x * net.W1.transpose();
  a1.rowwise() += net.b1.row(0);
  a1 = a1.cwiseMax(0.0);
  Mat h = a1 * net.W2.transpose();
  h.rowwise() += net.b2.row(0);
  h = h.cwiseMax(0.0) + x;
  Mat logits = h * net.W3.transpose();
  logits.rowwise() += net.b3.row(0);
  return {std::move(h), std::move(logits)};
}

Mat retrieval_logits(const Mat& hq, const Mat& hc, const Mat& yc, double tau) {
  if (hc.rows() < 1) throw DataError("retrieval context is empty");
  if (!(tau > 0.0)) throw ConfigError("retrieval temperature must be positive");
  Mat q = hq;
  for (Index r = 0; r < q.rows(); ++r) q.row(r) /= q.row(r).norm() + 1e-12;
  Mat c = hc;
  for (Index r = 0; r < c.rows(); ++r) c.row(r) /= c.row(r).norm() + 1e-12;
  return (q * c.transpose()) * yc * (1.0 / tau);
}

Mat combined_logits(const Mat& net, const Mat& ret, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must lie in [0, 1]");
  if (alpha == 0.0) return net;
  if (alpha == 1.0) return ret;
  return (1.0 - alpha) * net + alpha * ret;
}

}  // namespace iltm
