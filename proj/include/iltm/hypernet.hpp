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


// Hypernetwork g_phi that emits the weights of a three-layer main network
// from an embedded, labeled generation set, plus the main network itself and
// retrieval-augmented logits.
#pragma once

#include "iltm/autodiff.hpp"
#include "iltm/container.hpp"

namespace iltm {

inline constexpr int kMainLayers = 3;

struct HyperNetConfig {
  int d_main = 512;
  int hidden = 1024;
  int k_max = 16;  // width of the padded label one-hot
  int block_depth = 2;

  /// [a_prev || x || label || mean(a) || classmean(a)]
  int cond_width() const { return 4 * d_main + k_max; }
};

struct HyperNet {
  HyperNetConfig config;
  ParamSet params;

  /// He-initialized blocks, heads drawn N(0, 1/hidden), zero biases.
  static HyperNet init(const HyperNetConfig& config, std::uint64_t seed);
  void save(Container& c, const std::string& prefix) const;
  static HyperNet load(const Container& c, const std::string& prefix);
};

struct MainNet {
  Mat W1, b1, W2, b2, W3, b3;  // biases are 1 x out

  int n_outputs() const { return static_cast<int>(W3.rows()); }
  int width() const { return static_cast<int>(W1.cols()); }
  ParamSet as_params() const;
  static MainNet from_params(const ParamSet& p);
  Vec flatten() const { return as_params().flatten(); }
  bool finite() const;
  void save(Container& c, const std::string& prefix) const;
  static MainNet load(const Container& c, const std::string& prefix);
};

/// He-initialized main network for training from scratch.
MainNet random_main_net(int d_main, int n_outputs, std::uint64_t seed);

struct RetrievalConfig {
  bool enabled = true;
  double alpha = 0.5;
  double tau = 2.0;
  int context_cap = 10000;
};

// ---- tape-level building blocks

struct MainIds {
  Tape::Id W1, b1, W2, b2, W3, b3;
};

/// Marks every tensor of `p` as a parameter; slot i <-> p.values[i].
std::vector<Tape::Id> mark_params(Tape& tape, const ParamSet& p);
MainIds mark_main(Tape& tape, const MainNet& net);

/// `labels` are 0-based classes of the generation rows.
MainIds generate_on_tape(Tape& tape, const HyperNetConfig& cfg, const std::vector<Tape::Id>& phi,
                         Tape::Id x_gen, const std::vector<int>& labels, int K);
/// Regression form: y_std fills the first label slot, class statistics
/// become dataset-level and the last layer is averaged over all rows.
MainIds generate_regression_on_tape(Tape& tape, const HyperNetConfig& cfg,
                                    const std::vector<Tape::Id>& phi, Tape::Id x_gen,
                                    std::span<const double> y_std);

struct DropoutSpec {
  double rate = 0.0;
  Rng* rng = nullptr;
};

/// Returns (H, logits).
std::pair<Tape::Id, Tape::Id> forward_main_on_tape(Tape& tape, const MainIds& net, Tape::Id x,
                                                   DropoutSpec dropout = {});
Tape::Id retrieval_on_tape(Tape& tape, Tape::Id h_query, Tape::Id h_context, const Mat& y_context,
                           double tau);
Tape::Id combine_on_tape(Tape& tape, Tape::Id net_logits, Tape::Id ret_logits, double alpha);

// ---- value-level API

/// `y` holds classes 1..K.
MainNet generate_weights(const HyperNet& phi, const Mat& x_gen, std::span<const double> y, int K);
MainNet adapt_for_regression(const HyperNet& phi, const Mat& x_gen, std::span<const double> y_std);

struct MainOutput {
  Mat H;
  Mat logits;
};
MainOutput forward_main(const MainNet& net, const Mat& x);
Mat retrieval_logits(const Mat& h_query, const Mat& h_context, const Mat& y_context, double tau);
/// (1 - alpha) net + alpha ret, returning the endpoints exactly at alpha 0 and 1.
Mat combined_logits(const Mat& net_logits, const Mat& ret_logits, double alpha);

}  // namespace iltm
