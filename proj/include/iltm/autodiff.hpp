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


// Reverse-mode differentiation over the small operator set used by the
// hypernetwork, the generated network and their losses.
#pragma once

#include "iltm/common.hpp"

#include <functional>
#include <string>

namespace iltm {

/// Named dense parameter tensors, flattened in declaration order.
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Mat> values;

  std::size_t size() const { return values.size(); }
  Index count() const;
  int index_of(const std::string& name) const;
  Vec flatten() const;
  void assign(const Vec& flat);
  ParamSet zeros_like() const;
};

class Tape {
 public:
  using Id = int;

  Id constant(Mat value);
  /// Leaf whose gradient is collected by grad(); `slot` names its position
  /// in the caller's ParamSet.
  Id param(const Mat& value, int slot);

  const Mat& value(Id id) const { return nodes_.at(static_cast<std::size_t>(id)).value; }
  Index rows(Id id) const { return value(id).rows(); }
  Index cols(Id id) const { return value(id).cols(); }

  Id affine(Id x, Id w, Id b);  // x w^T + b, b is 1 x out
  Id matmul(Id a, Id b);
  Id matmul_nt(Id a, Id b);  // a b^T
  Id transpose(Id x);
  Id relu(Id x);
  Id add(Id a, Id b);
  Id add_row(Id x, Id row);  // broadcast a 1 x c row over x
  Id scale(Id x, double c);
  Id mul_const(Id x, const Mat& mask);
  Id concat_cols(const std::vector<Id>& parts);
  Id slice_cols(Id x, Index begin, Index end);
  Id reshape(Id x, Index rows, Index cols);
  Id mean_rows(Id x);
  Id repeat_rows(Id row, Index n);
  /// K x c class means; classes without rows take the overall mean.
  Id group_mean(Id x, const std::vector<int>& group, int n_groups);
  Id gather_rows(Id x, const std::vector<int>& rows);
  /// Each row divided by (its L2 norm + 1e-12).
  Id row_normalize(Id x);
  /// Each row shifted to zero mean and scaled to unit variance (+eps).
  Id standardize_rows(Id x, double eps = 1e-6);
  /// Mean softmax cross-entropy against a constant one-hot target.
  Id ce_loss(Id logits, const Mat& targets);
  Id mse_loss(Id pred, const Mat& target);

  /// Reverse pass from a 1x1 node. Gradients accumulate in creation order,
  /// so repeated calls are bit-identical.
  void backward(Id loss);
  /// Gradient of a marked parameter; throws for unmarked nodes.
  const Mat& grad(Id id) const;
  /// Adds every parameter gradient into `out` (indexed by slot).
  void accumulate_grads(ParamSet& out) const;

  std::size_t size() const { return nodes_.size(); }

  /// Test hook: drops the ReLU mask in the backward pass.
  static void set_relu_mutation(bool on);

 private:
  struct Node {
    Mat value;
    Mat grad;
    int slot = -1;
    bool needs_grad = false;
    std::function<void(std::vector<Node>&, const Mat&)> backward;
  };
  Id push(Mat value, bool needs_grad, std::function<void(std::vector<Node>&, const Mat&)> bw);
  bool needs(Id id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  static Mat& g(std::vector<Node>& n, Id id);

  std::vector<Node> nodes_;
};

/// Max relative error ||a - f||_inf / max(||a||_inf, ||f||_inf, tiny) between an
/// analytic gradient and central differences of `f` at `p`. With probes > 0,
/// compares directional derivatives along that many random unit directions.
struct FiniteDiffReport {
  double max_rel_error = 0.0;
  Index coordinates = 0;
};
FiniteDiffReport finite_diff_check(const std::function<double(const Vec&)>& f, const Vec& p,
                                   const Vec& analytic, double step, int probes = 0,
                                   std::uint64_t seed = 0);

}  // namespace iltm
