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

// Minimal histogram gradient boosting whose purpose is the sparse leaf
// embedding: every row lands in exactly one leaf per tree, and the
// concatenated leaf one-hots form a binary matrix of width M = sum_t L_t.
#pragma once

#include "iltm/common.hpp"
#include "iltm/container.hpp"
#include "iltm/tabular.hpp"

#include <Eigen/SparseCore>

namespace iltm {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class GbdtLoss { kLogistic, kSoftmax, kSquared };
enum class TreeShape { kDepthwise, kOblivious };

struct GbdtConfig {
  int max_rounds = 100;
  int depth = 6;
  double learning_rate = 0.1;
  int patience = 50;
  double val_fraction = 0.2;
  int max_bins = 256;
  int min_samples_leaf = 1;
  TreeShape shape = TreeShape::kDepthwise;

  /// Depth-6 depthwise trees (the "X" embedding flavor).
  static GbdtConfig variant_x();
  /// Depth-4 oblivious trees (the "C" embedding flavor).
  static GbdtConfig variant_c();
  std::uint64_t hash() const;
  std::string describe() const;
};

/// Binary tree in flat arrays. Node 0 is the root; feature < 0 marks a leaf.
/// A row goes left when x < threshold, or when x is missing and missing_left.
struct Tree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<std::uint8_t> missing_left;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;
  std::vector<int> leaf_ordinal;  // -1 on internal nodes; 0..n_leaves-1 in left-to-right order
  int n_leaves = 0;

  static Tree single_leaf(double value);
  /// Assigns left-to-right leaf ordinals and n_leaves.
  void finalize();
  int leaf_of(const double* row) const;
  double predict(const double* row) const { return value[static_cast<std::size_t>(leaf_node(row))]; }
  int leaf_node(const double* row) const;
};

struct GbdtModel {
  GbdtLoss loss = GbdtLoss::kSquared;
  int outputs_per_round = 1;  // K trees per round for softmax
  int rounds = 0;
  int n_features = 0;
  std::vector<double> base_score;  // one per output
  std::vector<Tree> trees;         // round-major: trees[round * outputs_per_round + k]
  std::vector<int> leaf_offset;    // column offset of each tree inside the embedding
  int total_leaves = 0;            // M
  std::vector<std::vector<double>> cuts;
  std::vector<double> val_history;  // validation loss after each fitted round
  GbdtConfig config;

  int n_trees() const { return static_cast<int>(trees.size()); }
  /// Raw scores (logits or values), N x outputs_per_round.
  Mat predict_raw(const Mat& X) const;

  void save(Container& c, const std::string& prefix) const;
  static GbdtModel load(const Container& c, const std::string& prefix);
};

struct FitSplit {
  std::vector<int> gbdt_fit;
  std::vector<int> hypernet_pool;
};

/// Positions are 0..n_train-1 relative to the train split. Below 2000 rows
/// everything is used for both roles; otherwise a random half (at most
/// 100000 rows) fits the GBDT and the complement is the generation pool.
FitSplit dynamic_fit_split(int n_train, std::uint64_t seed);

/// `y` holds classes 1..K (K >= 1) or reals (K == 0).
GbdtModel fit_gbdt(const Mat& X, std::span<const double> y, int K, const GbdtConfig& config,
                   std::uint64_t seed);

std::vector<int> leaf_indices(const GbdtModel& model, const double* row);
SpMat embed(const GbdtModel& model, const Mat& X);

/// Maps a task feature matrix to GBDT input: categorical missing becomes its
/// own code |V|; unknown categories become missing.
Mat gbdt_input(const Mat& X, std::span<const Column> features);

}  // namespace iltm
