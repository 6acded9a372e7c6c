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

#include "iltm/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace iltm {
namespace {

using Bin = std::uint16_t;
constexpr Bin kMissingBin = std::numeric_limits<Bin>::max();

std::vector<double> compute_cuts(std::vector<double> values, int max_bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> uniq;
  for (double v : values) {
    if (uniq.empty() || v != uniq.back()) uniq.push_back(v);
  }
  std::vector<double> cuts;
  if (uniq.size() <= static_cast<std::size_t>(max_bins)) {
    for (std::size_t i = 1; i < uniq.size(); ++i) {
      double mid = uniq[i - 1] + 0.5 * (uniq[i] - uniq[i - 1]);
      // Guard against midpoints collapsing onto the lower value.
      if (!(mid > uniq[i - 1])) mid = uniq[i];
      cuts.push_back(mid);
    }
    return cuts;
  }
  const std::size_t n = values.size();
  for (int q = 1; q < max_bins; ++q) {
    const double v = values[static_cast<std::size_t>(q) * n / static_cast<std::size_t>(max_bins)];
    if (v > values.front() && (cuts.empty() || v > cuts.back())) cuts.push_back(v);
  }
  return cuts;
}

Bin bin_of(const std::vector<double>& cuts, double x) {
  if (std::isnan(x)) return kMissingBin;
  return static_cast<Bin>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
}

struct SplitChoice {
  bool valid = false;
  int feature = -1;
  int bin = -1;
  bool missing_left = true;
  double gain = -std::numeric_limits<double>::infinity();
};

struct NodeStats {
  double g = 0.0;
  double g2 = 0.0;
  std::size_t n = 0;
};

// Per-feature histograms of gradient sums and counts for one row set.
struct Histogram {
  std::vector<double> g;
  std::vector<std::size_t> n;
  double miss_g = 0.0;
  std::size_t miss_n = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<Bin>>& bins, const std::vector<std::vector<double>>& cuts,
              const GbdtConfig& cfg)
      : bins_(bins), cuts_(cuts), cfg_(cfg) {}

  // Returns the tree and, for each training row in `rows`, its leaf node id.
  Tree build(const std::vector<int>& rows, std::span<const double> grad, std::vector<int>& row_node) {
    grad_ = grad;
    tree_ = Tree{};
    row_node.assign(grad.size(), -1);
    if (cfg_.shape == TreeShape::kOblivious) {
      build_oblivious(rows, row_node);
    } else {
      grow(new_node(), rows, 0, row_node);
    }
    tree_.finalize();
    return std::move(tree_);
  }

 private:
  int new_node() {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.missing_left.push_back(1);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.value.push_back(0.0);
    return static_cast<int>(tree_.feature.size()) - 1;
  }

  NodeStats stats(const std::vector<int>& rows) const {
    NodeStats s;
    for (int r : rows) {
      const double g = grad_[static_cast<std::size_t>(r)];
      s.g += g;
      s.g2 += g * g;
    }
    s.n = rows.size();
    return s;
  }

  Histogram histogram(const std::vector<int>& rows, int f) const {
    Histogram h;
    const std::size_t nb = cuts_[static_cast<std::size_t>(f)].size() + 1;
    h.g.assign(nb, 0.0);
    h.n.assign(nb, 0);
    const auto& col = bins_[static_cast<std::size_t>(f)];
    for (int r : rows) {
      const Bin b = col[static_cast<std::size_t>(r)];
      const double g = grad_[static_cast<std::size_t>(r)];
      if (b == kMissingBin) {
        h.miss_g += g;
        ++h.miss_n;
      } else {
        h.g[b] += g;
        ++h.n[b];
      }
    }
    return h;
  }

  static double score(double g, std::size_t n) { return n == 0 ? 0.0 : g * g / static_cast<double>(n); }

  // Evaluates every (bin, missing direction) of one feature; gains add into
  // `gain_acc` so oblivious levels can sum over nodes.
  void scan(const Histogram& h, double parent_g, std::size_t parent_n, std::vector<double>& gain_left,
            std::vector<double>& gain_right, std::vector<std::uint8_t>& separates, bool require_min) const {
    const std::size_t nb = h.g.size();
    const double parent = score(parent_g, parent_n);
    const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, cfg_.min_samples_leaf));
    double gl = 0.0;
    std::size_t nl = 0;
    const double nm_g = parent_g - h.miss_g;
    const std::size_t nm_n = parent_n - h.miss_n;
    for (std::size_t b = 0; b + 1 < nb; ++b) {
      gl += h.g[b];
      nl += h.n[b];
      const double gr = nm_g - gl;
      const std::size_t nr = nm_n - nl;
      // Missing rows to the left.
      {
        const std::size_t l = nl + h.miss_n;
        const bool ok = l >= min_leaf && nr >= min_leaf;
        if (ok || !require_min) {
          gain_left[b] += score(gl + h.miss_g, l) + score(gr, nr) - parent;
          if (l > 0 && nr > 0) separates[2 * b] = 1;
        } else {
          gain_left[b] = -std::numeric_limits<double>::infinity();
        }
      }
      // Missing rows to the right.
      {
        const std::size_t r = nr + h.miss_n;
        const bool ok = nl >= min_leaf && r >= min_leaf;
        if (ok || !require_min) {
          gain_right[b] += score(gl, nl) + score(gr + h.miss_g, r) - parent;
          if (nl > 0 && r > 0) separates[2 * b + 1] = 1;
        } else {
          gain_right[b] = -std::numeric_limits<double>::infinity();
        }
      }
    }
  }

  // Strictly-greater comparison keeps the lowest feature, then lowest bin,
  // then missing-left on ties.
  static void consider(SplitChoice& best, int f, const std::vector<double>& gl,
                       const std::vector<double>& gr, const std::vector<std::uint8_t>& sep) {
    for (std::size_t b = 0; b < gl.size(); ++b) {
      if (sep[2 * b] && gl[b] > best.gain) best = {true, f, static_cast<int>(b), true, gl[b]};
      if (sep[2 * b + 1] && gr[b] > best.gain) best = {true, f, static_cast<int>(b), false, gr[b]};
    }
  }

  bool should_split(const SplitChoice& best, const NodeStats& s) const {
    if (!best.valid) return false;
    const double tol = 1e-10 * (s.g2 + 1e-300);
    const bool impure = s.g2 - score(s.g, s.n) > tol;
    return impure && best.gain >= -tol;
  }

  void partition(const std::vector<int>& rows, const SplitChoice& sc, std::vector<int>& left,
                 std::vector<int>& right) const {
    const auto& col = bins_[static_cast<std::size_t>(sc.feature)];
    for (int r : rows) {
      const Bin b = col[static_cast<std::size_t>(r)];
      const bool go_left = b == kMissingBin ? sc.missing_left : b <= sc.bin;
      (go_left ? left : right).push_back(r);
    }
  }

  void make_internal(int node, const SplitChoice& sc) {
    tree_.feature[static_cast<std::size_t>(node)] = sc.feature;
    tree_.threshold[static_cast<std::size_t>(node)] =
        cuts_[static_cast<std::size_t>(sc.feature)][static_cast<std::size_t>(sc.bin)];
    tree_.missing_left[static_cast<std::size_t>(node)] = sc.missing_left ? 1 : 0;
  }

  void make_leaf(int node, const std::vector<int>& rows, std::vector<int>& row_node) {
    const NodeStats s = stats(rows);
    tree_.value[static_cast<std::size_t>(node)] =
        s.n == 0 ? 0.0 : -cfg_.learning_rate * s.g / static_cast<double>(s.n);
    for (int r : rows) row_node[static_cast<std::size_t>(r)] = node;
  }

  void grow(int node, const std::vector<int>& rows, int depth, std::vector<int>& row_node) {
    const NodeStats s = stats(rows);
    SplitChoice best;
    if (depth < cfg_.depth && s.n >= 2 * static_cast<std::size_t>(std::max(1, cfg_.min_samples_leaf))) {
      for (int f = 0; f < static_cast<int>(bins_.size()); ++f) {
        const std::size_t nb = cuts_[static_cast<std::size_t>(f)].size() + 1;
        if (nb < 2) continue;
        const Histogram h = histogram(rows, f);
        std::vector<double> gl(nb - 1, 0.0), gr(nb - 1, 0.0);
        std::vector<std::uint8_t> sep(2 * (nb - 1), 0);
        scan(h, s.g, s.n, gl, gr, sep, true);
        consider(best, f, gl, gr, sep);
      }
    }
    if (!should_split(best, s)) {
      make_leaf(node, rows, row_node);
      return;
    }
    std::vector<int> left, right;
    partition(rows, best, left, right);
    make_internal(node, best);
    const int l = new_node();
    const int r = new_node();
    tree_.left[static_cast<std::size_t>(node)] = l;
    tree_.right[static_cast<std::size_t>(node)] = r;
    grow(l, left, depth + 1, row_node);
    grow(r, right, depth + 1, row_node);
  }

  void build_oblivious(const std::vector<int>& rows, std::vector<int>& row_node) {
    std::vector<std::pair<int, std::vector<int>>> level{{new_node(), rows}};
    for (int depth = 0; depth < cfg_.depth; ++depth) {
      SplitChoice best;
      bool any_impure = false;
      std::vector<NodeStats> node_stats;
      for (const auto& [node, node_rows] : level) {
        node_stats.push_back(stats(node_rows));
        const auto& s = node_stats.back();
        any_impure |= s.g2 - score(s.g, s.n) > 1e-10 * (s.g2 + 1e-300);
      }
      if (!any_impure) break;
      for (int f = 0; f < static_cast<int>(bins_.size()); ++f) {
        const std::size_t nb = cuts_[static_cast<std::size_t>(f)].size() + 1;
        if (nb < 2) continue;
        std::vector<double> gl(nb - 1, 0.0), gr(nb - 1, 0.0);
        std::vector<std::uint8_t> sep(2 * (nb - 1), 0);
        for (std::size_t i = 0; i < level.size(); ++i) {
          const Histogram h = histogram(level[i].second, f);
          scan(h, node_stats[i].g, node_stats[i].n, gl, gr, sep, false);
        }
        consider(best, f, gl, gr, sep);
      }
      if (!best.valid || best.gain < -1e-10) break;
      std::vector<std::pair<int, std::vector<int>>> next;
      for (auto& [node, node_rows] : level) {
        std::vector<int> left, right;
        partition(node_rows, best, left, right);
        make_internal(node, best);
        const int l = new_node();
        const int r = new_node();
        tree_.left[static_cast<std::size_t>(node)] = l;
        tree_.right[static_cast<std::size_t>(node)] = r;
        next.emplace_back(l, std::move(left));
        next.emplace_back(r, std::move(right));
      }
      level = std::move(next);
    }
    for (const auto& [node, node_rows] : level) make_leaf(node, node_rows, row_node);
  }

  const std::vector<std::vector<Bin>>& bins_;
  const std::vector<std::vector<double>>& cuts_;
  const GbdtConfig& cfg_;
  std::span<const double> grad_;
  Tree tree_;
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Mean loss of raw scores F against labels for the given rows.
double mean_loss(GbdtLoss loss, const Mat& F, std::span<const double> y, const std::vector<int>& rows) {
  double total = 0.0;
  for (int r : rows) {
    const auto yi = y[static_cast<std::size_t>(r)];
    switch (loss) {
      case GbdtLoss::kSquared: {
        const double d = F(r, 0) - yi;
        total += d * d;
        break;
      }
      case GbdtLoss::kLogistic: {
        const double f = F(r, 0);
        const double t = yi == 2 ? 1.0 : 0.0;
        // log(1 + e^f) - t f, stable.
        total += std::max(f, 0.0) + std::log1p(std::exp(-std::abs(f))) - t * f;
        break;
      }
      case GbdtLoss::kSoftmax: {
        const double mx = F.row(r).maxCoeff();
        const double lse = mx + std::log((F.row(r).array() - mx).exp().sum());
        total += lse - F(r, static_cast<Index>(yi) - 1);
        break;
      }
    }
  }
  return rows.empty() ? 0.0 : total / static_cast<double>(rows.size());
}

void gradients(GbdtLoss loss, const Mat& F, std::span<const double> y, const std::vector<int>& rows,
               Mat& G) {
  for (int r : rows) {
    const auto yi = y[static_cast<std::size_t>(r)];
    switch (loss) {
      case GbdtLoss::kSquared:
        G(r, 0) = F(r, 0) - yi;
        break;
      case GbdtLoss::kLogistic:
        G(r, 0) = sigmoid(F(r, 0)) - (yi == 2 ? 1.0 : 0.0);
        break;
      case GbdtLoss::kSoftmax: {
        const double mx = F.row(r).maxCoeff();
        RowVec p = (F.row(r).array() - mx).exp();
        p /= p.sum();
        p(static_cast<Index>(yi) - 1) -= 1.0;
        G.row(r) = p;
        break;
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- config

GbdtConfig GbdtConfig::variant_x() {
  GbdtConfig c;
  c.depth = 6;
  c.shape = TreeShape::kDepthwise;
  return c;
}

GbdtConfig GbdtConfig::variant_c() {
  GbdtConfig c;
  c.depth = 4;
  c.shape = TreeShape::kOblivious;
  return c;
}

std::uint64_t GbdtConfig::hash() const {
  std::uint64_t h = 0x1234;
  auto mix = [&](std::uint64_t v) { h = mix_seed(h ^ v); };
  mix(static_cast<std::uint64_t>(max_rounds));
  mix(static_cast<std::uint64_t>(depth));
  mix(std::bit_cast<std::uint64_t>(learning_rate));
  mix(static_cast<std::uint64_t>(patience));
  mix(std::bit_cast<std::uint64_t>(val_fraction));
  mix(static_cast<std::uint64_t>(max_bins));
  mix(static_cast<std::uint64_t>(min_samples_leaf));
  mix(static_cast<std::uint64_t>(shape));
  return h;
}

std::string GbdtConfig::describe() const {
  std::ostringstream s;
  s << "max_rounds=" << max_rounds << " depth=" << depth << " learning_rate=" << learning_rate
    << " patience=" << patience << " val_fraction=" << val_fraction << " max_bins=" << max_bins
    << " shape=" << (shape == TreeShape::kOblivious ? "oblivious" : "depthwise");
  return s.str();
}

// ---------------------------------------------------------------- tree

Tree Tree::single_leaf(double value) {
  Tree t;
  t.feature = {-1};
  t.threshold = {0.0};
  t.missing_left = {1};
  t.left = {-1};
  t.right = {-1};
  t.value = {value};
  t.finalize();
  return t;
}

void Tree::finalize() {
  leaf_ordinal.assign(feature.size(), -1);
  n_leaves = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    const auto u = static_cast<std::size_t>(node);
    if (feature[u] < 0) {
      leaf_ordinal[u] = n_leaves++;
    } else {
      stack.push_back(right[u]);
      stack.push_back(left[u]);
    }
  }
}

int Tree::leaf_node(const double* row) const {
  int node = 0;
  while (feature[static_cast<std::size_t>(node)] >= 0) {
    const auto u = static_cast<std::size_t>(node);
    const double x = row[feature[u]];
    const bool go_left = std::isnan(x) ? missing_left[u] != 0 : x < threshold[u];
    node = go_left ? left[u] : right[u];
  }
  return node;
}

int Tree::leaf_of(const double* row) const {
  return leaf_ordinal[static_cast<std::size_t>(leaf_node(row))];
}

// ---------------------------------------------------------------- model

Mat GbdtModel::predict_raw(const Mat& X) const {
  Mat F(X.rows(), outputs_per_round);
  for (Index r = 0; r < X.rows(); ++r) {
    for (int k = 0; k < outputs_per_round; ++k) F(r, k) = base_score[static_cast<std::size_t>(k)];
    const double* row = X.row(r).data();
    for (int t = 0; t < n_trees(); ++t) {
      F(r, t % outputs_per_round) += trees[static_cast<std::size_t>(t)].predict(row);
    }
  }
  return F;
}

FitSplit dynamic_fit_split(int n_train, std::uint64_t seed) {
  if (n_train < 1) throw DataError("dynamic_fit_split: empty train split");
  FitSplit split;
  std::vector<int> all(static_cast<std::size_t>(n_train));
  std::iota(all.begin(), all.end(), 0);
  if (n_train < 2000) {
    split.gbdt_fit = all;
    split.hypernet_pool = all;
    return split;
  }
  Rng rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  const int fit = std::min(n_train / 2, 100000);
  split.gbdt_fit.assign(all.begin(), all.begin() + fit);
  split.hypernet_pool.assign(all.begin() + fit, all.end());
  std::sort(split.gbdt_fit.begin(), split.gbdt_fit.end());
  std::sort(split.hypernet_pool.begin(), split.hypernet_pool.end());
  return split;
}

GbdtModel fit_gbdt(const Mat& X, std::span<const double> y, int K, const GbdtConfig& cfg,
                   std::uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  if (static_cast<std::size_t>(n) != y.size()) throw DataError("fit_gbdt: label count mismatch");
  if (n < 1) throw DataError("fit_gbdt: no rows");
  if (K > 0) {
    for (double v : y) {
      if (!(v >= 1 && v <= K) || v != std::floor(v)) throw DataError("fit_gbdt: label outside 1..K");
    }
  }
  GbdtModel model;
  model.config = cfg;
  model.n_features = static_cast<int>(X.cols());
  model.loss = K == 0 ? GbdtLoss::kSquared : (K <= 2 ? GbdtLoss::kLogistic : GbdtLoss::kSoftmax);
  model.outputs_per_round = model.loss == GbdtLoss::kSoftmax ? K : 1;
  const int outs = model.outputs_per_round;

  std::set<double> classes(y.begin(), y.end());
  const bool degenerate = K > 0 && classes.size() < 2;

  // Base scores.
  model.base_score.assign(static_cast<std::size_t>(outs), 0.0);
  if (model.loss == GbdtLoss::kSquared) {
    model.base_score[0] = std::accumulate(y.begin(), y.end(), 0.0) / n;
  } else if (model.loss == GbdtLoss::kLogistic) {
    double p = 0.0;
    for (double v : y) p += v == 2 ? 1.0 : 0.0;
    p = std::clamp(p / n, 1e-6, 1.0 - 1e-6);
    model.base_score[0] = std::log(p / (1.0 - p));
  } else {
    std::vector<double> prior(static_cast<std::size_t>(K), 0.0);
    for (double v : y) prior[static_cast<std::size_t>(v) - 1] += 1.0;
    for (int k = 0; k < K; ++k) {
      model.base_score[static_cast<std::size_t>(k)] =
          std::log(std::max(prior[static_cast<std::size_t>(k)] / n, 1e-6));
    }
  }

  // Bins from all fit rows.
  model.cuts.resize(static_cast<std::size_t>(X.cols()));
  std::vector<std::vector<Bin>> bins(static_cast<std::size_t>(X.cols()));
  std::vector<double> vals;
  for (Index f = 0; f < X.cols(); ++f) {
    vals.clear();
    for (Index r = 0; r < X.rows(); ++r) {
      if (!std::isnan(X(r, f))) vals.push_back(X(r, f));
    }
    model.cuts[static_cast<std::size_t>(f)] = compute_cuts(vals, std::max(2, cfg.max_bins));
    auto& col = bins[static_cast<std::size_t>(f)];
    col.resize(static_cast<std::size_t>(n));
    for (Index r = 0; r < X.rows(); ++r) col[static_cast<std::size_t>(r)] = bin_of(model.cuts[static_cast<std::size_t>(f)], X(r, f));
  }

  if (degenerate || cfg.max_rounds < 1) {
    for (int k = 0; k < outs; ++k) model.trees.push_back(Tree::single_leaf(0.0));
    model.rounds = 1;
  } else {
    // Hold-out rows for early stopping.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    int n_val = cfg.val_fraction > 0 ? static_cast<int>(std::floor(cfg.val_fraction * n)) : 0;
    if (n_val < 1 || n - n_val < 2) n_val = 0;
    std::vector<int> train_rows, val_rows;
    if (n_val > 0) {
      Rng rng(derive_seed(seed, 0x6764));
      std::shuffle(order.begin(), order.end(), rng);
      val_rows.assign(order.begin(), order.begin() + n_val);
      train_rows.assign(order.begin() + n_val, order.end());
      std::sort(val_rows.begin(), val_rows.end());
      std::sort(train_rows.begin(), train_rows.end());
    } else {
      train_rows = order;
    }

    Mat F(n, outs);
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k < outs; ++k) F(r, k) = model.base_score[static_cast<std::size_t>(k)];
    }
    Mat G = Mat::Zero(n, outs);
    TreeBuilder builder(bins, model.cuts, cfg);
    std::vector<double> g(static_cast<std::size_t>(n), 0.0);
    std::vector<int> row_node;
    double best_loss = std::numeric_limits<double>::infinity();
    int best_round = 0;
    for (int round = 1; round <= cfg.max_rounds; ++round) {
      gradients(model.loss, F, y, train_rows, G);
      for (int k = 0; k < outs; ++k) {
        for (int r : train_rows) g[static_cast<std::size_t>(r)] = G(r, k);
        Tree tree = builder.build(train_rows, g, row_node);
        for (int r : train_rows) F(r, k) += tree.value[static_cast<std::size_t>(row_node[static_cast<std::size_t>(r)])];
        for (int r : val_rows) F(r, k) += tree.predict(X.row(r).data());
        model.trees.push_back(std::move(tree));
      }
      model.rounds = round;
      if (val_rows.empty()) continue;
      const double loss = mean_loss(model.loss, F, y, val_rows);
      model.val_history.push_back(loss);
      if (loss < best_loss) {
        best_loss = loss;
        best_round = round;
      } else if (round - best_round >= cfg.patience) {
        break;
      }
    }
    if (!val_rows.empty()) {
      model.trees.resize(static_cast<std::size_t>(best_round * outs));
      model.rounds = best_round;
    }
  }

  int offset = 0;
  for (const auto& t : model.trees) {
    model.leaf_offset.push_back(offset);
    offset += t.n_leaves;
  }
  model.total_leaves = offset;
  return model;
}

std::vector<int> leaf_indices(const GbdtModel& model, const double* row) {
  std::vector<int> out;
  out.reserve(model.trees.size());
  for (const auto& t : model.trees) out.push_back(t.leaf_of(row));
  return out;
}

SpMat embed(const GbdtModel& model, const Mat& X) {
  if (X.cols() != model.n_features) throw DataError("embed: feature width mismatch");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(X.rows()) * model.trees.size());
  for (Index r = 0; r < X.rows(); ++r) {
    const double* row = X.row(r).data();
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
      trip.emplace_back(static_cast<int>(r), model.leaf_offset[t] + model.trees[t].leaf_of(row), 1.0);
    }
  }
  SpMat out(X.rows(), model.total_leaves);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Mat gbdt_input(const Mat& X, std::span<const Column> features) {
  Mat out = X;
  for (std::size_t c = 0; c < features.size(); ++c) {
    if (features[c].kind != ColumnKind::kCategorical) continue;
    const double missing_code = static_cast<double>(features[c].vocabulary.size());
    for (Index r = 0; r < X.rows(); ++r) {
      double& v = out(r, static_cast<Index>(c));
      if (std::isnan(v)) v = missing_code;
      else if (v == kUnknownCategory) v = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

// ---------------------------------------------------------------- persistence

void GbdtModel::save(Container& c, const std::string& p) const {
  c.put_scalar(p + "loss", static_cast<double>(loss));
  c.put_scalar(p + "outputs_per_round", outputs_per_round);
  c.put_scalar(p + "rounds", rounds);
  c.put_scalar(p + "n_features", n_features);
  c.put(p + "base_score", base_score);
  c.put(p + "val_history", val_history);
  std::vector<int> sizes, feature, left, right, miss;
  std::vector<double> threshold, value;
  for (const auto& t : trees) {
    sizes.push_back(static_cast<int>(t.feature.size()));
    feature.insert(feature.end(), t.feature.begin(), t.feature.end());
    left.insert(left.end(), t.left.begin(), t.left.end());
    right.insert(right.end(), t.right.begin(), t.right.end());
    for (auto m : t.missing_left) miss.push_back(m);
    threshold.insert(threshold.end(), t.threshold.begin(), t.threshold.end());
    value.insert(value.end(), t.value.begin(), t.value.end());
  }
  c.put_ints(p + "tree_sizes", sizes);
  c.put_ints(p + "feature", feature);
  c.put_ints(p + "left", left);
  c.put_ints(p + "right", right);
  c.put_ints(p + "missing_left", miss);
  c.put(p + "threshold", threshold);
  c.put(p + "value", value);
  std::vector<int> cut_sizes;
  std::vector<double> cut_values;
  for (const auto& cs : cuts) {
    cut_sizes.push_back(static_cast<int>(cs.size()));
    cut_values.insert(cut_values.end(), cs.begin(), cs.end());
  }
  c.put_ints(p + "cut_sizes", cut_sizes);
  c.put(p + "cuts", cut_values);
  c.put(p + "config",
        std::vector<double>{static_cast<double>(config.max_rounds), static_cast<double>(config.depth),
                            config.learning_rate, static_cast<double>(config.patience),
                            config.val_fraction, static_cast<double>(config.max_bins),
                            static_cast<double>(config.min_samples_leaf),
                            static_cast<double>(config.shape)});
}

GbdtModel GbdtModel::load(const Container& c, const std::string& p) {
  GbdtModel m;
  m.loss = static_cast<GbdtLoss>(static_cast<int>(c.get_scalar(p + "loss")));
  m.outputs_per_round = static_cast<int>(c.get_scalar(p + "outputs_per_round"));
  m.rounds = static_cast<int>(c.get_scalar(p + "rounds"));
  m.n_features = static_cast<int>(c.get_scalar(p + "n_features"));
  m.base_score = c.get_vec(p + "base_score");
  m.val_history = c.get_vec(p + "val_history");
  const auto sizes = c.get_ints(p + "tree_sizes");
  const auto feature = c.get_ints(p + "feature");
  const auto left = c.get_ints(p + "left");
  const auto right = c.get_ints(p + "right");
  const auto miss = c.get_ints(p + "missing_left");
  const auto threshold = c.get_vec(p + "threshold");
  const auto value = c.get_vec(p + "value");
  std::size_t at = 0;
  int offset = 0;
  for (int s : sizes) {
    Tree t;
    const auto b = static_cast<std::ptrdiff_t>(at);
    const auto e = static_cast<std::ptrdiff_t>(at + static_cast<std::size_t>(s));
    t.feature.assign(feature.begin() + b, feature.begin() + e);
    t.left.assign(left.begin() + b, left.begin() + e);
    t.right.assign(right.begin() + b, right.begin() + e);
    for (auto it = miss.begin() + b; it != miss.begin() + e; ++it) t.missing_left.push_back(static_cast<std::uint8_t>(*it));
    t.threshold.assign(threshold.begin() + b, threshold.begin() + e);
    t.value.assign(value.begin() + b, value.begin() + e);
    t.finalize();
    m.leaf_offset.push_back(offset);
    offset += t.n_leaves;
    m.trees.push_back(std::move(t));
    at += static_cast<std::size_t>(s);
  }
  m.total_leaves = offset;
  const auto cut_sizes = c.get_ints(p + "cut_sizes");
  const auto cut_values = c.get_vec(p + "cuts");
  at = 0;
  for (int s : cut_sizes) {
    m.cuts.emplace_back(cut_values.begin() + static_cast<std::ptrdiff_t>(at),
                        cut_values.begin() + static_cast<std::ptrdiff_t>(at + static_cast<std::size_t>(s)));
    at += static_cast<std::size_t>(s);
  }
  const auto cfg = c.get_vec(p + "config");
  m.config.max_rounds = static_cast<int>(cfg[0]);
  m.config.depth = static_cast<int>(cfg[1]);
  m.config.learning_rate = cfg[2];
  m.config.patience = static_cast<int>(cfg[3]);
  m.config.val_fraction = cfg[4];
  m.config.max_bins = static_cast<int>(cfg[5]);
  m.config.min_samples_leaf = static_cast<int>(cfg[6]);
  m.config.shape = static_cast<TreeShape>(static_cast<int>(cfg[7]));
  return m;
}

}  // namespace iltm
