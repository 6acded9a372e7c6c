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


#include "iltm/autodiff.hpp"

#include <atomic>
#include <cmath>

namespace iltm {
namespace {

std::atomic<bool> g_relu_mutation{false};

}  // namespace

Index ParamSet::count() const {
  Index n = 0;
  for (const auto& v : values) n += v.size();
  return n;
}

int ParamSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  throw DataError("no parameter named '" + name + "'");
}

Vec ParamSet::flatten() const {
  Vec out(count());
  Index at = 0;
  for (const auto& v : values) {
    out.segment(at, v.size()) = Eigen::Map<const Vec>(v.data(), v.size());
    at += v.size();
  }
  return out;
}

void ParamSet::assign(const Vec& flat) {
  if (flat.size() != count()) throw DataError("ParamSet::assign: size mismatch");
  Index at = 0;
  for (auto& v : values) {
    Eigen::Map<Vec>(v.data(), v.size()) = flat.segment(at, v.size());
    at += v.size();
  }
}

ParamSet ParamSet::zeros_like() const {
  ParamSet z;
  z.names = names;
  for (const auto& v : values) z.values.push_back(Mat::Zero(v.rows(), v.cols()));
  return z;
}

void Tape::set_relu_mutation(bool on) { g_relu_mutation = on; }

Mat& Tape::g(std::vector<Node>& n, Id id) {
  auto& node = n[static_cast<std::size_t>(id)];
  if (node.grad.size() == 0) node.grad = Mat::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

Tape::Id Tape::push(Mat value, bool needs_grad, std::function<void(std::vector<Node>&, const Mat&)> bw) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.backward = std::move(bw);
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size()) - 1;
}

Tape::Id Tape::constant(Mat value) { return push(std::move(value), false, nullptr); }

Tape::Id Tape::param(const Mat& value, int slot) {
  const Id id = push(value, true, [](std::vector<Node>&, const Mat&) {});
  nodes_.back().slot = slot;
  return id;
}

#define ILTM_NEEDS(id) (n[static_cast<std::size_t>(id)].needs_grad)
#define ILTM_VAL(id) (n[static_cast<std::size_t>(id)].value)

Tape::Id Tape::affine(Id x, Id w, Id b) {
  if (cols(x) != cols(w) || rows(b) != 1 || cols(b) != rows(w)) throw DataError("affine: shape mismatch");
  Mat out = value(x) * value(w).transpose();
  out.rowwise() += value(b).row(0);
  return push(std::move(out), needs(x) || needs(w) || needs(b), [=](std::vector<Node>& n, const Mat& go) {
    if (ILTM_NEEDS(x)) g(n, x).noalias() += go * ILTM_VAL(w);
    if (ILTM_NEEDS(w)) g(n, w).noalias() += go.transpose() * ILTM_VAL(x);
    if (ILTM_NEEDS(b)) g(n, b) += go.colwise().sum();
  });
}

Tape::Id Tape::matmul(Id a, Id b) {
  if (cols(a) != rows(b)) throw DataError("matmul: shape mismatch");
  return push(value(a) * value(b), needs(a) || needs(b), [=](std::vector<Node>& n, const Mat& go) {
    if (ILTM_NEEDS(a)) g(n, a).noalias() += go * ILTM_VAL(b).transpose();
    if (ILTM_NEEDS(b)) g(n, b).noalias() += ILTM_VAL(a).transpose() * go;
  });
}

Tape::Id Tape::matmul_nt(Id a, Id b) {
  if (cols(a) != cols(b)) throw DataError("matmul_nt: shape mismatch");
  return push(value(a) * value(b).transpose(), needs(a) || needs(b), [=](std::vector<Node>& n, const Mat& go) {
    if (ILTM_NEEDS(a)) g(n, a).noalias() += go * ILTM_VAL(b);
    if (ILTM_NEEDS(b)) g(n, b).noalias() += go.transpose() * ILTM_VAL(a);
  });
}

Tape::Id Tape::transpose(Id x) {
  return push(value(x).transpose(), needs(x), [=](std::vector<Node>& n, const Mat& go) {
    g(n, x) += go.transpose();
  });
}

Tape::Id Tape::relu(Id x) {
  return push(value(x).cwiseMax(0.0), needs(x), [=](std::vector<Node>& n, const Mat& go) {
    if (g_relu_mutation) {
      g(n, x) += go;
    } else {
      g(n, x) += (ILTM_VAL(x).array() > 0.0).select(go, 0.0);
    }
  });
}

Tape::Id Tape::add(Id a, Id b) {
  if (rows(a) != rows(b) || cols(a) != cols(b)) throw DataError("add: shape mismatch");
  return push(value(a) + value(b), needs(a) || needs(b), [=](std::vector<Node>& n, const Mat& go) {
    if (ILTM_NEEDS(a)) g(n, a) += go;
    if (ILTM_NEEDS(b)) g(n, b) += go;
  });
}

Tape::Id Tape::add_row(Id x, Id row) {
  if (rows(row) != 1 || cols(row) != cols(x)) throw DataError("add_row: shape mismatch");
  Mat out = value(x);
  out.rowwise() += value(row).row(0);
  return push(std::move(out), needs(x) || needs(row), [=](std::vector<Node>& n, const Mat& go) {
    if (ILTM_NEEDS(x)) g(n, x) += go;
    if (ILTM_NEEDS(row)) g(n, row) += go.colwise().sum();
  });
}

Tape::Id Tape::scale(Id x, double c) {
  return push(value(x) * c, needs(x), [=](std::vector<Node>& n, const Mat& go) { g(n, x) += go * c; });
}

Tape::Id Tape::mul_const(Id x, const Mat& mask) {
  if (mask.rows() != rows(x) || mask.cols() != cols(x)) throw DataError("mul_const: shape mismatch");
  return push(value(x).cwiseProduct(mask), needs(x), [=](std::vector<Node>& n, const Mat& go) {
    g(n, x) += go.cwiseProduct(mask);
  });
}

Tape::Id Tape::concat_cols(const std::vector<Id>& parts) {
  if (parts.empty()) throw DataError("concat_cols: no inputs");
  const Index r = rows(parts[0]);
  Index total = 0;
  bool any = false;
  for (Id p : parts) {
    if (rows(p) != r) throw DataError("concat_cols: row mismatch");
    total += cols(p);
    any |= needs(p);
  }
  Mat out(r, total);
  Index at = 0;
  for (Id p : parts) {
    out.middleCols(at, cols(p)) = value(p);
    at += cols(p);
  }
  return push(std::move(out), any, [=](std::vector<Node>& n, const Mat& go) {
    Index off = 0;
    for (Id p : parts) {
      const Index c = ILTM_VAL(p).cols();
      if (ILTM_NEEDS(p)) g(n, p) += go.middleCols(off, c);
      off += c;
    }
  });
}

Tape::Id Tape::slice_cols(Id x, Index begin, Index end) {
  if (begin < 0 || end > cols(x) || begin >= end) throw DataError("slice_cols: bad range");
  return push(value(x).middleCols(begin, end - begin), needs(x), [=](std::vector<Node>& n, const Mat& go) {
    g(n, x).middleCols(begin, end - begin) += go;
  });
}

Tape::Id Tape::reshape(Id x, Index r, Index c) {
  if (r * c != value(x).size()) throw DataError("reshape: size mismatch");
  Mat out = Eigen::Map<const Mat>(value(x).data(), r, c);
  const Index xr = rows(x);
  const Index xc = cols(x);
  return push(std::move(out), needs(x), [=](std::vector<Node>& n, const Mat& go) {
    g(n, x) += Eigen::Map<const Mat>(go.data(), xr, xc);
  });
}

Tape::Id Tape::mean_rows(Id x) {
  const double inv = 1.0 / static_cast<double>(rows(x));
  return push(value(x).colwise().sum() * inv, needs(x), [=](std::vector<Node>& n, const Mat& go) {
    g(n, x).rowwise() += go.row(0) * inv;
  });
}

Tape::Id Tape::repeat_rows(Id row, Index count) {
  if (rows(row) != 1) throw DataError("repeat_rows: expects a single row");
  Mat out = value(row).replicate(count, 1);
  return push(std::move(out), needs(row), [=](std::vector<Node>& n, const Mat& go) {
    g(n, row) += go.colwise().sum();
  });
}

Tape::Id Tape::group_mean(Id x, const std::vector<int>& group, int n_groups) {
  if (static_cast<Index>(group.size()) != rows(x)) throw DataError("group_mean: label count mismatch");
  const Mat& v = value(x);
  std::vector<double> counts(static_cast<std::size_t>(n_groups), 0.0);
  Mat sums = Mat::Zero(n_groups, v.cols());
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (group[i] < 0 || group[i] >= n_groups) throw DataError("group_mean: group out of range");
    sums.row(group[i]) += v.row(static_cast<Index>(i));
    counts[static_cast<std::size_t>(group[i])] += 1.0;
  }
  const RowVec overall = v.colwise().mean();
  Mat out(n_groups, v.cols());
  for (int k = 0; k < n_groups; ++k) {
    const double c = counts[static_cast<std::size_t>(k)];
    out.row(k) = c > 0 ? RowVec(sums.row(k) / c) : overall;
  }
  const double n_rows = static_cast<double>(v.rows());
  return push(std::move(out), needs(x), [=](std::vector<Node>& n, const Mat& go) {
    Mat& gx = g(n, x);
    RowVec absent = RowVec::Zero(go.cols());
    for (int k = 0; k < n_groups; ++k) {
      if (counts[static_cast<std::size_t>(k)] == 0) absent += go.row(k);
    }
    for (std::size_t i = 0; i < group.size(); ++i) {
      const double c = counts[static_cast<std::size_t>(group[i])];
      gx.row(static_cast<Index>(i)) += go.row(group[i]) / c + absent / n_rows;
    }
  });
}

Tape::Id Tape::gather_rows(Id x, const std::vector<int>& idx) {
  const Mat& v = value(x);
  Mat out(static_cast<Index>(idx.size()), v.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= v.rows()) throw DataError("gather_rows: index out of range");
    out.row(static_cast<Index>(i)) = v.row(idx[i]);
  }
  return push(std::move(out), needs(x), [=](std::vector<Node>& n, const Mat& go) {
    Mat& gx = g(n, x);
    for (std::size_t i = 0; i < idx.size(); ++i) gx.row(idx[i]) += go.row(static_cast<Index>(i));
  });
}

Tape::Id Tape::row_normalize(Id x) {
  const Mat& v = value(x);
  Vec norms = v.rowwise().norm();
  Mat out = v;
  for (Index r = 0; r < v.rows(); ++r) out.row(r) /= norms(r) + 1e-12;
  return push(std::move(out), needs(x), [=](std::vector<Node>& n, const Mat& go) {
    const Mat& xv = ILTM_VAL(x);
    Mat& gx = g(n, x);
    for (Index r = 0; r < xv.rows(); ++r) {
      const double nr = norms(r);
      const double d = nr + 1e-12;
      // y = x / (|x| + e): dy^T g = g/d - x (x.g) / (|x| d^2)
      const double dot = xv.row(r).dot(go.row(r));
      gx.row(r) += go.row(r) / d;
      if (nr > 0) gx.row(r) -= xv.row(r) * (dot / (nr * d * d));
    }
  });
}

Tape::Id Tape::standardize_rows(Id x, double eps) {
  const Mat& v = value(x);
  const Index c = v.cols();
  Vec inv_sd(v.rows());
  Mat out(v.rows(), c);
  for (Index r = 0; r < v.rows(); ++r) {
    const double mean = v.row(r).mean();
    const RowVec centered = v.row(r).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(c);
    inv_sd(r) = 1.0 / std::sqrt(var + eps);
    out.row(r) = centered * inv_sd(r);
  }
  Mat y = out;
  return push(std::move(out), needs(x), [=](std::vector<Node>& n, const Mat& go) {
    Mat& gx = g(n, x);
    for (Index r = 0; r < y.rows(); ++r) {
      const double gm = go.row(r).mean();
      const double gy = go.row(r).dot(y.row(r)) / static_cast<double>(c);
      gx.row(r) += inv_sd(r) * (go.row(r).array() - gm - y.row(r).array() * gy).matrix();
    }
  });
}

Tape::Id Tape::ce_loss(Id logits, const Mat& targets) {
  const Mat& z = value(logits);
  if (targets.rows() != z.rows() || targets.cols() != z.cols()) throw DataError("ce_loss: shape mismatch");
  const double b = static_cast<double>(z.rows());
  Mat probs(z.rows(), z.cols());
  double loss = 0.0;
  for (Index r = 0; r < z.rows(); ++r) {
    const double mx = z.row(r).maxCoeff();
    const RowVec e = (z.row(r).array() - mx).exp();
    const double s = e.sum();
    probs.row(r) = e / s;
    const double lse = mx + std::log(s);
    loss += lse * targets.row(r).sum() - targets.row(r).dot(z.row(r));
  }
  Mat out(1, 1);
  out(0, 0) = loss / b;
  return push(std::move(out), needs(logits), [=](std::vector<Node>& n, const Mat& go) {
    Mat d = probs;
    for (Index r = 0; r < d.rows(); ++r) d.row(r) *= targets.row(r).sum();
    g(n, logits) += (d - targets) * (go(0, 0) / b);
  });
}

Tape::Id Tape::mse_loss(Id pred, const Mat& target) {
  const Mat& p = value(pred);
  if (target.rows() != p.rows() || target.cols() != p.cols()) throw DataError("mse_loss: shape mismatch");
  const double count = static_cast<double>(p.size());
  Mat diff = p - target;
  Mat out(1, 1);
  out(0, 0) = diff.squaredNorm() / count;
  return push(std::move(out), needs(pred), [=](std::vector<Node>& n, const Mat& go) {
    g(n, pred) += diff * (2.0 * go(0, 0) / count);
  });
}

#undef ILTM_NEEDS
#undef ILTM_VAL

void Tape::backward(Id loss) {
  if (value(loss).size() != 1) throw DataError("backward: loss must be a scalar");
  for (auto& node : nodes_) {
    if (node.grad.size() != 0) node.grad.setZero();
  }
  g(nodes_, loss).setConstant(1.0);
  for (Id i = loss; i >= 0; --i) {
    auto& node = nodes_[static_cast<std::size_t>(i)];
    if (!node.needs_grad || node.grad.size() == 0 || node.slot >= 0) continue;
    node.backward(nodes_, node.grad);
  }
}

const Mat& Tape::grad(Id id) const {
  const auto& node = nodes_.at(static_cast<std::size_t>(id));
  if (node.slot < 0) throw DataError("gradient requested for a tensor that is not a marked parameter");
  static const Mat empty;
  return node.grad.size() == 0 ? empty : node.grad;
}

void Tape::accumulate_grads(ParamSet& out) const {
  for (const auto& node : nodes_) {
    if (node.slot < 0 || node.grad.size() == 0) continue;
    out.values.at(static_cast<std::size_t>(node.slot)) += node.grad;
  }
}

FiniteDiffReport finite_diff_check(const std::function<double(const Vec&)>& f, const Vec& p,
                                   const Vec& analytic, double step, int probes, std::uint64_t seed) {
  if (analytic.size() != p.size()) throw DataError("finite_diff_check: gradient size mismatch");
  Vec a, num;
  if (probes <= 0) {
    a = analytic;
    num.resize(p.size());
    Vec q = p;
    for (Index i = 0; i < p.size(); ++i) {
      q(i) = p(i) + step;
      const double fp = f(q);
      q(i) = p(i) - step;
      const double fm = f(q);
      q(i) = p(i);
      num(i) = (fp - fm) / (2.0 * step);
    }
  } else {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    a.resize(probes);
    num.resize(probes);
    for (int k = 0; k < probes; ++k) {
      Vec dir(p.size());
      for (Index i = 0; i < dir.size(); ++i) dir(i) = normal(rng);
      dir.normalize();
      a(k) = analytic.dot(dir);
      num(k) = (f(p + step * dir) - f(p - step * dir)) / (2.0 * step);
    }
  }
  const double scale = std::max({a.cwiseAbs().maxCoeff(), num.cwiseAbs().maxCoeff(), 1e-300});
  return {(a - num).cwiseAbs().maxCoeff() / scale, a.size()};
}

}  // namespace iltm
