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


#include "iltm/projection.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace iltm {
namespace {

int block_count(int r) { return (r + kOmegaBlock - 1) / kOmegaBlock; }

void check_width(const ProjectionParams& p, const SpMat& psi) {
  if (psi.cols() != p.m) {
    throw DataError("projection: expected width " + std::to_string(p.m) + ", got " +
                    std::to_string(psi.cols()));
  }
}

// ReLU features of one column block. Row-major axpy per nonzero; several
// times faster than the generic sparse-dense product here.
Mat relu_block(const ProjectionParams& p, const SpMat& psi, int block) {
  const Mat om = omega_block(p.m, p.r, p.seed, block);
  Mat z = Mat::Zero(psi.rows(), om.cols());
  for (Index i = 0; i < psi.rows(); ++i) {
    auto row = z.row(i);
    for (SpMat::InnerIterator it(psi, i); it; ++it) row.noalias() += it.value() * om.row(it.col());
  }
  return z.cwiseMax(0.0);
}

Mat centered_block(const ProjectionParams& p, const SpMat& psi, int block) {
  Mat z = relu_block(p, psi, block);
  z.rowwise() -= p.mu_rf.segment(static_cast<Index>(block) * kOmegaBlock, z.cols());
  return z;
}

// Rows sorted lexicographically by their sparse entries so fitted statistics
// do not depend on the order in which rows arrive. The features are a
// function of the row, so this orders them the same way for every block.
SpMat sorted_rows(const SpMat& psi) {
  std::vector<Index> order(static_cast<std::size_t>(psi.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  auto entries = [&](Index r) {
    std::vector<std::pair<Index, double>> e;
    for (SpMat::InnerIterator it(psi, r); it; ++it) {
      if (it.value() != 0.0) e.emplace_back(it.col(), it.value());
    }
    return e;
  };
  std::vector<std::vector<std::pair<Index, double>>> rows(order.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = entries(static_cast<Index>(i));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return rows[static_cast<std::size_t>(a)] < rows[static_cast<std::size_t>(b)];
  });
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const auto& [c, v] : rows[static_cast<std::size_t>(order[i])]) {
      trip.emplace_back(static_cast<Index>(i), c, v);
    }
  }
  SpMat out(psi.rows(), psi.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace

Mat omega_block(int m, int r, std::uint64_t seed, int block) {
  const int c0 = block * kOmegaBlock;
  if (block < 0 || c0 >= r) throw std::out_of_range("omega_block: block out of range");
  const int width = std::min(kOmegaBlock, r - c0);
  Mat om(m, width);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / r));
  for (int j = 0; j < m; ++j) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(block)));
    normal.reset();
    for (int c = 0; c < width; ++c) om(j, c) = normal(rng);
  }
  return om;
}

Mat sample_omega(int m, int r, std::uint64_t seed) {
  Mat omega(m, r);
  for (int b = 0; b < block_count(r); ++b) {
    const Mat om = omega_block(m, r, seed, b);
    omega.middleCols(static_cast<Index>(b) * kOmegaBlock, om.cols()) = om;
  }
  return omega;
}

ProjectionParams fit_projection(const SpMat& psi_in, int r, int d_main, std::uint64_t seed) {
  if (psi_in.rows() < 2) throw DataError("fit_projection: need at least 2 rows");
  if (r < 1 || d_main < 1) throw ConfigError("fit_projection: r and d_main must be positive");
  ProjectionParams p;
  p.m = static_cast<int>(psi_in.cols());
  p.r = r;
  p.d_main = d_main;
  p.seed = seed;
  const SpMat psi = sorted_rows(psi_in);
  const Index n = psi.rows();
  const int blocks = block_count(r);

  // A block holds every row of its columns, so its means are final at once.
  p.mu_rf = RowVec::Zero(r);
  auto first_pass_block = [&](int b) {
    Mat z = relu_block(p, psi, b);
    const RowVec mu = z.colwise().mean();
    p.mu_rf.segment(static_cast<Index>(b) * kOmegaBlock, z.cols()) = mu;
    z.rowwise() -= mu;
    return z;
  };

  p.U = Mat::Zero(r, d_main);
  p.col_mean = RowVec::Zero(d_main);
  p.col_std = RowVec::Ones(d_main);
  Mat proj;  // n x k, the fit rows in component coordinates
  int k = 0;
  // Unit directions with a deterministic sign: largest |entry| positive.
  auto orient = [&](Index j) {
    Index arg = 0;
    p.U.col(j).cwiseAbs().maxCoeff(&arg);
    if (p.U(arg, j) < 0) {
      p.U.col(j) = -p.U.col(j);
      proj.col(j) = -proj.col(j);
    }
  };
  if (n < r) {
    // Components from the n x n Gram matrix, accumulated block by block.
    Mat gram = Mat::Zero(n, n);
    for (int b = 0; b < blocks; ++b) {
      const Mat zc = first_pass_block(b);
      gram.noalias() += zc * zc.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(gram);
    const Vec& evals = es.eigenvalues();  // ascending
    const double top = evals.maxCoeff();
    for (Index j = n - 1; j >= 0 && k < d_main; --j) {
      if (!(top > 0.0) || evals(j) <= 1e-10 * top) break;
      ++k;
    }
    const Mat v = es.eigenvectors().rightCols(k).rowwise().reverse();
    proj = Mat::Zero(n, k);
    for (int b = 0; b < blocks; ++b) {
      const Mat zc = centered_block(p, psi, b);
      const Index c0 = static_cast<Index>(b) * kOmegaBlock;
      p.U.block(c0, 0, zc.cols(), k) = zc.transpose() * v;
      proj.noalias() += zc * p.U.block(c0, 0, zc.cols(), k);
    }
    for (Index j = 0; j < k; ++j) {
      const double norm = p.U.col(j).norm();
      if (norm > 0.0) {
        p.U.col(j) /= norm;
        proj.col(j) /= norm;
      }
      orient(j);
    }
  } else {
    Mat zc(n, r);
    for (int b = 0; b < blocks; ++b) {
      const Mat z = first_pass_block(b);
      zc.middleCols(static_cast<Index>(b) * kOmegaBlock, z.cols()) = z;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(zc.transpose() * zc);
    const Vec& evals = es.eigenvalues();
    const double top = evals.maxCoeff();
    for (Index j = r - 1; j >= 0 && k < d_main; --j) {
      if (!(top > 0.0) || evals(j) <= 1e-10 * top) break;
      p.U.col(k++) = es.eigenvectors().col(j);
    }
    proj = zc * p.U.leftCols(k);
    for (Index j = 0; j < k; ++j) orient(j);
  }

  for (int j = 0; j < k; ++j) {
    const double mean = proj.col(j).mean();
    const double var = (proj.col(j).array() - mean).square().mean();
    // Below this variance the eps guard visibly shrinks the column, so the
    // component counts as degenerate along with everything after it.
    if (var < kMinComponentVarianceRatio * p.eps) {
      p.U.rightCols(d_main - j).setZero();
      k = j;
      break;
    }
    p.col_mean(j) = mean;
    p.col_std(j) = std::sqrt(var);
  }
  p.rank = k;
  return p;
}

Mat apply_projection(const ProjectionParams& p, const SpMat& psi) {
  check_width(p, psi);
  Mat x = Mat::Zero(psi.rows(), p.d_main);
  if (p.rank > 0) {
    for (int b = 0; b < block_count(p.r); ++b) {
      const Mat zc = centered_block(p, psi, b);
      x.noalias() += zc * p.U.block(static_cast<Index>(b) * kOmegaBlock, 0, zc.cols(), p.d_main);
    }
  }
  for (Index j = 0; j < x.cols(); ++j) {
    const double denom = std::sqrt(p.col_std(j) * p.col_std(j) + p.eps);
    x.col(j) = (x.col(j).array() - p.col_mean(j)) / denom;
  }
  return x;
}

void ProjectionParams::save(Container& c, const std::string& pre) const {
  c.put_ints(pre + "shape", std::vector<int>{m, r, d_main, rank});
  // Seeds are 64-bit; store as two 32-bit halves to stay exact in f64.
  c.put(pre + "seed", std::vector<double>{static_cast<double>(seed >> 32),
                                          static_cast<double>(seed & 0xFFFFFFFFULL)});
  c.put_scalar(pre + "eps", eps);
  c.put(pre + "mu_rf", std::span<const double>(mu_rf.data(), static_cast<std::size_t>(mu_rf.size())));
  c.put(pre + "U", U);
  c.put(pre + "col_mean", std::span<const double>(col_mean.data(), static_cast<std::size_t>(col_mean.size())));
  c.put(pre + "col_std", std::span<const double>(col_std.data(), static_cast<std::size_t>(col_std.size())));
}

ProjectionParams ProjectionParams::load(const Container& c, const std::string& pre) {
  ProjectionParams p;
  const auto shape = c.get_ints(pre + "shape");
  p.m = shape.at(0);
  p.r = shape.at(1);
  p.d_main = shape.at(2);
  p.rank = shape.at(3);
  const auto s = c.get_vec(pre + "seed");
  p.seed = (static_cast<std::uint64_t>(s.at(0)) << 32) | static_cast<std::uint64_t>(s.at(1));
  p.eps = c.get_scalar(pre + "eps");
  const auto mu = c.get_vec(pre + "mu_rf");
  p.mu_rf = Eigen::Map<const RowVec>(mu.data(), static_cast<Index>(mu.size()));
  p.U = c.get_mat(pre + "U");
  const auto cm = c.get_vec(pre + "col_mean");
  p.col_mean = Eigen::Map<const RowVec>(cm.data(), static_cast<Index>(cm.size()));
  const auto cs = c.get_vec(pre + "col_std");
  p.col_std = Eigen::Map<const RowVec>(cs.data(), static_cast<Index>(cs.size()));
  return p;
}

}  // namespace iltm
