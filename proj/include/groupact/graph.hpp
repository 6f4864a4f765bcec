// Copyright 2026 The groupact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "groupact/types.hpp"

namespace groupact {

/// Symmetric pairwise affinity in [0,1] with a unit diagonal.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;

  /// Throws ValidationError unless `values` is square, symmetric within
  /// `tol`, in [0,1], with a unit diagonal. Symmetrizes exactly.
  explicit SimilarityMatrix(Eigen::MatrixXd values, double tol = 1e-12) : values_(std::move(values)) {
    if (values_.rows() != values_.cols()) throw ValidationError("similarity matrix must be square");
    const auto n = values_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(values_(i, i) - 1.0) > tol)
        throw ValidationError("similarity matrix diagonal must be 1");
      values_(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double a = values_(i, j), b = values_(j, i);
        if (!std::isfinite(a) || !std::isfinite(b) || std::abs(a - b) > tol)
          throw ValidationError("similarity matrix must be symmetric");
        const double v = 0.5 * (a + b);
        if (v < -tol || v > 1.0 + tol) throw ValidationError("similarity entries must be in [0,1]");
        values_(i, j) = values_(j, i) = std::clamp(v, 0.0, 1.0);
      }
    }
  }

  Eigen::Index n() const { return values_.rows(); }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

 private:
  Eigen::MatrixXd values_;
};

/// L = D - A over off-diagonal affinities.
class LaplacianMatrix {
 public:
  LaplacianMatrix() = default;
  explicit LaplacianMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {}

  Eigen::Index n() const { return values_.rows(); }
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  Eigen::MatrixXd values_;
};

/// Orthonormal column basis; column k is the normalized indicator of group k.
struct IndicatorBasis {
  Eigen::MatrixXd vectors;
  Eigen::Index components() const { return vectors.cols(); }
};

/// 0/1 same-group matrix.
inline SimilarityMatrix adjacency_from_groups(const std::vector<GroupId>& groups) {
  const auto n = static_cast<Eigen::Index>(groups.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      a(i, j) = groups[static_cast<std::size_t>(i)] == groups[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  return SimilarityMatrix(std::move(a));
}

inline SimilarityMatrix adjacency_from_grouping(const AnnotatedKeyFrame& frame) {
  return adjacency_from_groups(group_ids(frame));
}

/// Graph Laplacian of a symmetric affinity; self-loops do not enter the degree.
inline LaplacianMatrix laplacian(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  Eigen::MatrixXd l = -a;
  for (Eigen::Index i = 0; i < n; ++i) {
    double degree = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) degree += a(i, j);
    l(i, i) = degree;
  }
  return LaplacianMatrix(std::move(l));
}

inline LaplacianMatrix laplacian(const SimilarityMatrix& a) { return laplacian(a.values()); }

/// Components of the graph with an edge wherever a(i,j) >= threshold.
/// Ids are dense and ordered by each component's smallest member.
inline std::vector<int> connected_components(const SimilarityMatrix& a, double threshold) {
  if (!(threshold > 0 && threshold < 1))
    throw std::invalid_argument("connected_components: threshold must be in (0,1)");
  const auto n = static_cast<std::size_t>(a.n());
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) >= threshold) {
        auto ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
  std::vector<int> id(n, -1), out(n);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = find(i);
    if (id[r] < 0) id[r] = next++;
    out[i] = id[r];
  }
  return out;
}

struct SymmetricEigen {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< column k pairs with values[k]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps rotate every off-diagonal pair to zero until the off-diagonal
/// Frobenius norm falls below 1e-15 of the matrix norm. Throws
/// std::invalid_argument when `m` is not symmetric within 1e-9 (relative).
inline SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("symmetric_eigen: matrix must be square");
  const auto n = m.rows();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("symmetric_eigen: matrix is not symmetric");

  Eigen::MatrixXd a = 0.5 * (m + m.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double norm = std::max(a.norm(), 1e-300);

  auto off_norm = [&] {
    double s = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) s += 2 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100 && off_norm() > 1e-15 * norm; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        // Rotation angle zeroing a(p,q), stable form from Golub & Van Loan.
        const double tau = (a(q, q) - a(p, p)) / (2 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        const double c = 1 / std::sqrt(1 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

/// Number of eigenvalues with |lambda| < tol; tol <= 0 selects 1e-8 * n.
inline int count_zero_eigenvalues(const LaplacianMatrix& l, double tol = 0) {
  if (tol <= 0) tol = 1e-8 * static_cast<double>(std::max<Eigen::Index>(l.n(), 1));
  const auto eig = symmetric_eigen(l.values());
  int count = 0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k)
    if (std::abs(eig.values[k]) < tol) ++count;
  return count;
}

/// One normalized indicator column per group, groups ordered by first member.
inline IndicatorBasis indicator_basis(const std::vector<GroupId>& groups) {
  int c = 0;
  const auto dense = dense_group_index(groups, &c);
  std::vector<int> size(static_cast<std::size_t>(c), 0);
  for (int g : dense) ++size[static_cast<std::size_t>(g)];
  const auto n = static_cast<Eigen::Index>(groups.size());
  IndicatorBasis basis{Eigen::MatrixXd::Zero(n, c)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int g = dense[static_cast<std::size_t>(i)];
    basis.vectors(i, g) = 1.0 / std::sqrt(static_cast<double>(size[static_cast<std::size_t>(g)]));
  }
  return basis;
}

inline IndicatorBasis indicator_eigenvectors(const AnnotatedKeyFrame& frame) {
  return indicator_basis(group_ids(frame));
}

}  // namespace groupact
