#pragma once

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace ellipt::linalg {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct SymmetricEigen {
  Vector<Scalar> values;    // descending
  Matrix<Scalar> vectors;   // columns pair with `values`
  int sweeps = 0;
  bool converged = false;
};

// Sum of squared strictly-upper entries.
template <typename Derived>
typename Derived::Scalar off_diagonal_norm2(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Scalar s(0);
  for (Eigen::Index j = 1; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) s += a(i, j) * a(i, j);
  return s;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps stop once
// every off-diagonal entry is below `tolerance` relative to the Frobenius
// norm of the input, or after `max_sweeps`.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> jacobi_eigen(
    const Eigen::MatrixBase<Derived>& input,
    typename Derived::Scalar tolerance = typename Derived::Scalar(1e-12),
    int max_sweeps = 100) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = input.rows();
  eigen_assert(input.cols() == n);

  Matrix<Scalar> a = (input + input.transpose()) / Scalar(2);
  Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);
  const Scalar scale = std::max(a.norm(), std::numeric_limits<Scalar>::min());
  const Scalar threshold = tolerance * scale;

  SymmetricEigen<Scalar> out;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Scalar largest(0);
    for (Eigen::Index q = 1; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p)
        largest = std::max(largest, std::abs(a(p, q)));
    if (largest <= threshold) {
      out.converged = true;
      break;
    }
    ++out.sweeps;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= threshold * Scalar(1e-3)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        if (!rot.makeJacobi(a, p, q)) continue;
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        a(p, q) = a(q, p) = Scalar(0);
        v.applyOnTheRight(p, q, rot);
      }
    }
  }
  if (!out.converged) {
    Scalar largest(0);
    for (Eigen::Index q = 1; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p)
        largest = std::max(largest, std::abs(a(p, q)));
    out.converged = largest <= threshold;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return a(i, i) > a(j, j);
  });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

// Sample covariance of the columns of `x` (rows are observations), n-1 divisor.
template <typename Derived>
Matrix<typename Derived::Scalar> column_covariance(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> centered = x.rowwise() - x.colwise().mean();
  return (centered.adjoint() * centered) / Scalar(x.rows() - 1);
}

// Pearson correlation of two equal-length vectors; returns 0 when either is
// constant.
template <typename A, typename B>
typename A::Scalar pearson(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  using Scalar = typename A::Scalar;
  const auto xc = (x.array() - x.mean()).matrix();
  const auto yc = (y.array() - y.mean()).matrix();
  const Scalar sxx = xc.squaredNorm();
  const Scalar syy = yc.squaredNorm();
  if (sxx <= Scalar(0) || syy <= Scalar(0)) return Scalar(0);
  return xc.dot(yc) / std::sqrt(sxx * syy);
}

}  // namespace ellipt::linalg
