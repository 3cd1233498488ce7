#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "subtrack/errors.hpp"
#include "subtrack/types.hpp"

// Dense symmetric linear algebra used by every detection statistic:
// eigendecomposition with a fixed ordering and sign convention, the
// universal eigenvalue threshold (UEVT) operator, and subspace geometry.
//
// Orthogonal-complement quantities are always evaluated through I - VVᵀ
// identities; the complement basis itself is never materialized.

namespace subtrack {

namespace tol {
inline constexpr double orthonormality = 1e-8;
inline constexpr double reconstruction_rel = 1e-6;
inline constexpr double symmetry_rel = 1e-9;
}  // namespace tol

// Dense real symmetric matrix. Symmetry is enforced by construction: the
// input must be symmetric up to sym_tol (relative to its largest entry) and
// is stored exactly symmetrized.
template <typename Scalar>
class SymMatrixT {
 public:
  using Dense = DenseMatrix<Scalar>;

  explicit SymMatrixT(Dense m, Scalar sym_tol = static_cast<Scalar>(tol::symmetry_rel)) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw DimensionError("SymMatrix: input must be square with n >= 1");
    }
    const Scalar scale = std::max<Scalar>(Scalar(1), m.cwiseAbs().maxCoeff());
    const Scalar asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > sym_tol * scale) {
      throw ValidationError("SymMatrix: input is not symmetric");
    }
    m_ = ((m + m.transpose()) / Scalar(2)).eval();
  }

  static SymMatrixT zero(Index n) { return SymMatrixT(Dense::Zero(n, n)); }

  Index n() const { return m_.rows(); }
  const Dense& dense() const { return m_; }
  Scalar operator()(Index i, Index j) const { return m_(i, j); }
  Scalar trace() const { return m_.trace(); }

 private:
  Dense m_;
};

// Full eigendecomposition, eigenvalues sorted descending, eigenvectors
// orthonormal columns in matching order.
template <typename Scalar>
struct EigenDecompT {
  DenseVector<Scalar> values;
  DenseMatrix<Scalar> vectors;
};

// Orthonormal n x R basis; R == 0 denotes the trivial subspace.
template <typename Scalar>
class SubspaceBasisT {
 public:
  using Dense = DenseMatrix<Scalar>;

  explicit SubspaceBasisT(Dense columns,
                          Scalar ortho_tol = static_cast<Scalar>(tol::orthonormality))
      : cols_(std::move(columns)) {
    if (cols_.cols() > cols_.rows()) {
      throw DimensionError("SubspaceBasis: rank exceeds ambient dimension");
    }
    if (cols_.cols() > 0) {
      const Dense gram = cols_.transpose() * cols_;
      const Scalar err =
          (gram - Dense::Identity(cols_.cols(), cols_.cols())).cwiseAbs().maxCoeff();
      if (err > ortho_tol) {
        throw ValidationError("SubspaceBasis: columns are not orthonormal");
      }
    }
  }

  static SubspaceBasisT empty(Index n) { return SubspaceBasisT(Dense(n, 0)); }

  Index n() const { return cols_.rows(); }
  Index rank() const { return cols_.cols(); }
  const Dense& columns() const { return cols_; }

 private:
  Dense cols_;
};

using SymMatrix = SymMatrixT<double>;
using EigenDecomp = EigenDecompT<double>;
using SubspaceBasis = SubspaceBasisT<double>;

// Full symmetric eigendecomposition, descending eigenvalues. Deterministic
// up to eigenvector sign, which is pinned by making the first entry of each
// eigenvector with magnitude above 1e-12 nonnegative.
template <typename Scalar>
EigenDecompT<Scalar> sym_eig(const SymMatrixT<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> solver(m.dense());
  if (solver.info() != Eigen::Success) {
    throw SolverError("sym_eig: eigensolver failed to converge");
  }
  const Index n = m.n();
  EigenDecompT<Scalar> decomp;
  decomp.values = solver.eigenvalues().reverse();
  decomp.vectors = solver.eigenvectors().rowwise().reverse();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const Scalar entry = decomp.vectors(i, j);
      if (std::abs(entry) > Scalar(1e-12)) {
        if (entry < Scalar(0)) {
          decomp.vectors.col(j) = -decomp.vectors.col(j);
        }
        break;
      }
    }
  }
  return decomp;
}

// Eigenvalues only, descending.
template <typename Scalar>
DenseVector<Scalar> sym_eigenvalues(const SymMatrixT<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> solver(m.dense(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw SolverError("sym_eigenvalues: eigensolver failed to converge");
  }
  return solver.eigenvalues().reverse();
}

template <typename Scalar>
struct UevtResultT {
  SymMatrixT<Scalar> approx;
  Index rank;
  SubspaceBasisT<Scalar> basis;
};

using UevtResult = UevtResultT<double>;

// Universal eigenvalue threshold: keeps eigenpairs with eigenvalue strictly
// above h and reconstructs the low-rank approximation from them. Ties at h
// are dropped.
template <typename Scalar>
UevtResultT<Scalar> uevt(const SymMatrixT<Scalar>& g, Scalar h) {
  if (!std::isfinite(h)) {
    throw ValidationError("uevt: threshold must be finite");
  }
  const EigenDecompT<Scalar> decomp = sym_eig(g);
  Index kept = 0;
  while (kept < decomp.values.size() && decomp.values(kept) > h) {
    ++kept;
  }
  const Index n = g.n();
  DenseMatrix<Scalar> basis = decomp.vectors.leftCols(kept);
  DenseMatrix<Scalar> approx;
  if (kept == 0) {
    approx = DenseMatrix<Scalar>::Zero(n, n);
  } else {
    approx = basis * decomp.values.head(kept).asDiagonal() * basis.transpose();
  }
  return UevtResultT<Scalar>{SymMatrixT<Scalar>(std::move(approx)), kept,
                             SubspaceBasisT<Scalar>(std::move(basis))};
}

// ‖m‖₂ = max |eigenvalue| for symmetric m.
template <typename Scalar>
Scalar spectral_norm(const SymMatrixT<Scalar>& m) {
  const DenseVector<Scalar> values = sym_eigenvalues(m);
  return std::max(std::abs(values(0)), std::abs(values(values.size() - 1)));
}

// ‖V⊥ᵀ M‖₂, evaluated as ‖(I - VVᵀ)M‖₂: both have the same nonzero singular
// values because V⊥ has orthonormal columns.
template <typename Scalar>
Scalar proj_residual_norm(const SubspaceBasisT<Scalar>& basis, const SymMatrixT<Scalar>& m) {
  if (basis.n() != m.n()) {
    throw DimensionError("proj_residual_norm: basis and matrix dimensions differ");
  }
  if (basis.rank() == 0) {
    return spectral_norm(m);
  }
  if (basis.rank() == basis.n()) {
    return Scalar(0);
  }
  const auto& v = basis.columns();
  DenseMatrix<Scalar> residual = m.dense() - v * (v.transpose() * m.dense());
  Eigen::BDCSVD<DenseMatrix<Scalar>> svd(residual);
  return svd.singularValues()(0);
}

// tr(V⊥V⊥ᵀ m) = tr(m) - tr(Vᵀ m V).
template <typename Scalar>
Scalar proj_residual_trace(const SubspaceBasisT<Scalar>& basis, const SymMatrixT<Scalar>& m) {
  if (basis.n() != m.n()) {
    throw DimensionError("proj_residual_trace: basis and matrix dimensions differ");
  }
  if (basis.rank() == 0) {
    return m.trace();
  }
  const auto& v = basis.columns();
  return m.trace() - v.cwiseProduct(m.dense() * v).sum();
}

// ‖UUᵀ - VVᵀ‖_F² = R_u + R_v - 2‖UᵀV‖_F².
template <typename Scalar>
Scalar subspace_distance_sq(const SubspaceBasisT<Scalar>& u, const SubspaceBasisT<Scalar>& v) {
  if (u.n() != v.n()) {
    throw DimensionError("subspace_distance_sq: ambient dimensions differ");
  }
  const Scalar cross = (u.columns().transpose() * v.columns()).squaredNorm();
  return static_cast<Scalar>(u.rank() + v.rank()) - Scalar(2) * cross;
}

}  // namespace subtrack
