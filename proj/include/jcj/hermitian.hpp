#pragma once

// Dense complex linear algebra: Hermitian matrices, eigendecomposition,
// PSD tests, trace functionals and the real-symmetric embedding.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "jcj/errors.hpp"

namespace jcj {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Absolute tolerance of the conjugate-symmetry check, scaled by max(1, max|a_ij|).
inline constexpr double kHermitianTol = 1e-12;
/// Eigenvalues >= -kPsdTol * ||A||_2 count as nonnegative.
inline constexpr double kPsdTol = 1e-9;

/// Complex square matrix with A = A^H.  Construction validates the invariant
/// and then stores the exactly symmetrized matrix.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) {
      throw InvariantError("Hermitian matrix must be square");
    }
    if (!m.allFinite()) throw InvariantError("Hermitian matrix has non-finite entries");
    const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
    const double tol = kHermitianTol * scale;
    for (Index j = 0; j < m.cols(); ++j) {
      if (std::abs(m(j, j).imag()) > tol) {
        throw InvariantError("Hermitian matrix has a non-real diagonal entry");
      }
      for (Index i = j + 1; i < m.rows(); ++i) {
        if (std::abs(m(i, j) - std::conj(m(j, i))) > tol) {
          throw InvariantError("matrix is not Hermitian");
        }
      }
    }
    m_ = symmetrize(m);
  }

  /// (M + M^H)/2 with no tolerance check; for results of exact-arithmetic
  /// Hermitian expressions that picked up rounding asymmetry.
  static HermitianMatrix symmetrized(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw InvariantError("Hermitian matrix must be square");
    HermitianMatrix h;
    h.m_ = symmetrize(m);
    return h;
  }

  static HermitianMatrix identity(Index n) {
    HermitianMatrix h;
    h.m_ = ComplexMatrix::Identity(n, n);
    return h;
  }

  static HermitianMatrix zero(Index n) {
    HermitianMatrix h;
    h.m_ = ComplexMatrix::Zero(n, n);
    return h;
  }

  /// Outer product v v^H.
  static HermitianMatrix outer(const ComplexVector& v) {
    return symmetrized(v * v.adjoint());
  }

  static HermitianMatrix diagonal(const RealVector& d) {
    HermitianMatrix h;
    h.m_ = d.cast<cplx>().asDiagonal();
    return h;
  }

  Index dim() const noexcept { return m_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  cplx operator()(Index i, Index j) const { return m_(i, j); }

  double trace() const { return m_.diagonal().real().sum(); }
  double frobenius_norm() const { return m_.norm(); }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    require_same_dim(o);
    m_ += o.m_;
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& o) {
    require_same_dim(o);
    m_ -= o.m_;
    return *this;
  }
  HermitianMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }
  friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }

 private:
  static ComplexMatrix symmetrize(const ComplexMatrix& m) {
    ComplexMatrix s = 0.5 * (m + m.adjoint());
    for (Index i = 0; i < s.rows(); ++i) s(i, i) = cplx(s(i, i).real(), 0.0);
    return s;
  }

  void require_same_dim(const HermitianMatrix& o) const {
    if (o.dim() != dim()) throw DimensionError("Hermitian matrix dimension mismatch");
  }

  ComplexMatrix m_;
};

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
struct EigenDecomposition {
  RealVector values;
  ComplexMatrix vectors;  // column i pairs with values[i]

  double max_value() const { return values.size() ? values[0] : 0.0; }
  double min_value() const { return values.size() ? values[values.size() - 1] : 0.0; }
};

inline EigenDecomposition eig_hermitian(const HermitianMatrix& a) {
  if (a.dim() < 1) throw DomainError("eig_hermitian: empty matrix");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw SolverError("eig_hermitian: eigensolver did not converge");
  }
  // Eigen returns ascending order.
  EigenDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

/// Eigenvalues only, descending.
inline RealVector eigenvalues_hermitian(const HermitianMatrix& a) {
  if (a.dim() < 1) throw DomainError("eigenvalues_hermitian: empty matrix");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw SolverError("eigenvalues_hermitian: eigensolver did not converge");
  }
  return solver.eigenvalues().reverse();
}

/// Spectral norm (largest |lambda|).
inline double spectral_norm(const HermitianMatrix& a) {
  if (a.dim() == 0) return 0.0;
  const RealVector v = eigenvalues_hermitian(a);
  return std::max(std::abs(v[0]), std::abs(v[v.size() - 1]));
}

inline bool is_psd(const HermitianMatrix& a, double tol = kPsdTol) {
  if (a.dim() == 0) return true;
  const RealVector v = eigenvalues_hermitian(a);
  const double norm = std::max(std::abs(v[0]), std::abs(v[v.size() - 1]));
  return v[v.size() - 1] >= -tol * norm;
}

/// PSD test for a real symmetric matrix, same tolerance convention.
inline bool is_psd(const RealMatrix& a, double tol = kPsdTol) {
  if (a.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw SolverError("is_psd: eigensolver did not converge");
  const RealVector& v = solver.eigenvalues();
  const double norm = std::max(std::abs(v[0]), std::abs(v[v.size() - 1]));
  return v[0] >= -tol * norm;
}

/// T(A) = [[Re A, -Im A], [Im A, Re A]].
inline RealMatrix real_embed(const HermitianMatrix& a) {
  const Index n = a.dim();
  RealMatrix t(2 * n, 2 * n);
  const RealMatrix re = a.matrix().real();
  const RealMatrix im = a.matrix().imag();
  t.topLeftCorner(n, n) = re;
  t.topRightCorner(n, n) = -im;
  t.bottomLeftCorner(n, n) = im;
  t.bottomRightCorner(n, n) = re;
  return t;
}

/// Re tr(A X).
inline double trace_inner(const HermitianMatrix& a, const HermitianMatrix& x) {
  if (a.dim() != x.dim()) throw DimensionError("trace_inner: dimension mismatch");
  // tr(A X) = sum_ij A_ij X_ji = sum_ij A_ij conj(X_ij) for Hermitian X.
  const ComplexMatrix& am = a.matrix();
  const ComplexMatrix& xm = x.matrix();
  double acc = 0.0;
  for (Index j = 0; j < am.cols(); ++j) {
    for (Index i = 0; i < am.rows(); ++i) {
      acc += am(i, j).real() * xm(i, j).real() + am(i, j).imag() * xm(i, j).imag();
    }
  }
  return acc;
}

/// Re tr(A X) for a general square A; the constraint functional used with
/// non-Hermitian shift matrices.
inline double re_trace_product(const ComplexMatrix& a, const ComplexMatrix& x) {
  if (a.rows() != x.cols() || a.cols() != x.rows()) {
    throw DimensionError("re_trace_product: dimension mismatch");
  }
  return (a.transpose().cwiseProduct(x)).sum().real();
}

/// Principal submatrix A[first:last, first:last] (inclusive, 0-based).
inline HermitianMatrix principal_submatrix(const HermitianMatrix& a, Index first, Index last) {
  if (first < 0 || last < first || last >= a.dim()) {
    throw DomainError("principal_submatrix: index window out of range");
  }
  const Index k = last - first + 1;
  return HermitianMatrix::symmetrized(a.matrix().block(first, first, k, k));
}

}  // namespace jcj
