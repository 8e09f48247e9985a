#pragma once

// Dense complex linear algebra for small Hermitian problems (N <= 8).
//
// Eigen-decompositions follow the Q = U^H diag(sigma) U convention: the ROWS
// of U are the (conjugated) eigenvectors, so solver code can assemble
// covariances exactly as U^H Theta U.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mimocov {

using Complex = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  /// Row-major entries; throws PreconditionError unless entries.size() == rows*cols.
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  static ComplexMatrix zeros(std::size_t rows, std::size_t cols);
  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const Complex> entries() const noexcept { return data_; }
  std::span<Complex> entries() noexcept { return data_; }

  ComplexMatrix adjoint() const;
  Complex trace() const;
  /// Real part of the trace; the power of a covariance matrix.
  double real_trace() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex s);
  ComplexMatrix& operator*=(double s);

  /// Bitwise equality of shape and entries.
  friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(ComplexMatrix a, double s);
ComplexMatrix operator*(double s, ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, Complex s);

/// sqrt(sum |a_ij|^2).
double frobenius(const ComplexMatrix& a);
/// tr(A^H B), the Frobenius inner product.
Complex trace_inner(const ComplexMatrix& a, const ComplexMatrix& b);
/// A^H A, filled so the result is exactly Hermitian.
ComplexMatrix gram(const ComplexMatrix& a);
/// (A + A^H) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& a);

/// Entrywise |a_ij - conj(a_ji)| <= tol * max(1, max |a_ij|).
bool is_hermitian(const ComplexMatrix& a, double tol = 1e-12);

struct HermEigen {
  ComplexMatrix u;            // unitary, rows are eigenvectors
  std::vector<double> sigma;  // eigenvalues, in the order Jacobi leaves them
  int sweeps = 0;

  /// U^H diag(sigma) U.
  ComplexMatrix reconstruct() const;
  /// U^H diag(theta) U for an arbitrary eigen-domain loading.
  ComplexMatrix assemble(std::span<const double> theta) const;
};

/// Cyclic complex Jacobi. Symmetrizes the input before iterating; throws
/// PreconditionError for non-Hermitian input and SolverError after 100 sweeps.
HermEigen herm_eig(const ComplexMatrix& a);

/// Lower-triangular L with L L^H = A for Hermitian positive-definite A.
/// Throws SolverError when a pivot is not strictly positive.
ComplexMatrix cholesky(const ComplexMatrix& a);
/// log det A for Hermitian positive-definite A via Cholesky.
double log_det_hpd(const ComplexMatrix& a);
/// A^{-1} for Hermitian positive-definite A via Cholesky; result is Hermitian.
ComplexMatrix inverse_hpd(const ComplexMatrix& a);

/// log det(I + H Q H^H) in nats.
double capacity(const ComplexMatrix& h, const ComplexMatrix& q);
/// H^H (I + H Q H^H)^{-1} H, the gradient of capacity() with respect to Q.
ComplexMatrix capacity_gradient(const ComplexMatrix& h, const ComplexMatrix& q);

}  // namespace mimocov
