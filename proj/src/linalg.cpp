#include "mimocov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mimocov/errors.hpp"

namespace mimocov {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalTol = 1e-12;

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw PreconditionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
                            "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                            "x" + std::to_string(b.cols()));
  }
}

double off_diagonal_norm(const ComplexMatrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) sum += std::norm(a(i, j));
    }
  }
  return std::sqrt(sum);
}

// I + H Q H^H, symmetrized.
ComplexMatrix capacity_argument(const ComplexMatrix& h, const ComplexMatrix& q) {
  if (!q.is_square() || q.rows() != h.cols()) {
    throw PreconditionError("capacity: H is " + std::to_string(h.rows()) + "x" +
                            std::to_string(h.cols()) + " but Q is " + std::to_string(q.rows()) +
                            "x" + std::to_string(q.cols()));
  }
  ComplexMatrix m = h * q * h.adjoint();
  m = hermitian_part(m);
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
  return m;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw PreconditionError("ComplexMatrix: " + std::to_string(data_.size()) +
                            " entries for a " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " matrix");
  }
}

ComplexMatrix ComplexMatrix::zeros(std::size_t rows, std::size_t cols) {
  return ComplexMatrix(rows, cols);
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  }
  return out;
}

Complex ComplexMatrix::trace() const {
  Complex t{0.0, 0.0};
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::real_trace() const { return trace().real(); }

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (auto& x : data_) x *= s;
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(double s) {
  for (auto& x : data_) x *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(ComplexMatrix a, double s) { return a *= s; }
ComplexMatrix operator*(double s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw PreconditionError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                            std::to_string(b.rows()));
  }
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{0.0, 0.0}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

double frobenius(const ComplexMatrix& a) {
  double sum = 0.0;
  for (const auto& x : a.entries()) sum += std::norm(x);
  return std::sqrt(sum);
}

Complex trace_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "trace_inner");
  Complex sum{0.0, 0.0};
  auto ea = a.entries();
  auto eb = b.entries();
  for (std::size_t k = 0; k < ea.size(); ++k) sum += std::conj(ea[k]) * eb[k];
  return sum;
}

ComplexMatrix gram(const ComplexMatrix& a) {
  const std::size_t n = a.cols();
  ComplexMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      Complex s{0.0, 0.0};
      for (std::size_t k = 0; k < a.rows(); ++k) s += std::conj(a(k, i)) * a(k, j);
      if (i == j) {
        g(i, i) = s.real();
      } else {
        g(i, j) = s;
        g(j, i) = std::conj(s);
      }
    }
  }
  return g;
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  if (!a.is_square()) throw PreconditionError("hermitian_part: matrix is not square");
  ComplexMatrix h(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    h(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const Complex v = 0.5 * (a(i, j) + std::conj(a(j, i)));
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  }
  return h;
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (!a.is_square()) return false;
  double scale = 1.0;
  for (const auto& x : a.entries()) scale = std::max(scale, std::abs(x));
  const double bound = tol * scale;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - std::conj(a(j, i))) > bound) return false;
    }
  }
  return true;
}

ComplexMatrix HermEigen::reconstruct() const { return assemble(sigma); }

ComplexMatrix HermEigen::assemble(std::span<const double> theta) const {
  const std::size_t n = u.rows();
  if (theta.size() != n) throw PreconditionError("HermEigen::assemble: loading size mismatch");
  // (U^H Theta U)_{ij} = sum_k conj(U_ki) theta_k U_kj
  ComplexMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      Complex s{0.0, 0.0};
      for (std::size_t k = 0; k < n; ++k) {
        if (theta[k] == 0.0) continue;
        s += std::conj(u(k, i)) * theta[k] * u(k, j);
      }
      if (i == j) {
        out(i, i) = s.real();
      } else {
        out(i, j) = s;
        out(j, i) = std::conj(s);
      }
    }
  }
  return out;
}

HermEigen herm_eig(const ComplexMatrix& input) {
  if (!is_hermitian(input)) throw PreconditionError("herm_eig: input is not Hermitian");
  const std::size_t n = input.rows();
  ComplexMatrix a = hermitian_part(input);
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double tol = kOffDiagonalTol * std::max(1.0, frobenius(a));

  int sweep = 0;
  double off = off_diagonal_norm(a);
  while (off >= tol) {
    if (sweep == kMaxSweeps) throw SolverError("herm_eig: no convergence after 100 sweeps", off);
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double g = std::abs(apq);
        if (g == 0.0) continue;
        const Complex e = apq / g;
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * g);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex ebar = std::conj(e);
        // J = diag-phase * real rotation:
        //   J_pp = c, J_pq = s, J_qp = -s conj(e), J_qq = c conj(e)
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = c * akp - s * ebar * akq;
          a(k, q) = s * akp + c * ebar * akq;
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = c * vkp - s * ebar * vkq;
          v(k, q) = s * vkp + c * ebar * vkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk - s * e * aqk;
          a(q, k) = s * apk + c * e * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
    off = off_diagonal_norm(a);
  }

  HermEigen out;
  out.u = v.adjoint();
  out.sigma.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.sigma[i] = a(i, i).real();
  out.sweeps = sweep;
  return out;
}

ComplexMatrix cholesky(const ComplexMatrix& a) {
  if (!a.is_square()) throw PreconditionError("cholesky: matrix is not square");
  const std::size_t n = a.rows();
  ComplexMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0)) throw SolverError("cholesky: matrix is not positive definite", d);
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l;
}

double log_det_hpd(const ComplexMatrix& a) {
  const ComplexMatrix l = cholesky(a);
  double sum = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) sum += 2.0 * std::log(l(i, i).real());
  return sum;
}

ComplexMatrix inverse_hpd(const ComplexMatrix& a) {
  const ComplexMatrix l = cholesky(a);
  const std::size_t n = l.rows();
  // Solve L Y = I column by column, then A^{-1} = Y^H Y.
  ComplexMatrix y(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = col; i < n; ++i) {
      Complex s = (i == col) ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
      for (std::size_t k = col; k < i; ++k) s -= l(i, k) * y(k, col);
      y(i, col) = s / l(i, i).real();
    }
  }
  return gram(y);
}

double capacity(const ComplexMatrix& h, const ComplexMatrix& q) {
  return log_det_hpd(capacity_argument(h, q));
}

ComplexMatrix capacity_gradient(const ComplexMatrix& h, const ComplexMatrix& q) {
  const ComplexMatrix inv = inverse_hpd(capacity_argument(h, q));
  return hermitian_part(h.adjoint() * inv * h);
}

}  // namespace mimocov
