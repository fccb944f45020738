#include "distillery/complex_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace distillery {

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  ComplexMatrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

cplx ComplexMatrix::trace() const {
  cplx t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const cplx& z : data_) m = std::max(m, std::abs(z));
  return m;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const cplx& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

bool ComplexMatrix::is_hermitian(double tol) const {
  if (rows_ != cols_) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i; j < cols_; ++j)
      if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
  return true;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
    throw std::invalid_argument("matrix shape mismatch in +=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
    throw std::invalid_argument("matrix shape mismatch in -=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (cplx& z : data_) z *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul shape mismatch");
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx{0.0, 0.0}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx{0.0, 0.0}) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("matrix shape mismatch in max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

ComplexMatrix partial_trace_b(const ComplexMatrix& m, std::size_t dim_a,
                              std::size_t dim_b) {
  if (m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b)
    throw std::invalid_argument("partial_trace_b dimension mismatch");
  ComplexMatrix out(dim_a, dim_a);
  for (std::size_t i = 0; i < dim_a; ++i)
    for (std::size_t j = 0; j < dim_a; ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < dim_b; ++k)
        s += m(i * dim_b + k, j * dim_b + k);
      out(i, j) = s;
    }
  return out;
}

ComplexMatrix partial_trace_a(const ComplexMatrix& m, std::size_t dim_a,
                              std::size_t dim_b) {
  if (m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b)
    throw std::invalid_argument("partial_trace_a dimension mismatch");
  ComplexMatrix out(dim_b, dim_b);
  for (std::size_t k = 0; k < dim_b; ++k)
    for (std::size_t l = 0; l < dim_b; ++l) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < dim_a; ++i)
        s += m(i * dim_b + k, i * dim_b + l);
      out(k, l) = s;
    }
  return out;
}

double StateVector::norm() const {
  double s = 0.0;
  for (const cplx& z : amps) s += std::norm(z);
  return std::sqrt(s);
}

cplx inner(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("statevector dim mismatch");
  cplx s = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) s += std::conj(a.amps[k]) * b.amps[k];
  return s;
}

StateVector apply(const ComplexMatrix& m, const StateVector& v) {
  if (m.cols() != v.dim()) throw std::invalid_argument("apply dim mismatch");
  StateVector out;
  out.amps.assign(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v.amps[j];
    out.amps[i] = s;
  }
  return out;
}

ComplexMatrix outer(const StateVector& v) {
  ComplexMatrix out(v.dim(), v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i)
    for (std::size_t j = 0; j < v.dim(); ++j)
      out(i, j) = v.amps[i] * std::conj(v.amps[j]);
  return out;
}

double expectation(const ComplexMatrix& m, const StateVector& v) {
  return std::real(inner(v, apply(m, v)));
}

}  // namespace distillery
