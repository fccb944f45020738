#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace distillery {

using cplx = std::complex<double>;

// Dense row-major complex matrix.  Sized for the dimensions this project
// needs (up to 64 for three copies of a two-qubit state, 128 with an
// ancilla); no sparse formats, no LAPACK ambitions.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  static ComplexMatrix identity(std::size_t dim);
  static ComplexMatrix zero(std::size_t rows, std::size_t cols) {
    return ComplexMatrix(rows, cols);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  const std::vector<cplx>& data() const { return data_; }
  std::vector<cplx>& data() { return data_; }

  ComplexMatrix adjoint() const;
  cplx trace() const;
  double max_abs() const;
  double frobenius_norm() const;
  bool is_hermitian(double tol = 1e-12) const;

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(cplx s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx s, ComplexMatrix a);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

// Partial traces over a dimA x dimB bipartite operator.
ComplexMatrix partial_trace_b(const ComplexMatrix& m, std::size_t dim_a,
                              std::size_t dim_b);
ComplexMatrix partial_trace_a(const ComplexMatrix& m, std::size_t dim_a,
                              std::size_t dim_b);

// Complex amplitude vector; dim is a power of 4 for the n-copy bipartite
// states but the kernel does not enforce that.
struct StateVector {
  std::vector<cplx> amps;

  std::size_t dim() const { return amps.size(); }
  double norm() const;
};

cplx inner(const StateVector& a, const StateVector& b);
StateVector apply(const ComplexMatrix& m, const StateVector& v);
ComplexMatrix outer(const StateVector& v);
double expectation(const ComplexMatrix& m, const StateVector& v);

}  // namespace distillery
