#include "distillery/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace distillery {

namespace {

double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += std::norm(a(i, j));
  return std::sqrt(2.0 * s);
}

}  // namespace

EigResult hermitian_eig(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("hermitian_eig: not square");
  const double scale = std::max(1.0, h.max_abs());
  if (!h.is_hermitian(1e-12 * scale))
    throw std::invalid_argument("hermitian_eig: input is not Hermitian");

  const std::size_t d = h.rows();
  ComplexMatrix a = h;
  // symmetrize away representation noise
  for (std::size_t i = 0; i < d; ++i) {
    a(i, i) = cplx(std::real(a(i, i)), 0.0);
    for (std::size_t j = i + 1; j < d; ++j) {
      cplx m = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = m;
      a(j, i) = std::conj(m);
    }
  }
  ComplexMatrix v = ComplexMatrix::identity(d);

  const double stop = 1e-15 * std::max(1.0, a.frobenius_norm());
  const int max_sweeps = 80;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= stop) break;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag < 1e-300) continue;
        // phase it real, then a real Jacobi rotation
        const cplx phase = apq / mag;
        const double app = std::real(a(p, p));
        const double aqq = std::real(a(q, q));
        const double tau = (aqq - app) / (2.0 * mag);
        double t;
        if (tau >= 0.0)
          t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
        else
          t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J on (p,q): [[c, s],[-s e^{-i phi}, c e^{-i phi}]] columns
        const cplx jp_q = s;                         // J(p,q)
        const cplx jq_p = -s * std::conj(phase);     // J(q,p)
        const cplx jq_q = c * std::conj(phase);      // J(q,q)
        // column update: A <- A J, V <- V J
        for (std::size_t k = 0; k < d; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp + jq_p * akq;
          a(k, q) = jp_q * akp + jq_q * akq;
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp + jq_p * vkq;
          v(k, q) = jp_q * vkp + jq_q * vkq;
        }
        // row update: A <- J^dagger A
        for (std::size_t k = 0; k < d; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk + std::conj(jq_p) * aqk;
          a(q, k) = std::conj(jp_q) * apk + std::conj(jq_q) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = cplx(std::real(a(p, p)), 0.0);
        a(q, q) = cplx(std::real(a(q, q)), 0.0);
      }
    }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const double ex = std::real(a(x, x)), ey = std::real(a(y, y));
    if (ex != ey) return ex > ey;
    return x < y;
  });

  EigResult out;
  out.values.resize(d);
  out.vectors = ComplexMatrix(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    out.values[j] = std::real(a(order[j], order[j]));
    for (std::size_t i = 0; i < d; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

double spectral_norm(const ComplexMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  const bool tall = m.rows() >= m.cols();
  const ComplexMatrix gram = tall ? m.adjoint() * m : m * m.adjoint();
  EigResult eig = hermitian_eig(gram);
  const double top = eig.values.empty() ? 0.0 : eig.values.front();
  return std::sqrt(std::max(0.0, top));
}

double SchmidtSpectrum::sum_squares() const {
  double s = 0.0;
  for (double a : amplitudes) s += a * a;
  return s;
}

SchmidtSpectrum schmidt(const StateVector& v, std::size_t dim_a, std::size_t dim_b) {
  if (dim_a * dim_b != v.dim())
    throw std::invalid_argument("schmidt: dimA*dimB must equal the state dimension");
  const std::size_t small = std::min(dim_a, dim_b);
  ComplexMatrix gram(small, small);
  if (dim_b <= dim_a) {
    // C^dagger C, C(i,j) = v[i*dim_b + j]
    for (std::size_t j = 0; j < dim_b; ++j)
      for (std::size_t l = 0; l < dim_b; ++l) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < dim_a; ++i)
          s += std::conj(v.amps[i * dim_b + j]) * v.amps[i * dim_b + l];
        gram(j, l) = s;
      }
  } else {
    for (std::size_t i = 0; i < dim_a; ++i)
      for (std::size_t k = 0; k < dim_a; ++k) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < dim_b; ++j)
          s += v.amps[i * dim_b + j] * std::conj(v.amps[k * dim_b + j]);
        gram(i, k) = s;
      }
  }
  EigResult eig = hermitian_eig(gram);
  SchmidtSpectrum spec;
  spec.amplitudes.resize(small);
  for (std::size_t k = 0; k < small; ++k) {
    double lam = eig.values[k];
    // Gram eigenvalues carry absolute noise near machine epsilon; the sqrt
    // would inflate it into ~1e-8 phantom amplitudes, so floor both signs.
    if (lam < 1e-14) lam = 0.0;
    spec.amplitudes[k] = std::sqrt(lam);
  }
  return spec;
}

ComplexMatrix sign_observable(const ComplexMatrix& h, double degeneracy_tol) {
  EigResult eig = hermitian_eig(h);
  for (double e : eig.values)
    if (std::abs(e) < degeneracy_tol)
      throw std::domain_error(
          "sign_observable: eigenvalue too close to zero, parameterization is "
          "degenerate here");
  const std::size_t d = h.rows();
  ComplexMatrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double sgn = eig.values[k] > 0.0 ? 1.0 : -1.0;
        s += eig.vectors(i, k) * sgn * std::conj(eig.vectors(j, k));
      }
      out(i, j) = s;
    }
  return out;
}

}  // namespace distillery
