#pragma once

#include <vector>

#include "distillery/complex_matrix.hpp"

namespace distillery {

// Eigenvalues descending; eigenvectors are the matching orthonormal columns.
struct EigResult {
  std::vector<double> values;
  ComplexMatrix vectors;
};

// Cyclic Jacobi for complex Hermitian matrices.  Dimensions here never exceed
// 128, so O(d^3) per sweep is immaterial and the method is deterministic.
// Throws std::invalid_argument for non-Hermitian input.
EigResult hermitian_eig(const ComplexMatrix& h);

// Largest singular value, via the Gram matrix; tiny negative Gram eigenvalues
// are clamped to zero.
double spectral_norm(const ComplexMatrix& m);

// Descending Schmidt amplitudes of a bipartite pure state; the amplitudes of
// the single source-of-truth spectrum (probabilities are their squares).
struct SchmidtSpectrum {
  std::vector<double> amplitudes;

  double largest() const { return amplitudes.empty() ? 0.0 : amplitudes.front(); }
  double sum_squares() const;
};

SchmidtSpectrum schmidt(const StateVector& v, std::size_t dim_a, std::size_t dim_b);

// O = V sign(diag) V^dagger.  Eigenvalues within `degeneracy_tol` of zero make
// the parameterization ill-defined and are rejected.
ComplexMatrix sign_observable(const ComplexMatrix& h, double degeneracy_tol = 1e-9);

}  // namespace distillery
