#pragma once

#include <utility>
#include <vector>

#include "distillery/complex_matrix.hpp"
#include "distillery/eig.hpp"

namespace distillery {

// The one-parameter family: |Psi> = sqrt(p)|psi> + sqrt(1-p)|phi| with
// |psi>,|phi> the two Bell states, and rho = p|psi><psi| + (1-p)|phi><phi|.
// Qubit convention everywhere: Alice's n qubits first, Bob's n second, copy 1
// most significant on each side.

// Tensor-power expansion weights of rho^{(x)n}: w_x = p^(n-|x|) (1-p)^|x|.
struct WeightVector {
  int copies = 0;
  std::vector<double> w;  // indexed by bitstring x in {0,1}^n

  double sum() const;
};

// Schmidt amplitudes of a single copy: a = (sqrt(p)+sqrt(1-p))/sqrt(2) and
// b = |sqrt(p)-sqrt(1-p)|/sqrt(2); the absolute value keeps spectra sorted on
// both sides of p = 1/2.
std::pair<double, double> single_copy_amplitudes(double p);

// Multiset { a^(n-k) b^k with multiplicity C(n,k) }, descending.  n in 1..4.
SchmidtSpectrum tensor_power_spectrum(double p, int copies);

// |Psi>^{(x)n} in the shared qubit convention.  n in 1..3.
StateVector pure_state_vector(double p, int copies);

// rho^{(x)n} as a dense 4^n x 4^n Hermitian PSD unit-trace matrix.  n in 1..3.
ComplexMatrix mixed_density(double p, int copies);

WeightVector mixed_weights(double p, int copies);

// The Schmidt-basis form of |Psi>^{(x)n}: sum_x sigma_x |x>_A |x>_B, the
// 2^n-sparse ladder every preparation and distillation routine starts from.
StateVector schmidt_ladder_state(double p, int copies);

int hamming_weight(unsigned x);
double binomial(int n, int k);

}  // namespace distillery
