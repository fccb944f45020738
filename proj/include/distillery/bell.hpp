#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distillery/complex_matrix.hpp"
#include "distillery/eig.hpp"
#include "distillery/parallel.hpp"
#include "distillery/rng.hpp"

namespace distillery {

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

// X^x = tensor product of X on the qubits flagged by the bits of x (bit for
// copy 1 most significant), identity elsewhere.
ComplexMatrix x_string(unsigned bits, int copies);

// The four dichotomic observables of one CHSH experiment; each side lives on
// a 2^n-dimensional space.
struct ObservableQuad {
  int copies = 1;
  ComplexMatrix a0, a1, b0, b1;

  std::size_t side_dim() const { return a0.rows(); }
};

// Symmetric XOR-circulant kernel matrix: K[x,y] = 2^-n sum_z w_{x xor z}
// w_{y xor z}.  Real entries, indexed by bitstrings.
struct KLMatrix {
  int copies = 0;
  std::vector<double> entries;  // 2^n x 2^n row-major

  std::size_t dim() const { return std::size_t{1} << copies; }
  double at(std::size_t x, std::size_t y) const { return entries[x * dim() + y]; }
  // representative entry for a given XOR weight (a, b, c, d in order)
  double entry_for_weight(int weight) const;
  double row_sum(std::size_t x) const;
};

struct BellBundle {
  ObservableQuad quad;
  ComplexMatrix m;        // CHSH operator
  ComplexMatrix n_op;     // sum_x w_x (1 (x) X^x) M (1 (x) X^x)
  KLMatrix k;
  ComplexMatrix ktilde;   // Bob-side kernel average of B_i^x B_i^y
  ComplexMatrix ltilde;   // Bob-side kernel average of the C_xy commutators
  ComplexMatrix a_comm;   // A1 A0 - A0 A1 on Alice's side
};

// Single-copy observables achieving 2 sqrt(1+(1-2p)^2) on |Psi(p)> and on the
// mixed state: A0 = Z, A1 = X, B0/B1 = ((2p-1) Z +- X)/sqrt(1+(1-2p)^2).
ObservableQuad meas_observables(double p);

// n-fold tensor power of a single-copy quad.
ObservableQuad tensor_power_quad(const ObservableQuad& q, int copies);

// Block-diagonal observables over consecutive Schmidt pairs that attain the
// pairing bound v_nd_pure on the ladder state.
ObservableQuad pairing_block_quad(double p, int copies);

ObservableQuad random_quad(Rng& rng, int copies);

ComplexMatrix chsh_operator(const ObservableQuad& quad);
double chsh_value(const ComplexMatrix& rho, const ObservableQuad& quad);

ComplexMatrix build_n_operator(double p, int copies, const ObservableQuad& quad);
KLMatrix kl_matrix(double p, int copies);
BellBundle build_decomposition(double p, int copies, const ObservableQuad& quad);

// Max-abs entry of N^2 - (4 1(x)Ktilde + 2 A(x)Ltilde).
double verify_nsquare(double p, int copies, const ObservableQuad& quad);
double verify_nsquare(const BellBundle& bundle);

// Triangle certificate values from the kernel entries: 2|a-b| (n=1),
// 4|a-b|+4|c-b| (n=2), 8|a-b|+24|c-b|+8|d-b| (n=3).
double ltilde_norm_bound(double p, int copies);

// Kernel eigenvalues via the Walsh-Hadamard transform of the first row.
std::vector<double> kl_eigenvalues_wht(const KLMatrix& k);

struct SeesawResult {
  double value = 0.0;
  ObservableQuad quad;
  bool converged = false;
  int best_restart = -1;
  std::vector<double> trace;  // objective after each full sweep, best restart
};

// Alternating sign-observable updates, best over seeded random restarts.
SeesawResult seesaw_optimize(const ComplexMatrix& rho, std::uint64_t seed,
                             int restarts = 20, int max_iters = 500,
                             Exec exec = Exec::openmp);

}  // namespace distillery
