#include <cmath>

#include "doctest.h"

#include "distillery/bell.hpp"
#include "distillery/complex_matrix.hpp"
#include "distillery/distill.hpp"
#include "distillery/eig.hpp"
#include "distillery/rng.hpp"
#include "distillery/states.hpp"

using namespace distillery;

namespace {

ComplexMatrix random_hermitian(Rng& rng, std::size_t d) {
  ComplexMatrix h(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    h(i, i) = rng.gaussian();
    for (std::size_t j = i + 1; j < d; ++j) {
      const cplx z(rng.gaussian(), rng.gaussian());
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  }
  return h;
}

ComplexMatrix random_unitary(Rng& rng, std::size_t d) {
  // Gram-Schmidt on a random complex matrix
  ComplexMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = cplx(rng.gaussian(), rng.gaussian());
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t prev = 0; prev < c; ++prev) {
      cplx proj = 0.0;
      for (std::size_t r = 0; r < d; ++r) proj += std::conj(m(r, prev)) * m(r, c);
      for (std::size_t r = 0; r < d; ++r) m(r, c) -= proj * m(r, prev);
    }
    double nrm = 0.0;
    for (std::size_t r = 0; r < d; ++r) nrm += std::norm(m(r, c));
    nrm = std::sqrt(nrm);
    for (std::size_t r = 0; r < d; ++r) m(r, c) /= nrm;
  }
  return m;
}

}  // namespace

TEST_CASE("kron identities and Bell-state symmetry") {
  const ComplexMatrix i2 = ComplexMatrix::identity(2);
  CHECK(max_abs_diff(kron(i2, i2), ComplexMatrix::identity(4)) == 0.0);

  StateVector bell;
  bell.amps = {1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0)};
  const StateVector flipped = apply(kron(pauli_x(), pauli_x()), bell);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(std::abs(flipped.amps[k] - bell.amps[k]) < 1e-15);

  const EigResult zz = hermitian_eig(kron(pauli_z(), pauli_z()));
  CHECK(zz.values[0] == doctest::Approx(1.0));
  CHECK(zz.values[1] == doctest::Approx(1.0));
  CHECK(zz.values[2] == doctest::Approx(-1.0));
  CHECK(zz.values[3] == doctest::Approx(-1.0));
}

TEST_CASE("kron associativity on random small matrices") {
  Rng rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix a = random_hermitian(rng, 2);
    const ComplexMatrix b = random_hermitian(rng, 3);
    const ComplexMatrix c = random_hermitian(rng, 2);
    CHECK(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))) < 1e-12);
  }
}

TEST_CASE("hermitian_eig on Paulis") {
  const EigResult z = hermitian_eig(pauli_z());
  CHECK(z.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(z.values[1] == doctest::Approx(-1.0).epsilon(1e-14));

  const EigResult x = hermitian_eig(pauli_x());
  CHECK(x.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x.values[1] == doctest::Approx(-1.0).epsilon(1e-14));
  // eigenvectors proportional to (1, +-1)/sqrt(2)
  CHECK(std::abs(std::abs(x.vectors(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(x.vectors(0, 0) - x.vectors(1, 0)) < 1e-10);
}

TEST_CASE("hermitian_eig rejects non-Hermitian input") {
  ComplexMatrix m(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(hermitian_eig(m), std::invalid_argument);
}

TEST_CASE("CHSH operator at p=1 has top eigenvalue 2 sqrt 2") {
  const ComplexMatrix m = chsh_operator(meas_observables(1.0));
  const EigResult eig = hermitian_eig(m);
  CHECK(std::abs(eig.values[0] - kTsirelsonBound) < 1e-10);
}

TEST_CASE("eigendecomposition reconstructs random Hermitian matrices") {
  Rng rng(7);
  for (std::size_t d : {2u, 5u, 16u, 33u, 64u}) {
    const ComplexMatrix h = random_hermitian(rng, d);
    const EigResult eig = hermitian_eig(h);
    ComplexMatrix rebuilt(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < d; ++k)
          s += eig.vectors(i, k) * eig.values[k] * std::conj(eig.vectors(j, k));
        rebuilt(i, j) = s;
      }
    CHECK(max_abs_diff(rebuilt, h) < 1e-10);
    // orthonormal columns
    CHECK(max_abs_diff(eig.vectors.adjoint() * eig.vectors,
                       ComplexMatrix::identity(d)) < 1e-10);
  }
}

TEST_CASE("spectral norm basics") {
  CHECK(spectral_norm(ComplexMatrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix h = random_hermitian(rng, 8);
    const EigResult eig = hermitian_eig(h);
    double max_abs_eig = 0.0;
    for (double v : eig.values) max_abs_eig = std::max(max_abs_eig, std::abs(v));
    CHECK(spectral_norm(h) == doctest::Approx(max_abs_eig).epsilon(1e-10));
  }
}

TEST_CASE("commutator of dichotomic observables stays below norm 4") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    ObservableQuad q = random_quad(rng, 1);
    const ComplexMatrix comm = q.a1 * q.a0 - q.a0 * q.a1;
    CHECK(spectral_norm(2.0 * comm) <= 4.0 + 1e-9);
  }
}

TEST_CASE("norm of the twirled CHSH operator matches the closed form") {
  // dense route must agree with 2 sqrt(1 + (1-2p)^2) at p = 0.75
  const ComplexMatrix n_op = build_n_operator(0.75, 1, meas_observables(0.75));
  CHECK(std::abs(spectral_norm(n_op) - 2.0 * std::sqrt(1.25)) < 1e-9);
}

TEST_CASE("schmidt on canonical states") {
  StateVector bell;
  bell.amps = {1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0)};
  const SchmidtSpectrum s = schmidt(bell, 2, 2);
  CHECK(s.amplitudes[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(s.amplitudes[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  // product state at p = 1/2
  const SchmidtSpectrum prod = schmidt(pure_state_vector(0.5, 1), 2, 2);
  CHECK(prod.amplitudes[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(prod.amplitudes[1] < 1e-9);

  // general p
  const double p = 0.8;
  auto [a, b] = single_copy_amplitudes(p);
  const SchmidtSpectrum gen = schmidt(pure_state_vector(p, 1), 2, 2);
  CHECK(gen.amplitudes[0] == doctest::Approx(a).epsilon(1e-12));
  CHECK(gen.amplitudes[1] == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("schmidt rejects mismatched dimensions") {
  StateVector v;
  v.amps.assign(8, 0.0);
  v.amps[0] = 1.0;
  CHECK_THROWS_AS(schmidt(v, 2, 3), std::invalid_argument);
}

TEST_CASE("schmidt spectrum is invariant under local unitaries") {
  Rng rng(5);
  const StateVector psi = pure_state_vector(0.7, 2);
  const SchmidtSpectrum base = schmidt(psi, 4, 4);
  CHECK(base.sum_squares() == doctest::Approx(1.0).epsilon(1e-12));
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix ua = random_unitary(rng, 4);
    const ComplexMatrix ub = random_unitary(rng, 4);
    const SchmidtSpectrum rotated = schmidt(apply(kron(ua, ub), psi), 4, 4);
    for (std::size_t k = 0; k < base.amplitudes.size(); ++k)
      CHECK(std::abs(rotated.amplitudes[k] - base.amplitudes[k]) < 1e-10);
  }
}

TEST_CASE("sign_observable") {
  CHECK(max_abs_diff(sign_observable(pauli_z()), pauli_z()) < 1e-12);
  CHECK(max_abs_diff(sign_observable(3.0 * pauli_x()), pauli_x()) < 1e-12);

  const ComplexMatrix zx = pauli_z() + pauli_x();
  const ComplexMatrix expected = (1.0 / std::sqrt(2.0)) * (pauli_z() + pauli_x());
  CHECK(max_abs_diff(sign_observable(zx), expected) < 1e-12);

  // squares to identity
  Rng rng(9);
  const ComplexMatrix h = random_hermitian(rng, 8);
  const ComplexMatrix o = sign_observable(h);
  CHECK(o.is_hermitian(1e-10));
  CHECK(max_abs_diff(o * o, ComplexMatrix::identity(8)) < 1e-10);

  ComplexMatrix degenerate(2, 2);
  degenerate(0, 0) = 1.0;
  degenerate(1, 1) = 1e-12;
  CHECK_THROWS_AS(sign_observable(degenerate), std::domain_error);
}

TEST_CASE("partial traces agree with expectation bookkeeping") {
  Rng rng(13);
  const ComplexMatrix rho = mixed_density(0.7, 1);
  const ComplexMatrix b = random_hermitian(rng, 2);
  const ComplexMatrix eff = partial_trace_b(rho * kron(ComplexMatrix::identity(2), b), 2, 2);
  // tr(rho (A x B)) = tr(A eff) for any A; test with a couple of A's
  for (const ComplexMatrix& a : {pauli_z(), pauli_x(), random_hermitian(rng, 2)}) {
    const double lhs = std::real((kron(a, b) * rho).trace());
    const double rhs = std::real((a * eff).trace());
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}
