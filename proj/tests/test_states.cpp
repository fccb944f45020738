#include <cmath>

#include "doctest.h"

#include "distillery/bell.hpp"
#include "distillery/eig.hpp"
#include "distillery/states.hpp"

using namespace distillery;

TEST_CASE("single copy amplitudes") {
  auto [a1, b1] = single_copy_amplitudes(1.0);
  CHECK(a1 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(b1 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  auto [a2, b2] = single_copy_amplitudes(0.5);
  CHECK(a2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b2 == doctest::Approx(0.0).epsilon(1e-14));

  auto [a3, b3] = single_copy_amplitudes(0.75);
  CHECK(a3 * a3 == doctest::Approx(0.9330127018922193).epsilon(1e-12));
  CHECK(b3 * b3 == doctest::Approx(0.0669872981077807).epsilon(1e-12));
  // cross-check a^2 b^2 = (2p-1)^2 / 4
  CHECK(a3 * a3 * b3 * b3 == doctest::Approx(0.0625).epsilon(1e-13));
  CHECK(a3 * a3 + b3 * b3 == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("tensor power spectrum") {
  SUBCASE("three Bell pairs are flat") {
    const SchmidtSpectrum s = tensor_power_spectrum(1.0, 3);
    REQUIRE(s.amplitudes.size() == 8);
    for (double amp : s.amplitudes)
      CHECK(amp == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-14));
  }
  SUBCASE("largest squared amplitude is a^(2n) with the right multiplicities") {
    const double p = 0.8;
    auto [a, b] = single_copy_amplitudes(p);
    const SchmidtSpectrum s = tensor_power_spectrum(p, 3);
    CHECK(s.amplitudes[0] * s.amplitudes[0] ==
          doctest::Approx(std::pow(a, 6)).epsilon(1e-13));
    CHECK(s.amplitudes[7] * s.amplitudes[7] ==
          doctest::Approx(std::pow(b, 6)).epsilon(1e-13));
    // lambda_2 = lambda_3 = lambda_4 and lambda_5 = lambda_6 = lambda_7
    CHECK(s.amplitudes[1] == s.amplitudes[2]);
    CHECK(s.amplitudes[2] == s.amplitudes[3]);
    CHECK(s.amplitudes[4] == s.amplitudes[5]);
    CHECK(s.amplitudes[5] == s.amplitudes[6]);
    CHECK(s.amplitudes[1] == doctest::Approx(a * a * b).epsilon(1e-13));
  }
  SUBCASE("n=2 example at p=0.75") {
    const SchmidtSpectrum s = tensor_power_spectrum(0.75, 2);
    REQUIRE(s.amplitudes.size() == 4);
    CHECK(s.amplitudes[0] * s.amplitudes[0] ==
          doctest::Approx(0.8705127018922193).epsilon(1e-12));
    CHECK(s.amplitudes[1] * s.amplitudes[1] == doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(s.amplitudes[2] * s.amplitudes[2] == doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(s.amplitudes[3] * s.amplitudes[3] ==
          doctest::Approx(0.0044872981077807).epsilon(1e-10));
    CHECK(s.sum_squares() == doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("copy count bounds") {
    CHECK_THROWS_AS(tensor_power_spectrum(0.7, 0), std::invalid_argument);
    CHECK_THROWS_AS(tensor_power_spectrum(0.7, 5), std::invalid_argument);
  }
}

TEST_CASE("pure state vector") {
  SUBCASE("p=1 single copy is the Bell state") {
    const StateVector v = pure_state_vector(1.0, 1);
    CHECK(std::abs(v.amps[0] - 1.0 / std::sqrt(2.0)) < 1e-14);
    CHECK(std::abs(v.amps[3] - 1.0 / std::sqrt(2.0)) < 1e-14);
    CHECK(std::abs(v.amps[1]) < 1e-14);
    CHECK(std::abs(v.amps[2]) < 1e-14);
  }
  SUBCASE("p=1/2 single copy is |+>|+>") {
    const StateVector v = pure_state_vector(0.5, 1);
    for (const cplx& amp : v.amps) CHECK(std::abs(amp - 0.5) < 1e-14);
  }
  SUBCASE("n=2 schmidt equals (a^2, ab, ab, b^2)") {
    const double p = 0.83;
    auto [a, b] = single_copy_amplitudes(p);
    const SchmidtSpectrum s = schmidt(pure_state_vector(p, 2), 4, 4);
    CHECK(s.amplitudes[0] == doctest::Approx(a * a).epsilon(1e-12));
    CHECK(s.amplitudes[1] == doctest::Approx(a * b).epsilon(1e-12));
    CHECK(s.amplitudes[2] == doctest::Approx(a * b).epsilon(1e-12));
    CHECK(s.amplitudes[3] == doctest::Approx(b * b).epsilon(1e-10));
  }
}

TEST_CASE("spectrum consistency between the closed form and the dense route") {
  for (int copies = 1; copies <= 3; ++copies) {
    for (int i = 0; i <= 20; ++i) {
      const double p = 0.5 + 0.5 * i / 20.0;
      const SchmidtSpectrum closed = tensor_power_spectrum(p, copies);
      const SchmidtSpectrum dense =
          schmidt(pure_state_vector(p, copies), std::size_t{1} << copies,
                  std::size_t{1} << copies);
      REQUIRE(closed.amplitudes.size() == dense.amplitudes.size());
      for (std::size_t k = 0; k < closed.amplitudes.size(); ++k)
        CHECK(std::abs(closed.amplitudes[k] - dense.amplitudes[k]) < 1e-10);
    }
  }
}

TEST_CASE("largest schmidt probability is non-increasing in p") {
  for (int copies = 1; copies <= 4; ++copies) {
    double prev = 2.0;
    for (int i = 0; i <= 40; ++i) {
      const double p = 0.5 + 0.5 * i / 40.0;
      const double lam1 = std::pow(tensor_power_spectrum(p, copies).largest(), 2);
      CHECK(lam1 <= prev + 1e-12);
      prev = lam1;
    }
  }
}

TEST_CASE("mixed density basics") {
  SUBCASE("p=1 is the Bell projector") {
    const ComplexMatrix rho = mixed_density(1.0, 1);
    CHECK(std::real(rho.trace()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(max_abs_diff(rho * rho, rho) < 1e-12);
  }
  SUBCASE("p=1/2 has eigenvalues (1/2, 1/2, 0, 0)") {
    const EigResult eig = hermitian_eig(mixed_density(0.5, 1));
    CHECK(eig.values[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eig.values[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(eig.values[2]) < 1e-12);
    CHECK(std::abs(eig.values[3]) < 1e-12);
  }
  SUBCASE("PSD and unit trace") {
    for (int copies = 1; copies <= 3; ++copies)
      for (double p : {0.5, 0.6, 0.75, 0.9, 1.0}) {
        const ComplexMatrix rho = mixed_density(p, copies);
        CHECK(std::real(rho.trace()) == doctest::Approx(1.0).epsilon(1e-12));
        const EigResult eig = hermitian_eig(rho);
        CHECK(eig.values.back() >= -1e-10);
      }
  }
  SUBCASE("pure at the endpoints") {
    for (double p : {0.0, 1.0}) {
      const ComplexMatrix rho = mixed_density(p, 2);
      CHECK(std::real((rho * rho).trace()) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("mixed density equals the flip-twirl expansion at n=2") {
  const double p = 0.71;
  const StateVector bell2 = pure_state_vector(1.0, 2);
  const WeightVector wv = mixed_weights(p, 2);
  const ComplexMatrix ida = ComplexMatrix::identity(4);
  ComplexMatrix expanded(16, 16);
  for (unsigned x = 0; x < 4; ++x) {
    const ComplexMatrix flip = kron(ida, x_string(x, 2));
    expanded += wv.w[x] * (flip * outer(bell2) * flip);
  }
  CHECK(max_abs_diff(expanded, mixed_density(p, 2)) < 1e-12);
}

TEST_CASE("mixed weights") {
  const WeightVector w1 = mixed_weights(0.7, 1);
  CHECK(w1.w[0] == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(w1.w[1] == doctest::Approx(0.3).epsilon(1e-14));

  const WeightVector w2 = mixed_weights(0.75, 2);
  CHECK(w2.w[0] == doctest::Approx(0.5625).epsilon(1e-14));
  CHECK(w2.w[1] == doctest::Approx(0.1875).epsilon(1e-14));
  CHECK(w2.w[2] == doctest::Approx(0.1875).epsilon(1e-14));
  CHECK(w2.w[3] == doctest::Approx(0.0625).epsilon(1e-14));

  for (int copies = 1; copies <= 3; ++copies)
    for (double p : {0.5, 0.66, 0.94})
      CHECK(mixed_weights(p, copies).sum() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("schmidt ladder matches the tensor power spectrum") {
  const double p = 0.77;
  const SchmidtSpectrum expected = tensor_power_spectrum(p, 3);
  const SchmidtSpectrum got = schmidt(schmidt_ladder_state(p, 3), 8, 8);
  for (std::size_t k = 0; k < expected.amplitudes.size(); ++k)
    CHECK(std::abs(got.amplitudes[k] - expected.amplitudes[k]) < 1e-12);
}
