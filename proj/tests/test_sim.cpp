#include <cmath>
#include <set>

#include "doctest.h"

#include "distillery/distill.hpp"
#include "distillery/eig.hpp"
#include "distillery/rng.hpp"
#include "distillery/sim.hpp"
#include "distillery/states.hpp"

using namespace distillery;

namespace {

double fidelity_to(const StateVector& target, const Circuit& prep) {
  const RunResult res = run(prep, 1);
  return std::norm(inner(target, res.state));
}

StateVector random_sparse_state(Rng& rng, std::size_t dim, int nonzeros) {
  std::set<std::size_t> picks;
  while (static_cast<int>(picks.size()) < nonzeros)
    picks.insert(static_cast<std::size_t>(rng.next_u64() % dim));
  StateVector v;
  v.amps.assign(dim, 0.0);
  double nrm = 0.0;
  for (std::size_t idx : picks) {
    const cplx z(rng.gaussian(), rng.gaussian());
    v.amps[idx] = z;
    nrm += std::norm(z);
  }
  nrm = std::sqrt(nrm);
  for (cplx& z : v.amps) z /= nrm;
  return v;
}

}  // namespace

TEST_CASE("run: Bell preparation and Born statistics") {
  Circuit bell;
  bell.qubits = 2;
  bell.h(0);
  bell.cx(0, 1);
  const RunResult res = run(bell, 3);
  CHECK(std::abs(res.state.amps[0] - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(res.state.amps[3] - 1.0 / std::sqrt(2.0)) < 1e-12);

  // outcome-1 frequency on |+> over many seeds
  Circuit plus;
  plus.qubits = 1;
  plus.h(0);
  plus.measure(0, 0);
  long ones = 0;
  const long trials = 100000;
  for (long s = 0; s < trials; ++s) ones += run(plus, static_cast<std::uint64_t>(s)).bits[0];
  const double freq = static_cast<double>(ones) / trials;
  CHECK(std::abs(freq - 0.5) < 0.01);
}

TEST_CASE("run: measured Z-Z correlation of the prepared noisy state") {
  const double p = 0.75;
  Circuit c = prepare_sparse(pure_state_vector(p, 1));
  c.measure(0, 0);
  c.measure(1, 1);
  long equal = 0;
  const long trials = 60000;
  for (long s = 0; s < trials; ++s) {
    const RunResult r = run(c, static_cast<std::uint64_t>(s));
    if (r.bits[0] == r.bits[1]) ++equal;
  }
  // amplitudes give P(equal outcomes) = p
  CHECK(std::abs(static_cast<double>(equal) / trials - p) < 0.01);
}

TEST_CASE("run: norm preserved by unitary gates, bad targets rejected") {
  Circuit c;
  c.qubits = 3;
  c.h(0);
  c.ry(1, 0.7);
  c.cx(0, 2);
  c.rz(2, -1.3);
  c.unitary(1, {cplx(0, 1), cplx(0), cplx(0), cplx(0, -1)});
  const RunResult res = run(c, 5);
  CHECK(std::abs(res.state.norm() - 1.0) < 1e-10);

  Circuit bad;
  bad.qubits = 2;
  bad.x(2);
  CHECK_THROWS_AS(run(bad, 1), std::invalid_argument);
}

TEST_CASE("prepare_sparse: canonical targets") {
  SUBCASE("Bell state takes two gates") {
    StateVector bell;
    bell.amps = {1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0)};
    const Circuit c = prepare_sparse(bell);
    CHECK(c.gates.size() == 2);
    CHECK(analyze_circuit(c).two_qubit_gates == 1);
    CHECK(fidelity_to(bell, c) >= 1.0 - 1e-9);
  }
  SUBCASE("single-copy ladder and the dense computational state") {
    for (double p : {0.6, 0.75}) {
      const StateVector ladder = schmidt_ladder_state(p, 1);
      CHECK(fidelity_to(ladder, prepare_sparse(ladder)) >= 1.0 - 1e-9);
      const StateVector dense = pure_state_vector(p, 1);
      CHECK(fidelity_to(dense, prepare_sparse(dense)) >= 1.0 - 1e-9);
    }
  }
  SUBCASE("two-copy ladder: fidelity and the two-qubit budget") {
    const StateVector ladder = schmidt_ladder_state(0.75, 2);
    const Circuit c = prepare_sparse(ladder);
    CHECK(fidelity_to(ladder, c) >= 1.0 - 1e-9);
    CHECK(analyze_circuit(c).two_qubit_gates <= 6);
  }
  SUBCASE("rejects overfull targets") {
    StateVector flat;
    flat.amps.assign(32, 1.0 / std::sqrt(32.0));
    CHECK_THROWS_AS(prepare_sparse(flat), std::invalid_argument);
  }
}

TEST_CASE("prepare_sparse: random supports up to 16 nonzeros") {
  Rng rng(2718);
  for (int nonzeros : {1, 2, 3, 5, 8, 13, 16}) {
    for (std::size_t dim : {std::size_t{16}, std::size_t{64}}) {
      const StateVector target = random_sparse_state(rng, dim, nonzeros);
      const Circuit c = prepare_sparse(target);
      CHECK(fidelity_to(target, c) >= 1.0 - 1e-9);
      // gate count is governed by the support size, not the dimension
      CHECK(static_cast<int>(c.gates.size()) <= 90 * nonzeros + 10);
    }
  }
}

TEST_CASE("circuit text form round-trips and pins the Bell prep golden") {
  StateVector bell;
  bell.amps = {1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0)};
  const Circuit c = prepare_sparse(bell);
  const std::string text = to_text(c);
  CHECK(text ==
        "QUBITS 2\nCBITS 0\n"
        "U1Q 0 0.70710678118654757 0 -0.70710678118654757 0 "
        "0.70710678118654757 0 0.70710678118654757 -0\n"
        "CU 0 1 0 -0 1 -0 1 -0 0 -0\n");
  const Circuit back = from_text(text);
  CHECK(to_text(back) == text);

  Circuit sampler;
  sampler.qubits = 2;
  sampler.h(0);
  sampler.ry(1, 0.3);
  sampler.cx(0, 1);
  sampler.measure(1, 0);
  const Circuit round = from_text(to_text(sampler));
  const RunResult a = run(sampler, 77);
  const RunResult b = run(round, 77);
  CHECK(a.bits == b.bits);
  for (std::size_t k = 0; k < a.state.dim(); ++k)
    CHECK(std::abs(a.state.amps[k] - b.state.amps[k]) < 1e-14);
}

TEST_CASE("distill_protocol: branches, fidelity, determinism") {
  const double p = 0.75;
  bool saw_success = false, saw_failure = false;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    const ProtocolOutcome out = distill_protocol(p, 2, seed);
    const ProtocolOutcome again = distill_protocol(p, 2, seed);
    CHECK(out.success == again.success);
    CHECK(out.message_bits == again.message_bits);
    CHECK(!out.regime_fallback);
    if (out.success) {
      saw_success = true;
      CHECK(out.bell_fidelity >= 1.0 - 1e-9);
    } else {
      saw_failure = true;
      const SchmidtSpectrum s = schmidt(out.final_state, 4, 4);
      CHECK(s.amplitudes[1] < 1e-9);  // product across the cut
    }
    CHECK(out.message_bits.size() <= 3);
  }
  CHECK(saw_success);
  CHECK(saw_failure);
}

TEST_CASE("distill_batch: success statistics against the closed form") {
  SUBCASE("n=2, p=0.75") {
    const DistillBatchStats stats = distill_batch(0.75, 2, 20000, 99);
    CHECK(stats.analytic_success == doctest::Approx(0.2589745962).epsilon(1e-9));
    const double sigma =
        std::sqrt(stats.analytic_success * (1.0 - stats.analytic_success) / 20000.0);
    CHECK(std::abs(stats.success_rate - stats.analytic_success) < 4.0 * sigma);
    CHECK(stats.min_success_fidelity >= 1.0 - 1e-9);
    CHECK(stats.max_failure_residual < 1e-9);
    CHECK(std::abs(stats.chsh_estimate - v_ed(0.75, 2)) < 0.05);
  }
  SUBCASE("n=3, p=0.9") {
    const DistillBatchStats stats = distill_batch(0.9, 3, 20000, 7);
    CHECK(stats.analytic_success == doctest::Approx(0.976).epsilon(1e-12));
    const double sigma = std::sqrt(0.976 * 0.024 / 20000.0);
    CHECK(std::abs(stats.success_rate - 0.976) < 4.0 * sigma);
    CHECK(stats.min_success_fidelity >= 1.0 - 1e-9);
  }
  SUBCASE("execution policies agree bit for bit") {
    const DistillBatchStats a = distill_batch(0.8, 2, 30000, 5, Exec::serial);
    const DistillBatchStats b = distill_batch(0.8, 2, 30000, 5, Exec::openmp);
    CHECK(a.successes == b.successes);
    CHECK(a.chsh_estimate == b.chsh_estimate);
  }
}

TEST_CASE("chsh_experiment sampling") {
  SUBCASE("Tsirelson point") {
    const double s = chsh_experiment(pure_state_vector(1.0, 1),
                                     meas_observables(1.0), 1000000, 11);
    CHECK(std::abs(s - kTsirelsonBound) < 0.01);
  }
  SUBCASE("noisy state at p=0.75") {
    const double s = chsh_experiment(pure_state_vector(0.75, 1),
                                     meas_observables(0.75), 1000000, 12);
    CHECK(std::abs(s - 2.0 * std::sqrt(1.25)) < 0.01);
  }
  SUBCASE("product state stays classical") {
    StateVector prod;
    prod.amps.assign(4, 0.0);
    prod.amps[0] = 1.0;
    const double s = chsh_experiment(prod, meas_observables(0.75), 200000, 13);
    CHECK(std::abs(s) <= 2.01);
  }
  SUBCASE("two-copy ladder with the pairing observables") {
    const double p = 0.75;
    const double s = chsh_experiment(schmidt_ladder_state(p, 2),
                                     pairing_block_quad(p, 2), 1000000, 14);
    CHECK(std::abs(s - v_nd_closed(p, 2)) < 0.01);
  }
  SUBCASE("error scales like 1/sqrt(shots)") {
    const double truth = 2.0 * std::sqrt(1.25);
    for (long shots : {10000L, 100000L, 1000000L}) {
      const double s = chsh_experiment(pure_state_vector(0.75, 1),
                                       meas_observables(0.75), shots, 15);
      CHECK(std::abs(s - truth) < 20.0 / std::sqrt(static_cast<double>(shots)));
    }
  }
  SUBCASE("execution policies agree bit for bit") {
    const StateVector psi = pure_state_vector(0.8, 1);
    const ObservableQuad q = meas_observables(0.8);
    CHECK(chsh_experiment(psi, q, 250000, 4, Exec::serial) ==
          chsh_experiment(psi, q, 250000, 4, Exec::openmp));
  }
}

TEST_CASE("distill_protocol: out-of-regime fallback is flagged but still sound") {
  // at p = 0.95, n = 3 the top Schmidt probability drops below 1/2
  bool flagged = false;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    const ProtocolOutcome out = distill_protocol(0.95, 3, seed);
    flagged = flagged || out.regime_fallback;
    if (out.success) CHECK(out.bell_fidelity >= 1.0 - 1e-9);
  }
  CHECK(flagged);
}

TEST_CASE("chsh_experiment rejects unnormalized states") {
  StateVector bad;
  bad.amps.assign(4, 0.5);
  bad.amps[0] = 0.9;
  CHECK_THROWS_AS(chsh_experiment(bad, meas_observables(0.75), 100, 1),
                  std::invalid_argument);
}

TEST_CASE("pipeline metrics: the distillation phase dominates") {
  for (double p : {0.6, 0.75, 0.9}) {
    const ResourceMetrics nd = pipeline_metrics(Protocol::nonlocality, p, 2);
    const ResourceMetrics ed = pipeline_metrics(Protocol::entanglement, p, 2);
    CHECK(nd.logical_qubits == 4);
    CHECK(ed.logical_qubits == 5);
    CHECK(nd.depth < ed.depth);
    CHECK(nd.two_qubit_gates < ed.two_qubit_gates);
    CHECK(ed.gate_counts.at("M") == 5);  // three ancilla reads + the pair
    CHECK(nd.gate_counts.at("M") == 4);
  }
  CHECK_THROWS_AS(pipeline_metrics(Protocol::entanglement, 0.75, 3),
                  std::invalid_argument);
}
