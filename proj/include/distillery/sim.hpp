#pragma once

#include <cstdint>
#include <vector>

#include "distillery/bell.hpp"
#include "distillery/circuit.hpp"
#include "distillery/complex_matrix.hpp"
#include "distillery/parallel.hpp"
#include "distillery/rng.hpp"

namespace distillery {

struct RunResult {
  StateVector state;
  std::vector<int> bits;
};

// Executes a circuit from |0...0>.  Measurements sample the Born rule from
// the seeded stream and collapse the state.
RunResult run(const Circuit& circuit, std::uint64_t seed);

// Synthesis for targets with few nonzero amplitudes (s <= 16): repeatedly
// merge the closest pair of basis states with CNOT alignment plus a
// (multi-)controlled rotation, then invert the reduction.  Gate count scales
// with s, not with the dimension.
Circuit prepare_sparse(const StateVector& target);

struct ProtocolOutcome {
  bool success = false;
  std::vector<int> message_bits;  // Alice -> Bob, one bit per filter stage
  StateVector final_state;        // shared 2n-qubit state, ancilla removed
  double bell_fidelity = 0.0;
  bool regime_fallback = false;   // sigma_1^2 < 1/2: filter chain may be suboptimal
};

// One-way LOCC distillation on |Psi(p)>^{(x)n}: Schmidt rotation, a chain of
// two-outcome ancilla filters (success leaves a Bell pair on a known Schmidt
// pair), classical outcome bits, and local corrections onto the designated
// qubit pair (A1, B1).
ProtocolOutcome distill_protocol(double p, int copies, std::uint64_t seed);

struct DistillBatchStats {
  long runs = 0;
  long successes = 0;
  double success_rate = 0.0;
  double analytic_success = 0.0;
  double chsh_estimate = 0.0;  // end-to-end: sampled Bell pair on success, fixed local strategy scoring 2 on failure
  double min_success_fidelity = 1.0;
  double max_failure_residual = 0.0;  // second Schmidt amplitude of the failure state
};

DistillBatchStats distill_batch(double p, int copies, long runs,
                                std::uint64_t seed, Exec exec = Exec::openmp);

// Samples CHSH with uniformly drawn settings and projective measurements in
// each observable's eigenbasis; returns the empirical S.
double chsh_experiment(const StateVector& state, const ObservableQuad& quad,
                       long shots, std::uint64_t seed, Exec exec = Exec::openmp);

enum class Protocol { nonlocality, entanglement };

Circuit nd_pipeline_circuit(double p);
Circuit ed_pipeline_circuit(double p);

// Structural cost of the full prepare/distill/measure pipeline at n = 2.
ResourceMetrics pipeline_metrics(Protocol protocol, double p, int copies);

}  // namespace distillery
