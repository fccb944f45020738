#include "distillery/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

#include "distillery/distill.hpp"
#include "distillery/eig.hpp"
#include "distillery/states.hpp"

namespace distillery {

namespace {

int bit_of(std::size_t idx, int qubit, int qubits) {
  return static_cast<int>(idx >> (qubits - 1 - qubit)) & 1;
}

void apply_single(StateVector& state, int qubit, int qubits,
                  const std::array<cplx, 4>& u) {
  const std::size_t mask = std::size_t{1} << (qubits - 1 - qubit);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if (i & mask) continue;
    const std::size_t i1 = i | mask;
    const cplx a0 = state.amps[i];
    const cplx a1 = state.amps[i1];
    state.amps[i] = u[0] * a0 + u[1] * a1;
    state.amps[i1] = u[2] * a0 + u[3] * a1;
  }
}

void apply_controlled(StateVector& state, int control, int target, int qubits,
                      const std::array<cplx, 4>& u) {
  const std::size_t cmask = std::size_t{1} << (qubits - 1 - control);
  const std::size_t tmask = std::size_t{1} << (qubits - 1 - target);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if (!(i & cmask) || (i & tmask)) continue;
    const std::size_t i1 = i | tmask;
    const cplx a0 = state.amps[i];
    const cplx a1 = state.amps[i1];
    state.amps[i] = u[0] * a0 + u[1] * a1;
    state.amps[i1] = u[2] * a0 + u[3] * a1;
  }
}

void apply_unitary_gates(StateVector& state, const Circuit& c) {
  for (const Gate& g : c.gates) {
    if (g.kind == Gate::Kind::measure)
      throw std::logic_error("apply_unitary_gates: measurement not allowed here");
    if (g.target < 0 || g.target >= c.qubits ||
        (g.kind == Gate::Kind::controlled &&
         (g.control < 0 || g.control >= c.qubits || g.control == g.target)))
      throw std::invalid_argument("gate targets out of range");
    if (g.kind == Gate::Kind::controlled)
      apply_controlled(state, g.control, g.target, c.qubits, gate_matrix(g));
    else
      apply_single(state, g.target, c.qubits, gate_matrix(g));
  }
}

int measure_qubit(StateVector& state, int qubit, int qubits, Rng& rng) {
  const std::size_t mask = std::size_t{1} << (qubits - 1 - qubit);
  double p1 = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i)
    if (i & mask) p1 += std::norm(state.amps[i]);
  const int outcome = rng.uniform() < p1 ? 1 : 0;
  const double prob = outcome ? p1 : 1.0 - p1;
  const double scale = prob > 0.0 ? 1.0 / std::sqrt(prob) : 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const bool one = (i & mask) != 0;
    if (one == (outcome == 1))
      state.amps[i] *= scale;
    else
      state.amps[i] = 0.0;
  }
  return outcome;
}

// principal square root of a 2x2 unitary
std::array<cplx, 4> sqrt_unitary(const std::array<cplx, 4>& u) {
  const cplx det = u[0] * u[3] - u[1] * u[2];
  const double alpha = 0.5 * std::arg(det);
  const cplx unphase = std::exp(cplx(0, -alpha));
  std::array<cplx, 4> su{u[0] * unphase, u[1] * unphase, u[2] * unphase,
                         u[3] * unphase};
  double cphi = 0.5 * std::real(su[0] + su[3]);
  cphi = std::clamp(cphi, -1.0, 1.0);
  const double phi = std::acos(cphi);
  const double sphi = std::sin(phi);
  std::array<cplx, 4> root{};
  if (sphi < 1e-12) {
    if (cphi > 0.0)
      root = {cplx(1), cplx(0), cplx(0), cplx(1)};
    else
      root = {cplx(0, 1), cplx(0), cplx(0), cplx(0, 1)};
  } else {
    const double c2 = std::cos(phi / 2.0);
    const double k = std::sin(phi / 2.0) / sphi;
    root = {c2 + k * (su[0] - cphi), k * su[1], k * su[2],
            c2 + k * (su[3] - cphi)};
  }
  const cplx gp = std::exp(cplx(0, alpha / 2.0));
  for (cplx& z : root) z *= gp;
  return root;
}

// k-controlled single-qubit unitary via the square-root cascade; k stays <= 3
// for supports of size <= 16
void append_mcu(Circuit& c, const std::vector<int>& controls, int target,
                const std::array<cplx, 4>& u) {
  if (controls.empty()) {
    c.unitary(target, u);
    return;
  }
  if (controls.size() == 1) {
    c.controlled(controls[0], target, u);
    return;
  }
  const std::array<cplx, 4> v = sqrt_unitary(u);
  const std::array<cplx, 4> x_payload{cplx(0), cplx(1), cplx(1), cplx(0)};
  std::vector<int> rest(controls.begin(), controls.end() - 1);
  const int last = controls.back();
  c.controlled(last, target, v);
  append_mcu(c, rest, last, x_payload);
  c.controlled(last, target, adjoint2(v));
  append_mcu(c, rest, last, x_payload);
  append_mcu(c, rest, target, v);
}

// controls conditioned on specific bit values; value-0 controls are wrapped
// with X conjugation
void append_pattern_controlled(Circuit& c,
                               const std::vector<std::pair<int, bool>>& controls,
                               int target, const std::array<cplx, 4>& u) {
  for (const auto& [q, val] : controls)
    if (!val) c.x(q);
  std::vector<int> qs;
  qs.reserve(controls.size());
  for (const auto& [q, val] : controls) qs.push_back(q);
  append_mcu(c, qs, target, u);
  for (auto it = controls.rbegin(); it != controls.rend(); ++it)
    if (!it->second) c.x(it->first);
}

}  // namespace

RunResult run(const Circuit& circuit, std::uint64_t seed) {
  if (circuit.qubits < 1 || circuit.qubits > 24)
    throw std::invalid_argument("run: qubit count out of range");
  Rng rng(seed);
  RunResult out;
  out.state.amps.assign(std::size_t{1} << circuit.qubits, 0.0);
  out.state.amps[0] = 1.0;
  out.bits.assign(static_cast<std::size_t>(std::max(circuit.classical_bits, 0)), 0);
  for (const Gate& g : circuit.gates) {
    if (g.target < 0 || g.target >= circuit.qubits)
      throw std::invalid_argument("run: gate target out of range");
    switch (g.kind) {
      case Gate::Kind::measure: {
        if (g.creg < 0 || g.creg >= circuit.classical_bits)
          throw std::invalid_argument("run: classical register out of range");
        out.bits[static_cast<std::size_t>(g.creg)] =
            measure_qubit(out.state, g.target, circuit.qubits, rng);
        break;
      }
      case Gate::Kind::controlled:
        if (g.control < 0 || g.control >= circuit.qubits || g.control == g.target)
          throw std::invalid_argument("run: control qubit out of range");
        apply_controlled(out.state, g.control, g.target, circuit.qubits,
                         gate_matrix(g));
        break;
      default:
        apply_single(out.state, g.target, circuit.qubits, gate_matrix(g));
    }
  }
  return out;
}

Circuit prepare_sparse(const StateVector& target) {
  const std::size_t dim = target.dim();
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("prepare_sparse: dimension must be a power of 2");
  int nq = 0;
  for (std::size_t d = dim; d > 1; d >>= 1) ++nq;

  std::map<std::size_t, cplx> support;
  for (std::size_t i = 0; i < dim; ++i)
    if (std::abs(target.amps[i]) > 1e-14) support[i] = target.amps[i];
  if (support.empty()) throw std::invalid_argument("prepare_sparse: zero state");
  if (support.size() > 16)
    throw std::invalid_argument("prepare_sparse: more than 16 nonzero amplitudes");

  Circuit red;
  red.qubits = nq;

  auto apply_x_support = [&](int q) {
    const std::size_t m = std::size_t{1} << (nq - 1 - q);
    std::map<std::size_t, cplx> next;
    for (const auto& [idx, amp] : support) next[idx ^ m] = amp;
    support = std::move(next);
    red.x(q);
  };
  auto apply_cx_support = [&](int cq, int tq) {
    const std::size_t cm = std::size_t{1} << (nq - 1 - cq);
    const std::size_t tm = std::size_t{1} << (nq - 1 - tq);
    std::map<std::size_t, cplx> next;
    for (const auto& [idx, amp] : support)
      next[(idx & cm) ? (idx ^ tm) : idx] = amp;
    support = std::move(next);
    red.cx(cq, tq);
  };

  while (support.size() > 1) {
    // closest pair of basis states, lexicographic tie-break
    std::size_t u = 0, v = 0;
    int best = nq + 1;
    for (auto it = support.begin(); it != support.end(); ++it)
      for (auto jt = std::next(it); jt != support.end(); ++jt) {
        const int d = hamming_weight(static_cast<unsigned>(it->first ^ jt->first));
        if (d < best) {
          best = d;
          u = it->first;
          v = jt->first;
        }
      }

    std::vector<int> diffs;
    for (int q = 0; q < nq; ++q)
      if (bit_of(u ^ v, q, nq)) diffs.push_back(q);
    int pivot = diffs.front();
    if (bit_of(u, pivot, nq)) std::swap(u, v);  // v carries the 1 at the pivot
    for (std::size_t k = 1; k < diffs.size(); ++k) {
      apply_cx_support(pivot, diffs[k]);
      v ^= std::size_t{1} << (nq - 1 - diffs[k]);
    }
    // controls separating {u, v} from the rest of the support
    std::vector<std::pair<int, bool>> controls;
    for (;;) {
      std::vector<std::size_t> conflicts;
      for (const auto& [w, amp] : support) {
        if (w == u || w == v) continue;
        bool match = true;
        for (const auto& [q, val] : controls)
          if (bit_of(w, q, nq) != static_cast<int>(val)) {
            match = false;
            break;
          }
        if (match) conflicts.push_back(w);
      }
      if (conflicts.empty()) break;
      int best_q = -1, best_gain = -1;
      for (int q = 0; q < nq; ++q) {
        if (q == pivot) continue;
        bool used = false;
        for (const auto& [cq, val] : controls)
          if (cq == q) used = true;
        if (used) continue;
        int gain = 0;
        for (std::size_t w : conflicts)
          if (bit_of(w, q, nq) != bit_of(u, q, nq)) ++gain;
        if (gain > best_gain) {
          best_gain = gain;
          best_q = q;
        }
      }
      if (best_q < 0 || best_gain < 1)
        throw std::logic_error("prepare_sparse: control search stalled");
      controls.emplace_back(best_q, bit_of(u, best_q, nq) == 1);
    }

    const cplx au = support[u];
    const cplx av = support[v];
    const double r = std::sqrt(std::norm(au) + std::norm(av));
    const std::array<cplx, 4> w{std::conj(au) / r, std::conj(av) / r, -av / r,
                                au / r};
    append_pattern_controlled(red, controls, pivot, w);
    support[u] = r;
    support.erase(v);
  }

  const std::size_t rest = support.begin()->first;
  for (int q = 0; q < nq; ++q)
    if (bit_of(rest, q, nq)) apply_x_support(q);

  Circuit prep;
  prep.qubits = nq;
  for (auto it = red.gates.rbegin(); it != red.gates.rend(); ++it) {
    Gate g = *it;
    if (g.kind == Gate::Kind::unitary || g.kind == Gate::Kind::controlled)
      g.payload = adjoint2(g.payload);
    prep.gates.push_back(g);
  }
  return prep;
}

namespace {

// Precomputed sampling tables for projective CHSH measurements on a fixed
// state: per setting pair, cumulative joint-outcome probabilities and the
// outcome signs of each joint eigenvector.
struct ChshSampler {
  std::array<std::vector<double>, 4> cum;
  std::array<std::vector<int>, 4> product_sign;  // +1 / -1 per joint index

  ChshSampler(const StateVector& state, const ObservableQuad& quad) {
    const std::size_t da = quad.side_dim();
    const std::size_t db = quad.b0.rows();
    if (da * db != state.dim())
      throw std::invalid_argument("chsh sampler: state dimension mismatch");
    EigResult ea[2] = {hermitian_eig(quad.a0), hermitian_eig(quad.a1)};
    EigResult eb[2] = {hermitian_eig(quad.b0), hermitian_eig(quad.b1)};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const ComplexMatrix rot = kron(ea[i].vectors.adjoint(), eb[j].vectors.adjoint());
        const StateVector rotated = apply(rot, state);
        const int s = i * 2 + j;
        cum[s].resize(state.dim());
        product_sign[s].resize(state.dim());
        double acc = 0.0;
        for (std::size_t k = 0; k < state.dim(); ++k) {
          acc += std::norm(rotated.amps[k]);
          cum[s][k] = acc;
          const int sa = ea[i].values[k / db] > 0.0 ? 1 : -1;
          const int sb = eb[j].values[k % db] > 0.0 ? 1 : -1;
          product_sign[s][k] = sa * sb;
        }
        if (std::abs(acc - 1.0) > 1e-9)
          throw std::invalid_argument("chsh sampler: state is not normalized");
        cum[s].back() = std::max(cum[s].back(), 1.0);
      }
  }

  // returns (setting index, outcome product)
  std::pair<int, int> sample(Rng& rng) const {
    const std::uint64_t w = rng.next_u64();
    const int s = static_cast<int>(w & 3u);
    const double u = rng.uniform();
    const auto& c = cum[s];
    const std::size_t k =
        static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
    return {s, product_sign[s][std::min(k, c.size() - 1)]};
  }
};

double chsh_from_counts(const long long counts[4][2]) {
  double s = 0.0;
  for (int setting = 0; setting < 4; ++setting) {
    const long long total = counts[setting][0] + counts[setting][1];
    if (total == 0) continue;
    const double corr =
        static_cast<double>(counts[setting][0] - counts[setting][1]) /
        static_cast<double>(total);
    s += (setting == 3 ? -1.0 : 1.0) * corr;
  }
  return s;
}

constexpr long kShardSize = 8192;  // fixed, so openmp and serial agree bit for bit

}  // namespace

double chsh_experiment(const StateVector& state, const ObservableQuad& quad,
                       long shots, std::uint64_t seed, Exec exec) {
  if (shots < 1) throw std::invalid_argument("chsh_experiment: shots >= 1");
  const ChshSampler sampler(state, quad);
  const Rng master(seed);
  const long shards = (shots + kShardSize - 1) / kShardSize;
  std::vector<std::array<long long, 8>> local(
      static_cast<std::size_t>(shards), std::array<long long, 8>{});
  for_each_index(static_cast<std::size_t>(shards), exec, [&](std::size_t sh) {
    const long lo = static_cast<long>(sh) * kShardSize;
    const long hi = std::min(shots, lo + kShardSize);
    auto& acc = local[sh];
    for (long t = lo; t < hi; ++t) {
      Rng rng = master.split(static_cast<std::uint64_t>(t));
      const auto [setting, prod] = sampler.sample(rng);
      acc[static_cast<std::size_t>(setting * 2 + (prod > 0 ? 0 : 1))] += 1;
    }
  });
  long long counts[4][2] = {};
  for (const auto& acc : local)
    for (int s = 0; s < 4; ++s) {
      counts[s][0] += acc[static_cast<std::size_t>(s * 2)];
      counts[s][1] += acc[static_cast<std::size_t>(s * 2 + 1)];
    }
  return chsh_from_counts(counts);
}

namespace {

// Everything the cascade needs, computed once per (p, n): stage filters with
// their conditional success probabilities, exact branch states (forced Kraus
// projections through the same gate circuits), and CHSH sampling tables.
struct CascadePlan {
  double p = 0.0;
  int copies = 0;
  int nq = 0;  // shared qubits (2n); ancilla is qubit index nq
  double analytic_success = 0.0;
  bool regime_fallback = false;

  struct Stage {
    unsigned top = 0, second = 0;
    double theta = 0.0;
    double cond_success = 0.0;  // P(ancilla = 1 | reached this stage)
  };
  std::vector<Stage> stages;
  std::vector<StateVector> success_states;  // 2n qubits, post-correction
  std::vector<double> success_fidelity;
  StateVector failure_state;
  double failure_residual = 0.0;

  // empty for zero-probability branches, which the sampler can never select
  std::vector<std::optional<ChshSampler>> success_samplers;

  static const CascadePlan& cached(double p, int copies);
};

StateVector strip_ancilla(const StateVector& state, int nq, int anc_outcome) {
  StateVector out;
  out.amps.assign(std::size_t{1} << nq, 0.0);
  for (std::size_t g = 0; g < out.dim(); ++g)
    out.amps[g] = state.amps[(g << 1) | static_cast<std::size_t>(anc_outcome)];
  return out;
}

double project_ancilla(StateVector& state, int outcome) {
  // ancilla is the least significant bit
  double prob = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i)
    if (static_cast<int>(i & 1u) == outcome) prob += std::norm(state.amps[i]);
  const double scale = prob > 0.0 ? 1.0 / std::sqrt(prob) : 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if (static_cast<int>(i & 1u) == outcome)
      state.amps[i] *= scale;
    else
      state.amps[i] = 0.0;
  }
  return prob;
}

// maps |i> -> |0..0> and |j> -> |10..0> on one party's register
void append_pair_correction(Circuit& c, unsigned i, unsigned j, int base, int n) {
  for (int q = 0; q < n; ++q)
    if ((i >> (n - 1 - q)) & 1u) c.x(base + q);
  unsigned j2 = j ^ i;
  if (!((j2 >> (n - 1)) & 1u)) {
    int s = -1;
    for (int q = n - 1; q >= 0; --q)
      if ((j2 >> (n - 1 - q)) & 1u) s = q;
    c.cx(base + s, base + 0);
    j2 |= 1u << (n - 1);
  }
  for (int q = 1; q < n; ++q)
    if ((j2 >> (n - 1 - q)) & 1u) c.cx(base + 0, base + q);
}

ObservableQuad pair_measurement_quad(int copies) {
  // p = 1 optimal single-pair settings on (A1, B1), identity on the rest
  const ObservableQuad one = meas_observables(1.0);
  const ComplexMatrix pad = ComplexMatrix::identity(std::size_t{1} << (copies - 1));
  ObservableQuad q;
  q.copies = copies;
  q.a0 = kron(one.a0, pad);
  q.a1 = kron(one.a1, pad);
  q.b0 = kron(one.b0, pad);
  q.b1 = kron(one.b1, pad);
  return q;
}

CascadePlan build_cascade_plan(double p, int copies) {
  if (copies < 2 || copies > 3)
    throw std::invalid_argument("distill_protocol: n in {2, 3}");
  CascadePlan plan;
  plan.p = p;
  plan.copies = copies;
  plan.nq = 2 * copies;
  const std::size_t side = std::size_t{1} << copies;

  SchmidtSpectrum spec = tensor_power_spectrum(p, copies);
  plan.analytic_success = entanglement_success_probability(spec);
  plan.regime_fallback = spec.largest() * spec.largest() < 0.5;

  // ladder state with ancilla |0> as the least significant qubit
  const StateVector ladder = schmidt_ladder_state(p, copies);
  StateVector state;
  state.amps.assign(ladder.dim() * 2, 0.0);
  for (std::size_t g = 0; g < ladder.dim(); ++g) state.amps[g << 1] = ladder.amps[g];

  const int total_qubits = plan.nq + 1;
  const int anc = plan.nq;

  // ideal Bell pair on (A1, B1), zeros elsewhere
  StateVector ideal;
  ideal.amps.assign(std::size_t{1} << plan.nq, 0.0);
  const std::size_t g1 =
      (std::size_t{1} << (plan.nq - 1)) | (std::size_t{1} << (copies - 1));
  ideal.amps[0] = 1.0 / std::sqrt(2.0);
  ideal.amps[g1] = 1.0 / std::sqrt(2.0);

  std::vector<unsigned> alive;
  for (unsigned x = 0; x < side; ++x) alive.push_back(x);

  while (alive.size() > 1) {
    // two largest current amplitudes; read them off the live state
    auto amp_of = [&](unsigned x) {
      const std::size_t g = ((std::size_t{x} << copies) | x) << 1;
      return std::abs(state.amps[g]);
    };
    std::sort(alive.begin(), alive.end(), [&](unsigned l, unsigned r) {
      const double al = amp_of(l), ar = amp_of(r);
      if (al != ar) return al > ar;
      return l < r;
    });
    const unsigned top = alive[0];
    const unsigned second = alive[1];
    const double ratio = std::min(1.0, amp_of(second) / amp_of(top));

    CascadePlan::Stage stage;
    stage.top = top;
    stage.second = second;
    stage.theta = 2.0 * std::asin(ratio);

    Circuit filter;
    filter.qubits = total_qubits;
    std::vector<std::pair<int, bool>> top_pattern, second_pattern;
    for (int q = 0; q < copies; ++q) {
      top_pattern.emplace_back(q, ((top >> (copies - 1 - q)) & 1u) != 0);
      second_pattern.emplace_back(q, ((second >> (copies - 1 - q)) & 1u) != 0);
    }
    const double c2 = std::cos(stage.theta / 2.0), s2 = std::sin(stage.theta / 2.0);
    append_pattern_controlled(filter, top_pattern, anc,
                              {cplx(c2), cplx(-s2), cplx(s2), cplx(c2)});
    append_pattern_controlled(filter, second_pattern, anc,
                              {cplx(0), cplx(1), cplx(1), cplx(0)});
    apply_unitary_gates(state, filter);

    // success branch: ancilla reads 1
    StateVector succ = state;
    stage.cond_success = project_ancilla(succ, 1);
    StateVector shared = strip_ancilla(succ, plan.nq, 1);
    Circuit corr;
    corr.qubits = plan.nq;
    append_pair_correction(corr, top, second, 0, copies);
    append_pair_correction(corr, top, second, copies, copies);
    apply_unitary_gates(shared, corr);
    plan.success_states.push_back(shared);
    const cplx ov = inner(ideal, shared);
    plan.success_fidelity.push_back(std::norm(ov));
    plan.stages.push_back(stage);

    // failure branch continues; ancilla back to |0>
    const double fail_prob = project_ancilla(state, 0);
    alive.erase(std::find(alive.begin(), alive.end(), second));
    if (fail_prob <= 1e-15) break;  // later stages are unreachable
  }

  plan.failure_state = strip_ancilla(state, plan.nq, 0);
  if (plan.failure_state.norm() > 0.5) {
    SchmidtSpectrum fail_spec = schmidt(plan.failure_state, side, side);
    plan.failure_residual =
        fail_spec.amplitudes.size() > 1 ? fail_spec.amplitudes[1] : 0.0;
  }

  const ObservableQuad mq = pair_measurement_quad(copies);
  for (std::size_t k = 0; k < plan.success_states.size(); ++k) {
    if (plan.stages[k].cond_success > 0.0)
      plan.success_samplers.emplace_back(
          std::in_place, plan.success_states[k], mq);
    else
      plan.success_samplers.emplace_back(std::nullopt);
  }
  return plan;
}

const CascadePlan& CascadePlan::cached(double p, int copies) {
  // call sites build the plan on the main thread before any parallel region
  static std::map<std::pair<double, int>, CascadePlan> cache;
  auto key = std::make_pair(p, copies);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_cascade_plan(p, copies)).first;
  return it->second;
}

// stage decisions for one run; consumes one uniform per stage reached
int sample_branch(const CascadePlan& plan, Rng& rng, std::vector<int>* bits) {
  for (std::size_t k = 0; k < plan.stages.size(); ++k) {
    const bool success = rng.uniform() < plan.stages[k].cond_success;
    if (bits) bits->push_back(success ? 1 : 0);
    if (success) return static_cast<int>(k);
  }
  return -1;  // every filter fell through
}

}  // namespace

ProtocolOutcome distill_protocol(double p, int copies, std::uint64_t seed) {
  const CascadePlan& plan = CascadePlan::cached(p, copies);
  Rng rng(seed);
  ProtocolOutcome out;
  out.regime_fallback = plan.regime_fallback;
  const int branch = sample_branch(plan, rng, &out.message_bits);
  if (branch >= 0) {
    out.success = true;
    out.final_state = plan.success_states[static_cast<std::size_t>(branch)];
    out.bell_fidelity = plan.success_fidelity[static_cast<std::size_t>(branch)];
  } else {
    out.success = false;
    out.final_state = plan.failure_state;
    StateVector ideal;
    ideal.amps.assign(out.final_state.dim(), 0.0);
    const std::size_t g1 =
        (std::size_t{1} << (2 * copies - 1)) | (std::size_t{1} << (copies - 1));
    ideal.amps[0] = 1.0 / std::sqrt(2.0);
    ideal.amps[g1] = 1.0 / std::sqrt(2.0);
    out.bell_fidelity = std::norm(inner(ideal, out.final_state));
  }
  return out;
}

DistillBatchStats distill_batch(double p, int copies, long runs,
                                std::uint64_t seed, Exec exec) {
  if (runs < 1) throw std::invalid_argument("distill_batch: runs >= 1");
  const CascadePlan& plan = CascadePlan::cached(p, copies);
  const Rng master(seed);

  struct Shard {
    long long successes = 0;
    long long counts[4][2] = {};
    unsigned branch_mask = 0;  // bit k: stage-k success seen; bit 31: failure seen
  };
  const long shards = (runs + kShardSize - 1) / kShardSize;
  std::vector<Shard> local(static_cast<std::size_t>(shards));

  for_each_index(static_cast<std::size_t>(shards), exec, [&](std::size_t sh) {
    const long lo = static_cast<long>(sh) * kShardSize;
    const long hi = std::min(runs, lo + kShardSize);
    Shard& acc = local[sh];
    for (long t = lo; t < hi; ++t) {
      Rng rng = master.split(static_cast<std::uint64_t>(t));
      const int branch = sample_branch(plan, rng, nullptr);
      if (branch >= 0) {
        acc.successes += 1;
        acc.branch_mask |= 1u << branch;
        const auto [setting, prod] =
            plan.success_samplers[static_cast<std::size_t>(branch)]->sample(rng);
        acc.counts[setting][prod > 0 ? 0 : 1] += 1;
      } else {
        acc.branch_mask |= 0x80000000u;
        // fixed deterministic local strategy: both always answer +1, S = 2
        const int setting = static_cast<int>(rng.next_u64() & 3u);
        acc.counts[setting][0] += 1;
      }
    }
  });

  DistillBatchStats stats;
  stats.runs = runs;
  stats.analytic_success = plan.analytic_success;
  long long counts[4][2] = {};
  unsigned mask = 0;
  for (const Shard& s : local) {
    stats.successes += s.successes;
    mask |= s.branch_mask;
    for (int i = 0; i < 4; ++i) {
      counts[i][0] += s.counts[i][0];
      counts[i][1] += s.counts[i][1];
    }
  }
  stats.success_rate = static_cast<double>(stats.successes) / static_cast<double>(runs);
  stats.chsh_estimate = chsh_from_counts(counts);
  stats.min_success_fidelity = 1.0;
  for (std::size_t k = 0; k < plan.stages.size(); ++k)
    if (mask & (1u << k))
      stats.min_success_fidelity =
          std::min(stats.min_success_fidelity, plan.success_fidelity[k]);
  stats.max_failure_residual = (mask & 0x80000000u) ? plan.failure_residual : 0.0;
  return stats;
}

namespace {

void append_shared_preparation(Circuit& c, double p) {
  // the 4-sparse Schmidt ladder, then local basis rotations to |Psi>^{(x)2}
  const Circuit prep = prepare_sparse(schmidt_ladder_state(p, 2));
  c.append(prep);
  for (int q = 0; q < 4; ++q) c.h(q);
}

void append_party_measurement(Circuit& c, int base, double tilt) {
  // generic two-qubit basis change (Cartan skeleton) ahead of Z measurements
  c.rz(base, tilt);
  c.ry(base, 0.5 * tilt + 0.3);
  c.rz(base + 1, 0.7 * tilt);
  c.ry(base + 1, 0.25 * tilt + 0.3);
  c.cx(base, base + 1);
  c.ry(base, 0.4 * tilt + 0.2);
  c.rz(base + 1, 0.6 * tilt + 0.1);
  c.cx(base + 1, base);
  c.ry(base + 1, 0.35 * tilt + 0.15);
  c.cx(base, base + 1);
  c.ry(base, 0.45 * tilt + 0.05);
  c.rz(base + 1, 0.55 * tilt);
}

}  // namespace

Circuit nd_pipeline_circuit(double p) {
  Circuit c;
  c.qubits = 4;
  append_shared_preparation(c, p);
  const double g = 1.0 - 2.0 * p;
  const double tilt = std::atan2(1.0, g == 0.0 ? 1e-12 : g);
  append_party_measurement(c, 0, tilt);
  append_party_measurement(c, 2, -tilt);
  for (int q = 0; q < 4; ++q) c.measure(q, q);
  return c;
}

Circuit ed_pipeline_circuit(double p) {
  const CascadePlan& plan = CascadePlan::cached(p, 2);
  Circuit c;
  c.qubits = 5;  // 4 shared + 1 ancilla
  const int anc = 4;
  append_shared_preparation(c, p);
  // Schmidt-basis rotations on both sides
  for (int q = 0; q < 4; ++q) c.h(q);
  // three ancilla-filter sections
  int creg = 0;
  for (const auto& stage : plan.stages) {
    std::vector<std::pair<int, bool>> top_pattern, second_pattern;
    for (int q = 0; q < 2; ++q) {
      top_pattern.emplace_back(q, ((stage.top >> (1 - q)) & 1u) != 0);
      second_pattern.emplace_back(q, ((stage.second >> (1 - q)) & 1u) != 0);
    }
    const double c2 = std::cos(stage.theta / 2.0), s2 = std::sin(stage.theta / 2.0);
    append_pattern_controlled(c, top_pattern, anc,
                              {cplx(c2), cplx(-s2), cplx(s2), cplx(c2)});
    append_pattern_controlled(c, second_pattern, anc,
                              {cplx(0), cplx(1), cplx(1), cplx(0)});
    c.measure(anc, creg++);
  }
  // outcome-conditioned local corrections (counted unconditionally)
  append_pair_correction(c, plan.stages[0].top, plan.stages[0].second, 0, 2);
  append_pair_correction(c, plan.stages[0].top, plan.stages[0].second, 2, 2);
  // CHSH measurement on the designated pair (A1, B1)
  c.ry(0, 0.25 * 3.14159265358979323846);
  c.ry(2, -0.25 * 3.14159265358979323846);
  c.measure(0, creg++);
  c.measure(2, creg++);
  return c;
}

ResourceMetrics pipeline_metrics(Protocol protocol, double p, int copies) {
  if (copies != 2)
    throw std::invalid_argument("pipeline_metrics: n = 2 only");
  const Circuit c =
      protocol == Protocol::nonlocality ? nd_pipeline_circuit(p) : ed_pipeline_circuit(p);
  return analyze_circuit(c);
}

}  // namespace distillery
