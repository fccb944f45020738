#pragma once

#include <string>
#include <vector>

#include "distillery/eig.hpp"
#include "distillery/parallel.hpp"

namespace distillery {

inline constexpr double kClassicalBound = 2.0;
inline constexpr double kTsirelsonBound = 2.8284271247461902909;  // 2 sqrt 2

// One row of a p-sweep.
struct SweepRecord {
  double p = 0.0;
  int copies = 0;
  double v_ed = 0.0;
  double v_nd = 0.0;
  double p_succ = 0.0;
  double delta = 0.0;  // v_nd - v_ed
};

struct CrossoverInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct CrossoverReport {
  int copies = 0;
  std::vector<CrossoverInterval> intervals;  // maximal intervals with delta > 0
  std::vector<double> roots;                 // bisected sign changes of delta
  std::string note;
};

// min{1, 2(1 - sigma_1^2)}: the optimal single-shot probability of reaching a
// Bell pair from a pure state with the given spectrum.
double entanglement_success_probability(const SchmidtSpectrum& spec);

// Weighted average 2sqrt2 * p_succ + 2 (1 - p_succ).  n in 1..4.
double v_ed(double p, int copies);

// Pairing bound over consecutive descending Schmidt amplitudes:
// 2 sum_k sqrt((s_{2k-1}^2 + s_{2k}^2)^2 + 4 s_{2k-1}^2 s_{2k}^2).
double v_nd_pure(const SchmidtSpectrum& spec);

// Closed forms: n=1,2: 2 sqrt(1+4t); n=3: 4 sqrt(2) t + 2 sqrt(1+4t) r, with
// t = a^2 b^2 and r = a^4 + b^4.
double v_nd_closed(double p, int copies);

// Mixed-state certificates: n=1,2: 2 sqrt(1+(1-2p)^2); n=3 uses the degree-6
// polynomial 1 - 24p^2 + 80p^3 - 120p^4 + 96p^5 - 32p^6.
double v_nd_mixed_bound(double p, int copies);

double mixed_bound_polynomial(double p);

// delta(p) = v_nd - v_ed for the pure family (closed form for n<=3, the
// pairing bound on the tensor-power spectrum for n=4).
double pure_delta(double p, int copies);

// Scan delta on a 1e-3 grid over [0.5, 1], bisect each sign change to width
// `tol`, report maximal intervals with delta > 0.  n in {2, 3, 4}.
CrossoverReport crossover(int copies, double tol = 1e-6);

std::vector<SweepRecord> sweep_pure(double p_min, double p_max, int steps,
                                    int copies, Exec exec = Exec::openmp);
std::vector<SweepRecord> sweep_mixed(double p_min, double p_max, int steps,
                                     int copies, Exec exec = Exec::openmp);

}  // namespace distillery
