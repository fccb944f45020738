// Times the OpenMP kernels against their serial reference paths and checks
// that both produce identical results.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "distillery/bell.hpp"
#include "distillery/distill.hpp"
#include "distillery/parallel.hpp"
#include "distillery/sim.hpp"
#include "distillery/states.hpp"

using namespace distillery;
using Clock = std::chrono::steady_clock;

namespace {

template <typename Fn>
double time_s(Fn&& fn) {
  const auto t0 = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-28s %10.4fs %10.4fs %7.2fx   %s\n", name, serial, parallel,
              serial / parallel, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", hardware_threads());
  std::printf("%-28s %11s %11s %8s\n", "kernel", "serial", "openmp", "speedup");

  {
    const StateVector state = pure_state_vector(0.75, 1);
    const ObservableQuad quad = meas_observables(0.75);
    double a = 0, b = 0;
    const double ts = time_s([&] { a = chsh_experiment(state, quad, 4000000, 7, Exec::serial); });
    const double tp = time_s([&] { b = chsh_experiment(state, quad, 4000000, 7, Exec::openmp); });
    row("chsh_experiment 4e6 shots", ts, tp, a == b);
  }
  {
    DistillBatchStats a, b;
    const double ts = time_s([&] { a = distill_batch(0.75, 2, 400000, 7, Exec::serial); });
    const double tp = time_s([&] { b = distill_batch(0.75, 2, 400000, 7, Exec::openmp); });
    row("distill_batch 4e5 runs", ts, tp,
        a.successes == b.successes && a.chsh_estimate == b.chsh_estimate);
  }
  {
    const ComplexMatrix rho = mixed_density(0.75, 2);
    SeesawResult a, b;
    const double ts = time_s([&] { a = seesaw_optimize(rho, 7, 24, 500, Exec::serial); });
    const double tp = time_s([&] { b = seesaw_optimize(rho, 7, 24, 500, Exec::openmp); });
    row("seesaw 24 restarts (n=2)", ts, tp,
        a.value == b.value && a.best_restart == b.best_restart);
  }
  {
    std::vector<SweepRecord> a, b;
    const double ts = time_s([&] { a = sweep_pure(0.5, 1.0, 20000, 4, Exec::serial); });
    const double tp = time_s([&] { b = sweep_pure(0.5, 1.0, 20000, 4, Exec::openmp); });
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
      same = a[i].v_ed == b[i].v_ed && a[i].v_nd == b[i].v_nd;
    row("sweep_pure 2e4 pts (n=4)", ts, tp, same);
  }
  return 0;
}
