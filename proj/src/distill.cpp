#include "distillery/distill.hpp"

#include <cmath>
#include <stdexcept>

#include "distillery/states.hpp"

namespace distillery {

namespace {

double delta_or_throw(double p, int copies) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("p out of range");
  return pure_delta(p, copies);
}

}  // namespace

double entanglement_success_probability(const SchmidtSpectrum& spec) {
  const double s1 = spec.largest();
  return std::min(1.0, 2.0 * (1.0 - s1 * s1));
}

double v_ed(double p, int copies) {
  if (copies < 1 || copies > 4) throw std::invalid_argument("v_ed: n in 1..4");
  const double ps =
      entanglement_success_probability(tensor_power_spectrum(p, copies));
  return kTsirelsonBound * ps + 2.0 * (1.0 - ps);
}

double v_nd_pure(const SchmidtSpectrum& spec) {
  std::vector<double> s = spec.amplitudes;
  if (s.size() % 2 != 0) s.push_back(0.0);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < s.size(); k += 2) {
    const double x = s[k] * s[k];
    const double y = s[k + 1] * s[k + 1];
    total += std::sqrt((x + y) * (x + y) + 4.0 * x * y);
  }
  return 2.0 * total;
}

double v_nd_closed(double p, int copies) {
  if (copies < 1 || copies > 3)
    throw std::invalid_argument("v_nd_closed: n in 1..3");
  auto [a, b] = single_copy_amplitudes(p);
  const double t = a * a * b * b;
  switch (copies) {
    case 1:
    case 2:
      return 2.0 * std::sqrt(1.0 + 4.0 * t);
    default: {
      const double r = a * a * a * a + b * b * b * b;
      return 4.0 * std::sqrt(2.0) * t + 2.0 * std::sqrt(1.0 + 4.0 * t) * r;
    }
  }
}

double mixed_bound_polynomial(double p) {
  const double p2 = p * p;
  const double p3 = p2 * p;
  return 1.0 - 24.0 * p2 + 80.0 * p3 - 120.0 * p2 * p2 + 96.0 * p2 * p3 -
         32.0 * p3 * p3;
}

double v_nd_mixed_bound(double p, int copies) {
  if (copies < 1 || copies > 3)
    throw std::invalid_argument("v_nd_mixed_bound: n in 1..3");
  if (copies <= 2) {
    const double g = 1.0 - 2.0 * p;
    return 2.0 * std::sqrt(1.0 + g * g);
  }
  return 2.0 * std::sqrt(1.0 + mixed_bound_polynomial(p));
}

double pure_delta(double p, int copies) {
  const double nd = copies <= 3 ? v_nd_closed(p, copies)
                                : v_nd_pure(tensor_power_spectrum(p, copies));
  return nd - v_ed(p, copies);
}

CrossoverReport crossover(int copies, double tol) {
  if (copies < 2 || copies > 4)
    throw std::invalid_argument("crossover: n in {2,3,4}");
  if (!(tol > 0.0)) throw std::invalid_argument("crossover: tol must be > 0");

  CrossoverReport report;
  report.copies = copies;

  const double p_lo = 0.5, p_hi = 1.0;
  const int steps = 500;  // 1e-3 grid on [0.5, 1]
  std::vector<double> grid(steps + 1), delta(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    grid[i] = p_lo + (p_hi - p_lo) * i / steps;
    delta[i] = delta_or_throw(grid[i], copies);
  }

  auto bisect = [&](double lo, double hi) {
    double flo = delta_or_throw(lo, copies);
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      const double fm = delta_or_throw(mid, copies);
      if ((flo > 0.0) == (fm > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  bool inside = false;
  double current_lo = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const bool positive = delta[i] > 0.0;
    if (positive && !inside) {
      current_lo = i == 0 ? grid[0] : bisect(grid[i - 1], grid[i]);
      if (i > 0) report.roots.push_back(current_lo);
      inside = true;
    } else if (!positive && inside) {
      const double root = bisect(grid[i - 1], grid[i]);
      report.roots.push_back(root);
      report.intervals.push_back({current_lo, root});
      inside = false;
    }
  }
  if (inside) report.intervals.push_back({current_lo, p_hi});

  if (copies == 3 && !report.intervals.empty()) {
    report.note =
        "advantage holds only below the root near 0.747; a frequently quoted "
        "window [0.746, 0.904] is not supported by the numbers (delta < 0 "
        "throughout [0.76, 0.99])";
  }
  return report;
}

namespace {

std::vector<SweepRecord> sweep_impl(double p_min, double p_max, int steps,
                                    int copies, bool mixed, Exec exec) {
  if (!(0.5 <= p_min && p_min < p_max && p_max <= 1.0))
    throw std::invalid_argument("sweep: need 0.5 <= p_min < p_max <= 1");
  if (steps < 2) throw std::invalid_argument("sweep: steps >= 2");
  std::vector<SweepRecord> rows(steps);
  for_each_index(static_cast<std::size_t>(steps), exec, [&](std::size_t i) {
    const double p = p_min + (p_max - p_min) * static_cast<double>(i) / (steps - 1);
    SweepRecord r;
    r.p = p;
    r.copies = copies;
    r.p_succ = entanglement_success_probability(tensor_power_spectrum(p, copies));
    r.v_ed = v_ed(p, copies);
    r.v_nd = mixed ? v_nd_mixed_bound(p, copies)
                   : (copies <= 3 ? v_nd_closed(p, copies)
                                  : v_nd_pure(tensor_power_spectrum(p, copies)));
    r.delta = r.v_nd - r.v_ed;
    rows[i] = r;
  });
  return rows;
}

}  // namespace

std::vector<SweepRecord> sweep_pure(double p_min, double p_max, int steps,
                                    int copies, Exec exec) {
  if (copies < 1 || copies > 4)
    throw std::invalid_argument("sweep_pure: n in 1..4");
  return sweep_impl(p_min, p_max, steps, copies, false, exec);
}

std::vector<SweepRecord> sweep_mixed(double p_min, double p_max, int steps,
                                     int copies, Exec exec) {
  if (copies < 1 || copies > 3)
    throw std::invalid_argument("sweep_mixed: n in 1..3");
  return sweep_impl(p_min, p_max, steps, copies, true, exec);
}

}  // namespace distillery
