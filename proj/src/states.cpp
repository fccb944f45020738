#include "distillery/states.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace distillery {

namespace {

void check_p(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("noise parameter p must lie in [0, 1]");
}

void check_copies(int copies, int max_copies) {
  if (copies < 1 || copies > max_copies)
    throw std::invalid_argument("copy count out of range");
}

}  // namespace

int hamming_weight(unsigned x) {
  int w = 0;
  while (x) {
    w += static_cast<int>(x & 1u);
    x >>= 1;
  }
  return w;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

double WeightVector::sum() const {
  double s = 0.0;
  for (double x : w) s += x;
  return s;
}

std::pair<double, double> single_copy_amplitudes(double p) {
  check_p(p);
  const double sp = std::sqrt(p);
  const double sq = std::sqrt(1.0 - p);
  const double inv_r2 = 1.0 / std::sqrt(2.0);
  return {(sp + sq) * inv_r2, std::abs(sp - sq) * inv_r2};
}

SchmidtSpectrum tensor_power_spectrum(double p, int copies) {
  check_copies(copies, 4);
  auto [a, b] = single_copy_amplitudes(p);
  SchmidtSpectrum spec;
  spec.amplitudes.reserve(std::size_t{1} << copies);
  for (int k = 0; k <= copies; ++k) {
    const double amp = std::pow(a, copies - k) * std::pow(b, k);
    const int mult = static_cast<int>(binomial(copies, k) + 0.5);
    for (int m = 0; m < mult; ++m) spec.amplitudes.push_back(amp);
  }
  // a >= b >= 0, so generation order is already descending; sort anyway to
  // keep the invariant independent of that observation
  std::sort(spec.amplitudes.begin(), spec.amplitudes.end(), std::greater<>());
  return spec;
}

StateVector pure_state_vector(double p, int copies) {
  check_copies(copies, 3);
  check_p(p);
  // single-copy amplitudes on |a b>: (|00>,|11>) get sqrt(p/2), (|01>,|10>)
  // get sqrt((1-p)/2)
  const double w_same = std::sqrt(p / 2.0);
  const double w_diff = std::sqrt((1.0 - p) / 2.0);
  const std::size_t dim = std::size_t{1} << (2 * copies);
  StateVector out;
  out.amps.assign(dim, 0.0);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    double amp = 1.0;
    for (int i = 0; i < copies; ++i) {
      const int ai = static_cast<int>(idx >> (2 * copies - 1 - i)) & 1;
      const int bi = static_cast<int>(idx >> (copies - 1 - i)) & 1;
      amp *= (ai == bi) ? w_same : w_diff;
    }
    out.amps[idx] = amp;
  }
  return out;
}

ComplexMatrix mixed_density(double p, int copies) {
  check_copies(copies, 3);
  check_p(p);
  // single-copy rho in the computational |a b> basis
  ComplexMatrix rho1(4, 4);
  rho1(0, 0) = rho1(3, 3) = rho1(0, 3) = rho1(3, 0) = p / 2.0;
  rho1(1, 1) = rho1(2, 2) = rho1(1, 2) = rho1(2, 1) = (1.0 - p) / 2.0;

  const std::size_t dim = std::size_t{1} << (2 * copies);
  ComplexMatrix out(dim, dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      double v = 1.0;
      for (int i = 0; i < copies; ++i) {
        const int ar = static_cast<int>(r >> (2 * copies - 1 - i)) & 1;
        const int br = static_cast<int>(r >> (copies - 1 - i)) & 1;
        const int ac = static_cast<int>(c >> (2 * copies - 1 - i)) & 1;
        const int bc = static_cast<int>(c >> (copies - 1 - i)) & 1;
        v *= std::real(rho1((ar << 1) | br, (ac << 1) | bc));
        if (v == 0.0) break;
      }
      out(r, c) = v;
    }
  return out;
}

WeightVector mixed_weights(double p, int copies) {
  check_copies(copies, 3);
  check_p(p);
  WeightVector wv;
  wv.copies = copies;
  const std::size_t count = std::size_t{1} << copies;
  wv.w.resize(count);
  for (std::size_t x = 0; x < count; ++x) {
    const int k = hamming_weight(static_cast<unsigned>(x));
    wv.w[x] = std::pow(p, copies - k) * std::pow(1.0 - p, k);
  }
  return wv;
}

StateVector schmidt_ladder_state(double p, int copies) {
  check_copies(copies, 3);
  auto [a, b] = single_copy_amplitudes(p);
  const std::size_t side = std::size_t{1} << copies;
  StateVector out;
  out.amps.assign(side * side, 0.0);
  for (std::size_t x = 0; x < side; ++x) {
    const int k = hamming_weight(static_cast<unsigned>(x));
    out.amps[x * side + x] = std::pow(a, copies - k) * std::pow(b, k);
  }
  return out;
}

}  // namespace distillery
