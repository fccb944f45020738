#include "distillery/bell.hpp"

#include <cmath>
#include <stdexcept>

#include "distillery/distill.hpp"
#include "distillery/states.hpp"

namespace distillery {

namespace {

void check_copies(int copies, int max_copies = 3) {
  if (copies < 1 || copies > max_copies)
    throw std::invalid_argument("copy count out of range");
}

ComplexMatrix embed_two(cplx m00, cplx m01, cplx m10, cplx m11) {
  ComplexMatrix m(2, 2);
  m(0, 0) = m00;
  m(0, 1) = m01;
  m(1, 0) = m10;
  m(1, 1) = m11;
  return m;
}

// lenient sign for the see-saw inner loop: null directions contribute nothing
// to tr(F O), so any fixed sign keeps the update optimal
ComplexMatrix lenient_sign(const ComplexMatrix& h) {
  EigResult eig = hermitian_eig(h);
  const std::size_t d = h.rows();
  ComplexMatrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double sgn = eig.values[k] >= 0.0 ? 1.0 : -1.0;
        s += eig.vectors(i, k) * sgn * std::conj(eig.vectors(j, k));
      }
      out(i, j) = s;
    }
  return out;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  return out;
}

}  // namespace

ComplexMatrix pauli_x() { return embed_two(0, 1, 1, 0); }
ComplexMatrix pauli_y() {
  return embed_two(0, cplx(0, -1), cplx(0, 1), 0);
}
ComplexMatrix pauli_z() { return embed_two(1, 0, 0, -1); }

ComplexMatrix x_string(unsigned bits, int copies) {
  ComplexMatrix out = ComplexMatrix::identity(1);
  for (int i = 0; i < copies; ++i) {
    const bool flip = (bits >> (copies - 1 - i)) & 1u;
    out = kron(out, flip ? pauli_x() : ComplexMatrix::identity(2));
  }
  return out;
}

ObservableQuad meas_observables(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("p out of range");
  const double g = 1.0 - 2.0 * p;
  const double denom = std::sqrt(1.0 + g * g);
  ObservableQuad q;
  q.copies = 1;
  q.a0 = pauli_z();
  q.a1 = pauli_x();
  const double c = (2.0 * p - 1.0) / denom;  // sign fixed by the correlator table
  const double s = 1.0 / denom;
  q.b0 = c * pauli_z() + s * pauli_x();
  q.b1 = c * pauli_z() + (-s) * pauli_x();
  return q;
}

ObservableQuad tensor_power_quad(const ObservableQuad& q, int copies) {
  check_copies(copies);
  ObservableQuad out;
  out.copies = copies * q.copies;
  out.a0 = q.a0;
  out.a1 = q.a1;
  out.b0 = q.b0;
  out.b1 = q.b1;
  for (int i = 1; i < copies; ++i) {
    out.a0 = kron(out.a0, q.a0);
    out.a1 = kron(out.a1, q.a1);
    out.b0 = kron(out.b0, q.b0);
    out.b1 = kron(out.b1, q.b1);
  }
  return out;
}

ObservableQuad pairing_block_quad(double p, int copies) {
  check_copies(copies);
  const std::size_t d = std::size_t{1} << copies;
  // ladder amplitude per basis index, then pair indices in descending order
  auto [a, b] = single_copy_amplitudes(p);
  std::vector<double> amp(d);
  for (std::size_t x = 0; x < d; ++x) {
    const int w = hamming_weight(static_cast<unsigned>(x));
    amp[x] = std::pow(a, copies - w) * std::pow(b, w);
  }
  std::vector<std::size_t> order(d);
  for (std::size_t x = 0; x < d; ++x) order[x] = x;
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (amp[l] != amp[r]) return amp[l] > amp[r];
    return l < r;
  });

  ObservableQuad q;
  q.copies = copies;
  q.a0 = ComplexMatrix::zero(d, d);
  q.a1 = ComplexMatrix::zero(d, d);
  q.b0 = ComplexMatrix::zero(d, d);
  q.b1 = ComplexMatrix::zero(d, d);
  for (std::size_t k = 0; k + 1 < d; k += 2) {
    const std::size_t i = order[k], j = order[k + 1];
    const double u = amp[i], v = amp[j];
    // per block: the state is (u|ii> + v|jj>)/sqrt(u^2+v^2) with correlators
    // <ZZ> = 1 and <XX> = 2uv/(u^2+v^2); Bob tilts toward (<ZZ>, <XX>)
    const double wz = u * u + v * v;
    const double wx = 2.0 * u * v;
    const double nrm = std::sqrt(wz * wz + wx * wx);
    double cz = 1.0, cx = 0.0;
    if (nrm > 0.0) {
      cz = wz / nrm;
      cx = wx / nrm;
    }
    q.a0(i, i) = 1.0;
    q.a0(j, j) = -1.0;
    q.a1(i, j) = 1.0;
    q.a1(j, i) = 1.0;
    q.b0(i, i) = cz;
    q.b0(j, j) = -cz;
    q.b0(i, j) = cx;
    q.b0(j, i) = cx;
    q.b1(i, i) = cz;
    q.b1(j, j) = -cz;
    q.b1(i, j) = -cx;
    q.b1(j, i) = -cx;
  }
  return q;
}

ObservableQuad random_quad(Rng& rng, int copies) {
  const std::size_t d = std::size_t{1} << copies;
  auto random_observable = [&]() {
    for (;;) {
      ComplexMatrix h(d, d);
      for (std::size_t i = 0; i < d; ++i) {
        h(i, i) = rng.gaussian();
        for (std::size_t j = i + 1; j < d; ++j) {
          const cplx z(rng.gaussian(), rng.gaussian());
          h(i, j) = z;
          h(j, i) = std::conj(z);
        }
      }
      try {
        return sign_observable(h);
      } catch (const std::domain_error&) {
        // degenerate draw, resample
      }
    }
  };
  ObservableQuad q;
  q.copies = copies;
  q.a0 = random_observable();
  q.a1 = random_observable();
  q.b0 = random_observable();
  q.b1 = random_observable();
  return q;
}

ComplexMatrix chsh_operator(const ObservableQuad& quad) {
  return kron(quad.a0, quad.b0) + kron(quad.a0, quad.b1) +
         kron(quad.a1, quad.b0) - kron(quad.a1, quad.b1);
}

double chsh_value(const ComplexMatrix& rho, const ObservableQuad& quad) {
  const ComplexMatrix m = chsh_operator(quad);
  if (rho.rows() != m.rows() || rho.cols() != m.cols())
    throw std::invalid_argument("chsh_value: state dimension mismatch");
  return std::real((m * rho).trace());
}

ComplexMatrix build_n_operator(double p, int copies, const ObservableQuad& quad) {
  check_copies(copies);
  const std::size_t side = std::size_t{1} << copies;
  if (quad.side_dim() != side)
    throw std::invalid_argument("build_n_operator: quad dimension mismatch");
  const WeightVector wv = mixed_weights(p, copies);
  const ComplexMatrix m = chsh_operator(quad);
  const ComplexMatrix ida = ComplexMatrix::identity(side);
  ComplexMatrix n_op(side * side, side * side);
  for (std::size_t x = 0; x < side; ++x) {
    const ComplexMatrix flip = kron(ida, x_string(static_cast<unsigned>(x), copies));
    n_op += wv.w[x] * (flip * m * flip);
  }
  return n_op;
}

double KLMatrix::entry_for_weight(int weight) const {
  return at(0, static_cast<std::size_t>((1u << weight) - 1u));
}

double KLMatrix::row_sum(std::size_t x) const {
  double s = 0.0;
  for (std::size_t y = 0; y < dim(); ++y) s += at(x, y);
  return s;
}

KLMatrix kl_matrix(double p, int copies) {
  check_copies(copies);
  const WeightVector wv = mixed_weights(p, copies);
  const std::size_t d = std::size_t{1} << copies;
  KLMatrix k;
  k.copies = copies;
  k.entries.assign(d * d, 0.0);
  const double inv = 1.0 / static_cast<double>(d);
  // entries depend only on x^y; fill from the first row so the circulant
  // structure is exact, not merely up to summation order
  std::vector<double> row(d);
  for (std::size_t s = 0; s < d; ++s) {
    double acc = 0.0;
    for (std::size_t z = 0; z < d; ++z) acc += wv.w[z] * wv.w[s ^ z];
    row[s] = inv * acc;
  }
  for (std::size_t x = 0; x < d; ++x)
    for (std::size_t y = 0; y < d; ++y) k.entries[x * d + y] = row[x ^ y];
  return k;
}

BellBundle build_decomposition(double p, int copies, const ObservableQuad& quad) {
  check_copies(copies);
  const std::size_t side = std::size_t{1} << copies;
  if (quad.side_dim() != side)
    throw std::invalid_argument("build_decomposition: quad dimension mismatch");

  BellBundle bundle;
  bundle.quad = quad;
  bundle.m = chsh_operator(quad);
  bundle.n_op = build_n_operator(p, copies, quad);
  bundle.k = kl_matrix(p, copies);
  bundle.a_comm = quad.a1 * quad.a0 - quad.a0 * quad.a1;

  std::vector<ComplexMatrix> b0x(side), b1x(side);
  for (std::size_t x = 0; x < side; ++x) {
    const ComplexMatrix flip = x_string(static_cast<unsigned>(x), copies);
    b0x[x] = flip * quad.b0 * flip;
    b1x[x] = flip * quad.b1 * flip;
  }

  ComplexMatrix ktilde(side, side), ltilde(side, side);
  for (std::size_t x = 0; x < side; ++x)
    for (std::size_t y = 0; y < side; ++y) {
      const double kxy = bundle.k.at(x, y);
      if (kxy == 0.0) continue;
      ktilde += (0.5 * kxy) * (b0x[x] * b0x[y] + b1x[x] * b1x[y]);
      ltilde += (0.5 * kxy) * (b0x[x] * b1x[y] - b1x[y] * b0x[x]);
    }
  bundle.ktilde = ktilde;
  bundle.ltilde = ltilde;
  return bundle;
}

double verify_nsquare(const BellBundle& bundle) {
  const std::size_t side = bundle.ktilde.rows();
  const ComplexMatrix lhs = bundle.n_op * bundle.n_op;
  const ComplexMatrix rhs =
      4.0 * kron(ComplexMatrix::identity(side), bundle.ktilde) +
      2.0 * kron(bundle.a_comm, bundle.ltilde);
  return max_abs_diff(lhs, rhs);
}

double verify_nsquare(double p, int copies, const ObservableQuad& quad) {
  return verify_nsquare(build_decomposition(p, copies, quad));
}

double ltilde_norm_bound(double p, int copies) {
  check_copies(copies);
  const KLMatrix k = kl_matrix(p, copies);
  const double a = k.entry_for_weight(0);
  const double b = k.entry_for_weight(1);
  switch (copies) {
    case 1:
      return 2.0 * std::abs(a - b);
    case 2: {
      const double c = k.entry_for_weight(2);
      return 4.0 * std::abs(a - b) + 4.0 * std::abs(c - b);
    }
    default: {
      const double c = k.entry_for_weight(2);
      const double d = k.entry_for_weight(3);
      return 8.0 * std::abs(a - b) + 24.0 * std::abs(c - b) +
             8.0 * std::abs(d - b);
    }
  }
}

std::vector<double> kl_eigenvalues_wht(const KLMatrix& k) {
  const std::size_t d = k.dim();
  std::vector<double> row(d);
  for (std::size_t y = 0; y < d; ++y) row[y] = k.at(0, y);
  // in-place fast Walsh-Hadamard transform
  for (std::size_t len = 1; len < d; len <<= 1) {
    for (std::size_t i = 0; i < d; i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double u = row[j];
        const double v = row[j + len];
        row[j] = u + v;
        row[j + len] = u - v;
      }
    }
  }
  return row;
}

SeesawResult seesaw_optimize(const ComplexMatrix& rho, std::uint64_t seed,
                             int restarts, int max_iters, Exec exec) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("seesaw: rho not square");
  std::size_t side = 1;
  while (side * side < rho.rows()) side <<= 1;
  if (side * side != rho.rows())
    throw std::invalid_argument("seesaw: rho dimension is not a square of a power of 2");
  int copies = 0;
  for (std::size_t s = side; s > 1; s >>= 1) ++copies;
  if (restarts < 1 || max_iters < 1)
    throw std::invalid_argument("seesaw: restarts and max_iters must be positive");

  const ComplexMatrix ida = ComplexMatrix::identity(side);
  const Rng master(seed);

  struct RestartOutcome {
    double value = -1e300;
    ObservableQuad quad;
    bool converged = false;
    std::vector<double> trace;
  };
  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(restarts));

  for_each_index(static_cast<std::size_t>(restarts), exec, [&](std::size_t r) {
    Rng rng = master.split(r);
    ObservableQuad q = random_quad(rng, copies);
    RestartOutcome out;
    double prev = chsh_value(rho, q);
    out.trace.push_back(prev);
    for (int it = 0; it < max_iters; ++it) {
      // Alice: optimal A_i is the sign of the Bob-contracted effective operator
      const ComplexMatrix f0 =
          hermitian_part(partial_trace_b(rho * kron(ida, q.b0 + q.b1), side, side));
      const ComplexMatrix f1 =
          hermitian_part(partial_trace_b(rho * kron(ida, q.b0 - q.b1), side, side));
      q.a0 = lenient_sign(f0);
      q.a1 = lenient_sign(f1);
      const ComplexMatrix g0 =
          hermitian_part(partial_trace_a(rho * kron(q.a0 + q.a1, ida), side, side));
      const ComplexMatrix g1 =
          hermitian_part(partial_trace_a(rho * kron(q.a0 - q.a1, ida), side, side));
      q.b0 = lenient_sign(g0);
      q.b1 = lenient_sign(g1);
      const double value = chsh_value(rho, q);
      out.trace.push_back(value);
      if (value - prev < 1e-10) {
        prev = std::max(prev, value);
        out.converged = true;
        break;
      }
      prev = value;
    }
    out.value = prev;
    out.quad = q;
    outcomes[r] = std::move(out);
  });

  SeesawResult best;
  best.value = -1e300;
  for (int r = 0; r < restarts; ++r) {
    const RestartOutcome& o = outcomes[static_cast<std::size_t>(r)];
    if (o.value > best.value) {
      best.value = o.value;
      best.quad = o.quad;
      best.converged = o.converged;
      best.best_restart = r;
      best.trace = o.trace;
    }
  }
  return best;
}

}  // namespace distillery
