#include "distillery/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace distillery {

namespace {

constexpr double kInvR2 = 0.70710678118654752440;

const char* kind_name(Gate::Kind k) {
  switch (k) {
    case Gate::Kind::pauli_x: return "X";
    case Gate::Kind::pauli_z: return "Z";
    case Gate::Kind::hadamard: return "H";
    case Gate::Kind::rot_y: return "RY";
    case Gate::Kind::rot_z: return "RZ";
    case Gate::Kind::unitary: return "U1Q";
    case Gate::Kind::controlled: return "CU";
    case Gate::Kind::measure: return "M";
  }
  return "?";
}

bool is_clifford_angle(double angle) {
  const double half_pi = 1.5707963267948966;
  const double r = std::remainder(angle, half_pi);
  return std::abs(r) < 1e-9;
}

}  // namespace

void Circuit::x(int q) { gates.push_back({Gate::Kind::pauli_x, q}); }
void Circuit::z(int q) { gates.push_back({Gate::Kind::pauli_z, q}); }
void Circuit::h(int q) { gates.push_back({Gate::Kind::hadamard, q}); }

void Circuit::ry(int q, double angle) {
  Gate g{Gate::Kind::rot_y, q};
  g.angle = angle;
  gates.push_back(g);
}

void Circuit::rz(int q, double angle) {
  Gate g{Gate::Kind::rot_z, q};
  g.angle = angle;
  gates.push_back(g);
}

void Circuit::unitary(int q, const std::array<cplx, 4>& u) {
  Gate g{Gate::Kind::unitary, q};
  g.payload = u;
  gates.push_back(g);
}

void Circuit::controlled(int control, int target, const std::array<cplx, 4>& u) {
  Gate g{Gate::Kind::controlled, target};
  g.control = control;
  g.payload = u;
  gates.push_back(g);
}

void Circuit::cx(int control, int target) {
  controlled(control, target, {cplx(0), cplx(1), cplx(1), cplx(0)});
}

void Circuit::measure(int q, int c) {
  Gate g{Gate::Kind::measure, q};
  g.creg = c;
  gates.push_back(g);
  classical_bits = std::max(classical_bits, c + 1);
}

void Circuit::append(const Circuit& other) {
  qubits = std::max(qubits, other.qubits);
  classical_bits = std::max(classical_bits, other.classical_bits);
  gates.insert(gates.end(), other.gates.begin(), other.gates.end());
}

std::array<cplx, 4> gate_matrix(const Gate& g) {
  switch (g.kind) {
    case Gate::Kind::pauli_x:
      return {cplx(0), cplx(1), cplx(1), cplx(0)};
    case Gate::Kind::pauli_z:
      return {cplx(1), cplx(0), cplx(0), cplx(-1)};
    case Gate::Kind::hadamard:
      return {cplx(kInvR2), cplx(kInvR2), cplx(kInvR2), cplx(-kInvR2)};
    case Gate::Kind::rot_y: {
      const double c = std::cos(g.angle / 2.0), s = std::sin(g.angle / 2.0);
      return {cplx(c), cplx(-s), cplx(s), cplx(c)};
    }
    case Gate::Kind::rot_z: {
      const cplx em = std::exp(cplx(0, -g.angle / 2.0));
      const cplx ep = std::exp(cplx(0, g.angle / 2.0));
      return {em, cplx(0), cplx(0), ep};
    }
    case Gate::Kind::unitary:
    case Gate::Kind::controlled:
      return g.payload;
    case Gate::Kind::measure:
      throw std::logic_error("measure has no matrix");
  }
  throw std::logic_error("unknown gate kind");
}

std::array<cplx, 4> adjoint2(const std::array<cplx, 4>& u) {
  return {std::conj(u[0]), std::conj(u[2]), std::conj(u[1]), std::conj(u[3])};
}

bool unitary_within(const std::array<cplx, 4>& u, double tol) {
  // U U^dagger = I
  const cplx a = u[0] * std::conj(u[0]) + u[1] * std::conj(u[1]);
  const cplx b = u[0] * std::conj(u[2]) + u[1] * std::conj(u[3]);
  const cplx d = u[2] * std::conj(u[2]) + u[3] * std::conj(u[3]);
  return std::abs(a - 1.0) < tol && std::abs(b) < tol && std::abs(d - 1.0) < tol;
}

std::string to_text(const Circuit& c) {
  std::ostringstream os;
  os.precision(17);
  os << "QUBITS " << c.qubits << "\n";
  os << "CBITS " << c.classical_bits << "\n";
  for (const Gate& g : c.gates) {
    os << kind_name(g.kind);
    switch (g.kind) {
      case Gate::Kind::pauli_x:
      case Gate::Kind::pauli_z:
      case Gate::Kind::hadamard:
        os << " " << g.target;
        break;
      case Gate::Kind::rot_y:
      case Gate::Kind::rot_z:
        os << " " << g.target << " " << g.angle;
        break;
      case Gate::Kind::unitary:
        os << " " << g.target;
        for (const cplx& z : g.payload)
          os << " " << std::real(z) << " " << std::imag(z);
        break;
      case Gate::Kind::controlled:
        os << " " << g.control << " " << g.target;
        for (const cplx& z : g.payload)
          os << " " << std::real(z) << " " << std::imag(z);
        break;
      case Gate::Kind::measure:
        os << " " << g.target << " " << g.creg;
        break;
    }
    os << "\n";
  }
  return os.str();
}

Circuit from_text(const std::string& text) {
  Circuit c;
  std::istringstream is(text);
  std::string line;
  auto payload_from = [](std::istringstream& ls) {
    std::array<cplx, 4> u{};
    for (int k = 0; k < 4; ++k) {
      double re = 0.0, im = 0.0;
      ls >> re >> im;
      u[k] = cplx(re, im);
    }
    return u;
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "QUBITS") {
      ls >> c.qubits;
    } else if (tok == "CBITS") {
      ls >> c.classical_bits;
    } else if (tok == "X" || tok == "Z" || tok == "H") {
      int q;
      ls >> q;
      if (tok == "X") c.x(q);
      else if (tok == "Z") c.z(q);
      else c.h(q);
    } else if (tok == "RY" || tok == "RZ") {
      int q;
      double a;
      ls >> q >> a;
      if (tok == "RY") c.ry(q, a);
      else c.rz(q, a);
    } else if (tok == "U1Q") {
      int q;
      ls >> q;
      c.unitary(q, payload_from(ls));
    } else if (tok == "CU") {
      int ctl, tgt;
      ls >> ctl >> tgt;
      c.controlled(ctl, tgt, payload_from(ls));
    } else if (tok == "M") {
      int q, b;
      ls >> q >> b;
      c.measure(q, b);
    } else {
      throw std::invalid_argument("from_text: unknown gate token " + tok);
    }
  }
  return c;
}

ResourceMetrics analyze_circuit(const Circuit& c) {
  ResourceMetrics m;
  m.logical_qubits = c.qubits;
  std::vector<int> qubit_depth(static_cast<std::size_t>(c.qubits), 0);
  std::vector<int> creg_depth(static_cast<std::size_t>(std::max(c.classical_bits, 0)), 0);

  const std::array<cplx, 4> x_payload{cplx(0), cplx(1), cplx(1), cplx(0)};
  for (const Gate& g : c.gates) {
    m.gate_counts[kind_name(g.kind)] += 1;
    int level = qubit_depth[static_cast<std::size_t>(g.target)];
    if (g.kind == Gate::Kind::controlled) {
      level = std::max(level, qubit_depth[static_cast<std::size_t>(g.control)]);
      m.two_qubit_gates += 1;
      bool is_cx = true;
      for (int k = 0; k < 4; ++k)
        if (std::abs(g.payload[static_cast<std::size_t>(k)] -
                     x_payload[static_cast<std::size_t>(k)]) > 1e-12)
          is_cx = false;
      if (!is_cx) m.non_clifford_rotations += 1;
    }
    if (g.kind == Gate::Kind::measure && g.creg >= 0)
      level = std::max(level, creg_depth[static_cast<std::size_t>(g.creg)]);
    if ((g.kind == Gate::Kind::rot_y || g.kind == Gate::Kind::rot_z) &&
        !is_clifford_angle(g.angle))
      m.non_clifford_rotations += 1;
    if (g.kind == Gate::Kind::unitary) m.non_clifford_rotations += 1;

    ++level;
    qubit_depth[static_cast<std::size_t>(g.target)] = level;
    if (g.kind == Gate::Kind::controlled)
      qubit_depth[static_cast<std::size_t>(g.control)] = level;
    if (g.kind == Gate::Kind::measure && g.creg >= 0)
      creg_depth[static_cast<std::size_t>(g.creg)] = level;
    m.depth = std::max(m.depth, level);
  }
  return m;
}

}  // namespace distillery
