#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "distillery/complex_matrix.hpp"

namespace distillery {

// Gate inventory for the protocol simulator.  Qubit 0 is the most significant
// bit of a basis index.
struct Gate {
  enum class Kind {
    pauli_x,
    pauli_z,
    hadamard,
    rot_y,
    rot_z,
    unitary,     // arbitrary single-qubit unitary payload
    controlled,  // single-qubit unitary payload on target, one control
    measure,
  };

  Kind kind = Kind::pauli_x;
  int target = 0;
  int control = -1;  // controlled only
  int creg = -1;     // measure only
  double angle = 0.0;
  std::array<cplx, 4> payload{};  // row-major 2x2, unitary/controlled only
};

struct Circuit {
  int qubits = 0;
  int classical_bits = 0;
  std::vector<Gate> gates;

  void x(int q);
  void z(int q);
  void h(int q);
  void ry(int q, double angle);
  void rz(int q, double angle);
  void unitary(int q, const std::array<cplx, 4>& u);
  void controlled(int control, int target, const std::array<cplx, 4>& u);
  void cx(int control, int target);
  void measure(int q, int c);

  void append(const Circuit& other);
};

std::array<cplx, 4> gate_matrix(const Gate& g);
std::array<cplx, 4> adjoint2(const std::array<cplx, 4>& u);
bool unitary_within(const std::array<cplx, 4>& u, double tol);

// Line-oriented text form, one gate per line, for debugging and golden tests.
std::string to_text(const Circuit& c);
Circuit from_text(const std::string& text);

struct ResourceMetrics {
  int logical_qubits = 0;
  int depth = 0;  // longest dependency chain over qubits and classical bits
  std::map<std::string, int> gate_counts;
  int two_qubit_gates = 0;
  int non_clifford_rotations = 0;
};

ResourceMetrics analyze_circuit(const Circuit& c);

}  // namespace distillery
