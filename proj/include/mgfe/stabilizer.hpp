#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mgfe/errors.hpp"
#include "mgfe/pauli.hpp"

namespace mgfe {

enum class CliffordGateKind { H, S, X, CNOT };

// One gate of a Clifford circuit.  `qubit` is 1-based and doubles as the
// control for CNOT; `target` is used by CNOT only.
struct CliffordGate {
  CliffordGateKind kind;
  int qubit = 0;
  int target = 0;

  bool operator==(const CliffordGate&) const = default;
};

using CliffordCircuit = std::vector<CliffordGate>;

inline void validate_gate(const CliffordGate& g, int n_qubits) {
  if (g.qubit < 1 || g.qubit > n_qubits) {
    throw std::invalid_argument("gate qubit index out of range");
  }
  if (g.kind == CliffordGateKind::CNOT) {
    if (g.target < 1 || g.target > n_qubits) {
      throw std::invalid_argument("gate target index out of range");
    }
    if (g.target == g.qubit) {
      throw std::invalid_argument("CNOT control and target must differ");
    }
  }
}

namespace detail {

// Conjugation action of a single gate, V P V†, written on the (x, z) bit
// pair of each touched qubit.  Sign flips are folded into the phase
// exponent (adding 2 is multiplication by -1).
inline void conjugate_in_place(PauliString& p, const CliffordGate& g) {
  auto bits = [&p](int q) {
    const PauliLetter l = p.letter(q - 1);
    return std::pair<bool, bool>{l == PauliLetter::X || l == PauliLetter::Y,
                                 l == PauliLetter::Z || l == PauliLetter::Y};
  };
  auto put = [&p](int q, bool x, bool z) {
    PauliLetter l = PauliLetter::I;
    if (x && z) {
      l = PauliLetter::Y;
    } else if (x) {
      l = PauliLetter::X;
    } else if (z) {
      l = PauliLetter::Z;
    }
    p.set_letter(q - 1, l);
  };
  auto flip = [&p]() {
    p.set_phase_exponent(static_cast<uint8_t>(p.phase_exponent() + 2));
  };

  switch (g.kind) {
    case CliffordGateKind::H: {
      auto [x, z] = bits(g.qubit);
      if (x && z) flip();  // Y -> -Y
      put(g.qubit, z, x);  // X <-> Z
      break;
    }
    case CliffordGateKind::S: {
      auto [x, z] = bits(g.qubit);
      if (x && z) flip();      // Y -> -X
      put(g.qubit, x, z ^ x);  // X -> Y, Z -> Z
      break;
    }
    case CliffordGateKind::X: {
      auto [x, z] = bits(g.qubit);
      if (z) flip();  // Z -> -Z, Y -> -Y
      break;
    }
    case CliffordGateKind::CNOT: {
      auto [xc, zc] = bits(g.qubit);
      auto [xt, zt] = bits(g.target);
      if (xc && zt && (xt == zc)) flip();
      put(g.qubit, xc, zc ^ zt);
      put(g.target, xt ^ xc, zt);
      break;
    }
  }
}

}  // namespace detail

// Conjugate a phased Pauli by the circuit unitary, V P V† with
// V = g_m ... g_2 g_1 for the gate list [g_1, ..., g_m].
inline PauliString conjugate_pauli_by_clifford(const CliffordCircuit& circuit,
                                               const PauliString& p) {
  PauliString out = p;
  for (const CliffordGate& g : circuit) {
    validate_gate(g, p.n_qubits());
    detail::conjugate_in_place(out, g);
  }
  return out;
}

// Gate list of V†: reversed order, self-inverse gates kept, S replaced by
// its inverse S^3.
inline CliffordCircuit inverse_circuit(const CliffordCircuit& circuit) {
  CliffordCircuit out;
  out.reserve(circuit.size());
  for (auto it = circuit.rbegin(); it != circuit.rend(); ++it) {
    if (it->kind == CliffordGateKind::S) {
      out.push_back(*it);
      out.push_back(*it);
    }
    out.push_back(*it);
  }
  return out;
}

// Dense unitary of the circuit, qubit 1 on the most significant bit.
// Intended as a small-n oracle for tests and channel construction.
inline Eigen::MatrixXcd clifford_unitary(const CliffordCircuit& circuit, int n_qubits) {
  if (n_qubits < 1 || n_qubits > 10) {
    throw capacity_error("dense Clifford unitary supported only for 1..10 qubits");
  }
  const long dim = 1L << n_qubits;
  const complexd i_unit(0.0, 1.0);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  Eigen::Matrix2cd h;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  Eigen::Matrix2cd s;
  s << 1, 0, 0, i_unit;
  Eigen::Matrix2cd x;
  x << 0, 1, 1, 0;

  for (const CliffordGate& g : circuit) {
    validate_gate(g, n_qubits);
    Eigen::MatrixXcd step(dim, dim);
    if (g.kind == CliffordGateKind::CNOT) {
      step.setZero();
      const long control_bit = 1L << (n_qubits - g.qubit);
      const long target_bit = 1L << (n_qubits - g.target);
      for (long b = 0; b < dim; ++b) {
        const long out_index = (b & control_bit) ? (b ^ target_bit) : b;
        step(out_index, b) = 1.0;
      }
    } else {
      const Eigen::Matrix2cd& local = g.kind == CliffordGateKind::H   ? h
                                      : g.kind == CliffordGateKind::S ? s
                                                                      : x;
      step = Eigen::MatrixXcd::Identity(1, 1);
      for (int q = 1; q <= n_qubits; ++q) {
        step = q == g.qubit ? kron(step, local)
                            : kron(step, Eigen::MatrixXcd::Identity(2, 2));
      }
    }
    u = step * u;
  }
  return u;
}

}  // namespace mgfe
