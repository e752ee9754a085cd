#pragma once

#include "mgfe/pauli.hpp"
#include "mgfe/subsets.hpp"

namespace mgfe {

// Majorana generator c_i on n qubits, 1 <= i <= 2n, in the Jordan-Wigner
// form: c_{2k-1} = Z^(k-1) X I..., c_{2k} = Z^(k-1) Y I... .  Hermitian,
// squares to identity, pairwise anticommuting.
inline PauliString jw_generator(int i, int n_qubits) {
  if (i < 1 || i > 2 * n_qubits) {
    throw std::invalid_argument("Majorana index must lie in [1, 2n]");
  }
  PauliString p(n_qubits);
  const int k = (i + 1) / 2;  // qubit block, 1-based
  for (int q = 0; q < k - 1; ++q) p.set_letter(q, PauliLetter::Z);
  p.set_letter(k - 1, (i % 2 == 1) ? PauliLetter::X : PauliLetter::Y);
  return p;
}

// A monomial c_I = c_{i1} c_{i2} ... c_{ik} with i1 < i2 < ... < ik.
struct CliffordMonomial {
  int n_qubits;
  Subset indices;

  CliffordMonomial(int n, Subset idx) : n_qubits(n), indices(std::move(idx)) {
    validate_subset(indices, 2 * n_qubits);
  }
};

// Collapse the generator product into a single phased Pauli string
// c_I = phi_I * P_I (phi_I in {1, i, -1, -i}, P_I phase-free letters).
inline PauliString monomial_to_pauli(const CliffordMonomial& m) {
  PauliString p(m.n_qubits);  // identity
  for (int i : m.indices) p *= jw_generator(i, m.n_qubits);
  return p;
}

// Sign s_k with c_I† = s_k c_I for |I| = k: (-1)^(k(k-1)/2), the period-4
// pattern +, +, -, -, +, +, ... starting at k = 0.
inline int adjoint_sign(int k) {
  return (k % 4 == 0 || k % 4 == 1) ? 1 : -1;
}

// Inverse of monomial_to_pauli on the letter pattern: recover the unique
// index subset I with P_I equal to the letters of p (any phase is ignored).
// Works from the last qubit backwards, peeling the Z tails contributed by
// generators on later qubits before reading off the local pattern
//   (x, z) = (0,0) -> {}, (1,0) -> {2q-1}, (1,1) -> {2q}, (0,1) -> {2q-1, 2q}.
inline Subset monomial_subset_from_letters(const PauliString& p) {
  const int n = p.n_qubits();
  std::vector<std::pair<bool, bool>> local(n);  // (has 2q-1, has 2q)
  int tail = 0;  // number of indices already recovered on qubits > q
  for (int q = n; q >= 1; --q) {
    const PauliLetter letter = p.letter(q - 1);
    const bool x = letter == PauliLetter::X || letter == PauliLetter::Y;
    bool z = letter == PauliLetter::Z || letter == PauliLetter::Y;
    if (tail % 2 == 1) z = !z;
    bool lo = false;
    bool hi = false;
    if (x && !z) {
      lo = true;
    } else if (x && z) {
      hi = true;
    } else if (!x && z) {
      lo = hi = true;
    }
    local[q - 1] = {lo, hi};
    tail += (lo ? 1 : 0) + (hi ? 1 : 0);
  }
  Subset out;
  for (int q = 1; q <= n; ++q) {
    if (local[q - 1].first) out.push_back(2 * q - 1);
    if (local[q - 1].second) out.push_back(2 * q);
  }
  return out;
}

}  // namespace mgfe
