#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mgfe/clifford_algebra.hpp"
#include "mgfe/rotation.hpp"

namespace mgfe {

// Two-qubit gate acting as A on the odd-parity span {|01>, |10>} and B on
// the even-parity span {|00>, |11>}, in the basis |00>, |01>, |10>, |11>.
// It is a matchgate exactly when det A = det B.
inline Eigen::Matrix4cd gate_g(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  if ((a.adjoint() * a - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-10 ||
      (b.adjoint() * b - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("gate blocks must be unitary within 1e-10");
  }
  Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
  g(0, 0) = b(0, 0);
  g(0, 3) = b(0, 1);
  g(3, 0) = b(1, 0);
  g(3, 3) = b(1, 1);
  g(1, 1) = a(0, 0);
  g(1, 2) = a(0, 1);
  g(2, 1) = a(1, 0);
  g(2, 2) = a(1, 1);
  return g;
}

inline bool is_matchgate_blocks(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b,
                                double tol = 1e-10) {
  return std::abs(a.determinant() - b.determinant()) <= tol;
}

// fsim(theta, phi): iSWAP-like interaction with swap angle theta and
// controlled phase phi.  A matchgate iff phi = 0.
inline Eigen::Matrix4cd fsim_gate(double theta, double phi) {
  Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
  const double c = std::cos(theta), s = std::sin(theta);
  g(0, 0) = 1.0;
  g(1, 1) = c;
  g(1, 2) = complexd(0.0, -s);
  g(2, 1) = complexd(0.0, -s);
  g(2, 2) = c;
  g(3, 3) = std::exp(complexd(0.0, phi));
  return g;
}

// XY(theta) = fsim(theta, 0), always a matchgate.
inline Eigen::Matrix4cd xy_gate(double theta) { return fsim_gate(theta, 0.0); }

// Givens rotation on the odd-parity span, identity on the even-parity span.
inline Eigen::Matrix4cd givens_gate(double theta) {
  Eigen::Matrix2cd a;
  a << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return gate_g(a, Eigen::Matrix2cd::Identity());
}

inline void validate_matchgate_unitary(const Eigen::Matrix4cd& g, double tol = 1e-10) {
  if ((g.adjoint() * g - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("gate must be unitary within 1e-10");
  }
  // parity-preserving zero pattern
  for (int r : {0, 3}) {
    for (int c : {1, 2}) {
      if (std::abs(g(r, c)) > tol || std::abs(g(c, r)) > tol) {
        throw std::invalid_argument("gate must preserve the parity blocks");
      }
    }
  }
  const complexd det_a = g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1);
  const complexd det_b = g(0, 0) * g(3, 3) - g(0, 3) * g(3, 0);
  if (std::abs(det_a - det_b) > tol) {
    throw std::invalid_argument("gate blocks must have equal determinants");
  }
}

struct CircuitGate {
  int qubit;  // left qubit of the pair (q, q+1), 1-based
  Eigen::Matrix4cd unitary;
};

// A nearest-neighbor matchgate circuit.  Gates apply in list order.
class MatchgateCircuit {
 public:
  explicit MatchgateCircuit(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 32) {
      throw std::invalid_argument("circuit supports 1..32 qubits");
    }
  }

  int n_qubits() const { return n_; }
  const std::vector<CircuitGate>& gates() const { return gates_; }

  void add_gate(int qubit, const Eigen::Matrix4cd& g) {
    if (qubit < 1 || qubit + 1 > n_) {
      throw std::invalid_argument("gate must act on a nearest-neighbor pair inside the register");
    }
    validate_matchgate_unitary(g);
    gates_.push_back({qubit, g});
  }

  // Dense unitary of the whole circuit.
  Eigen::MatrixXcd unitary() const {
    if (n_ > 10) throw capacity_error("dense circuit unitary limited to 10 qubits");
    const int64_t dim = int64_t{1} << n_;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    for (const CircuitGate& g : gates_) {
      const int64_t left = int64_t{1} << (g.qubit - 1);
      const int64_t right = int64_t{1} << (n_ - g.qubit - 1);
      const Eigen::MatrixXcd embedded =
          kron(kron(Eigen::MatrixXcd::Identity(left, left), g.unitary),
               Eigen::MatrixXcd::Identity(right, right));
      u = embedded * u;
    }
    return u;
  }

 private:
  int n_;
  std::vector<CircuitGate> gates_;
};

namespace detail {

// Conjugation action of one two-qubit matchgate on the four Majorana
// generators it touches, computed in the two-qubit algebra.
inline Eigen::Matrix4d local_rotation(const Eigen::Matrix4cd& g) {
  Eigen::Matrix4d r;
  std::vector<Eigen::MatrixXcd> c(4);
  for (int i = 0; i < 4; ++i) c[i] = jw_generator(i + 1, 2).to_matrix();
  for (int i = 0; i < 4; ++i) {
    const Eigen::MatrixXcd image = g * c[i] * g.adjoint();
    for (int j = 0; j < 4; ++j) {
      const complexd coeff = (c[j].adjoint() * image).trace() / 4.0;
      r(j, i) = coeff.real();
    }
  }
  if (!is_special_orthogonal(r, 1e-9)) {
    throw std::invalid_argument("gate does not act as a rotation on the Majorana generators");
  }
  return r;
}

}  // namespace detail

// Conjugation action of the circuit on Majorana labels: U c_i U† = sum_j R_ji c_j.
// Each gate touches only the four generators straddling its qubit pair, so the
// full rotation is a product of locally embedded 4x4 blocks.
inline Rotation circuit_to_rotation(const MatchgateCircuit& circ) {
  const int n = circ.n_qubits();
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  for (const CircuitGate& g : circ.gates()) {
    Eigen::MatrixXd step = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    step.block<4, 4>(2 * g.qubit - 2, 2 * g.qubit - 2) = detail::local_rotation(g.unitary);
    r = step * r;
  }
  return Rotation(r);
}

// Dense Hamiltonian matrix 2i * sum_{i<j} h_ij c_i c_j.
inline Eigen::MatrixXcd dense_quadratic_hamiltonian(const QuadraticHamiltonian& h) {
  const int n = h.n_qubits();
  if (n > 10) throw capacity_error("dense Hamiltonian limited to 10 qubits");
  const int64_t dim = int64_t{1} << n;
  Eigen::MatrixXcd hm = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 1; i <= 2 * n; ++i) {
    for (int j = i + 1; j <= 2 * n; ++j) {
      const double hij = h.matrix()(i - 1, j - 1);
      if (hij == 0.0) continue;
      hm += complexd(0.0, 2.0 * hij) * monomial_to_pauli({n, {i, j}}).to_matrix();
    }
  }
  return hm;
}

// U = exp(-iH) for the quadratic Hamiltonian, via its eigendecomposition.
inline Eigen::MatrixXcd unitary_from_hamiltonian(const QuadraticHamiltonian& h) {
  const Eigen::MatrixXcd hm = dense_quadratic_hamiltonian(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hm);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const Eigen::VectorXd w = es.eigenvalues();
  Eigen::VectorXcd phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::exp(complexd(0.0, -w(k)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Recover the quadratic Hamiltonian of a matchgate unitary from its
// principal logarithm: log U = 2 * sum_{i<j} h_ij c_i c_j, and the monomials
// are Hilbert-Schmidt orthogonal, so h_ij = Tr((c_i c_j)† log U) / 2^(n+1).
inline QuadraticHamiltonian hamiltonian_from_unitary(const Eigen::MatrixXcd& u) {
  const int64_t dim = u.rows();
  if (dim < 2 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("unitary dimension must be a power of two");
  }
  int n = 0;
  while ((int64_t{1} << n) < dim) ++n;
  const Eigen::MatrixXcd logu = log_unitary(u);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 1; i <= 2 * n; ++i) {
    for (int j = i + 1; j <= 2 * n; ++j) {
      const PauliString cij = monomial_to_pauli({n, {i, j}});
      const complexd inner =
          std::conj(cij.phase()) * pauli_hs_inner(cij.letters_only(), logu);
      const double hij = inner.real() / static_cast<double>(dim * 2);
      h(i - 1, j - 1) = hij;
      h(j - 1, i - 1) = -hij;
    }
  }
  return QuadraticHamiltonian(h);
}

// Rotation generated by a matchgate unitary, through its Hamiltonian.
inline Rotation rotation_from_unitary(const Eigen::MatrixXcd& u) {
  return rotation_from_hamiltonian(hamiltonian_from_unitary(u));
}

// Matchgate unitary generating a given rotation (inverse of the above, up to
// the branch restriction of the logarithm).
inline Eigen::MatrixXcd unitary_from_rotation(const Rotation& r) {
  return unitary_from_hamiltonian(hamiltonian_from_rotation(r));
}

// Witness that a rotation splits into two half-size blocks under an index
// regrouping, with the second block a sign-twisted copy of the first.
struct StructureWitness {
  bool ok = false;
  std::vector<int> permutation;  // concatenated index groups, 1-based
  Eigen::MatrixXd reduced;       // the half-size block when ok
};

namespace detail {

inline StructureWitness try_xy_grouping(const Eigen::MatrixXd& r,
                                        const std::vector<int>& group_a,
                                        const std::vector<int>& group_b, double tol) {
  const int n = static_cast<int>(group_a.size());
  StructureWitness w;
  w.permutation = group_a;
  w.permutation.insert(w.permutation.end(), group_b.begin(), group_b.end());
  Eigen::MatrixXd rp(2 * n, 2 * n);
  for (int a = 0; a < 2 * n; ++a) {
    for (int b = 0; b < 2 * n; ++b) {
      rp(a, b) = r(w.permutation[a] - 1, w.permutation[b] - 1);
    }
  }
  if (rp.topRightCorner(n, n).cwiseAbs().maxCoeff() > tol ||
      rp.bottomLeftCorner(n, n).cwiseAbs().maxCoeff() > tol) {
    return w;
  }
  const Eigen::MatrixXd tilde = rp.topLeftCorner(n, n);
  const Eigen::MatrixXd twin = rp.bottomRightCorner(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      if (std::abs(twin(i, j) - sign * tilde(i, j)) > tol) return w;
    }
  }
  if (!is_special_orthogonal(tilde, 1e-8)) return w;
  w.ok = true;
  w.reduced = tilde;
  return w;
}

}  // namespace detail

// Detect the block structure produced by circuits of XY gates: after
// regrouping the Majorana labels, R = Rt ⊕ Rt' with Rt'_ij = (-1)^(i+j) Rt_ij.
// Two natural regroupings occur depending on boundary conventions; both are
// tried, and the first that works is reported.
inline StructureWitness check_xy_structure(const Rotation& rot, double tol = 1e-9) {
  const int n = rot.n_qubits();
  const Eigen::MatrixXd& r = rot.matrix();
  std::vector<int> mod4_a, mod4_b, odd, even;
  for (int i = 1; i <= 2 * n; ++i) {
    ((i % 4 == 1 || i % 4 == 0) ? mod4_a : mod4_b).push_back(i);
    ((i % 2 == 1) ? odd : even).push_back(i);
  }
  if (mod4_a.size() == mod4_b.size()) {
    StructureWitness w = detail::try_xy_grouping(r, mod4_a, mod4_b, tol);
    if (w.ok) return w;
  }
  return detail::try_xy_grouping(r, odd, even, tol);
}

// Detect the block structure produced by circuits of Givens gates:
// R = Rt ⊗ I2 on interleaved odd/even labels, i.e. paired rows and columns
// carry identical entries and cross-parity entries vanish.
inline StructureWitness check_givens_structure(const Rotation& rot, double tol = 1e-9) {
  const int n = rot.n_qubits();
  const Eigen::MatrixXd& r = rot.matrix();
  StructureWitness w;
  for (int i = 1; i <= 2 * n; ++i) w.permutation.push_back(i);
  Eigen::MatrixXd tilde(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double odd_entry = r(2 * i, 2 * j);
      const double even_entry = r(2 * i + 1, 2 * j + 1);
      if (std::abs(odd_entry - even_entry) > tol) return w;
      if (std::abs(r(2 * i, 2 * j + 1)) > tol || std::abs(r(2 * i + 1, 2 * j)) > tol) return w;
      tilde(i, j) = 0.5 * (odd_entry + even_entry);
    }
  }
  if (!is_special_orthogonal(tilde, 1e-8)) return w;
  w.ok = true;
  w.reduced = tilde;
  return w;
}

// Embed a half-size rotation as the conjugation action of an XY circuit
// (inverse direction of check_xy_structure, using the mod-4 regrouping).
inline Rotation xy_rotation_from_reduced(const Eigen::MatrixXd& tilde) {
  const int n = static_cast<int>(tilde.rows());
  if (!is_special_orthogonal(tilde, 1e-10)) {
    throw std::invalid_argument("reduced block must be special orthogonal");
  }
  std::vector<int> group_a, group_b;
  for (int i = 1; i <= 2 * n; ++i) {
    ((i % 4 == 1 || i % 4 == 0) ? group_a : group_b).push_back(i);
  }
  std::vector<int> perm = group_a;
  perm.insert(perm.end(), group_b.begin(), group_b.end());
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      r(perm[i] - 1, perm[j] - 1) = tilde(i, j);
      r(perm[n + i] - 1, perm[n + j] - 1) = sign * tilde(i, j);
    }
  }
  return Rotation(r);
}

// Embed a half-size rotation as the conjugation action of a Givens circuit.
inline Rotation givens_rotation_from_reduced(const Eigen::MatrixXd& tilde) {
  const int n = static_cast<int>(tilde.rows());
  if (!is_special_orthogonal(tilde, 1e-10)) {
    throw std::invalid_argument("reduced block must be special orthogonal");
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      r(2 * i, 2 * j) = tilde(i, j);
      r(2 * i + 1, 2 * j + 1) = tilde(i, j);
    }
  }
  return Rotation(r);
}

}  // namespace mgfe
