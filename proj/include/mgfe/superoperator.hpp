#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "mgfe/channels.hpp"
#include "mgfe/clifford_algebra.hpp"
#include "mgfe/rotation.hpp"

namespace mgfe {

// Default magnitude thresholds: entries below kStorageThreshold are not
// stored at all; entries below kCountingThreshold are ignored by the
// sparsity count and the well-conditioning scan.
inline constexpr double kStorageThreshold = 1e-12;
inline constexpr double kCountingThreshold = 1e-10;

// Superoperator in the Majorana-monomial basis, stored sparsely as
// (I, J) -> chi(I, J) keyed by global subset indices.  Iteration over
// entries() is deterministic: by degree, then lexicographic I, then J.
class SparseSuperOp {
 public:
  using Key = std::pair<uint32_t, uint32_t>;

  SparseSuperOp(int n_qubits, bool block_structure)
      : n_(n_qubits), block_structure_(block_structure) {
    if (n_qubits < 1 || n_qubits > 8) {
      throw capacity_error("sparse superoperator enumeration limited to 8 qubits");
    }
  }

  static SparseSuperOp identity(int n_qubits) {
    SparseSuperOp sup(n_qubits, true);
    const uint64_t dim = uint64_t{1} << (2 * n_qubits);
    for (uint64_t idx = 0; idx < dim; ++idx) {
      sup.entries_[{static_cast<uint32_t>(idx), static_cast<uint32_t>(idx)}] = 1.0;
    }
    return sup;
  }

  int n_qubits() const { return n_; }
  bool block_structure() const { return block_structure_; }
  uint64_t side() const { return uint64_t{1} << (2 * n_); }
  const std::map<Key, complexd>& entries() const { return entries_; }

  void set(const Subset& row, const Subset& col, complexd value) {
    if (std::abs(value) > 1.0 + 1e-10) {
      throw std::invalid_argument("superoperator entries must have magnitude <= 1 + 1e-10");
    }
    if (block_structure_ && row.size() != col.size()) {
      throw std::invalid_argument("block-structured superoperator requires |I| = |J|");
    }
    if (std::abs(value) < kStorageThreshold) return;
    entries_[{index_of(row), index_of(col)}] = value;
  }

  complexd at(const Subset& row, const Subset& col) const {
    const auto it = entries_.find({index_of(row), index_of(col)});
    return it == entries_.end() ? complexd(0.0, 0.0) : it->second;
  }

  complexd at_index(uint32_t row, uint32_t col) const {
    const auto it = entries_.find({row, col});
    return it == entries_.end() ? complexd(0.0, 0.0) : it->second;
  }

  Subset subset_of_index(uint32_t idx) const { return global_index_to_subset(idx, 2 * n_); }

 private:
  uint32_t index_of(const Subset& s) const {
    return static_cast<uint32_t>(subset_global_index(s, 2 * n_));
  }

  int n_;
  bool block_structure_;
  std::map<Key, complexd> entries_;
};

// Dense superoperator over the same global subset indexing (the brute-force
// oracle's output form).
struct DenseSuperOp {
  int n_qubits;
  Eigen::MatrixXcd mat;

  complexd at(const Subset& row, const Subset& col) const {
    return mat(static_cast<Eigen::Index>(subset_global_index(row, 2 * n_qubits)),
               static_cast<Eigen::Index>(subset_global_index(col, 2 * n_qubits)));
  }
};

namespace detail {

inline double cofactor_det(const Eigen::MatrixXd& m) {
  const int k = static_cast<int>(m.rows());
  switch (k) {
    case 0: return 1.0;
    case 1: return m(0, 0);
    case 2: return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default: {
      // one Laplace step down to 3x3
      double acc = 0.0;
      double sign = 1.0;
      Eigen::MatrixXd minor(k - 1, k - 1);
      for (int c = 0; c < k; ++c) {
        for (int r = 1; r < k; ++r) {
          int cc = 0;
          for (int c2 = 0; c2 < k; ++c2) {
            if (c2 == c) continue;
            minor(r - 1, cc++) = m(r, c2);
          }
        }
        acc += sign * m(0, c) * cofactor_det(minor);
        sign = -sign;
      }
      return acc;
    }
  }
}

}  // namespace detail

// Signed determinant of the submatrix of R keeping rows I and columns J;
// zero when the sizes differ.  This is the on-demand entry chi_U(I, J) and
// works at any dimension.
inline double minor_det(const Rotation& r, const Subset& row, const Subset& col) {
  const int m = r.dim();
  validate_subset(row, m);
  validate_subset(col, m);
  if (row.size() != col.size()) return 0.0;
  const int k = static_cast<int>(row.size());
  if (k == 0) return 1.0;
  Eigen::MatrixXd sub(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) sub(a, b) = r.matrix()(row[a] - 1, col[b] - 1);
  }
  // cofactor expansion for small minors, pivoted LU beyond
  if (k <= 4) return detail::cofactor_det(sub);
  return Eigen::PartialPivLU<Eigen::MatrixXd>(sub).determinant();
}

// Theorem-1 superoperator of a matchgate: block diagonal with the degree-k
// block equal to the k-th compound matrix of R.  Full enumeration; use
// minor_det directly for single entries at larger n.
inline SparseSuperOp matchgate_superop(const Rotation& r) {
  const int n = r.n_qubits();
  if (n > 8) throw capacity_error("sparse superoperator enumeration limited to 8 qubits");
  SparseSuperOp sup(n, true);
  const int m = 2 * n;
  for (int k = 0; k <= m; ++k) {
    const uint64_t count = binomial(m, k);
    std::vector<Subset> subsets;
    subsets.reserve(count);
    for (uint64_t rank = 0; rank < count; ++rank) subsets.push_back(rank_to_subset(rank, k, m));
    for (const Subset& row : subsets) {
      for (const Subset& col : subsets) {
        sup.set(row, col, minor_det(r, row, col));
      }
    }
  }
  return sup;
}

// Superoperator of an arbitrary channel straight from the definition
// chi(I, J) = Tr(c_I† E(c_J)) / 2^n.  The oracle everything else is tested
// against; dense output, so capped at n <= 6.
inline DenseSuperOp brute_force_superop(const NoisyChannel& ch) {
  const int n = ch.n_qubits();
  if (n > 6) throw capacity_error("brute-force superoperator limited to 6 qubits");
  const uint64_t side = uint64_t{1} << (2 * n);
  const int64_t dim = int64_t{1} << n;
  DenseSuperOp out{n, Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(side),
                                             static_cast<Eigen::Index>(side))};
  std::vector<PauliString> monomials;
  monomials.reserve(side);
  for (uint64_t idx = 0; idx < side; ++idx) {
    monomials.push_back(monomial_to_pauli({n, global_index_to_subset(idx, 2 * n)}));
  }
  const double norm = static_cast<double>(dim);
  for (uint64_t col = 0; col < side; ++col) {
    // dense c_J, then one channel application
    Eigen::MatrixXcd cj = Eigen::MatrixXcd::Zero(dim, dim);
    const PauliString& pj = monomials[col];
    const uint64_t xb = pj.x_index_bits();
    for (int64_t b = 0; b < dim; ++b) {
      cj(static_cast<int64_t>(static_cast<uint64_t>(b) ^ xb), b) =
          pj.column_amplitude(static_cast<uint64_t>(b));
    }
    const Eigen::MatrixXcd image = ch.apply(cj);
    for (uint64_t row = 0; row < side; ++row) {
      const PauliString& pi = monomials[row];
      const complexd chi =
          std::conj(pi.phase()) * pauli_hs_inner(pi.letters_only(), image) / norm;
      out.mat(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = chi;
    }
  }
  return out;
}

inline DenseSuperOp brute_force_superop(const Eigen::MatrixXcd& unitary) {
  return brute_force_superop(NoisyChannel(unitary));
}

// Entanglement fidelity F_e = 2^{-2n} sum conj(chi_U) chi_E.  The imaginary
// residue must vanish for physical inputs and is checked before discarding.
inline double entanglement_fidelity(const SparseSuperOp& sup_u, const DenseSuperOp& sup_e) {
  if (sup_u.n_qubits() != sup_e.n_qubits) {
    throw std::invalid_argument("superoperator dimension mismatch");
  }
  complexd acc = 0.0;
  for (const auto& [key, value] : sup_u.entries()) {
    acc += std::conj(value) * sup_e.mat(key.first, key.second);
  }
  acc /= static_cast<double>(sup_u.side());
  if (std::abs(acc.imag()) > 1e-10) {
    throw std::runtime_error("entanglement fidelity has a non-real residue beyond 1e-10");
  }
  return acc.real();
}

inline double entanglement_fidelity(const SparseSuperOp& sup_u, const SparseSuperOp& sup_e) {
  if (sup_u.n_qubits() != sup_e.n_qubits()) {
    throw std::invalid_argument("superoperator dimension mismatch");
  }
  complexd acc = 0.0;
  for (const auto& [key, value] : sup_u.entries()) {
    acc += std::conj(value) * sup_e.at_index(key.first, key.second);
  }
  acc /= static_cast<double>(sup_u.side());
  if (std::abs(acc.imag()) > 1e-10) {
    throw std::runtime_error("entanglement fidelity has a non-real residue beyond 1e-10");
  }
  return acc.real();
}

// Average channel fidelity from the entanglement fidelity, d = 2^n.
inline double channel_fidelity(double f_e, int n_qubits) {
  const double d = static_cast<double>(int64_t{1} << n_qubits);
  return (d * f_e + 1.0) / (d + 1.0);
}

// Per-degree decay parameters lambda'_k; they recombine to F_e as
// 2^{-2n} sum_k C(2n, k) lambda'_k.
struct BlockDecays {
  std::vector<double> lambda_prime;  // k = 0 .. 2n
};

inline BlockDecays block_decays(const SparseSuperOp& sup_u, const DenseSuperOp& sup_e) {
  if (sup_u.n_qubits() != sup_e.n_qubits) {
    throw std::invalid_argument("superoperator dimension mismatch");
  }
  if (!sup_u.block_structure()) {
    throw std::invalid_argument("block decays need a block-structured reference superoperator");
  }
  const int m = 2 * sup_u.n_qubits();
  std::vector<complexd> acc(m + 1, complexd(0.0, 0.0));
  for (const auto& [key, value] : sup_u.entries()) {
    const int k = static_cast<int>(sup_u.subset_of_index(key.first).size());
    acc[k] += std::conj(value) * sup_e.mat(key.first, key.second);
  }
  BlockDecays out;
  out.lambda_prime.resize(m + 1);
  for (int k = 0; k <= m; ++k) {
    out.lambda_prime[k] = acc[k].real() / static_cast<double>(binomial(m, k));
  }
  return out;
}

inline int64_t sparsity_count(const SparseSuperOp& sup, double tol = kCountingThreshold) {
  if (sup.entries().empty()) throw std::invalid_argument("empty superoperator");
  int64_t count = 0;
  for (const auto& [key, value] : sup.entries()) {
    if (std::abs(value) > tol) ++count;
  }
  return count;
}

inline int64_t sparsity_count(const DenseSuperOp& sup, double tol = kCountingThreshold) {
  if (sup.mat.size() == 0) throw std::invalid_argument("empty superoperator");
  int64_t count = 0;
  for (Eigen::Index c = 0; c < sup.mat.cols(); ++c) {
    for (Eigen::Index r = 0; r < sup.mat.rows(); ++r) {
      if (std::abs(sup.mat(r, c)) > tol) ++count;
    }
  }
  return count;
}

inline double well_conditioning_alpha(const SparseSuperOp& sup, double tol = kCountingThreshold) {
  if (sup.entries().empty()) throw std::invalid_argument("empty superoperator");
  double alpha = 2.0;
  for (const auto& [key, value] : sup.entries()) {
    const double mag = std::abs(value);
    if (mag > tol && mag < alpha) alpha = mag;
  }
  if (alpha > 1.5) {
    throw std::invalid_argument("superoperator has no entries above the counting threshold");
  }
  return alpha;
}

inline double well_conditioning_alpha(const DenseSuperOp& sup, double tol = kCountingThreshold) {
  if (sup.mat.size() == 0) throw std::invalid_argument("empty superoperator");
  double alpha = 2.0;
  for (Eigen::Index c = 0; c < sup.mat.cols(); ++c) {
    for (Eigen::Index r = 0; r < sup.mat.rows(); ++r) {
      const double mag = std::abs(sup.mat(r, c));
      if (mag > tol && mag < alpha) alpha = mag;
    }
  }
  if (alpha > 1.5) {
    throw std::invalid_argument("superoperator has no entries above the counting threshold");
  }
  return alpha;
}

// Block-wise product of two block-structured superoperators on the same
// register (composition of the underlying maps, left acting after right).
inline SparseSuperOp multiply(const SparseSuperOp& left, const SparseSuperOp& right) {
  if (left.n_qubits() != right.n_qubits()) {
    throw std::invalid_argument("superoperator dimension mismatch");
  }
  if (!left.block_structure() || !right.block_structure()) {
    throw std::invalid_argument("sparse product requires block structure on both factors");
  }
  const int n = left.n_qubits();
  // index right's entries by row for the accumulation
  std::map<uint32_t, std::vector<std::pair<uint32_t, complexd>>> right_rows;
  for (const auto& [key, value] : right.entries()) {
    right_rows[key.first].push_back({key.second, value});
  }
  std::map<SparseSuperOp::Key, complexd> acc;
  for (const auto& [lkey, lval] : left.entries()) {
    const auto it = right_rows.find(lkey.second);
    if (it == right_rows.end()) continue;
    for (const auto& [col, rval] : it->second) {
      acc[{lkey.first, col}] += lval * rval;
    }
  }
  SparseSuperOp out(n, true);
  for (const auto& [key, value] : acc) {
    if (std::abs(value) < kStorageThreshold) continue;
    out.set(global_index_to_subset(key.first, 2 * n), global_index_to_subset(key.second, 2 * n),
            value);
  }
  return out;
}

// Sparse view of a dense superoperator (entries above the storage threshold).
inline SparseSuperOp sparse_from_dense(const DenseSuperOp& dense, bool block_structure,
                                       double tol = kStorageThreshold) {
  SparseSuperOp out(dense.n_qubits, block_structure);
  const int m = 2 * dense.n_qubits;
  for (Eigen::Index r = 0; r < dense.mat.rows(); ++r) {
    const Subset row = global_index_to_subset(static_cast<uint64_t>(r), m);
    for (Eigen::Index c = 0; c < dense.mat.cols(); ++c) {
      const complexd v = dense.mat(r, c);
      if (std::abs(v) < tol) continue;
      out.set(row, global_index_to_subset(static_cast<uint64_t>(c), m), v);
    }
  }
  return out;
}

}  // namespace mgfe
