#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "mgfe/rotation.hpp"
#include "mgfe/superoperator.hpp"

namespace mgfe {

// Triangular family of angles factoring R in SO(dim) into planar rotations:
// R = R^{(dim-1)} ... R^{(1)} with R^{(k)} = R_1(theta^k_1) ... R_k(theta^k_k).
// theta[k-1][j-1] holds theta^k_j; theta^k_1 lives in [0, 2pi), the others in
// [0, pi].
struct EulerAngles {
  int dim = 0;
  std::vector<std::vector<double>> theta;
};

// Planar rotation R_k(theta) in coordinates (k, k+1), 1-based: the embedded
// 2x2 block is [[cos, sin], [-sin, cos]].
inline Eigen::MatrixXd planar_rotation(int k, double theta, int dim) {
  if (k < 1 || k + 1 > dim) throw std::invalid_argument("plane index out of range");
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  m(k - 1, k - 1) = c;
  m(k - 1, k) = s;
  m(k, k - 1) = -s;
  m(k, k) = c;
  return m;
}

// Peel-off extraction: the last column of the leading (k+1)x(k+1) block is a
// point on the k-sphere whose spherical coordinates are theta^k_1..theta^k_k;
// recover them, strip R^{(k)} off on the left, recurse on the smaller block.
// Degenerate prefixes (vanishing cumulative norm) make trailing angles
// unidentifiable; those are set to 0, which still reconstructs R.
inline EulerAngles euler_angles(const Rotation& rot) {
  const int d = rot.dim();
  EulerAngles out;
  out.dim = d;
  out.theta.resize(d >= 1 ? d - 1 : 0);
  Eigen::MatrixXd work = rot.matrix();
  for (int k = d - 1; k >= 1; --k) {
    const Eigen::VectorXd v = work.col(k).head(k + 1);
    std::vector<double> r(k + 1);  // r[i] = norm of v(0..i)
    double acc = 0.0;
    for (int i = 0; i <= k; ++i) {
      acc += v(i) * v(i);
      r[i] = std::sqrt(acc);
    }
    std::vector<double> th(k + 1, 0.0);  // th[j] = theta^k_j
    for (int j = k; j >= 2; --j) {
      th[j] = r[j] < 1e-15 ? 0.0 : std::atan2(r[j - 1], v(j));
    }
    if (r[1] >= 1e-15) {
      th[1] = std::atan2(v(0), v(1));
      if (th[1] < 0.0) th[1] += 2.0 * std::numbers::pi;
    }
    Eigen::MatrixXd rk = Eigen::MatrixXd::Identity(d, d);
    for (int j = 1; j <= k; ++j) rk = rk * planar_rotation(j, th[j], d);
    work = rk.transpose() * work;
    out.theta[k - 1].assign(th.begin() + 1, th.end());
  }
  return out;
}

// Exact product of at most dim(dim-1)/2 planar rotations in the factor order
// above.
inline Rotation rotation_from_angles(const EulerAngles& a) {
  const int d = a.dim;
  if (d < 1 || static_cast<int>(a.theta.size()) != d - 1) {
    throw std::invalid_argument("euler angle table has the wrong shape");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(d, d);
  for (int k = 1; k <= d - 1; ++k) {
    if (static_cast<int>(a.theta[k - 1].size()) != k) {
      throw std::invalid_argument("euler angle table has the wrong shape");
    }
    Eigen::MatrixXd rk = Eigen::MatrixXd::Identity(d, d);
    for (int j = 1; j <= k; ++j) rk = rk * planar_rotation(j, a.theta[k - 1][j - 1], d);
    out = rk * out;
  }
  return Rotation(out);
}

// Superoperator of the single planar rotation R_k(theta), generated from the
// closed-form rules instead of determinants.  With both or neither of
// {k, k+1} in I the diagonal entry is 1; with exactly one it is cos(theta),
// and swapping k for k+1 between row and column gives +sin / -sin.  Every
// other entry vanishes, for at most (3/2) 2^{2n} nonzeros.
inline SparseSuperOp sparse_elementary_superop(int k, double theta, int n_qubits) {
  const int m = 2 * n_qubits;
  if (k < 1 || k >= m) throw std::invalid_argument("plane index out of range");
  SparseSuperOp sup(n_qubits, true);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const uint32_t side = uint32_t{1} << m;
  const uint32_t bit_k = uint32_t{1} << (k - 1);
  const uint32_t bit_k1 = uint32_t{1} << k;
  for (uint32_t mask = 0; mask < side; ++mask) {
    const Subset row = mask_to_subset(mask, m);
    const bool has_k = (mask & bit_k) != 0;
    const bool has_k1 = (mask & bit_k1) != 0;
    if (has_k == has_k1) {
      sup.set(row, row, 1.0);
    } else {
      sup.set(row, row, c);
      sup.set(row, mask_to_subset(mask ^ (bit_k | bit_k1), m), has_k ? s : -s);
    }
  }
  return sup;
}

// Superoperator of R assembled as the sparse product of elementary blocks in
// the Euler factor order (rightmost factor applied first).  Zero angles are
// skipped outright; factor_count reports how many nontrivial factors the
// product used.
inline SparseSuperOp assemble_superop_via_euler(const Rotation& rot, int* factor_count = nullptr) {
  const int n = rot.n_qubits();
  const EulerAngles a = euler_angles(rot);
  SparseSuperOp acc = SparseSuperOp::identity(n);
  int used = 0;
  for (int k = 1; k <= rot.dim() - 1; ++k) {
    for (int j = k; j >= 1; --j) {
      const double theta = a.theta[k - 1][j - 1];
      if (theta == 0.0) continue;
      acc = multiply(sparse_elementary_superop(j, theta, n), acc);
      ++used;
    }
  }
  if (factor_count != nullptr) *factor_count = used;
  return acc;
}

// Well-conditioning constant found by assembling sparsely and scanning for
// the smallest magnitude above the counting threshold.
inline double alpha_via_euler(const Rotation& rot) {
  return well_conditioning_alpha(assemble_superop_via_euler(rot));
}

}  // namespace mgfe
