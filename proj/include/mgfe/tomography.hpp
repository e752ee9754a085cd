#pragma once

#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mgfe/channels.hpp"
#include "mgfe/matchgate.hpp"
#include "mgfe/rng.hpp"
#include "mgfe/rotation.hpp"
#include "mgfe/simulator.hpp"

namespace mgfe {

struct TomographyConfig {
  uint64_t shots_per_entry = 1000;
  uint64_t seed = 0;
};

// Raw rotation estimate: entry (i, j) is the shot average for the
// single-index pair ({i}, {j}), which converges to the degree-one transition
// amplitude -- the rotation matrix itself for a noiseless matchgate.  Each
// entry runs on its own seeded stream, so estimates are reproducible and
// entry-wise independent.
inline Eigen::MatrixXd estimate_rotation(const NoisyChannel& ch, const TomographyConfig& cfg) {
  if (cfg.shots_per_entry < 1) {
    throw std::invalid_argument("shots_per_entry must be positive");
  }
  const int dim = 2 * ch.n_qubits();
  Eigen::MatrixXd raw(dim, dim);
  for (int i = 1; i <= dim; ++i) {
    for (int j = 1; j <= dim; ++j) {
      auto rng = make_rng(derive_seed(cfg.seed, static_cast<uint64_t>(i),
                                      static_cast<uint64_t>(j)));
      double acc = 0.0;
      for (uint64_t s = 0; s < cfg.shots_per_entry; ++s) {
        // single-generator phases are trivial, so B is real for these pairs
        acc += shot(ch, {i}, {j}, rng).B.real();
      }
      raw(i - 1, j - 1) = acc / static_cast<double>(cfg.shots_per_entry);
    }
  }
  return raw;
}

// Nearest special orthogonal matrix in Frobenius norm: polar projection
// U V^T from the SVD, with the smallest-singular-value direction flipped
// when the determinant lands on the wrong side.
inline Rotation project_to_special_orthogonal(const Eigen::MatrixXd& raw) {
  if (raw.rows() != raw.cols() || raw.rows() == 0) {
    throw std::invalid_argument("projection requires a square matrix");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  if (sigma(sigma.size() - 1) < 1e-12) {
    throw std::invalid_argument("matrix is rank deficient; the projection is not unique");
  }
  Eigen::MatrixXd u = svd.matrixU();
  const Eigen::MatrixXd v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(u.cols() - 1) *= -1.0;  // singular values are sorted decreasing
  }
  return Rotation(u * v.transpose());
}

struct ReconstructedUnitary {
  QuadraticHamiltonian h;
  Eigen::MatrixXcd u;
};

// Invert the rotation back to generator coefficients and a dense unitary.
// The overall phase is fixed by making the largest-magnitude entry real and
// positive.
inline ReconstructedUnitary reconstruct_hamiltonian(const Rotation& r) {
  QuadraticHamiltonian h = hamiltonian_from_rotation(r);
  Eigen::MatrixXcd u = unitary_from_hamiltonian(h);
  Eigen::Index row = 0, col = 0;
  u.cwiseAbs().maxCoeff(&row, &col);
  const complexd z = u(row, col);
  u *= std::conj(z) / std::abs(z);
  return {std::move(h), std::move(u)};
}

}  // namespace mgfe
