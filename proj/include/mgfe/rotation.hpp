#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mgfe/errors.hpp"
#include "mgfe/rng.hpp"

namespace mgfe {

using complexd = std::complex<double>;

inline bool is_special_orthogonal(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols() || m.rows() < 1) return false;
  const int d = static_cast<int>(m.rows());
  const double ortho = (m.transpose() * m - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  if (ortho > tol) return false;
  return std::abs(m.determinant() - 1.0) <= tol * d;
}

// A special orthogonal matrix.  Matchgate conjugation actions live in
// SO(2n); the Euler decomposition accepts any dimension.
class Rotation {
 public:
  explicit Rotation(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (!is_special_orthogonal(m_, 1e-10)) {
      throw std::invalid_argument("matrix is not special orthogonal within 1e-10");
    }
  }

  static Rotation identity(int dim) { return Rotation(Eigen::MatrixXd::Identity(dim, dim)); }

  const Eigen::MatrixXd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  // Number of qubits when this rotation acts on Majorana labels (dim = 2n).
  int n_qubits() const {
    if (dim() % 2 != 0) throw std::invalid_argument("odd-dimensional rotation has no qubit count");
    return dim() / 2;
  }

 private:
  Eigen::MatrixXd m_;
};

// The antisymmetric coefficient matrix h of a quadratic Majorana
// Hamiltonian on n qubits (dimension 2n).
class QuadraticHamiltonian {
 public:
  explicit QuadraticHamiltonian(Eigen::MatrixXd h) : h_(std::move(h)) {
    if (h_.rows() != h_.cols() || h_.rows() < 2 || h_.rows() % 2 != 0) {
      throw std::invalid_argument("coefficient matrix must be square with even dimension >= 2");
    }
    if ((h_ + h_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument("coefficient matrix must be antisymmetric within 1e-12");
    }
  }

  const Eigen::MatrixXd& matrix() const { return h_; }
  int n_qubits() const { return static_cast<int>(h_.rows()) / 2; }

 private:
  Eigen::MatrixXd h_;
};

// exp(a) for antisymmetric a via the real Schur form: the quasi-triangular
// factor of a normal matrix is block diagonal, with 2x2 blocks [[0,b],[-b,0]]
// that exponentiate to plane rotations.
inline Eigen::MatrixXd exp_antisymmetric(const Eigen::MatrixXd& a) {
  if ((a + a.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("exp_antisymmetric requires an antisymmetric matrix");
  }
  const int d = static_cast<int>(a.rows());
  if (d == 1) return Eigen::MatrixXd::Identity(1, 1);
  Eigen::RealSchur<Eigen::MatrixXd> schur(a);
  const Eigen::MatrixXd& t = schur.matrixT();
  const Eigen::MatrixXd& q = schur.matrixU();
  Eigen::MatrixXd e = Eigen::MatrixXd::Identity(d, d);
  int p = 0;
  while (p < d) {
    if (p + 1 < d && t(p + 1, p) != 0.0) {
      const double b = 0.5 * (t(p, p + 1) - t(p + 1, p));
      const double c = std::cos(b), s = std::sin(b);
      e(p, p) = c;
      e(p, p + 1) = s;
      e(p + 1, p) = -s;
      e(p + 1, p + 1) = c;
      p += 2;
    } else {
      p += 1;  // 1x1 block of an antisymmetric matrix is 0; exp is 1
    }
  }
  return q * e * q.transpose();
}

// Principal logarithm of a special orthogonal matrix, returned as the unique
// antisymmetric generator with plane angles in (-pi, pi).  An eigenvalue at
// -1 (angle pi) has no preferred rotation plane, so it is rejected.
inline Eigen::MatrixXd log_special_orthogonal(const Eigen::MatrixXd& r,
                                              double branch_tol = 1e-8) {
  if (!is_special_orthogonal(r, 1e-8)) {
    throw std::invalid_argument("logarithm requires a special orthogonal matrix");
  }
  const int d = static_cast<int>(r.rows());
  Eigen::RealSchur<Eigen::MatrixXd> schur(r);
  const Eigen::MatrixXd& t = schur.matrixT();
  const Eigen::MatrixXd& q = schur.matrixU();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  int p = 0;
  while (p < d) {
    if (p + 1 < d && t(p + 1, p) != 0.0) {
      // orthogonal 2x2 block [[c, s], [-s, c]]; antisymmetrize to tame
      // rounding in the Schur sweep
      const double c = 0.5 * (t(p, p) + t(p + 1, p + 1));
      const double s = 0.5 * (t(p, p + 1) - t(p + 1, p));
      const double angle = std::atan2(s, c);
      if (std::abs(angle) > 3.14159265358979323846 - branch_tol) {
        throw branch_ambiguity_error(
            "rotation has an eigenvalue at -1; the principal logarithm is ambiguous");
      }
      l(p, p + 1) = angle;
      l(p + 1, p) = -angle;
      p += 2;
    } else {
      if (t(p, p) < 0.0) {
        throw branch_ambiguity_error(
            "rotation has an eigenvalue at -1; the principal logarithm is ambiguous");
      }
      p += 1;  // eigenvalue +1, log contributes 0
    }
  }
  return q * l * q.transpose();
}

// Haar-distributed SO(dim) sample: QR of a Gaussian matrix with the R-sign
// fix, then a column flip if the determinant came out -1.
inline Eigen::MatrixXd haar_special_orthogonal(int dim, uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  auto rng = make_rng(seed);
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = standard_normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::VectorXd diag = qr.matrixQR().diagonal();
  for (int j = 0; j < dim; ++j) {
    if (diag(j) < 0.0) q.col(j) = -q.col(j);
  }
  if (q.determinant() < 0.0) q.col(0) = -q.col(0);
  return q;
}

// Haar-random conjugation action of a matchgate on n qubits (dim = 2n).
inline Rotation haar_random_rotation(int n_qubits, uint64_t seed) {
  if (n_qubits < 1) throw std::invalid_argument("qubit count must be positive");
  return Rotation(haar_special_orthogonal(2 * n_qubits, seed));
}

// Build the rotation generated by a quadratic Hamiltonian: R = exp(4h).
inline Rotation rotation_from_hamiltonian(const QuadraticHamiltonian& h) {
  return Rotation(exp_antisymmetric(4.0 * h.matrix()));
}

// Invert rotation_from_hamiltonian: h = log(R) / 4.
inline QuadraticHamiltonian hamiltonian_from_rotation(const Rotation& r) {
  return QuadraticHamiltonian(0.25 * log_special_orthogonal(r.matrix()));
}

// Principal logarithm of a unitary matrix via its (diagonal) Schur form:
// log U = V diag(i * phase) V† with phases in (-pi, pi).  Eigenvalues at -1
// are rejected for the same branch reason as the orthogonal case.
inline Eigen::MatrixXcd log_unitary(const Eigen::MatrixXcd& u, double branch_tol = 1e-8) {
  const int d = static_cast<int>(u.rows());
  if (u.cols() != d || d < 1) throw std::invalid_argument("matrix must be square");
  if ((u.adjoint() * u - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-8) {
    throw std::invalid_argument("logarithm requires a unitary matrix");
  }
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(u);
  const Eigen::MatrixXcd& v = schur.matrixU();
  Eigen::VectorXcd logdiag(d);
  for (int i = 0; i < d; ++i) {
    const complexd lambda = schur.matrixT()(i, i);
    const double phase = std::arg(lambda);
    if (std::abs(phase) > 3.14159265358979323846 - branch_tol) {
      throw branch_ambiguity_error(
          "unitary has an eigenvalue at -1; the principal logarithm is ambiguous");
    }
    logdiag(i) = complexd(0.0, phase);
  }
  return v * logdiag.asDiagonal() * v.adjoint();
}

}  // namespace mgfe
