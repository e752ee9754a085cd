#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mgfe/errors.hpp"
#include "mgfe/pauli.hpp"

namespace mgfe {

// One post-unitary noise stage: either an explicit Kraus set or the global
// depolarizing rule rho -> (1-p) rho + p Tr(rho) I / 2^n, which we keep in
// closed form rather than as its 4^n-element Kraus set.
struct NoiseStage {
  bool global_depolarizing = false;
  double p = 0.0;
  std::vector<Eigen::MatrixXcd> kraus;
};

// A noisy implementation E of an ideal unitary: rho -> noise(U rho U†),
// with the noise stages applied in order after the unitary.
class NoisyChannel {
 public:
  explicit NoisyChannel(Eigen::MatrixXcd ideal_unitary)
      : u_(std::move(ideal_unitary)), n_(qubits_of(u_)) {
    if ((u_.adjoint() * u_ - Eigen::MatrixXcd::Identity(u_.rows(), u_.rows()))
            .cwiseAbs()
            .maxCoeff() > 1e-10) {
      throw std::invalid_argument("ideal unitary is not unitary within 1e-10");
    }
  }

  int n_qubits() const { return n_; }
  const Eigen::MatrixXcd& ideal_unitary() const { return u_; }
  const std::vector<NoiseStage>& noise_stages() const { return stages_; }
  bool is_noiseless() const { return stages_.empty(); }

  void add_kraus_stage(std::vector<Eigen::MatrixXcd> kraus) {
    const int64_t dim = int64_t{1} << n_;
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
    for (const Eigen::MatrixXcd& k : kraus) {
      if (k.rows() != dim || k.cols() != dim) {
        throw std::invalid_argument("Kraus operator dimension mismatch");
      }
      sum += k.adjoint() * k;
    }
    if ((sum - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-10) {
      throw std::invalid_argument("Kraus operators must satisfy sum K†K = I within 1e-10");
    }
    stages_.push_back({false, 0.0, std::move(kraus)});
  }

  void add_global_depolarizing_stage(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing strength must lie in [0, 1]");
    stages_.push_back({true, p, {}});
  }

  // Same noise, different ideal unitary.
  NoisyChannel with_unitary(const Eigen::MatrixXcd& u) const {
    NoisyChannel ch(u);
    if (ch.n_qubits() != n_) throw std::invalid_argument("unitary acts on a different qubit count");
    ch.stages_ = stages_;
    return ch;
  }

  // Full channel action; works for any square matrix argument (the
  // brute-force superoperator feeds it non-positive basis operators), but
  // density-matrix inputs are sanity checked.
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const {
    const int64_t dim = int64_t{1} << n_;
    if (rho.rows() != dim || rho.cols() != dim) {
      throw std::invalid_argument("state dimension mismatch");
    }
    Eigen::MatrixXcd out = u_ * rho * u_.adjoint();
    for (const NoiseStage& stage : stages_) {
      if (stage.global_depolarizing) {
        const complexd tr = out.trace();
        out = (1.0 - stage.p) * out;
        out += (stage.p * tr / static_cast<double>(dim)) *
               Eigen::MatrixXcd::Identity(dim, dim);
      } else {
        Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(dim, dim);
        for (const Eigen::MatrixXcd& k : stage.kraus) next += k * out * k.adjoint();
        out = next;
      }
    }
    return out;
  }

  // Channel action on a density matrix, with the physicality checks.
  Eigen::MatrixXcd apply_to_state(const Eigen::MatrixXcd& rho) const {
    if (std::abs(rho.trace() - complexd(1.0, 0.0)) > 1e-8) {
      throw std::runtime_error("density matrix trace deviates from 1 beyond tolerance");
    }
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8) {
      throw std::runtime_error("density matrix is not Hermitian within tolerance");
    }
    return apply(rho);
  }

 private:
  static int qubits_of(const Eigen::MatrixXcd& u) {
    const int64_t dim = u.rows();
    if (dim < 2 || u.cols() != dim || (dim & (dim - 1)) != 0) {
      throw std::invalid_argument("unitary dimension must be a power of two");
    }
    int n = 0;
    while ((int64_t{1} << n) < dim) ++n;
    if (n > 6) throw capacity_error("dense channel simulation limited to 6 qubits");
    return n;
  }

  Eigen::MatrixXcd u_;
  int n_;
  std::vector<NoiseStage> stages_;
};

namespace detail {

inline std::vector<Eigen::MatrixXcd> tensor_per_qubit_kraus(
    const std::vector<Eigen::Matrix2cd>& single, int n_qubits) {
  std::vector<Eigen::MatrixXcd> ops;
  ops.emplace_back(Eigen::MatrixXcd::Identity(1, 1));
  for (int q = 0; q < n_qubits; ++q) {
    std::vector<Eigen::MatrixXcd> next;
    next.reserve(ops.size() * single.size());
    for (const Eigen::MatrixXcd& left : ops) {
      for (const Eigen::Matrix2cd& k : single) next.push_back(kron(left, k));
    }
    ops = std::move(next);
  }
  return ops;
}

}  // namespace detail

// Noise-only channels (identity ideal unitary); attach a circuit with
// with_unitary().  Per-qubit noise acts independently on every qubit.

inline NoisyChannel depolarizing(int n_qubits, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing strength must lie in [0, 1]");
  const int64_t dim = int64_t{1} << n_qubits;
  NoisyChannel ch{Eigen::MatrixXcd::Identity(dim, dim)};
  if (p > 0.0) ch.add_global_depolarizing_stage(p);
  return ch;
}

inline NoisyChannel amplitude_damping(int n_qubits, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("damping rate must lie in [0, 1]");
  Eigen::Matrix2cd k0 = Eigen::Matrix2cd::Identity(), k1 = Eigen::Matrix2cd::Zero();
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);
  const int64_t dim = int64_t{1} << n_qubits;
  NoisyChannel ch{Eigen::MatrixXcd::Identity(dim, dim)};
  ch.add_kraus_stage(detail::tensor_per_qubit_kraus({k0, k1}, n_qubits));
  return ch;
}

inline NoisyChannel phase_damping(int n_qubits, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("damping rate must lie in [0, 1]");
  Eigen::Matrix2cd k0 = Eigen::Matrix2cd::Identity(), k1 = Eigen::Matrix2cd::Zero();
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(1, 1) = std::sqrt(gamma);
  const int64_t dim = int64_t{1} << n_qubits;
  NoisyChannel ch{Eigen::MatrixXcd::Identity(dim, dim)};
  ch.add_kraus_stage(detail::tensor_per_qubit_kraus({k0, k1}, n_qubits));
  return ch;
}

// Stack noise models: the result applies each part's noise stages in list
// order.  Parts after the first must carry the identity unitary (noise-only);
// the first part's unitary is kept as the ideal unitary.
inline NoisyChannel composed(const std::vector<NoisyChannel>& parts) {
  if (parts.empty()) throw std::invalid_argument("composed() needs at least one channel");
  NoisyChannel out = parts.front();
  const int64_t dim = int64_t{1} << out.n_qubits();
  for (size_t i = 1; i < parts.size(); ++i) {
    const NoisyChannel& part = parts[i];
    if (part.n_qubits() != out.n_qubits()) {
      throw std::invalid_argument("composed channels must share the qubit count");
    }
    if ((part.ideal_unitary() - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() >
        1e-12) {
      throw std::invalid_argument("only the first composed channel may carry a unitary");
    }
    for (const NoiseStage& stage : part.noise_stages()) {
      if (stage.global_depolarizing) {
        out.add_global_depolarizing_stage(stage.p);
      } else {
        out.add_kraus_stage(stage.kraus);
      }
    }
  }
  return out;
}

}  // namespace mgfe
