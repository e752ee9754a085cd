#pragma once

#include <algorithm>
#include <utility>

#include <Eigen/Dense>

#include "mgfe/channels.hpp"
#include "mgfe/clifford_algebra.hpp"
#include "mgfe/pauli.hpp"
#include "mgfe/rng.hpp"

namespace mgfe {

// One experiment shot: prepare a random eigenstate of the column monomial's
// Pauli (eigenvalue lambda), push it through the channel, measure the row
// monomial's Pauli (parity A), and combine with the monomial phase product
// phi into B = A * lambda * phi.  B averages to the superoperator entry
// chi_E(I, J).  phi and B are real (+-1) whenever |I| = |J|.
struct ShotRecord {
  Subset I;
  Subset J;
  int lambda = 0;
  int A = 0;
  complexd phi = 1.0;
  complexd B = 0.0;
};

// A pure product state together with the eigenvalue of the prepared Pauli.
struct PreparedState {
  Eigen::VectorXcd state;
  int lambda = 0;
};

// Uniformly random joint eigenstate of P: each qubit gets an independently
// random +-1 eigenstate of its letter (Z basis for identity letters, which
// contribute nothing to lambda).  The reported eigenvalue is the product of
// the per-qubit signs over the support only.  P may carry a +-1 sign, which
// flips lambda; imaginary phases belong in phi, not the state, and are
// rejected.
inline PreparedState prepare_pauli_eigenstate(const PauliString& p, std::mt19937_64& rng) {
  if (p.phase_exponent() % 2 != 0) {
    throw std::invalid_argument("preparation Pauli must carry a real sign");
  }
  const int n = p.n_qubits();
  Eigen::VectorXcd state = Eigen::VectorXcd::Ones(1);
  int lambda = p.phase_exponent() == 0 ? 1 : -1;
  for (int q = 0; q < n; ++q) {
    const int sign = uniform01(rng) < 0.5 ? 1 : -1;
    Eigen::Vector2cd local;
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    switch (p.letter(q)) {
      case PauliLetter::I:
        local = sign > 0 ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0);
        break;
      case PauliLetter::X:
        local = Eigen::Vector2cd(kInvSqrt2, sign * kInvSqrt2);
        lambda *= sign;
        break;
      case PauliLetter::Y:
        local = Eigen::Vector2cd(kInvSqrt2, complexd(0.0, sign * kInvSqrt2));
        lambda *= sign;
        break;
      case PauliLetter::Z:
        local = sign > 0 ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0);
        lambda *= sign;
        break;
    }
    Eigen::VectorXcd next(state.size() * 2);
    for (Eigen::Index i = 0; i < state.size(); ++i) {
      next(2 * i) = state(i) * local(0);
      next(2 * i + 1) = state(i) * local(1);
    }
    state.swap(next);
  }
  return {std::move(state), lambda};
}

// Named step-4 operation; the channel object carries the whole map.
inline Eigen::MatrixXcd apply_channel(const Eigen::MatrixXcd& rho, const NoisyChannel& ch) {
  return ch.apply_to_state(rho);
}

// Samples the +-1 outcome of measuring P on rho using the exact eigenspace
// probabilities Pr(+1) = Tr((1 + P) rho) / 2 — statistically identical to
// measuring each supported qubit in its letter basis and taking the parity
// over the support.  A +-1 sign on P flips the outcome distribution; other
// phases are rejected.
inline int measure_pauli(const Eigen::MatrixXcd& rho, const PauliString& p,
                         std::mt19937_64& rng) {
  if (p.phase_exponent() % 2 != 0) {
    throw std::invalid_argument("measurement Pauli must carry a real sign");
  }
  const double sign = p.phase_exponent() == 0 ? 1.0 : -1.0;
  double p_plus = 0.5 * (1.0 + sign * pauli_trace_product(p.letters_only(), rho).real());
  if (p_plus < -1e-9 || p_plus > 1.0 + 1e-9) {
    throw std::runtime_error("measurement probability outside [0, 1] beyond tolerance");
  }
  p_plus = std::clamp(p_plus, 0.0, 1.0);
  return uniform01(rng) < p_plus ? 1 : -1;
}

// Generalized shot with explicit preparation and measurement Paulis and an
// externally supplied phase product (the conjugated-frame path feeds
// twirled Paulis here).  prep and meas must be letters-only; every phase is
// accounted for in phi.
inline ShotRecord shot_with_paulis(const NoisyChannel& ch, const PauliString& prep,
                                   const PauliString& meas, complexd phi, const Subset& I,
                                   const Subset& J, std::mt19937_64& rng) {
  PreparedState prepared = prepare_pauli_eigenstate(prep, rng);
  const Eigen::MatrixXcd rho_out =
      ch.apply_to_state(prepared.state * prepared.state.adjoint());
  const int a = measure_pauli(rho_out, meas, rng);
  ShotRecord rec;
  rec.I = I;
  rec.J = J;
  rec.lambda = prepared.lambda;
  rec.A = a;
  rec.phi = phi;
  rec.B = static_cast<double>(a * prepared.lambda) * phi;
  return rec;
}

// Algorithm steps 2-5 for the monomial pair (I, J): phi = conj(phi_I) *
// phi_J from the Jordan-Wigner phases, then prepare / apply / measure.
inline ShotRecord shot(const NoisyChannel& ch, const Subset& I, const Subset& J,
                       std::mt19937_64& rng) {
  const int n = ch.n_qubits();
  const PauliString pi = monomial_to_pauli({n, I});
  const PauliString pj = monomial_to_pauli({n, J});
  return shot_with_paulis(ch, pj.letters_only(), pi.letters_only(),
                          std::conj(pi.phase()) * pj.phase(), I, J, rng);
}

}  // namespace mgfe
