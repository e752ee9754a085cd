#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mgfe/channels.hpp"
#include "mgfe/clifford_algebra.hpp"
#include "mgfe/rng.hpp"
#include "mgfe/simulator.hpp"
#include "mgfe/stabilizer.hpp"
#include "mgfe/subsets.hpp"
#include "mgfe/superoperator.hpp"

namespace mgfe {

// general: index pairs drawn from the transition distribution with no lower
// bound on the weights; sample count l = ceil(1 / (eps^2 delta)).
// well_conditioned: every nonzero transition amplitude is promised to be at
// least alpha in magnitude, which sharpens l to ceil(2 ln(2/delta) /
// (alpha^2 eps^2)) and caps the per-pair shot counts.
enum class PlanMode { general, well_conditioned };

// Per-pair shot count rule: box uses 2 ln(2/delta), appendix uses the more
// conservative 4 ln(4/delta) numerator.
enum class MmuBound { box, appendix };

struct EstimationPlan {
  double epsilon = 0.0;
  double delta = 0.0;
  PlanMode mode = PlanMode::general;
  double alpha = 0.0;  // only meaningful in well_conditioned mode
  MmuBound bound = MmuBound::box;
  uint64_t l = 0;               // number of sampled index pairs
  uint64_t m_cap = 1000000;     // abort threshold for a single pair
  double expected_shot_bound = 0.0;  // a-priori bound on E[total shots]

  // Shots for one sampled pair with transition amplitude magnitude chi:
  // ceil(numerator / (chi^2 l eps^2)).
  uint64_t m_mu(double chi_magnitude) const {
    const double numerator = bound == MmuBound::box ? 2.0 * std::log(2.0 / delta)
                                                    : 4.0 * std::log(4.0 / delta);
    const double raw = numerator / (chi_magnitude * chi_magnitude *
                                    static_cast<double>(l) * epsilon * epsilon);
    if (!(raw < 9.0e18)) return std::numeric_limits<uint64_t>::max();
    return std::max<uint64_t>(1, static_cast<uint64_t>(std::ceil(raw)));
  }
};

// Derive sample and shot counts for a target additive error eps on the
// entanglement fidelity, failure probability at most 2*delta.  Supplying
// alpha switches to the well-conditioned rule; the claim is checked against
// the superoperator's smallest stored amplitude.
inline EstimationPlan plan_runtime(double epsilon, double delta, const SparseSuperOp& sup,
                                   std::optional<double> alpha = std::nullopt,
                                   MmuBound bound = MmuBound::box,
                                   uint64_t m_cap = 1000000) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  EstimationPlan plan;
  plan.epsilon = epsilon;
  plan.delta = delta;
  plan.bound = bound;
  plan.m_cap = m_cap;
  double l_raw = 0.0;
  if (alpha.has_value()) {
    if (!(*alpha > 0.0) || !(*alpha <= 1.0 + 1e-9)) {
      throw std::invalid_argument("alpha must lie in (0, 1]");
    }
    const double observed = well_conditioning_alpha(sup);
    if (observed < *alpha - 1e-9) {
      throw std::invalid_argument(
          "claimed alpha exceeds the smallest nonzero transition amplitude");
    }
    plan.mode = PlanMode::well_conditioned;
    plan.alpha = *alpha;
    l_raw = std::ceil(2.0 * std::log(2.0 / delta) / (*alpha * *alpha * epsilon * epsilon));
    plan.expected_shot_bound =
        4.0 * std::log(2.0 / delta) / (*alpha * *alpha * epsilon * epsilon);
  } else {
    plan.mode = PlanMode::general;
    l_raw = std::ceil(1.0 / (epsilon * epsilon * delta));
    const double density = static_cast<double>(sparsity_count(sup)) /
                           static_cast<double>(sup.side());
    plan.expected_shot_bound = 1.0 + 1.0 / (epsilon * epsilon * delta) +
                               density * 4.0 * std::log(4.0 / delta) / (epsilon * epsilon);
  }
  if (!(l_raw < 9.0e18)) throw std::invalid_argument("sample count overflows");
  plan.l = static_cast<uint64_t>(l_raw);
  return plan;
}

// Draws index pairs (I, J) with probability |chi(I, J)|^2 / 2^(2n) using an
// alias table over the stored entries.  Construction is deterministic given
// the superoperator, so seeded runs reproduce exactly.
class IndexSampler {
 public:
  struct Cell {
    Subset row, col;
    complexd chi;
    double probability;
  };

  explicit IndexSampler(const SparseSuperOp& sup) {
    const double side = static_cast<double>(sup.side());
    double mass = 0.0;
    for (const auto& [key, value] : sup.entries()) {
      const double pr = std::norm(value) / side;
      cells_.push_back({sup.subset_of_index(key.first), sup.subset_of_index(key.second),
                        value, pr});
      mass += pr;
    }
    if (cells_.empty()) throw std::invalid_argument("empty superoperator");
    if (std::abs(mass - 1.0) > 1e-8) {
      throw std::invalid_argument(
          "transition probabilities do not sum to one; the superoperator does not "
          "describe a unitary");
    }
    const size_t count = cells_.size();
    prob_.assign(count, 1.0);
    alias_.resize(count);
    for (size_t i = 0; i < count; ++i) alias_[i] = i;
    std::vector<double> scaled(count);
    for (size_t i = 0; i < count; ++i) {
      scaled[i] = cells_[i].probability * static_cast<double>(count) / mass;
    }
    std::vector<size_t> small, large;
    for (size_t i = 0; i < count; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
    while (!small.empty() && !large.empty()) {
      const size_t s = small.back();
      const size_t g = large.back();
      small.pop_back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = g;
      scaled[g] -= 1.0 - scaled[s];
      (scaled[g] < 1.0 ? small : large).push_back(g);
    }
    // leftovers are within rounding of probability one
  }

  const Cell& sample(std::mt19937_64& rng) const {
    const size_t count = cells_.size();
    const size_t bucket = std::min(
        static_cast<size_t>(uniform01(rng) * static_cast<double>(count)), count - 1);
    return uniform01(rng) < prob_[bucket] ? cells_[bucket] : cells_[alias_[bucket]];
  }

  const std::vector<Cell>& cells() const { return cells_; }

 private:
  std::vector<Cell> cells_;
  std::vector<double> prob_;
  std::vector<size_t> alias_;
};

// One sampled index pair with its averaged shot outcome
// x_tilde = sum_nu B_nu / (chi m).
struct SampleRecord {
  Subset row, col;      // measured (I) and prepared (J) index subsets
  uint64_t shots = 0;   // m_mu
  complexd chi = 0.0;   // reference transition amplitude chi_U(I, J)
  complexd x_tilde = 0.0;
};

struct EstimationResult {
  double y_tilde = 0.0;          // estimate of the entanglement fidelity
  double f_e_low = 0.0;          // y_tilde - 2 eps
  double f_e_high = 0.0;         // y_tilde + 2 eps
  double f = 0.0;                // state-fidelity conversion of y_tilde
  uint64_t total_shots = 0;
  std::vector<double> lambda_prime;  // per-degree decay estimates, size 2n+1
  std::vector<SampleRecord> per_sample;
};

// Optional per-shot callback (shot logging); mu and nu are 1-based.
using ShotObserver = std::function<void(uint64_t mu, uint64_t nu, const ShotRecord&)>;

namespace detail {

// Preparation/measurement recipe for one sampled pair.  rec_row / rec_col
// are the index subsets recorded for the sample (they differ from the drawn
// pair in the conjugated-frame path).
struct ShotSpec {
  PauliString prep;
  PauliString meas;
  complexd phi = 1.0;
  Subset rec_row, rec_col;
};

using PairTransform = std::function<ShotSpec(const Subset&, const Subset&)>;

inline EstimationResult run_estimation(const SparseSuperOp& sup, const NoisyChannel& ch,
                                       const EstimationPlan& plan, uint64_t seed,
                                       const PairTransform& transform,
                                       const ShotObserver& observer) {
  if (ch.n_qubits() != sup.n_qubits()) {
    throw std::invalid_argument("channel and superoperator qubit counts differ");
  }
  if (plan.l == 0) throw std::invalid_argument("plan has no samples");
  const int n = sup.n_qubits();
  const IndexSampler sampler(sup);

  EstimationResult result;
  result.per_sample.reserve(plan.l);
  for (uint64_t mu = 1; mu <= plan.l; ++mu) {
    auto pair_rng = make_rng(derive_seed(seed, mu, 0));
    const IndexSampler::Cell& cell = sampler.sample(pair_rng);
    const uint64_t m = plan.m_mu(std::abs(cell.chi));
    if (m > plan.m_cap) {
      std::ostringstream msg;
      msg << "sampled transition amplitude " << std::abs(cell.chi) << " requires " << m
          << " shots, above the cap of " << plan.m_cap
          << "; supply a well-conditioning bound or raise the cap";
      throw std::runtime_error(msg.str());
    }
    const ShotSpec spec = transform(cell.row, cell.col);
    complexd acc = 0.0;
    for (uint64_t nu = 1; nu <= m; ++nu) {
      auto shot_rng = make_rng(derive_seed(seed, mu, nu));
      const ShotRecord rec = shot_with_paulis(ch, spec.prep, spec.meas, spec.phi,
                                              spec.rec_row, spec.rec_col, shot_rng);
      acc += rec.B;
      if (observer) observer(mu, nu, rec);
    }
    result.total_shots += m;
    result.per_sample.push_back(
        {spec.rec_row, spec.rec_col, m, cell.chi, acc / (cell.chi * static_cast<double>(m))});
  }

  // the reported estimate is exactly the mean of the stored records
  complexd y_acc = 0.0;
  for (const SampleRecord& rec : result.per_sample) y_acc += rec.x_tilde;
  y_acc /= static_cast<double>(plan.l);
  if (std::abs(y_acc.imag()) > 2.0 * plan.epsilon) {
    throw std::runtime_error(
        "imaginary part of the fidelity estimate exceeds the error budget");
  }
  result.y_tilde = y_acc.real();
  result.f_e_low = result.y_tilde - 2.0 * plan.epsilon;
  result.f_e_high = result.y_tilde + 2.0 * plan.epsilon;
  result.f = channel_fidelity(result.y_tilde, n);

  result.lambda_prime.assign(static_cast<size_t>(2 * n + 1), 0.0);
  std::vector<complexd> degree_sums(static_cast<size_t>(2 * n + 1), 0.0);
  for (const SampleRecord& rec : result.per_sample) {
    degree_sums[rec.row.size()] += rec.x_tilde;
  }
  const double side = static_cast<double>(sup.side());
  for (int k = 0; k <= 2 * n; ++k) {
    const double scale = side / (static_cast<double>(binomial(2 * n, k)) *
                                 static_cast<double>(plan.l));
    result.lambda_prime[static_cast<size_t>(k)] = scale * degree_sums[static_cast<size_t>(k)].real();
  }
  return result;
}

}  // namespace detail

// Direct-access estimator: sample index pairs from the reference
// superoperator, run seeded shots against the channel, and average.  The
// interval [f_e_low, f_e_high] contains the true entanglement fidelity with
// probability at least 1 - 2*delta.
inline EstimationResult estimate_fidelity(const SparseSuperOp& sup, const NoisyChannel& ch,
                                          const EstimationPlan& plan, uint64_t seed,
                                          const ShotObserver& observer = {}) {
  const int n = sup.n_qubits();
  return detail::run_estimation(
      sup, ch, plan, seed,
      [n](const Subset& row, const Subset& col) {
        const PauliString pi = monomial_to_pauli({n, row});
        const PauliString pj = monomial_to_pauli({n, col});
        return detail::ShotSpec{pj.letters_only(), pi.letters_only(),
                                std::conj(pi.phase()) * pj.phase(), row, col};
      },
      observer);
}

// Conjugated-frame estimator for W = V2 U V1 with Clifford V1, V2.  Index
// pairs are drawn from the reference superoperator of the inner unitary U;
// preparation and measurement Paulis are pushed through the Clifford layers,
// so the routine never needs the transition amplitudes of W itself.
// ch_w must implement the noisy version of W.
inline EstimationResult clifford_sandwich_estimate(const SparseSuperOp& sup_u,
                                                   const CliffordCircuit& v1,
                                                   const CliffordCircuit& v2,
                                                   const NoisyChannel& ch_w,
                                                   const EstimationPlan& plan, uint64_t seed,
                                                   const ShotObserver& observer = {}) {
  const int n = sup_u.n_qubits();
  const CliffordCircuit v1_inverse = inverse_circuit(v1);
  return detail::run_estimation(
      sup_u, ch_w, plan, seed,
      [n, &v2, &v1_inverse](const Subset& row, const Subset& col) {
        const PauliString meas_op =
            conjugate_pauli_by_clifford(v2, monomial_to_pauli({n, row}).adjoint());
        const PauliString prep_op =
            conjugate_pauli_by_clifford(v1_inverse, monomial_to_pauli({n, col}));
        return detail::ShotSpec{prep_op.letters_only(), meas_op.letters_only(),
                                meas_op.phase() * prep_op.phase(),
                                monomial_subset_from_letters(meas_op),
                                monomial_subset_from_letters(prep_op)};
      },
      observer);
}

}  // namespace mgfe
