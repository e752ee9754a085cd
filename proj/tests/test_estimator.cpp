#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "mgfe/estimator.hpp"
#include "mgfe/euler.hpp"
#include "mgfe/matchgate.hpp"
#include "mgfe/rotation.hpp"
#include "mgfe/stabilizer.hpp"
#include "mgfe/superoperator.hpp"

namespace {

using namespace mgfe;

NoisyChannel noiseless_matchgate(const Rotation& r) {
  return NoisyChannel(unitary_from_rotation(r));
}

}  // namespace

TEST_CASE("plan formulas", "[estimator]") {
  const SparseSuperOp identity2 = SparseSuperOp::identity(2);

  const EstimationPlan general = plan_runtime(0.05, 0.1, identity2);
  CHECK(general.mode == PlanMode::general);
  CHECK(general.l == 4000);
  CHECK(general.expected_shot_bound == Catch::Approx(9903.2071).epsilon(1e-6));

  const EstimationPlan conditioned = plan_runtime(0.1, 0.05, identity2, 1.0);
  CHECK(conditioned.mode == PlanMode::well_conditioned);
  CHECK(conditioned.l == 738);
  CHECK(conditioned.expected_shot_bound == Catch::Approx(1475.5518).epsilon(1e-6));

  // per-pair shot rule at l = 4000, eps = 0.05, delta = 0.1
  CHECK(general.m_mu(1.0) == 1);
  CHECK(general.m_mu(0.1) == 60);
  EstimationPlan appendix = general;
  appendix.bound = MmuBound::appendix;
  CHECK(appendix.m_mu(1.0) == 2);

  CHECK_THROWS_AS(plan_runtime(0.0, 0.1, identity2), std::invalid_argument);
  CHECK_THROWS_AS(plan_runtime(1.0, 0.1, identity2), std::invalid_argument);
  CHECK_THROWS_AS(plan_runtime(0.1, 0.0, identity2), std::invalid_argument);
  CHECK_THROWS_AS(plan_runtime(0.1, 1.5, identity2), std::invalid_argument);
  CHECK_THROWS_AS(plan_runtime(0.1, 0.1, identity2, 0.0), std::invalid_argument);

  // the alpha claim is checked against the superoperator
  const SparseSuperOp haar = matchgate_superop(haar_random_rotation(2, 5));
  CHECK(well_conditioning_alpha(haar) < 0.9);
  CHECK_THROWS_AS(plan_runtime(0.1, 0.05, haar, 0.9), std::invalid_argument);
  CHECK_NOTHROW(plan_runtime(0.1, 0.05, identity2, 1.0));
}

TEST_CASE("index sampler draws from the transition distribution", "[estimator]") {
  const SparseSuperOp identity2 = SparseSuperOp::identity(2);
  IndexSampler uniform(identity2);
  REQUIRE(uniform.cells().size() == 16);
  for (const auto& cell : uniform.cells()) {
    CHECK(cell.row == cell.col);
    CHECK(cell.probability == Catch::Approx(1.0 / 16.0));
  }
  auto rng = make_rng(derive_seed(777, 1));
  std::map<uint64_t, int> counts;
  const int draws = 16000;
  for (int i = 0; i < draws; ++i) {
    const auto& cell = uniform.sample(rng);
    counts[subset_global_index(cell.row, 4)]++;
  }
  REQUIRE(counts.size() == 16);
  for (const auto& [idx, c] : counts) {
    CHECK(std::abs(c - 1000.0) < 160.0);  // five sigma
  }

  // generic rotation: empirical frequencies track |chi|^2 / 2^(2n)
  const SparseSuperOp sup = matchgate_superop(haar_random_rotation(2, 9));
  IndexSampler sampler(sup);
  double mass = 0.0;
  for (const auto& cell : sampler.cells()) mass += cell.probability;
  CHECK(mass == Catch::Approx(1.0).margin(1e-10));
  std::map<std::pair<uint64_t, uint64_t>, int> freq;
  const int trials = 40000;
  for (int i = 0; i < trials; ++i) {
    const auto& cell = sampler.sample(rng);
    freq[{subset_global_index(cell.row, 4), subset_global_index(cell.col, 4)}]++;
  }
  for (const auto& cell : sampler.cells()) {
    if (cell.probability < 0.01) continue;
    const auto key = std::make_pair(subset_global_index(cell.row, 4),
                                    subset_global_index(cell.col, 4));
    const double observed = static_cast<double>(freq[key]) / trials;
    const double sigma = std::sqrt(cell.probability * (1.0 - cell.probability) / trials);
    CHECK(std::abs(observed - cell.probability) < 5.0 * sigma);
  }

  // probability mass far from one is rejected
  SparseSuperOp lossy(1, true);
  lossy.set({}, {}, 1.0);
  lossy.set({1}, {1}, 0.5);
  CHECK_THROWS_AS(IndexSampler(lossy), std::invalid_argument);
}

TEST_CASE("noiseless estimate concentrates at one", "[estimator]") {
  const Rotation r = haar_random_rotation(2, 11);
  const SparseSuperOp sup = matchgate_superop(r);
  const NoisyChannel ch = noiseless_matchgate(r);
  const EstimationPlan plan = plan_runtime(0.1, 0.05, sup);
  REQUIRE(plan.l == 2000);

  const EstimationResult result = estimate_fidelity(sup, ch, plan, 501);
  CHECK(std::abs(result.y_tilde - 1.0) <= 2.0 * plan.epsilon);
  CHECK(result.f_e_low <= 1.0);
  CHECK(result.f_e_high >= 1.0);
  CHECK(result.f == Catch::Approx(channel_fidelity(result.y_tilde, 2)));
  CHECK(result.per_sample.size() == plan.l);

  // the reported value is exactly the mean of the per-sample records
  complexd mean = 0.0;
  uint64_t shots = 0;
  for (const SampleRecord& rec : result.per_sample) {
    mean += rec.x_tilde;
    shots += rec.shots;
  }
  mean /= static_cast<double>(plan.l);
  CHECK(result.y_tilde == mean.real());
  CHECK(result.total_shots == shots);

  // per-degree decays of a noiseless run sit near one
  REQUIRE(result.lambda_prime.size() == 5);
  for (double decay : result.lambda_prime) {
    CHECK(std::abs(decay - 1.0) < 0.5);
  }
}

TEST_CASE("globally depolarized channels match the closed form", "[estimator]") {
  const Rotation r = haar_random_rotation(2, 21);
  const SparseSuperOp sup = matchgate_superop(r);
  const double p = 0.2;
  NoisyChannel ch = noiseless_matchgate(r);
  ch.add_global_depolarizing_stage(p);
  const double f_e_true = (1.0 - p) + p / 16.0;  // 0.8125

  const EstimationPlan plan = plan_runtime(0.1, 0.05, sup);
  int hits = 0;
  double lambda1 = 0.0, lambda0 = 0.0;
  const int runs = 20;
  for (int run = 0; run < runs; ++run) {
    const EstimationResult result = estimate_fidelity(sup, ch, plan, derive_seed(600, run));
    if (std::abs(result.y_tilde - f_e_true) <= 2.0 * plan.epsilon) ++hits;
    lambda0 += result.lambda_prime[0];
    lambda1 += result.lambda_prime[1];
  }
  CHECK(hits >= 16);  // guaranteed rate is 1 - 2*delta = 0.9
  // degree-zero decay is pinned at one, all others at 1 - p
  CHECK(std::abs(lambda0 / runs - 1.0) < 0.1);
  CHECK(std::abs(lambda1 / runs - (1.0 - p)) < 0.1);
}

TEST_CASE("Clifford references are reproduced exactly", "[estimator]") {
  // CNOT: transition amplitudes are fourth roots of unity, alpha = 1, and
  // every shot is deterministic, so the estimate is exact.
  const CliffordCircuit cnot = {{CliffordGateKind::CNOT, 1, 2}};
  const NoisyChannel ch(clifford_unitary(cnot, 2));
  const SparseSuperOp sup = sparse_from_dense(brute_force_superop(ch), false);
  CHECK(well_conditioning_alpha(sup) == Catch::Approx(1.0));

  const EstimationPlan plan = plan_runtime(0.1, 0.05, sup, 1.0);
  const EstimationResult result = estimate_fidelity(sup, ch, plan, 71);
  CHECK(result.total_shots == plan.l);  // one shot per pair at alpha = 1
  CHECK(std::abs(result.y_tilde - 1.0) < 1e-13);

  // matchgate Clifford: XY(pi/2) has a signed-permutation rotation
  MatchgateCircuit circ(2);
  circ.add_gate(1, xy_gate(std::numbers::pi / 2));
  const SparseSuperOp xy_sup = matchgate_superop(circuit_to_rotation(circ));
  CHECK(well_conditioning_alpha(xy_sup) == Catch::Approx(1.0));
  const EstimationPlan xy_plan = plan_runtime(0.1, 0.05, xy_sup, 1.0);
  const NoisyChannel xy_ch(unitary_from_rotation(circuit_to_rotation(circ)));
  const EstimationResult xy_result = estimate_fidelity(xy_sup, xy_ch, xy_plan, 72);
  CHECK(xy_result.total_shots == xy_plan.l);
  CHECK(xy_result.total_shots <=
        static_cast<uint64_t>(std::ceil(4.0 * std::log(2.0 / 0.05) / (0.1 * 0.1))));
  CHECK(std::abs(xy_result.y_tilde - 1.0) < 1e-13);
}

TEST_CASE("seeded runs are deterministic", "[estimator]") {
  const Rotation r = haar_random_rotation(2, 31);
  const SparseSuperOp sup = matchgate_superop(r);
  NoisyChannel ch = noiseless_matchgate(r);
  ch.add_global_depolarizing_stage(0.1);
  EstimationPlan plan = plan_runtime(0.2, 0.1, sup);

  const EstimationResult a = estimate_fidelity(sup, ch, plan, 42);
  const EstimationResult b = estimate_fidelity(sup, ch, plan, 42);
  CHECK(a.y_tilde == b.y_tilde);
  CHECK(a.total_shots == b.total_shots);
  REQUIRE(a.per_sample.size() == b.per_sample.size());
  for (size_t i = 0; i < a.per_sample.size(); ++i) {
    CHECK(a.per_sample[i].x_tilde == b.per_sample[i].x_tilde);
    CHECK(a.per_sample[i].row == b.per_sample[i].row);
  }

  const EstimationResult c = estimate_fidelity(sup, ch, plan, 43);
  CHECK(a.y_tilde != c.y_tilde);
}

TEST_CASE("shot observer sees every shot", "[estimator]") {
  const Rotation r = haar_random_rotation(1, 3);
  const SparseSuperOp sup = matchgate_superop(r);
  const NoisyChannel ch = noiseless_matchgate(r);
  EstimationPlan plan = plan_runtime(0.2, 0.2, sup);

  uint64_t seen = 0;
  std::map<uint64_t, complexd> b_sums;
  std::map<uint64_t, uint64_t> nu_max;
  const EstimationResult result = estimate_fidelity(
      sup, ch, plan, 7, [&](uint64_t mu, uint64_t nu, const ShotRecord& rec) {
        ++seen;
        b_sums[mu] += rec.B;
        nu_max[mu] = std::max(nu_max[mu], nu);
      });
  CHECK(seen == result.total_shots);
  REQUIRE(nu_max.size() == result.per_sample.size());
  for (uint64_t mu = 1; mu <= plan.l; ++mu) {
    const SampleRecord& rec = result.per_sample[mu - 1];
    CHECK(nu_max[mu] == rec.shots);
    const complexd reconstructed =
        b_sums[mu] / (rec.chi * static_cast<double>(rec.shots));
    CHECK(std::abs(reconstructed - rec.x_tilde) < 1e-15);
  }
}

TEST_CASE("per-pair shot cap aborts ill-conditioned runs", "[estimator]") {
  // plane rotation with cos(theta) = 0.3: those cells need five shots each
  const Rotation r(planar_rotation(1, std::acos(0.3), 2));
  const SparseSuperOp sup = matchgate_superop(r);
  const NoisyChannel ch = noiseless_matchgate(r);
  EstimationPlan plan = plan_runtime(0.1, 0.05, sup);
  plan.m_cap = 4;
  CHECK_THROWS_AS(estimate_fidelity(sup, ch, plan, 11), std::runtime_error);
  plan.m_cap = 5;
  CHECK_NOTHROW(estimate_fidelity(sup, ch, plan, 11));
}

TEST_CASE("conjugated frames leave transition amplitudes invariant", "[estimator]") {
  const int n = 2;
  const Rotation r = haar_random_rotation(n, 61);
  const SparseSuperOp sup = matchgate_superop(r);
  const Eigen::MatrixXcd u = unitary_from_rotation(r);

  const CliffordCircuit v1 = {{CliffordGateKind::H, 1},
                              {CliffordGateKind::CNOT, 1, 2},
                              {CliffordGateKind::S, 2}};
  const CliffordCircuit v2 = {{CliffordGateKind::S, 1},
                              {CliffordGateKind::CNOT, 2, 1},
                              {CliffordGateKind::X, 2}};
  const Eigen::MatrixXcd w =
      clifford_unitary(v2, n) * u * clifford_unitary(v1, n);
  const CliffordCircuit v1_inverse = inverse_circuit(v1);

  // Tr( (V2 c_I† V2†) W (V1† c_J V1) W† ) / 2^n equals the inner-unitary
  // amplitude chi(I, J) for every index pair
  for (uint32_t gi = 0; gi < 16; ++gi) {
    for (uint32_t gj = 0; gj < 16; ++gj) {
      const Subset i_set = global_index_to_subset(gi, 2 * n);
      const Subset j_set = global_index_to_subset(gj, 2 * n);
      const PauliString meas_op =
          conjugate_pauli_by_clifford(v2, monomial_to_pauli({n, i_set}).adjoint());
      const PauliString prep_op =
          conjugate_pauli_by_clifford(v1_inverse, monomial_to_pauli({n, j_set}));
      const complexd lhs =
          (meas_op.to_matrix() * w * prep_op.to_matrix() * w.adjoint()).trace() / 4.0;
      CAPTURE(gi, gj);
      CHECK(std::abs(lhs - sup.at(i_set, j_set)) < 1e-12);
    }
  }
}

TEST_CASE("sandwich estimator with trivial layers matches the direct path", "[estimator]") {
  const Rotation r = haar_random_rotation(2, 77);
  const SparseSuperOp sup = matchgate_superop(r);
  NoisyChannel ch = noiseless_matchgate(r);
  ch.add_global_depolarizing_stage(0.15);
  EstimationPlan plan = plan_runtime(0.2, 0.1, sup);

  const EstimationResult direct = estimate_fidelity(sup, ch, plan, 88);
  const EstimationResult framed = clifford_sandwich_estimate(sup, {}, {}, ch, plan, 88);
  CHECK(direct.y_tilde == framed.y_tilde);
  CHECK(direct.total_shots == framed.total_shots);
  REQUIRE(direct.per_sample.size() == framed.per_sample.size());
  for (size_t i = 0; i < direct.per_sample.size(); ++i) {
    CHECK(direct.per_sample[i].row == framed.per_sample[i].row);
    CHECK(direct.per_sample[i].col == framed.per_sample[i].col);
    CHECK(direct.per_sample[i].x_tilde == framed.per_sample[i].x_tilde);
  }
}

TEST_CASE("sandwich estimator tracks the sandwiched channel", "[estimator]") {
  const int n = 2;
  const Rotation r = haar_random_rotation(n, 91);
  const SparseSuperOp sup = matchgate_superop(r);
  const Eigen::MatrixXcd u = unitary_from_rotation(r);
  const CliffordCircuit v1 = {{CliffordGateKind::CNOT, 1, 2}, {CliffordGateKind::H, 2}};
  const CliffordCircuit v2 = {{CliffordGateKind::S, 1}, {CliffordGateKind::CNOT, 1, 2}};
  const Eigen::MatrixXcd w = clifford_unitary(v2, n) * u * clifford_unitary(v1, n);

  const EstimationPlan plan = plan_runtime(0.1, 0.05, sup);
  const NoisyChannel ideal(w);
  const EstimationResult clean = clifford_sandwich_estimate(sup, v1, v2, ideal, plan, 92);
  CHECK(std::abs(clean.y_tilde - 1.0) <= 2.0 * plan.epsilon);
  CHECK(clean.f_e_low <= 1.0);
  CHECK(clean.f_e_high >= 1.0);

  NoisyChannel noisy = ideal;
  noisy.add_global_depolarizing_stage(0.2);
  const double f_e_true = 0.8 + 0.2 / 16.0;
  const EstimationResult result = clifford_sandwich_estimate(sup, v1, v2, noisy, plan, 93);
  CHECK(std::abs(result.y_tilde - f_e_true) <= 2.0 * plan.epsilon);
}
