#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mgfe/matchgate.hpp"
#include "mgfe/simulator.hpp"
#include "mgfe/superoperator.hpp"

using namespace mgfe;
using Catch::Matchers::WithinAbs;

TEST_CASE("preparation draws uniform Z-basis states for Z-type Paulis", "[simulator]") {
  const PauliString p = PauliString::parse("+ZI");
  auto rng = make_rng(101);
  int counts[4] = {0, 0, 0, 0};
  for (int t = 0; t < 4000; ++t) {
    const PreparedState ps = prepare_pauli_eigenstate(p, rng);
    // state must be a computational basis vector
    int index = -1;
    for (int i = 0; i < 4; ++i) {
      if (std::abs(ps.state(i) - complexd(1.0, 0.0)) < 1e-15) index = i;
    }
    REQUIRE(index >= 0);
    ++counts[index];
    // lambda tracks the first qubit only (qubit 0 is the leading tensor slot)
    CHECK(ps.lambda == (index < 2 ? 1 : -1));
  }
  for (int i = 0; i < 4; ++i) CHECK(counts[i] > 800);  // 1000 expected each
}

TEST_CASE("prepared states are genuine eigenstates", "[simulator]") {
  auto rng = make_rng(202);
  for (const char* text : {"+XY", "+YZ", "+XX", "-XY"}) {
    const PauliString p = PauliString::parse(text);
    const Eigen::MatrixXcd dense = p.to_matrix();
    for (int t = 0; t < 25; ++t) {
      const PreparedState ps = prepare_pauli_eigenstate(p, rng);
      CHECK_THAT(ps.state.norm(), WithinAbs(1.0, 1e-12));
      const Eigen::VectorXcd image = dense * ps.state;
      CHECK((image - static_cast<double>(ps.lambda) * ps.state).norm() < 1e-12);
    }
  }
}

TEST_CASE("eigenvalue draws average to zero", "[simulator]") {
  auto rng = make_rng(303);
  const PauliString p = PauliString::parse("+XYZ");
  double acc = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) acc += prepare_pauli_eigenstate(p, rng).lambda;
  CHECK(std::abs(acc / trials) < 5.0 / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("imaginary preparation phases are rejected", "[simulator]") {
  auto rng = make_rng(404);
  const PauliString p = monomial_to_pauli({2, {1, 2}});  // +iZI
  CHECK_THROWS_AS(prepare_pauli_eigenstate(p, rng), std::invalid_argument);
  CHECK_NOTHROW(prepare_pauli_eigenstate(p.letters_only(), rng));
  CHECK_THROWS_AS(measure_pauli(Eigen::MatrixXcd::Identity(4, 4) * 0.25, p, rng),
                  std::invalid_argument);
}

TEST_CASE("measurement is deterministic on definite states", "[simulator]") {
  auto rng = make_rng(505);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2, 2);
  rho(0, 0) = 1.0;
  const PauliString z = PauliString::parse("+Z");
  for (int t = 0; t < 50; ++t) CHECK(measure_pauli(rho, z, rng) == 1);
  const PauliString minus_z = PauliString::parse("-Z");
  for (int t = 0; t < 50; ++t) CHECK(measure_pauli(rho, minus_z, rng) == -1);
}

TEST_CASE("maximally mixed states measure to zero mean", "[simulator]") {
  auto rng = make_rng(606);
  const Eigen::MatrixXcd rho = 0.25 * Eigen::MatrixXcd::Identity(4, 4);
  const PauliString p = PauliString::parse("+XZ");
  double acc = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) acc += measure_pauli(rho, p, rng);
  CHECK(std::abs(acc / trials) < 5.0 / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("malformed probabilities raise", "[simulator]") {
  auto rng = make_rng(707);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2, 2);
  rho(0, 0) = 2.0;  // trace 2: Tr(Z rho) = 2 pushes p_plus to 1.5
  CHECK_THROWS_AS(measure_pauli(rho, PauliString::parse("+Z"), rng), std::runtime_error);
}

TEST_CASE("identity-channel shots on matching monomials give B = 1", "[simulator]") {
  const NoisyChannel ch = depolarizing(2, 0.0);
  auto rng = make_rng(808);
  for (int t = 0; t < 200; ++t) {
    const ShotRecord rec = shot(ch, {1}, {1}, rng);
    CHECK(rec.B == complexd(1.0, 0.0));
    CHECK(rec.phi == complexd(1.0, 0.0));
    CHECK(rec.B == static_cast<double>(rec.A * rec.lambda) * rec.phi);
  }
}

TEST_CASE("identity-channel shots on mismatched monomials average to zero", "[simulator]") {
  const NoisyChannel ch = depolarizing(2, 0.0);
  auto rng = make_rng(909);
  double acc = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const ShotRecord rec = shot(ch, {1}, {2}, rng);
    CHECK(rec.phi.imag() == 0.0);  // same-size monomials keep phi real
    acc += rec.B.real();
  }
  CHECK(std::abs(acc / trials) < 5.0 / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("shot means track the superoperator entries", "[simulator]") {
  const NoisyChannel ch =
      composed({NoisyChannel(Eigen::MatrixXcd(xy_gate(0.9))), amplitude_damping(2, 0.08),
                depolarizing(2, 0.05)});
  const DenseSuperOp oracle = brute_force_superop(ch);
  const int trials = 20000;
  const double tol = 4.0 / std::sqrt(static_cast<double>(trials));
  const std::vector<std::pair<Subset, Subset>> pairs = {
      {{1}, {2}}, {{1, 3}, {2, 4}}, {{2}, {2}}, {{1, 2, 3}, {1, 2, 3}}};
  int pair_index = 0;
  for (const auto& [i_set, j_set] : pairs) {
    auto rng = make_rng(derive_seed(1234, static_cast<uint64_t>(pair_index++)));
    complexd acc = 0.0;
    for (int t = 0; t < trials; ++t) acc += shot(ch, i_set, j_set, rng).B;
    acc /= static_cast<double>(trials);
    const complexd expect = oracle.at(i_set, j_set);
    CHECK(std::abs(acc - expect) < tol);
  }
}

TEST_CASE("cross-degree shots need the complex phase", "[simulator]") {
  const double gamma = 0.3;
  const NoisyChannel ch = amplitude_damping(1, gamma);
  // chi({1,2}, {}) = -i gamma for this channel: c_12 = i Z and the damped
  // identity picks up a Z component of 2 gamma.
  const DenseSuperOp oracle = brute_force_superop(ch);
  const complexd expect = oracle.at({1, 2}, {});
  CHECK_THAT(expect.imag(), WithinAbs(-gamma, 1e-12));
  CHECK_THAT(expect.real(), WithinAbs(0.0, 1e-12));
  auto rng = make_rng(4242);
  complexd acc = 0.0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const ShotRecord rec = shot(ch, {1, 2}, {}, rng);
    CHECK(rec.phi == complexd(0.0, -1.0));
    acc += rec.B;
  }
  acc /= static_cast<double>(trials);
  CHECK(std::abs(acc - expect) < 4.0 / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("identical seeds replay identical shot streams", "[simulator]") {
  const NoisyChannel ch =
      composed({NoisyChannel(Eigen::MatrixXcd(fsim_gate(0.7, 0.0))), phase_damping(2, 0.1)});
  auto rng_a = make_rng(31337);
  auto rng_b = make_rng(31337);
  for (int t = 0; t < 50; ++t) {
    const ShotRecord a = shot(ch, {1, 4}, {2, 3}, rng_a);
    const ShotRecord b = shot(ch, {1, 4}, {2, 3}, rng_b);
    CHECK(a.lambda == b.lambda);
    CHECK(a.A == b.A);
    CHECK(a.B == b.B);
  }
}
