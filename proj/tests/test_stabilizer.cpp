#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mgfe/pauli.hpp"
#include "mgfe/rng.hpp"
#include "mgfe/stabilizer.hpp"

namespace {

using namespace mgfe;

PauliString conjugated(const std::string& text, const CliffordCircuit& circuit) {
  return conjugate_pauli_by_clifford(circuit, PauliString::parse(text));
}

CliffordCircuit random_circuit(int n_qubits, int n_gates, std::mt19937_64& rng) {
  CliffordCircuit circuit;
  for (int g = 0; g < n_gates; ++g) {
    auto kind = static_cast<CliffordGateKind>(rng() % 4);
    if (n_qubits == 1 && kind == CliffordGateKind::CNOT) kind = CliffordGateKind::H;
    const int qubit = 1 + static_cast<int>(rng() % n_qubits);
    int target = 0;
    if (kind == CliffordGateKind::CNOT) {
      target = 1 + static_cast<int>(rng() % n_qubits);
      if (target == qubit) target = 1 + target % n_qubits;
    }
    circuit.push_back({kind, qubit, target});
  }
  return circuit;
}

PauliString random_pauli(int n_qubits, std::mt19937_64& rng) {
  PauliString p(n_qubits);
  for (int q = 0; q < n_qubits; ++q) {
    p.set_letter(q, static_cast<PauliLetter>(rng() % 4));
  }
  p.set_phase_exponent(static_cast<uint8_t>(rng() % 4));
  return p;
}

}  // namespace

TEST_CASE("single-qubit conjugation rules", "[stabilizer]") {
  const CliffordCircuit h1 = {{CliffordGateKind::H, 1}};
  CHECK(conjugated("+XI", h1).to_string() == "+ZI");
  CHECK(conjugated("+ZI", h1).to_string() == "+XI");
  CHECK(conjugated("+YI", h1).to_string() == "-YI");
  CHECK(conjugated("+II", h1).to_string() == "+II");

  const CliffordCircuit s2 = {{CliffordGateKind::S, 2}};
  CHECK(conjugated("+IX", s2).to_string() == "+IY");
  CHECK(conjugated("+IY", s2).to_string() == "-IX");
  CHECK(conjugated("+IZ", s2).to_string() == "+IZ");

  const CliffordCircuit x1 = {{CliffordGateKind::X, 1}};
  CHECK(conjugated("+XZ", x1).to_string() == "+XZ");
  CHECK(conjugated("+ZZ", x1).to_string() == "-ZZ");
  CHECK(conjugated("+YI", x1).to_string() == "-YI");

  // untouched qubits and incoming phases ride along
  CHECK(conjugated("-iXY", h1).to_string() == "-iZY");
}

TEST_CASE("CNOT conjugation table", "[stabilizer]") {
  const CliffordCircuit cnot12 = {{CliffordGateKind::CNOT, 1, 2}};
  const std::vector<std::pair<std::string, std::string>> table = {
      {"+II", "+II"}, {"+IX", "+IX"}, {"+IY", "+ZY"}, {"+IZ", "+ZZ"},
      {"+XI", "+XX"}, {"+XX", "+XI"}, {"+XY", "+YZ"}, {"+XZ", "-YY"},
      {"+YI", "+YX"}, {"+YX", "+YI"}, {"+YY", "-XZ"}, {"+YZ", "+XY"},
      {"+ZI", "+ZI"}, {"+ZX", "+ZX"}, {"+ZY", "+IY"}, {"+ZZ", "+IZ"},
  };
  for (const auto& [in, expected] : table) {
    CAPTURE(in);
    CHECK(conjugated(in, cnot12).to_string() == expected);
  }

  // reversed orientation: control on qubit 2
  const CliffordCircuit cnot21 = {{CliffordGateKind::CNOT, 2, 1}};
  CHECK(conjugated("+XI", cnot21).to_string() == "+XI");
  CHECK(conjugated("+IX", cnot21).to_string() == "+XX");
  CHECK(conjugated("+ZI", cnot21).to_string() == "+ZZ");
}

TEST_CASE("inverse circuit undoes conjugation", "[stabilizer]") {
  const CliffordCircuit s1 = {{CliffordGateKind::S, 1}};
  const CliffordCircuit s1_dag = inverse_circuit(s1);
  REQUIRE(s1_dag.size() == 3);
  CHECK(conjugated("+X", s1_dag).to_string() == "-Y");
  CHECK(conjugated("+Y", s1_dag).to_string() == "+X");

  auto rng = make_rng(derive_seed(901, 1));
  for (int trial = 0; trial < 50; ++trial) {
    const CliffordCircuit circuit = random_circuit(3, 25, rng);
    const CliffordCircuit inverse = inverse_circuit(circuit);
    const PauliString p = random_pauli(3, rng);
    const PauliString back = conjugate_pauli_by_clifford(inverse, conjugate_pauli_by_clifford(circuit, p));
    CHECK(back == p);
  }
}

TEST_CASE("conjugation matches the dense unitary", "[stabilizer]") {
  auto rng = make_rng(derive_seed(901, 2));
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const CliffordCircuit circuit = random_circuit(n, 20, rng);
    const PauliString p = random_pauli(n, rng);
    const Eigen::MatrixXcd v = clifford_unitary(circuit, n);
    const Eigen::MatrixXcd direct = v * p.to_matrix() * v.adjoint();
    const Eigen::MatrixXcd via_rules = conjugate_pauli_by_clifford(circuit, p).to_matrix();
    CAPTURE(trial, n, p.to_string());
    CHECK((direct - via_rules).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("dense Clifford unitaries", "[stabilizer]") {
  const Eigen::MatrixXcd id2 = Eigen::MatrixXcd::Identity(2, 2);
  const Eigen::MatrixXcd h2 =
      clifford_unitary({{CliffordGateKind::H, 1}, {CliffordGateKind::H, 1}}, 1);
  CHECK((h2 - id2).cwiseAbs().maxCoeff() < 1e-14);

  CliffordCircuit s4(4, CliffordGate{CliffordGateKind::S, 1});
  CHECK((clifford_unitary(s4, 1) - id2).cwiseAbs().maxCoeff() < 1e-14);

  const CliffordCircuit cnot = {{CliffordGateKind::CNOT, 1, 2}};
  const Eigen::MatrixXcd c = clifford_unitary(cnot, 2);
  // |10> -> |11>, |11> -> |10>, first two basis states fixed
  CHECK(std::abs(c(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(c(1, 1) - 1.0) < 1e-14);
  CHECK(std::abs(c(3, 2) - 1.0) < 1e-14);
  CHECK(std::abs(c(2, 3) - 1.0) < 1e-14);
  const Eigen::MatrixXcd c2 = clifford_unitary({cnot[0], cnot[0]}, 2);
  CHECK((c2 - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);

  // unitarity of a random deep circuit
  auto rng = make_rng(derive_seed(901, 3));
  const CliffordCircuit circuit = random_circuit(3, 40, rng);
  const Eigen::MatrixXcd v = clifford_unitary(circuit, 3);
  CHECK((v * v.adjoint() - Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gate validation", "[stabilizer]") {
  const PauliString p = PauliString::parse("+XX");
  CHECK_THROWS_AS(conjugate_pauli_by_clifford({{CliffordGateKind::H, 3}}, p),
                  std::invalid_argument);
  CHECK_THROWS_AS(conjugate_pauli_by_clifford({{CliffordGateKind::H, 0}}, p),
                  std::invalid_argument);
  CHECK_THROWS_AS(conjugate_pauli_by_clifford({{CliffordGateKind::CNOT, 1, 1}}, p),
                  std::invalid_argument);
  CHECK_THROWS_AS(conjugate_pauli_by_clifford({{CliffordGateKind::CNOT, 1, 5}}, p),
                  std::invalid_argument);
  CHECK_THROWS_AS(clifford_unitary({{CliffordGateKind::H, 1}}, 11), capacity_error);
}
