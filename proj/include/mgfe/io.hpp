#pragma once

#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "mgfe/estimator.hpp"
#include "mgfe/euler.hpp"
#include "mgfe/matchgate.hpp"
#include "mgfe/simulator.hpp"
#include "mgfe/stabilizer.hpp"
#include "mgfe/subsets.hpp"
#include "mgfe/superoperator.hpp"

namespace mgfe {

// ---------------------------------------------------------------------------
// numeric tokens: %.17g round-trips doubles bit-exactly
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view text) {
  const std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty numeric token");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    throw std::invalid_argument("invalid number '" + s + "'");
  }
  return v;
}

// Complex tokens carry the imaginary part as a trailing-i suffix:
// "1.5", "2i", "0.5-0.25i", "-1e-3+2e-4i".
inline std::string format_complex(complexd v) {
  char buf[88];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", v.real(), v.imag());
  return buf;
}

inline complexd parse_complex(std::string_view token) {
  std::string s(token);
  if (s.empty()) throw std::invalid_argument("empty complex token");
  if (s.back() != 'i') return {parse_double(s), 0.0};
  s.pop_back();
  if (s.empty() || s == "+") return {0.0, 1.0};
  if (s == "-") return {0.0, -1.0};
  size_t split = std::string::npos;
  for (size_t pos = s.size(); pos-- > 1;) {
    if ((s[pos] == '+' || s[pos] == '-') && s[pos - 1] != 'e' && s[pos - 1] != 'E') {
      split = pos;
      break;
    }
  }
  if (split == std::string::npos) return {0.0, parse_double(s)};
  std::string imag = s.substr(split);
  if (imag == "+") imag = "1";
  if (imag == "-") imag = "-1";
  return {parse_double(s.substr(0, split)), parse_double(imag)};
}

namespace detail {

// Lines with '#' comments stripped, blank lines dropped, 1-based original
// line numbers kept for error messages.
inline std::vector<std::pair<int, std::string>> content_lines(const std::string& text) {
  std::vector<std::pair<int, std::string>> out;
  std::istringstream stream(text);
  std::string line;
  int number = 0;
  while (std::getline(stream, line)) {
    ++number;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream probe(line);
    std::string word;
    if (probe >> word) out.emplace_back(number, line);
  }
  return out;
}

inline std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> words;
  std::istringstream stream(line);
  std::string word;
  while (stream >> word) words.push_back(word);
  return words;
}

[[noreturn]] inline void line_error(const char* what, int line, const std::string& detail) {
  std::ostringstream msg;
  msg << what << " line " << line << ": " << detail;
  throw std::invalid_argument(msg.str());
}

inline int parse_qubit(const std::string& token, const char* what, int line) {
  try {
    const double v = parse_double(token);
    const int q = static_cast<int>(v);
    if (v != q || q < 1) throw std::invalid_argument("not a positive integer");
    return q;
  } catch (const std::invalid_argument&) {
    line_error(what, line, "invalid qubit index '" + token + "'");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// matchgate circuit text (.mgc)
//
//   # comment
//   N 3                                  optional explicit qubit count
//   G 1 a11 a12 a21 a22 b11 b12 b21 b22  blocks of gate_g, complex tokens
//   FSIM 2 0.7 0                         fsim_gate(theta, phi)
//
// Gates apply in line order on the nearest-neighbor pair (q, q+1).  The
// register size defaults to the largest touched qubit + 1; n_override (for
// a command-line -n) wins over everything.
// ---------------------------------------------------------------------------

inline MatchgateCircuit parse_matchgate_circuit(const std::string& text, int n_override = 0) {
  struct PendingGate {
    int line;
    int qubit;
    Eigen::Matrix4cd unitary;
  };
  std::vector<PendingGate> pending;
  int declared_n = 0;
  int max_qubit = 0;
  for (const auto& [number, line] : detail::content_lines(text)) {
    const std::vector<std::string> words = detail::split_words(line);
    const std::string& kind = words[0];
    if (kind == "N") {
      if (words.size() != 2) detail::line_error("circuit", number, "N expects one value");
      if (!pending.empty() || declared_n > 0) {
        detail::line_error("circuit", number, "N must appear once, before any gate");
      }
      declared_n = detail::parse_qubit(words[1], "circuit", number);
    } else if (kind == "G") {
      if (words.size() != 10) {
        detail::line_error("circuit", number, "G expects a qubit and eight complex entries");
      }
      const int q = detail::parse_qubit(words[1], "circuit", number);
      Eigen::Matrix2cd a, b;
      try {
        a << parse_complex(words[2]), parse_complex(words[3]), parse_complex(words[4]),
            parse_complex(words[5]);
        b << parse_complex(words[6]), parse_complex(words[7]), parse_complex(words[8]),
            parse_complex(words[9]);
      } catch (const std::invalid_argument& e) {
        detail::line_error("circuit", number, e.what());
      }
      try {
        pending.push_back({number, q, gate_g(a, b)});
      } catch (const std::invalid_argument& e) {
        detail::line_error("circuit", number, e.what());
      }
      max_qubit = std::max(max_qubit, q + 1);
    } else if (kind == "FSIM") {
      if (words.size() != 4) {
        detail::line_error("circuit", number, "FSIM expects a qubit, theta, and phi");
      }
      const int q = detail::parse_qubit(words[1], "circuit", number);
      try {
        pending.push_back({number, q, fsim_gate(parse_double(words[2]), parse_double(words[3]))});
      } catch (const std::invalid_argument& e) {
        detail::line_error("circuit", number, e.what());
      }
      max_qubit = std::max(max_qubit, q + 1);
    } else {
      detail::line_error("circuit", number, "unsupported directive '" + kind + "'");
    }
  }
  int n = std::max(declared_n, max_qubit);
  if (n_override > 0) n = n_override;
  if (n < 1) throw std::invalid_argument("circuit defines no gates and no qubit count");
  MatchgateCircuit circ(n);
  for (const PendingGate& gate : pending) {
    try {
      circ.add_gate(gate.qubit, gate.unitary);
    } catch (const std::invalid_argument& e) {
      detail::line_error("circuit", gate.line, e.what());
    }
  }
  return circ;
}

inline std::string write_matchgate_circuit(const MatchgateCircuit& circ) {
  std::ostringstream out;
  out << "N " << circ.n_qubits() << "\n";
  for (const CircuitGate& gate : circ.gates()) {
    const Eigen::Matrix4cd& g = gate.unitary;
    out << "G " << gate.qubit;
    const complexd a[4] = {g(1, 1), g(1, 2), g(2, 1), g(2, 2)};
    const complexd b[4] = {g(0, 0), g(0, 3), g(3, 0), g(3, 3)};
    for (const complexd& v : a) out << ' ' << format_complex(v);
    for (const complexd& v : b) out << ' ' << format_complex(v);
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Clifford circuit text (.clf): one gate per line, H q | S q | X q | CNOT c t
// ---------------------------------------------------------------------------

inline CliffordCircuit parse_clifford_circuit(const std::string& text) {
  CliffordCircuit circuit;
  for (const auto& [number, line] : detail::content_lines(text)) {
    const std::vector<std::string> words = detail::split_words(line);
    const std::string& kind = words[0];
    if (kind == "CNOT") {
      if (words.size() != 3) detail::line_error("clifford", number, "CNOT expects control and target");
      circuit.push_back({CliffordGateKind::CNOT,
                         detail::parse_qubit(words[1], "clifford", number),
                         detail::parse_qubit(words[2], "clifford", number)});
    } else if (kind == "H" || kind == "S" || kind == "X") {
      if (words.size() != 2) detail::line_error("clifford", number, kind + " expects one qubit");
      const CliffordGateKind g = kind == "H"   ? CliffordGateKind::H
                                 : kind == "S" ? CliffordGateKind::S
                                               : CliffordGateKind::X;
      circuit.push_back({g, detail::parse_qubit(words[1], "clifford", number), 0});
    } else {
      detail::line_error("clifford", number, "unsupported gate '" + kind + "'");
    }
  }
  return circuit;
}

inline std::string write_clifford_circuit(const CliffordCircuit& circuit) {
  std::ostringstream out;
  for (const CliffordGate& g : circuit) {
    switch (g.kind) {
      case CliffordGateKind::H: out << "H " << g.qubit << "\n"; break;
      case CliffordGateKind::S: out << "S " << g.qubit << "\n"; break;
      case CliffordGateKind::X: out << "X " << g.qubit << "\n"; break;
      case CliffordGateKind::CNOT: out << "CNOT " << g.qubit << ' ' << g.target << "\n"; break;
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// sparse superoperator CSV
//
//   # n_qubits=3 block=1
//   degree,row,col,re,im
//   1,1,3,0.25,0
//
// row/col are compact index-subset strings (subset_to_string); degree is the
// row subset size, present for filtering convenience.
// ---------------------------------------------------------------------------

inline std::string write_superop_csv(const SparseSuperOp& sup) {
  std::ostringstream out;
  out << "# n_qubits=" << sup.n_qubits() << " block=" << (sup.block_structure() ? 1 : 0)
      << "\n";
  out << "degree,row,col,re,im\n";
  for (const auto& [key, value] : sup.entries()) {
    const Subset row = sup.subset_of_index(key.first);
    const Subset col = sup.subset_of_index(key.second);
    out << row.size() << ',' << subset_to_string(row) << ',' << subset_to_string(col) << ','
        << format_double(value.real()) << ',' << format_double(value.imag()) << "\n";
  }
  return out.str();
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace detail

inline SparseSuperOp parse_superop_csv(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  if (!std::getline(stream, line)) throw std::invalid_argument("empty superoperator file");
  int n = 0, block = 0;
  if (std::sscanf(line.c_str(), "# n_qubits=%d block=%d", &n, &block) != 2) {
    throw std::invalid_argument("superoperator file must start with '# n_qubits=<n> block=<0|1>'");
  }
  SparseSuperOp sup(n, block != 0);
  int number = 1;
  while (std::getline(stream, line)) {
    ++number;
    if (line.empty() || line == "degree,row,col,re,im") continue;
    const std::vector<std::string> fields = detail::split_csv(line);
    if (fields.size() != 5) detail::line_error("superoperator", number, "expected 5 fields");
    try {
      sup.set(subset_from_string(fields[1]), subset_from_string(fields[2]),
              {parse_double(fields[3]), parse_double(fields[4])});
    } catch (const std::invalid_argument& e) {
      detail::line_error("superoperator", number, e.what());
    }
  }
  return sup;
}

// ---------------------------------------------------------------------------
// Euler angle table CSV:  # dim=6  /  k,j,theta  rows for 1 <= j <= k < dim
// ---------------------------------------------------------------------------

inline std::string write_euler_table(const EulerAngles& angles) {
  std::ostringstream out;
  out << "# dim=" << angles.dim << "\n";
  out << "k,j,theta\n";
  for (int k = 1; k < angles.dim; ++k) {
    for (int j = 1; j <= k; ++j) {
      out << k << ',' << j << ',' << format_double(angles.theta[k - 1][j - 1]) << "\n";
    }
  }
  return out.str();
}

inline EulerAngles parse_euler_table(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  if (!std::getline(stream, line)) throw std::invalid_argument("empty angle table");
  int dim = 0;
  if (std::sscanf(line.c_str(), "# dim=%d", &dim) != 1 || dim < 1) {
    throw std::invalid_argument("angle table must start with '# dim=<d>'");
  }
  EulerAngles angles;
  angles.dim = dim;
  angles.theta.resize(static_cast<size_t>(dim > 0 ? dim - 1 : 0));
  for (int k = 1; k < dim; ++k) angles.theta[k - 1].assign(static_cast<size_t>(k), 0.0);
  std::set<std::pair<int, int>> seen;
  int number = 1;
  while (std::getline(stream, line)) {
    ++number;
    if (line.empty() || line == "k,j,theta") continue;
    const std::vector<std::string> fields = detail::split_csv(line);
    if (fields.size() != 3) detail::line_error("angle table", number, "expected 3 fields");
    int k = 0, j = 0;
    double theta = 0.0;
    try {
      k = static_cast<int>(parse_double(fields[0]));
      j = static_cast<int>(parse_double(fields[1]));
      theta = parse_double(fields[2]);
    } catch (const std::invalid_argument& e) {
      detail::line_error("angle table", number, e.what());
    }
    if (k < 1 || k >= dim || j < 1 || j > k) {
      detail::line_error("angle table", number, "indices out of range");
    }
    if (!seen.insert({k, j}).second) {
      detail::line_error("angle table", number, "duplicate entry");
    }
    angles.theta[k - 1][j - 1] = theta;
  }
  const size_t expected = static_cast<size_t>(dim) * (dim - 1) / 2;
  if (seen.size() != expected) {
    throw std::invalid_argument("angle table is incomplete");
  }
  return angles;
}

// ---------------------------------------------------------------------------
// dense matrices: "rows cols" header line, then one row of tokens per line
// ---------------------------------------------------------------------------

inline std::string write_matrix(const Eigen::MatrixXd& m) {
  std::ostringstream out;
  out << m.rows() << ' ' << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? " " : "") << format_double(m(i, j));
    }
    out << "\n";
  }
  return out.str();
}

inline Eigen::MatrixXd parse_matrix(const std::string& text) {
  std::istringstream stream(text);
  Eigen::Index rows = 0, cols = 0;
  if (!(stream >> rows >> cols) || rows < 1 || cols < 1) {
    throw std::invalid_argument("matrix file must start with 'rows cols'");
  }
  Eigen::MatrixXd m(rows, cols);
  std::string token;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(stream >> token)) throw std::invalid_argument("matrix file ends early");
      m(i, j) = parse_double(token);
    }
  }
  if (stream >> token) throw std::invalid_argument("matrix file has trailing tokens");
  return m;
}

inline std::string write_complex_matrix(const Eigen::MatrixXcd& m) {
  std::ostringstream out;
  out << m.rows() << ' ' << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? " " : "") << format_complex(m(i, j));
    }
    out << "\n";
  }
  return out.str();
}

inline Eigen::MatrixXcd parse_complex_matrix(const std::string& text) {
  std::istringstream stream(text);
  Eigen::Index rows = 0, cols = 0;
  if (!(stream >> rows >> cols) || rows < 1 || cols < 1) {
    throw std::invalid_argument("matrix file must start with 'rows cols'");
  }
  Eigen::MatrixXcd m(rows, cols);
  std::string token;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(stream >> token)) throw std::invalid_argument("matrix file ends early");
      m(i, j) = parse_complex(token);
    }
  }
  if (stream >> token) throw std::invalid_argument("matrix file has trailing tokens");
  return m;
}

// ---------------------------------------------------------------------------
// shot log CSV + JSON estimation report
// ---------------------------------------------------------------------------

inline std::string shot_log_header() {
  return "mu,nu,row,col,lambda,A,phi_re,phi_im,b_re,b_im\n";
}

// Observer that appends one CSV line per shot to `out`.
inline ShotObserver make_shot_logger(std::ostream& out) {
  return [&out](uint64_t mu, uint64_t nu, const ShotRecord& rec) {
    out << mu << ',' << nu << ',' << subset_to_string(rec.I) << ',' << subset_to_string(rec.J)
        << ',' << rec.lambda << ',' << rec.A << ',' << format_double(rec.phi.real()) << ','
        << format_double(rec.phi.imag()) << ',' << format_double(rec.B.real()) << ','
        << format_double(rec.B.imag()) << "\n";
  };
}

inline nlohmann::json estimation_report(const EstimationPlan& plan,
                                        const EstimationResult& result,
                                        bool include_samples = true) {
  nlohmann::json report;
  report["schema_version"] = 1;
  report["epsilon"] = plan.epsilon;
  report["delta"] = plan.delta;
  report["mode"] = plan.mode == PlanMode::general ? "general" : "well_conditioned";
  report["bound"] = plan.bound == MmuBound::box ? "box" : "appendix";
  if (plan.mode == PlanMode::well_conditioned) report["alpha"] = plan.alpha;
  report["l"] = plan.l;
  report["m_cap"] = plan.m_cap;
  report["expected_shot_bound"] = plan.expected_shot_bound;
  report["total_shots"] = result.total_shots;
  report["y_tilde"] = result.y_tilde;
  report["f_e_interval"] = {result.f_e_low, result.f_e_high};
  report["f"] = result.f;
  report["lambda_prime"] = result.lambda_prime;
  if (include_samples) {
    nlohmann::json samples = nlohmann::json::array();
    for (const SampleRecord& rec : result.per_sample) {
      samples.push_back({{"row", subset_to_string(rec.row)},
                         {"col", subset_to_string(rec.col)},
                         {"shots", rec.shots},
                         {"chi", {rec.chi.real(), rec.chi.imag()}},
                         {"x_tilde", {rec.x_tilde.real(), rec.x_tilde.imag()}}});
    }
    report["per_sample"] = std::move(samples);
  }
  return report;
}

}  // namespace mgfe
