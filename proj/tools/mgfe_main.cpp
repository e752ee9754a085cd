// Command-line front end: superoperator tables, estimator benchmarks, rotation
// tomography, Euler-angle decompositions, and Clifford-sandwich runs.
//
// Every command validates its configuration first, computes everything in
// memory, and only then writes output files, so a failed invocation never
// leaves partial results behind.  Reruns with the same arguments produce
// byte-identical files.

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mgfe/mgfe.hpp"

namespace {

using namespace mgfe;

// Seed derivation tags, so the circuit draw, the estimator stream, and the
// tomography stream never share raw generator state.
constexpr uint64_t kTagCircuit = 1;
constexpr uint64_t kTagEstimator = 2;
constexpr uint64_t kTagTomography = 3;

std::string show(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Shortest decimal form that parses back to the same double; used for tokens
// that are both displayed and re-parsed.
std::string shortest(double v) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::filesystem::path prepare_out_dir(const std::string& out) {
  std::filesystem::path dir(out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::invalid_argument("cannot create output directory '" + out + "': " + ec.message());
  }
  return dir;
}

// Buffered output files: contents are collected while computing and flushed
// to disk in one pass at the very end of a command.
struct OutputSet {
  std::filesystem::path dir;
  std::vector<std::pair<std::string, std::string>> files;

  void add(std::string name, std::string content) {
    files.emplace_back(std::move(name), std::move(content));
  }

  void flush() const {
    for (const auto& [name, content] : files) {
      const std::filesystem::path path = dir / name;
      std::ofstream out(path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
      out << content;
      out.flush();
      if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
      std::cout << "wrote " << path.string() << "\n";
    }
  }
};

// ---------------------------------------------------------------------------
// circuit sources
// ---------------------------------------------------------------------------

struct SourceFlags {
  std::string circuit;  // --circuit: a .mgc path or haar|identity|givens|xy|fsim:theta:phi
  bool haar = false;
  bool identity = false;
  bool givens = false;
  bool xy = false;
  std::vector<double> fsim;  // --fsim theta phi
};

void add_source_flags(CLI::App* cmd, SourceFlags& s) {
  cmd->add_option("--circuit", s.circuit,
                  "circuit source: path to a .mgc file, or haar|identity|givens|xy|fsim:theta:phi");
  cmd->add_flag("--haar", s.haar, "Haar-random matchgate (needs -n)");
  cmd->add_flag("--identity", s.identity, "identity circuit (needs -n)");
  cmd->add_flag("--givens", s.givens, "random Givens-restricted matchgate (needs -n)");
  cmd->add_flag("--xy", s.xy, "random XY-restricted matchgate (needs -n)");
  cmd->add_option("--fsim", s.fsim, "fsim gate: theta phi")->expected(2);
}

std::string source_token(const SourceFlags& s) {
  std::vector<std::string> picked;
  if (!s.circuit.empty()) picked.push_back(s.circuit);
  if (s.haar) picked.push_back("haar");
  if (s.identity) picked.push_back("identity");
  if (s.givens) picked.push_back("givens");
  if (s.xy) picked.push_back("xy");
  if (!s.fsim.empty()) {
    picked.push_back("fsim:" + shortest(s.fsim[0]) + ":" + shortest(s.fsim[1]));
  }
  if (picked.empty()) {
    throw std::invalid_argument(
        "no circuit source given; use --circuit, --haar, --identity, --givens, --xy, or --fsim");
  }
  if (picked.size() > 1) {
    throw std::invalid_argument("more than one circuit source given");
  }
  return picked.front();
}

struct ResolvedCircuit {
  int n = 0;
  std::optional<Rotation> rotation;  // absent only for the non-matchgate fsim case
  Eigen::MatrixXcd unitary;          // empty above 10 qubits
  std::string source;
};

const Eigen::MatrixXcd& need_unitary(const ResolvedCircuit& rc) {
  if (rc.unitary.rows() == 0) {
    throw capacity_error("dense simulation of this command is limited to 10 qubits");
  }
  return rc.unitary;
}

int require_n(int n_flag, const std::string& what) {
  if (n_flag < 1) throw std::invalid_argument("a qubit count (-n) is required for " + what);
  return n_flag;
}

ResolvedCircuit resolve_circuit(const std::string& token, int n_flag, uint64_t seed) {
  ResolvedCircuit rc;
  rc.source = token;
  if (token == "haar") {
    rc.n = require_n(n_flag, "--haar");
    rc.rotation = haar_random_rotation(rc.n, seed);
  } else if (token == "identity") {
    rc.n = require_n(n_flag, "--identity");
    rc.rotation = Rotation(Eigen::MatrixXd::Identity(2 * rc.n, 2 * rc.n));
    if (rc.n <= 10) {
      const int64_t dim = int64_t{1} << rc.n;
      rc.unitary = Eigen::MatrixXcd::Identity(dim, dim);
    }
    return rc;
  } else if (token == "givens" || token == "xy") {
    rc.n = require_n(n_flag, "--" + token);
    if (rc.n < 2) throw std::invalid_argument("--" + token + " needs at least two qubits");
    const Eigen::MatrixXd tilde = haar_special_orthogonal(rc.n, seed);
    rc.rotation =
        token == "givens" ? givens_rotation_from_reduced(tilde) : xy_rotation_from_reduced(tilde);
  } else if (token.rfind("fsim:", 0) == 0) {
    std::vector<std::string> parts;
    std::string rest = token;
    size_t colon = 0;
    while ((colon = rest.find(':')) != std::string::npos) {
      parts.push_back(rest.substr(0, colon));
      rest = rest.substr(colon + 1);
    }
    parts.push_back(rest);
    if (parts.size() != 3) {
      throw std::invalid_argument("fsim source must be of the form fsim:theta:phi");
    }
    const double theta = parse_double(parts[1]);
    const double phi = parse_double(parts[2]);
    const Eigen::Matrix4cd g = fsim_gate(theta, phi);
    if (std::abs(std::remainder(phi, 2.0 * std::numbers::pi)) < 1e-12) {
      rc.n = n_flag > 0 ? n_flag : 2;
      if (rc.n < 2) throw std::invalid_argument("the fsim gate needs at least two qubits");
      MatchgateCircuit circ(rc.n);
      circ.add_gate(1, g);
      rc.rotation = circuit_to_rotation(circ);
      if (rc.n <= 10) rc.unitary = circ.unitary();
      return rc;
    }
    if (n_flag > 0 && n_flag != 2) {
      throw std::invalid_argument(
          "an fsim gate with a nonzero phase is not a matchgate and only runs on exactly two "
          "qubits");
    }
    rc.n = 2;
    rc.unitary = g;
    return rc;
  } else {
    const MatchgateCircuit circ = parse_matchgate_circuit(read_text_file(token), n_flag);
    rc.n = circ.n_qubits();
    rc.rotation = circuit_to_rotation(circ);
    if (rc.n <= 10) rc.unitary = circ.unitary();
    return rc;
  }
  if (rc.n <= 10) rc.unitary = unitary_from_rotation(*rc.rotation);
  return rc;
}

// ---------------------------------------------------------------------------
// noise
// ---------------------------------------------------------------------------

NoisyChannel build_channel(const Eigen::MatrixXcd& u, const std::vector<std::string>& noise) {
  std::vector<NoisyChannel> parts;
  parts.emplace_back(u);
  const int n = parts.front().n_qubits();
  for (const std::string& token : noise) {
    if (token == "none") continue;
    const size_t colon = token.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("noise spec '" + token + "' is not of the form kind:param");
    }
    const std::string kind = token.substr(0, colon);
    const double value = parse_double(token.substr(colon + 1));
    if (kind == "depolarizing") {
      parts.push_back(depolarizing(n, value));
    } else if (kind == "amplitude_damping") {
      parts.push_back(amplitude_damping(n, value));
    } else if (kind == "phase_damping") {
      parts.push_back(phase_damping(n, value));
    } else {
      throw std::invalid_argument("unknown noise kind '" + kind +
                                  "' (use depolarizing, amplitude_damping, or phase_damping)");
    }
  }
  return parts.size() == 1 ? parts.front() : composed(parts);
}

// ---------------------------------------------------------------------------
// small numeric helpers
// ---------------------------------------------------------------------------

double max_superop_diff(const SparseSuperOp& a, const SparseSuperOp& b) {
  double worst = 0.0;
  const auto& ae = a.entries();
  const auto& be = b.entries();
  for (const auto& [key, value] : ae) {
    const auto it = be.find(key);
    const complexd other = it == be.end() ? complexd{} : it->second;
    worst = std::max(worst, std::abs(value - other));
  }
  for (const auto& [key, value] : be) {
    if (ae.find(key) == ae.end()) worst = std::max(worst, std::abs(value));
  }
  return worst;
}

double phase_aligned_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const complexd overlap = (a.adjoint() * b).trace();
  const complexd phase =
      std::abs(overlap) < 1e-12 ? complexd{1.0, 0.0} : overlap / std::abs(overlap);
  return (a * phase - b).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// superop
// ---------------------------------------------------------------------------

struct SuperopOptions {
  SourceFlags source;
  int n = 0;
  uint64_t seed = 0;
  bool compare_euler = false;
  std::string out = ".";
};

void run_superop(const SuperopOptions& opt) {
  const std::string token = source_token(opt.source);
  const std::filesystem::path out_dir = prepare_out_dir(opt.out);
  const ResolvedCircuit rc = resolve_circuit(token, opt.n, derive_seed(opt.seed, kTagCircuit));

  struct SupInfo {
    SparseSuperOp sup;
    int64_t nonzeros;
    double alpha;
  };
  const SupInfo info = [&]() -> SupInfo {
    if (rc.rotation) {
      SparseSuperOp sup = matchgate_superop(*rc.rotation);
      const int64_t nz = sparsity_count(sup);
      const double alpha = well_conditioning_alpha(sup);
      return {std::move(sup), nz, alpha};
    }
    const DenseSuperOp dense = brute_force_superop(NoisyChannel(need_unitary(rc)));
    return {sparse_from_dense(dense, false), sparsity_count(dense),
            well_conditioning_alpha(dense)};
  }();

  const uint64_t side = info.sup.side();
  bool diagonal_only = true;
  for (const auto& [key, value] : info.sup.entries()) {
    if (key.first != key.second) {
      diagonal_only = false;
      break;
    }
  }

  nlohmann::json report{
      {"schema_version", 1},
      {"command", "superop"},
      {"source", rc.source},
      {"n_qubits", rc.n},
      {"side", side},
      {"nonzero_entries", info.nonzeros},
      {"density", static_cast<double>(info.nonzeros) /
                      (static_cast<double>(side) * static_cast<double>(side))},
      {"alpha", info.alpha},
      {"diagonal_only", diagonal_only},
      {"matchgate", rc.rotation.has_value()},
  };

  double disagreement = 0.0;
  int factor_count = 0;
  if (opt.compare_euler) {
    if (!rc.rotation) throw std::invalid_argument("--compare-euler needs a matchgate source");
    const SparseSuperOp via_euler = assemble_superop_via_euler(*rc.rotation, &factor_count);
    disagreement = max_superop_diff(info.sup, via_euler);
    report["compare_euler"] = {{"factor_count", factor_count},
                               {"max_disagreement", disagreement}};
  }

  OutputSet files{out_dir, {}};
  files.add("superop.csv", write_superop_csv(info.sup));
  files.add("superop_report.json", report.dump(2) + "\n");

  std::cout << "source: " << rc.source << "\n"
            << "n qubits: " << rc.n << ", superoperator side: " << side << "\n"
            << "nonzero entries: " << info.nonzeros << " of " << side * side << "\n"
            << "well-conditioning alpha: " << show(info.alpha) << "\n";
  if (diagonal_only) std::cout << "all nonzero entries are diagonal\n";
  if (opt.compare_euler) {
    std::cout << "euler-assembly factors: " << factor_count
              << ", max disagreement: " << show(disagreement) << "\n";
  }
  files.flush();
}

// ---------------------------------------------------------------------------
// euler
// ---------------------------------------------------------------------------

struct EulerOptions {
  SourceFlags source;
  int n = 0;
  uint64_t seed = 0;
  std::string out = ".";
};

void run_euler(const EulerOptions& opt) {
  const std::string token = source_token(opt.source);
  const std::filesystem::path out_dir = prepare_out_dir(opt.out);
  const ResolvedCircuit rc = resolve_circuit(token, opt.n, derive_seed(opt.seed, kTagCircuit));
  if (!rc.rotation) throw std::invalid_argument("the Euler decomposition needs a matchgate source");

  const EulerAngles angles = euler_angles(*rc.rotation);
  const Rotation rebuilt = rotation_from_angles(angles);
  const double residual = (rebuilt.matrix() - rc.rotation->matrix()).cwiseAbs().maxCoeff();
  int64_t nonzero = 0, total = 0;
  for (const std::vector<double>& row : angles.theta) {
    for (double theta : row) {
      ++total;
      if (std::abs(theta) > 1e-12) ++nonzero;
    }
  }

  const nlohmann::json report{
      {"schema_version", 1},    {"command", "euler"},
      {"source", rc.source},    {"n_qubits", rc.n},
      {"dim", angles.dim},      {"round_trip_residual", residual},
      {"nonzero_angles", nonzero}, {"total_angles", total},
  };

  OutputSet files{out_dir, {}};
  files.add("euler_angles.csv", write_euler_table(angles));
  files.add("euler_report.json", report.dump(2) + "\n");

  std::cout << "source: " << rc.source << "\n"
            << "rotation dimension: " << angles.dim << "\n"
            << "angles: " << total << " total, " << nonzero << " nonzero\n"
            << "round-trip residual: " << show(residual) << "\n";
  files.flush();
}

// ---------------------------------------------------------------------------
// tomography
// ---------------------------------------------------------------------------

struct TomographyOptions {
  SourceFlags source;
  int n = 0;
  uint64_t seed = 0;
  uint64_t shots = 4000;
  std::vector<std::string> noise;
  std::string out = ".";
};

void run_tomography(const TomographyOptions& opt) {
  const std::string token = source_token(opt.source);
  const std::filesystem::path out_dir = prepare_out_dir(opt.out);
  const ResolvedCircuit rc = resolve_circuit(token, opt.n, derive_seed(opt.seed, kTagCircuit));
  if (!rc.rotation) throw std::invalid_argument("tomography needs a matchgate source");

  const NoisyChannel ch = build_channel(need_unitary(rc), opt.noise);
  TomographyConfig cfg;
  cfg.shots_per_entry = opt.shots;
  cfg.seed = derive_seed(opt.seed, kTagTomography);

  const Eigen::MatrixXd raw = estimate_rotation(ch, cfg);
  const Rotation projected = project_to_special_orthogonal(raw);
  const ReconstructedUnitary rec = reconstruct_hamiltonian(projected);

  const double raw_error = (raw - rc.rotation->matrix()).cwiseAbs().maxCoeff();
  const double projected_error =
      (projected.matrix() - rc.rotation->matrix()).cwiseAbs().maxCoeff();
  const double unitary_error = phase_aligned_distance(rec.u, need_unitary(rc));

  const nlohmann::json report{
      {"schema_version", 1},
      {"command", "tomography"},
      {"source", rc.source},
      {"n_qubits", rc.n},
      {"shots_per_entry", opt.shots},
      {"noise", opt.noise},
      {"raw_max_error", raw_error},
      {"projected_max_error", projected_error},
      {"unitary_max_error_up_to_phase", unitary_error},
  };

  OutputSet files{out_dir, {}};
  files.add("rotation_raw.txt", write_matrix(raw));
  files.add("rotation_projected.txt", write_matrix(projected.matrix()));
  files.add("hamiltonian.txt", write_matrix(rec.h.matrix()));
  files.add("unitary.txt", write_complex_matrix(rec.u));
  files.add("tomography_report.json", report.dump(2) + "\n");

  std::cout << "source: " << rc.source << ", shots per entry: " << opt.shots << "\n"
            << "raw rotation max error: " << show(raw_error) << "\n"
            << "projected rotation max error: " << show(projected_error) << "\n"
            << "reconstructed unitary max error (up to phase): " << show(unitary_error) << "\n";
  files.flush();
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchmarkOptions {
  SourceFlags source;
  int n = 0;
  uint64_t seed = 0;
  uint64_t runs = 50;
  double eps = 0.1;
  double delta = 0.05;
  double alpha = 0.0;
  bool has_alpha = false;
  std::string bound = "box";
  std::vector<std::string> noise;
  uint64_t m_cap = 1000000;
  unsigned threads = 0;
  std::string out = ".";
};

struct RunRow {
  double oracle = std::numeric_limits<double>::quiet_NaN();
  double y_tilde = 0.0;
  double low = 0.0;
  double high = 0.0;
  double f = 0.0;
  uint64_t total_shots = 0;
  double expected_bound = 0.0;
};

void run_benchmark(const BenchmarkOptions& opt) {
  const std::string token = source_token(opt.source);
  const std::filesystem::path out_dir = prepare_out_dir(opt.out);
  if (opt.runs < 1) throw std::invalid_argument("--runs must be at least 1");
  const MmuBound bound = opt.bound == "box" ? MmuBound::box : MmuBound::appendix;
  const std::optional<double> alpha =
      opt.has_alpha ? std::optional<double>(opt.alpha) : std::nullopt;

  // Probe resolution: fails fast on bad sources and pins the qubit count for
  // the report before any worker starts.
  const ResolvedCircuit probe =
      resolve_circuit(token, opt.n, derive_seed(derive_seed(opt.seed, 1), kTagCircuit));

  std::vector<RunRow> rows(opt.runs);
  std::atomic<uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto do_run = [&](uint64_t i) {
    const uint64_t run_seed = derive_seed(opt.seed, i + 1);
    const ResolvedCircuit rc = resolve_circuit(token, opt.n, derive_seed(run_seed, kTagCircuit));
    const SparseSuperOp sup =
        rc.rotation ? matchgate_superop(*rc.rotation)
                    : sparse_from_dense(brute_force_superop(need_unitary(rc)), false);
    const NoisyChannel ch = build_channel(need_unitary(rc), opt.noise);
    const EstimationPlan plan = plan_runtime(opt.eps, opt.delta, sup, alpha, bound, opt.m_cap);
    const EstimationResult est =
        estimate_fidelity(sup, ch, plan, derive_seed(run_seed, kTagEstimator));
    RunRow row;
    row.y_tilde = est.y_tilde;
    row.low = est.f_e_low;
    row.high = est.f_e_high;
    row.f = est.f;
    row.total_shots = est.total_shots;
    row.expected_bound = plan.expected_shot_bound;
    if (rc.n <= 6) row.oracle = entanglement_fidelity(sup, brute_force_superop(ch));
    rows[i] = row;
  };

  const auto worker = [&]() {
    while (!failed.load()) {
      const uint64_t i = next.fetch_add(1);
      if (i >= opt.runs) break;
      try {
        do_run(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const uint64_t n_threads =
      std::min<uint64_t>(opt.threads > 0 ? opt.threads : hw, opt.runs);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (uint64_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::string csv = "run,f_e_oracle,y_tilde,f_e_low,f_e_high,f,total_shots,covered\n";
  uint64_t covered = 0, with_oracle = 0;
  double shot_sum = 0.0, bound_sum = 0.0;
  for (uint64_t i = 0; i < opt.runs; ++i) {
    const RunRow& r = rows[i];
    const bool have_oracle = !std::isnan(r.oracle);
    const bool inside = have_oracle && std::abs(r.y_tilde - r.oracle) <= 2.0 * opt.eps;
    csv += std::to_string(i + 1) + ',';
    csv += have_oracle ? format_double(r.oracle) : std::string();
    csv += ',' + format_double(r.y_tilde) + ',' + format_double(r.low) + ',' +
           format_double(r.high) + ',' + format_double(r.f) + ',' +
           std::to_string(r.total_shots) + ',';
    csv += have_oracle ? (inside ? "1" : "0") : "";
    csv += '\n';
    with_oracle += have_oracle ? 1 : 0;
    covered += inside ? 1 : 0;
    shot_sum += static_cast<double>(r.total_shots);
    bound_sum += r.expected_bound;
  }

  nlohmann::json report{
      {"schema_version", 1},
      {"command", "benchmark"},
      {"source", token},
      {"n_qubits", probe.n},
      {"runs", opt.runs},
      {"epsilon", opt.eps},
      {"delta", opt.delta},
      {"mode", alpha ? "well_conditioned" : "general"},
      {"bound", opt.bound},
      {"m_cap", opt.m_cap},
      {"noise", opt.noise},
      {"mean_total_shots", shot_sum / static_cast<double>(opt.runs)},
      {"mean_expected_shot_bound", bound_sum / static_cast<double>(opt.runs)},
      {"oracle_runs", with_oracle},
      {"covered_runs", covered},
  };
  if (alpha) report["alpha"] = *alpha;
  if (with_oracle > 0) {
    report["coverage_fraction"] =
        static_cast<double>(covered) / static_cast<double>(with_oracle);
  }

  OutputSet files{out_dir, {}};
  files.add("runs.csv", csv);
  files.add("benchmark_report.json", report.dump(2) + "\n");

  std::cout << "runs: " << opt.runs << " (" << token << ", n=" << probe.n << ")\n"
            << "mean total shots: " << show(shot_sum / static_cast<double>(opt.runs))
            << " (a-priori bound " << show(bound_sum / static_cast<double>(opt.runs)) << ")\n";
  if (with_oracle > 0) {
    std::cout << "coverage: " << covered << " of " << with_oracle
              << " runs within 2*eps of the oracle entanglement fidelity\n";
  }
  files.flush();
}

// ---------------------------------------------------------------------------
// sandwich
// ---------------------------------------------------------------------------

struct SandwichOptions {
  SourceFlags source;
  int n = 0;
  uint64_t seed = 0;
  std::string v1;
  std::string v2;
  double eps = 0.1;
  double delta = 0.05;
  double alpha = 0.0;
  bool has_alpha = false;
  std::string bound = "box";
  std::vector<std::string> noise;
  uint64_t m_cap = 1000000;
  bool shot_log = false;
  std::string out = ".";
};

void run_sandwich(const SandwichOptions& opt) {
  const std::string token = source_token(opt.source);
  const std::filesystem::path out_dir = prepare_out_dir(opt.out);
  const ResolvedCircuit rc = resolve_circuit(token, opt.n, derive_seed(opt.seed, kTagCircuit));
  if (!rc.rotation) {
    throw std::invalid_argument("the sandwich estimator needs a matchgate inner circuit");
  }

  const CliffordCircuit v1 =
      opt.v1.empty() ? CliffordCircuit{} : parse_clifford_circuit(read_text_file(opt.v1));
  const CliffordCircuit v2 =
      opt.v2.empty() ? CliffordCircuit{} : parse_clifford_circuit(read_text_file(opt.v2));
  for (const CliffordGate& g : v1) validate_gate(g, rc.n);
  for (const CliffordGate& g : v2) validate_gate(g, rc.n);

  const Eigen::MatrixXcd w =
      clifford_unitary(v2, rc.n) * need_unitary(rc) * clifford_unitary(v1, rc.n);
  const NoisyChannel ch = build_channel(w, opt.noise);
  const SparseSuperOp sup_u = matchgate_superop(*rc.rotation);
  const MmuBound bound = opt.bound == "box" ? MmuBound::box : MmuBound::appendix;
  const std::optional<double> alpha =
      opt.has_alpha ? std::optional<double>(opt.alpha) : std::nullopt;
  const EstimationPlan plan = plan_runtime(opt.eps, opt.delta, sup_u, alpha, bound, opt.m_cap);

  std::ostringstream shot_stream;
  ShotObserver observer;
  if (opt.shot_log) {
    shot_stream << shot_log_header();
    observer = make_shot_logger(shot_stream);
  }

  const EstimationResult est = clifford_sandwich_estimate(
      sup_u, v1, v2, ch, plan, derive_seed(opt.seed, kTagEstimator), observer);

  nlohmann::json report = estimation_report(plan, est, true);
  report["command"] = "sandwich";
  report["source"] = rc.source;
  report["n_qubits"] = rc.n;
  report["v1_gates"] = v1.size();
  report["v2_gates"] = v2.size();
  report["noise"] = opt.noise;
  bool have_oracle = false;
  double oracle = 0.0;
  if (rc.n <= 6) {
    oracle = entanglement_fidelity(sparse_from_dense(brute_force_superop(w), false),
                                   brute_force_superop(ch));
    have_oracle = true;
    report["oracle_f_e"] = oracle;
    report["covered"] = std::abs(est.y_tilde - oracle) <= 2.0 * opt.eps;
  }

  OutputSet files{out_dir, {}};
  files.add("sandwich_report.json", report.dump(2) + "\n");
  if (opt.shot_log) files.add("shots.csv", shot_stream.str());

  std::cout << "estimated entanglement fidelity: " << show(est.y_tilde) << " in ["
            << show(est.f_e_low) << ", " << show(est.f_e_high) << "]\n"
            << "channel fidelity estimate: " << show(est.f) << "\n"
            << "total shots: " << est.total_shots << "\n";
  if (have_oracle) {
    std::cout << "oracle entanglement fidelity: " << show(oracle) << " ("
              << (std::abs(est.y_tilde - oracle) <= 2.0 * opt.eps ? "inside" : "outside")
              << " the interval)\n";
  }
  files.flush();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matchgate fidelity estimation toolkit"};
  app.require_subcommand(1);

  SuperopOptions so;
  CLI::App* superop =
      app.add_subcommand("superop", "transition-amplitude table of a circuit");
  add_source_flags(superop, so.source);
  superop->add_option("-n,--qubits", so.n, "qubit count (required for generated sources)");
  superop->add_option("--seed", so.seed, "master seed");
  superop->add_flag("--compare-euler", so.compare_euler,
                    "also assemble the table from the Euler factorization and report the "
                    "largest disagreement");
  superop->add_option("--out", so.out, "output directory");
  superop->callback([&so] { run_superop(so); });

  EulerOptions eo;
  CLI::App* euler = app.add_subcommand("euler", "Euler-angle decomposition of a rotation");
  add_source_flags(euler, eo.source);
  euler->add_option("-n,--qubits", eo.n, "qubit count (required for generated sources)");
  euler->add_option("--seed", eo.seed, "master seed");
  euler->add_option("--out", eo.out, "output directory");
  euler->callback([&eo] { run_euler(eo); });

  TomographyOptions to;
  CLI::App* tomography =
      app.add_subcommand("tomography", "estimate the rotation of a channel from shots");
  add_source_flags(tomography, to.source);
  tomography->add_option("-n,--qubits", to.n, "qubit count (required for generated sources)");
  tomography->add_option("--seed", to.seed, "master seed");
  tomography->add_option("--shots", to.shots, "shots per matrix entry");
  tomography->add_option("--noise", to.noise,
                         "noise stage kind:param (repeatable); kinds: depolarizing, "
                         "amplitude_damping, phase_damping");
  tomography->add_option("--out", to.out, "output directory");
  tomography->callback([&to] { run_tomography(to); });

  BenchmarkOptions bo;
  CLI::App* benchmark =
      app.add_subcommand("benchmark", "repeated fidelity estimation over seeded runs");
  add_source_flags(benchmark, bo.source);
  benchmark->add_option("-n,--qubits", bo.n, "qubit count (required for generated sources)");
  benchmark->add_option("--seed", bo.seed, "master seed");
  benchmark->add_option("--runs", bo.runs, "number of independent runs");
  benchmark->add_option("--eps", bo.eps, "target additive error on the entanglement fidelity");
  benchmark->add_option("--delta", bo.delta, "failure probability budget (per tail)");
  CLI::Option* bench_alpha = benchmark->add_option(
      "--alpha", bo.alpha, "claimed well-conditioning bound in (0, 1]; omit for general mode");
  benchmark->add_option("--bound", bo.bound, "per-pair shot rule")
      ->check(CLI::IsMember({"box", "appendix"}));
  benchmark->add_option("--noise", bo.noise,
                        "noise stage kind:param (repeatable); kinds: depolarizing, "
                        "amplitude_damping, phase_damping");
  benchmark->add_option("--m-cap", bo.m_cap, "abort threshold for a single pair's shot count");
  benchmark->add_option("--threads", bo.threads, "worker threads (default: hardware)");
  benchmark->add_option("--out", bo.out, "output directory");
  benchmark->callback([&bo, bench_alpha] {
    bo.has_alpha = bench_alpha->count() > 0;
    run_benchmark(bo);
  });

  SandwichOptions wo;
  CLI::App* sandwich = app.add_subcommand(
      "sandwich", "fidelity estimation for a Clifford-matchgate-Clifford sandwich");
  add_source_flags(sandwich, wo.source);
  sandwich->add_option("-n,--qubits", wo.n, "qubit count (required for generated sources)");
  sandwich->add_option("--seed", wo.seed, "master seed");
  sandwich->add_option("--v1", wo.v1, "Clifford layer applied before the circuit (.clf file)");
  sandwich->add_option("--v2", wo.v2, "Clifford layer applied after the circuit (.clf file)");
  sandwich->add_option("--eps", wo.eps, "target additive error on the entanglement fidelity");
  sandwich->add_option("--delta", wo.delta, "failure probability budget (per tail)");
  CLI::Option* sand_alpha = sandwich->add_option(
      "--alpha", wo.alpha, "claimed well-conditioning bound in (0, 1]; omit for general mode");
  sandwich->add_option("--bound", wo.bound, "per-pair shot rule")
      ->check(CLI::IsMember({"box", "appendix"}));
  sandwich->add_option("--noise", wo.noise,
                       "noise stage kind:param (repeatable); kinds: depolarizing, "
                       "amplitude_damping, phase_damping");
  sandwich->add_option("--m-cap", wo.m_cap, "abort threshold for a single pair's shot count");
  sandwich->add_flag("--shot-log", wo.shot_log, "also write a per-shot CSV log");
  sandwich->add_option("--out", wo.out, "output directory");
  sandwich->callback([&wo, sand_alpha] {
    wo.has_alpha = sand_alpha->count() > 0;
    run_sandwich(wo);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e);
    app.exit(e);
    return 2;
  } catch (const capacity_error& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 3;
  } catch (const branch_ambiguity_error& e) {
    std::cerr << "branch ambiguity: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "runtime guard: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
