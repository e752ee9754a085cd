#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "mgfe/errors.hpp"

namespace mgfe {

using complexd = std::complex<double>;

// Letter codes chosen so that code = x_bit | (z_bit << 1).
enum class PauliLetter : uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

inline char pauli_letter_char(PauliLetter l) {
  switch (l) {
    case PauliLetter::I: return 'I';
    case PauliLetter::X: return 'X';
    case PauliLetter::Z: return 'Z';
    case PauliLetter::Y: return 'Y';
  }
  throw std::invalid_argument("bad Pauli letter code");
}

// An n-qubit Pauli operator  i^phase * L_0 ⊗ L_1 ⊗ ... ⊗ L_{n-1}  stored as
// x/z bitmasks (bit q = qubit q, qubit 0 is the leftmost tensor factor) plus
// a phase exponent in {0,1,2,3}.  The letters are the literal matrices: the
// (x,z) = (1,1) position is Y itself, with no hidden i factors.
class PauliString {
 public:
  explicit PauliString(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 32) {
      throw std::invalid_argument("PauliString supports 1..32 qubits");
    }
  }

  int n_qubits() const { return n_; }

  PauliLetter letter(int q) const {
    check_qubit(q);
    const uint8_t x = (x_ >> q) & 1u;
    const uint8_t z = (z_ >> q) & 1u;
    return static_cast<PauliLetter>(x | (z << 1));
  }

  void set_letter(int q, PauliLetter l) {
    check_qubit(q);
    const auto code = static_cast<uint8_t>(l);
    x_ = (x_ & ~(uint64_t{1} << q)) | (uint64_t{code & 1u} << q);
    z_ = (z_ & ~(uint64_t{1} << q)) | (uint64_t{(code >> 1) & 1u} << q);
  }

  uint8_t phase_exponent() const { return phase_; }
  void set_phase_exponent(uint8_t e) { phase_ = e & 3u; }

  complexd phase() const {
    switch (phase_) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }

  uint64_t x_mask() const { return x_; }
  uint64_t z_mask() const { return z_; }
  uint64_t support_mask() const { return x_ | z_; }
  int support_size() const { return std::popcount(support_mask()); }
  bool is_identity_letters() const { return (x_ | z_) == 0; }

  // Letters with the phase stripped (phase exponent forced to 0).
  PauliString letters_only() const {
    PauliString p = *this;
    p.phase_ = 0;
    return p;
  }

  // Hermitian adjoint: letters are Hermitian, so only the phase conjugates.
  PauliString adjoint() const {
    PauliString p = *this;
    p.phase_ = static_cast<uint8_t>((4 - phase_) & 3u);
    return p;
  }

  bool commutes_with(const PauliString& o) const {
    require_same_n(o);
    const int anti = std::popcount(x_ & o.z_) + std::popcount(z_ & o.x_);
    return (anti & 1) == 0;
  }

  PauliString& operator*=(const PauliString& o) {
    require_same_n(o);
    // Per-qubit phase contribution of (literal letter) * (literal letter):
    // cyclic products XY=iZ, YZ=iX, ZX=iY gain i; the reversed orders gain
    // -i; identical or identity pairs gain nothing.
    uint32_t extra = 0;
    for (int q = 0; q < n_; ++q) {
      const uint8_t a = static_cast<uint8_t>(((x_ >> q) & 1u) | (((z_ >> q) & 1u) << 1));
      const uint8_t b = static_cast<uint8_t>(((o.x_ >> q) & 1u) | (((o.z_ >> q) & 1u) << 1));
      extra += kMulPhase[a][b];
    }
    phase_ = static_cast<uint8_t>((phase_ + o.phase_ + extra) & 3u);
    x_ ^= o.x_;
    z_ ^= o.z_;
    return *this;
  }

  friend PauliString operator*(PauliString a, const PauliString& b) {
    a *= b;
    return a;
  }

  bool operator==(const PauliString& o) const = default;

  // Dense matrix, qubit 0 as the leftmost (most significant) tensor factor.
  Eigen::MatrixXcd to_matrix() const {
    if (n_ > 12) throw capacity_error("dense Pauli matrix limited to 12 qubits");
    const int64_t dim = int64_t{1} << n_;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    const uint64_t xb = index_bits(x_);
    for (int64_t b = 0; b < dim; ++b) {
      m(static_cast<int64_t>(b ^ static_cast<int64_t>(xb)), b) = column_amplitude(b);
    }
    return m;
  }

  // Amplitude of P|b> on basis state |b ^ x_bits>, where b uses the dense
  // index convention (qubit 0 = most significant bit).  The only nonzero
  // entry of column b.
  complexd column_amplitude(uint64_t b) const {
    const uint64_t zb = index_bits(z_);
    const int n_y = std::popcount(x_ & z_);
    const uint32_t e = static_cast<uint32_t>(phase_) + static_cast<uint32_t>(n_y) +
                       2u * static_cast<uint32_t>(std::popcount(b & zb));
    switch (e & 3u) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }

  // x mask translated to dense-index bit positions.
  uint64_t x_index_bits() const { return index_bits(x_); }

  std::string to_string() const {
    static const char* prefix[4] = {"+", "+i", "-", "-i"};
    std::string out = prefix[phase_];
    for (int q = 0; q < n_; ++q) out.push_back(pauli_letter_char(letter(q)));
    return out;
  }

  static PauliString parse(std::string_view text) {
    uint8_t phase = 0;
    size_t pos = 0;
    if (text.empty()) throw std::invalid_argument("empty Pauli string");
    if (text[0] == '+') {
      pos = 1;
    } else if (text[0] == '-') {
      phase = 2;
      pos = 1;
    } else {
      throw std::invalid_argument("Pauli string must start with '+' or '-'");
    }
    if (pos < text.size() && text[pos] == 'i') {
      phase = static_cast<uint8_t>((phase + 1) & 3u);
      ++pos;
    }
    const std::string_view letters = text.substr(pos);
    if (letters.empty()) throw std::invalid_argument("Pauli string has no letters");
    PauliString p(static_cast<int>(letters.size()));
    for (size_t q = 0; q < letters.size(); ++q) {
      switch (letters[q]) {
        case 'I': break;
        case 'X': p.set_letter(static_cast<int>(q), PauliLetter::X); break;
        case 'Y': p.set_letter(static_cast<int>(q), PauliLetter::Y); break;
        case 'Z': p.set_letter(static_cast<int>(q), PauliLetter::Z); break;
        default:
          throw std::invalid_argument(std::string("invalid Pauli letter '") + letters[q] + "'");
      }
    }
    p.set_phase_exponent(phase);
    return p;
  }

 private:
  void check_qubit(int q) const {
    if (q < 0 || q >= n_) throw std::invalid_argument("qubit index out of range");
  }
  void require_same_n(const PauliString& o) const {
    if (n_ != o.n_) throw std::invalid_argument("Pauli strings act on different qubit counts");
  }
  // Translate a qubit-indexed mask (bit q = qubit q) into dense basis-index
  // bit positions (qubit 0 = most significant of n bits).
  uint64_t index_bits(uint64_t qubit_mask) const {
    uint64_t out = 0;
    for (int q = 0; q < n_; ++q) {
      if (qubit_mask & (uint64_t{1} << q)) out |= uint64_t{1} << (n_ - 1 - q);
    }
    return out;
  }

  static constexpr uint8_t kMulPhase[4][4] = {
      // rhs:  I  X  Z  Y
      {0, 0, 0, 0},  // lhs I
      {0, 0, 3, 1},  // lhs X:  XZ=-iY, XY=iZ
      {0, 1, 0, 3},  // lhs Z:  ZX=iY,  ZY=-iX
      {0, 3, 1, 0},  // lhs Y:  YX=-iZ, YZ=iX
  };

  int n_;
  uint64_t x_ = 0;
  uint64_t z_ = 0;
  uint8_t phase_ = 0;
};

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Hilbert-Schmidt pairing Tr(P† M) using the one-nonzero-per-column structure
// of P.  O(2^n) instead of a dense trace.
inline complexd pauli_hs_inner(const PauliString& p, const Eigen::MatrixXcd& m) {
  const int64_t dim = int64_t{1} << p.n_qubits();
  if (m.rows() != dim || m.cols() != dim) {
    throw std::invalid_argument("matrix dimension does not match Pauli qubit count");
  }
  const uint64_t xb = p.x_index_bits();
  complexd acc = 0.0;
  for (int64_t b = 0; b < dim; ++b) {
    acc += std::conj(p.column_amplitude(static_cast<uint64_t>(b))) *
           m(static_cast<int64_t>(static_cast<uint64_t>(b) ^ xb), b);
  }
  return acc;
}

// Tr(P M): the transpose pairing, same sparsity trick.
inline complexd pauli_trace_product(const PauliString& p, const Eigen::MatrixXcd& m) {
  const int64_t dim = int64_t{1} << p.n_qubits();
  if (m.rows() != dim || m.cols() != dim) {
    throw std::invalid_argument("matrix dimension does not match Pauli qubit count");
  }
  const uint64_t xb = p.x_index_bits();
  complexd acc = 0.0;
  for (int64_t b = 0; b < dim; ++b) {
    acc += p.column_amplitude(static_cast<uint64_t>(b)) *
           m(b, static_cast<int64_t>(static_cast<uint64_t>(b) ^ xb));
  }
  return acc;
}

}  // namespace mgfe
