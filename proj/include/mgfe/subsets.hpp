#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mgfe/errors.hpp"

namespace mgfe {

// A subset of {1, ..., m} as a strictly increasing list of 1-based indices.
// Used to label Majorana monomials c_I; the empty subset labels the identity.
using Subset = std::vector<int>;

// Binomial coefficient, exact in uint64.  Guarded at n <= 61 so the
// multiplicative form cannot overflow an intermediate; the library itself
// never needs more than C(32, 16).
inline uint64_t binomial(int n, int k) {
  if (n > 61) throw std::invalid_argument("binomial limited to n <= 61");
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  // multiplicative form, dividing as we go so intermediates stay exact
  uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<uint64_t>(n - k + i) / static_cast<uint64_t>(i);
  }
  return r;
}

inline void validate_subset(const Subset& s, int m) {
  int prev = 0;
  for (int v : s) {
    if (v <= prev || v > m) {
      throw std::invalid_argument("subset must be strictly increasing with entries in [1, " +
                                  std::to_string(m) + "]");
    }
    prev = v;
  }
}

// Zero-based rank of s within the lexicographic order of all k-subsets of
// {1, ..., m}:  {1,2} < {1,3} < ... < {m-1,m}.
inline uint64_t subset_rank(const Subset& s, int m) {
  validate_subset(s, m);
  const int k = static_cast<int>(s.size());
  uint64_t rank = 0;
  int prev = 0;
  for (int t = 0; t < k; ++t) {
    for (int v = prev + 1; v < s[t]; ++v) {
      rank += binomial(m - v, k - t - 1);
    }
    prev = s[t];
  }
  return rank;
}

inline Subset rank_to_subset(uint64_t rank, int k, int m) {
  if (k < 0 || k > m) throw std::invalid_argument("subset size out of range");
  if (rank >= binomial(m, k)) throw std::invalid_argument("subset rank out of range");
  Subset s;
  s.reserve(k);
  int v = 1;
  for (int t = 0; t < k; ++t) {
    while (true) {
      const uint64_t below = binomial(m - v, k - t - 1);
      if (rank < below) break;
      rank -= below;
      ++v;
    }
    s.push_back(v);
    ++v;
  }
  return s;
}

// Offset of the degree-k block when subsets of {1, ..., m} are listed by
// increasing size, each size lexicographically.
inline uint64_t block_offset(int k, int m) {
  uint64_t off = 0;
  for (int j = 0; j < k; ++j) off += binomial(m, j);
  return off;
}

inline uint64_t subset_global_index(const Subset& s, int m) {
  return block_offset(static_cast<int>(s.size()), m) + subset_rank(s, m);
}

inline Subset global_index_to_subset(uint64_t idx, int m) {
  for (int k = 0; k <= m; ++k) {
    const uint64_t count = binomial(m, k);
    if (idx < count) return rank_to_subset(idx, k, m);
    idx -= count;
  }
  throw std::invalid_argument("global subset index out of range");
}

// Bitmask form (bit i-1 set <=> index i is in the subset).  Only valid for
// m <= 32, which covers every enumeration path in this library.
inline uint32_t subset_to_mask(const Subset& s) {
  uint32_t mask = 0;
  for (int v : s) mask |= 1u << (v - 1);
  return mask;
}

inline Subset mask_to_subset(uint32_t mask, int m) {
  Subset s;
  for (int v = 1; v <= m; ++v) {
    if (mask & (1u << (v - 1))) s.push_back(v);
  }
  return s;
}

// Table mapping bitmask -> global index for all subsets of {1, ..., m}.
// Handy when walking masks in numeric order but indexing block-wise.
inline std::vector<uint32_t> global_index_by_mask(int m) {
  if (m > 20) throw capacity_error("subset mask table limited to m <= 20");
  std::vector<uint32_t> table(uint64_t{1} << m);
  uint32_t idx = 0;
  for (int k = 0; k <= m; ++k) {
    const uint64_t count = binomial(m, k);
    for (uint64_t r = 0; r < count; ++r) {
      table[subset_to_mask(rank_to_subset(r, k, m))] = idx++;
    }
  }
  return table;
}

// Compact text form used in CSV exports: digits 1-9 then letters a-g for
// indices 10-16 (one character per index, empty string for the empty set).
inline char subset_index_char(int v) {
  if (v >= 1 && v <= 9) return static_cast<char>('0' + v);
  if (v >= 10 && v <= 16) return static_cast<char>('a' + (v - 10));
  throw std::invalid_argument("subset index " + std::to_string(v) +
                              " has no single-character form (max 16)");
}

inline std::string subset_to_string(const Subset& s) {
  std::string out;
  out.reserve(s.size());
  for (int v : s) out.push_back(subset_index_char(v));
  return out;
}

inline Subset subset_from_string(std::string_view text) {
  Subset s;
  s.reserve(text.size());
  int prev = 0;
  for (char c : text) {
    int v = 0;
    if (c >= '1' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'g') {
      v = 10 + (c - 'a');
    } else {
      throw std::invalid_argument(std::string("invalid subset character '") + c + "'");
    }
    if (v <= prev) throw std::invalid_argument("subset string must be strictly increasing");
    s.push_back(v);
    prev = v;
  }
  return s;
}

}  // namespace mgfe
