#pragma once
// Fermionic Fock-space bit algebra shared by the gauge-basis construction,
// the two-site gates and the exact-diagonalization embeddings.
//
// Mode convention on a composite site: (R-up, R-dn, M-up, M-dn, L-up, L-dn).
// Canonical basis states are creation-operator strings applied in ascending
// mode order; every sign below follows from that single convention.

#include <cstdint>
#include <optional>
#include <vector>

namespace su2qlm::fock {

using Mask = std::uint32_t;

inline constexpr int modes_per_site = 6;

enum Mode : int { RUp = 0, RDn = 1, MUp = 2, MDn = 3, LUp = 4, LDn = 5 };

inline bool occupied(Mask m, int mode) { return (m >> mode) & 1u; }

inline int popcount(Mask m) { return __builtin_popcount(m); }

inline int popcount_below(Mask m, int mode) {
  return __builtin_popcount(m & ((Mask{1} << mode) - 1u));
}

struct Op {
  int mode;
  bool create;
};

// Scaled product of ladder operators, written left to right; the rightmost
// factor acts first.
struct Monomial {
  std::vector<Op> ops;
  double coeff = 1.0;

  Monomial dagger() const {
    Monomial adj;
    adj.coeff = coeff;
    adj.ops.reserve(ops.size());
    for (auto it = ops.rbegin(); it != ops.rend(); ++it)
      adj.ops.push_back({it->mode, !it->create});
    return adj;
  }

  Monomial shifted(int offset) const {
    Monomial out = *this;
    for (auto& op : out.ops) op.mode += offset;
    return out;
  }
};

struct Applied {
  double amp;
  Mask mask;
};

inline std::optional<Applied> apply(const Monomial& mono, Mask in) {
  double amp = mono.coeff;
  Mask m = in;
  for (auto it = mono.ops.rbegin(); it != mono.ops.rend(); ++it) {
    const bool occ = occupied(m, it->mode);
    if (it->create == occ) return std::nullopt;
    if (popcount_below(m, it->mode) & 1) amp = -amp;
    m ^= (Mask{1} << it->mode);
  }
  return Applied{amp, m};
}

inline Monomial number_op(int mode, double c = 1.0) {
  return Monomial{{{mode, true}, {mode, false}}, c};
}

// c^dag_a c_a c^dag_b c_b
inline Monomial double_occupancy(int mode_a, int mode_b, double c = 1.0) {
  return Monomial{{{mode_a, true}, {mode_a, false}, {mode_b, true}, {mode_b, false}}, c};
}

// c^dag_a c_b
inline Monomial hopping(int mode_a, int mode_b, double c = 1.0) {
  return Monomial{{{mode_a, true}, {mode_b, false}}, c};
}

}  // namespace su2qlm::fock
