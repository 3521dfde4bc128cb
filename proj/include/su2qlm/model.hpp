#pragma once
// Gauge-invariant local bases and Hamiltonian gates of the (1+1)-d SU(2)
// quantum link model with two rishons per link.
//
// A composite site holds three fermionic species (R, M, L), two spin modes
// each. Gauss's law keeps the states whose total on-site spin is a singlet:
// 14 states on a bulk site, 5 on a boundary site (where the outward rishon
// modes are frozen empty). Each basis state is a combination of at most two
// Fock configurations with amplitudes in {1, +1/sqrt2, -1/sqrt2}.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "su2qlm/fock.hpp"

namespace su2qlm {

struct ModelParams {
  double t = 0.0;    // matter-field coupling
  double g1 = 1.0;   // free-field scale, sets the energy unit
  double eps = 5.0;  // determinant-breaking strength
  int L = 2;         // number of composite sites
  int n_matter = 0;  // total matter fermion number N_M

  double filling() const { return static_cast<double>(n_matter) / L; }

  void validate() const {
    if (!std::isfinite(t) || !std::isfinite(g1) || !std::isfinite(eps))
      throw std::invalid_argument("model parameters must be finite");
    if (g1 <= 0.0) throw std::invalid_argument("g1 must be positive");
    if (L < 2) throw std::invalid_argument("L must be at least 2");
    if (n_matter < 0 || n_matter > 2 * L)
      throw std::invalid_argument("N_M must lie in [0, 2L]");
  }
};

enum class SiteKind { LeftBoundary, Bulk, RightBoundary };

inline SiteKind site_kind(int site, int L) {
  if (site < 1 || site > L) throw std::out_of_range("site index out of range");
  if (site == 1) return SiteKind::LeftBoundary;
  if (site == L) return SiteKind::RightBoundary;
  return SiteKind::Bulk;
}

struct FockAmplitude {
  fock::Mask mask;
  double amp;
};

// One gauge-invariant (on-site singlet) state. All members share the charge
// triple (n_r, n_m, n_l); the total fermion count is even for every singlet.
struct GaugeState {
  int label = 0;
  int n_r = 0, n_m = 0, n_l = 0;
  std::vector<FockAmplitude> members;

  int fermion_count() const { return n_r + n_m + n_l; }
};

struct GaugeSiteBasis {
  SiteKind kind = SiteKind::Bulk;
  std::vector<GaugeState> states;

  int dim() const { return static_cast<int>(states.size()); }

  int find(int n_r, int n_m, int n_l) const {
    for (const auto& s : states)
      if (s.n_r == n_r && s.n_m == n_m && s.n_l == n_l) return s.label;
    return -1;
  }

  // 64 x dim embedding into the six-mode Fock space (inactive boundary modes
  // are simply never occupied).
  Eigen::MatrixXd to_fock() const {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(64, dim());
    for (const auto& s : states)
      for (const auto& m : s.members) b(m.mask, s.label) = m.amp;
    return b;
  }
};

namespace detail {

inline constexpr std::array<int, 3> species_base = {fock::RUp, fock::MUp, fock::LUp};

// Fock masks of one species at occupation 0/2, or the two single-fermion
// choices at occupation 1.
inline std::vector<fock::Mask> species_masks(int base, int occ) {
  switch (occ) {
    case 0: return {0u};
    case 1: return {fock::Mask{1} << base, fock::Mask{1} << (base + 1)};
    case 2: return {(fock::Mask{1} << base) | (fock::Mask{1} << (base + 1))};
    default: throw std::logic_error("bad occupation");
  }
}

}  // namespace detail

// Enumerates all on-site singlets of the active modes, sorted by
// (n_r, n_m, n_l). A species with odd occupation carries spin 1/2; exactly
// zero or two species may do so, and two spin-1/2 species A < B (mode order)
// combine into (A_up B_dn - A_dn B_up)/sqrt2.
inline GaugeSiteBasis enumerate_site_basis(SiteKind kind) {
  GaugeSiteBasis basis;
  basis.kind = kind;
  const bool has_r = kind != SiteKind::LeftBoundary;
  const bool has_l = kind != SiteKind::RightBoundary;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  for (int n_r = 0; n_r <= (has_r ? 2 : 0); ++n_r)
    for (int n_m = 0; n_m <= 2; ++n_m)
      for (int n_l = 0; n_l <= (has_l ? 2 : 0); ++n_l) {
        const std::array<int, 3> occ = {n_r, n_m, n_l};
        std::vector<int> singles;
        for (int sp = 0; sp < 3; ++sp)
          if (occ[sp] == 1) singles.push_back(sp);
        if (singles.size() != 0 && singles.size() != 2) continue;

        GaugeState state;
        state.n_r = n_r;
        state.n_m = n_m;
        state.n_l = n_l;

        if (singles.empty()) {
          fock::Mask mask = 0;
          for (int sp = 0; sp < 3; ++sp)
            mask |= detail::species_masks(detail::species_base[sp], occ[sp])[0];
          state.members.push_back({mask, 1.0});
        } else {
          const int a = detail::species_base[singles[0]];
          const int b = detail::species_base[singles[1]];
          fock::Mask rest = 0;
          for (int sp = 0; sp < 3; ++sp)
            if (occ[sp] != 1)
              rest |= detail::species_masks(detail::species_base[sp], occ[sp])[0];
          // a_up b_dn carries +, a_dn b_up carries -
          const fock::Mask up_dn = rest | (fock::Mask{1} << a) | (fock::Mask{1} << (b + 1));
          const fock::Mask dn_up = rest | (fock::Mask{1} << (a + 1)) | (fock::Mask{1} << b);
          state.members.push_back({up_dn, inv_sqrt2});
          state.members.push_back({dn_up, -inv_sqrt2});
          std::sort(state.members.begin(), state.members.end(),
                    [](const FockAmplitude& x, const FockAmplitude& y) { return x.mask < y.mask; });
        }
        state.label = basis.dim();
        basis.states.push_back(std::move(state));
      }
  return basis;
}

inline const GaugeSiteBasis& site_basis(SiteKind kind) {
  static const GaugeSiteBasis left = enumerate_site_basis(SiteKind::LeftBoundary);
  static const GaugeSiteBasis bulk = enumerate_site_basis(SiteKind::Bulk);
  static const GaugeSiteBasis right = enumerate_site_basis(SiteKind::RightBoundary);
  switch (kind) {
    case SiteKind::LeftBoundary: return left;
    case SiteKind::Bulk: return bulk;
    default: return right;
  }
}

// Dense matrix of a ladder monomial on the n_modes-mode Fock space.
inline Eigen::MatrixXd monomial_matrix(const fock::Monomial& mono, int n_modes) {
  const int dim = 1 << n_modes;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (fock::Mask in = 0; in < static_cast<fock::Mask>(dim); ++in)
    if (auto r = fock::apply(mono, in)) m(r->mask, in) += r->amp;
  return m;
}

// Monomial content of the on-site gauge generators: J^x, K and J^z with
// J^y = i K. Keeping K real lets every consumer stay in real arithmetic.
inline std::array<std::vector<fock::Monomial>, 3> gauss_monomials() {
  std::array<std::vector<fock::Monomial>, 3> gm;
  for (int base : detail::species_base) {
    gm[0].push_back(fock::hopping(base, base + 1, 0.5));
    gm[0].push_back(fock::hopping(base + 1, base, 0.5));
    gm[1].push_back(fock::hopping(base + 1, base, 0.5));
    gm[1].push_back(fock::hopping(base, base + 1, -0.5));
    gm[2].push_back(fock::number_op(base, 0.5));
    gm[2].push_back(fock::number_op(base + 1, -0.5));
  }
  return gm;
}

// J^x, J^y, J^z on the full six-mode Fock space (64 x 64). Boundary kinds use
// the same matrices; inactive modes are empty on boundary states, where the
// corresponding terms vanish identically.
inline std::array<Eigen::MatrixXcd, 3> build_gauss_generators(SiteKind /*kind*/) {
  const auto gm = gauss_monomials();
  auto sum = [](const std::vector<fock::Monomial>& list) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(64, 64);
    for (const auto& mono : list) m += monomial_matrix(mono, 6);
    return m;
  };
  const Eigen::MatrixXd jx = sum(gm[0]);
  const Eigen::MatrixXd k = sum(gm[1]);
  const Eigen::MatrixXd jz = sum(gm[2]);
  std::array<Eigen::MatrixXcd, 3> out;
  out[0] = jx.cast<std::complex<double>>();
  out[1] = std::complex<double>(0.0, 1.0) * k.cast<std::complex<double>>();
  out[2] = jz.cast<std::complex<double>>();
  return out;
}

// |J|^2 = (J^x)^2 - K^2 + (J^z)^2, real by construction.
inline Eigen::MatrixXd gauss_casimir() {
  const auto gm = gauss_monomials();
  auto sum = [](const std::vector<fock::Monomial>& list) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(64, 64);
    for (const auto& mono : list) m += monomial_matrix(mono, 6);
    return m;
  };
  const Eigen::MatrixXd jx = sum(gm[0]);
  const Eigen::MatrixXd k = sum(gm[1]);
  const Eigen::MatrixXd jz = sum(gm[2]);
  return jx * jx - k * k + jz * jz;
}

// Diagonal occupation operators in the gauge basis. Charge triples are unique
// within a basis, so every Fock-diagonal operator is diagonal here.
struct DensityOps {
  Eigen::VectorXd n_r, n_m, n_l;
  Eigen::VectorXd n_r_up, n_r_dn, n_m_up, n_m_dn, n_l_up, n_l_dn;
};

inline DensityOps build_density_operators(SiteKind kind) {
  const GaugeSiteBasis& basis = site_basis(kind);
  const int d = basis.dim();
  DensityOps ops;
  for (Eigen::VectorXd* v : {&ops.n_r, &ops.n_m, &ops.n_l, &ops.n_r_up, &ops.n_r_dn,
                             &ops.n_m_up, &ops.n_m_dn, &ops.n_l_up, &ops.n_l_dn})
    *v = Eigen::VectorXd::Zero(d);
  for (const auto& s : basis.states) {
    ops.n_r(s.label) = s.n_r;
    ops.n_m(s.label) = s.n_m;
    ops.n_l(s.label) = s.n_l;
    for (const auto& m : s.members) {
      const double w = m.amp * m.amp;
      ops.n_r_up(s.label) += w * fock::occupied(m.mask, fock::RUp);
      ops.n_r_dn(s.label) += w * fock::occupied(m.mask, fock::RDn);
      ops.n_m_up(s.label) += w * fock::occupied(m.mask, fock::MUp);
      ops.n_m_dn(s.label) += w * fock::occupied(m.mask, fock::MDn);
      ops.n_l_up(s.label) += w * fock::occupied(m.mask, fock::LUp);
      ops.n_l_dn(s.label) += w * fock::occupied(m.mask, fock::LDn);
    }
  }
  return ops;
}

// Meson ladder operators sigma^- = c_{M,dn} c_{M,up} and sigma^+ = (sigma^-)^dag
// restricted to the gauge basis.
struct MesonOps {
  Eigen::MatrixXd lower, raise;
};

inline MesonOps build_meson_operator(SiteKind kind) {
  const GaugeSiteBasis& basis = site_basis(kind);
  fock::Monomial lower{{{fock::MDn, false}, {fock::MUp, false}}, 1.0};
  const Eigen::MatrixXd b = basis.to_fock();
  MesonOps ops;
  ops.lower = b.transpose() * monomial_matrix(lower, 6) * b;
  ops.raise = ops.lower.transpose();
  return ops;
}

// ---------------------------------------------------------------------------
// Two-site Hamiltonian gates
// ---------------------------------------------------------------------------

// Free-term split weights of the two sites adjacent to a bond: a bulk site
// shares its on-site free term equally between its two bonds, a boundary site
// puts all of it on its single bond.
inline std::pair<double, double> bond_weights(int bond, int L) {
  if (bond < 1 || bond >= L) throw std::out_of_range("invalid bond index");
  return {bond == 1 ? 1.0 : 0.5, bond == L - 1 ? 1.0 : 0.5};
}

// All Hamiltonian terms of one bond as ladder monomials over the 12 local
// modes (site j at offset 0, site j+1 at offset 6).
inline std::vector<fock::Monomial> bond_monomials(const ModelParams& p, double w_left,
                                                  double w_right) {
  using namespace fock;
  std::vector<Monomial> terms;
  const int off = modes_per_site;

  // matter-gauge coupling: t c^dag_{M,j,s} c_{L,j,s} c^dag_{R,j+1,s'} c_{M,j+1,s'} + h.c.
  for (int s = 0; s < 2; ++s)
    for (int sp = 0; sp < 2; ++sp) {
      Monomial m{{{MUp + s, true}, {LUp + s, false}, {off + RUp + sp, true}, {off + MUp + sp, false}},
                 p.t};
      terms.push_back(m);
      terms.push_back(m.dagger());
    }

  // determinant breaking: eps c^dag_{L,up} c^dag_{L,dn} c_{R',dn} c_{R',up} + h.c.
  {
    Monomial m{{{LUp, true}, {LDn, true}, {off + RDn, false}, {off + RUp, false}}, p.eps};
    terms.push_back(m);
    terms.push_back(m.dagger());
  }

  // free field, per site: g1^2 (n_up + n_dn - 2 n_up n_dn) for each rishon species
  const double g2 = p.g1 * p.g1;
  auto add_free = [&](int base, double w) {
    terms.push_back(number_op(base, w * g2));
    terms.push_back(number_op(base + 1, w * g2));
    terms.push_back(double_occupancy(base, base + 1, -2.0 * w * g2));
  };
  add_free(RUp, w_left);
  add_free(LUp, w_left);
  add_free(off + RUp, w_right);
  add_free(off + LUp, w_right);

  return terms;
}

// Invariant block of a gate on the two-rishon link subspace. A sector is
// labelled by the conserved triple (n_R of the left site, total pair matter,
// n_L of the right site); pair ids are p1 * d2 + p2.
struct PairSector {
  int n_r_left = 0;
  int pair_matter = 0;
  int n_l_right = 0;
  std::vector<int> pair_ids;
  Eigen::MatrixXd mat;

  int find_pair(int pair_id) const {
    auto it = std::lower_bound(pair_ids.begin(), pair_ids.end(), pair_id);
    if (it == pair_ids.end() || *it != pair_id) return -1;
    return static_cast<int>(it - pair_ids.begin());
  }
};

struct PairBlockOperator {
  SiteKind left_kind = SiteKind::Bulk;
  SiteKind right_kind = SiteKind::Bulk;
  int d1 = 0, d2 = 0;
  std::vector<PairSector> sectors;

  const PairSector* find_sector(int n_r_left, int pair_matter, int n_l_right) const {
    for (const auto& s : sectors)
      if (s.n_r_left == n_r_left && s.pair_matter == pair_matter && s.n_l_right == n_l_right)
        return &s;
    return nullptr;
  }

  // Full (d1*d2)^2 matrix; zero outside the stored sectors.
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d1 * d2, d1 * d2);
    for (const auto& sec : sectors)
      for (int a = 0; a < static_cast<int>(sec.pair_ids.size()); ++a)
        for (int b = 0; b < static_cast<int>(sec.pair_ids.size()); ++b)
          m(sec.pair_ids[a], sec.pair_ids[b]) = sec.mat(a, b);
    return m;
  }
};

struct TwoSiteGate : PairBlockOperator {
  double w_left = 0.5, w_right = 0.5;
};

struct GatePropagator : PairBlockOperator {
  double dtau = 0.0;
};

// Hermitian bond gate h_{j,j+1} in the gauge-invariant product basis,
// projected onto (and conserving) the two-rishon sector of the shared link.
inline TwoSiteGate build_two_site_gate(const ModelParams& params, int bond) {
  params.validate();
  const auto [w_left, w_right] = bond_weights(bond, params.L);
  const GaugeSiteBasis& bl = site_basis(site_kind(bond, params.L));
  const GaugeSiteBasis& br = site_basis(site_kind(bond + 1, params.L));

  TwoSiteGate gate;
  gate.left_kind = bl.kind;
  gate.right_kind = br.kind;
  gate.d1 = bl.dim();
  gate.d2 = br.dim();
  gate.w_left = w_left;
  gate.w_right = w_right;

  const auto terms = bond_monomials(params, w_left, w_right);

  // two-site product states as sparse vectors over 12-mode masks; the site-j
  // creation string precedes the site-(j+1) string, so no extra sign appears
  std::map<fock::Mask, std::vector<std::pair<int, double>>> by_mask;
  std::vector<std::vector<std::pair<fock::Mask, double>>> pair_members(gate.d1 * gate.d2);
  for (int p1 = 0; p1 < gate.d1; ++p1)
    for (int p2 = 0; p2 < gate.d2; ++p2) {
      const int id = p1 * gate.d2 + p2;
      for (const auto& m1 : bl.states[p1].members)
        for (const auto& m2 : br.states[p2].members) {
          const fock::Mask mask = m1.mask | (m2.mask << fock::modes_per_site);
          const double amp = m1.amp * m2.amp;
          pair_members[id].push_back({mask, amp});
          by_mask[mask].push_back({id, amp});
        }
    }

  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(gate.d1 * gate.d2, gate.d1 * gate.d2);
  for (int src = 0; src < gate.d1 * gate.d2; ++src)
    for (const auto& [mask, amp] : pair_members[src])
      for (const auto& mono : terms)
        if (auto r = fock::apply(mono, mask)) {
          auto it = by_mask.find(r->mask);
          if (it == by_mask.end()) continue;
          for (const auto& [tgt, tamp] : it->second) full(tgt, src) += tamp * r->amp * amp;
        }
  full = 0.5 * (full + full.transpose().eval());

  // group the two-rishon-link pairs into conserved sectors
  std::map<std::array<int, 3>, std::vector<int>> groups;
  for (int p1 = 0; p1 < gate.d1; ++p1)
    for (int p2 = 0; p2 < gate.d2; ++p2) {
      if (bl.states[p1].n_l + br.states[p2].n_r != 2) continue;
      const std::array<int, 3> key = {bl.states[p1].n_r,
                                      bl.states[p1].n_m + br.states[p2].n_m,
                                      br.states[p2].n_l};
      groups[key].push_back(p1 * gate.d2 + p2);
    }
  for (auto& [key, ids] : groups) {
    PairSector sec;
    sec.n_r_left = key[0];
    sec.pair_matter = key[1];
    sec.n_l_right = key[2];
    std::sort(ids.begin(), ids.end());
    sec.pair_ids = ids;
    const int n = static_cast<int>(ids.size());
    sec.mat.resize(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) sec.mat(a, b) = full(ids[a], ids[b]);
    gate.sectors.push_back(std::move(sec));
  }
  return gate;
}

// exp(-dtau h) blockwise through a symmetric eigendecomposition.
inline GatePropagator make_propagator(const TwoSiteGate& gate, double dtau) {
  if (dtau < 0.0) throw std::invalid_argument("dtau must be nonnegative");
  GatePropagator prop;
  prop.left_kind = gate.left_kind;
  prop.right_kind = gate.right_kind;
  prop.d1 = gate.d1;
  prop.d2 = gate.d2;
  prop.dtau = dtau;
  prop.sectors = gate.sectors;
  for (auto& sec : prop.sectors) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sec.mat);
    const Eigen::VectorXd w = (-dtau * es.eigenvalues().array()).exp();
    sec.mat = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
    sec.mat = 0.5 * (sec.mat + sec.mat.transpose().eval());
  }
  return prop;
}

inline std::vector<TwoSiteGate> build_gates(const ModelParams& params) {
  std::vector<TwoSiteGate> gates;
  gates.reserve(params.L - 1);
  for (int bond = 1; bond < params.L; ++bond) gates.push_back(build_two_site_gate(params, bond));
  return gates;
}

inline std::vector<GatePropagator> build_propagators(const ModelParams& params, double dtau) {
  std::vector<GatePropagator> props;
  props.reserve(params.L - 1);
  for (int bond = 1; bond < params.L; ++bond)
    props.push_back(make_propagator(build_two_site_gate(params, bond), dtau));
  return props;
}

}  // namespace su2qlm
