#pragma once
// Exact diagonalization of the constrained chain on small systems: the ground
// truth against which the MPS/TEBD stack is verified. The Hamiltonian matrix
// is assembled from the same two-site gates used by the simulator, so a
// discrepancy beyond tolerance points at the MPS side, not at the model.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "su2qlm/lanczos.hpp"
#include "su2qlm/model.hpp"

namespace su2qlm {

struct SectorBasis {
  int L = 0;
  int n_matter = 0;
  std::vector<std::vector<int>> configs;  // per-site gauge labels, lexicographic
  std::map<std::vector<int>, int> index;

  int dim() const { return static_cast<int>(configs.size()); }
};

// All product configurations of gauge-invariant site states satisfying the
// two-rishons-per-link rule and the boundary constraints, at fixed N_M.
inline SectorBasis enumerate_sector_basis(int L, int n_matter, int cap = 8) {
  if (L < 2) throw std::invalid_argument("L must be at least 2");
  if (L > cap) throw std::invalid_argument("chain length exceeds the ED cap");
  SectorBasis basis;
  basis.L = L;
  basis.n_matter = n_matter;
  if (n_matter < 0 || n_matter > 2 * L) return basis;

  std::vector<int> config(L);
  auto dfs = [&](auto&& self, int site, int need_n_r, int q) -> void {
    const GaugeSiteBasis& sb = site_basis(site_kind(site, L));
    for (const auto& s : sb.states) {
      if (s.n_r != need_n_r) continue;
      const int q2 = q + s.n_m;
      if (q2 > n_matter) continue;
      if (n_matter - q2 > 2 * (L - site)) continue;
      config[site - 1] = s.label;
      if (site == L) {
        if (q2 == n_matter) {
          basis.index[config] = basis.dim();
          basis.configs.push_back(config);
        }
      } else {
        self(self, site + 1, 2 - s.n_l, q2);
      }
    }
  };
  dfs(dfs, 1, 0, 0);
  return basis;
}

struct SparseHamiltonian {
  int dim = 0;
  std::vector<Eigen::Triplet<double>> entries;

  Eigen::SparseMatrix<double> matrix() const {
    Eigen::SparseMatrix<double> m(dim, dim);
    m.setFromTriplets(entries.begin(), entries.end());
    return m;
  }

  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(matrix()); }
};

inline SparseHamiltonian build_hamiltonian(const ModelParams& params, const SectorBasis& basis) {
  if (basis.dim() == 0) throw std::invalid_argument("empty sector basis");
  if (params.L != basis.L) throw std::invalid_argument("params.L does not match the basis");
  const auto gates = build_gates(params);

  SparseHamiltonian h;
  h.dim = basis.dim();
  std::vector<int> target;
  for (int c = 0; c < basis.dim(); ++c) {
    const auto& config = basis.configs[c];
    for (int bond = 1; bond < basis.L; ++bond) {
      const TwoSiteGate& gate = gates[bond - 1];
      const GaugeSiteBasis& bl = site_basis(gate.left_kind);
      const GaugeSiteBasis& br = site_basis(gate.right_kind);
      const int p1 = config[bond - 1];
      const int p2 = config[bond];
      const PairSector* sec = gate.find_sector(bl.states[p1].n_r,
                                               bl.states[p1].n_m + br.states[p2].n_m,
                                               br.states[p2].n_l);
      if (!sec) throw std::logic_error("configuration outside the gate sectors");
      const int col = sec->find_pair(p1 * gate.d2 + p2);
      if (col < 0) throw std::logic_error("configuration outside the gate sectors");
      for (int row = 0; row < static_cast<int>(sec->pair_ids.size()); ++row) {
        const double v = sec->mat(row, col);
        if (v == 0.0) continue;
        auto tconfig = config;
        tconfig[bond - 1] = sec->pair_ids[row] / gate.d2;
        tconfig[bond] = sec->pair_ids[row] % gate.d2;
        auto it = basis.index.find(tconfig);
        if (it == basis.index.end()) throw std::logic_error("gate left the sector basis");
        h.entries.emplace_back(it->second, c, v);
      }
    }
  }
  return h;
}

// k lowest eigenpairs; dense below dimension 2000, Lanczos above.
inline EigenPairs lowest_eigenpair(const SparseHamiltonian& h, int k) {
  if (h.dim < 1) throw std::invalid_argument("empty Hamiltonian");
  if (k < 1 || k > h.dim) throw std::invalid_argument("bad number of eigenpairs");
  if (h.dim < 2000) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.to_dense());
    EigenPairs out;
    out.values = es.eigenvalues().head(k);
    out.vectors = es.eigenvectors().leftCols(k);
    return out;
  }
  const Eigen::SparseMatrix<double> m = h.matrix();
  return lanczos_lowest(
      h.dim, [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = m * x; }, k);
}

inline double ed_expectation(const Eigen::VectorXd& v, const Eigen::SparseMatrix<double>& op) {
  if (v.size() != op.rows() || op.rows() != op.cols())
    throw std::invalid_argument("shape mismatch in expectation");
  return v.dot(op * v);
}

inline double ed_expectation(const Eigen::VectorXd& v, const Eigen::MatrixXd& op) {
  if (v.size() != op.rows() || op.rows() != op.cols())
    throw std::invalid_argument("shape mismatch in expectation");
  return v.dot(op * v);
}

// One-site operator embedded in the sector basis. The operator must preserve
// the site's rishon charges; matter-changing entries that leave the sector
// are dropped (they connect to other N_M sectors).
inline Eigen::SparseMatrix<double> site_operator(const SectorBasis& basis, int site,
                                                 const Eigen::MatrixXd& op) {
  const GaugeSiteBasis& sb = site_basis(site_kind(site, basis.L));
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < basis.dim(); ++c) {
    const int p = basis.configs[c][site - 1];
    for (int pt = 0; pt < sb.dim(); ++pt) {
      if (op(pt, p) == 0.0) continue;
      if (sb.states[pt].n_r != sb.states[p].n_r || sb.states[pt].n_l != sb.states[p].n_l) continue;
      auto tconfig = basis.configs[c];
      tconfig[site - 1] = pt;
      auto it = basis.index.find(tconfig);
      if (it == basis.index.end()) continue;
      trip.emplace_back(it->second, c, op(pt, p));
    }
  }
  Eigen::SparseMatrix<double> m(basis.dim(), basis.dim());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

// Product of two commuting even-parity one-site operators, e.g. the meson
// correlator sigma^-_a sigma^+_b.
inline Eigen::SparseMatrix<double> two_site_operator(const SectorBasis& basis, int site_a,
                                                     const Eigen::MatrixXd& op_a, int site_b,
                                                     const Eigen::MatrixXd& op_b) {
  if (site_a == site_b) return site_operator(basis, site_a, op_a * op_b);
  const GaugeSiteBasis& ba = site_basis(site_kind(site_a, basis.L));
  const GaugeSiteBasis& bb = site_basis(site_kind(site_b, basis.L));
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < basis.dim(); ++c) {
    const int pa = basis.configs[c][site_a - 1];
    const int pb = basis.configs[c][site_b - 1];
    for (int ta = 0; ta < ba.dim(); ++ta) {
      if (op_a(ta, pa) == 0.0) continue;
      if (ba.states[ta].n_r != ba.states[pa].n_r || ba.states[ta].n_l != ba.states[pa].n_l)
        continue;
      for (int tb = 0; tb < bb.dim(); ++tb) {
        if (op_b(tb, pb) == 0.0) continue;
        if (bb.states[tb].n_r != bb.states[pb].n_r || bb.states[tb].n_l != bb.states[pb].n_l)
          continue;
        auto tconfig = basis.configs[c];
        tconfig[site_a - 1] = ta;
        tconfig[site_b - 1] = tb;
        auto it = basis.index.find(tconfig);
        if (it == basis.index.end()) continue;
        trip.emplace_back(it->second, c, op_a(ta, pa) * op_b(tb, pb));
      }
    }
  }
  Eigen::SparseMatrix<double> m(basis.dim(), basis.dim());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

// ---------------------------------------------------------------------------
// Full Fock-space chain embedding, used to verify gauge invariance off the
// constraint surface.
// ---------------------------------------------------------------------------

namespace fockchain {

struct NumberSector {
  int n_modes = 0;
  int n_fermions = 0;
  std::vector<fock::Mask> masks;  // ascending
  std::unordered_map<fock::Mask, int> index;
};

inline NumberSector enumerate_number_sector(int n_modes, int n_fermions) {
  NumberSector sec;
  sec.n_modes = n_modes;
  sec.n_fermions = n_fermions;
  for (fock::Mask m = 0; m < (fock::Mask{1} << n_modes); ++m)
    if (fock::popcount(m) == n_fermions) {
      sec.index[m] = static_cast<int>(sec.masks.size());
      sec.masks.push_back(m);
    }
  return sec;
}

inline Eigen::SparseMatrix<double> build_operator(const NumberSector& sec,
                                                  const std::vector<fock::Monomial>& terms) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < static_cast<int>(sec.masks.size()); ++c)
    for (const auto& mono : terms)
      if (auto r = fock::apply(mono, sec.masks[c])) {
        auto it = sec.index.find(r->mask);
        if (it == sec.index.end()) continue;  // term leaves the number sector
        trip.emplace_back(it->second, c, r->amp);
      }
  Eigen::SparseMatrix<double> m(sec.masks.size(), sec.masks.size());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

// all bond terms of the chain Hamiltonian over 6L global modes
inline std::vector<fock::Monomial> chain_monomials(const ModelParams& params) {
  std::vector<fock::Monomial> terms;
  for (int bond = 1; bond < params.L; ++bond) {
    const auto [wl, wr] = bond_weights(bond, params.L);
    for (const auto& mono : bond_monomials(params, wl, wr))
      terms.push_back(mono.shifted(fock::modes_per_site * (bond - 1)));
  }
  return terms;
}

// J^x, K, J^z of site j over the chain modes (J^y = i K)
inline std::array<std::vector<fock::Monomial>, 3> site_gauss_chain(int site) {
  auto gm = gauss_monomials();
  for (auto& list : gm)
    for (auto& mono : list) mono = mono.shifted(fock::modes_per_site * (site - 1));
  return gm;
}

inline double inf_norm(const Eigen::SparseMatrix<double>& m) {
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      row_sum(it.row()) += std::abs(it.value());
  return m.nonZeros() == 0 ? 0.0 : row_sum.maxCoeff();
}

// max over sites, directions and fermion-number sectors of ||[H, J^mu_j]||_inf.
// H and J conserve the total fermion number, so the check decomposes exactly.
inline double gauge_commutator_norm(const ModelParams& params) {
  const int n_modes = fock::modes_per_site * params.L;
  const auto h_terms = chain_monomials(params);
  double worst = 0.0;
  for (int n = 0; n <= n_modes; ++n) {
    const NumberSector sec = enumerate_number_sector(n_modes, n);
    if (sec.masks.empty()) continue;
    const Eigen::SparseMatrix<double> h = build_operator(sec, h_terms);
    for (int site = 1; site <= params.L; ++site) {
      const auto gm = site_gauss_chain(site);
      for (const auto& list : gm) {
        const Eigen::SparseMatrix<double> j = build_operator(sec, list);
        const Eigen::SparseMatrix<double> comm = (h * j - j * h).pruned();
        worst = std::max(worst, inf_norm(comm));
      }
    }
  }
  return worst;
}

}  // namespace fockchain

}  // namespace su2qlm
