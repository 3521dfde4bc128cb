#pragma once
// Shared test oracles: dense embeddings of MPS states into the ED sector
// basis, and reduced-density-matrix entropies computed directly from ED
// vectors. These deliberately avoid the library's contraction machinery.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <map>
#include <vector>

#include "su2qlm/edoracle.hpp"
#include "su2qlm/mps.hpp"

namespace su2qlm::testing {

// amplitude of one configuration: chain the 1 x ... x 1 block products
inline double mps_config_amplitude(const SymmetricMPS& psi, const std::vector<int>& config) {
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
  ChargeLabel l{0, 2};
  for (int j = 1; j <= psi.length(); ++j) {
    const BlockTensor& a = psi.site(j);
    const GaugeState& s = a.basis().states[config[j - 1]];
    if (s.n_r != 2 - l.ell) return 0.0;
    const ChargeLabel r{l.q + s.n_m, s.n_l};
    const auto* b = a.find(l, config[j - 1], r);
    if (!b) return 0.0;
    v = v * (*b);
    l = r;
  }
  return v(0);
}

inline Eigen::VectorXd mps_to_dense(const SymmetricMPS& psi, const SectorBasis& basis) {
  Eigen::VectorXd out(basis.dim());
  for (int c = 0; c < basis.dim(); ++c) out(c) = mps_config_amplitude(psi, basis.configs[c]);
  return out;
}

// von Neumann entropy of the reduced state on sites 1..bond from an ED vector
inline double ed_entanglement_entropy(const Eigen::VectorXd& v, const SectorBasis& basis,
                                      int bond) {
  std::map<std::vector<int>, int> rows, cols;
  for (const auto& config : basis.configs) {
    const std::vector<int> left(config.begin(), config.begin() + bond);
    const std::vector<int> right(config.begin() + bond, config.end());
    rows.try_emplace(left, static_cast<int>(rows.size()));
    cols.try_emplace(right, static_cast<int>(cols.size()));
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows.size(), cols.size());
  for (int c = 0; c < basis.dim(); ++c) {
    const auto& config = basis.configs[c];
    const std::vector<int> left(config.begin(), config.begin() + bond);
    const std::vector<int> right(config.begin() + bond, config.end());
    m(rows.at(left), cols.at(right)) = v(c);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  double s = 0.0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    const double p = svd.singularValues()(i) * svd.singularValues()(i);
    if (p > 1e-300) s -= p * std::log(p);
  }
  return s;
}

// Exact MPS compression of an ED sector vector by successive per-sector
// SVDs over the configuration amplitudes. Used to compare MPS measurement
// machinery against ED observables with both routes exact.
inline SymmetricMPS dense_to_mps(const Eigen::VectorXd& psi, const SectorBasis& basis) {
  const int L = basis.L;
  using Suffix = std::vector<int>;

  // columns of the working matrices are indexed by configuration suffixes
  std::map<Suffix, int> suffixes;
  for (const auto& config : basis.configs) suffixes.try_emplace(config, -1);
  {
    int idx = 0;
    for (auto& [s, i] : suffixes) i = idx++;
  }
  std::map<ChargeLabel, Eigen::MatrixXd> w;
  w[ChargeLabel{0, 2}] = Eigen::MatrixXd::Zero(1, suffixes.size());
  for (int c = 0; c < basis.dim(); ++c)
    w[ChargeLabel{0, 2}](0, suffixes.at(basis.configs[c])) = psi(c);

  std::vector<BlockTensor> tensors;
  for (int j = 1; j <= L; ++j) {
    const GaugeSiteBasis& sb = site_basis(site_kind(j, L));
    std::map<Suffix, int> next_suffixes;
    for (const auto& [s, i] : suffixes)
      next_suffixes.try_emplace(Suffix(s.begin() + 1, s.end()), -1);
    {
      int idx = 0;
      for (auto& [s, i] : next_suffixes) i = idx++;
    }

    struct Leg {
      ChargeLabel l;
      int row;
      int phys;
    };
    std::map<ChargeLabel, std::vector<Leg>> legs;
    for (const auto& [l, mat] : w)
      for (const auto& state : sb.states) {
        if (state.n_r != 2 - l.ell) continue;
        const ChargeLabel m{l.q + state.n_m, state.n_l};
        for (int r = 0; r < mat.rows(); ++r) legs[m].push_back({l, r, state.label});
      }

    BondSpace left_space, mid_space;
    for (const auto& [l, mat] : w) left_space.add(l, static_cast<int>(mat.rows()));
    std::map<ChargeLabel, Eigen::MatrixXd> w_next;
    std::map<ChargeLabel, Eigen::MatrixXd> u_store;
    std::map<ChargeLabel, Eigen::BDCSVD<Eigen::MatrixXd>> svds;
    double sv_max = 0.0;
    for (auto& [m, lg] : legs) {
      Eigen::MatrixXd big = Eigen::MatrixXd::Zero(lg.size(), next_suffixes.size());
      for (size_t r = 0; r < lg.size(); ++r)
        for (const auto& [suf, col] : suffixes) {
          if (suf.front() != lg[r].phys) continue;
          big(r, next_suffixes.at(Suffix(suf.begin() + 1, suf.end()))) =
              w.at(lg[r].l)(lg[r].row, col);
        }
      svds[m].compute(big, Eigen::ComputeThinU | Eigen::ComputeThinV);
      if (svds[m].singularValues().size() > 0)
        sv_max = std::max(sv_max, svds[m].singularValues()(0));
    }
    // rank cut against the global scale, so empty charge sectors stay empty
    for (auto& [m, svd] : svds) {
      int rank = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-12 * sv_max) ++rank;
      if (rank == 0) continue;
      mid_space.add(m, rank);
      u_store[m] = svd.matrixU().leftCols(rank);
      w_next[m] = svd.singularValues().head(rank).asDiagonal() *
                  svd.matrixV().leftCols(rank).transpose();
    }

    BlockTensor a(left_space, &sb, mid_space);
    for (const auto& [m, u] : u_store) {
      const auto& lg = legs.at(m);
      for (size_t r = 0; r < lg.size(); ++r) {
        auto& blk = a.block(lg[r].l, lg[r].phys, m);
        blk.row(lg[r].row) = u.row(r);
      }
    }
    tensors.push_back(std::move(a));
    w = std::move(w_next);
    suffixes = std::move(next_suffixes);
  }

  // fold the residual scalar (the norm, possibly negative) into the last site
  const double scale = w.at(ChargeLabel{basis.n_matter, 0})(0, 0);
  for (auto& [key, blk] : tensors.back().blocks()) blk *= scale;
  return SymmetricMPS::from_tensors(std::move(tensors), L - 1, basis.n_matter);
}

// deterministic product state with chosen meson sites (1-based) and link
// splits ell in {0, 2}
inline SymmetricMPS make_product_state(int L, const std::vector<int>& meson_sites,
                                       const std::vector<int>& ells_in) {
  std::vector<int> ell(L + 1, 0);
  ell[0] = 2;
  for (int b = 1; b < L; ++b) ell[b] = ells_in.at(b - 1);
  ell[L] = 0;
  std::vector<BlockTensor> tensors;
  int q = 0;
  for (int j = 1; j <= L; ++j) {
    const GaugeSiteBasis& basis = site_basis(site_kind(j, L));
    const bool meson = std::find(meson_sites.begin(), meson_sites.end(), j) != meson_sites.end();
    const int label = basis.find(2 - ell[j - 1], meson ? 2 : 0, ell[j]);
    if (label < 0) throw std::logic_error("bad product configuration");
    const ChargeLabel lq{q, ell[j - 1]};
    q += meson ? 2 : 0;
    const ChargeLabel rq{q, ell[j]};
    BlockTensor a(BondSpace::single(lq), &basis, BondSpace::single(rq));
    a.block(lq, label, rq)(0, 0) = 1.0;
    tensors.push_back(std::move(a));
  }
  return SymmetricMPS::from_tensors(std::move(tensors), 0, q);
}

}  // namespace su2qlm::testing
