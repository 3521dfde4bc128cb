#pragma once
// Symmetric open-boundary MPS over the gauge-invariant site bases, with a
// fixed total matter number N_M enforced through the bond charge labels.
// The virtual bond left of site 1 carries (q, ell) = (0, 2) and the bond
// right of site L carries (N_M, 0); together with the block selection rules
// this pins the boundary conditions and the global symmetry sector.
//
// Sites and bonds are 1-based in the public interface: bond j sits between
// sites j and j+1.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "su2qlm/model.hpp"
#include "su2qlm/symtensor.hpp"

namespace su2qlm {

namespace detail {

struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform draw in [0, bound); bound is tiny here, modulo bias is irrelevant
  // but platform independence is not, hence no std::uniform_int_distribution
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

}  // namespace detail

inline ThetaBlocks apply_pair_operator(const PairBlockOperator& op, const ThetaBlocks& theta);

class SymmetricMPS {
 public:
  SymmetricMPS() = default;

  static SymmetricMPS product_state(const ModelParams& params, std::uint64_t seed) {
    params.validate();
    if (params.n_matter % 2 != 0)
      throw std::invalid_argument(
          "no gauge-invariant configuration exists for odd N_M: every on-site singlet has even "
          "fermion parity while the links carry 2(L-1) rishons, so N_M must be even");

    const int L = params.L;
    detail::SplitMix64 rng(seed);

    // meson placement: N_M/2 doubly occupied matter sites, seeded choice
    std::vector<int> order(L);
    std::iota(order.begin(), order.end(), 0);
    const int k = params.n_matter / 2;
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(rng.below(L - i));
      std::swap(order[i], order[j]);
    }
    std::vector<bool> meson(L, false);
    for (int i = 0; i < k; ++i) meson[order[i]] = true;

    // each link carries its two rishons entirely on one side
    std::vector<int> ell(L + 1, 0);
    ell[0] = 2;
    for (int b = 1; b < L; ++b) ell[b] = rng.below(2) ? 2 : 0;
    ell[L] = 0;

    SymmetricMPS psi;
    psi.n_matter_ = params.n_matter;
    psi.center_ = 0;
    int q = 0;
    for (int i = 0; i < L; ++i) {
      const GaugeSiteBasis& basis = site_basis(site_kind(i + 1, L));
      const int n_m = meson[i] ? 2 : 0;
      const int label = basis.find(2 - ell[i], n_m, ell[i + 1]);
      if (label < 0) throw std::logic_error("product-state construction failed");
      const ChargeLabel lq{q, ell[i]};
      q += n_m;
      const ChargeLabel rq{q, ell[i + 1]};
      BlockTensor a(BondSpace::single(lq), &basis, BondSpace::single(rq));
      a.block(lq, label, rq)(0, 0) = 1.0;
      psi.sites_.push_back(std::move(a));
    }
    return psi;
  }

  static SymmetricMPS from_tensors(std::vector<BlockTensor> tensors, int center, int n_matter) {
    if (tensors.empty()) throw std::invalid_argument("empty tensor list");
    SymmetricMPS psi;
    psi.sites_ = std::move(tensors);
    psi.center_ = center;
    psi.n_matter_ = n_matter;
    for (size_t i = 0; i + 1 < psi.sites_.size(); ++i)
      if (!(psi.sites_[i].right() == psi.sites_[i + 1].left()))
        throw std::invalid_argument("bond spaces do not chain");
    return psi;
  }

  int length() const { return static_cast<int>(sites_.size()); }
  int n_matter() const { return n_matter_; }
  int center_site() const { return center_ + 1; }
  const BlockTensor& site(int j) const { return sites_.at(j - 1); }
  std::vector<BlockTensor>& tensors() { return sites_; }
  const std::vector<BlockTensor>& tensors() const { return sites_; }

  double norm() const { return std::sqrt(sites_[center_].norm2()); }

  void normalize() {
    const double n = norm();
    if (!(n > 0.0)) throw std::runtime_error("cannot normalize a null state");
    sites_[center_].scale(1.0 / n);
  }

  void move_center(int site) {
    const int target = site - 1;
    if (target < 0 || target >= length()) throw std::out_of_range("site out of range");
    while (center_ < target) {
      auto iso = isometrize(sites_[center_], Direction::Left);
      sites_[center_] = std::move(iso.tensor);
      sites_[center_ + 1] = absorb_from_left(sites_[center_].right(), iso.residual,
                                             sites_[center_ + 1]);
      ++center_;
    }
    while (center_ > target) {
      auto iso = isometrize(sites_[center_], Direction::Right);
      sites_[center_] = std::move(iso.tensor);
      sites_[center_ - 1] = absorb_from_right(sites_[center_ - 1], iso.residual,
                                              sites_[center_].left());
      --center_;
    }
  }

  // One imaginary-time gate: contract the bond pair, apply the propagator
  // blockwise, split with truncation, renormalize. Returns the discarded
  // weight. The center ends on the right (left) site of the bond when
  // center_right is true (false).
  double apply_gate(const GatePropagator& prop, int bond, int chi_max, double tol,
                    bool center_right = true) {
    check_bond(bond);
    if (prop.d1 != sites_[bond - 1].basis().dim() || prop.d2 != sites_[bond].basis().dim())
      throw std::logic_error("propagator does not match the site bases at this bond");
    if (center_ < bond - 1) move_center(bond);
    if (center_ > bond) move_center(bond + 1);
    ThetaBlocks theta = contract_bond(sites_[bond - 1], sites_[bond]);
    ThetaBlocks evolved = apply_pair_operator(prop, theta);
    SplitResult split = split_truncate(evolved, chi_max, tol);
    fold_schmidt(split, center_right);
    sites_[bond - 1] = std::move(split.left);
    sites_[bond] = std::move(split.right);
    center_ = center_right ? bond : bond - 1;
    return split.discarded_weight;
  }

  // <psi| op_j |psi> with a single-site operator in the gauge basis
  double expect_local(int site, const Eigen::MatrixXd& op) {
    move_center(site);
    const BlockTensor& a = sites_[site - 1];
    double val = 0.0;
    for (const auto& [key, ket] : a.blocks())
      for (int pb = 0; pb < a.basis().dim(); ++pb) {
        if (op(pb, key.phys) == 0.0) continue;
        if (const auto* bra = a.find(key.left, pb, key.right))
          val += op(pb, key.phys) * bra->cwiseProduct(ket).sum();
      }
    return val;
  }

  // <psi| op_a(site_a) op_b(site_b) |psi>; the operators act on different
  // sites and have even fermion parity, so no string factors arise
  double expect_two_point(int site_a, const Eigen::MatrixXd& op_a, int site_b,
                          const Eigen::MatrixXd& op_b) {
    if (site_a == site_b) return expect_local(site_a, op_a * op_b);
    const int s1 = std::min(site_a, site_b);
    const int s2 = std::max(site_a, site_b);
    const Eigen::MatrixXd& first = site_a < site_b ? op_a : op_b;
    const Eigen::MatrixXd& second = site_a < site_b ? op_b : op_a;
    move_center(s1);
    EnvMap env = open_environment(s1, first);
    for (int m = s1 + 1; m < s2; ++m) env = step_environment(m, env);
    return close_environment(s2, env, second);
  }

  SchmidtData schmidt_spectrum(int bond) {
    check_bond(bond);
    move_center(bond);
    const BlockTensor& a = sites_[bond - 1];
    std::map<ChargeLabel, std::vector<std::pair<ChargeLabel, int>>> groups;
    for (const auto& [key, b] : a.blocks()) groups[key.right].push_back({key.left, key.phys});
    SchmidtData data;
    data.bond = bond;
    for (auto& [r, legs] : groups) {
      std::sort(legs.begin(), legs.end());
      legs.erase(std::unique(legs.begin(), legs.end()), legs.end());
      int nrows = 0;
      for (const auto& lp : legs) nrows += a.left().degeneracy(lp.first);
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nrows, a.right().degeneracy(r));
      int ro = 0;
      for (const auto& lp : legs) {
        const int deg = a.left().degeneracy(lp.first);
        if (const auto* b = a.find(lp.first, lp.second, r)) m.middleRows(ro, deg) = *b;
        ro += deg;
      }
      Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
      std::vector<double> vals;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-280) vals.push_back(svd.singularValues()(i));
      if (!vals.empty()) data.sectors.push_back({r, std::move(vals)});
    }
    return data;
  }

  // S_l = -sum lambda^2 log lambda^2 (natural log), one value per bond
  std::vector<double> entropy_profile() {
    std::vector<double> out;
    out.reserve(length() - 1);
    for (int bond = 1; bond < length(); ++bond) out.push_back(schmidt_spectrum(bond).entropy());
    return out;
  }

  // expectation of a Hamiltonian bond gate
  double gate_expectation(const TwoSiteGate& gate, int bond) {
    check_bond(bond);
    if (center_ < bond - 1) move_center(bond);
    if (center_ > bond) move_center(bond + 1);
    ThetaBlocks theta = contract_bond(sites_[bond - 1], sites_[bond]);
    ThetaBlocks ht = apply_pair_operator(gate, theta);
    double val = 0.0;
    for (const auto& [key, b] : ht.blocks) {
      auto it = theta.blocks.find(key);
      if (it != theta.blocks.end()) val += it->second.cwiseProduct(b).sum();
    }
    return val;
  }

 private:
  using EnvMap = std::map<std::pair<ChargeLabel, ChargeLabel>, Eigen::MatrixXd>;

  void check_bond(int bond) const {
    if (bond < 1 || bond >= length()) throw std::out_of_range("invalid bond index");
  }

  static BlockTensor absorb_from_left(const BondSpace& new_left,
                                      const std::map<ChargeLabel, Eigen::MatrixXd>& resid,
                                      const BlockTensor& t) {
    BlockTensor out(new_left, t.basis_ptr(), t.right());
    for (const auto& [key, b] : t.blocks()) {
      auto it = resid.find(key.left);
      if (it == resid.end()) continue;
      out.block(key.left, key.phys, key.right) = it->second * b;
    }
    return out;
  }

  static BlockTensor absorb_from_right(const BlockTensor& t,
                                       const std::map<ChargeLabel, Eigen::MatrixXd>& resid,
                                       const BondSpace& new_right) {
    BlockTensor out(t.left(), t.basis_ptr(), new_right);
    for (const auto& [key, b] : t.blocks()) {
      auto it = resid.find(key.right);
      if (it == resid.end()) continue;
      out.block(key.left, key.phys, key.right) = b * it->second;
    }
    return out;
  }

  void fold_schmidt(SplitResult& split, bool into_right) {
    std::map<ChargeLabel, Eigen::VectorXd> lambda;
    for (const auto& [label, vals] : split.schmidt.sectors)
      lambda[label] = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
    if (into_right) {
      for (auto& [key, b] : split.right.blocks()) b = lambda.at(key.left).asDiagonal() * b;
    } else {
      for (auto& [key, b] : split.left.blocks()) b = b * lambda.at(key.right).asDiagonal();
    }
  }

  EnvMap open_environment(int site, const Eigen::MatrixXd& op) const {
    const BlockTensor& a = sites_[site - 1];
    EnvMap env;
    for (const auto& [kk, ket] : a.blocks())
      for (int pb = 0; pb < a.basis().dim(); ++pb) {
        if (op(pb, kk.phys) == 0.0) continue;
        const GaugeState& sb = a.basis().states[pb];
        if (sb.n_r != 2 - kk.left.ell) continue;
        const ChargeLabel rb{kk.left.q + sb.n_m, sb.n_l};
        if (const auto* bra = a.find(kk.left, pb, rb)) {
          auto [it, inserted] = env.try_emplace({kk.right, rb});
          if (inserted) it->second = Eigen::MatrixXd::Zero(ket.cols(), bra->cols());
          it->second += op(pb, kk.phys) * ket.transpose() * (*bra);
        }
      }
    return env;
  }

  EnvMap step_environment(int site, const EnvMap& env) const {
    const BlockTensor& a = sites_[site - 1];
    EnvMap out;
    for (const auto& [labels, e] : env) {
      const auto& [lk, lb] = labels;
      for (int p = 0; p < a.basis().dim(); ++p) {
        const GaugeState& s = a.basis().states[p];
        if (s.n_r != 2 - lk.ell || s.n_r != 2 - lb.ell) continue;
        const ChargeLabel rk{lk.q + s.n_m, s.n_l};
        const ChargeLabel rb{lb.q + s.n_m, s.n_l};
        const auto* ket = a.find(lk, p, rk);
        const auto* bra = a.find(lb, p, rb);
        if (!ket || !bra) continue;
        auto [it, inserted] = out.try_emplace({rk, rb});
        if (inserted) it->second = Eigen::MatrixXd::Zero(ket->cols(), bra->cols());
        it->second += ket->transpose() * e * (*bra);
      }
    }
    return out;
  }

  double close_environment(int site, const EnvMap& env, const Eigen::MatrixXd& op) const {
    const BlockTensor& a = sites_[site - 1];
    double val = 0.0;
    for (const auto& [labels, e] : env) {
      const auto& [lk, lb] = labels;
      for (const auto& [kk, ket] : a.blocks()) {
        if (!(kk.left == lk)) continue;
        for (int pb = 0; pb < a.basis().dim(); ++pb) {
          if (op(pb, kk.phys) == 0.0) continue;
          const GaugeState& sb = a.basis().states[pb];
          if (sb.n_r != 2 - lb.ell) continue;
          const ChargeLabel rb{lb.q + sb.n_m, sb.n_l};
          if (!(rb == kk.right)) continue;  // identity closure to the right
          if (const auto* bra = a.find(lb, pb, rb))
            val += op(pb, kk.phys) * (ket.transpose() * e * (*bra)).trace();
        }
      }
    }
    return val;
  }

  std::vector<BlockTensor> sites_;
  int center_ = 0;
  int n_matter_ = 0;
};

// Apply a sector-blocked two-site operator to a two-site wavefunction. Every
// (left label, right label) group of blocks lives inside exactly one
// conserved sector of the operator.
inline ThetaBlocks apply_pair_operator(const PairBlockOperator& op, const ThetaBlocks& theta) {
  ThetaBlocks out;
  out.left = theta.left;
  out.right = theta.right;
  out.basis1 = theta.basis1;
  out.basis2 = theta.basis2;

  std::map<std::pair<ChargeLabel, ChargeLabel>, std::vector<ThetaKey>> groups;
  for (const auto& [key, b] : theta.blocks) groups[{key.left, key.right}].push_back(key);

  const int d2 = op.d2;
  for (const auto& [lr, keys] : groups) {
    const auto& [l, r] = lr;
    const PairSector* sec = op.find_sector(2 - l.ell, r.q - l.q, r.ell);
    if (!sec) throw std::logic_error("two-site operator does not match the state sector");
    const int n = static_cast<int>(sec->pair_ids.size());
    const int degl = theta.left.degeneracy(l);
    const int degr = theta.right.degeneracy(r);
    Eigen::MatrixXd tm = Eigen::MatrixXd::Zero(n, degl * degr);
    for (const auto& key : keys) {
      const int row = sec->find_pair(key.p1 * d2 + key.p2);
      if (row < 0) throw std::logic_error("two-site operator does not match the state sector");
      const auto& b = theta.blocks.at(key);
      tm.row(row) = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    }
    const Eigen::MatrixXd res = sec->mat * tm;
    for (int row = 0; row < n; ++row) {
      const int pid = sec->pair_ids[row];
      const Eigen::VectorXd v = res.row(row);
      if (v.isZero(0.0)) continue;
      out.blocks[ThetaKey{l, pid / d2, pid % d2, r}] =
          Eigen::Map<const Eigen::MatrixXd>(v.data(), degl, degr);
    }
  }
  return out;
}

inline double total_energy(SymmetricMPS& psi, const std::vector<TwoSiteGate>& gates) {
  if (static_cast<int>(gates.size()) != psi.length() - 1)
    throw std::invalid_argument("need one gate per bond");
  double e = 0.0;
  for (int bond = 1; bond < psi.length(); ++bond) e += psi.gate_expectation(gates[bond - 1], bond);
  return e;
}

inline double overlap(const SymmetricMPS& ket, const SymmetricMPS& bra) {
  if (ket.length() != bra.length()) throw std::invalid_argument("length mismatch");
  std::map<std::pair<ChargeLabel, ChargeLabel>, Eigen::MatrixXd> env;
  for (const auto& [lk, dk] : ket.site(1).left().sectors)
    if (bra.site(1).left().contains(lk))
      env[{lk, lk}] = Eigen::MatrixXd::Identity(dk, bra.site(1).left().degeneracy(lk));
  for (int j = 1; j <= ket.length(); ++j) {
    const BlockTensor& ak = ket.site(j);
    const BlockTensor& ab = bra.site(j);
    std::map<std::pair<ChargeLabel, ChargeLabel>, Eigen::MatrixXd> next;
    for (const auto& [labels, e] : env) {
      const auto& [lk, lb] = labels;
      for (int p = 0; p < ak.basis().dim(); ++p) {
        const GaugeState& s = ak.basis().states[p];
        if (s.n_r != 2 - lk.ell || s.n_r != 2 - lb.ell) continue;
        const ChargeLabel rk{lk.q + s.n_m, s.n_l};
        const ChargeLabel rb{lb.q + s.n_m, s.n_l};
        const auto* bk = ak.find(lk, p, rk);
        const auto* bb = ab.find(lb, p, rb);
        if (!bk || !bb) continue;
        auto [it, inserted] = next.try_emplace({rk, rb});
        if (inserted) it->second = Eigen::MatrixXd::Zero(bk->cols(), bb->cols());
        it->second += bk->transpose() * e * (*bb);
      }
    }
    env = std::move(next);
  }
  double val = 0.0;
  for (const auto& [labels, e] : env)
    if (labels.first == labels.second) val += e.trace();
  return val;
}

// ---------------------------------------------------------------------------
// Measurement helpers
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd matter_density_op(SiteKind kind) {
  return build_density_operators(kind).n_m.asDiagonal();
}

inline std::vector<double> density_profile(SymmetricMPS& psi) {
  std::vector<double> out;
  out.reserve(psi.length());
  for (int j = 1; j <= psi.length(); ++j)
    out.push_back(psi.expect_local(j, matter_density_op(site_kind(j, psi.length()))));
  return out;
}

namespace detail {

template <typename OpA, typename OpB, typename OpDiag>
Eigen::MatrixXd correlation_matrix(SymmetricMPS& psi, OpA op_a, OpB op_b, OpDiag op_diag) {
  const int L = psi.length();
  Eigen::MatrixXd c(L, L);
  for (int j = 1; j <= L; ++j) {
    c(j - 1, j - 1) = psi.expect_local(j, op_diag(site_kind(j, L)));
    for (int k = j + 1; k <= L; ++k) {
      const double v =
          psi.expect_two_point(j, op_a(site_kind(j, L)), k, op_b(site_kind(k, L)));
      c(j - 1, k - 1) = v;
      c(k - 1, j - 1) = v;
    }
  }
  return c;
}

}  // namespace detail

// raw matter density-density correlations <n_j n_k>; diagonal holds <n_j^2>
inline Eigen::MatrixXd density_correlation_matrix(SymmetricMPS& psi) {
  auto n_op = [](SiteKind k) { return matter_density_op(k); };
  auto n2_op = [](SiteKind k) {
    const Eigen::VectorXd d = build_density_operators(k).n_m;
    return Eigen::MatrixXd(d.cwiseProduct(d).asDiagonal());
  };
  return detail::correlation_matrix(psi, n_op, n_op, n2_op);
}

// meson correlations <sigma^-_j sigma^+_k>; diagonal holds the on-site value
inline Eigen::MatrixXd meson_correlation_matrix(SymmetricMPS& psi) {
  auto lower = [](SiteKind k) { return build_meson_operator(k).lower; };
  auto raise = [](SiteKind k) { return build_meson_operator(k).raise; };
  auto onsite = [](SiteKind k) {
    const MesonOps ops = build_meson_operator(k);
    return Eigen::MatrixXd(ops.lower * ops.raise);
  };
  return detail::correlation_matrix(psi, lower, raise, onsite);
}

}  // namespace su2qlm
