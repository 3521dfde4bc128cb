#pragma once
// Charge-labelled block-sparse rank-3 tensors: the substrate of the symmetric
// MPS. A bond carries abelian labels (q, ell) = (cumulative matter number,
// rishon occupancy deposited on the left half of the downstream link); a
// block (l, p, r) may exist only under the selection rules
//
//   q_r = q_l + n_M(p),   n_R(p) = 2 - ell_l,   n_L(p) = ell_r.
//
// All kernels are deterministic: keys are kept in sorted maps and every
// reduction runs in label order.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "su2qlm/model.hpp"

namespace su2qlm {

struct ChargeLabel {
  int q = 0;
  int ell = 0;
  friend bool operator==(const ChargeLabel&, const ChargeLabel&) = default;
  friend auto operator<=>(const ChargeLabel&, const ChargeLabel&) = default;
};

struct BondSpace {
  std::vector<std::pair<ChargeLabel, int>> sectors;  // sorted by label, unique

  static BondSpace single(ChargeLabel label, int deg = 1) {
    BondSpace bs;
    bs.sectors.push_back({label, deg});
    return bs;
  }

  void add(ChargeLabel label, int deg) {
    auto it = std::lower_bound(sectors.begin(), sectors.end(), label,
                               [](const auto& s, const ChargeLabel& l) { return s.first < l; });
    if (it != sectors.end() && it->first == label)
      throw std::logic_error("duplicate bond-space label");
    sectors.insert(it, {label, deg});
  }

  int total_dim() const {
    int n = 0;
    for (const auto& [l, d] : sectors) n += d;
    return n;
  }

  int degeneracy(ChargeLabel label) const {
    for (const auto& [l, d] : sectors)
      if (l == label) return d;
    return 0;
  }

  bool contains(ChargeLabel label) const { return degeneracy(label) > 0; }

  // row offset of a label in the dense (label-ordered) layout
  int offset(ChargeLabel label) const {
    int n = 0;
    for (const auto& [l, d] : sectors) {
      if (l == label) return n;
      n += d;
    }
    return -1;
  }

  friend bool operator==(const BondSpace&, const BondSpace&) = default;
};

struct BlockKey {
  ChargeLabel left;
  int phys = 0;
  ChargeLabel right;
  friend auto operator<=>(const BlockKey&, const BlockKey&) = default;
};

class BlockTensor {
 public:
  BlockTensor() = default;
  BlockTensor(BondSpace left, const GaugeSiteBasis* basis, BondSpace right)
      : left_(std::move(left)), right_(std::move(right)), basis_(basis) {}

  const BondSpace& left() const { return left_; }
  const BondSpace& right() const { return right_; }
  const GaugeSiteBasis& basis() const { return *basis_; }
  const GaugeSiteBasis* basis_ptr() const { return basis_; }

  bool allowed(ChargeLabel l, int p, ChargeLabel r) const {
    const GaugeState& s = basis_->states[p];
    return r.q == l.q + s.n_m && s.n_r == 2 - l.ell && s.n_l == r.ell;
  }

  Eigen::MatrixXd& block(ChargeLabel l, int p, ChargeLabel r) {
    if (!allowed(l, p, r)) throw std::logic_error("selection rules forbid this block");
    auto [it, inserted] = blocks_.try_emplace(BlockKey{l, p, r});
    if (inserted) it->second = Eigen::MatrixXd::Zero(left_.degeneracy(l), right_.degeneracy(r));
    return it->second;
  }

  const Eigen::MatrixXd* find(ChargeLabel l, int p, ChargeLabel r) const {
    auto it = blocks_.find(BlockKey{l, p, r});
    return it == blocks_.end() ? nullptr : &it->second;
  }

  const std::map<BlockKey, Eigen::MatrixXd>& blocks() const { return blocks_; }
  std::map<BlockKey, Eigen::MatrixXd>& blocks() { return blocks_; }

  double norm2() const {
    double n = 0.0;
    for (const auto& [k, b] : blocks_) n += b.squaredNorm();
    return n;
  }

  void scale(double factor) {
    for (auto& [k, b] : blocks_) b *= factor;
  }

  void set_left(BondSpace bs) { left_ = std::move(bs); }
  void set_right(BondSpace bs) { right_ = std::move(bs); }

  // Dense reconstruction, one (total left dim) x (total right dim) slice per
  // physical index. Oracle/debug path only.
  std::vector<Eigen::MatrixXd> dense_slices() const {
    std::vector<Eigen::MatrixXd> out(basis_->dim(),
                                     Eigen::MatrixXd::Zero(left_.total_dim(), right_.total_dim()));
    for (const auto& [key, b] : blocks_) {
      const int ro = left_.offset(key.left);
      const int co = right_.offset(key.right);
      out[key.phys].block(ro, co, b.rows(), b.cols()) = b;
    }
    return out;
  }

 private:
  BondSpace left_, right_;
  const GaugeSiteBasis* basis_ = nullptr;
  std::map<BlockKey, Eigen::MatrixXd> blocks_;
};

// ---------------------------------------------------------------------------
// Two-site (rank-4) block object
// ---------------------------------------------------------------------------

struct ThetaKey {
  ChargeLabel left;
  int p1 = 0;
  int p2 = 0;
  ChargeLabel right;
  friend auto operator<=>(const ThetaKey&, const ThetaKey&) = default;
};

struct ThetaBlocks {
  BondSpace left, right;
  const GaugeSiteBasis* basis1 = nullptr;
  const GaugeSiteBasis* basis2 = nullptr;
  std::map<ThetaKey, Eigen::MatrixXd> blocks;

  double norm2() const {
    double n = 0.0;
    for (const auto& [k, b] : blocks) n += b.squaredNorm();
    return n;
  }

  void scale(double factor) {
    for (auto& [k, b] : blocks) b *= factor;
  }

  // mid-bond label sitting between the two physical legs of a block
  ChargeLabel mid_label(const ThetaKey& key) const {
    const GaugeState& s1 = basis1->states[key.p1];
    return ChargeLabel{key.left.q + s1.n_m, s1.n_l};
  }
};

// Blockwise product over the shared bond. For a fixed (l, p1) the shared
// label is unique, so each output block is a single matrix product.
inline ThetaBlocks contract_bond(const BlockTensor& a, const BlockTensor& b) {
  if (!(a.right() == b.left())) throw std::invalid_argument("bond-space mismatch in contraction");
  ThetaBlocks theta;
  theta.left = a.left();
  theta.right = b.right();
  theta.basis1 = a.basis_ptr();
  theta.basis2 = b.basis_ptr();
  for (const auto& [ka, ba] : a.blocks())
    for (const auto& [kb, bb] : b.blocks()) {
      if (!(ka.right == kb.left)) continue;
      auto [it, inserted] =
          theta.blocks.try_emplace(ThetaKey{ka.left, ka.phys, kb.phys, kb.right});
      if (inserted) it->second = Eigen::MatrixXd::Zero(ba.rows(), bb.cols());
      it->second += ba * bb;
    }
  return theta;
}

// ---------------------------------------------------------------------------
// Truncated blockwise SVD
// ---------------------------------------------------------------------------

struct SchmidtData {
  int bond = -1;
  // (label, singular values sorted descending), labels ascending
  std::vector<std::pair<ChargeLabel, std::vector<double>>> sectors;

  double entropy() const {
    double s = 0.0;
    for (const auto& [l, vals] : sectors)
      for (double v : vals) {
        const double p = v * v;
        if (p > 0.0) s -= p * std::log(p);
      }
    return s;
  }

  int count() const {
    int n = 0;
    for (const auto& [l, vals] : sectors) n += static_cast<int>(vals.size());
    return n;
  }

  double norm2() const {
    double n = 0.0;
    for (const auto& [l, vals] : sectors)
      for (double v : vals) n += v * v;
    return n;
  }
};

struct SplitResult {
  BlockTensor left;      // left-isometric
  SchmidtData schmidt;   // kept values, renormalized to unit 2-norm
  BlockTensor right;     // right-isometric
  double discarded_weight = 0.0;
  double theta_norm = 0.0;  // Frobenius norm of the input
};

namespace detail {

struct SectorSVD {
  ChargeLabel mid;
  std::vector<std::pair<ChargeLabel, int>> rows;  // (l, p1), sorted
  std::vector<std::pair<ChargeLabel, int>> cols;  // (r, p2), sorted
  Eigen::MatrixXd u, v;                           // thin factors
  Eigen::VectorXd sv;
};

}  // namespace detail

// Per-charge-sector SVD of the two-site object; globally keeps the chi_max
// largest singular values, additionally dropping relative weights below tol,
// then renormalizes. Degenerate values at the cut break ties by ascending
// charge label, keeping truncation deterministic.
inline SplitResult split_truncate(const ThetaBlocks& theta, int chi_max, double tol) {
  if (chi_max < 1) throw std::invalid_argument("chi_max must be >= 1");
  if (tol < 0.0) throw std::invalid_argument("tol must be >= 0");

  // group row/col legs by the mid-bond label
  std::map<ChargeLabel, detail::SectorSVD> sectors;
  for (const auto& [key, block] : theta.blocks) {
    const ChargeLabel mid = theta.mid_label(key);
    auto& sec = sectors[mid];
    sec.mid = mid;
    sec.rows.push_back({key.left, key.p1});
    sec.cols.push_back({key.right, key.p2});
  }
  for (auto& [mid, sec] : sectors) {
    auto dedup = [](std::vector<std::pair<ChargeLabel, int>>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedup(sec.rows);
    dedup(sec.cols);
  }

  double total_weight = 0.0;
  for (auto& [mid, sec] : sectors) {
    int nrows = 0, ncols = 0;
    std::map<std::pair<ChargeLabel, int>, int> row_off, col_off;
    for (const auto& rp : sec.rows) {
      row_off[rp] = nrows;
      nrows += theta.left.degeneracy(rp.first);
    }
    for (const auto& cp : sec.cols) {
      col_off[cp] = ncols;
      ncols += theta.right.degeneracy(cp.first);
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nrows, ncols);
    for (const auto& [key, block] : theta.blocks) {
      if (!(theta.mid_label(key) == mid)) continue;
      m.block(row_off.at({key.left, key.p1}), col_off.at({key.right, key.p2}), block.rows(),
              block.cols()) = block;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    sec.u = svd.matrixU();
    sec.v = svd.matrixV();
    sec.sv = svd.singularValues();
    total_weight += sec.sv.squaredNorm();
  }
  if (!(total_weight > 0.0)) throw std::runtime_error("null state: all singular values vanish");

  // global truncation across sectors
  struct Candidate {
    double sv;
    ChargeLabel mid;
    int idx;
  };
  std::vector<Candidate> cands;
  for (const auto& [mid, sec] : sectors)
    for (int i = 0; i < sec.sv.size(); ++i)
      if (sec.sv(i) > 0.0) cands.push_back({sec.sv(i), mid, i});
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.sv != b.sv) return a.sv > b.sv;
    if (!(a.mid == b.mid)) return a.mid < b.mid;
    return a.idx < b.idx;
  });

  std::map<ChargeLabel, std::vector<int>> kept;
  double kept_weight = 0.0;
  int n_kept = 0;
  for (const auto& c : cands) {
    if (n_kept >= chi_max) break;
    if (c.sv * c.sv / total_weight < tol) break;  // sorted, so the rest is smaller
    kept[c.mid].push_back(c.idx);
    kept_weight += c.sv * c.sv;
    ++n_kept;
  }
  if (n_kept == 0) throw std::runtime_error("truncation kept no singular values");
  for (auto& [mid, idx] : kept) std::sort(idx.begin(), idx.end());

  SplitResult res;
  res.theta_norm = std::sqrt(total_weight);
  res.discarded_weight = 1.0 - kept_weight / total_weight;

  BondSpace mid_space;
  for (const auto& [mid, idx] : kept) mid_space.add(mid, static_cast<int>(idx.size()));

  res.left = BlockTensor(theta.left, theta.basis1, mid_space);
  res.right = BlockTensor(mid_space, theta.basis2, theta.right);

  const double renorm = 1.0 / std::sqrt(kept_weight);
  for (const auto& [mid, idx] : kept) {
    const auto& sec = sectors.at(mid);
    const int k = static_cast<int>(idx.size());

    std::vector<double> vals(k);
    for (int i = 0; i < k; ++i) vals[i] = sec.sv(idx[i]) * renorm;
    res.schmidt.sectors.push_back({mid, std::move(vals)});

    Eigen::MatrixXd u_kept(sec.u.rows(), k), v_kept(sec.v.rows(), k);
    for (int i = 0; i < k; ++i) {
      u_kept.col(i) = sec.u.col(idx[i]);
      v_kept.col(i) = sec.v.col(idx[i]);
    }
    int ro = 0;
    for (const auto& rp : sec.rows) {
      const int deg = theta.left.degeneracy(rp.first);
      res.left.block(rp.first, rp.second, mid) = u_kept.middleRows(ro, deg);
      ro += deg;
    }
    int co = 0;
    for (const auto& cp : sec.cols) {
      const int deg = theta.right.degeneracy(cp.first);
      res.right.block(mid, cp.second, cp.first) = v_kept.middleRows(co, deg).transpose();
      co += deg;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// QR-based isometrization
// ---------------------------------------------------------------------------

enum class Direction { Left, Right };

struct IsometrizeResult {
  BlockTensor tensor;
  // residual toward the neighbour, keyed by the bond label it acts on
  std::map<ChargeLabel, Eigen::MatrixXd> residual;
};

namespace detail {

// thin QR with the R diagonal made nonnegative, so an isometric input yields
// R = identity
inline void thin_qr(const Eigen::MatrixXd& m, Eigen::MatrixXd& q, Eigen::MatrixXd& r) {
  const int k = static_cast<int>(std::min(m.rows(), m.cols()));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), k);
  r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (int i = 0; i < k; ++i)
    if (r(i, i) < 0.0) {
      q.col(i) = -q.col(i);
      r.row(i) = -r.row(i);
    }
}

}  // namespace detail

inline IsometrizeResult isometrize(const BlockTensor& tensor, Direction dir) {
  if (tensor.blocks().empty()) throw std::runtime_error("cannot isometrize a null tensor");
  IsometrizeResult res;

  if (dir == Direction::Left) {
    // group by right label; stack (l, p) legs as rows
    std::map<ChargeLabel, std::vector<std::pair<ChargeLabel, int>>> groups;
    for (const auto& [key, b] : tensor.blocks()) groups[key.right].push_back({key.left, key.phys});

    BondSpace new_right;
    std::map<BlockKey, Eigen::MatrixXd> new_blocks;
    for (auto& [r, legs] : groups) {
      std::sort(legs.begin(), legs.end());
      legs.erase(std::unique(legs.begin(), legs.end()), legs.end());
      int nrows = 0;
      for (const auto& lp : legs) nrows += tensor.left().degeneracy(lp.first);
      const int degr = tensor.right().degeneracy(r);
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nrows, degr);
      int ro = 0;
      for (const auto& lp : legs) {
        const int deg = tensor.left().degeneracy(lp.first);
        if (const auto* b = tensor.find(lp.first, lp.second, r)) m.middleRows(ro, deg) = *b;
        ro += deg;
      }
      Eigen::MatrixXd q, rr;
      detail::thin_qr(m, q, rr);
      new_right.add(r, static_cast<int>(q.cols()));
      res.residual[r] = rr;
      ro = 0;
      for (const auto& lp : legs) {
        const int deg = tensor.left().degeneracy(lp.first);
        new_blocks[BlockKey{lp.first, lp.second, r}] = q.middleRows(ro, deg);
        ro += deg;
      }
    }
    res.tensor = BlockTensor(tensor.left(), tensor.basis_ptr(), new_right);
    for (auto& [key, b] : new_blocks) res.tensor.block(key.left, key.phys, key.right) = b;
    return res;
  }

  // Direction::Right: group by left label; stack (p, r) legs as columns
  std::map<ChargeLabel, std::vector<std::pair<int, ChargeLabel>>> groups;
  for (const auto& [key, b] : tensor.blocks()) groups[key.left].push_back({key.phys, key.right});

  BondSpace new_left;
  std::map<BlockKey, Eigen::MatrixXd> new_blocks;
  for (auto& [l, legs] : groups) {
    std::sort(legs.begin(), legs.end());
    legs.erase(std::unique(legs.begin(), legs.end()), legs.end());
    int ncols = 0;
    for (const auto& pr : legs) ncols += tensor.right().degeneracy(pr.second);
    const int degl = tensor.left().degeneracy(l);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(degl, ncols);
    int co = 0;
    for (const auto& pr : legs) {
      const int deg = tensor.right().degeneracy(pr.second);
      if (const auto* b = tensor.find(l, pr.first, pr.second)) m.middleCols(co, deg) = *b;
      co += deg;
    }
    Eigen::MatrixXd q, rr;
    detail::thin_qr(m.transpose(), q, rr);
    new_left.add(l, static_cast<int>(q.cols()));
    res.residual[l] = rr.transpose();  // (deg_l x k), absorbed by the left neighbour
    int co2 = 0;
    for (const auto& pr : legs) {
      const int deg = tensor.right().degeneracy(pr.second);
      new_blocks[BlockKey{l, pr.first, pr.second}] = q.middleRows(co2, deg).transpose();
      co2 += deg;
    }
  }
  res.tensor = BlockTensor(new_left, tensor.basis_ptr(), tensor.right());
  for (auto& [key, b] : new_blocks) res.tensor.block(key.left, key.phys, key.right) = b;
  return res;
}

}  // namespace su2qlm
