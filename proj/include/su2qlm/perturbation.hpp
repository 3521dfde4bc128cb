#pragma once
// Second-order degenerate perturbation theory at small coupling t: the zero-t
// meson manifold maps to a spin-1/2 chain, and the effective dynamics is an
// antiferromagnetic Heisenberg model in Pauli normalization,
//
//   H_eff = J sum_j (sx sx + sy sy + sz sz - 1),   J = t^2 / (2 g1^2 + eps),
//
// giving an independent analytic cross-check on the simulator.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <vector>

#include "su2qlm/lanczos.hpp"
#include "su2qlm/model.hpp"

namespace su2qlm {

inline double effective_coupling(double t, double g1, double eps) {
  const double denom = 2.0 * g1 * g1 + eps;
  if (denom == 0.0) throw std::invalid_argument("vanishing denominator in effective coupling");
  return t * t / denom;
}

// Ground energy of the open Heisenberg chain (Pauli matrices, L-1 bonds) in
// the sector with M up spins, in units of J. Exact diagonalization; the
// chains needed here are far below the Bethe-ansatz scale.
inline double heisenberg_ground_energy(int L, int M) {
  if (L < 1 || L > 16) throw std::invalid_argument("Heisenberg chain length exceeds the cap");
  if (M < 0 || M > L) throw std::invalid_argument("magnetization out of range");
  if (L == 1 || M == 0 || M == L) return 0.0;

  std::vector<std::uint32_t> states;
  std::vector<int> index(1u << L, -1);
  for (std::uint32_t m = 0; m < (1u << L); ++m)
    if (__builtin_popcount(m) == M) {
      index[m] = static_cast<int>(states.size());
      states.push_back(m);
    }
  const int dim = static_cast<int>(states.size());

  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < dim; ++c) {
    const std::uint32_t s = states[c];
    double diag = 0.0;
    for (int j = 0; j + 1 < L; ++j) {
      const bool a = (s >> j) & 1u;
      const bool b = (s >> (j + 1)) & 1u;
      if (a != b) {
        diag += -2.0;  // sz sz - 1 on antiparallel neighbours
        const std::uint32_t flipped = s ^ (3u << j);
        trip.emplace_back(index[flipped], c, 2.0);  // sx sx + sy sy exchange
      }
    }
    if (diag != 0.0) trip.emplace_back(c, c, diag);
  }
  Eigen::SparseMatrix<double> h(dim, dim);
  h.setFromTriplets(trip.begin(), trip.end());

  if (dim < 2000) {
    const Eigen::MatrixXd hd(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hd);
    return es.eigenvalues()(0);
  }
  return lanczos_lowest(
             dim, [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = h * x; }, 1)
      .values(0);
}

// -(L-1) eps + J E_Heis(L, N_M/2): the perturbative ground-energy prediction.
inline double pt_prediction(const ModelParams& params) {
  params.validate();
  if (params.n_matter % 2 != 0)
    throw std::invalid_argument("the meson picture needs an even matter number");
  const double j = effective_coupling(params.t, params.g1, params.eps);
  return -(params.L - 1) * params.eps +
         j * heisenberg_ground_energy(params.L, params.n_matter / 2);
}

}  // namespace su2qlm
