#pragma once
// Symmetric Lanczos with full reorthogonalization and explicit residual
// verification. Used above the dense-solver cutoff; desk-scale problems only.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace su2qlm {

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns match values
};

struct LanczosOptions {
  int max_iter = 600;
  double tol = 1e-11;  // residual ||Hv - Ev||
  std::uint64_t seed = 0x51a9c355u;
  int check_interval = 10;
};

inline EigenPairs lanczos_lowest(int dim,
                                 const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& matvec,
                                 int k, LanczosOptions opt = {}) {
  if (k < 1 || k > dim) throw std::invalid_argument("bad number of requested eigenpairs");

  std::uint64_t s = opt.seed;
  auto rand_unit = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
      s += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = s;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      z ^= z >> 31;
      v(i) = static_cast<double>(z) / static_cast<double>(UINT64_MAX) - 0.5;
    }
    v.normalize();
    return v;
  };

  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;  // beta[i] couples basis[i] and basis[i+1]
  auto reorthogonalize = [&](Eigen::VectorXd& w) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : basis) w -= u.dot(w) * u;
  };

  basis.push_back(rand_unit(dim));
  Eigen::VectorXd hv(dim), w(dim);

  const int max_iter = std::min(opt.max_iter, dim);
  for (int m = 1; m <= max_iter; ++m) {
    matvec(basis.back(), hv);
    w = hv;
    if (m >= 2) w -= beta.back() * basis[m - 2];
    const double a = basis.back().dot(w);
    alpha.push_back(a);
    w -= a * basis.back();
    reorthogonalize(w);
    double b = w.norm();
    if (b < 1e-12) {
      // invariant subspace exhausted; continue in the orthogonal complement
      if (m >= dim) b = 0.0;
      w = rand_unit(dim);
      reorthogonalize(w);
      const double nw = w.norm();
      if (nw < 1e-12) b = 0.0;
      if (b == 0.0 && m >= dim) {
        beta.push_back(0.0);
        break;
      }
      w /= nw;
      beta.push_back(0.0);
      basis.push_back(w);
    } else {
      beta.push_back(b);
      basis.push_back(w / b);
    }

    const bool check = (m % opt.check_interval == 0) || m == max_iter || m >= dim;
    if (!check || m < k) continue;

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    EigenPairs out;
    out.values = es.eigenvalues().head(k);
    out.vectors.resize(dim, k);
    bool converged = true;
    for (int i = 0; i < k; ++i) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
      for (int j = 0; j < m; ++j) x += es.eigenvectors()(j, i) * basis[j];
      x.normalize();
      out.vectors.col(i) = x;
      matvec(x, hv);
      if ((hv - out.values(i) * x).norm() > opt.tol) converged = false;
    }
    if (converged || m >= dim) {
      if (!converged) throw std::runtime_error("Lanczos did not converge to the residual tolerance");
      return out;
    }
  }
  throw std::runtime_error("Lanczos did not converge within the iteration budget");
}

}  // namespace su2qlm
