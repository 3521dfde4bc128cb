#pragma once
// Observables and statistical post-processing: the entanglement-profile fit
// with Fermi oscillations, CDW order parameters from the static structure
// factor, meson correlation lengths (moment formula and exponential fit),
// transition locators and thermodynamic-limit extrapolations.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace su2qlm {

// ---------------------------------------------------------------------------
// Entanglement-profile fit
// ---------------------------------------------------------------------------

struct CCFitResult {
  double c = 0.0;        // central charge
  double c_prime = 0.0;  // non-universal constant
  double b0 = 0.0;       // oscillation amplitude
  double b1 = 0.0;       // oscillation decay exponent
  double k_f = 0.0;      // Fermi wave-vector, folded into [0, pi]
  double residual_norm = 0.0;
  std::array<double, 5> std_error{};  // order: c, c', b0, b1, k_F
  int n_points = 0;
};

// S_l = (c/6) log(L sin(pi l / L)) + c' + b0 cos(2 k_F (l - L/2)) sin(pi l / L)^{-b1}
inline double calabrese_cardy_profile(int L, int ell, double c, double c_prime, double b0,
                                      double b1, double k_f) {
  const double s = std::sin(M_PI * ell / L);
  return c / 6.0 * std::log(L * s) + c_prime +
         b0 * std::cos(2.0 * k_f * (ell - L / 2.0)) * std::pow(s, -b1);
}

namespace detail {

struct CCModel {
  int L;
  std::vector<int> ells;
  std::vector<double> data;

  Eigen::VectorXd residual(const Eigen::VectorXd& p) const {
    Eigen::VectorXd r(ells.size());
    for (size_t i = 0; i < ells.size(); ++i)
      r(i) = data[i] - calabrese_cardy_profile(L, ells[i], p(0), p(1), p(2), p(3), p(4));
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p) const {  // of the model
    Eigen::MatrixXd j(ells.size(), 5);
    for (size_t i = 0; i < ells.size(); ++i) {
      const int ell = ells[i];
      const double s = std::sin(M_PI * ell / L);
      const double env = std::pow(s, -p(3));
      const double phase = 2.0 * p(4) * (ell - L / 2.0);
      j(i, 0) = std::log(L * s) / 6.0;
      j(i, 1) = 1.0;
      j(i, 2) = std::cos(phase) * env;
      j(i, 3) = -p(2) * std::cos(phase) * env * std::log(s);
      j(i, 4) = -2.0 * (ell - L / 2.0) * p(2) * std::sin(phase) * env;
    }
    return j;
  }
};

// damped (Levenberg-Marquardt) least squares; returns final parameters and
// writes the squared residual norm
inline Eigen::VectorXd levenberg_marquardt(const CCModel& model, Eigen::VectorXd p,
                                           double& final_cost) {
  double lambda = 1e-3;
  Eigen::VectorXd r = model.residual(p);
  double cost = r.squaredNorm();
  for (int iter = 0; iter < 400; ++iter) {
    const Eigen::MatrixXd j = model.jacobian(p);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;
    bool stepped = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd a = jtj;
      a.diagonal().array() += lambda * (jtj.diagonal().array() + 1e-12);
      const Eigen::VectorXd delta = a.ldlt().solve(g);
      const Eigen::VectorXd p_try = p + delta;
      const Eigen::VectorXd r_try = model.residual(p_try);
      const double cost_try = r_try.squaredNorm();
      if (cost_try < cost) {
        const double rel = (cost - cost_try) / std::max(cost, 1e-300);
        p = p_try;
        r = r_try;
        cost = cost_try;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (rel < 1e-14 || delta.cwiseAbs().maxCoeff() < 1e-14) {
          final_cost = cost;
          return p;
        }
        break;
      }
      lambda *= 4.0;
    }
    if (!stepped) break;  // no downhill direction left at any damping
  }
  final_cost = cost;
  return p;
}

}  // namespace detail

inline CCFitResult fit_central_charge(const std::vector<double>& profile, int L,
                                      double discard_fraction = 0.10) {
  if (static_cast<int>(profile.size()) != L - 1)
    throw std::invalid_argument("profile must have one entry per bond (L-1 values)");
  double max_s = 0.0;
  for (double s : profile) max_s = std::max(max_s, std::abs(s));
  if (max_s < 1e-8) throw std::runtime_error("degenerate fit: entanglement profile is flat");

  const int skip = static_cast<int>(std::lround(discard_fraction * L));
  detail::CCModel model;
  model.L = L;
  for (int ell = skip + 1; ell <= L - 1 - skip; ++ell) {
    model.ells.push_back(ell);
    model.data.push_back(profile[ell - 1]);
  }
  const int n = static_cast<int>(model.ells.size());
  if (n < 6) throw std::runtime_error("too few profile points inside the fit window");

  // initial guesses: c and c' from the conformal slope, k_F from the dominant
  // discrete frequency of the residual, b0 from the residual amplitude, b1 = 1
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = std::log(L * std::sin(M_PI * model.ells[i] / L)) / 6.0;
    x(i, 1) = 1.0;
    y(i) = model.data[i];
  }
  const Eigen::VectorXd lin = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  Eigen::VectorXd resid = y - x * lin;

  // de-envelope with the b1 = 1 guess before scanning frequencies
  Eigen::VectorXd flat(n);
  for (int i = 0; i < n; ++i) flat(i) = resid(i) * std::sin(M_PI * model.ells[i] / L);
  double best_power = -1.0, omega_star = M_PI / 2.0;
  const int n_scan = 2048;
  for (int iw = 1; iw < n_scan; ++iw) {
    const double omega = M_PI * iw / n_scan;
    std::complex<double> z = 0.0;
    for (int i = 0; i < n; ++i)
      z += flat(i) * std::exp(std::complex<double>(0.0, -omega * (model.ells[i] - L / 2.0)));
    if (std::norm(z) > best_power) {
      best_power = std::norm(z);
      omega_star = omega;
    }
  }
  const double b0_guess = std::max(std::sqrt(2.0 * flat.squaredNorm() / n), 1e-6);

  Eigen::VectorXd p0(5);
  p0 << lin(0), lin(1), b0_guess, 1.0, omega_star / 2.0;

  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_p = p0;
  for (double kf0 : {omega_star / 2.0, M_PI / 2.0 - omega_star / 2.0, M_PI / 4.0}) {
    Eigen::VectorXd p = p0;
    p(4) = kf0;
    double cost = 0.0;
    const Eigen::VectorXd fitted = detail::levenberg_marquardt(model, p, cost);
    if (cost < best_cost) {
      best_cost = cost;
      best_p = fitted;
    }
  }
  if (!std::isfinite(best_cost)) throw std::runtime_error("entanglement-profile fit diverged");

  // fold k_F into [0, pi]; the profile is exactly invariant under
  // k_F -> k_F + 2 pi and k_F -> 2 pi - k_F on (half-)integer abscissae
  double kf = std::fmod(std::abs(best_p(4)), 2.0 * M_PI);
  if (kf > M_PI) kf = 2.0 * M_PI - kf;
  best_p(4) = kf;

  CCFitResult out;
  out.c = best_p(0);
  out.c_prime = best_p(1);
  out.b0 = best_p(2);
  out.b1 = best_p(3);
  out.k_f = best_p(4);
  out.residual_norm = std::sqrt(best_cost);
  out.n_points = n;

  // linearized covariance at the optimum
  if (n > 5) {
    const Eigen::MatrixXd j = model.jacobian(best_p);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const double sigma2 = best_cost / (n - 5);
    const Eigen::MatrixXd cov =
        sigma2 * (jtj + 1e-300 * Eigen::MatrixXd::Identity(5, 5)).ldlt().solve(
                     Eigen::MatrixXd::Identity(5, 5));
    for (int i = 0; i < 5; ++i) out.std_error[i] = std::sqrt(std::max(cov(i, i), 0.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CDW order parameter from the static structure factor
// ---------------------------------------------------------------------------

// zeta_k = sqrt( sum_{j != j'} e^{ik(j-j')} <(n_j - f)(n_j' - f)> / (L(L-1)) )
// computed from the raw correlation matrix <n_j n_j'> and the density profile.
// The phase-weighted double sum is real by symmetry; small negative radicands
// from floating-point noise are clipped, anything below -1e-10 is an error.
inline double cdw_order_parameter(const Eigen::MatrixXd& nn_corr, const Eigen::VectorXd& density,
                                  double k, double f_m) {
  const int L = static_cast<int>(density.size());
  if (nn_corr.rows() != L || nn_corr.cols() != L)
    throw std::invalid_argument("correlation matrix and density profile sizes differ");
  if (k < 0.0 || k >= 2.0 * M_PI) throw std::invalid_argument("k must lie in [0, 2pi)");
  double sum = 0.0;
  for (int j = 0; j < L; ++j)
    for (int jp = 0; jp < L; ++jp) {
      if (j == jp) continue;
      const double centered =
          nn_corr(j, jp) - f_m * density(j) - f_m * density(jp) + f_m * f_m;
      sum += std::cos(k * (j - jp)) * centered;
    }
  sum /= static_cast<double>(L) * (L - 1);
  if (sum < -1e-10)
    throw std::runtime_error("inconsistent correlations: negative structure-factor radicand");
  return std::sqrt(std::max(sum, 0.0));
}

// ---------------------------------------------------------------------------
// Meson correlator series and correlation lengths
// ---------------------------------------------------------------------------

struct CorrelatorSeries {
  std::vector<int> separations;  // positive l; the series is symmetrized in l <-> -l
  std::vector<double> values;
  double window_fraction = 0.5;
};

// Bulk average of <sigma^-_j sigma^+_{j+l}> over reference sites j in the
// central window, symmetrized in the sign of l.
inline CorrelatorSeries meson_correlator_series(const Eigen::MatrixXd& meson_corr,
                                                double window_fraction = 0.5) {
  const int L = static_cast<int>(meson_corr.rows());
  if (window_fraction <= 0.0 || window_fraction > 1.0)
    throw std::invalid_argument("window fraction must lie in (0, 1]");
  const int margin = static_cast<int>(std::floor(L * (1.0 - window_fraction) / 2.0));
  const int lo = margin + 1, hi = L - margin;  // 1-based reference sites
  CorrelatorSeries series;
  series.window_fraction = window_fraction;
  for (int ell = 1; ell < L; ++ell) {
    double sum = 0.0;
    int count = 0;
    for (int j = lo; j <= hi; ++j) {
      if (j + ell <= L) {
        sum += meson_corr(j - 1, j + ell - 1);
        ++count;
      }
      if (j - ell >= 1) {
        sum += meson_corr(j - 1, j - ell - 1);
        ++count;
      }
    }
    if (count > 0) {
      series.separations.push_back(ell);
      series.values.push_back(sum / count);
    }
  }
  return series;
}

// xi = sqrt( sum_{l != 0} (|l|-1)^2 C_l / sum_{l != 0} C_l ); with the series
// symmetric in l the signed sums reduce to sums over l > 0.
inline double correlation_length_moment(const CorrelatorSeries& series) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < series.separations.size(); ++i) {
    const double l = series.separations[i];
    num += (l - 1.0) * (l - 1.0) * series.values[i];
    den += series.values[i];
  }
  if (den <= 0.0) throw std::runtime_error("nonpositive correlator sum in the moment formula");
  const double ratio = num / den;
  if (ratio < 0.0) throw std::runtime_error("negative squared correlation length");
  return std::sqrt(ratio);
}

struct CorrelationFit {
  double a0 = 0.0;
  double eta = 0.0;
  double xi = 0.0;
  bool xi_is_lower_bound = false;  // no decay resolved within the data range
  double residual_norm = 0.0;
};

// least squares of log C_l = log a0 - eta log l - l / xi over positive entries
inline CorrelationFit correlation_length_fit(const CorrelatorSeries& series) {
  std::vector<int> ls;
  std::vector<double> logc;
  for (size_t i = 0; i < series.separations.size(); ++i)
    if (series.values[i] > 0.0) {
      ls.push_back(series.separations[i]);
      logc.push_back(std::log(series.values[i]));
    }
  const int n = static_cast<int>(ls.size());
  if (n < 6) throw std::runtime_error("too few positive correlator points for the fit");
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = -std::log(static_cast<double>(ls[i]));
    x(i, 2) = -static_cast<double>(ls[i]);
    y(i) = logc[i];
  }
  const Eigen::VectorXd beta = x.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
  CorrelationFit fit;
  fit.a0 = std::exp(beta(0));
  fit.eta = beta(1);
  fit.residual_norm = (x * beta - y).norm();
  const double inv_xi = beta(2);
  const double l_max = ls.back();
  if (inv_xi <= 0.0) {
    fit.xi = std::numeric_limits<double>::infinity();
    fit.xi_is_lower_bound = true;
  } else {
    fit.xi = 1.0 / inv_xi;
    fit.xi_is_lower_bound = fit.xi > l_max;
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Transition locators and extrapolations
// ---------------------------------------------------------------------------

struct TransitionPoint {
  double t_star = 0.0;
  double uncertainty = 0.0;  // local grid spacing
  bool tied = false;         // several grid points share the steepest slope
};

inline TransitionPoint steepest_slope(const std::vector<double>& ts,
                                      const std::vector<double>& zetas) {
  const int n = static_cast<int>(ts.size());
  if (n < 3 || zetas.size() != ts.size())
    throw std::invalid_argument("need at least three grid points");
  for (int i = 1; i < n; ++i)
    if (!(ts[i] > ts[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
  double best = -1.0;
  int best_i = 1;
  bool tied = false;
  for (int i = 1; i + 1 < n; ++i) {
    const double slope = std::abs((zetas[i + 1] - zetas[i - 1]) / (ts[i + 1] - ts[i - 1]));
    if (slope > best * (1.0 + 1e-12)) {
      best = slope;
      best_i = i;
      tied = false;
    } else if (slope >= best * (1.0 - 1e-12)) {
      tied = true;  // keep the earlier (smaller t) point
    }
  }
  TransitionPoint out;
  out.t_star = ts[best_i];
  out.uncertainty = (ts[best_i + 1] - ts[best_i - 1]) / 2.0;
  out.tied = tied;
  return out;
}

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_std_error = 0.0;
};

// ordinary least squares of y against 1/L; the intercept estimates the
// thermodynamic limit
inline LinearFit extrapolate_thermo(const std::vector<std::pair<double, double>>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 2) throw std::invalid_argument("need at least two system sizes");
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    if (points[i].first <= 0.0) throw std::invalid_argument("system sizes must be positive");
    x(i, 0) = 1.0;
    x(i, 1) = 1.0 / points[i].first;
    y(i) = points[i].second;
  }
  double distinct = 0.0;
  for (int i = 1; i < n; ++i) distinct = std::max(distinct, std::abs(x(i, 1) - x(0, 1)));
  if (distinct < 1e-15) throw std::invalid_argument("degenerate abscissae");
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::VectorXd beta = xtx.ldlt().solve(x.transpose() * y);
  LinearFit fit;
  fit.intercept = beta(0);
  fit.slope = beta(1);
  if (n > 2) {
    const double sigma2 = (y - x * beta).squaredNorm() / (n - 2);
    fit.intercept_std_error = std::sqrt(std::max(sigma2 * xtx.inverse()(0, 0), 0.0));
  }
  return fit;
}

struct PowerLawFit {
  double amplitude = 0.0;
  double nu = 0.0;
  double residual_norm = 0.0;
};

// xi = A |t - t_c|^{-nu} via least squares on log-log data
inline PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 2) throw std::invalid_argument("need at least two points");
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    if (points[i].first <= 0.0 || points[i].second <= 0.0)
      throw std::invalid_argument("power-law fit needs positive abscissae and ordinates");
    x(i, 0) = 1.0;
    x(i, 1) = -std::log(points[i].first);
    y(i) = std::log(points[i].second);
  }
  const Eigen::VectorXd beta = x.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
  PowerLawFit fit;
  fit.amplitude = std::exp(beta(0));
  fit.nu = beta(1);
  fit.residual_norm = (x * beta - y).norm();
  return fit;
}

// ---------------------------------------------------------------------------
// Bond-dimension error estimate and Fermi-trend comparison
// ---------------------------------------------------------------------------

struct ObservableSummary {
  int L = 0;
  int n_matter = 0;
  double t = 0.0;
  double energy = 0.0;
  double zeta = 0.0;
};

struct ChiDiscrepancy {
  double energy = 0.0;
  double zeta = 0.0;
};

// elementwise |a - b| between two runs that differ only in bond dimension
inline ChiDiscrepancy chi_discrepancy(const ObservableSummary& a, const ObservableSummary& b) {
  if (a.L != b.L || a.n_matter != b.n_matter || a.t != b.t)
    throw std::invalid_argument("records do not share (L, N_M, t)");
  return {std::abs(a.energy - b.energy), std::abs(a.zeta - b.zeta)};
}

inline double fermi_wavevector_trend(double f_m) {
  return std::min(M_PI / 2.0 * f_m, M_PI * (1.0 - f_m));
}

// deviation of fitted k_F values from the min{pi f/2, pi(1-f)} trend
inline std::vector<double> fermi_trend_deviation(
    const std::vector<std::pair<double, double>>& filling_kf) {
  std::vector<double> out;
  out.reserve(filling_kf.size());
  for (const auto& [f, kf] : filling_kf) out.push_back(kf - fermi_wavevector_trend(f));
  return out;
}

}  // namespace su2qlm
