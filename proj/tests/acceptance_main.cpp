// Acceptance suite: one PASS/FAIL line per criterion with measured values.
// Criteria 1-10 run by default (the CI contract); the paper-scale stretch
// benchmark behind --stretch reproduces the large-L transition pipeline and
// is deliberately excluded from the test registry (days of runtime).

#include <chrono>
#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "su2qlm/pipeline.hpp"

using namespace su2qlm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) { return detail::fmt_double(v); }

// oracle-grade anneal: long intermediate stages resolve the quasi-degenerate
// meson manifold at small coupling, the fine tail removes the Trotter bias
AnnealSchedule deep_schedule() {
  return {{0.5, 400, 1e-13},  {0.1, 400, 1e-13},   {0.05, 1500, 1e-13}, {0.02, 1500, 1e-13},
          {0.005, 800, 1e-13}, {0.001, 800, 1e-13}, {2e-4, 800, 1e-13}};
}

ModelParams params_at(int L, int n_matter, double t) {
  ModelParams p;
  p.t = t;
  p.g1 = 1.0;
  p.eps = 5.0;
  p.L = L;
  p.n_matter = n_matter;
  return p;
}

double cdw_zeta(SymmetricMPS& psi, double k, double f_m) {
  const Eigen::MatrixXd nn = density_correlation_matrix(psi);
  const std::vector<double> dens = density_profile(psi);
  Eigen::VectorXd density(dens.size());
  for (size_t j = 0; j < dens.size(); ++j) density(j) = dens[j];
  return cdw_order_parameter(nn, density, k, f_m);
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  const int bulk = enumerate_site_basis(SiteKind::Bulk).dim();
  const int left = enumerate_site_basis(SiteKind::LeftBoundary).dim();
  const int right = enumerate_site_basis(SiteKind::RightBoundary).dim();
  return {bulk == 14 && left == 5 && right == 5,
          "bulk = " + std::to_string(bulk) + ", boundaries = " + std::to_string(left) + "/" +
              std::to_string(right)};
}

Outcome criterion_2() {
  double worst = 0.0;
  for (int L : {2, 3}) {
    const ModelParams p = params_at(L, L, 1.3);
    worst = std::max(worst, fockchain::gauge_commutator_norm(p));
  }
  return {worst < 1e-12, "max ||[H, J]||_inf = " + fmt(worst) + " over L in {2,3}"};
}

Outcome criterion_3() {
  std::ostringstream detail;
  bool pass = true;
  for (int L = 2; L <= 6; ++L) {
    const int n_matter = 2 * (L / 2);
    const ModelParams p = params_at(L, n_matter, 0.0);
    const double expected = -5.0 * (L - 1);

    const SectorBasis basis = enumerate_sector_basis(L, n_matter);
    const double ed = lowest_eigenpair(build_hamiltonian(p, basis), 1).values(0);
    const GroundStateResult res = ground_state_search(p, 32, 1e-12, default_schedule(), {1, 2});
    const double ed_err = std::abs(ed - expected);
    const double tebd_err = std::abs(res.report.final_energy - expected);
    pass = pass && ed_err < 1e-10 && tebd_err < 1e-6;
    detail << "L=" << L << " ed_err=" << fmt(ed_err) << " tebd_err=" << fmt(tebd_err) << "  ";
  }
  return {pass, detail.str()};
}

Outcome criterion_4() {
  std::ostringstream detail;
  bool pass = true;
  for (int nm : {2, 4})
    for (double t : {0.5, 5.0, 20.0}) {
      const ModelParams p = params_at(4, nm, t);
      const SectorBasis basis = enumerate_sector_basis(4, nm);
      const EigenPairs exact = lowest_eigenpair(build_hamiltonian(p, basis), 1);
      GroundStateResult res = ground_state_search(p, 64, 1e-12, deep_schedule(), {1, 2, 3});
      const double rel =
          std::abs(res.report.final_energy - exact.values(0)) / std::abs(exact.values(0));

      const Eigen::VectorXd gs = exact.vectors.col(0);
      double worst = 0.0;
      const std::vector<double> dens = density_profile(res.state);
      for (int j = 1; j <= 4; ++j) {
        const Eigen::MatrixXd op = matter_density_op(site_kind(j, 4));
        worst = std::max(worst,
                         std::abs(dens[j - 1] - ed_expectation(gs, site_operator(basis, j, op))));
      }
      const Eigen::MatrixXd meson = meson_correlation_matrix(res.state);
      for (int a = 1; a <= 4; ++a)
        for (int b = a + 1; b <= 4; ++b) {
          const auto op_a = build_meson_operator(site_kind(a, 4)).lower;
          const auto op_b = build_meson_operator(site_kind(b, 4)).raise;
          worst = std::max(worst,
                           std::abs(meson(a - 1, b - 1) -
                                    ed_expectation(gs, two_site_operator(basis, a, op_a, b, op_b))));
        }
      pass = pass && rel < 1e-6 && worst < 1e-5;
      detail << "N=" << nm << ",t=" << t << ": relE=" << fmt(rel) << " obs=" << fmt(worst) << "  ";
    }
  return {pass, detail.str()};
}

Outcome criterion_5() {
  const SectorBasis basis = enumerate_sector_basis(4, 4);
  auto ed_energy = [&](double t) {
    return lowest_eigenpair(build_hamiltonian(params_at(4, 4, t), basis), 1).values(0);
  };
  auto err_at = [&](double t) {
    return std::abs(ed_energy(t) - pt_prediction(params_at(4, 4, t)));
  };

  const double correction =
      std::abs(pt_prediction(params_at(4, 4, 0.1)) + 3.0 * 5.0);  // the J E_Heis piece
  const double e_01 = err_at(0.1);
  const double e_02 = err_at(0.2);
  const bool pass = e_01 < 0.01 * correction && e_02 / e_01 >= 8.0;
  return {pass, "|ED-PT|(0.1) = " + fmt(e_01) + " (correction " + fmt(correction) +
                    "), err ratio 0.2/0.1 = " + fmt(e_02 / e_01)};
}

Outcome criterion_6() {
  double worst = 0.0;
  for (int nm : {0, 2}) {
    const SectorBasis a = enumerate_sector_basis(3, nm);
    const SectorBasis b = enumerate_sector_basis(3, 6 - nm);
    if (a.dim() != b.dim()) return {false, "sector dimensions differ"};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(
        build_hamiltonian(params_at(3, nm, 2.7), a).to_dense());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(
        build_hamiltonian(params_at(3, 6 - nm, 2.7), b).to_dense());
    worst = std::max(worst, (ea.eigenvalues() - eb.eigenvalues()).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-10, "max spectral mismatch between N_M and 2L-N_M sectors = " + fmt(worst)};
}

Outcome criterion_7() {
  std::ostringstream detail;
  bool pass = true;

  {
    const int L = 96;
    std::vector<double> profile;
    for (int ell = 1; ell <= L - 1; ++ell)
      profile.push_back(calabrese_cardy_profile(L, ell, 1.0, 0.7, 0.05, 1.0, M_PI / 3.0));
    const CCFitResult fit = fit_central_charge(profile, L);
    const double worst =
        std::max({std::abs(fit.c - 1.0), std::abs(fit.c_prime - 0.7), std::abs(fit.b0 - 0.05),
                  std::abs(fit.b1 - 1.0), std::abs(fit.k_f - M_PI / 3.0)});
    pass = pass && worst < 1e-6;
    detail << "cc-fit err=" << fmt(worst) << "  ";
  }
  {
    CorrelatorSeries s;
    for (int ell = 1; ell <= 40; ++ell) {
      s.separations.push_back(ell);
      s.values.push_back(std::pow(ell, -0.5) * std::exp(-ell / 8.0));
    }
    const CorrelationFit fit = correlation_length_fit(s);
    const double worst =
        std::max({std::abs(fit.a0 - 1.0), std::abs(fit.eta - 0.5), std::abs(fit.xi - 8.0)});
    pass = pass && worst < 1e-6;
    detail << "corr-fit err=" << fmt(worst) << "  ";
  }
  {
    std::vector<std::pair<double, double>> pl;
    for (double dt : {0.5, 1.0, 2.0, 4.0}) pl.push_back({dt, 2.0 * std::pow(dt, -0.8)});
    const PowerLawFit fit = fit_power_law(pl);
    pass = pass && std::abs(fit.nu - 0.8) < 1e-6 && std::abs(fit.amplitude - 2.0) < 1e-6;
    detail << "power-law err=" << fmt(std::abs(fit.nu - 0.8)) << "  ";
  }
  {
    std::vector<std::pair<double, double>> ex;
    for (double L : {10.0, 20.0, 40.0}) ex.push_back({L, 3.0 + 5.0 / L});
    const LinearFit fit = extrapolate_thermo(ex);
    pass = pass && std::abs(fit.intercept - 3.0) < 1e-6;
    detail << "extrapolation err=" << fmt(std::abs(fit.intercept - 3.0)) << "  ";
  }
  {
    const int L = 8;
    Eigen::VectorXd density(L);
    for (int j = 0; j < L; ++j) density(j) = (j % 2 == 0) ? 2.0 : 0.0;
    const Eigen::MatrixXd nn = density * density.transpose();
    const double zeta = cdw_order_parameter(nn, density, M_PI, 1.0);
    pass = pass && std::abs(zeta - 1.0) < 1e-14;
    detail << "neel zeta=" << fmt(zeta) << "  ";
  }
  {
    CorrelatorSeries only1;
    only1.separations = {1};
    only1.values = {0.7};
    CorrelatorSeries two;
    two.separations = {1, 3};
    two.values = {0.4, 0.4};
    const double m0 = correlation_length_moment(only1);
    const double m2 = correlation_length_moment(two);
    pass = pass && m0 == 0.0 && std::abs(m2 - std::sqrt(2.0)) < 1e-14;
    detail << "moment examples (" << fmt(m0) << ", " << fmt(m2) << ")";
  }
  return {pass, detail.str()};
}

Outcome criterion_8() {
  const int L = 24, n_matter = 24, chi = 128;
  AnnealSchedule schedule;
  for (double dtau : {0.5, 0.1, 0.02, 0.005, 0.001}) schedule.push_back({dtau, 2000, 1e-9});

  // local imaginary-time updates anneal meson domain walls very slowly, so a
  // staggered product state joins the seeded random ones as a candidate; the
  // final energy picks the winner
  auto neel_start = [&]() {
    std::vector<int> mesons, ells;
    for (int j = 1; j <= L; j += 2) mesons.push_back(j);
    for (int b = 1; b < L; ++b) ells.push_back(b % 2 == 0 ? 2 : 0);
    return testing::make_product_state(L, mesons, ells);
  };

  auto solve = [&](double t, std::vector<std::uint64_t> seeds) {
    const ModelParams p = params_at(L, n_matter, t);
    GroundStateResult best = ground_state_search(p, chi, 1e-10, schedule, seeds);
    GroundStateResult staggered =
        ground_state_search(p, chi, 1e-10, schedule, {seeds.front()}, neel_start());
    if (staggered.report.final_energy < best.report.final_energy) return staggered;
    return best;
  };

  GroundStateResult weak = solve(3.0, {1, 2});
  GroundStateResult strong = solve(40.0, {1});

  const double zeta_weak = cdw_zeta(weak.state, M_PI, 1.0);
  const double zeta_strong = cdw_zeta(strong.state, M_PI, 1.0);

  const CCFitResult fit_weak = fit_central_charge(weak.state.entropy_profile(), L);
  const CCFitResult fit_strong = fit_central_charge(strong.state.entropy_profile(), L);

  const bool pass = zeta_strong >= 3.0 * zeta_weak && fit_weak.c >= 0.7 && fit_weak.c <= 1.3 &&
                    fit_strong.c >= -0.2 && fit_strong.c <= 0.3;
  return {pass, "zeta(40)/zeta(3) = " + fmt(zeta_strong / zeta_weak) + " (" + fmt(zeta_strong) +
                    "/" + fmt(zeta_weak) + "), c(3) = " + fmt(fit_weak.c) +
                    ", c(40) = " + fmt(fit_strong.c)};
}

Outcome criterion_9() {
  const int L = 12, n_matter = 12;
  const double t = 3.0;  // inside the gapless liquid
  AnnealSchedule schedule = default_schedule();
  auto energy_at = [&](int chi) {
    return ground_state_search(params_at(L, n_matter, t), chi, 1e-10, schedule, {1})
        .report.final_energy;
  };
  const double e64 = energy_at(64);
  const double e128 = energy_at(128);
  const double diff = std::abs(e64 - e128);
  return {diff < 1e-4, "|E(chi=64) - E(chi=128)| = " + fmt(diff)};
}

Outcome criterion_10() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "su2qlm_acceptance_det";
  fs::remove_all(base);

  RunConfig cfg;
  cfg.model = params_at(3, 2, 0.0);
  cfg.chi_max = 16;
  cfg.schedule = {{0.5, 300, 1e-10}, {0.1, 300, 1e-10}};
  cfg.seeds = {1, 2};
  cfg.sweep_values = {0.5, 1.0, 1.5};
  cfg.warm_start = false;

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  cfg.out_dir = (base / "w1").string();
  run_sweep(cfg, 1);
  cfg.out_dir = (base / "w3").string();
  run_sweep(cfg, 3);
  const bool sweep_same =
      slurp(base / "w1" / "records.jsonl") == slurp(base / "w3" / "records.jsonl") &&
      slurp(base / "w1" / "records.csv") == slurp(base / "w3" / "records.csv");

  cfg.out_dir = (base / "g1").string();
  const GroundOutcome g1 = run_ground(cfg);
  const std::string ckpt_1 = slurp(g1.checkpoint_path);
  const std::string rec_1 = slurp(base / "g1" / "records.jsonl");
  const GroundOutcome g2 = run_ground(cfg);
  const bool ground_same =
      slurp(g2.checkpoint_path) == ckpt_1 && slurp(base / "g1" / "records.jsonl") == rec_1;

  fs::remove_all(base);
  return {sweep_same && ground_same,
          std::string("sweep workers 1 vs 3 byte-identical: ") + (sweep_same ? "yes" : "NO") +
              ", repeated ground run byte-identical: " + (ground_same ? "yes" : "NO")};
}

// Paper-scale stretch benchmark: excluded from CI, opt-in.
int run_stretch() {
  std::cout << "stretch benchmark: steepest-slope transition extrapolation at filling 1\n"
               "(L in {42..90}, chi = 300; expect days of runtime)\n";
  const std::vector<int> sizes = {42, 50, 58, 66, 74, 82, 90};
  std::vector<std::pair<double, double>> tstars;
  for (int L : sizes) {
    std::vector<double> ts, zetas;
    std::optional<SymmetricMPS> warm;
    for (double t = 6.0; t <= 18.0 + 1e-9; t += 1.0) {
      const ModelParams p = params_at(L, L, t);
      AnnealSchedule schedule;
      for (double dtau : {0.5, 0.1, 0.02, 0.005}) schedule.push_back({dtau, 600, 1e-8});
      GroundStateResult res = ground_state_search(p, 300, 1e-10, schedule, {1}, warm);
      warm = res.state;
      SymmetricMPS state = res.state;
      ts.push_back(t);
      zetas.push_back(cdw_zeta(state, M_PI, 1.0));
      std::cout << "  L=" << L << " t=" << t << " E=" << fmt(res.report.final_energy)
                << " zeta_pi=" << fmt(zetas.back()) << std::endl;
    }
    const TransitionPoint tp = steepest_slope(ts, zetas);
    std::cout << "L=" << L << ": t* = " << tp.t_star << " +- " << tp.uncertainty << "\n";
    tstars.push_back({static_cast<double>(L), tp.t_star});
  }
  const LinearFit fit = extrapolate_thermo(tstars);
  std::cout << "extrapolated t_c = " << fit.intercept << " +- " << fit.intercept_std_error
            << " (target 12 +- 2)\n";
  return std::abs(fit.intercept - 12.0) <= 2.0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  bool stretch = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--stretch") == 0) {
      stretch = true;
    } else {
      only.insert(std::atoi(argv[i]));
    }
  }
  if (stretch) return run_stretch();

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"basis dimensions 14 bulk / 5 boundary", criterion_1},
      {"gauge invariance in the full Fock space, L in {2,3}", criterion_2},
      {"zero-coupling energy -(L-1)eps, ED and TEBD, L in {2..6}", criterion_3},
      {"TEBD vs ED at L=4: energies, densities, meson correlators", criterion_4},
      {"second-order perturbation theory with t^4 scaling", criterion_5},
      {"particle-hole symmetric sector spectra at L=3", criterion_6},
      {"analysis round trips and worked examples", criterion_7},
      {"desk-scale phase physics at L=24, filling 1", criterion_8},
      {"bond-dimension error estimate at L=12", criterion_9},
      {"byte-identical records across reruns and worker counts", criterion_10},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (outcome.pass ? "PASS" : "FAIL") << "  criterion " << id << ": "
              << criteria[i].first << "\n      " << outcome.detail << "  [" << fmt(secs) << " s]"
              << std::endl;
    if (!outcome.pass) ++failures;
  }
  if (failures == 0)
    std::cout << "all acceptance criteria passed" << std::endl;
  else
    std::cout << failures << " acceptance criteria FAILED" << std::endl;
  return failures == 0 ? 0 : 1;
}
