// su2qlm command-line driver: ground-state runs, parameter sweeps, analysis
// tasks over record files, exact diagonalization and the validation suite.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "su2qlm/pipeline.hpp"

using namespace su2qlm;

namespace {

void apply_overrides(RunConfig& cfg, const std::string& out_flag, int chi, long long seed) {
  if (const char* env = std::getenv("SU2QLM_OUT"))
    if (*env) cfg.out_dir = env;
  if (!out_flag.empty()) cfg.out_dir = out_flag;
  if (chi > 0) cfg.chi_max = chi;
  if (seed >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed)};
}

std::string mask_to_text(fock::Mask mask) {
  static const char* names[6] = {"Ru", "Rd", "Mu", "Md", "Lu", "Ld"};
  std::string out;
  for (int m = 0; m < 6; ++m)
    if (fock::occupied(mask, m)) {
      if (!out.empty()) out += ' ';
      out += names[m];
    }
  return out.empty() ? "vac" : out;
}

void print_basis_table(std::ostream& out) {
  for (SiteKind kind : {SiteKind::Bulk, SiteKind::LeftBoundary, SiteKind::RightBoundary}) {
    const GaugeSiteBasis& basis = site_basis(kind);
    const char* name = kind == SiteKind::Bulk              ? "bulk"
                       : kind == SiteKind::LeftBoundary    ? "left boundary"
                                                           : "right boundary";
    out << "gauge-invariant basis, " << name << " site (" << basis.dim() << " states)\n";
    out << "  label  (n_R, n_M, n_L)  state\n";
    for (const auto& s : basis.states) {
      out << "  " << s.label << (s.label < 10 ? "      (" : "     (") << s.n_r << ", " << s.n_m
          << ", " << s.n_l << ")       ";
      bool first = true;
      for (const auto& m : s.members) {
        if (!first) out << (m.amp >= 0 ? " + " : " - ");
        if (first && m.amp < 0) out << "-";
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.6g", std::abs(m.amp));
        out << buf << " |" << mask_to_text(m.mask) << ">";
        first = false;
      }
      out << "\n";
    }
    out << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "su2qlm: gauge-invariant MPS ground-state solver and analysis pipeline\n"
      "for the (1+1)-d SU(2) quantum link model at fixed matter filling"};
  app.require_subcommand(1);

  std::string config_path, out_dir, resume_path, task;
  std::vector<std::string> record_files;
  int workers = 1, chi = 0, npairs = 1;
  long long seed = -1;
  double k_flag = -1.0;
  bool corrupt_gate = false;

  auto* ground = app.add_subcommand("ground", "single ground-state run with measurements");
  ground->add_option("--config", config_path, "run configuration file")->required();
  ground->add_option("--out", out_dir, "output directory (overrides config and SU2QLM_OUT)");
  ground->add_option("--chi", chi, "override the maximum bond dimension");
  ground->add_option("--seed", seed, "run a single seed instead of the configured list");
  ground->add_option("--resume", resume_path, "warm-start from an MPS checkpoint");
  ground->add_option("--workers", workers, "accepted for interface parity; a single run is serial");

  auto* sweep = app.add_subcommand("sweep", "sweep a parameter grid, one record per point");
  sweep->add_option("--config", config_path, "run configuration file")->required();
  sweep->add_option("--out", out_dir, "output directory (overrides config and SU2QLM_OUT)");
  sweep->add_option("--chi", chi, "override the maximum bond dimension");
  sweep->add_option("--seed", seed, "run a single seed instead of the configured list");
  sweep->add_option("--workers", workers, "parallel points for cold sweeps");

  auto* analyze = app.add_subcommand("analyze", "post-process record files into analysis CSVs");
  analyze->add_option("--task", task,
                      "one of: central-charge, cdw, xi, transition, extrapolate, chi-error")
      ->required();
  analyze
      ->add_option("inputs", record_files,
                   "records.jsonl files (or a 2-column CSV for extrapolate)")
      ->required();
  analyze->add_option("--out", out_dir, "output directory");
  analyze->add_option("--k", k_flag, "CDW wave-vector (default: inferred from the filling)");
  analyze->add_option("--config", config_path, "optional config for analysis parameters");

  auto* ed = app.add_subcommand("ed", "exact diagonalization of the configured sector");
  ed->add_option("--config", config_path, "run configuration file")->required();
  ed->add_option("--out", out_dir, "output directory (overrides config and SU2QLM_OUT)");
  ed->add_option("--npairs", npairs, "number of lowest eigenpairs to report");

  auto* validate = app.add_subcommand("validate", "run the invariant suite and dump the bases");
  validate->add_flag("--corrupt-gate", corrupt_gate, "test hook: flip one gate matrix element")
      ->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(ground)) {
      RunConfig cfg = parse_config_file(config_path);
      apply_overrides(cfg, out_dir, chi, seed);
      const GroundOutcome outcome = run_ground(
          cfg, resume_path.empty() ? std::nullopt : std::optional<std::string>(resume_path));
      for (const auto& stage : outcome.report.stages)
        std::cout << "stage dtau=" << stage.dtau << ": " << stage.sweeps << " sweeps, E = "
                  << detail::fmt_double(stage.energy)
                  << ", max discarded weight = " << detail::fmt_double(stage.max_trunc_weight)
                  << ", " << detail::fmt_double(stage.seconds) << " s"
                  << (stage.converged ? "" : "  [hit the sweep budget]") << "\n";
      std::cout << "energy " << detail::fmt_double(outcome.record.energy) << " (seed "
                << outcome.record.seed
                << (outcome.record.converged ? ", converged" : ", NOT converged")
                << ")\nrecords: " << cfg.out_dir << "/records.jsonl\ncheckpoint: "
                << outcome.checkpoint_path << "\n";
      return outcome.exit_code;
    }

    if (app.got_subcommand(sweep)) {
      RunConfig cfg = parse_config_file(config_path);
      apply_overrides(cfg, out_dir, chi, seed);
      const SweepOutcome outcome = run_sweep(cfg, workers);
      std::cout << outcome.records.size() << " sweep points written to " << cfg.out_dir
                << "/records.jsonl\n";
      return outcome.exit_code;
    }

    if (app.got_subcommand(analyze)) {
      AnalyzeOptions opt;
      opt.k = k_flag;
      if (!out_dir.empty())
        opt.out_dir = out_dir;
      else if (const char* env = std::getenv("SU2QLM_OUT"); env && *env)
        opt.out_dir = env;
      if (!config_path.empty()) {
        const RunConfig cfg = parse_config_file(config_path);
        opt.discard_fraction = cfg.discard_fraction;
        if (out_dir.empty()) opt.out_dir = cfg.out_dir;
      }
      if (task == "extrapolate") {
        if (record_files.size() != 1)
          throw std::invalid_argument("extrapolate expects exactly one input CSV");
        return run_extrapolate(record_files[0], opt.out_dir);
      }
      return run_analyze(record_files, task, opt);
    }

    if (app.got_subcommand(ed)) {
      RunConfig cfg = parse_config_file(config_path);
      apply_overrides(cfg, out_dir, chi, seed);
      const SectorBasis basis = enumerate_sector_basis(cfg.model.L, cfg.model.n_matter);
      if (basis.dim() == 0) throw std::invalid_argument("the requested sector is empty");
      const SparseHamiltonian h = build_hamiltonian(cfg.model, basis);
      const EigenPairs pairs = lowest_eigenpair(h, std::min(npairs, h.dim));
      std::filesystem::create_directories(cfg.out_dir);

      std::ofstream evals(cfg.out_dir + "/ed_eigenvalues.csv", std::ios::trunc);
      evals << "k,energy\n";
      for (int i = 0; i < pairs.values.size(); ++i)
        evals << i << ',' << detail::fmt_double(pairs.values(i)) << "\n";

      std::ofstream obs(cfg.out_dir + "/ed_observables.csv", std::ios::trunc);
      obs << "site,matter_density\n";
      const Eigen::VectorXd gs = pairs.vectors.col(0);
      for (int j = 1; j <= cfg.model.L; ++j) {
        const Eigen::MatrixXd op = matter_density_op(site_kind(j, cfg.model.L));
        obs << j << ',' << detail::fmt_double(ed_expectation(gs, site_operator(basis, j, op)))
            << "\n";
      }
      std::cout << "sector dimension " << basis.dim() << ", ground energy "
                << detail::fmt_double(pairs.values(0)) << "\n";
      return 0;
    }

    if (app.got_subcommand(validate)) {
      print_basis_table(std::cout);
      const ValidationReport report = run_validate(corrupt_gate);
      for (const auto& check : report.checks)
        std::cout << (check.pass ? "PASS" : "FAIL") << "  " << check.name << "  ["
                  << check.measured << "]\n";
      std::cout << (report.all_pass() ? "all checks passed\n" : "some checks FAILED\n");
      return report.all_pass() ? 0 : 1;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
