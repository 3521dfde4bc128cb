#pragma once
// Ground-state search by imaginary-time TEBD annealing: a stepped sequence of
// Trotter step sizes, each stage swept until the per-sweep energy change
// drops below its tolerance. One sweep is the second-order splitting
// half-odd / full-even / half-odd, with renormalization after every gate.

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "su2qlm/model.hpp"
#include "su2qlm/mps.hpp"

namespace su2qlm {

struct AnnealStage {
  double dtau = 0.1;
  int max_sweeps = 2000;
  double energy_tol = 1e-9;
};

using AnnealSchedule = std::vector<AnnealStage>;

inline AnnealSchedule default_schedule() {
  AnnealSchedule s;
  for (double dtau : {0.5, 0.1, 0.02, 0.005, 0.001}) s.push_back({dtau, 2000, 1e-9});
  return s;
}

inline void validate_schedule(const AnnealSchedule& schedule) {
  if (schedule.empty()) throw std::invalid_argument("empty annealing schedule");
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& stage : schedule) {
    if (!(stage.dtau > 0.0) || stage.dtau >= prev)
      throw std::invalid_argument("dtau values must be positive and strictly decreasing");
    if (stage.max_sweeps < 1) throw std::invalid_argument("max_sweeps must be positive");
    if (stage.energy_tol <= 0.0) throw std::invalid_argument("energy tolerance must be positive");
    prev = stage.dtau;
  }
}

struct StageReport {
  double dtau = 0.0;
  double energy_tol = 0.0;
  int sweeps = 0;
  double energy = 0.0;
  double max_trunc_weight = 0.0;
  double seconds = 0.0;
  bool converged = false;
};

struct ConvergenceReport {
  std::uint64_t seed = 0;
  std::vector<StageReport> stages;
  double final_energy = 0.0;
  double max_trunc_weight = 0.0;
  double seconds = 0.0;
  bool converged = false;
};

struct GroundStateResult {
  SymmetricMPS state;
  ConvergenceReport report;
};

// One second-order Trotter sweep; returns the largest discarded weight seen.
inline double tebd_sweep(SymmetricMPS& psi, const std::vector<GatePropagator>& half_step,
                         const std::vector<GatePropagator>& full_step, int chi_max, double tol) {
  const int L = psi.length();
  double max_w = 0.0;
  for (int bond = 1; bond < L; bond += 2)
    max_w = std::max(max_w, psi.apply_gate(half_step[bond - 1], bond, chi_max, tol, true));
  const int last_even = (L - 1) % 2 == 0 ? L - 1 : L - 2;  // largest even bond
  for (int bond = last_even; bond >= 2; bond -= 2)
    max_w = std::max(max_w, psi.apply_gate(full_step[bond - 1], bond, chi_max, tol, false));
  for (int bond = 1; bond < L; bond += 2)
    max_w = std::max(max_w, psi.apply_gate(half_step[bond - 1], bond, chi_max, tol, true));
  return max_w;
}

inline ConvergenceReport anneal(SymmetricMPS& psi, const ModelParams& params, int chi_max,
                                double tol, const AnnealSchedule& schedule) {
  validate_schedule(schedule);
  const auto gates = build_gates(params);
  ConvergenceReport report;
  const auto t_start = std::chrono::steady_clock::now();
  double energy = total_energy(psi, gates);
  report.converged = true;
  for (const auto& stage : schedule) {
    StageReport sr;
    sr.dtau = stage.dtau;
    sr.energy_tol = stage.energy_tol;
    const auto s_start = std::chrono::steady_clock::now();
    std::vector<GatePropagator> half, full;
    for (int bond = 1; bond < params.L; ++bond) {
      const TwoSiteGate gate = build_two_site_gate(params, bond);
      half.push_back(make_propagator(gate, stage.dtau / 2.0));
      full.push_back(make_propagator(gate, stage.dtau));
    }
    for (int sweep = 1; sweep <= stage.max_sweeps; ++sweep) {
      sr.max_trunc_weight =
          std::max(sr.max_trunc_weight, tebd_sweep(psi, half, full, chi_max, tol));
      psi.normalize();
      const double next = total_energy(psi, gates);
      sr.sweeps = sweep;
      if (std::abs(next - energy) < stage.energy_tol) {
        energy = next;
        sr.converged = true;
        break;
      }
      energy = next;
    }
    sr.energy = energy;
    sr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - s_start).count();
    report.converged = report.converged && sr.converged;
    report.max_trunc_weight = std::max(report.max_trunc_weight, sr.max_trunc_weight);
    report.stages.push_back(sr);
  }
  report.final_energy = energy;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

// Full search: anneal one state per seed (or the provided warm start) and
// return the lowest-energy result; ties break toward the smaller seed.
inline GroundStateResult ground_state_search(const ModelParams& params, int chi_max, double tol,
                                             const AnnealSchedule& schedule,
                                             std::vector<std::uint64_t> seeds,
                                             const std::optional<SymmetricMPS>& warm_start = {}) {
  params.validate();
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  std::optional<GroundStateResult> best;
  if (warm_start.has_value()) {
    GroundStateResult res{*warm_start, {}};
    res.report = anneal(res.state, params, chi_max, tol, schedule);
    res.report.seed = seeds.front();
    return res;
  }
  for (std::uint64_t seed : seeds) {
    GroundStateResult res{SymmetricMPS::product_state(params, seed), {}};
    res.report = anneal(res.state, params, chi_max, tol, schedule);
    res.report.seed = seed;
    if (!best || res.report.final_energy < best->report.final_energy) best = std::move(res);
  }
  return *best;
}

}  // namespace su2qlm
