#pragma once
// Measurement records and their serialized forms: a scalar CSV summary, a
// JSON-lines file for the nested observables, and a bit-exact binary
// checkpoint of the MPS itself.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "su2qlm/analysis.hpp"
#include "su2qlm/mps.hpp"
#include "su2qlm/tebd.hpp"

namespace su2qlm {

struct MeasurementRecord {
  // key
  int L = 0;
  int n_matter = 0;
  double t = 0.0;
  int chi = 0;
  std::uint64_t seed = 0;
  // parameters and summary
  double g1 = 1.0;
  double eps = 5.0;
  double energy = 0.0;
  double max_trunc_weight = 0.0;
  bool converged = true;
  // observables
  std::vector<double> entropy_profile;          // L-1
  std::vector<double> density_profile;          // L
  Eigen::MatrixXd nn_correlation;               // L x L, raw <n_j n_k>
  CorrelatorSeries meson;                       // bulk-averaged series
  std::vector<SchmidtData> schmidt_spectra;     // per bond

  std::tuple<int, int, double, int, std::uint64_t> key() const {
    return {L, n_matter, t, chi, seed};
  }
};

inline MeasurementRecord measure_all(SymmetricMPS& psi, const ModelParams& params, int chi,
                                     const ConvergenceReport& report, double bulk_window = 0.5) {
  MeasurementRecord rec;
  rec.L = params.L;
  rec.n_matter = params.n_matter;
  rec.t = params.t;
  rec.chi = chi;
  rec.seed = report.seed;
  rec.g1 = params.g1;
  rec.eps = params.eps;
  rec.energy = report.final_energy;
  rec.max_trunc_weight = report.max_trunc_weight;
  rec.converged = report.converged;
  rec.entropy_profile = psi.entropy_profile();
  rec.density_profile = density_profile(psi);
  rec.nn_correlation = density_correlation_matrix(psi);
  rec.meson = meson_correlator_series(meson_correlation_matrix(psi), bulk_window);
  for (int bond = 1; bond < psi.length(); ++bond)
    rec.schmidt_spectra.push_back(psi.schmidt_spectrum(bond));
  return rec;
}

// ---------------------------------------------------------------------------
// JSON lines
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json record_to_json(const MeasurementRecord& rec) {
  nlohmann::ordered_json j;
  j["L"] = rec.L;
  j["N_M"] = rec.n_matter;
  j["t"] = rec.t;
  j["chi"] = rec.chi;
  j["seed"] = rec.seed;
  j["g1"] = rec.g1;
  j["eps"] = rec.eps;
  j["energy"] = rec.energy;
  j["max_trunc_weight"] = rec.max_trunc_weight;
  j["converged"] = rec.converged;
  j["entropy_profile"] = rec.entropy_profile;
  j["density_profile"] = rec.density_profile;
  std::vector<std::vector<double>> nn(rec.nn_correlation.rows());
  for (int r = 0; r < rec.nn_correlation.rows(); ++r) {
    nn[r].resize(rec.nn_correlation.cols());
    for (int c = 0; c < rec.nn_correlation.cols(); ++c) nn[r][c] = rec.nn_correlation(r, c);
  }
  j["nn_correlation"] = nn;
  j["meson"] = {{"separations", rec.meson.separations},
                {"values", rec.meson.values},
                {"window_fraction", rec.meson.window_fraction}};
  nlohmann::ordered_json spectra = nlohmann::ordered_json::array();
  for (const auto& s : rec.schmidt_spectra) {
    nlohmann::ordered_json bond;
    bond["bond"] = s.bond;
    nlohmann::ordered_json sectors = nlohmann::ordered_json::array();
    for (const auto& [label, vals] : s.sectors)
      sectors.push_back({{"q", label.q}, {"ell", label.ell}, {"values", vals}});
    bond["sectors"] = sectors;
    spectra.push_back(bond);
  }
  j["schmidt_spectra"] = spectra;
  return j;
}

inline MeasurementRecord record_from_json(const nlohmann::json& j) {
  MeasurementRecord rec;
  rec.L = j.at("L");
  rec.n_matter = j.at("N_M");
  rec.t = j.at("t");
  rec.chi = j.at("chi");
  rec.seed = j.at("seed");
  rec.g1 = j.at("g1");
  rec.eps = j.at("eps");
  rec.energy = j.at("energy");
  rec.max_trunc_weight = j.at("max_trunc_weight");
  rec.converged = j.at("converged");
  rec.entropy_profile = j.at("entropy_profile").get<std::vector<double>>();
  rec.density_profile = j.at("density_profile").get<std::vector<double>>();
  const auto& nn = j.at("nn_correlation");
  rec.nn_correlation.resize(nn.size(), nn.size());
  for (size_t r = 0; r < nn.size(); ++r)
    for (size_t c = 0; c < nn[r].size(); ++c) rec.nn_correlation(r, c) = nn[r][c];
  rec.meson.separations = j.at("meson").at("separations").get<std::vector<int>>();
  rec.meson.values = j.at("meson").at("values").get<std::vector<double>>();
  rec.meson.window_fraction = j.at("meson").at("window_fraction");
  for (const auto& bond : j.at("schmidt_spectra")) {
    SchmidtData s;
    s.bond = bond.at("bond");
    for (const auto& sec : bond.at("sectors"))
      s.sectors.push_back({ChargeLabel{sec.at("q"), sec.at("ell")},
                           sec.at("values").get<std::vector<double>>()});
    rec.schmidt_spectra.push_back(std::move(s));
  }
  return rec;
}

namespace detail {

inline std::string trim_ws(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a);
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline void sort_records(std::vector<MeasurementRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const MeasurementRecord& a, const MeasurementRecord& b) { return a.key() < b.key(); });
}

inline void write_records_jsonl(const std::string& path, std::vector<MeasurementRecord> records) {
  sort_records(records);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& rec : records) out << record_to_json(rec).dump() << "\n";
}

inline std::vector<MeasurementRecord> read_records_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<MeasurementRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim_ws(line).empty()) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed record: " + e.what());
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// CSV summary
// ---------------------------------------------------------------------------

inline constexpr const char* records_csv_header =
    "L,N_M,t,g1,eps,chi,seed,energy,max_trunc_weight,converged,status";

inline void write_records_csv(const std::string& path, std::vector<MeasurementRecord> records) {
  sort_records(records);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << records_csv_header << "\n";
  for (const auto& r : records) {
    out << r.L << ',' << r.n_matter << ',' << detail::fmt_double(r.t) << ','
        << detail::fmt_double(r.g1) << ',' << detail::fmt_double(r.eps) << ',' << r.chi << ','
        << r.seed << ',' << detail::fmt_double(r.energy) << ','
        << detail::fmt_double(r.max_trunc_weight) << ',' << (r.converged ? 1 : 0) << ','
        << (r.converged ? "ok" : "unconverged") << "\n";
  }
}

// ---------------------------------------------------------------------------
// Binary MPS checkpoint
// ---------------------------------------------------------------------------

inline constexpr char checkpoint_magic[] = "SU2QLMPS1";
inline constexpr std::uint32_t checkpoint_version = 1;

namespace detail {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated checkpoint");
  return v;
}

}  // namespace detail

// Layout (little-endian): magic, version, model parameters, center, then one
// tensor per site as (left sectors, right sectors, blocks). Block payloads
// are row-major doubles.
inline void write_checkpoint(const std::string& path, const SymmetricMPS& psi,
                             const ModelParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out.write(checkpoint_magic, sizeof(checkpoint_magic) - 1);
  detail::write_pod(out, checkpoint_version);
  detail::write_pod(out, params.t);
  detail::write_pod(out, params.g1);
  detail::write_pod(out, params.eps);
  detail::write_pod(out, static_cast<std::int32_t>(params.L));
  detail::write_pod(out, static_cast<std::int32_t>(params.n_matter));
  detail::write_pod(out, static_cast<std::int32_t>(psi.center_site()));

  auto write_space = [&](const BondSpace& bs) {
    detail::write_pod(out, static_cast<std::uint32_t>(bs.sectors.size()));
    for (const auto& [label, deg] : bs.sectors) {
      detail::write_pod(out, static_cast<std::int32_t>(label.q));
      detail::write_pod(out, static_cast<std::int32_t>(label.ell));
      detail::write_pod(out, static_cast<std::uint32_t>(deg));
    }
  };
  for (int j = 1; j <= psi.length(); ++j) {
    const BlockTensor& a = psi.site(j);
    write_space(a.left());
    write_space(a.right());
    detail::write_pod(out, static_cast<std::uint32_t>(a.blocks().size()));
    for (const auto& [key, block] : a.blocks()) {
      detail::write_pod(out, static_cast<std::int32_t>(key.left.q));
      detail::write_pod(out, static_cast<std::int32_t>(key.left.ell));
      detail::write_pod(out, static_cast<std::uint32_t>(key.phys));
      detail::write_pod(out, static_cast<std::int32_t>(key.right.q));
      detail::write_pod(out, static_cast<std::int32_t>(key.right.ell));
      detail::write_pod(out, static_cast<std::uint32_t>(block.rows()));
      detail::write_pod(out, static_cast<std::uint32_t>(block.cols()));
      for (int r = 0; r < block.rows(); ++r)
        for (int c = 0; c < block.cols(); ++c) detail::write_pod(out, block(r, c));
    }
  }
}

struct Checkpoint {
  ModelParams params;
  SymmetricMPS state;
};

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  char magic[sizeof(checkpoint_magic) - 1];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, checkpoint_magic, sizeof(magic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  const auto version = detail::read_pod<std::uint32_t>(in);
  if (version != checkpoint_version) throw std::runtime_error("unsupported checkpoint version");

  Checkpoint ckpt;
  ckpt.params.t = detail::read_pod<double>(in);
  ckpt.params.g1 = detail::read_pod<double>(in);
  ckpt.params.eps = detail::read_pod<double>(in);
  ckpt.params.L = detail::read_pod<std::int32_t>(in);
  ckpt.params.n_matter = detail::read_pod<std::int32_t>(in);
  const int center = detail::read_pod<std::int32_t>(in);
  ckpt.params.validate();

  auto read_space = [&]() {
    BondSpace bs;
    const auto n = detail::read_pod<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < n; ++i) {
      const int q = detail::read_pod<std::int32_t>(in);
      const int ell = detail::read_pod<std::int32_t>(in);
      const int deg = static_cast<int>(detail::read_pod<std::uint32_t>(in));
      bs.add(ChargeLabel{q, ell}, deg);
    }
    return bs;
  };

  std::vector<BlockTensor> tensors;
  for (int j = 1; j <= ckpt.params.L; ++j) {
    const BondSpace left = read_space();
    const BondSpace right = read_space();
    BlockTensor a(left, &site_basis(site_kind(j, ckpt.params.L)), right);
    const auto n_blocks = detail::read_pod<std::uint32_t>(in);
    for (std::uint32_t b = 0; b < n_blocks; ++b) {
      const int lq = detail::read_pod<std::int32_t>(in);
      const int lell = detail::read_pod<std::int32_t>(in);
      const int phys = static_cast<int>(detail::read_pod<std::uint32_t>(in));
      const int rq = detail::read_pod<std::int32_t>(in);
      const int rell = detail::read_pod<std::int32_t>(in);
      const int rows = static_cast<int>(detail::read_pod<std::uint32_t>(in));
      const int cols = static_cast<int>(detail::read_pod<std::uint32_t>(in));
      Eigen::MatrixXd& block = a.block(ChargeLabel{lq, lell}, phys, ChargeLabel{rq, rell});
      if (block.rows() != rows || block.cols() != cols)
        throw std::runtime_error("checkpoint block shape disagrees with its bond spaces");
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) block(r, c) = detail::read_pod<double>(in);
    }
    tensors.push_back(std::move(a));
  }
  ckpt.state = SymmetricMPS::from_tensors(std::move(tensors), center - 1, ckpt.params.n_matter);
  return ckpt;
}

}  // namespace su2qlm
