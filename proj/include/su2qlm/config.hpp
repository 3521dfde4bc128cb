#pragma once
// Run configuration: a small INI-style key/value format with a strict schema.
// Unknown sections or keys are rejected so a config file always describes a
// reproducible run in full.

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "su2qlm/model.hpp"
#include "su2qlm/tebd.hpp"

namespace su2qlm {

struct RunConfig {
  ModelParams model;
  int chi_max = 64;
  double trunc_tol = 1e-10;
  AnnealSchedule schedule = default_schedule();
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string sweep_parameter = "t";
  std::vector<double> sweep_values;
  bool warm_start = true;
  double discard_fraction = 0.10;
  double bulk_window = 0.50;
  std::string out_dir = "out";
  bool write_csv = true;
  bool write_jsonl = true;

  void validate() const {
    model.validate();
    if (chi_max < 1) throw std::invalid_argument("mps.chi_max must be positive");
    if (trunc_tol < 0.0) throw std::invalid_argument("mps.trunc_tol must be nonnegative");
    validate_schedule(schedule);
    if (seeds.empty()) throw std::invalid_argument("tebd.seeds must not be empty");
    if (sweep_parameter != "t" && sweep_parameter != "chi")
      throw std::invalid_argument("sweep.parameter must be 't' or 'chi'");
    if (discard_fraction < 0.0 || discard_fraction >= 0.5)
      throw std::invalid_argument("analysis.discard_fraction must lie in [0, 0.5)");
    if (bulk_window <= 0.0 || bulk_window > 1.0)
      throw std::invalid_argument("analysis.bulk_window must lie in (0, 1]");
    if (out_dir.empty()) throw std::invalid_argument("output.directory must not be empty");
    if (!write_csv && !write_jsonl)
      throw std::invalid_argument("output.formats must include csv or jsonl");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string v = trim(item);
    if (!v.empty()) out.push_back(v);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& s) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: bad numeric value for " + key + ": '" + s + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& s) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: bad integer value for " + key + ": '" + s + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("config: bad boolean value for " + key + ": '" + s + "'");
}

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"model", {"t", "g1", "eps"}},
      {"lattice", {"L", "N_M"}},
      {"mps", {"chi_max", "trunc_tol"}},
      {"tebd", {"dtau", "max_sweeps", "energy_tol", "seeds"}},
      {"sweep", {"parameter", "values", "warm_start"}},
      {"analysis", {"discard_fraction", "bulk_window"}},
      {"output", {"directory", "formats"}},
  };

  std::map<std::string, std::map<std::string, std::string>> entries;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: malformed section at line " + std::to_string(lineno));
      section = detail::trim(line.substr(1, line.size() - 2));
      if (!schema.count(section))
        throw std::invalid_argument("config: unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value at line " + std::to_string(lineno));
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty())
      throw std::invalid_argument("config: key '" + key + "' outside any section");
    if (!schema.at(section).count(key))
      throw std::invalid_argument("config: unknown key '" + key + "' in section [" + section + "]");
    if (entries[section].count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "' in section [" + section +
                                  "]");
    entries[section][key] = value;
  }

  RunConfig cfg;
  auto get = [&](const std::string& sec, const std::string& key) -> const std::string* {
    auto s = entries.find(sec);
    if (s == entries.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  };

  if (const auto* v = get("model", "t")) cfg.model.t = detail::parse_double("model.t", *v);
  if (const auto* v = get("model", "g1")) cfg.model.g1 = detail::parse_double("model.g1", *v);
  if (const auto* v = get("model", "eps")) cfg.model.eps = detail::parse_double("model.eps", *v);
  if (const auto* v = get("lattice", "L"))
    cfg.model.L = static_cast<int>(detail::parse_int("lattice.L", *v));
  if (const auto* v = get("lattice", "N_M"))
    cfg.model.n_matter = static_cast<int>(detail::parse_int("lattice.N_M", *v));
  if (const auto* v = get("mps", "chi_max"))
    cfg.chi_max = static_cast<int>(detail::parse_int("mps.chi_max", *v));
  if (const auto* v = get("mps", "trunc_tol"))
    cfg.trunc_tol = detail::parse_double("mps.trunc_tol", *v);

  {
    std::vector<double> dtaus;
    std::vector<int> sweeps;
    std::vector<double> tols;
    if (const auto* v = get("tebd", "dtau"))
      for (const auto& s : detail::split_list(*v)) dtaus.push_back(detail::parse_double("tebd.dtau", s));
    if (const auto* v = get("tebd", "max_sweeps"))
      for (const auto& s : detail::split_list(*v))
        sweeps.push_back(static_cast<int>(detail::parse_int("tebd.max_sweeps", s)));
    if (const auto* v = get("tebd", "energy_tol"))
      for (const auto& s : detail::split_list(*v))
        tols.push_back(detail::parse_double("tebd.energy_tol", s));
    if (!dtaus.empty()) {
      cfg.schedule.clear();
      for (size_t i = 0; i < dtaus.size(); ++i) {
        AnnealStage stage;
        stage.dtau = dtaus[i];
        if (!sweeps.empty()) stage.max_sweeps = sweeps.size() == 1 ? sweeps[0] : sweeps.at(i);
        if (!tols.empty()) stage.energy_tol = tols.size() == 1 ? tols[0] : tols.at(i);
        cfg.schedule.push_back(stage);
      }
    } else if (!sweeps.empty() || !tols.empty()) {
      for (size_t i = 0; i < cfg.schedule.size(); ++i) {
        if (!sweeps.empty())
          cfg.schedule[i].max_sweeps = sweeps.size() == 1 ? sweeps[0] : sweeps.at(i);
        if (!tols.empty()) cfg.schedule[i].energy_tol = tols.size() == 1 ? tols[0] : tols.at(i);
      }
    }
  }
  if (const auto* v = get("tebd", "seeds")) {
    cfg.seeds.clear();
    for (const auto& s : detail::split_list(*v))
      cfg.seeds.push_back(static_cast<std::uint64_t>(detail::parse_int("tebd.seeds", s)));
  }

  if (const auto* v = get("sweep", "parameter")) cfg.sweep_parameter = *v;
  if (const auto* v = get("sweep", "values"))
    for (const auto& s : detail::split_list(*v))
      cfg.sweep_values.push_back(detail::parse_double("sweep.values", s));
  if (const auto* v = get("sweep", "warm_start"))
    cfg.warm_start = detail::parse_bool("sweep.warm_start", *v);

  if (const auto* v = get("analysis", "discard_fraction"))
    cfg.discard_fraction = detail::parse_double("analysis.discard_fraction", *v);
  if (const auto* v = get("analysis", "bulk_window"))
    cfg.bulk_window = detail::parse_double("analysis.bulk_window", *v);

  if (const auto* v = get("output", "directory")) cfg.out_dir = *v;
  if (const auto* v = get("output", "formats")) {
    cfg.write_csv = false;
    cfg.write_jsonl = false;
    for (const auto& s : detail::split_list(*v)) {
      if (s == "csv")
        cfg.write_csv = true;
      else if (s == "jsonl")
        cfg.write_jsonl = true;
      else
        throw std::invalid_argument("config: unknown output format '" + s + "'");
    }
  }

  cfg.validate();
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace su2qlm
