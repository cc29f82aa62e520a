#pragma once

// Experiment configuration: flat `key = value` text, `#` starts a comment,
// lists are comma separated. Powers are given in dBm and converted once at
// load; "-inf" or "off" means 0 W.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dasee/baselines.hpp"
#include "dasee/eetm.hpp"
#include "dasee/network_model.hpp"
#include "dasee/units.hpp"

namespace dasee::sim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { das_ee, das_rate, cas_ee, cas_rate };

inline constexpr Method kAllMethods[] = {Method::das_ee, Method::das_rate, Method::cas_ee, Method::cas_rate};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::das_ee: return "das-ee";
    case Method::das_rate: return "das-rate";
    case Method::cas_ee: return "cas-ee";
    case Method::cas_rate: return "cas-rate";
  }
  return "unknown";
}

inline bool is_cas(Method m) { return m == Method::cas_ee || m == Method::cas_rate; }

struct ExperimentConfig {
  SystemConfig system;
  double p_c_dbm = 29.0;
  double p_0_dbm = 30.0;
  SolverSettings solver;
  int drops = 100;
  std::uint64_t master_seed = 1;
  std::vector<double> p_max_grid_dbm{30, 35, 40, 45, 50, 55, 60, 65};
  std::vector<double> p_bh_grid_dbm{-std::numeric_limits<double>::infinity(), 30, 40};
  std::vector<double> convergence_p_max_dbm{0, 10, 20};
  double convergence_p_bh_dbm = -std::numeric_limits<double>::infinity();
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  CasCircuit cas_circuit = CasCircuit::paper;
  int workers = 0;  // 0: one per hardware thread
  double failure_threshold = 0.01;

  /// DAS power model with every RAU at the same budget.
  PowerModel power_model(double p_max_dbm, double p_bh_dbm) const {
    PowerModel pm;
    pm.p_c = dbm_to_watts(p_c_dbm);
    pm.p_0 = dbm_to_watts(p_0_dbm);
    pm.p_bh = dbm_to_watts(p_bh_dbm);
    pm.p_max = Eigen::VectorXd::Constant(system.num_raus, dbm_to_watts(p_max_dbm));
    return pm;
  }

  bool has_method(Method m) const {
    for (Method x : methods)
      if (x == m) return true;
    return false;
  }

  void validate() const {
    try {
      system.validate();
      solver.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (drops < 1) throw ConfigError("drops must be >= 1");
    if (p_max_grid_dbm.empty() || p_bh_grid_dbm.empty() || convergence_p_max_dbm.empty())
      throw ConfigError("power grids must be nonempty");
    if (methods.empty()) throw ConfigError("methods must be nonempty");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (!(failure_threshold >= 0.0 && failure_threshold <= 1.0))
      throw ConfigError("failure_threshold must lie in [0, 1]");
    auto finite_or_off = [](double dbm) { return std::isfinite(dbm) || dbm == -std::numeric_limits<double>::infinity(); };
    for (double v : p_max_grid_dbm)
      if (!std::isfinite(v)) throw ConfigError("p_max_grid_dBm entries must be finite");
    for (double v : convergence_p_max_dbm)
      if (!std::isfinite(v)) throw ConfigError("convergence_p_max_dBm entries must be finite");
    for (double v : p_bh_grid_dbm)
      if (!finite_or_off(v)) throw ConfigError("p_bh_grid_dBm entries must be finite or off");
    if (!finite_or_off(convergence_p_bh_dbm)) throw ConfigError("convergence_p_bh_dBm must be finite or off");
    if (!std::isfinite(p_c_dbm) && p_c_dbm != -std::numeric_limits<double>::infinity())
      throw ConfigError("p_c_dBm must be finite or off");
    if (!std::isfinite(p_0_dbm) && p_0_dbm != -std::numeric_limits<double>::infinity())
      throw ConfigError("p_0_dBm must be finite or off");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string_view rest = s;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& s, bool allow_off = false) {
  if (allow_off && (s == "-inf" || s == "off")) return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& s) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(key + ": expected an integer, got '" + s + "'");
  return v;
}

inline std::vector<double> parse_doubles(const std::string& key, const std::string& s, bool allow_off = false) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(key, item, allow_off));
  return out;
}

inline std::string format_number(double v) {
  if (v == -std::numeric_limits<double>::infinity()) return "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + format_number(xs[i]);
  return out;
}

}  // namespace detail

/// Parses configuration text on top of the defaults. `source` names the input
/// in error messages.
inline ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>") {
  using namespace detail;
  std::map<std::string, std::pair<std::string, int>> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(where + ": expected 'key = value'");
    if (entries.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    entries[key] = {value, lineno};
  }

  ExperimentConfig cfg;
  std::vector<int> antennas;
  for (const auto& [key, entry] : entries) {
    const std::string& v = entry.first;
    const std::string where = source + ":" + std::to_string(entry.second) + ": " + key;
    try {
      if (key == "N") cfg.system.num_raus = parse_int<int>(key, v);
      else if (key == "K") cfg.system.num_users = parse_int<int>(key, v);
      else if (key == "M") {
        for (const auto& item : split_list(v)) antennas.push_back(parse_int<int>(key, item));
      } else if (key == "cell_radius") cfg.system.cell_radius = parse_double(key, v);
      else if (key == "min_access_distance") cfg.system.min_access_distance = parse_double(key, v);
      else if (key == "R_min") cfg.system.rate_min = parse_double(key, v);
      else if (key == "noise_power_dBm") cfg.system.noise_power = dbm_to_watts(parse_double(key, v));
      else if (key == "pathloss_intercept_dB") cfg.system.path_loss.intercept_db = parse_double(key, v);
      else if (key == "pathloss_slope_dB") cfg.system.path_loss.slope_db_per_decade = parse_double(key, v);
      else if (key == "shadowing_std_dB") cfg.system.shadowing_std_db = parse_double(key, v);
      else if (key == "p_c_dBm") cfg.p_c_dbm = parse_double(key, v, true);
      else if (key == "p_0_dBm") cfg.p_0_dbm = parse_double(key, v, true);
      else if (key == "p_max_grid_dBm") cfg.p_max_grid_dbm = parse_doubles(key, v);
      else if (key == "p_bh_grid_dBm") cfg.p_bh_grid_dbm = parse_doubles(key, v, true);
      else if (key == "convergence_p_max_dBm") cfg.convergence_p_max_dbm = parse_doubles(key, v);
      else if (key == "convergence_p_bh_dBm") cfg.convergence_p_bh_dbm = parse_double(key, v, true);
      else if (key == "drops") cfg.drops = parse_int<int>(key, v);
      else if (key == "master_seed") cfg.master_seed = parse_int<std::uint64_t>(key, v);
      else if (key == "delta") cfg.solver.delta = parse_double(key, v);
      else if (key == "epsilon") cfg.solver.epsilon = parse_double(key, v);
      else if (key == "n_rand") cfg.solver.n_rand = parse_int<int>(key, v);
      else if (key == "max_iters") cfg.solver.max_iters = parse_int<int>(key, v);
      else if (key == "workers") cfg.workers = parse_int<int>(key, v);
      else if (key == "failure_threshold") cfg.failure_threshold = parse_double(key, v);
      else if (key == "ee_denominator") {
        if (v == "full") cfg.solver.ee_denominator = EeDenominator::full;
        else if (v == "p2-literal") cfg.solver.ee_denominator = EeDenominator::p2_literal;
        else throw ConfigError("expected 'full' or 'p2-literal', got '" + v + "'");
      } else if (key == "cas_circuit") {
        if (v == "paper") cfg.cas_circuit = CasCircuit::paper;
        else if (v == "mirrored") cfg.cas_circuit = CasCircuit::mirrored;
        else throw ConfigError("expected 'paper' or 'mirrored', got '" + v + "'");
      } else if (key == "methods") {
        cfg.methods.clear();
        for (const auto& item : split_list(v)) {
          bool found = false;
          for (Method m : kAllMethods)
            if (item == to_string(m)) {
              if (cfg.has_method(m)) throw ConfigError("method '" + item + "' listed twice");
              cfg.methods.push_back(m);
              found = true;
            }
          if (!found) throw ConfigError("unknown method '" + item + "'");
        }
      } else {
        throw ConfigError("unknown key");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

  // A single M applies to every RAU.
  if (antennas.size() == 1) antennas.assign(cfg.system.num_raus, antennas[0]);
  if (!antennas.empty()) cfg.system.antennas = antennas;
  else if (entries.count("N")) cfg.system.antennas.assign(std::max(cfg.system.num_raus, 0), 4);
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

/// Canonical text of a configuration; parse_config(echo(c)) reproduces c.
inline std::string echo(const ExperimentConfig& c) {
  using detail::format_number;
  using detail::join;
  std::ostringstream out;
  std::string m;
  for (std::size_t i = 0; i < c.system.antennas.size(); ++i) m += (i ? ", " : "") + std::to_string(c.system.antennas[i]);
  std::string methods;
  for (std::size_t i = 0; i < c.methods.size(); ++i) methods += (i ? ", " : "") + std::string(to_string(c.methods[i]));
  out << "N = " << c.system.num_raus << "\n"
      << "K = " << c.system.num_users << "\n"
      << "M = " << m << "\n"
      << "cell_radius = " << format_number(c.system.cell_radius) << "\n"
      << "min_access_distance = " << format_number(c.system.min_access_distance) << "\n"
      << "R_min = " << format_number(c.system.rate_min) << "\n"
      << "noise_power_dBm = " << format_number(watts_to_dbm(c.system.noise_power)) << "\n"
      << "pathloss_intercept_dB = " << format_number(c.system.path_loss.intercept_db) << "\n"
      << "pathloss_slope_dB = " << format_number(c.system.path_loss.slope_db_per_decade) << "\n"
      << "shadowing_std_dB = " << format_number(c.system.shadowing_std_db) << "\n"
      << "p_c_dBm = " << format_number(c.p_c_dbm) << "\n"
      << "p_0_dBm = " << format_number(c.p_0_dbm) << "\n"
      << "p_max_grid_dBm = " << join(c.p_max_grid_dbm) << "\n"
      << "p_bh_grid_dBm = " << join(c.p_bh_grid_dbm) << "\n"
      << "convergence_p_max_dBm = " << join(c.convergence_p_max_dbm) << "\n"
      << "convergence_p_bh_dBm = " << format_number(c.convergence_p_bh_dbm) << "\n"
      << "drops = " << c.drops << "\n"
      << "master_seed = " << c.master_seed << "\n"
      << "methods = " << methods << "\n"
      << "delta = " << format_number(c.solver.delta) << "\n"
      << "epsilon = " << format_number(c.solver.epsilon) << "\n"
      << "n_rand = " << c.solver.n_rand << "\n"
      << "max_iters = " << c.solver.max_iters << "\n"
      << "ee_denominator = " << (c.solver.ee_denominator == EeDenominator::full ? "full" : "p2-literal") << "\n"
      << "cas_circuit = " << (c.cas_circuit == CasCircuit::paper ? "paper" : "mirrored") << "\n"
      << "workers = " << c.workers << "\n"
      << "failure_threshold = " << format_number(c.failure_threshold) << "\n";
  return out.str();
}

}  // namespace dasee::sim
