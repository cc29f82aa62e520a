#pragma once

// Plot data: raw and aggregated CSV for both campaigns. Numbers carry 9
// significant digits; the first line is a versioned `#` comment.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dasee/sim/campaign.hpp"

namespace dasee::sim {

inline constexpr int kCsvVersion = 1;

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_sweep_csv(std::ostream& out, const SweepDataset& ds) {
  out << "# dasee fig3 raw v" << kCsvVersion << "\n";
  out << "p_max_dBm,p_bh_dBm,drop,method,status,ee,rate,min_sinr,tx_power,total_power,iterations\n";
  for (const auto& r : ds.rows)
    out << csv_number(r.p_max_dbm) << ',' << csv_number(r.p_bh_dbm) << ',' << r.drop << ',' << to_string(r.method) << ','
        << to_string(r.status) << ',' << csv_number(r.ee) << ',' << csv_number(r.rate) << ',' << csv_number(r.min_sinr)
        << ',' << csv_number(r.tx_power) << ',' << csv_number(r.total_power) << ',' << r.iterations << '\n';
}

inline void write_sweep_aggregate_csv(std::ostream& out, const SweepDataset& ds) {
  out << "# dasee fig3 aggregate v" << kCsvVersion << "\n";
  out << "p_max_dBm,p_bh_dBm,method,mean_ee,std_ee,mean_rate,n_ok,n_infeasible,n_failed\n";
  for (const auto& a : aggregate(ds))
    out << csv_number(a.p_max_dbm) << ',' << csv_number(a.p_bh_dbm) << ',' << to_string(a.method) << ','
        << csv_number(a.mean_ee) << ',' << csv_number(a.std_ee) << ',' << csv_number(a.mean_rate) << ',' << a.n_ok << ','
        << a.n_infeasible << ',' << a.n_failed << '\n';
}

inline void write_convergence_csv(std::ostream& out, const ConvergenceDataset& ds) {
  out << "# dasee fig2 raw v" << kCsvVersion << "\n";
  out << "p_max_dBm,drop,iteration,status,t,ee,rate,tx_power,converged\n";
  for (const auto& r : ds.rows)
    out << csv_number(r.p_max_dbm) << ',' << r.drop << ',' << r.l << ',' << to_string(r.status) << ',' << csv_number(r.t)
        << ',' << csv_number(r.ee) << ',' << csv_number(r.rate) << ',' << csv_number(r.tx_power) << ','
        << (r.converged ? 1 : 0) << '\n';
}

inline void write_convergence_aggregate_csv(std::ostream& out, const ConvergenceDataset& ds) {
  out << "# dasee fig2 aggregate v" << kCsvVersion << "\n";
  out << "p_max_dBm,iteration,mean_ee,std_ee,n\n";
  for (const auto& a : aggregate(ds))
    out << csv_number(a.p_max_dbm) << ',' << a.l << ',' << csv_number(a.mean_ee) << ',' << csv_number(a.std_ee) << ','
        << a.n << '\n';
}

namespace detail {

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ostringstream buffer;
  writer(buffer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError(path.string() + ": cannot open for writing");
  out << buffer.str();
  out.close();
  if (!out) throw OutputError(path.string() + ": write failed");
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw OutputError(dir.string() + ": cannot create output directory");
}

}  // namespace detail

/// Writes fig2_raw.csv and fig2_aggregate.csv into `dir`.
inline void emit_plotdata(const std::filesystem::path& dir, const ConvergenceDataset& ds) {
  detail::ensure_dir(dir);
  detail::write_file(dir / "fig2_raw.csv", [&](std::ostream& o) { write_convergence_csv(o, ds); });
  detail::write_file(dir / "fig2_aggregate.csv", [&](std::ostream& o) { write_convergence_aggregate_csv(o, ds); });
}

/// Writes fig3_raw.csv and fig3_aggregate.csv into `dir`.
inline void emit_plotdata(const std::filesystem::path& dir, const SweepDataset& ds) {
  detail::ensure_dir(dir);
  detail::write_file(dir / "fig3_raw.csv", [&](std::ostream& o) { write_sweep_csv(o, ds); });
  detail::write_file(dir / "fig3_aggregate.csv", [&](std::ostream& o) { write_sweep_aggregate_csv(o, ds); });
}

}  // namespace dasee::sim
