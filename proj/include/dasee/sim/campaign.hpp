#pragma once

// Monte Carlo campaigns behind the convergence and EE-sweep plots. Each drop
// is a user placement plus DAS and CAS channel draws seeded from
// (master_seed, drop); drops run on a worker pool and are assembled in a fixed
// order, so the output does not depend on the worker count.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "dasee/baselines.hpp"
#include "dasee/eetm.hpp"
#include "dasee/network_model.hpp"
#include "dasee/random.hpp"
#include "dasee/sim/config.hpp"

namespace dasee::sim {

inline constexpr double kRateSlack = 1e-6;
inline constexpr double kBudgetSlack = 1e-7;

// Sub-stream keys under a drop seed.
inline constexpr std::uint64_t kUsersStream = 1;
inline constexpr std::uint64_t kDasChannelStream = 2;
inline constexpr std::uint64_t kCasChannelStream = 3;
inline constexpr std::uint64_t kConvergenceStream = 4;
inline constexpr std::uint64_t kMethodStreamBase = 16;

/// FNV-1a over the bit patterns of every channel coefficient and noise power.
inline std::uint64_t channel_hash(const ChannelRealization& ch) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& row : ch.h)
    for (const auto& v : row)
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        mix(v[i].real());
        mix(v[i].imag());
      }
  for (Eigen::Index k = 0; k < ch.sigma2.size(); ++k) mix(ch.sigma2[k]);
  return h;
}

struct Drop {
  int index = 0;
  std::uint64_t seed = 0;
  std::vector<Point> users;
  ChannelRealization das;
  ChannelRealization cas;
};

inline SystemConfig cas_config(const SystemConfig& das) {
  SystemConfig cas = das;
  cas.num_raus = 1;
  cas.antennas = {das.total_antennas()};
  return cas;
}

/// Users keep the minimum distance to every RAU and to the CAS site at the
/// origin, so both systems see the same placement.
inline Drop make_drop(const ExperimentConfig& cfg, int index) {
  Drop d;
  d.index = index;
  d.seed = derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(index)});
  const auto raus = place_raus(cfg.system.num_raus, cfg.system.cell_radius);
  const std::vector<Point> origin{{0.0, 0.0}};
  std::vector<Point> keep = raus;
  keep.push_back(origin.front());

  Rng users_rng = make_stream(d.seed, {kUsersStream});
  d.users = sample_users(cfg.system, keep, users_rng);
  Rng das_rng = make_stream(d.seed, {kDasChannelStream});
  d.das = sample_channel(cfg.system, raus, d.users, das_rng);
  Rng cas_rng = make_stream(d.seed, {kCasChannelStream});
  d.cas = sample_channel(cas_config(cfg.system), origin, d.users, cas_rng);
  return d;
}

namespace detail {

template <class Job>
void parallel_for(int count, int workers, Job&& job) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::max(1, std::min(workers, count));
  std::atomic<int> next{0};
  auto loop = [&] {
    for (int i = next++; i < count; i = next++) job(i);
  };
  std::vector<std::jthread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
}

inline double sample_std(double sum, double sum_sq, int n) {
  if (n < 2) return n == 1 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  const double mean = sum / n;
  return std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// EE sweep

struct SweepRow {
  int drop = 0;
  double p_max_dbm = 0.0;
  double p_bh_dbm = 0.0;
  Method method = Method::das_ee;
  RunStatus status = RunStatus::failed;
  double ee = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
  double min_sinr = std::numeric_limits<double>::quiet_NaN();
  double tx_power = std::numeric_limits<double>::quiet_NaN();
  double total_power = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;  // EETM iterations or bisection probes

  // Certification data, kept in memory only.
  double rate_shortfall = 0.0;
  double budget_excess = 0.0;
  std::uint64_t channel_hash = 0;
};

struct SweepDataset {
  std::vector<double> p_max_dbm;
  std::vector<double> p_bh_dbm;
  std::vector<Method> methods;
  int drops = 0;
  // Ordered by (P_max, P_bh, drop, method).
  std::vector<SweepRow> rows;

  int failures() const {
    return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status == RunStatus::failed; }));
  }
  double failure_fraction() const { return rows.empty() ? 0.0 : static_cast<double>(failures()) / rows.size(); }
};

namespace detail {

inline void fill_solution(SweepRow& row, RunStatus status, const BeamState& state, const Metrics& m, const PowerModel& pm,
                          double rate_min) {
  row.status = status;
  row.ee = m.ee;
  row.rate = m.rate;
  row.min_sinr = m.sinr.minCoeff();
  row.tx_power = state.powers.sum();
  row.total_power = m.total_power;
  if (status != RunStatus::ok) return;
  row.rate_shortfall = std::max(0.0, rate_min - m.rate);
  row.budget_excess = std::max(0.0, (state.powers - pm.p_max).maxCoeff());
  if (!std::isfinite(m.ee) || row.rate_shortfall > kRateSlack || row.budget_excess > kBudgetSlack)
    row.status = RunStatus::failed;
}

}  // namespace detail

/// All rows of one drop, ordered by (P_max, P_bh, method).
inline std::vector<SweepRow> run_sweep_drop(const ExperimentConfig& cfg, int drop_index) {
  const int G = static_cast<int>(cfg.p_max_grid_dbm.size());
  const int B = static_cast<int>(cfg.p_bh_grid_dbm.size());
  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(G) * B * cfg.methods.size());

  std::optional<Drop> drop;
  try {
    drop = make_drop(cfg, drop_index);
  } catch (const std::exception&) {
  }
  const SystemConfig cas_sys = cas_config(cfg.system);
  const double rate_min = cfg.system.rate_min;
  auto method_stream = [&](Method m, int i, int j) {
    return make_stream(drop->seed, {kMethodStreamBase + static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(j)});
  };

  for (int i = 0; i < G; ++i) {
    const double p_max = cfg.p_max_grid_dbm[i];
    const PowerModel pm0 = cfg.power_model(p_max, cfg.p_bh_grid_dbm.front());

    // Rate-max solutions and the CAS do not depend on P_bh; solve once per P_max.
    std::optional<RateMaxResult> das_rate;
    std::optional<RateMaxResult> cas_rate;
    std::optional<EetmTrace> cas_ee;
    std::optional<PowerModel> cas_pm;
    if (drop) {
      try {
        cas_pm = build_cas_system(cfg.system, pm0, cfg.cas_circuit).power_model;
        if (cfg.has_method(Method::das_rate)) {
          Rng rng = method_stream(Method::das_rate, i, 0);
          das_rate = max_min_rate(drop->das, cfg.system, pm0, cfg.solver, rng);
        }
        if (cfg.has_method(Method::cas_ee)) {
          Rng rng = method_stream(Method::cas_ee, i, 0);
          cas_ee = run_eetm(drop->cas, cas_sys, *cas_pm, cfg.solver, rng);
        }
        if (cfg.has_method(Method::cas_rate)) {
          Rng rng = method_stream(Method::cas_rate, i, 0);
          cas_rate = max_min_rate(drop->cas, cas_sys, *cas_pm, cfg.solver, rng);
        }
      } catch (const std::exception&) {
        das_rate.reset();
        cas_ee.reset();
        cas_rate.reset();
        cas_pm.reset();
      }
    }

    for (int j = 0; j < B; ++j) {
      const double p_bh = cfg.p_bh_grid_dbm[j];
      const PowerModel pm = cfg.power_model(p_max, p_bh);
      for (Method m : cfg.methods) {
        SweepRow row;
        row.drop = drop_index;
        row.p_max_dbm = p_max;
        row.p_bh_dbm = p_bh;
        row.method = m;
        if (!drop) {
          rows.push_back(row);
          continue;
        }
        row.channel_hash = channel_hash(is_cas(m) ? drop->cas : drop->das);
        try {
          switch (m) {
            case Method::das_ee: {
              Rng rng = method_stream(m, i, j);
              const auto tr = run_eetm(drop->das, cfg.system, pm, cfg.solver, rng);
              row.iterations = static_cast<int>(tr.iterations.size()) - 1;
              if (tr.status == RunStatus::ok)
                detail::fill_solution(row, tr.status, tr.final_state, tr.final_metrics, pm, rate_min);
              else
                row.status = tr.status;
              break;
            }
            case Method::das_rate:
              if (das_rate) {
                row.iterations = static_cast<int>(das_rate->probes.size());
                const Metrics metrics = evaluate_metrics(drop->das, das_rate->state, pm, cfg.system);
                detail::fill_solution(row, das_rate->status, das_rate->state, metrics, pm, rate_min);
              }
              break;
            case Method::cas_ee:
              if (cas_ee) {
                row.iterations = static_cast<int>(cas_ee->iterations.size()) - 1;
                if (cas_ee->status == RunStatus::ok)
                  detail::fill_solution(row, cas_ee->status, cas_ee->final_state, cas_ee->final_metrics, *cas_pm, rate_min);
                else
                  row.status = cas_ee->status;
              }
              break;
            case Method::cas_rate:
              if (cas_rate) {
                row.iterations = static_cast<int>(cas_rate->probes.size());
                detail::fill_solution(row, cas_rate->status, cas_rate->state, cas_rate->metrics, *cas_pm, rate_min);
              }
              break;
          }
        } catch (const std::exception&) {
          row.status = RunStatus::failed;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

inline SweepDataset run_ee_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<SweepRow>> per_drop(cfg.drops);
  detail::parallel_for(cfg.drops, cfg.workers, [&](int d) { per_drop[d] = run_sweep_drop(cfg, d); });

  SweepDataset ds;
  ds.p_max_dbm = cfg.p_max_grid_dbm;
  ds.p_bh_dbm = cfg.p_bh_grid_dbm;
  ds.methods = cfg.methods;
  ds.drops = cfg.drops;
  const std::size_t per_point = cfg.methods.size();
  const std::size_t G = cfg.p_max_grid_dbm.size();
  const std::size_t B = cfg.p_bh_grid_dbm.size();
  ds.rows.reserve(G * B * per_point * cfg.drops);
  for (std::size_t i = 0; i < G; ++i)
    for (std::size_t j = 0; j < B; ++j)
      for (int d = 0; d < cfg.drops; ++d)
        for (std::size_t m = 0; m < per_point; ++m) ds.rows.push_back(per_drop[d][(i * B + j) * per_point + m]);
  return ds;
}

struct SweepAggregate {
  double p_max_dbm = 0.0;
  double p_bh_dbm = 0.0;
  Method method = Method::das_ee;
  double mean_ee = std::numeric_limits<double>::quiet_NaN();
  double std_ee = std::numeric_limits<double>::quiet_NaN();
  double mean_rate = std::numeric_limits<double>::quiet_NaN();
  int n_ok = 0;
  int n_infeasible = 0;
  int n_failed = 0;
};

/// Mean and sample standard deviation over the drops that solved; infeasible
/// and failed drops are only counted. Ordered by (P_max, P_bh, method).
inline std::vector<SweepAggregate> aggregate(const SweepDataset& ds) {
  std::vector<SweepAggregate> out;
  const std::size_t M = ds.methods.size();
  const std::size_t B = ds.p_bh_dbm.size();
  for (std::size_t i = 0; i < ds.p_max_dbm.size(); ++i)
    for (std::size_t j = 0; j < B; ++j)
      for (std::size_t m = 0; m < M; ++m) {
        SweepAggregate a;
        a.p_max_dbm = ds.p_max_dbm[i];
        a.p_bh_dbm = ds.p_bh_dbm[j];
        a.method = ds.methods[m];
        double sum = 0.0, sum_sq = 0.0, rate_sum = 0.0;
        for (int d = 0; d < ds.drops; ++d) {
          const SweepRow& r = ds.rows[((i * B + j) * ds.drops + d) * M + m];
          if (r.status == RunStatus::ok) {
            ++a.n_ok;
            sum += r.ee;
            sum_sq += r.ee * r.ee;
            rate_sum += r.rate;
          } else if (r.status == RunStatus::infeasible) {
            ++a.n_infeasible;
          } else {
            ++a.n_failed;
          }
        }
        if (a.n_ok > 0) {
          a.mean_ee = sum / a.n_ok;
          a.mean_rate = rate_sum / a.n_ok;
        }
        a.std_ee = detail::sample_std(sum, sum_sq, a.n_ok);
        out.push_back(a);
      }
  return out;
}

// ---------------------------------------------------------------------------
// Convergence

struct ConvergenceRow {
  double p_max_dbm = 0.0;
  int drop = 0;
  int l = 0;
  RunStatus status = RunStatus::failed;  // of the whole trace
  double t = std::numeric_limits<double>::quiet_NaN();
  double ee = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
  double tx_power = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  double rate_shortfall = 0.0;
  double budget_excess = 0.0;
};

struct TraceSummary {
  double p_max_dbm = 0.0;
  int drop = 0;
  RunStatus status = RunStatus::failed;
  bool converged = false;
  bool monotone = false;
  int iterations = 0;  // last l in the trace
  double final_gap = std::numeric_limits<double>::quiet_NaN();  // |EE^(L) - EE^(L-1)|
};

struct ConvergenceDataset {
  std::vector<double> p_max_dbm;
  int drops = 0;
  std::vector<TraceSummary> traces;  // ordered by (P_max, drop)
  std::vector<ConvergenceRow> rows;  // ordered by (P_max, drop, l)

  int failures() const {
    return static_cast<int>(
        std::count_if(traces.begin(), traces.end(), [](const TraceSummary& t) { return t.status == RunStatus::failed; }));
  }
  double failure_fraction() const { return traces.empty() ? 0.0 : static_cast<double>(failures()) / traces.size(); }
};

struct ConvergenceDrop {
  std::vector<TraceSummary> traces;
  std::vector<std::vector<ConvergenceRow>> rows;
};

inline ConvergenceDrop run_convergence_drop(const ExperimentConfig& cfg, int drop_index) {
  ConvergenceDrop out;
  std::optional<Drop> drop;
  try {
    drop = make_drop(cfg, drop_index);
  } catch (const std::exception&) {
  }
  for (std::size_t i = 0; i < cfg.convergence_p_max_dbm.size(); ++i) {
    const double p_max = cfg.convergence_p_max_dbm[i];
    TraceSummary summary;
    summary.p_max_dbm = p_max;
    summary.drop = drop_index;
    std::vector<ConvergenceRow> rows;
    if (drop) {
      try {
        const PowerModel pm = cfg.power_model(p_max, cfg.convergence_p_bh_dbm);
        Rng rng = make_stream(drop->seed, {kConvergenceStream, static_cast<std::uint64_t>(i)});
        const auto tr = run_eetm(drop->das, cfg.system, pm, cfg.solver, rng);
        summary.status = tr.status;
        summary.converged = tr.converged;
        summary.monotone = tr.monotone;
        summary.iterations = tr.iterations.back().l;
        if (tr.iterations.size() > 1)
          summary.final_gap = std::abs(tr.iterations.back().metrics.ee - tr.iterations[tr.iterations.size() - 2].metrics.ee);
        for (const auto& rec : tr.iterations) {
          ConvergenceRow row;
          row.p_max_dbm = p_max;
          row.drop = drop_index;
          row.l = rec.l;
          row.t = rec.t;
          row.ee = rec.metrics.ee;
          row.rate = rec.metrics.rate;
          row.tx_power = rec.state.powers.sum();
          row.converged = tr.converged;
          row.budget_excess = std::max(0.0, (rec.state.powers - pm.p_max).maxCoeff());
          // The l = 0 point is the initializer, not a solution.
          if (rec.l > 0) row.rate_shortfall = std::max(0.0, cfg.system.rate_min - rec.metrics.rate);
          if (tr.status == RunStatus::ok &&
              (row.budget_excess > kBudgetSlack || row.rate_shortfall > kRateSlack || !std::isfinite(row.ee)))
            summary.status = RunStatus::failed;
          rows.push_back(row);
        }
      } catch (const std::exception&) {
        summary.status = RunStatus::failed;
        rows.clear();
      }
    }
    for (auto& r : rows) r.status = summary.status;
    out.traces.push_back(summary);
    out.rows.push_back(std::move(rows));
  }
  return out;
}

inline ConvergenceDataset run_convergence_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ConvergenceDrop> per_drop(cfg.drops);
  detail::parallel_for(cfg.drops, cfg.workers, [&](int d) { per_drop[d] = run_convergence_drop(cfg, d); });

  ConvergenceDataset ds;
  ds.p_max_dbm = cfg.convergence_p_max_dbm;
  ds.drops = cfg.drops;
  for (std::size_t i = 0; i < ds.p_max_dbm.size(); ++i)
    for (int d = 0; d < cfg.drops; ++d) {
      ds.traces.push_back(per_drop[d].traces[i]);
      const auto& rows = per_drop[d].rows[i];
      ds.rows.insert(ds.rows.end(), rows.begin(), rows.end());
    }
  return ds;
}

struct ConvergenceAggregate {
  double p_max_dbm = 0.0;
  int l = 0;
  double mean_ee = std::numeric_limits<double>::quiet_NaN();
  double std_ee = std::numeric_limits<double>::quiet_NaN();
  int n = 0;
};

/// Mean EE per iteration over solved traces. A trace that stopped early keeps
/// contributing its final EE to later iterations.
inline std::vector<ConvergenceAggregate> aggregate(const ConvergenceDataset& ds) {
  std::vector<ConvergenceAggregate> out;
  for (double p : ds.p_max_dbm) {
    std::vector<std::vector<double>> traces;
    std::vector<double> current;
    int current_drop = -1;
    auto flush = [&] {
      if (!current.empty()) traces.push_back(std::move(current));
      current.clear();
    };
    for (const auto& r : ds.rows) {
      if (r.p_max_dbm != p || r.status != RunStatus::ok) continue;
      if (r.drop != current_drop) {
        flush();
        current_drop = r.drop;
      }
      current.push_back(r.ee);
    }
    flush();
    std::size_t length = 0;
    for (const auto& t : traces) length = std::max(length, t.size());
    for (std::size_t l = 0; l < length; ++l) {
      ConvergenceAggregate a;
      a.p_max_dbm = p;
      a.l = static_cast<int>(l);
      double sum = 0.0, sum_sq = 0.0;
      for (const auto& t : traces) {
        const double v = t[std::min(l, t.size() - 1)];
        sum += v;
        sum_sq += v * v;
      }
      a.n = static_cast<int>(traces.size());
      a.mean_ee = sum / a.n;
      a.std_ee = detail::sample_std(sum, sum_sq, a.n);
      out.push_back(a);
    }
  }
  return out;
}

}  // namespace dasee::sim
