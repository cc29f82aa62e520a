#pragma once

// Energy-efficient multicast transmission (EETM, also written EEMT): alternate
// between power allocation for fixed directions and minimum-power direction
// updates at the SINR target found by the power step, until the energy
// efficiency stops improving by more than delta.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dasee/beamforming.hpp"
#include "dasee/network_model.hpp"
#include "dasee/power_alloc.hpp"

namespace dasee {

enum class RunStatus { ok, infeasible, failed };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::infeasible: return "infeasible";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

struct SolverSettings {
  double delta = 1e-4;    // EE accuracy, bits/Hz/J
  double epsilon = 1e-4;  // golden-search accuracy on t
  int n_rand = 1000;
  int max_iters = 20;
  EeDenominator ee_denominator = EeDenominator::full;

  void validate() const {
    if (!(delta > 0.0) || !(epsilon > 0.0) || n_rand < 1 || max_iters < 1)
      throw std::invalid_argument("SolverSettings: need delta > 0, epsilon > 0, n_rand >= 1, max_iters >= 1");
  }
};

struct IterationRecord {
  int l = 0;
  double t = 0.0;  // SINR target of the power step; worst SINR for l = 0
  BeamState state;
  Metrics metrics;
};

struct EetmTrace {
  RunStatus status = RunStatus::failed;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  // EE^(l) >= EE^(l-1) - 1e-6 held at every step.
  bool monotone = true;
  int sdr_fallbacks = 0;
  BeamState final_state;
  Metrics final_metrics;
};

/// Initial directions: principal eigenvector of sum_k h_{n,k} h_{n,k}^H / sigma_k^2.
inline Directions init_directions(const ChannelRealization& channel) {
  Directions dirs(channel.num_raus());
  for (int n = 0; n < channel.num_raus(); ++n) dirs[n] = beam::principal_direction(channel, n, true);
  return dirs;
}

inline EetmTrace run_eetm(const ChannelRealization& channel, const SystemConfig& config, const PowerModel& pm,
                          const SolverSettings& settings, Rng& rng) {
  settings.validate();
  channel.validate();
  pm.validate(config);
  EetmTrace trace;

  IterationRecord current;
  current.l = 0;
  current.state.directions = init_directions(channel);
  current.state.powers = pm.p_max;
  current.metrics = evaluate_metrics(channel, current.state, pm, config);
  current.t = current.metrics.sinr.minCoeff();
  trace.iterations.push_back(current);

  const double p2_static = p2_static_power(config, pm, settings.ee_denominator);
  for (int l = 1; l <= settings.max_iters; ++l) {
    const Directions& dirs = current.state.directions;
    power::PowerSubproblem sub{effective_gains(channel, dirs), channel.sigma2, pm.p_max, config.rate_min, p2_static};
    const auto p2 = power::solve_p2(sub, settings.epsilon);
    if (!p2) {
      if (l == 1) {
        trace.status = RunStatus::infeasible;
        return trace;
      }
      break;
    }

    beam::P3Options opts;
    opts.n_rand = settings.n_rand;
    opts.incumbent = &dirs;
    const auto p3 = beam::solve_p3(channel, p2->t_star, pm.p_max, rng, opts);

    IterationRecord next;
    next.l = l;
    next.t = p2->t_star;
    if (p3.status == conic::SolveCode::optimal) {
      next.state = BeamState::from_beamformers(p3.beamformers, dirs);
    } else {
      ++trace.sdr_fallbacks;
      next.state.directions = dirs;
      next.state.powers = p2->powers;
    }
    if (p3.sdr_status != conic::SolveCode::optimal) ++trace.sdr_fallbacks;
    next.metrics = evaluate_metrics(channel, next.state, pm, config);
    if (next.metrics.ee < current.metrics.ee - 1e-6) trace.monotone = false;
    const double change = std::abs(next.metrics.ee - current.metrics.ee);
    trace.iterations.push_back(next);
    current = std::move(next);
    if (change <= settings.delta) {
      trace.converged = true;
      break;
    }
  }

  trace.status = RunStatus::ok;
  trace.final_state = current.state;
  trace.final_metrics = current.metrics;
  return trace;
}

}  // namespace dasee
