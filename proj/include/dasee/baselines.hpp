#pragma once

// Comparison methods: worst-case rate maximisation by bisection over the SINR
// target, and the centralized antenna system (CAS) that mirrors a DAS layout.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "dasee/beamforming.hpp"
#include "dasee/eetm.hpp"
#include "dasee/network_model.hpp"

namespace dasee {

/// CAS circuit power: `paper` is N p_c + N M p_0 as stated for the comparison,
/// `mirrored` is N M p_c + N p_0 (the DAS circuit term).
enum class CasCircuit { paper, mirrored };

struct CasSystem {
  SystemConfig config;
  PowerModel power_model;
  Point site;
};

inline CasSystem build_cas_system(const SystemConfig& das, const PowerModel& das_pm, CasCircuit circuit = CasCircuit::paper) {
  das.validate();
  das_pm.validate(das);
  CasSystem cas;
  cas.config = das;
  cas.config.num_raus = 1;
  cas.config.antennas = {das.total_antennas()};
  cas.site = {0.0, 0.0};

  const double n = das.num_raus;
  const double antennas = das.total_antennas();
  cas.power_model = das_pm;
  cas.power_model.p_max = Eigen::VectorXd::Constant(1, das_pm.p_max.sum());
  cas.power_model.circuit_override =
      circuit == CasCircuit::paper ? n * das_pm.p_c + antennas * das_pm.p_0 : antennas * das_pm.p_c + n * das_pm.p_0;
  cas.power_model.backhaul_links = 0;
  return cas;
}

struct BisectionProbe {
  double t = 0.0;
  bool feasible = false;
};

struct RateMaxResult {
  RunStatus status = RunStatus::failed;
  BeamState state;
  Metrics metrics;
  double t_star = 0.0;
  std::vector<BisectionProbe> probes;
};

/// Largest common SINR target reachable under the per-RAU budgets. Each probe
/// solves the relaxation at the midpoint and counts as feasible only if a
/// candidate direction set meets the target at full power. The returned
/// beamformers use the best directions found at full power.
inline RateMaxResult max_min_rate(const ChannelRealization& channel, const SystemConfig& config, const PowerModel& pm,
                                  const SolverSettings& settings, Rng& rng, double rel_tol = 1e-3) {
  settings.validate();
  channel.validate();
  const int N = channel.num_raus();
  const int K = channel.num_users();
  RateMaxResult res;

  // Cauchy-Schwarz upper bound: every RAU matched to every user at once.
  double t_upper = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    double acc = 0.0;
    for (int n = 0; n < N; ++n) acc += channel.h[n][k].squaredNorm() * pm.p_max[n];
    t_upper = std::min(t_upper, acc / channel.sigma2[k]);
  }

  Directions best = init_directions(channel);
  const auto sinr_at_full = [&](const Directions& d) {
    return sinr(effective_gains(channel, d), pm.p_max, channel.sigma2).minCoeff();
  };
  double lo = sinr_at_full(best);
  double hi = t_upper;

  beam::P3Options opts;
  opts.n_rand = settings.n_rand;
  opts.rule = beam::CandidateRule::max_margin;
  while (hi > 0.0 && hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    opts.incumbent = &best;
    const auto probe = beam::solve_p3(channel, mid, pm.p_max, rng, opts);
    const bool feasible = probe.status == conic::SolveCode::optimal && probe.min_sinr >= mid;
    res.probes.push_back({mid, feasible});
    if (feasible) {
      for (int n = 0; n < N; ++n) {
        const double norm = probe.beamformers[n].norm();
        if (norm > 0.0) best[n] = probe.beamformers[n] / norm;
      }
      lo = std::max(mid, sinr_at_full(best));
    } else {
      hi = mid;
    }
  }

  res.state.directions = best;
  res.state.powers = pm.p_max;
  res.metrics = evaluate_metrics(channel, res.state, pm, config);
  res.t_star = res.metrics.sinr.minCoeff();
  res.status = res.metrics.rate >= config.rate_min - 1e-9 ? RunStatus::ok : RunStatus::infeasible;
  return res;
}

}  // namespace dasee
