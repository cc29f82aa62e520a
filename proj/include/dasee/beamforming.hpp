#pragma once

// Minimum-power multicast beamforming at a fixed SINR target t:
//
//   min sum_n ||w_n||^2  s.t.  sum_n |w_n^H h_{n,k}|^2 / sigma_k^2 >= t,  ||w_n||^2 <= P_n^max
//
// solved by semidefinite relaxation (W_n = w_n w_n^H with the rank constraint
// dropped). A rank-one relaxed optimum is read off directly; otherwise
// candidate directions are drawn from CN(0, W_n*) and each candidate's powers
// are restored with the f(t) LP.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dasee/conic/sdp.hpp"
#include "dasee/network_model.hpp"
#include "dasee/power_alloc.hpp"
#include "dasee/random.hpp"

namespace dasee::beam {

enum class Extraction { rank1_exact, randomized };

/// How the best candidate is picked: least restored power (the P3 objective)
/// or largest full-power worst-user SINR (feasibility probing for rate-max).
enum class CandidateRule { min_power, max_margin };

struct BeamformingResult {
  conic::SolveCode status = conic::SolveCode::numerical_failure;
  Directions beamformers;
  double total_power = std::numeric_limits<double>::quiet_NaN();
  double min_sinr = 0.0;
  Extraction method = Extraction::rank1_exact;
  int candidates_tried = 0;
  conic::SolveCode sdr_status = conic::SolveCode::numerical_failure;
  double sdr_objective = std::numeric_limits<double>::quiet_NaN();
};

struct P3Options {
  int n_rand = 1000;
  // Directions of the caller's current beamformers; tried as candidate 0.
  const Directions* incumbent = nullptr;
  CandidateRule rule = CandidateRule::min_power;
  double rank_one_tol = 1e-6;
  conic::SdpOptions sdp;
};

inline conic::SdpProblem build_sdr(const ChannelRealization& channel, double t, const Eigen::VectorXd& p_max) {
  if (!(t >= 0.0)) throw std::domain_error("build_sdr: target must be >= 0");
  const int N = channel.num_raus();
  const int K = channel.num_users();
  conic::SdpProblem sdp;
  for (int n = 0; n < N; ++n) {
    const int m = channel.antennas(n);
    sdp.block_sizes.push_back(m);
    sdp.objective.push_back(Eigen::MatrixXcd::Identity(m, m));
  }
  for (int k = 0; k < K; ++k) {
    conic::SdpConstraint con;
    for (int n = 0; n < N; ++n) con.coefficients.push_back(channel.h[n][k] * channel.h[n][k].adjoint());
    con.sense = conic::Sense::greater_equal;
    con.rhs = t * channel.sigma2[k];
    sdp.constraints.push_back(std::move(con));
  }
  for (int n = 0; n < N; ++n) {
    conic::SdpConstraint con;
    con.coefficients.resize(N);
    con.coefficients[n] = Eigen::MatrixXcd::Identity(channel.antennas(n), channel.antennas(n));
    con.sense = conic::Sense::less_equal;
    con.rhs = p_max[n];
    sdp.constraints.push_back(std::move(con));
  }
  return sdp;
}

/// Principal eigenvector of sum_k weight_k h_{n,k} h_{n,k}^H, with the phase
/// fixed so the first non-negligible entry is real and positive.
inline ComplexVector principal_direction(const ChannelRealization& channel, int n, bool noise_weighted) {
  const int m = channel.antennas(n);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m, m);
  for (int k = 0; k < channel.num_users(); ++k) {
    const double w = noise_weighted ? 1.0 / channel.sigma2[k] : 1.0;
    acc += w * channel.h[n][k] * channel.h[n][k].adjoint();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(acc);
  ComplexVector v = eig.eigenvectors().col(m - 1);
  const double norm = v.norm();
  if (!(norm > 0.0)) return ComplexVector::Unit(m, 0);
  v /= norm;
  for (int i = 0; i < m; ++i) {
    if (std::abs(v[i]) > 1e-12) {
      v *= std::conj(v[i]) / std::abs(v[i]);
      v[i] = std::abs(v[i]);
      break;
    }
  }
  return v;
}

namespace detail {

struct Candidate {
  Eigen::VectorXd powers;
  double total = std::numeric_limits<double>::infinity();
  double margin = -std::numeric_limits<double>::infinity();  // full-power worst SINR
  bool feasible = false;
};

// Restore powers for one direction set. `bound` lets the min-power rule skip
// the LP when a cheap lower bound already loses to the incumbent.
inline Candidate evaluate(const ChannelRealization& channel, const Directions& dirs, double t,
                          const Eigen::VectorXd& p_max, CandidateRule rule, double bound) {
  Candidate c;
  const Eigen::MatrixXd g = effective_gains(channel, dirs);
  Eigen::MatrixXd snr = g;
  for (int k = 0; k < g.cols(); ++k) snr.col(k) /= channel.sigma2[k];
  c.margin = (snr.transpose() * p_max).minCoeff();
  if (c.margin < t) return c;
  if (rule == CandidateRule::max_margin) {
    c.feasible = true;
    c.powers = p_max;
    c.total = p_max.sum();
    return c;
  }
  // sum_n p_n snr_nk <= (max_n snr_nk) sum_n p_n for every user.
  double lower = 0.0;
  for (int k = 0; k < snr.cols(); ++k) lower = std::max(lower, t / snr.col(k).maxCoeff());
  if (lower >= bound) return c;
  power::PowerSubproblem sub{g, channel.sigma2, p_max, 0.0, 0.0};
  const auto f = power::eval_f(sub, t);
  if (!f) return c;
  c.feasible = true;
  c.powers = f->powers;
  c.total = f->value;
  return c;
}

}  // namespace detail

inline BeamformingResult solve_p3(const ChannelRealization& channel, double t, const Eigen::VectorXd& p_max, Rng& rng,
                                  const P3Options& opts = {}) {
  if (!(t >= 0.0) || opts.n_rand < 1) throw std::domain_error("solve_p3: need t >= 0 and n_rand >= 1");
  const int N = channel.num_raus();
  BeamformingResult out;

  Directions fallback(N);
  for (int n = 0; n < N; ++n) fallback[n] = principal_direction(channel, n, false);

  Directions best_dirs;
  detail::Candidate best;
  auto better = [&](const detail::Candidate& c) {
    if (!c.feasible) return false;
    if (!best.feasible) return true;
    return opts.rule == CandidateRule::min_power ? c.total < best.total : c.margin > best.margin;
  };
  auto consider = [&](const Directions& dirs) {
    ++out.candidates_tried;
    const auto c = detail::evaluate(channel, dirs, t, p_max, opts.rule, best.feasible ? best.total : std::numeric_limits<double>::infinity());
    if (better(c)) {
      best = c;
      best_dirs = dirs;
    }
  };
  auto finish = [&]() {
    if (!best.feasible) {
      out.status = conic::SolveCode::infeasible;
      return out;
    }
    out.status = conic::SolveCode::optimal;
    out.beamformers.resize(N);
    for (int n = 0; n < N; ++n) out.beamformers[n] = std::sqrt(best.powers[n]) * best_dirs[n];
    out.total_power = best.powers.sum();
    Eigen::MatrixXd g = effective_gains(channel, best_dirs);
    out.min_sinr = sinr(g, best.powers, channel.sigma2).minCoeff();
    return out;
  };

  if (t == 0.0) {
    out.sdr_status = conic::SolveCode::optimal;
    out.sdr_objective = 0.0;
    best.feasible = true;
    best.powers = Eigen::VectorXd::Zero(N);
    best.total = 0.0;
    best.margin = 0.0;
    best_dirs = opts.incumbent ? *opts.incumbent : fallback;
    return finish();
  }

  const auto sdr = conic::solve_sdp(build_sdr(channel, t, p_max), opts.sdp);
  out.sdr_status = sdr.status;
  if (sdr.status == conic::SolveCode::infeasible && !opts.incumbent) {
    out.status = conic::SolveCode::infeasible;
    return out;
  }
  if (opts.incumbent) consider(*opts.incumbent);
  if (sdr.status != conic::SolveCode::optimal) {
    if (!opts.incumbent) {
      out.status = sdr.status;
      return out;
    }
    return finish();
  }
  out.sdr_objective = sdr.objective;

  // Spectral data of every block. Eigenvalues below rank_one_tol times the
  // largest one anywhere are solver residue: such a block counts as switched
  // off, and such a second eigenvalue does not break rank one.
  std::vector<Eigen::MatrixXcd> factors(N);
  std::vector<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>> eigs(N);
  Directions principal(N);
  double total_trace = 0.0;
  double largest = 0.0;
  for (int n = 0; n < N; ++n) {
    total_trace += sdr.blocks[n].trace().real();
    eigs[n].compute(sdr.blocks[n]);
    largest = std::max(largest, eigs[n].eigenvalues().maxCoeff());
  }
  const double residue = opts.rank_one_tol * largest;
  bool rank_one = true;
  for (int n = 0; n < N; ++n) {
    const int m = channel.antennas(n);
    const Eigen::VectorXd lambda = eigs[n].eigenvalues().cwiseMax(0.0);
    const double l1 = lambda[m - 1];
    const double l2 = m > 1 ? lambda[m - 2] : 0.0;
    const bool zero_block = l1 <= residue;
    if (!zero_block && l2 > opts.rank_one_tol * l1 && l2 > residue) rank_one = false;
    principal[n] = zero_block ? fallback[n] : ComplexVector(eigs[n].eigenvectors().col(m - 1));
    factors[n] = eigs[n].eigenvectors() * lambda.cwiseSqrt().asDiagonal();
  }

  consider(principal);
  if (rank_one && best.feasible) {
    out.method = Extraction::rank1_exact;
    return finish();
  }

  out.method = Extraction::randomized;
  Directions dirs(N);
  for (int j = 0; j < opts.n_rand; ++j) {
    for (int n = 0; n < N; ++n) {
      const int m = channel.antennas(n);
      ComplexVector v(m);
      for (int i = 0; i < m; ++i) v[i] = complex_gaussian(rng);
      ComplexVector xi = factors[n] * v;
      const double norm = xi.norm();
      dirs[n] = norm > 1e-12 * std::sqrt(std::max(total_trace, 1e-300)) ? ComplexVector(xi / norm) : fallback[n];
    }
    consider(dirs);
  }
  return finish();
}

}  // namespace dasee::beam
