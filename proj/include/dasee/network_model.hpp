#pragma once

// System geometry, channel generation and the closed-form link metrics of a
// multicast distributed antenna system (DAS).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dasee/random.hpp"
#include "dasee/units.hpp"

namespace dasee {

using ComplexVector = Eigen::VectorXcd;
using Directions = std::vector<ComplexVector>;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct PathLossModel {
  double intercept_db = 38.46;
  double slope_db_per_decade = 35.0;
};

struct SystemConfig {
  int num_raus = 4;
  int num_users = 6;
  std::vector<int> antennas{4, 4, 4, 4};  // M_n per RAU
  double cell_radius = 1000.0;            // m
  double min_access_distance = 20.0;      // m
  double rate_min = 0.0;                  // bits/s/Hz
  double noise_power = dbm_to_watts(-101.0);
  PathLossModel path_loss;
  double shadowing_std_db = 8.0;

  int total_antennas() const {
    int total = 0;
    for (int m : antennas) total += m;
    return total;
  }

  void validate() const {
    if (num_raus < 1) throw std::invalid_argument("SystemConfig: N must be >= 1");
    if (num_users < 1) throw std::invalid_argument("SystemConfig: K must be >= 1");
    if (static_cast<int>(antennas.size()) != num_raus)
      throw std::invalid_argument("SystemConfig: antenna list length must equal N");
    for (int m : antennas)
      if (m < 1) throw std::invalid_argument("SystemConfig: every M_n must be >= 1");
    if (!(min_access_distance > 0.0) || !(cell_radius > min_access_distance))
      throw std::invalid_argument("SystemConfig: need cell_radius > min_access_distance > 0");
    if (!(rate_min >= 0.0)) throw std::invalid_argument("SystemConfig: R_min must be >= 0");
    if (!(noise_power > 0.0)) throw std::invalid_argument("SystemConfig: noise power must be > 0");
    if (!(shadowing_std_db >= 0.0)) throw std::invalid_argument("SystemConfig: shadowing std must be >= 0");
  }
};

/// Which static term enters the power-allocation objective. `full` uses
/// P_C + N*P_bh like the total power; `p2_literal` drops the backhaul term.
enum class EeDenominator { full, p2_literal };

struct PowerModel {
  double p_c = dbm_to_watts(29.0);   // per antenna
  double p_0 = dbm_to_watts(30.0);   // per RAU
  double p_bh = 0.0;                 // per backhaul link
  Eigen::VectorXd p_max;             // per RAU budget
  // Replaces sum_n M_n p_c + N p_0 when set (centralized system bookkeeping).
  std::optional<double> circuit_override;
  // Number of backhaul links charged; defaults to N when unset.
  std::optional<int> backhaul_links;

  void validate(const SystemConfig& config) const {
    if (p_max.size() != config.num_raus) throw std::invalid_argument("PowerModel: P_max length must equal N");
    if (!(p_c >= 0.0) || !(p_0 >= 0.0) || !(p_bh >= 0.0) || (p_max.array() < 0.0).any())
      throw std::invalid_argument("PowerModel: all powers must be >= 0");
    if (circuit_override && !(*circuit_override >= 0.0))
      throw std::invalid_argument("PowerModel: circuit override must be >= 0");
  }
};

inline double circuit_power(const SystemConfig& config, const PowerModel& pm) {
  if (pm.circuit_override) return *pm.circuit_override;
  return config.total_antennas() * pm.p_c + config.num_raus * pm.p_0;
}

/// P_C + N * P_bh.
inline double static_power(const SystemConfig& config, const PowerModel& pm) {
  const int links = pm.backhaul_links.value_or(config.num_raus);
  return circuit_power(config, pm) + links * pm.p_bh;
}

inline double p2_static_power(const SystemConfig& config, const PowerModel& pm, EeDenominator mode) {
  return mode == EeDenominator::full ? static_power(config, pm) : circuit_power(config, pm);
}

struct ChannelRealization {
  // h[n][k] is the M_n-vector from RAU n to user k.
  std::vector<std::vector<ComplexVector>> h;
  Eigen::VectorXd sigma2;

  int num_raus() const { return static_cast<int>(h.size()); }
  int num_users() const { return static_cast<int>(sigma2.size()); }
  int antennas(int n) const { return static_cast<int>(h[n].front().size()); }

  void validate() const {
    if (h.empty() || sigma2.size() == 0) throw std::invalid_argument("ChannelRealization: empty");
    for (const auto& row : h) {
      if (static_cast<int>(row.size()) != num_users())
        throw std::invalid_argument("ChannelRealization: every RAU needs K channel vectors");
      for (const auto& v : row)
        if (v.size() != row.front().size() || v.size() == 0)
          throw std::invalid_argument("ChannelRealization: inconsistent antenna count");
    }
    if ((sigma2.array() <= 0.0).any()) throw std::invalid_argument("ChannelRealization: noise powers must be > 0");
  }
};

/// Per-RAU beam directions (unit norm) and powers; w_n = sqrt(p_n) * dir_n.
struct BeamState {
  Directions directions;
  Eigen::VectorXd powers;

  Directions beamformers() const {
    Directions w(directions.size());
    for (std::size_t n = 0; n < directions.size(); ++n) w[n] = std::sqrt(powers[n]) * directions[n];
    return w;
  }

  static BeamState from_beamformers(const Directions& w, const Directions& fallback) {
    BeamState state;
    state.directions.resize(w.size());
    state.powers.resize(static_cast<Eigen::Index>(w.size()));
    for (std::size_t n = 0; n < w.size(); ++n) {
      const double norm = w[n].norm();
      state.powers[n] = norm * norm;
      state.directions[n] = norm > 0.0 ? ComplexVector(w[n] / norm) : fallback[n];
    }
    return state;
  }
};

struct Metrics {
  Eigen::VectorXd sinr;
  double rate = 0.0;
  double total_power = 0.0;
  double ee = 0.0;
};

// ---------------------------------------------------------------------------
// Geometry

/// RAU n (0-based) sits at angle 2*pi*n/N on a ring of radius
/// r = 2 R sin(pi/N) / (3 pi / N).
inline std::vector<Point> place_raus(int num_raus, double cell_radius) {
  if (num_raus < 1 || !(cell_radius > 0.0)) throw std::domain_error("place_raus: need N >= 1 and radius > 0");
  const double pi = std::numbers::pi;
  const double n = num_raus;
  // sin(pi) is not exactly zero in floating point; N = 1 is the centre.
  const double ring = num_raus == 1 ? 0.0 : 2.0 * cell_radius * std::sin(pi / n) / (3.0 * pi / n);
  std::vector<Point> sites(num_raus);
  for (int i = 0; i < num_raus; ++i) {
    const double angle = 2.0 * pi * i / n;
    sites[i] = {ring * std::cos(angle), ring * std::sin(angle)};
  }
  return sites;
}

inline double path_loss_db(double d, const PathLossModel& model = {}) {
  if (!(d > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
  return model.intercept_db + model.slope_db_per_decade * std::log10(d);
}

/// Users uniform in the disc, re-drawn until they keep min_access_distance to
/// every site in `keep_away`. Throws when the admissible region looks empty.
inline std::vector<Point> sample_users(const SystemConfig& config, std::span<const Point> keep_away, Rng& rng,
                                       long max_draws_per_user = 1000000) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> users;
  users.reserve(config.num_users);
  long draws = 0;
  while (static_cast<int>(users.size()) < config.num_users) {
    if (++draws > max_draws_per_user * config.num_users)
      throw std::domain_error("sample_users: no admissible position found");
    const double r = config.cell_radius * std::sqrt(unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const Point p{r * std::cos(theta), r * std::sin(theta)};
    const bool ok = std::all_of(keep_away.begin(), keep_away.end(), [&](const Point& s) {
      return distance(p, s) >= config.min_access_distance;
    });
    if (ok) users.push_back(p);
  }
  return users;
}

/// h_{n,k} = sqrt(alpha_{n,k} S_{n,k}) * h~_{n,k} with log-normal shadowing and
/// i.i.d. CN(0,1) small-scale fading. Draw order: for n, for k: shadowing,
/// then the M_n fading entries.
inline ChannelRealization sample_channel(const SystemConfig& config, std::span<const Point> raus,
                                         std::span<const Point> users, Rng& rng) {
  if (static_cast<int>(raus.size()) != config.num_raus || static_cast<int>(users.size()) != config.num_users)
    throw std::domain_error("sample_channel: geometry does not match the configuration");
  std::normal_distribution<double> shadow(0.0, 1.0);
  ChannelRealization ch;
  ch.sigma2 = Eigen::VectorXd::Constant(config.num_users, config.noise_power);
  ch.h.resize(config.num_raus);
  for (int n = 0; n < config.num_raus; ++n) {
    ch.h[n].resize(config.num_users);
    for (int k = 0; k < config.num_users; ++k) {
      const double d = distance(raus[n], users[k]);
      if (d < config.min_access_distance)
        throw std::domain_error("sample_channel: user " + std::to_string(k) + " closer than the minimum distance to RAU " +
                                std::to_string(n));
      const double alpha = db_to_linear(-path_loss_db(d, config.path_loss));
      const double s = db_to_linear(config.shadowing_std_db * shadow(rng));
      const double amplitude = std::sqrt(alpha * s);
      ComplexVector v(config.antennas[n]);
      for (int m = 0; m < config.antennas[n]; ++m) v[m] = amplitude * complex_gaussian(rng);
      ch.h[n][k] = std::move(v);
    }
  }
  return ch;
}

// ---------------------------------------------------------------------------
// Metrics

/// g_{n,k} = |dir_n^H h_{n,k}|^2.
inline Eigen::MatrixXd effective_gains(const ChannelRealization& channel, const Directions& directions) {
  const int N = channel.num_raus();
  const int K = channel.num_users();
  if (static_cast<int>(directions.size()) != N) throw std::domain_error("effective_gains: need one direction per RAU");
  Eigen::MatrixXd g(N, K);
  for (int n = 0; n < N; ++n) {
    if (directions[n].size() != channel.h[n][0].size())
      throw std::domain_error("effective_gains: direction length does not match antenna count");
    for (int k = 0; k < K; ++k) g(n, k) = std::norm(directions[n].dot(channel.h[n][k]));
  }
  return g;
}

inline Eigen::VectorXd sinr(const Eigen::MatrixXd& gains, const Eigen::VectorXd& powers, const Eigen::VectorXd& sigma2) {
  return (gains.transpose() * powers).cwiseQuotient(sigma2);
}

inline Metrics evaluate_metrics(const Eigen::MatrixXd& gains, const Eigen::VectorXd& powers,
                                const Eigen::VectorXd& sigma2, const PowerModel& pm, const SystemConfig& config) {
  Metrics m;
  m.sinr = sinr(gains, powers, sigma2);
  m.rate = std::log2(1.0 + m.sinr.minCoeff());
  m.total_power = powers.sum() + static_power(config, pm);
  m.ee = m.total_power > 0.0 ? m.rate / m.total_power : 0.0;
  return m;
}

inline Metrics evaluate_metrics(const ChannelRealization& channel, const BeamState& state, const PowerModel& pm,
                                const SystemConfig& config) {
  return evaluate_metrics(effective_gains(channel, state.directions), state.powers, channel.sigma2, pm, config);
}

}  // namespace dasee
