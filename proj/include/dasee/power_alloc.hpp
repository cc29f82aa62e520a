#pragma once

// Power allocation for fixed beam directions.
//
// The fractional problem over (t, p) is reduced to a one-dimensional search
// over the common SINR target t of
//
//     EE(t) = log2(1 + t) / (f(t) + P_static),
//
// where f(t) is the minimum total transmit power meeting the target under
// per-RAU budgets (a small LP). f is convex in t, so EE(t) is strictly
// quasi-concave and golden-section search finds its maximiser.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "dasee/conic/linear_program.hpp"

namespace dasee::power {

struct PowerSubproblem {
  Eigen::MatrixXd gains;  // g_{n,k}, N x K
  Eigen::VectorXd sigma2;
  Eigen::VectorXd p_max;
  double rate_min = 0.0;
  double static_power = 0.0;

  int num_raus() const { return static_cast<int>(gains.rows()); }
  int num_users() const { return static_cast<int>(gains.cols()); }

  void validate() const {
    if (sigma2.size() != gains.cols() || p_max.size() != gains.rows())
      throw std::invalid_argument("PowerSubproblem: dimension mismatch");
    if ((gains.array() < 0.0).any() || (sigma2.array() <= 0.0).any() || (p_max.array() < 0.0).any() ||
        !(static_power >= 0.0) || !(rate_min >= 0.0))
      throw std::invalid_argument("PowerSubproblem: data out of domain");
  }
};

struct PowerSolution {
  double t_star = 0.0;
  Eigen::VectorXd powers;
  double ee = 0.0;
  double rate = 0.0;
};

struct TBounds {
  double t_min = 0.0;
  double t_max = 0.0;
};

/// t_min = 2^R_min - 1; t_max is the worst user's SINR with every RAU at full power.
inline TBounds t_bounds(const PowerSubproblem& sub) {
  TBounds b;
  b.t_min = std::exp2(sub.rate_min) - 1.0;
  b.t_max = ((sub.gains.transpose() * sub.p_max).cwiseQuotient(sub.sigma2)).minCoeff();
  return b;
}

struct FValue {
  double value = 0.0;
  Eigen::VectorXd powers;
};

/// f(t): min sum p_n s.t. p_n <= P_n^max and sum_n p_n g_nk / sigma_k^2 >= max(t_min, t).
/// Empty when the target is out of reach of the budgets.
inline std::optional<FValue> eval_f(const PowerSubproblem& sub, double t, const conic::LpOptions& opts = {}) {
  if (!(t >= 0.0)) throw std::domain_error("eval_f: target must be >= 0");
  const int N = sub.num_raus();
  const int K = sub.num_users();
  const double target = std::max(std::exp2(sub.rate_min) - 1.0, t);
  // Powers in units of the largest budget.
  double scale = sub.p_max.maxCoeff();
  if (scale <= 0.0) {
    if (target > 0.0) return std::nullopt;
    return FValue{0.0, Eigen::VectorXd::Zero(N)};
  }
  conic::LinearProgram lp;
  lp.objective = Eigen::VectorXd::Ones(N);
  lp.rows.resize(K, N);
  for (int k = 0; k < K; ++k) lp.rows.row(k) = sub.gains.col(k).transpose() * (scale / sub.sigma2[k]);
  lp.rhs = Eigen::VectorXd::Constant(K, target);
  lp.upper = sub.p_max / scale;
  const auto sol = conic::solve_lp(lp, opts);
  if (sol.status != conic::SolveCode::optimal) return std::nullopt;
  FValue out;
  out.powers = (sol.x * scale).cwiseMin(sub.p_max);
  out.value = out.powers.sum();
  return out;
}

struct GoldenSearchResult {
  double t_star = 0.0;
  int rounds = 0;
};

/// Golden-section search for the maximiser of a unimodal objective on [a, b].
/// Each round probes t1 = a + 0.382 (b - a) and t2 = a + 0.618 (b - a) and keeps
/// [a, t2] when objective(t1) >= objective(t2), else [t1, b]. Stops once
/// b - a < epsilon and returns (t1 + t2) / 2 of the last round.
template <class Objective>
GoldenSearchResult golden_search(Objective&& objective, double a, double b, double epsilon) {
  if (!(a <= b) || !(epsilon > 0.0)) throw std::invalid_argument("golden_search: need a <= b and epsilon > 0");
  GoldenSearchResult res;
  while (true) {
    const double t1 = a + 0.382 * (b - a);
    const double t2 = a + 0.618 * (b - a);
    const double v1 = objective(t1);
    const double v2 = objective(t2);
    ++res.rounds;
    if (v1 > v2 || v1 == v2)
      b = t2;
    else
      a = t1;
    if (b - a < epsilon) {
      res.t_star = 0.5 * (t1 + t2);
      return res;
    }
  }
}

/// EE(t) with an infeasible f(t) mapped to -inf so the bracket moves inward.
inline double p4_objective(const PowerSubproblem& sub, double t) {
  const auto f = eval_f(sub, t);
  if (!f) return -std::numeric_limits<double>::infinity();
  const double denom = f->value + sub.static_power;
  if (denom <= 0.0) return 0.0;
  return std::log2(1.0 + t) / denom;
}

inline std::optional<PowerSolution> solve_p2(const PowerSubproblem& sub, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("solve_p2: epsilon must be > 0");
  const auto [t_min, t_max] = t_bounds(sub);
  if (t_min > t_max) return std::nullopt;
  if (!eval_f(sub, t_min)) return std::nullopt;

  // Brackets narrower than one SINR unit are searched to relative accuracy.
  const double width = t_max - t_min;
  double t = t_min;
  if (width > 0.0) {
    const double tol = std::min(epsilon, epsilon * width);
    t = golden_search([&](double x) { return p4_objective(sub, x); }, t_min, t_max, tol).t_star;
  }
  auto f = eval_f(sub, t);
  if (!f) {
    t = t_min;
    f = eval_f(sub, t);
  }
  PowerSolution out;
  out.t_star = t;
  out.powers = f->powers;
  out.rate = std::log2(1.0 + t);
  const double denom = f->value + sub.static_power;
  out.ee = denom > 0.0 ? out.rate / denom : 0.0;
  return out;
}

}  // namespace dasee::power
