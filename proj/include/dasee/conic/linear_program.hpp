#pragma once

// Small dense linear programs
//
//   minimize c.x  subject to  A x >= b,  0 <= x <= u   (u_j may be +inf)
//
// solved with a two-phase tableau simplex. Rows are equilibrated before the
// solve; reported values are in the caller's units.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dasee/conic/status.hpp"

namespace dasee::conic {

struct LinearProgram {
  Eigen::VectorXd objective;  // c, length V
  Eigen::MatrixXd rows;       // A, m x V
  Eigen::VectorXd rhs;        // b, length m
  Eigen::VectorXd upper;      // u, length V; +inf allowed

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }
};

struct LpOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_pivots = 5000;
};

struct LpSolution {
  SolveCode status = SolveCode::numerical_failure;
  double objective = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd x;
  double residual = std::numeric_limits<double>::infinity();  // max relative constraint violation
  double gap = std::numeric_limits<double>::infinity();       // relative primal-dual gap
  int pivots = 0;
};

namespace detail {

// Dense tableau for  min c.x  s.t.  T x = rhs, x >= 0  with a known feasible
// starting basis. Row-major; column `cols` holds the right-hand side.
class Tableau {
 public:
  Tableau(int rows, int cols) : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows, -1) {}

  double& at(int r, int c) { return data_[r * (cols_ + 1) + c]; }
  double at(int r, int c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(int r) { return at(r, cols_); }
  double& cost(int c) { return at(rows_, c); }  // reduced-cost row
  double& value() { return at(rows_, cols_); }  // -objective
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::vector<int>& basis() { return basis_; }

  void pivot(int r, int c) {
    const int width = cols_ + 1;
    double* prow = &data_[r * width];
    const double inv = 1.0 / prow[c];
    for (int j = 0; j < width; ++j) prow[j] *= inv;
    prow[c] = 1.0;
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      double* row = &data_[i * width];
      const double factor = row[c];
      if (factor == 0.0) continue;
      for (int j = 0; j < width; ++j) row[j] -= factor * prow[j];
      row[c] = 0.0;
    }
    basis_[r] = c;
  }

  // Price out the basis so the cost row holds reduced costs.
  void price_out(const std::vector<double>& costs) {
    for (int c = 0; c < cols_; ++c) cost(c) = costs[c];
    value() = 0.0;
    for (int r = 0; r < rows_; ++r) {
      const double cb = costs[basis_[r]];
      if (cb == 0.0) continue;
      for (int c = 0; c <= cols_; ++c) at(rows_, c) -= cb * at(r, c);
    }
  }

  // Returns false when the pivot budget is exhausted or the LP is unbounded.
  bool optimize(const std::vector<char>& allowed, int& pivots, int max_pivots, bool& unbounded) {
    constexpr double kCostTol = 1e-11;
    constexpr double kPivotTol = 1e-11;
    int degenerate_streak = 0;
    unbounded = false;
    while (true) {
      const bool bland = degenerate_streak > 2 * (rows_ + cols_);
      int enter = -1;
      double best = -kCostTol;
      for (int c = 0; c < cols_; ++c) {
        if (!allowed[c]) continue;
        const double rc = cost(c);
        if (rc < best) {
          enter = c;
          if (bland) break;
          best = rc;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= kPivotTol) continue;
        const double q = rhs(r) / a;
        if (q < ratio - 1e-14 || (q <= ratio + 1e-14 && leave >= 0 && basis_[r] < basis_[leave])) {
          ratio = q;
          leave = r;
        }
      }
      if (leave < 0) {
        unbounded = true;
        return false;
      }
      degenerate_streak = ratio <= 1e-14 ? degenerate_streak + 1 : 0;
      pivot(leave, enter);
      if (++pivots > max_pivots) return false;
    }
  }

 private:
  int rows_;
  int cols_;
  std::vector<double> data_;
  std::vector<int> basis_;
};

}  // namespace detail

inline LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opts = {}) {
  const int V = lp.num_vars();
  const int m = lp.num_rows();
  LpSolution out;
  out.x = Eigen::VectorXd::Zero(V);

  // Equilibrate rows; an all-zero row is either void or infeasible.
  std::vector<int> live;
  std::vector<double> row_scale;
  for (int i = 0; i < m; ++i) {
    const double s = lp.rows.row(i).cwiseAbs().maxCoeff();
    if (s == 0.0) {
      if (lp.rhs[i] > opts.feas_tol * (1.0 + std::abs(lp.rhs[i]))) {
        out.status = SolveCode::infeasible;
        return out;
      }
      continue;
    }
    live.push_back(i);
    row_scale.push_back(1.0 / s);
  }
  std::vector<int> bounded;
  for (int j = 0; j < V; ++j) {
    if (lp.upper[j] < 0.0) {
      out.status = SolveCode::infeasible;
      return out;
    }
    if (std::isfinite(lp.upper[j])) bounded.push_back(j);
  }

  const int mr = static_cast<int>(live.size());
  const int mb = static_cast<int>(bounded.size());
  const int rows = mr + mb;
  // Columns: x (V) | surplus (mr) | bound slack (mb) | artificials (<= mr)
  const int surplus0 = V;
  const int slack0 = V + mr;
  const int art0 = V + mr + mb;
  std::vector<int> art_row;
  for (int r = 0; r < mr; ++r)
    if (lp.rhs[live[r]] * row_scale[r] >= 0.0) art_row.push_back(r);
  const int na = static_cast<int>(art_row.size());
  const int cols = art0 + na;

  detail::Tableau tab(rows, cols);
  std::vector<double> sign(mr, 1.0);
  {
    int a = 0;
    for (int r = 0; r < mr; ++r) {
      const double s = row_scale[r];
      const double b = lp.rhs[live[r]] * s;
      // Row: A x - surplus = b, flipped when b < 0 so the surplus is basic.
      const double sg = b >= 0.0 ? 1.0 : -1.0;
      sign[r] = sg;
      for (int j = 0; j < V; ++j) tab.at(r, j) = sg * lp.rows(live[r], j) * s;
      tab.at(r, surplus0 + r) = -sg;
      tab.rhs(r) = sg * b;
      if (sg > 0.0) {
        tab.at(r, art0 + a) = 1.0;
        tab.basis()[r] = art0 + a;
        ++a;
      } else {
        tab.basis()[r] = surplus0 + r;
      }
    }
    for (int q = 0; q < mb; ++q) {
      const int r = mr + q;
      tab.at(r, bounded[q]) = 1.0;
      tab.at(r, slack0 + q) = 1.0;
      tab.rhs(r) = lp.upper[bounded[q]];
      tab.basis()[r] = slack0 + q;
    }
  }

  std::vector<char> allowed(cols, 1);
  bool unbounded = false;
  if (na > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (int a = 0; a < na; ++a) phase1[art0 + a] = 1.0;
    tab.price_out(phase1);
    if (!tab.optimize(allowed, out.pivots, opts.max_pivots, unbounded)) {
      out.status = SolveCode::numerical_failure;
      return out;
    }
    double bsum = 1.0;
    for (int r = 0; r < rows; ++r) bsum += std::abs(tab.rhs(r));
    if (-tab.value() > opts.feas_tol * bsum) {
      out.status = SolveCode::infeasible;
      return out;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (int r = 0; r < rows; ++r) {
      if (tab.basis()[r] < art0) continue;
      int best = -1;
      double mag = 1e-9;
      for (int c = 0; c < art0; ++c)
        if (std::abs(tab.at(r, c)) > mag) {
          mag = std::abs(tab.at(r, c));
          best = c;
        }
      if (best >= 0) tab.pivot(r, best);
    }
    for (int a = 0; a < na; ++a) allowed[art0 + a] = 0;
  }

  std::vector<double> phase2(cols, 0.0);
  for (int j = 0; j < V; ++j) phase2[j] = lp.objective[j];
  tab.price_out(phase2);
  if (!tab.optimize(allowed, out.pivots, opts.max_pivots, unbounded)) {
    out.status = SolveCode::numerical_failure;
    return out;
  }

  for (int r = 0; r < rows; ++r) {
    const int c = tab.basis()[r];
    if (c < V) out.x[c] = tab.rhs(r);
  }
  for (int j = 0; j < V; ++j) out.x[j] = std::clamp(out.x[j], 0.0, lp.upper[j]);
  out.objective = lp.objective.dot(out.x);

  // Dual prices from the reduced costs of the slack columns: y_i for rows,
  // w_j for finite upper bounds. Dual objective is b.y - u.w.
  double dual = 0.0;
  for (int r = 0; r < mr; ++r) {
    const double y = tab.cost(surplus0 + r) * row_scale[r];
    dual += std::max(y, 0.0) * lp.rhs[live[r]];
  }
  for (int q = 0; q < mb; ++q) {
    const double w = tab.cost(slack0 + q);
    dual -= std::max(w, 0.0) * lp.upper[bounded[q]];
  }
  out.gap = std::abs(out.objective - dual) / (1.0 + std::abs(out.objective));

  double residual = 0.0;
  for (int r = 0; r < mr; ++r) {
    const int i = live[r];
    const double lhs = lp.rows.row(i).dot(out.x);
    residual = std::max(residual, (lp.rhs[i] - lhs) * row_scale[r] / (1.0 + std::abs(lp.rhs[i] * row_scale[r])));
  }
  out.residual = residual;
  out.status = (residual <= opts.feas_tol && out.gap <= opts.gap_tol) ? SolveCode::optimal : SolveCode::numerical_failure;
  return out;
}

}  // namespace dasee::conic
