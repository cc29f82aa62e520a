#pragma once

// Small dense complex-Hermitian semidefinite programs
//
//   minimize   sum_n tr(C_n W_n)
//   subject to sum_n tr(A_{n,j} W_n)  (>= or <=)  b_j,   W_n >= 0 (PSD)
//
// Each Hermitian block is mapped to the real symmetric embedding
// [[Re, -Im], [Im, Re]] and the real problem is solved with an
// infeasible-start primal-dual interior-point method (HKM direction,
// Mehrotra predictor-corrector). Inequalities get slack variables in a
// nonnegative-orthant block.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dasee/conic/status.hpp"

namespace dasee::conic {

enum class Sense { greater_equal, less_equal };

struct SdpConstraint {
  // One coefficient per block; a 0x0 matrix means the block does not appear.
  std::vector<Eigen::MatrixXcd> coefficients;
  Sense sense = Sense::greater_equal;
  double rhs = 0.0;
};

struct SdpProblem {
  std::vector<int> block_sizes;
  std::vector<Eigen::MatrixXcd> objective;  // C_n, one per block
  std::vector<SdpConstraint> constraints;
};

struct SdpOptions {
  double feas_tol = 1e-7;
  double gap_tol = 1e-7;
  int max_iters = 100;
  // Primal infeasibility is certified once ||A^T y + Z|| / (b.y) drops below this.
  double infeasibility_tol = 1e-8;
};

struct SdpSolution {
  SolveCode status = SolveCode::numerical_failure;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<Eigen::MatrixXcd> blocks;
  double residual = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

namespace detail {

inline Eigen::MatrixXd real_embedding(const Eigen::MatrixXcd& a) {
  const Eigen::Index m = a.rows();
  Eigen::MatrixXd e(2 * m, 2 * m);
  e.topLeftCorner(m, m) = a.real();
  e.topRightCorner(m, m) = -a.imag();
  e.bottomLeftCorner(m, m) = a.imag();
  e.bottomRightCorner(m, m) = a.real();
  return e;
}

// Inverse of the embedding after projecting onto the structured subspace.
inline Eigen::MatrixXcd complex_from_embedding(const Eigen::MatrixXd& x) {
  const Eigen::Index m = x.rows() / 2;
  const Eigen::MatrixXd re = 0.5 * (x.topLeftCorner(m, m) + x.bottomRightCorner(m, m));
  const Eigen::MatrixXd im = 0.5 * (x.bottomLeftCorner(m, m) - x.topRightCorner(m, m));
  Eigen::MatrixXcd w(m, m);
  w.real() = re;
  w.imag() = im;
  return 0.5 * (w + w.adjoint()).eval();
}

inline bool is_hermitian(const Eigen::MatrixXcd& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + a.cwiseAbs().maxCoeff());
}

// Largest alpha with X + alpha dX still PSD (infinity if unbounded).
inline double max_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dx) {
  Eigen::LLT<Eigen::MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  Eigen::MatrixXd s = llt.matrixL().solve(dx);
  s = llt.matrixL().solve(s.transpose()).transpose();
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

inline double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (dx[i] < 0.0) alpha = std::min(alpha, -x[i] / dx[i]);
  return alpha;
}

inline Eigen::MatrixXd sym(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Real standard form: min <C,X>  s.t. <A_i,X> + sign_i s_i = b_i, X PSD, s >= 0.
class RealSdp {
 public:
  std::vector<Eigen::MatrixXd> c;
  std::vector<std::vector<Eigen::MatrixXd>> a;  // a[i][j], empty when absent
  Eigen::VectorXd sign;
  Eigen::VectorXd b;

  int num_rows() const { return static_cast<int>(b.size()); }
  int num_blocks() const { return static_cast<int>(c.size()); }

  Eigen::VectorXd apply(const std::vector<Eigen::MatrixXd>& x, const Eigen::VectorXd& s) const {
    Eigen::VectorXd out(num_rows());
    for (int i = 0; i < num_rows(); ++i) {
      double v = sign[i] * s[i];
      for (int j = 0; j < num_blocks(); ++j)
        if (a[i][j].size() > 0) v += a[i][j].cwiseProduct(x[j]).sum();
      out[i] = v;
    }
    return out;
  }

  std::vector<Eigen::MatrixXd> adjoint(const Eigen::VectorXd& y) const {
    std::vector<Eigen::MatrixXd> out(num_blocks());
    for (int j = 0; j < num_blocks(); ++j) out[j] = Eigen::MatrixXd::Zero(c[j].rows(), c[j].cols());
    for (int i = 0; i < num_rows(); ++i)
      for (int j = 0; j < num_blocks(); ++j)
        if (a[i][j].size() > 0) out[j] += y[i] * a[i][j];
    return out;
  }
};

struct IpmResult {
  SolveCode status = SolveCode::numerical_failure;
  std::vector<Eigen::MatrixXd> x;
  double primal_residual = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

inline IpmResult interior_point(const RealSdp& p, const SdpOptions& opts) {
  const int m = p.num_rows();
  const int nb = p.num_blocks();
  int dim = m;
  for (const auto& cj : p.c) dim += static_cast<int>(cj.rows());

  double c_norm2 = 0.0;
  for (const auto& cj : p.c) c_norm2 += cj.squaredNorm();
  const double c_norm = std::sqrt(c_norm2);
  const double b_norm = p.b.norm();

  // Starting point scaled to the data.
  std::vector<Eigen::MatrixXd> X(nb), Z(nb);
  for (int j = 0; j < nb; ++j) {
    const double n = static_cast<double>(p.c[j].rows());
    double xi = std::max(10.0, std::sqrt(n));
    double eta = std::max({10.0, std::sqrt(n), p.c[j].norm()});
    for (int i = 0; i < m; ++i) {
      if (p.a[i][j].size() == 0) continue;
      const double an = p.a[i][j].norm();
      xi = std::max(xi, n * (1.0 + std::abs(p.b[i])) / (1.0 + an));
      eta = std::max(eta, an);
    }
    X[j] = xi * Eigen::MatrixXd::Identity(p.c[j].rows(), p.c[j].rows());
    Z[j] = eta * Eigen::MatrixXd::Identity(p.c[j].rows(), p.c[j].rows());
  }
  double xi_l = std::max(10.0, std::sqrt(double(m)));
  for (int i = 0; i < m; ++i) xi_l = std::max(xi_l, m * (1.0 + std::abs(p.b[i])) / 2.0);
  Eigen::VectorXd xs = Eigen::VectorXd::Constant(m, xi_l);
  Eigen::VectorXd zs = Eigen::VectorXd::Constant(m, std::max(10.0, std::sqrt(double(m))));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  IpmResult res;
  for (int it = 0; it <= opts.max_iters; ++it) {
    res.iterations = it;
    const Eigen::VectorXd rp = p.b - p.apply(X, xs);
    const auto aty = p.adjoint(y);
    std::vector<Eigen::MatrixXd> Rd(nb);
    double rd_norm2 = 0.0;
    double cert2 = 0.0;  // ||A^T y + Z||^2
    double xz = xs.dot(zs);
    double pobj = 0.0;
    for (int j = 0; j < nb; ++j) {
      Rd[j] = p.c[j] - aty[j] - Z[j];
      rd_norm2 += Rd[j].squaredNorm();
      cert2 += (aty[j] + Z[j]).squaredNorm();
      xz += X[j].cwiseProduct(Z[j]).sum();
      pobj += p.c[j].cwiseProduct(X[j]).sum();
    }
    const Eigen::VectorXd rds = -p.sign.cwiseProduct(y) - zs;
    rd_norm2 += rds.squaredNorm();
    cert2 += (p.sign.cwiseProduct(y) + zs).squaredNorm();
    const double dobj = p.b.dot(y);
    const double mu = xz / dim;

    res.primal_residual = rp.norm() / (1.0 + b_norm);
    const double dual_res = std::sqrt(rd_norm2) / (1.0 + c_norm);
    res.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (res.primal_residual <= opts.feas_tol && dual_res <= opts.feas_tol && res.gap <= opts.gap_tol) {
      res.status = SolveCode::optimal;
      res.x = X;
      return res;
    }
    if (dobj > 0.0 && std::sqrt(cert2) / dobj < opts.infeasibility_tol) {
      res.status = SolveCode::infeasible;
      return res;
    }
    if (it == opts.max_iters) break;

    // Schur complement M_ik = sum_j <A_kj, X_j A_ij Z_j^-1> + x_i / z_i delta_ik.
    std::vector<Eigen::MatrixXd> Zinv(nb);
    for (int j = 0; j < nb; ++j) {
      Eigen::LLT<Eigen::MatrixXd> llt(Z[j]);
      if (llt.info() != Eigen::Success) {
        res.status = SolveCode::numerical_failure;
        return res;
      }
      Zinv[j] = llt.solve(Eigen::MatrixXd::Identity(Z[j].rows(), Z[j].cols()));
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < nb; ++j) {
      std::vector<Eigen::MatrixXd> G(m);
      for (int i = 0; i < m; ++i)
        if (p.a[i][j].size() > 0) G[i] = X[j] * p.a[i][j] * Zinv[j];
      for (int i = 0; i < m; ++i) {
        if (G[i].size() == 0) continue;
        for (int k = i; k < m; ++k) {
          if (p.a[k][j].size() == 0) continue;
          const double v = p.a[k][j].cwiseProduct(G[i].transpose()).sum();
          M(i, k) += v;
          if (k != i) M(k, i) += v;
        }
      }
    }
    for (int i = 0; i < m; ++i) M(i, i) += xs[i] / zs[i];
    Eigen::LLT<Eigen::MatrixXd> schur(M);
    if (schur.info() != Eigen::Success) {
      M.diagonal().array() += 1e-14 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
      schur.compute(M);
      if (schur.info() != Eigen::Success) {
        res.status = SolveCode::numerical_failure;
        return res;
      }
    }

    // Fixed parts of the right-hand side: rp + A(X Rd Z^-1).
    std::vector<Eigen::MatrixXd> xrdz(nb);
    for (int j = 0; j < nb; ++j) xrdz[j] = X[j] * Rd[j] * Zinv[j];
    const Eigen::VectorXd base = rp + p.apply(xrdz, xs.cwiseProduct(rds).cwiseQuotient(zs));

    struct Step {
      std::vector<Eigen::MatrixXd> dX, dZ;
      Eigen::VectorXd dxs, dzs, dy;
    };
    // rz[j] = R_j Z_j^-1 and rs = r / z, with R the complementarity target.
    auto direction = [&](const std::vector<Eigen::MatrixXd>& rz, const Eigen::VectorXd& rs) {
      Step s;
      s.dy = schur.solve(base - p.apply(rz, rs));
      const auto atdy = p.adjoint(s.dy);
      s.dX.resize(nb);
      s.dZ.resize(nb);
      for (int j = 0; j < nb; ++j) {
        s.dZ[j] = Rd[j] - atdy[j];
        s.dX[j] = sym(rz[j] - X[j] * s.dZ[j] * Zinv[j]);
      }
      s.dzs = rds - p.sign.cwiseProduct(s.dy);
      s.dxs = rs - xs.cwiseProduct(s.dzs).cwiseQuotient(zs);
      return s;
    };
    auto step_lengths = [&](const Step& s) {
      double ap = max_step(xs, s.dxs);
      double ad = max_step(zs, s.dzs);
      for (int j = 0; j < nb; ++j) {
        ap = std::min(ap, max_step(X[j], s.dX[j]));
        ad = std::min(ad, max_step(Z[j], s.dZ[j]));
      }
      return std::pair{ap, ad};
    };

    // Predictor (sigma = 0): R = -XZ, so R Z^-1 = -X.
    std::vector<Eigen::MatrixXd> rz(nb);
    for (int j = 0; j < nb; ++j) rz[j] = -X[j];
    const Step aff = direction(rz, -xs);
    auto [ap_aff, ad_aff] = step_lengths(aff);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double mu_aff = (xs + ap_aff * aff.dxs).dot(zs + ad_aff * aff.dzs);
    for (int j = 0; j < nb; ++j)
      mu_aff += (X[j] + ap_aff * aff.dX[j]).cwiseProduct(Z[j] + ad_aff * aff.dZ[j]).sum();
    mu_aff /= dim;
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector: R = sigma mu I - XZ - dXa dZa.
    for (int j = 0; j < nb; ++j) rz[j] = sigma * mu * Zinv[j] - X[j] - aff.dX[j] * aff.dZ[j] * Zinv[j];
    const Eigen::VectorXd rs =
        (Eigen::VectorXd::Constant(m, sigma * mu) - aff.dxs.cwiseProduct(aff.dzs)).cwiseQuotient(zs) - xs;
    const Step cor = direction(rz, rs);
    auto [ap, ad] = step_lengths(cor);
    const double tau = 0.95;
    ap = std::min(1.0, tau * ap);
    ad = std::min(1.0, tau * ad);
    for (int j = 0; j < nb; ++j) {
      X[j] = sym(X[j] + ap * cor.dX[j]);
      Z[j] = sym(Z[j] + ad * cor.dZ[j]);
    }
    xs += ap * cor.dxs;
    zs += ad * cor.dzs;
    y += ad * cor.dy;
  }
  res.status = SolveCode::numerical_failure;
  res.x = X;
  return res;
}

}  // namespace detail

inline SdpSolution solve_sdp(const SdpProblem& sdp, const SdpOptions& opts = {}) {
  const int nb = static_cast<int>(sdp.block_sizes.size());
  if (static_cast<int>(sdp.objective.size()) != nb) throw std::invalid_argument("solve_sdp: one objective block per variable");
  for (int j = 0; j < nb; ++j) {
    if (sdp.objective[j].rows() != sdp.block_sizes[j] || !detail::is_hermitian(sdp.objective[j]))
      throw std::invalid_argument("solve_sdp: objective blocks must be Hermitian and sized to their variable");
  }
  for (const auto& con : sdp.constraints) {
    if (static_cast<int>(con.coefficients.size()) != nb) throw std::invalid_argument("solve_sdp: one coefficient per block");
    for (int j = 0; j < nb; ++j) {
      const auto& a = con.coefficients[j];
      if (a.size() == 0) continue;
      if (a.rows() != sdp.block_sizes[j] || a.cols() != sdp.block_sizes[j] || !detail::is_hermitian(a))
        throw std::invalid_argument("solve_sdp: coefficient blocks must be Hermitian and sized to their variable");
    }
  }

  SdpSolution out;
  out.blocks.resize(nb);
  for (int j = 0; j < nb; ++j) out.blocks[j] = Eigen::MatrixXcd::Zero(sdp.block_sizes[j], sdp.block_sizes[j]);

  // Half the embedding keeps traces in complex units: tr(A W) = <E(A)/2, E(W)>.
  detail::RealSdp real;
  std::vector<double> row_norm;
  std::vector<int> kept;
  for (std::size_t i = 0; i < sdp.constraints.size(); ++i) {
    const auto& con = sdp.constraints[i];
    std::vector<Eigen::MatrixXd> row(nb);
    double norm2 = 0.0;
    for (int j = 0; j < nb; ++j) {
      if (con.coefficients[j].size() == 0) continue;
      row[j] = 0.5 * detail::real_embedding(con.coefficients[j]);
      norm2 += row[j].squaredNorm();
      if (row[j].squaredNorm() == 0.0) row[j].resize(0, 0);
    }
    const double s = con.sense == Sense::greater_equal ? 1.0 : -1.0;
    if (norm2 == 0.0) {
      // 0 >= b or 0 <= b.
      if (s * con.rhs > 0.0) {
        out.status = SolveCode::infeasible;
        return out;
      }
      continue;
    }
    const double d = std::sqrt(norm2);
    for (auto& r : row)
      if (r.size() > 0) r /= d;
    real.a.push_back(std::move(row));
    row_norm.push_back(d);
    kept.push_back(static_cast<int>(i));
  }
  const int m = static_cast<int>(kept.size());
  real.b.resize(m);
  real.sign.resize(m);
  double var_scale = 0.0;
  for (int r = 0; r < m; ++r) {
    const auto& con = sdp.constraints[kept[r]];
    real.b[r] = con.rhs / row_norm[r];
    real.sign[r] = con.sense == Sense::greater_equal ? -1.0 : 1.0;
    var_scale = std::max(var_scale, std::abs(real.b[r]));
  }
  if (var_scale == 0.0) var_scale = 1.0;
  real.b /= var_scale;

  double obj_scale = 0.0;
  real.c.resize(nb);
  for (int j = 0; j < nb; ++j) {
    real.c[j] = 0.5 * detail::real_embedding(sdp.objective[j]);
    obj_scale = std::max(obj_scale, real.c[j].norm());
  }
  if (obj_scale == 0.0) obj_scale = 1.0;
  for (auto& cj : real.c) cj /= obj_scale;

  // Unconstrained problem: W = 0 is optimal when C is PSD; anything else is
  // outside what this module supports.
  if (m == 0) {
    for (int j = 0; j < nb; ++j) {
      const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(sdp.objective[j]).eigenvalues().minCoeff();
      if (lmin < 0.0) return out;
    }
    out.status = SolveCode::optimal;
    out.objective = 0.0;
    out.residual = 0.0;
    out.gap = 0.0;
    return out;
  }

  const auto ipm = detail::interior_point(real, opts);
  out.status = ipm.status;
  out.iterations = ipm.iterations;
  out.residual = ipm.primal_residual;
  out.gap = ipm.gap;
  if (ipm.status != SolveCode::optimal) return out;

  double objective = 0.0;
  for (int j = 0; j < nb; ++j) {
    out.blocks[j] = var_scale * detail::complex_from_embedding(ipm.x[j]);
    objective += (sdp.objective[j] * out.blocks[j]).trace().real();
  }
  out.objective = objective;
  return out;
}

}  // namespace dasee::conic
