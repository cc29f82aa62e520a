#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "dasee/beamforming.hpp"
#include "oracles.hpp"

using namespace dasee;
using cd = std::complex<double>;

namespace {

ChannelRealization random_channel(Rng& rng, const std::vector<int>& antennas, int K, double scale = 1.0) {
  ChannelRealization ch;
  ch.sigma2 = Eigen::VectorXd::Ones(K);
  for (int m : antennas) {
    std::vector<ComplexVector> row;
    for (int k = 0; k < K; ++k) {
      ComplexVector v(m);
      for (int i = 0; i < m; ++i) v[i] = scale * complex_gaussian(rng);
      row.push_back(v);
    }
    ch.h.push_back(row);
  }
  return ch;
}

double required_target(const ChannelRealization& ch, const Eigen::VectorXd& p_max, double fraction) {
  // A fraction of the Cauchy-Schwarz bound keeps the target reachable.
  double t = std::numeric_limits<double>::infinity();
  for (int k = 0; k < ch.num_users(); ++k) {
    double acc = 0.0;
    for (int n = 0; n < ch.num_raus(); ++n) acc += ch.h[n][k].squaredNorm() * p_max[n];
    t = std::min(t, acc / ch.sigma2[k]);
  }
  return fraction * t;
}

void expect_feasible(const ChannelRealization& ch, const beam::BeamformingResult& r, double t, const Eigen::VectorXd& p_max) {
  ASSERT_EQ(r.status, conic::SolveCode::optimal);
  for (int n = 0; n < ch.num_raus(); ++n) EXPECT_LE(r.beamformers[n].squaredNorm(), p_max[n] + 1e-7);
  for (int k = 0; k < ch.num_users(); ++k) {
    double s = 0.0;
    for (int n = 0; n < ch.num_raus(); ++n) s += std::norm(r.beamformers[n].dot(ch.h[n][k]));
    EXPECT_GE(s / ch.sigma2[k], t - 1e-6);
  }
}

}  // namespace

TEST(BuildSdr, StructuralCounts) {
  Rng rng(1);
  const auto ch = random_channel(rng, {2, 3}, 6);
  const auto sdp = beam::build_sdr(ch, 1.0, Eigen::Vector2d(1, 1));
  EXPECT_EQ(sdp.block_sizes, (std::vector<int>{2, 3}));
  EXPECT_EQ(sdp.constraints.size(), 8u);
  const auto one = beam::build_sdr(random_channel(rng, {2}, 1), 1.0, Eigen::VectorXd::Ones(1));
  EXPECT_EQ(one.block_sizes.size(), 1u);
  EXPECT_EQ(one.constraints.size(), 2u);
  EXPECT_THROW(beam::build_sdr(ch, -1.0, Eigen::Vector2d(1, 1)), std::domain_error);
}

TEST(SolveP3, MatchedFilterExample) {
  ChannelRealization ch;
  ch.sigma2 = Eigen::VectorXd::Ones(1);
  ch.h = {{ComplexVector::Ones(2)}};
  Rng rng(2);
  const auto r = beam::solve_p3(ch, 4.0, Eigen::VectorXd::Constant(1, 3.0), rng);
  expect_feasible(ch, r, 4.0, Eigen::VectorXd::Constant(1, 3.0));
  EXPECT_EQ(r.method, beam::Extraction::rank1_exact);
  EXPECT_NEAR(r.total_power, 2.0, 1e-6);
  const ComplexVector dir = r.beamformers[0] / r.beamformers[0].norm();
  EXPECT_NEAR(std::abs(dir.dot(ComplexVector::Ones(2))) / std::sqrt(2.0), 1.0, 1e-6);
}

TEST(SolveP3, ZeroTargetGivesZeroBeamformers) {
  Rng rng(3);
  const auto ch = random_channel(rng, {2, 2}, 3);
  const auto r = beam::solve_p3(ch, 0.0, Eigen::Vector2d(1, 1), rng);
  ASSERT_EQ(r.status, conic::SolveCode::optimal);
  EXPECT_EQ(r.total_power, 0.0);
  for (const auto& w : r.beamformers) EXPECT_EQ(w.norm(), 0.0);
}

TEST(SolveP3, OverBudgetIsInfeasible) {
  ChannelRealization ch;
  ch.sigma2 = Eigen::VectorXd::Ones(1);
  ch.h = {{ComplexVector::Ones(1)}};
  Rng rng(4);
  const auto r = beam::solve_p3(ch, 5.0, Eigen::VectorXd::Constant(1, 3.0), rng);
  EXPECT_EQ(r.status, conic::SolveCode::infeasible);
}

TEST(SolveP3, SingleUserIsPerRauMatchedFilter) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<int> antennas{1 + trial % 3, 2, 1 + (trial + 1) % 4};
    const auto ch = random_channel(rng, antennas, 1);
    const Eigen::Vector3d p_max(0.5, 1.0, 0.8);
    const double t = required_target(ch, p_max, 0.6);
    const auto r = beam::solve_p3(ch, t, p_max, rng);
    expect_feasible(ch, r, t, p_max);
    EXPECT_EQ(r.method, beam::Extraction::rank1_exact);
    // Closed form: matched filters, strongest RAUs filled first.
    Eigen::MatrixXd g(3, 1);
    for (int n = 0; n < 3; ++n) g(n, 0) = ch.h[n][0].squaredNorm();
    const auto ref = oracle::min_power(g, ch.sigma2, p_max, t);
    ASSERT_TRUE(ref);
    EXPECT_NEAR(r.total_power, *ref, 1e-6 * (1.0 + *ref));
    for (int n = 0; n < 3; ++n) {
      const double norm = r.beamformers[n].norm();
      if (norm < 1e-9) continue;
      EXPECT_NEAR(std::abs(r.beamformers[n].dot(ch.h[n][0])), norm * ch.h[n][0].norm(), 1e-6 * norm * ch.h[n][0].norm());
    }
  }
}

TEST(SolveP3, WithinFivePercentOfSphereGrid) {
  Rng rng(6);
  const std::vector<std::vector<int>> shapes{{2}, {1, 2}, {2, 1}, {1, 1, 1}, {2}};
  for (int trial = 0; trial < 10; ++trial) {
    const auto& antennas = shapes[trial % shapes.size()];
    const int K = 1 + trial % 2;
    const auto ch = random_channel(rng, antennas, K);
    const Eigen::VectorXd p_max = Eigen::VectorXd::Constant(static_cast<int>(antennas.size()), 1.0);
    const double t = required_target(ch, p_max, 0.3);
    beam::P3Options opts;
    opts.n_rand = 200;
    const auto r = beam::solve_p3(ch, t, p_max, rng, opts);
    const auto brute = oracle::brute_force_min_power(ch.h, ch.sigma2, p_max, t);
    if (!brute) {
      EXPECT_NE(r.status, conic::SolveCode::optimal) << "trial " << trial;
      continue;
    }
    expect_feasible(ch, r, t, p_max);
    EXPECT_LE(r.total_power, 1.05 * *brute) << "trial " << trial;
    EXPECT_LE(r.sdr_objective, r.total_power * (1 + 1e-6) + 1e-9);
  }
}

TEST(SolveP3, RelaxationBoundsEveryResult) {
  Rng rng(7);
  for (int trial = 0; trial < 8; ++trial) {
    const auto ch = random_channel(rng, {4, 4, 4, 4}, 6);
    const Eigen::VectorXd p_max = Eigen::VectorXd::Constant(4, 1.0);
    const double t = required_target(ch, p_max, 0.15);
    beam::P3Options opts;
    opts.n_rand = 100;
    const auto r = beam::solve_p3(ch, t, p_max, rng, opts);
    if (r.status != conic::SolveCode::optimal) continue;
    expect_feasible(ch, r, t, p_max);
    EXPECT_LE(r.sdr_objective, r.total_power * (1 + 1e-6));
    EXPECT_GE(r.candidates_tried, 1);
  }
}

TEST(SolveP3, NeverWorseThanIncumbent) {
  Rng rng(8);
  for (int trial = 0; trial < 8; ++trial) {
    const auto ch = random_channel(rng, {3, 3, 3}, 5);
    const Eigen::VectorXd p_max = Eigen::VectorXd::Constant(3, 1.0);
    Directions incumbent(3);
    for (int n = 0; n < 3; ++n) incumbent[n] = beam::principal_direction(ch, n, true);
    const Eigen::MatrixXd g = effective_gains(ch, incumbent);
    const double t = 0.5 * sinr(g, p_max, ch.sigma2).minCoeff();
    const auto f0 = power::eval_f({g, ch.sigma2, p_max, 0.0, 0.0}, t);
    ASSERT_TRUE(f0);
    beam::P3Options opts;
    opts.n_rand = 20;
    opts.incumbent = &incumbent;
    const auto r = beam::solve_p3(ch, t, p_max, rng, opts);
    expect_feasible(ch, r, t, p_max);
    EXPECT_LE(r.total_power, f0->value);
  }
}

TEST(SolveP3, TinyPhysicalScale) {
  // Path-loss sized channels (~1e-7 amplitude) and -101 dBm noise.
  Rng rng(9);
  auto ch = random_channel(rng, {4, 4}, 3, 3e-7);
  ch.sigma2 = Eigen::VectorXd::Constant(3, dbm_to_watts(-101));
  const Eigen::VectorXd p_max = Eigen::VectorXd::Constant(2, 0.1);
  const double t = required_target(ch, p_max, 0.2);
  const auto r = beam::solve_p3(ch, t, p_max, rng);
  expect_feasible(ch, r, t, p_max);
  EXPECT_LE(r.sdr_objective, r.total_power * (1 + 1e-6));
}

TEST(PrincipalDirection, PhaseFixedAndUnitNorm) {
  Rng rng(10);
  const auto ch = random_channel(rng, {3}, 4);
  const auto v = beam::principal_direction(ch, 0, true);
  EXPECT_NEAR(v.norm(), 1.0, 1e-12);
  EXPECT_GT(v[0].real(), 0.0);
  EXPECT_EQ(v[0].imag(), 0.0);
}
