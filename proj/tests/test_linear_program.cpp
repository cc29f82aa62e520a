#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "dasee/conic/linear_program.hpp"
#include "oracles.hpp"

using dasee::conic::LinearProgram;
using dasee::conic::SolveCode;
using dasee::conic::solve_lp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LinearProgram make_lp(Eigen::VectorXd c, Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd u) {
  return {std::move(c), std::move(a), std::move(b), std::move(u)};
}

}  // namespace

TEST(LinearProgram, TwoVariableVertex) {
  Eigen::MatrixXd a(1, 2);
  a << 1, 2;
  const auto sol = solve_lp(make_lp(Eigen::Vector2d(1, 1), a, Eigen::VectorXd::Constant(1, 4), Eigen::Vector2d(3, 3)));
  ASSERT_EQ(sol.status, SolveCode::optimal);
  EXPECT_NEAR(sol.objective, 2.0, 1e-12);
  EXPECT_NEAR(sol.x[0], 0.0, 1e-12);
  EXPECT_NEAR(sol.x[1], 2.0, 1e-12);
  EXPECT_LE(sol.gap, 1e-8);
}

TEST(LinearProgram, EmptyFeasibleSet) {
  Eigen::MatrixXd a(1, 1);
  a << 1;
  const auto sol = solve_lp(make_lp(Eigen::VectorXd::Ones(1), a, Eigen::VectorXd::Constant(1, 5), Eigen::VectorXd::Constant(1, 3)));
  EXPECT_EQ(sol.status, SolveCode::infeasible);
}

TEST(LinearProgram, BoundActiveOptimum) {
  Eigen::MatrixXd a(1, 1);
  a << 1;
  const auto sol = solve_lp(make_lp(Eigen::VectorXd::Ones(1), a, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 3)));
  ASSERT_EQ(sol.status, SolveCode::optimal);
  EXPECT_NEAR(sol.objective, 0.0, 1e-14);
}

TEST(LinearProgram, NegativeUpperBoundIsInfeasible) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(0, 1);
  const auto sol = solve_lp(make_lp(Eigen::VectorXd::Ones(1), a, Eigen::VectorXd::Zero(0), Eigen::VectorXd::Constant(1, -1)));
  EXPECT_EQ(sol.status, SolveCode::infeasible);
}

TEST(LinearProgram, ZeroRowWithPositiveRhsIsInfeasible) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 2);
  const auto sol = solve_lp(make_lp(Eigen::Vector2d(1, 1), a, Eigen::VectorXd::Constant(1, 1), Eigen::Vector2d(1, 1)));
  EXPECT_EQ(sol.status, SolveCode::infeasible);
}

TEST(LinearProgram, UnboundedAboveVariables) {
  // min x1 + 2 x2 s.t. x1 + x2 >= 3, x1 - x2 >= -1, x unbounded above.
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 1, -1;
  const auto sol = solve_lp(make_lp(Eigen::Vector2d(1, 2), a, Eigen::Vector2d(3, -1), Eigen::Vector2d(kInf, kInf)));
  ASSERT_EQ(sol.status, SolveCode::optimal);
  EXPECT_NEAR(sol.objective, 3.0, 1e-12);
}

TEST(LinearProgram, BadlyScaledRows) {
  // Gains of order 1e-14 as they appear before normalisation.
  Eigen::MatrixXd a(2, 2);
  a << 3e-14, 1e-14, 1e-14, 4e-14;
  const Eigen::Vector2d b(2e-14, 2e-14);
  const auto sol = solve_lp(make_lp(Eigen::Vector2d(1, 1), a, b, Eigen::Vector2d(5, 5)));
  const auto ref = dasee::oracle::lp_vertex_enumeration(Eigen::Vector2d(1, 1), a, b, Eigen::Vector2d(5, 5), 1e-22);
  ASSERT_EQ(sol.status, SolveCode::optimal);
  ASSERT_TRUE(ref.feasible);
  EXPECT_NEAR(sol.objective, ref.objective, 1e-10);
}

// Property: agreement with vertex enumeration on random small instances,
// including infeasible ones.
TEST(LinearProgram, MatchesVertexEnumeration) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 3.0);
  std::uniform_int_distribution<int> dims(1, 3);
  int infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int V = dims(rng);
    const int m = dims(rng) + 1;
    Eigen::VectorXd c(V), u(V), b(m);
    Eigen::MatrixXd a(m, V);
    for (int j = 0; j < V; ++j) {
      c[j] = coef(rng);
      u[j] = 0.5 + std::abs(coef(rng)) * 2.0;
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < V; ++j) a(i, j) = coef(rng);
      b[i] = coef(rng);
    }
    const auto sol = solve_lp(make_lp(c, a, b, u));
    const auto ref = dasee::oracle::lp_vertex_enumeration(c, a, b, u);
    if (!ref.feasible) {
      ++infeasible;
      EXPECT_EQ(sol.status, SolveCode::infeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(sol.status, SolveCode::optimal) << "trial " << trial;
    EXPECT_NEAR(sol.objective, ref.objective, 1e-8) << "trial " << trial;
    EXPECT_LE(sol.residual, 1e-8);
    EXPECT_LE(sol.gap, 1e-8);
  }
  EXPECT_GT(infeasible, 0);
}
