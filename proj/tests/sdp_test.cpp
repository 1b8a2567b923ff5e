#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "pie/sdp.hpp"

using namespace pie;

namespace {

SdpConstraint fix(int block, int i, int j, double v) { return {{{block, i, j, 1.0}}, v}; }

}  // namespace

TEST(Sdp, CorrelationMatrixFeasible) {
  SdpProblem p;
  p.blocks = {2};
  p.constraints = {fix(0, 0, 0, 1), fix(0, 1, 1, 1), fix(0, 0, 1, 0.5)};
  auto s = solve_sdp(p);
  ASSERT_EQ(s.status, SdpStatus::feasible) << s.message;
  EXPECT_NEAR(s.X[0](0, 1), 0.5, 1e-7);
  EXPECT_GE(s.min_eig, 0);
  EXPECT_LE(s.max_eq_residual, 1e-8);
}

TEST(Sdp, CorrelationMatrixInfeasible) {
  SdpProblem p;
  p.blocks = {2};
  p.constraints = {fix(0, 0, 0, 1), fix(0, 1, 1, 1), fix(0, 0, 1, 2)};
  auto s = solve_sdp(p);
  ASSERT_EQ(s.status, SdpStatus::infeasible) << s.message;
  // b'y = 1 and A'y is negative semidefinite.
  Eigen::Vector3d b(1, 1, 2);
  EXPECT_NEAR(b.dot(s.farkas), 1.0, 1e-8);
  Eigen::Matrix2d Aty;
  Aty << s.farkas(0), 0.5 * s.farkas(2), 0.5 * s.farkas(2), s.farkas(1);
  EXPECT_LE(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(Aty).eigenvalues()(1), 1e-7);
}

TEST(Sdp, MinimizesOffDiagonal) {
  SdpProblem p;
  p.blocks = {2};
  p.constraints = {fix(0, 0, 0, 1), fix(0, 1, 1, 1)};
  p.objective = {{0, 0, 1, 1.0}};
  auto s = solve_sdp(p);
  ASSERT_EQ(s.status, SdpStatus::feasible) << s.message;
  EXPECT_NEAR(s.objective, -1.0, 1e-6);
}

TEST(Sdp, FreeVariables) {
  SdpProblem p;
  p.blocks = {1};
  p.num_free = 1;
  p.constraints = {{{{0, 0, 0, 1.0}, {-1, 0, 0, -1.0}}, 3.0}, {{{-1, 0, 0, 1.0}}, -1.0}};
  auto s = solve_sdp(p);
  ASSERT_EQ(s.status, SdpStatus::feasible) << s.message;
  EXPECT_NEAR(s.X[0](0, 0), 2.0, 1e-7);
  EXPECT_NEAR(s.free(0), -1.0, 1e-7);

  p.constraints[1].rhs = -5.0;
  EXPECT_EQ(solve_sdp(p).status, SdpStatus::infeasible);
}

TEST(Sdp, RandomFeasibleProblems) {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    SdpProblem p;
    p.blocks = {5, 3, 1};
    p.num_free = 2;
    std::vector<Eigen::MatrixXd> X0;
    for (int n : p.blocks) {
      Eigen::MatrixXd B = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return nd(rng); });
      X0.push_back(B * B.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n));
    }
    Eigen::Vector2d f0(nd(rng), nd(rng));
    for (int c = 0; c < 12; ++c) {
      SdpConstraint con;
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < p.blocks[k]; ++i)
          for (int j = i; j < p.blocks[k]; ++j) {
            double v = nd(rng);
            con.terms.push_back({k, i, j, v});
            con.rhs += v * X0[k](i, j);
          }
      for (int f = 0; f < 2; ++f) {
        double v = nd(rng);
        con.terms.push_back({-1, f, 0, v});
        con.rhs += v * f0(f);
      }
      p.constraints.push_back(con);
    }
    auto s = solve_sdp(p);
    ASSERT_EQ(s.status, SdpStatus::feasible) << s.message;
    EXPECT_LE(s.max_eq_residual, 1e-8);
    EXPECT_GE(s.min_eig, 0);
  }
}

TEST(Sdp, RedundantConstraintsAreTolerated) {
  SdpProblem p;
  p.blocks = {2};
  p.constraints = {fix(0, 0, 0, 1), fix(0, 0, 0, 1), {{{0, 0, 0, 2.0}, {0, 1, 1, 1.0}}, 3.0}};
  auto s = solve_sdp(p);
  ASSERT_EQ(s.status, SdpStatus::feasible) << s.message;
  EXPECT_NEAR(s.X[0](1, 1), 1.0, 1e-7);
}

TEST(Sdp, DumpRoundTrip) {
  SdpProblem p;
  p.blocks = {2, 1};
  p.num_free = 1;
  p.constraints = {{{{0, 0, 1, 0.25}, {-1, 0, 0, 2.0}}, 1.5}, fix(1, 0, 0, 3)};
  p.objective = {{0, 1, 1, -1.0}};
  std::string text = dump_sdp(p);
  std::istringstream in(text);
  SdpProblem q = parse_sdp(in);
  EXPECT_EQ(dump_sdp(q), text);
}
