#include "pie/maps.hpp"

#include <gtest/gtest.h>

#include "pie/catalog.hpp"
#include "test_util.hpp"

namespace pie {
namespace {

using Q = Rational;
Poly<Q> X(int e, Q c = 1) { return Poly<Q>::monomial(e, 0, c); }
Poly<Q> TH(int e, Q c = 1) { return Poly<Q>::monomial(0, e, c); }

StateMaps<Q> periodic_maps() {
  auto e = periodic_reaction_diffusion(Q(0));
  return build_state_maps(e.pde.bc, e.f3);
}

TEST(StateMaps, PeriodicKernels) {
  auto M = periodic_maps();
  EXPECT_EQ(M.m, 1);
  EXPECT_EQ(M.T0(0, 0), Poly<Q>(Q(1)));
  // x(theta - 1)/2 - (1 - theta)^2/4
  Poly<Q> one_minus = Poly<Q>(Q(1)) - TH(1);
  Poly<Q> expect = X(1) * (TH(1) - Poly<Q>(Q(1))) * Q(1, 2) - one_minus * one_minus * Q(1, 4);
  EXPECT_EQ(M.T1(0, 0), expect);
  EXPECT_EQ(M.H2(0, 0), Poly<Q>(Q(1)));
}

TEST(StateMaps, PeriodicGreenFunctionForLinearSource) {
  // u_xx = x, periodic, mean zero: u = x^3/6 - x/6.
  auto M = periodic_maps();
  PolyMat<Q> v(1, 1);
  v(0, 0) = X(1);
  auto u = apply(M.T, MixedVector<Q>(Mat<Q>{{0}}, v)).v1;
  EXPECT_EQ(u(0, 0), X(3, Q(1, 6)) - X(1, Q(1, 6)));
}

TEST(StateMaps, DirichletGreenFunction) {
  auto e = dirichlet_heat(Q(0));
  auto M = build_state_maps(e.pde.bc);
  EXPECT_EQ(M.m, 0);
  // theta (x - 1) below the diagonal, x (theta - 1) above.
  EXPECT_EQ(M.T.R1(0, 0), TH(1) * (X(1) - Poly<Q>(Q(1))));
  EXPECT_EQ(M.T.R2(0, 0), X(1) * (TH(1) - Poly<Q>(Q(1))));
}

TEST(StateMaps, NeumannWithConstantWeight) {
  // With F3 = 1 on [0, 1] and Neumann conditions, K v = -int v.
  auto bc = neumann_bc(1, Interval<Q>(Q(0), Q(1)));
  auto M = build_state_maps(bc, PolyMat<Q>::identity(1));
  EXPECT_EQ(M.K.Q1(0, 0), Poly<Q>(Q(-1)));
  EXPECT_EQ(M.T0(0, 0), Poly<Q>(Q(1)));
}

TEST(StateMaps, FunctionalIdentities) {
  // F T0 = I and F T1 = 0: the auxiliary functional reads off v0 exactly.
  for (const auto& bc : {periodic_bc(Interval<Q>(Q(-1), Q(1))), neumann_bc(2, Interval<Q>(Q(0), Q(1))),
                         mixed_integral_bc(Interval<Q>(Q(0), Q(1)))}) {
    auto M = build_state_maps(bc);
    auto FT = compose(M.F, M.T);
    EXPECT_EQ(FT.P, PolyMat<Q>::identity(M.m));
    EXPECT_TRUE(FT.Q1.is_zero());
  }
}

TEST(StateMaps, RIsDerivativeOfT) {
  std::mt19937 rng(11);
  auto M = build_state_maps(mixed_integral_bc(Interval<Q>(Q(0), Q(1))));
  for (int k = 0; k < 5; ++k) {
    auto v = testing::random_vector(rng, {M.m, M.n});
    EXPECT_EQ(apply(M.R, v).v1, apply(M.T, v).v1.diff(Var::x));
  }
}

class RoundTrip : public ::testing::TestWithParam<int> {};

BoundarySpec<Q> family(int k) {
  switch (k) {
    case 0: return periodic_bc(Interval<Q>(Q(-1), Q(1)));
    case 1: return dirichlet_bc(Interval<Q>(Q(0), Q(1)));
    case 2: return neumann_bc(2, Interval<Q>(Q(0), Q(1)));
    default: return mixed_integral_bc(Interval<Q>(Q(0), Q(1)));
  }
}

TEST_P(RoundTrip, StateToFundamentalAndBack) {
  std::mt19937 rng(100 + GetParam());
  auto bc = family(GetParam());
  auto M = build_state_maps(bc);
  for (int k = 0; k < 20; ++k) {
    auto u = testing::random_member_x(rng, bc);
    ASSERT_TRUE(boundary_residual(bc, u).is_zero());
    auto v = apply_d(M, u);
    EXPECT_EQ(apply(M.T, v).v1, u);
    EXPECT_TRUE(apply(M.K, v).v0.is_zero());
  }
  for (int k = 0; k < 20; ++k) {
    auto v = testing::random_member_y(rng, M);
    auto u = apply(M.T, v).v1;
    EXPECT_TRUE(boundary_residual(bc, u).is_zero());
    auto w = apply_d(M, u);
    EXPECT_EQ(w.v0, v.v0);
    EXPECT_EQ(w.v1, v.v1);
  }
}

INSTANTIATE_TEST_SUITE_P(Families, RoundTrip, ::testing::Values(0, 1, 2, 3));

}  // namespace
}  // namespace pie
