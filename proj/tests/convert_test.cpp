#include "pie/convert.hpp"

#include <gtest/gtest.h>

#include "pie/catalog.hpp"
#include "test_util.hpp"

namespace pie {
namespace {

using Q = Rational;

std::vector<CatalogEntry<Q>> entries() {
  return {periodic_reaction_diffusion(Q(3, 2)), neumann_wave(Q(3)), dirichlet_heat(Q(2))};
}

TEST(PdeToPie, ResidualDynamicsVanishesOnRandomStates) {
  std::mt19937 rng(21);
  for (const auto& e : entries()) {
    auto sys = pde_to_pie(e.pde, e.f3);
    for (int k = 0; k < 8; ++k) {
      auto u = testing::random_member_x(rng, e.pde.bc);
      EXPECT_TRUE(residual_dynamics_check(sys, e.pde, u).is_zero());
    }
  }
}

TEST(PdeToPie, HatOperatorsOnFundamentalStates) {
  std::mt19937 rng(22);
  for (const auto& e : entries()) {
    auto sys = pde_to_pie(e.pde, e.f3);
    const auto& M = sys.maps;
    for (int k = 0; k < 5; ++k) {
      auto u = testing::random_member_x(rng, e.pde.bc);
      auto v = apply_d(M, u);
      auto th = apply(sys.T_hat, v);
      EXPECT_EQ(th.v0, v.v0);
      EXPECT_EQ(th.v1, u);
      auto ah = apply(sys.A_hat, v);
      PolyMat<Q> ux = u.diff(Var::x);
      PolyMat<Q> rhs = e.pde.A0 * u + e.pde.A1 * ux + e.pde.A2 * ux.diff(Var::x);
      EXPECT_EQ(ah.v1, rhs);
      if (M.m > 0) {
        EXPECT_EQ(ah.v0, (M.F3 * rhs).integrate(Var::x, M.dom.a, M.dom.b).constant_value());
      }
    }
  }
}

TEST(PdeToPie, PeriodicReactionDiffusionStructure) {
  const Q lambda(3, 2);
  auto e = periodic_reaction_diffusion(lambda);
  auto sys = pde_to_pie(e.pde, e.f3);
  // Top row: lambda v0 + (1/2) int v1, which is lambda v0 on K v = 0.
  EXPECT_EQ(sys.A_hat.P, PolyMat<Q>::constant(Mat<Q>{{lambda}}));
  EXPECT_EQ(sys.A_hat.Q1, PolyMat<Q>::constant(Mat<Q>{{Q(1, 2)}}));
  // Bottom: lambda v0 + v1 + lambda T1 v1.
  EXPECT_EQ(sys.A.Q2, PolyMat<Q>::constant(Mat<Q>{{lambda}}));
  EXPECT_EQ(sys.A.R0, PolyMat<Q>::identity(1));
  EXPECT_EQ(sys.A.R2, sys.maps.T1 * lambda);
}

TEST(STransform, MeanProjectorRemovesConstants) {
  auto e = periodic_reaction_diffusion(Q(1));
  auto sys = pde_to_pie(e.pde, e.f3);
  auto tr = s_transform(sys, SMode::t0f);
  // S u = (1/2) int u.
  EXPECT_EQ(tr.Sop.R1, PolyMat<Q>::constant(Mat<Q>{{Q(1, 2)}}));
  EXPECT_EQ(tr.Sop.R2, PolyMat<Q>::constant(Mat<Q>{{Q(1, 2)}}));
  // (I - S) T annihilates the v0 direction.
  EXPECT_TRUE(tr.T_tilde.Q2.is_zero());
  EXPECT_TRUE(tr.A_tilde.Q2.is_zero());
  auto tz = s_transform(sys, SMode::zero);
  EXPECT_EQ(tz.T_tilde, sys.maps.T);
  EXPECT_THROW(s_transform(sys, SMode::custom), UsageError);
}

TEST(PdeToPie, RejectsMalformedDynamics) {
  auto e = dirichlet_heat(Q(0));
  e.pde.A0 = PolyMat<Q>(2, 2);
  EXPECT_THROW(pde_to_pie(e.pde), UsageError);
}

}  // namespace
}  // namespace pie
