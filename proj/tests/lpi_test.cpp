#include "pie/lpi.hpp"

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "pie/catalog.hpp"
#include "test_util.hpp"

namespace pie {
namespace {

using Q = Rational;
using testing::inner;

Mat<Q> random_gram(std::mt19937& rng, int N) {
  std::uniform_int_distribution<int> coef(-3, 3);
  Mat<Q> B(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) B(i, j) = Q(coef(rng));
  return B * B.transpose();
}

LpiProblem periodic(const char* lambda, SMode mode = SMode::t0f, int d = 3) {
  auto e = periodic_reaction_diffusion(parse_rational(lambda));
  auto sys = pde_to_pie(e.pde, e.f3);
  return assemble(sys, s_transform(sys, mode), d);
}

void expect_sound_certificate(const LpiProblem& L, const Certificate& c) {
  EXPECT_LT(c.residual, 1e-7);
  EXPECT_LT(matching_residual(L, c), 1e-7);
  EXPECT_GE(c.eps2, 1e-6);
  EXPECT_GE(c.mp_min_eig, -1e-9 * (1 + c.M_P.cwiseAbs().maxCoeff()));
  EXPECT_LE(sampled_derivative(L, c, 50), 1e-8);
}

TEST(Cone, DegreeZeroIsTheIdentityMultiplier) {
  Interval<Q> dom(Q(0), Q(1));
  auto c = build_cone<Q>(0, 1, dom);
  ASSERT_EQ(c.size(), 1);
  EXPECT_EQ(cone_operator(c, Mat<Q>{{1}}), PiOperator<Q>::identity({0, 1}, dom).canonical());
}

TEST(Cone, ZeroMatrixGivesZeroOperator) {
  Interval<Q> dom(Q(-1), Q(1));
  auto c = build_cone<Q>(2, 2, dom);
  EXPECT_EQ(cone_operator(c, Mat<Q>(c.size(), c.size())), PiOperator<Q>::zero({0, 2}, {0, 2}, dom));
}

TEST(Cone, LinearInTheGramMatrix) {
  std::mt19937 rng(3);
  Interval<Q> dom(Q(0), Q(2));
  auto c = build_cone<Q>(1, 2, dom);
  Mat<Q> A = random_gram(rng, c.size()), B = random_gram(rng, c.size());
  EXPECT_EQ(cone_operator(c, A + B), (cone_operator(c, A) + cone_operator(c, B)).canonical());
  EXPECT_EQ(cone_operator(c, A * Q(3)), (cone_operator(c, A) * Q(3)).canonical());
}

TEST(Cone, PositiveSemidefiniteGramGivesNonnegativeForm) {
  std::mt19937 rng(11);
  for (int n : {1, 2}) {
    Interval<Q> dom(Q(-1), Q(1));
    auto c = build_cone<Q>(2, n, dom);
    Mat<Q> M = random_gram(rng, c.size());
    PiOperator<Q> P = cone_operator(c, M);
    for (int s = 0; s < 50; ++s) {
      MixedVector<Q> v = testing::random_vector(rng, {0, n}, 4);
      EXPECT_GE(inner(v, apply(P, v), dom), Q(0));
    }
  }
}

TEST(Cone, PairOperatorsSumToTheQuadraticForm) {
  std::mt19937 rng(5);
  Interval<Q> dom(Q(0), Q(1));
  auto c = build_cone<Q>(1, 1, dom);
  Mat<Q> M = random_gram(rng, c.size());
  PiOperator<Q> sum = PiOperator<Q>::zero({0, 1}, {0, 1}, dom);
  for (int i = 0; i < c.size(); ++i)
    for (int j = i; j < c.size(); ++j) sum = sum + cone_pair(c, i, j) * M(i, j);
  EXPECT_EQ(sum.canonical(), cone_operator(c, M));
}

TEST(Lpi, PeriodicHeatCertifiedAtNine) {
  LpiProblem L = periodic("0");
  auto r = check_stability(L, 9.0);
  ASSERT_EQ(r.status, SdpStatus::feasible) << r.message;
  ASSERT_TRUE(r.certificate);
  expect_sound_certificate(L, *r.certificate);
}

TEST(Lpi, PeriodicHeatRejectedAboveTheTrueRate) {
  LpiProblem L = periodic("0");
  auto r = check_stability(L, 11.0);
  EXPECT_EQ(r.status, SdpStatus::infeasible) << r.message;
  EXPECT_FALSE(r.certificate);
}

TEST(Lpi, GlobalDecayFailsWhenTheMeanGrows) {
  LpiProblem L = periodic("1", SMode::zero);
  auto r = check_stability(L, 0.0);
  EXPECT_EQ(r.status, SdpStatus::infeasible) << r.message;
}

TEST(Lpi, IdentityTrajectoryIsTriviallyStable) {
  auto e = periodic_reaction_diffusion(Q(2));
  auto sys = pde_to_pie(e.pde, e.f3);
  auto tr = s_transform(sys, SMode::custom, std::optional<PiOperator<Q>>(PiOperator<Q>::identity({0, 1}, sys.maps.dom)));
  LpiProblem L = assemble(sys, tr, 2);
  auto r = check_stability(L, 5.0);
  EXPECT_EQ(r.status, SdpStatus::feasible) << r.message;
}

TEST(Lpi, ReactionDiffusionCertifiedNearTableValue) {
  LpiProblem L = periodic("6");
  auto r = check_stability(L, 3.8);
  ASSERT_EQ(r.status, SdpStatus::feasible) << r.message;
  expect_sound_certificate(L, *r.certificate);
}

TEST(Lpi, DirichletHeatWithoutAuxiliaryState) {
  auto e = dirichlet_heat(Q(0));
  auto sys = pde_to_pie(e.pde, e.f3);
  LpiProblem L = assemble(sys, s_transform(sys, SMode::zero), 3);
  EXPECT_EQ(L.m, 0);
  auto r = check_stability(L, 9.5);
  ASSERT_EQ(r.status, SdpStatus::feasible) << r.message;
  expect_sound_certificate(L, *r.certificate);
  EXPECT_NE(check_stability(L, 10.0).status, SdpStatus::feasible);
}

TEST(Lpi, CertifiedRatesAreMonotone) {
  struct Pair {
    const char* lambda;
    double lo, hi;
  };
  for (Pair p : {Pair{"0", 5.0, 9.0}, Pair{"4.5", 1.0, 5.0}, Pair{"9.5", 0.1, 0.35}}) {
    LpiProblem L = periodic(p.lambda);
    auto hi = check_stability(L, p.hi);
    ASSERT_EQ(hi.status, SdpStatus::feasible) << p.lambda << ": " << hi.message;
    EXPECT_EQ(check_stability(L, p.lo).status, SdpStatus::feasible) << p.lambda;
  }
}

TEST(Lpi, RateSearchBracketsTheTrueRate) {
  LpiProblem L = periodic("9.5");
  auto s = max_decay_rate(L, 1.1 * (9.8696044 - 9.5));
  ASSERT_TRUE(s.alpha);
  EXPECT_LE(*s.alpha, 9.8696044 - 9.5 + 1e-3);
  EXPECT_GE(*s.alpha, 0.98 * (9.8696044 - 9.5));
  ASSERT_TRUE(s.certificate);
  EXPECT_DOUBLE_EQ(s.certificate->alpha, *s.alpha);
}

TEST(Lpi, RejectsDegreesBelowTheLyapunovDegree) {
  auto e = periodic_reaction_diffusion(Q(0));
  auto sys = pde_to_pie(e.pde, e.f3);
  EXPECT_THROW(assemble(sys, s_transform(sys, SMode::t0f), 3, 0), ConstructionError);
}

TEST(Lpi, SampledStatesSatisfyTheConstraint) {
  auto e = neumann_wave(Q(1));
  auto sys = pde_to_pie(e.pde, e.f3);
  std::mt19937 rng(2);
  for (int s = 0; s < 10; ++s) {
    auto v = sample_y(rng, sys.K, {sys.maps.m, sys.maps.n});
    EXPECT_TRUE(apply(sys.K, v).v0.is_zero());
  }
}

TEST(Certificate, TextRoundTrip) {
  LpiProblem L = periodic("3", SMode::t0f, 2);
  auto r = check_stability(L, 2.0);
  ASSERT_TRUE(r.certificate) << r.message;
  std::string text = certificate_text(*r.certificate);
  std::istringstream in(text);
  Certificate c = parse_certificate(in);
  EXPECT_EQ(certificate_text(c), text);
  EXPECT_LT(matching_residual(L, c), 1e-7);
}

TEST(Certificate, MalformedTextIsRejected) {
  std::istringstream in("certificate\nalpha 1\nbogus 2\n");
  EXPECT_THROW(parse_certificate(in), UsageError);
}

}  // namespace
}  // namespace pie
