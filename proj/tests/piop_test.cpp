#include "pie/piop.hpp"

#include <array>
#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace pie {
namespace {

using Q = Rational;
using testing::inner;
using testing::random_operator;
using testing::random_vector;

const Interval<Q> kDom(Q(-1), Q(2));

bool same(const MixedVector<Q>& u, const MixedVector<Q>& v) { return u.v0 == v.v0 && u.v1 == v.v1; }

// Five-point Gauss-Legendre on [lo, hi]; exact for degree <= 9.
double gauss(const std::function<double(double)>& f, double lo, double hi) {
  static const std::array<double, 5> x = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                          0.9061798459386640};
  static const std::array<double, 5> w = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                          0.2369268850561891, 0.2369268850561891};
  double h = (hi - lo) / 2, c = (hi + lo) / 2, s = 0;
  for (int k = 0; k < 5; ++k) s += w[k] * f(c + h * x[k]);
  return s * h;
}

TEST(PiOperator, ApplyMatchesQuadratureOfDefinition) {
  std::mt19937 rng(1);
  auto A = random_operator(rng, {1, 2}, {2, 1}, kDom, 2).cast<double>();
  auto vq = random_vector(rng, {2, 1}, 2);
  MixedVector<double> v(vq.v0.cast<double>(), vq.v1.cast<double>());
  auto out = apply(A, v);
  const double a = -1, b = 2;
  auto v1 = [&](double s) { return v.v1(0, 0).eval(s, 0); };
  double head = A.P.eval(0.0, 0.0)(0, 0) * v.v0(0, 0) + A.P.eval(0.0, 0.0)(0, 1) * v.v0(1, 0) +
                gauss([&](double s) { return A.Q1(0, 0).eval(s, 0) * v1(s); }, a, b);
  EXPECT_NEAR(out.v0(0, 0), head, 1e-11);
  for (double x : {-0.7, 0.3, 1.9}) {
    for (int i = 0; i < 2; ++i) {
      double e = A.Q2(i, 0).eval(x, 0) * v.v0(0, 0) + A.Q2(i, 1).eval(x, 0) * v.v0(1, 0) +
                 A.R0(i, 0).eval(x, 0) * v1(x) +
                 gauss([&](double t) { return A.R1(i, 0).eval(x, t) * v1(t); }, a, x) +
                 gauss([&](double t) { return A.R2(i, 0).eval(x, t) * v1(t); }, x, b);
      EXPECT_NEAR(out.v1(i, 0).eval(x, 0), e, 1e-10);
    }
  }
}

TEST(PiOperator, FullRangeConversion) {
  // int_a^x K1 + int_a^b K2 acting on v == 1.
  PolyMat<Q> K1(1, 1), K2(1, 1);
  K1(0, 0) = Poly<Q>::monomial(1, 0, Q(1));
  K2(0, 0) = Poly<Q>::monomial(0, 1, Q(1));
  auto A = PiOperator<Q>::from_full_range(K1, K2, Interval<Q>(Q(0), Q(1)));
  PolyMat<Q> one = PolyMat<Q>::identity(1);
  auto r = apply(A, MixedVector<Q>(Mat<Q>(0, 1), one));
  // x * x + 1/2
  EXPECT_EQ(r.v1(0, 0), Poly<Q>::monomial(2, 0, Q(1)) + Poly<Q>(Q(1, 2)));
}

TEST(PiOperator, CompositionMatchesNestedApplication) {
  std::mt19937 rng(2);
  const std::array<Dims, 4> shapes = {Dims{1, 1}, Dims{0, 2}, Dims{2, 1}, Dims{1, 0}};
  for (int trial = 0; trial < 12; ++trial) {
    Dims d1 = shapes[trial % 4], d2 = shapes[(trial + 1) % 4], d3 = shapes[(trial + 2) % 4];
    auto A = random_operator(rng, d1, d2, kDom);
    auto B = random_operator(rng, d2, d3, kDom);
    auto v = random_vector(rng, d3);
    EXPECT_TRUE(same(apply(compose(A, B), v), apply(A, apply(B, v)))) << "trial " << trial;
  }
}

TEST(PiOperator, AdjointSatisfiesInnerProductIdentity) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Dims din{trial % 3, 1 + trial % 2}, dout{(trial + 1) % 2, 2};
    auto A = random_operator(rng, dout, din, kDom);
    auto u = random_vector(rng, din);
    auto v = random_vector(rng, dout);
    EXPECT_EQ(inner(apply(A, u), v, kDom), inner(u, apply(adjoint(A), v), kDom));
    EXPECT_EQ(adjoint(adjoint(A)), A);
  }
}

TEST(PiOperator, AlgebraicIdentities) {
  std::mt19937 rng(4);
  Dims d{1, 2};
  auto A = random_operator(rng, d, d, kDom);
  auto B = random_operator(rng, d, d, kDom);
  auto C = random_operator(rng, d, d, kDom);
  auto I = PiOperator<Q>::identity(d, kDom);
  EXPECT_EQ(compose(compose(A, B), C), compose(A, compose(B, C)));
  EXPECT_EQ(adjoint(compose(A, B)), compose(adjoint(B), adjoint(A)));
  EXPECT_EQ(compose(I, A), A);
  EXPECT_EQ(compose(A, I), A);
  EXPECT_EQ(compose(A, B + C), compose(A, B) + compose(A, C));
  EXPECT_TRUE(is_self_adjoint(compose(adjoint(A), A)));
}

TEST(PiOperator, DimensionMismatchIsUsageError) {
  std::mt19937 rng(5);
  auto A = random_operator(rng, {1, 1}, {1, 1}, kDom);
  auto B = random_operator(rng, {0, 2}, {1, 1}, kDom);
  EXPECT_THROW(compose(A, B), UsageError);
  EXPECT_THROW(A + B, UsageError);
  auto C = random_operator(rng, {1, 1}, {1, 1}, Interval<Q>(Q(0), Q(1)));
  EXPECT_THROW(compose(A, C), UsageError);
}

}  // namespace
}  // namespace pie
