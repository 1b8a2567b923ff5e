#pragma once

#include <random>

#include "pie/piop.hpp"

namespace pie::testing {

inline PolyMat<Rational> random_polymat(std::mt19937& rng, int rows, int cols, int deg, bool two_vars) {
  std::uniform_int_distribution<int> coef(-4, 4);
  std::uniform_int_distribution<int> pick(0, 2);
  PolyMat<Rational> m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      for (int ex = 0; ex <= deg; ++ex)
        for (int et = 0; et + ex <= deg; ++et) {
          if (!two_vars && et > 0) continue;
          if (pick(rng) != 0) continue;
          m(i, j) += Poly<Rational>::monomial(ex, et, Rational(coef(rng), 1 + pick(rng)));
        }
  return m;
}

inline PiOperator<Rational> random_operator(std::mt19937& rng, Dims out, Dims in, const Interval<Rational>& dom,
                                            int deg = 2) {
  PiOperator<Rational> A(out, in, dom);
  A.P = random_polymat(rng, out.m, in.m, 0, false);
  A.Q1 = random_polymat(rng, out.m, in.n, deg, false);
  A.Q2 = random_polymat(rng, out.n, in.m, deg, false);
  A.R0 = random_polymat(rng, out.n, in.n, deg, false);
  A.R1 = random_polymat(rng, out.n, in.n, deg, true);
  A.R2 = random_polymat(rng, out.n, in.n, deg, true);
  return A;
}

inline MixedVector<Rational> random_vector(std::mt19937& rng, Dims d, int deg = 3) {
  Mat<Rational> v0 = random_polymat(rng, d.m, 1, 0, false).eval(Rational(0), Rational(0));
  return MixedVector<Rational>(v0, random_polymat(rng, d.n, 1, deg, false));
}

template <class S>
S inner(const MixedVector<S>& u, const MixedVector<S>& v, const Interval<S>& dom) {
  S r(0);
  for (int i = 0; i < u.v0.rows(); ++i) r += u.v0(i, 0) * v.v0(i, 0);
  PolyMat<S> f = u.v1.transpose() * v.v1;
  return r + f.integrate(Var::x, dom.a, dom.b).constant_value()(0, 0);
}

}  // namespace pie::testing

#include "pie/maps.hpp"

namespace pie::testing {

// Some exact solution of A x = b (free variables set to zero).
inline Mat<Rational> solve_any(const Mat<Rational>& A, const Mat<Rational>& b) {
  const int rank = numerical_rank(A);
  auto gj = gauss_jordan(A, rank);
  Mat<Rational> rhs = gj.J * b;
  Mat<Rational> x(A.cols(), 1);
  for (int k = 0; k < static_cast<int>(gj.pivots.size()); ++k) x(gj.pivots[k], 0) = rhs(k, 0);
  if (!(A * x == b)) throw std::runtime_error("solve_any: inconsistent system");
  return x;
}

inline PolyMat<Rational> unit_column(int n, int comp, int deg) {
  PolyMat<Rational> e(n, 1);
  e(comp, 0) = Poly<Rational>::monomial(deg, 0, Rational(1));
  return e;
}

// Random polynomial state satisfying the boundary conditions.
inline PolyMat<Rational> random_member_x(std::mt19937& rng, const BoundarySpec<Rational>& spec, int deg = 5) {
  const int n = spec.n;
  PolyMat<Rational> u = random_polymat(rng, n, 1, deg, false);
  std::vector<PolyMat<Rational>> basis;
  for (int c = 0; c < n; ++c)
    for (int d = 0; d <= 3; ++d) basis.push_back(unit_column(n, c, d));
  Mat<Rational> A(2 * n, static_cast<int>(basis.size()));
  for (int k = 0; k < static_cast<int>(basis.size()); ++k) A.set_block(0, k, boundary_residual(spec, basis[k]));
  Mat<Rational> c = solve_any(A, -boundary_residual(spec, u));
  for (int k = 0; k < static_cast<int>(basis.size()); ++k) u += basis[k] * c(k, 0);
  return u;
}

// Random fundamental state satisfying K v = 0.
inline MixedVector<Rational> random_member_y(std::mt19937& rng, const StateMaps<Rational>& M, int deg = 4) {
  MixedVector<Rational> v = random_vector(rng, {M.m, M.n}, deg);
  if (M.m == 0) return v;
  std::vector<PolyMat<Rational>> basis;
  for (int c = 0; c < M.n; ++c)
    for (int d = 0; d <= 2; ++d) basis.push_back(unit_column(M.n, c, d));
  auto k_of = [&](const PolyMat<Rational>& f) {
    return apply(M.K, MixedVector<Rational>(Mat<Rational>(M.m, 1), f)).v0;
  };
  Mat<Rational> A(M.m, static_cast<int>(basis.size()));
  for (int k = 0; k < static_cast<int>(basis.size()); ++k) A.set_block(0, k, k_of(basis[k]));
  Mat<Rational> c = solve_any(A, -apply(M.K, v).v0);
  for (int k = 0; k < static_cast<int>(basis.size()); ++k) v.v1 += basis[k] * c(k, 0);
  return v;
}

}  // namespace pie::testing
