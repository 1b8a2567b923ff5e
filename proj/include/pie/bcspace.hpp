#pragma once

#include <algorithm>
#include <vector>

#include "pie/polymat.hpp"

namespace pie {

// Boundary conditions E [u(a); u(b); u_x(a); u_x(b)] + int_a^b F(x) u(x) dx = 0
// on states u in L2^n.
template <class S>
struct BoundarySpec {
  int n = 0;
  Interval<S> dom;
  Mat<S> E;      // 2n x 4n
  PolyMat<S> F;  // 2n x n, in x

  void validate() const {
    if (n <= 0) throw UsageError("state dimension must be positive");
    if (E.rows() != 2 * n || E.cols() != 4 * n)
      throw UsageError("boundary matrix must be " + std::to_string(2 * n) + "x" + std::to_string(4 * n));
    if (F.rows() != 2 * n || F.cols() != n)
      throw UsageError("boundary integral kernel must be " + std::to_string(2 * n) + "x" + std::to_string(n));
    if (F.has_theta()) throw UsageError("boundary integral kernel must depend on x only");
  }
};

template <class S>
struct GH {
  Mat<S> G;      // r x 2n
  PolyMat<S> H;  // r x n, in x
};

// G and H for a row block (E, F): the boundary functional equals
// G [u(a); u_x(a)] - int_a^b H(x) u_xx(x) dx.
template <class S>
GH<S> build_gh(const Mat<S>& E, const PolyMat<S>& F, int n, const Interval<S>& dom) {
  if (E.cols() != 4 * n || F.cols() != n || E.rows() != F.rows())
    throw UsageError("build_gh: boundary block dimensions inconsistent");
  if (F.has_theta()) throw UsageError("build_gh: F must depend on x only");
  const S& a = dom.a;
  const S& b = dom.b;
  Mat<S> I = Mat<S>::identity(n);
  Mat<S> lift(4 * n, 2 * n);
  lift.set_block(0, 0, I);
  lift.set_block(n, 0, I);
  lift.set_block(n, n, I * (b - a));
  lift.set_block(2 * n, n, I);
  lift.set_block(3 * n, n, I);

  PolyMat<S> shift(n, 2 * n);  // [I, (x - a) I]
  Poly<S> xa = Poly<S>::monomial(1, 0, S(1)) - Poly<S>(a);
  for (int i = 0; i < n; ++i) {
    shift(i, i) = Poly<S>(S(1));
    shift(i, n + i) = xa;
  }
  Mat<S> G = E * lift;
  if (!F.is_zero()) G = G + (F * shift).integrate(Var::x, a, b).constant_value();

  PolyMat<S> tail(4 * n, n);  // [0; (b - x) I; 0; I]
  Poly<S> bx = Poly<S>(b) - Poly<S>::monomial(1, 0, S(1));
  for (int i = 0; i < n; ++i) {
    tail(n + i, i) = bx;
    tail(3 * n + i, i) = Poly<S>(S(1));
  }
  PolyMat<S> H = -(PolyMat<S>::constant(E) * tail);
  if (!F.is_zero()) {
    PolyMat<S> Ft = F.x_to_theta();
    Poly<S> tx = Poly<S>::monomial(0, 1, S(1)) - Poly<S>::monomial(1, 0, S(1));
    PolyMat<S> weighted = Ft * PolyMat<S>::scaled_identity(n, tx);
    H = H - weighted.integrate(Var::theta, Bound<S>::x(), Bound<S>::at(b));
  }
  return {G, H};
}

// Row split of the boundary conditions: J G has full-rank rows on top and m
// zero rows below. The top rows act on boundary values, the bottom rows are
// pure integral constraints on u_xx.
template <class S>
struct SplitBoundary {
  int n = 0;
  int m = 0;
  Interval<S> dom;
  Mat<S> J;
  Mat<S> E1, E2;
  PolyMat<S> F1, F2;
  Mat<S> G;                 // G of the full spec
  std::vector<int> pivots;  // pivot columns of J G
};

template <class S>
SplitBoundary<S> split(const BoundarySpec<S>& spec) {
  spec.validate();
  const int n = spec.n;
  GH<S> gh = build_gh(spec.E, spec.F, n, spec.dom);
  const int rank = numerical_rank(gh.G);
  auto gj = gauss_jordan(gh.G, rank);
  Mat<S> JE = gj.J * spec.E;
  PolyMat<S> JF = PolyMat<S>::constant(gj.J) * spec.F;
  SplitBoundary<S> s;
  s.n = n;
  s.m = 2 * n - rank;
  s.dom = spec.dom;
  s.J = gj.J;
  s.E1 = JE.block(0, 0, rank, 4 * n);
  s.E2 = JE.block(rank, 0, s.m, 4 * n);
  s.F1 = JF.block(0, 0, rank, n);
  s.F2 = JF.block(rank, 0, s.m, n);
  s.G = gh.G;
  s.pivots = gj.pivots;
  if (s.m > 0) {
    // Rows of (E2, F2) as functionals: boundary coefficients plus moments of F2.
    const int deg = std::max(0, s.F2.degree_x());
    Mat<S> C(s.m, 4 * n + n * (deg + 1));
    C.set_block(0, 0, s.E2);
    for (int k = 0; k <= deg; ++k) {
      PolyMat<S> mom = s.F2 * PolyMat<S>::scaled_identity(n, Poly<S>::monomial(k, 0, S(1)));
      C.set_block(0, 4 * n + k * n, mom.integrate(Var::x, spec.dom.a, spec.dom.b).constant_value());
    }
    if (numerical_rank(C) < s.m) throw UsageError("boundary conditions are linearly dependent");
  }
  return s;
}

// Column permutation putting the pivot columns of J G first, so that
// G(E1, F1) P = [I, M].
template <class S>
Mat<S> pivot_permutation(const SplitBoundary<S>& s) {
  const int N = 2 * s.n;
  std::vector<int> order = s.pivots;
  for (int c = 0; c < N; ++c)
    if (std::find(order.begin(), order.end(), c) == order.end()) order.push_back(c);
  Mat<S> P(N, N);
  for (int k = 0; k < N; ++k) P(order[k], k) = S(1);
  return P;
}

// Default integral rows completing the boundary-value rows to an invertible
// system: F3(x) = f(x) P12^T - g(x) P22^T with f, g chosen so that
// int f = 1, int f (x - a) = 0, int g = 0, int g (x - a) = -1.
template <class S>
PolyMat<S> synth_f3(const SplitBoundary<S>& s) {
  const int n = s.n;
  const int m = s.m;
  const int r = 2 * n - m;
  const S& a = s.dom.a;
  const S& b = s.dom.b;
  const S L = b - a;
  Mat<S> P = pivot_permutation(s);
  Mat<S> P12 = P.block(0, r, n, m);
  Mat<S> P22 = P.block(n, r, n, m);
  Poly<S> x = Poly<S>::monomial(1, 0, S(1));
  Poly<S> f = (Poly<S>(S(2) * b + a) - x * S(3)) * (S(2) / (L * L));
  Poly<S> g = (Poly<S>(b + a) - x * S(2)) * (S(6) / (L * L * L));
  PolyMat<S> F3(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) F3(i, j) = f * P12(j, i) - g * P22(j, i);
  return F3;
}

// G of the augmented system [E1; 0], [F1; F3].
template <class S>
Mat<S> augmented_g(const SplitBoundary<S>& s, const PolyMat<S>& F3) {
  if (F3.rows() != s.m || F3.cols() != s.n)
    throw UsageError("F3 must be " + std::to_string(s.m) + "x" + std::to_string(s.n));
  if (F3.has_theta()) throw UsageError("F3 must depend on x only");
  GH<S> top = build_gh(s.E1, s.F1, s.n, s.dom);
  GH<S> bot = build_gh(Mat<S>(s.m, 4 * s.n), F3, s.n, s.dom);
  return vstack(top.G, bot.G);
}

template <class S>
void validate_f3(const SplitBoundary<S>& s, const PolyMat<S>& F3) {
  Mat<S> Ga = augmented_g(s, F3);
  if (numerical_rank(Ga) < 2 * s.n)
    throw ConstructionError("F3 does not complete the boundary conditions: augmented G is singular");
}

}  // namespace pie
