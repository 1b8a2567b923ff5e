#pragma once

#include <optional>
#include <type_traits>

#include "pie/bcspace.hpp"
#include "pie/piop.hpp"

namespace pie {

// The maps between the boundary-constrained state space X and the
// fundamental space R^m x L2^n. The fundamental state of u is
// D u = (int F3 u, u_xx); T inverts D, R = d/dx T, and K v = 0 carves out
// the image of D.
template <class S>
struct StateMaps {
  int n = 0;
  int m = 0;
  Interval<S> dom;
  SplitBoundary<S> split;
  PolyMat<S> F3;        // m x n
  Mat<S> G_aug_inv;     // 2n x 2n
  PolyMat<S> T0;        // n x m, in x
  PolyMat<S> T1;        // n x n kernel over the whole interval
  PolyMat<S> H2;        // m x n, in x
  PiOperator<S> T;      // (0,n) x (m,n)
  PiOperator<S> R;      // (0,n) x (m,n)
  PiOperator<S> F;      // (m,0) x (0,n)
  PiOperator<S> K;      // (m,0) x (m,n)
};

template <class S>
PolyMat<S> shift_row(int n, const S& a) {
  PolyMat<S> L(n, 2 * n);
  Poly<S> xa = Poly<S>::monomial(1, 0, S(1)) - Poly<S>(a);
  for (int i = 0; i < n; ++i) {
    L(i, i) = Poly<S>(S(1));
    L(i, n + i) = xa;
  }
  return L;
}

template <class S>
StateMaps<S> build_state_maps(const BoundarySpec<S>& spec, std::optional<std::type_identity_t<PolyMat<S>>> f3_override = std::nullopt) {
  StateMaps<S> M;
  M.split = split(spec);
  const auto& s = M.split;
  const int n = s.n;
  const int m = s.m;
  M.n = n;
  M.m = m;
  M.dom = spec.dom;
  M.F3 = f3_override ? *f3_override : synth_f3(s);
  validate_f3(s, M.F3);

  GH<S> top = build_gh(s.E1, s.F1, n, s.dom);
  GH<S> bot = build_gh(Mat<S>(m, 4 * n), M.F3, n, s.dom);
  M.G_aug_inv = inverse(vstack(top.G, bot.G));
  PolyMat<S> H_aug = vstack(top.H, bot.H);

  PolyMat<S> L = shift_row<S>(n, s.dom.a);
  PolyMat<S> LG = L * M.G_aug_inv;
  Mat<S> sel(2 * n, m);
  for (int i = 0; i < m; ++i) sel(2 * n - m + i, i) = S(1);
  M.T0 = LG * sel;
  M.T1 = LG * H_aug.x_to_theta();

  Poly<S> xt = Poly<S>::monomial(1, 0, S(1)) - Poly<S>::monomial(0, 1, S(1));
  PolyMat<S> local = PolyMat<S>::scaled_identity(n, xt);
  M.T = PiOperator<S>({0, n}, {m, n}, s.dom);
  M.T.Q2 = M.T0;
  M.T.R1 = M.T1 + local;
  M.T.R2 = M.T1;

  M.R = PiOperator<S>({0, n}, {m, n}, s.dom);
  M.R.Q2 = M.T0.diff(Var::x);
  PolyMat<S> dT1 = M.T1.diff(Var::x);
  M.R.R1 = dT1 + PolyMat<S>::identity(n);
  M.R.R2 = dT1;

  M.F = PiOperator<S>({m, 0}, {0, n}, s.dom);
  M.F.Q1 = M.F3;

  M.H2 = build_gh(s.E2, s.F2, n, s.dom).H;
  M.K = PiOperator<S>({m, 0}, {m, n}, s.dom);
  M.K.Q1 = M.H2;
  return M;
}

// D u = (int F3 u, u_xx) for a polynomial state u (n x 1, in x).
template <class S>
MixedVector<S> apply_d(const StateMaps<S>& M, const PolyMat<S>& u) {
  if (u.rows() != M.n || u.cols() != 1 || u.has_theta()) throw UsageError("apply_d: state must be n x 1 in x");
  Mat<S> head = (M.F3 * u).integrate(Var::x, M.dom.a, M.dom.b).constant_value();
  if (M.m == 0) head = Mat<S>(0, 1);
  return MixedVector<S>(head, u.diff(Var::x).diff(Var::x));
}

// Residual of the boundary conditions for a polynomial state; zero iff u is in X.
template <class S>
Mat<S> boundary_residual(const BoundarySpec<S>& spec, const PolyMat<S>& u) {
  const int n = spec.n;
  const S& a = spec.dom.a;
  const S& b = spec.dom.b;
  PolyMat<S> ux = u.diff(Var::x);
  Mat<S> vals(4 * n, 1);
  vals.set_block(0, 0, u.eval(a));
  vals.set_block(n, 0, u.eval(b));
  vals.set_block(2 * n, 0, ux.eval(a));
  vals.set_block(3 * n, 0, ux.eval(b));
  Mat<S> r = spec.E * vals;
  if (!spec.F.is_zero()) r = r + (spec.F * u).integrate(Var::x, a, b).constant_value();
  return r;
}

}  // namespace pie
