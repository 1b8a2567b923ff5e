#pragma once

#include <optional>

#include "pie/maps.hpp"

namespace pie {

// u_t = A0(x) u + A1(x) u_x + A2(x) u_xx with boundary conditions `bc`.
template <class S>
struct PdeSystem {
  BoundarySpec<S> bc;
  PolyMat<S> A0, A1, A2;  // n x n, in x

  void validate() const {
    bc.validate();
    for (const auto* M : {&A0, &A1, &A2}) {
      if (M->rows() != bc.n || M->cols() != bc.n) throw UsageError("dynamics matrices must be n x n");
      if (M->has_theta()) throw UsageError("dynamics matrices must depend on x only");
    }
  }
};

// Equivalent dynamics in the fundamental state v = D u:
//   T_hat v_t = A_hat v,  K v = 0.
template <class S>
struct PieSystem {
  StateMaps<S> maps;
  PiOperator<S> A;      // (0,n) x (m,n), the PDE right-hand side in terms of v
  PiOperator<S> T_hat;  // (m,n) x (m,n)
  PiOperator<S> A_hat;  // (m,n) x (m,n)
  PiOperator<S> K;      // (m,0) x (m,n)
};

template <class S>
PieSystem<S> pde_to_pie(const PdeSystem<S>& pde, std::optional<std::type_identity_t<PolyMat<S>>> f3_override = std::nullopt) {
  pde.validate();
  PieSystem<S> sys;
  sys.maps = build_state_maps(pde.bc, std::move(f3_override));
  const auto& M = sys.maps;
  const auto& dom = M.dom;
  const int n = M.n;
  const int m = M.m;

  PiOperator<S> lift({0, n}, {m, n}, dom);  // v -> v1
  lift.R0 = PolyMat<S>::identity(n);
  sys.A = compose(PiOperator<S>::multiplier(pde.A0, dom), M.T) +
          compose(PiOperator<S>::multiplier(pde.A1, dom), M.R) +
          compose(PiOperator<S>::multiplier(pde.A2, dom), lift);

  PiOperator<S> head({m, 0}, {m, n}, dom);  // v -> v0
  head.P = PolyMat<S>::identity(m);
  sys.T_hat = stack_rows(head, M.T);
  sys.A_hat = stack_rows(compose(M.F, sys.A), sys.A);
  sys.K = M.K;
  return sys;
}

enum class SMode { zero, t0f, custom };

// Trajectory form: u = (I - S) T v is the part of the state whose norm is
// analysed; A_tilde = (I - S) A drives it.
template <class S>
struct TrajectoryOperator {
  PiOperator<S> Sop;      // (0,n) x (0,n)
  PiOperator<S> T_tilde;  // (0,n) x (m,n)
  PiOperator<S> A_tilde;  // (0,n) x (m,n)
};

template <class S>
PiOperator<S> projector_t0f(const StateMaps<S>& M) {
  PiOperator<S> T0op({0, M.n}, {M.m, 0}, M.dom);
  T0op.Q2 = M.T0;
  return compose(T0op, M.F);
}

template <class S>
TrajectoryOperator<S> s_transform(const PieSystem<S>& sys, SMode mode,
                                  std::optional<PiOperator<S>> custom = std::nullopt) {
  const auto& M = sys.maps;
  TrajectoryOperator<S> t;
  switch (mode) {
    case SMode::zero:
      t.Sop = PiOperator<S>::zero({0, M.n}, {0, M.n}, M.dom);
      break;
    case SMode::t0f:
      t.Sop = projector_t0f(M);
      break;
    case SMode::custom:
      if (!custom) throw UsageError("custom S mode needs an operator");
      if (!(custom->out == Dims{0, M.n}) || !(custom->in == Dims{0, M.n}))
        throw UsageError("custom S must map L2^n to L2^n");
      t.Sop = *custom;
      break;
  }
  PiOperator<S> IS = PiOperator<S>::identity({0, M.n}, M.dom) - t.Sop;
  t.T_tilde = compose(IS, M.T);
  t.A_tilde = compose(IS, sys.A);
  return t;
}

// A (D u) - (A0 u + A1 u_x + A2 u_xx) for a polynomial state u in X; zero when
// the conversion is exact.
template <class S>
PolyMat<S> residual_dynamics_check(const PieSystem<S>& sys, const PdeSystem<S>& pde, const PolyMat<S>& u) {
  MixedVector<S> v = apply_d(sys.maps, u);
  PolyMat<S> ux = u.diff(Var::x);
  PolyMat<S> direct = pde.A0 * u + pde.A1 * ux + pde.A2 * ux.diff(Var::x);
  return apply(sys.A, v).v1 - direct;
}

}  // namespace pie
