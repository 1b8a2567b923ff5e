#pragma once

#include <optional>

#include "pie/convert.hpp"

namespace pie {

// Reference systems used by the CLI, the tests and the table reproductions.
template <class S>
struct CatalogEntry {
  PdeSystem<S> pde;
  std::optional<PolyMat<S>> f3;
};

template <class S>
BoundarySpec<S> periodic_bc(const Interval<S>& dom) {
  BoundarySpec<S> bc{1, dom, Mat<S>{{1, -1, 0, 0}, {0, 0, 1, -1}}, PolyMat<S>(2, 1)};
  return bc;
}

template <class S>
BoundarySpec<S> dirichlet_bc(const Interval<S>& dom) {
  return {1, dom, Mat<S>{{1, 0, 0, 0}, {0, 1, 0, 0}}, PolyMat<S>(2, 1)};
}

// u_x(a) = u_x(b) = 0 for every component.
template <class S>
BoundarySpec<S> neumann_bc(int n, const Interval<S>& dom) {
  Mat<S> E(2 * n, 4 * n);
  for (int i = 0; i < n; ++i) {
    E(i, 2 * n + i) = S(1);
    E(n + i, 3 * n + i) = S(1);
  }
  return {n, dom, E, PolyMat<S>(2 * n, 1 * n)};
}

// u(a) + int x u = 0 and u_x(b) - int u = 0.
template <class S>
BoundarySpec<S> mixed_integral_bc(const Interval<S>& dom) {
  PolyMat<S> F(2, 1);
  F(0, 0) = Poly<S>::monomial(1, 0, S(1));
  F(1, 0) = Poly<S>(S(-1));
  return {1, dom, Mat<S>{{1, 0, 0, 0}, {0, 0, 0, 1}}, F};
}

// u_t = u_xx + lambda u on (-1, 1) with periodic boundary conditions; the
// auxiliary functional is the mean (1/2) int u.
template <class S>
CatalogEntry<S> periodic_reaction_diffusion(const S& lambda) {
  Interval<S> dom(S(-1), S(1));
  PdeSystem<S> p{periodic_bc(dom), PolyMat<S>::constant(Mat<S>{{lambda}}), PolyMat<S>(1, 1),
                 PolyMat<S>::identity(1)};
  return {p, PolyMat<S>::constant(Mat<S>{{S(1) / S(2)}})};
}

// phi = (u, u_t), u_tt = u_xx - 2k u_t - k^2 u on (0, 1), u_x = 0 at both ends.
template <class S>
CatalogEntry<S> neumann_wave(const S& k) {
  Interval<S> dom(S(0), S(1));
  PdeSystem<S> p{neumann_bc(2, dom), PolyMat<S>::constant(Mat<S>{{0, 1}, {-k * k, S(-2) * k}}), PolyMat<S>(2, 2),
                 PolyMat<S>::constant(Mat<S>{{0, 0}, {1, 0}})};
  return {p, std::nullopt};
}

// u_t = u_xx + lambda u on (0, 1), u = 0 at both ends.
template <class S>
CatalogEntry<S> dirichlet_heat(const S& lambda) {
  Interval<S> dom(S(0), S(1));
  PdeSystem<S> p{dirichlet_bc(dom), PolyMat<S>::constant(Mat<S>{{lambda}}), PolyMat<S>(1, 1),
                 PolyMat<S>::identity(1)};
  return {p, std::nullopt};
}

}  // namespace pie
