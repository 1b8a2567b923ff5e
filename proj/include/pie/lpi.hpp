#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pie/convert.hpp"
#include "pie/sdp.hpp"

namespace pie {

// One row of Z; it maps (v0, v1) to a scalar function of x:
//   head:      x^ex v0[comp]
//   pointwise: x^ex v1[comp](x)
//   lower:     int_a^x x^ex theta^et v1[comp](theta) dtheta
//   upper:     int_x^b x^ex theta^et v1[comp](theta) dtheta
enum class RowKind { head, pointwise, lower, upper };

struct ConeRow {
  RowKind kind;
  int comp = 0;
  int ex = 0;
  int et = 0;
};

// P(M) = Z* M Z, which is positive on its whole domain whenever M >= 0.
template <class S>
struct PositiveConeParam {
  int d = 0;
  Dims in;
  Interval<S> dom;
  std::vector<ConeRow> rows;

  int size() const { return static_cast<int>(rows.size()); }
};

// Degrees of each block of Z; -1 leaves the block out. Kernel monomials have
// total degree at most `kernel`.
struct ConeShape {
  int head = -1;
  int pointwise = -1;
  int kernel = -1;
};

template <class S>
PositiveConeParam<S> build_cone(Dims in, const Interval<S>& dom, ConeShape shape, int d) {
  PositiveConeParam<S> c;
  c.d = d;
  c.in = in;
  c.dom = dom;
  for (int k = 0; k <= shape.pointwise; ++k)
    for (int i = 0; i < in.n; ++i) c.rows.push_back({RowKind::pointwise, i, k, 0});
  for (RowKind kind : {RowKind::lower, RowKind::upper})
    for (int deg = 0; deg <= shape.kernel; ++deg)
      for (int ex = deg; ex >= 0; --ex)
        for (int i = 0; i < in.n; ++i) c.rows.push_back({kind, i, ex, deg - ex});
  for (int k = 0; k <= shape.head; ++k)
    for (int i = 0; i < in.m; ++i) c.rows.push_back({RowKind::head, i, k, 0});
  return c;
}

// The Lyapunov cone on L2^n: Z_d(x) (x) I_n and both one-sided integral blocks.
template <class S>
PositiveConeParam<S> build_cone(int d, int n, const Interval<S>& dom) {
  if (d < 0) throw UsageError("cone degree must be nonnegative");
  return build_cone<S>({0, n}, dom, {-1, d, d >= 1 ? d : -1}, d);
}

template <class S>
PiOperator<S> row_operator(const PositiveConeParam<S>& c, const ConeRow& r) {
  PiOperator<S> Z({0, 1}, c.in, c.dom);
  Poly<S> mono = Poly<S>::monomial(r.ex, r.et, S(1));
  switch (r.kind) {
    case RowKind::head: Z.Q2(0, r.comp) = mono; break;
    case RowKind::pointwise: Z.R0(0, r.comp) = mono; break;
    case RowKind::lower: Z.R1(0, r.comp) = mono; break;
    case RowKind::upper: Z.R2(0, r.comp) = mono; break;
  }
  return Z;
}

// Z_i* Z_j + Z_j* Z_i (or Z_i* Z_i on the diagonal): the operator multiplying
// the symmetric entry M_ij.
template <class S>
PiOperator<S> cone_pair(const PositiveConeParam<S>& c, int i, int j) {
  PiOperator<S> zi = row_operator(c, c.rows[i]);
  PiOperator<S> C = compose(adjoint(zi), i == j ? zi : row_operator(c, c.rows[j]));
  if (i != j) C = C + adjoint(C);
  return C.canonical();
}

template <class S>
PiOperator<S> cone_operator(const PositiveConeParam<S>& c, const Mat<S>& M) {
  const int N = c.size();
  if (M.rows() != N || M.cols() != N) throw UsageError("cone_operator: matrix size does not match the cone");
  std::vector<PiOperator<S>> Z;
  for (const auto& r : c.rows) Z.push_back(row_operator(c, r));
  // Z* (M Z) as one composition: stack rows into an operator into L2^N.
  PiOperator<S> stacked({0, N}, c.in, c.dom);
  PiOperator<S> weighted({0, N}, c.in, c.dom);
  for (int i = 0; i < N; ++i) {
    stacked.Q2.set_block(i, 0, Z[i].Q2);
    stacked.R0.set_block(i, 0, Z[i].R0);
    stacked.R1.set_block(i, 0, Z[i].R1);
    stacked.R2.set_block(i, 0, Z[i].R2);
  }
  PolyMat<S> Mp = PolyMat<S>::constant(M);
  weighted.Q2 = Mp * stacked.Q2;
  weighted.R0 = Mp * stacked.R0;
  weighted.R1 = Mp * stacked.R1;
  weighted.R2 = Mp * stacked.R2;
  return compose(adjoint(stacked), weighted).canonical();
}

// Coefficients of the canonical half of a self-adjoint operator on (m, n):
// P and R0 upper triangles, all of Q1 and R1.
enum class Param : std::uint64_t { P = 0, Q1 = 1, R0 = 2, R1 = 3 };

inline std::uint64_t coeff_key(Param p, int i, int j, int ex, int et) {
  return (static_cast<std::uint64_t>(p) << 56) | (static_cast<std::uint64_t>(i) << 44) |
         (static_cast<std::uint64_t>(j) << 32) | (static_cast<std::uint64_t>(ex) << 16) | static_cast<std::uint64_t>(et);
}

inline Param key_param(std::uint64_t k) { return static_cast<Param>(k >> 56); }
inline int key_degree(std::uint64_t k) { return static_cast<int>((k >> 16) & 0xffff) + static_cast<int>(k & 0xffff); }

inline std::string key_name(std::uint64_t k) {
  static const char* names[] = {"P", "Q1", "R0", "R1"};
  std::ostringstream os;
  os << names[k >> 56] << '(' << ((k >> 44) & 0xfff) << ',' << ((k >> 32) & 0xfff) << ") x^" << ((k >> 16) & 0xffff)
     << " theta^" << (k & 0xffff);
  return os.str();
}

template <class F>
void for_each_coeff(const PiOperator<double>& L, F&& f) {
  auto walk = [&](Param p, const PolyMat<double>& M, bool upper) {
    for (int i = 0; i < M.rows(); ++i)
      for (int j = upper ? i : 0; j < M.cols(); ++j)
        for (const auto& t : M(i, j).terms()) f(coeff_key(p, i, j, t.ex, t.et), t.c);
  };
  walk(Param::P, L.P, true);
  walk(Param::Q1, L.Q1, false);
  walk(Param::R0, L.R0, true);
  walk(Param::R1, L.R1, false);
}

class KeyTable {
 public:
  int get(std::uint64_t k) {
    auto [it, fresh] = index_.try_emplace(k, static_cast<int>(keys_.size()));
    if (fresh) keys_.push_back(k);
    return it->second;
  }
  int find(std::uint64_t k) const {
    auto it = index_.find(k);
    return it == index_.end() ? -1 : it->second;
  }
  int size() const { return static_cast<int>(keys_.size()); }
  std::uint64_t key(int i) const { return keys_[i]; }

 private:
  std::unordered_map<std::uint64_t, int> index_;
  std::vector<std::uint64_t> keys_;
};

using SparseVec = std::vector<std::pair<int, double>>;

// Sparse coefficient vector of L, dropping entries below rel_tol * max.
inline SparseVec coefficients(const PiOperator<double>& L, KeyTable& keys, double rel_tol = 1e-12) {
  std::vector<std::pair<std::uint64_t, double>> raw;
  double mx = 0;
  for_each_coeff(L, [&](std::uint64_t k, double v) {
    raw.emplace_back(k, v);
    mx = std::max(mx, std::abs(v));
  });
  SparseVec out;
  for (const auto& [k, v] : raw)
    if (std::abs(v) > rel_tol * mx) out.emplace_back(keys.get(k), v);
  return out;
}

inline void axpy(SparseVec& acc, double a, const SparseVec& x) {
  for (const auto& [k, v] : x) acc.emplace_back(k, a * v);
}

inline SparseVec compress(SparseVec v, double rel_tol = 1e-12) {
  std::sort(v.begin(), v.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  SparseVec out;
  for (const auto& e : v) {
    if (!out.empty() && out.back().first == e.first) out.back().second += e.second;
    else out.push_back(e);
  }
  double mx = 0;
  for (const auto& e : out) mx = std::max(mx, std::abs(e.second));
  SparseVec kept;
  for (const auto& e : out)
    if (std::abs(e.second) > rel_tol * mx) kept.push_back(e);
  return kept;
}

// The stability LPI of a PIE in trajectory form, reduced to coefficient
// matching. Everything here is independent of the rate alpha, which enters
// linearly:
//   A~* P T~ + T~* P A~ + 2 alpha T~* P T~ + X K + K* X* + P2 = 0,
//   P = Z* M_P Z + eps^2 I,  P2 = Z2* M_2 Z2,  M_P, M_2 >= 0,  eps^2 >= 1.
// The problem is homogeneous, so the normalization eps^2 >= 1 loses nothing.
struct LpiProblem {
  int m = 0;
  int n = 0;
  int d = 0;
  int x_degree = 0;
  Interval<double> dom;
  PiOperator<double> T_tilde, A_tilde;
  PiOperator<Rational> K;
  Interval<Rational> dom_exact;
  PositiveConeParam<double> cone;    // Lyapunov operator
  PositiveConeParam<double> cone_n;  // negativity slack, rows on (v0, u, u_x)
  PiOperator<double> slack_map;      // v -> (v0, T~ v, d/dx T~ v)
  PositiveConeParam<double> cone_w;  // pointwise rows weighted by (x - a)(b - x)
  KeyTable keys;
  std::vector<std::pair<int, int>> p_pairs, n_pairs;
  std::vector<SparseVec> p_base, p_rate;  // per M_P entry: alpha-free and alpha coefficients
  SparseVec eps_base, eps_rate;
  std::vector<SparseVec> n_terms;
  std::vector<std::pair<int, int>> w_pairs;
  std::vector<SparseVec> w_terms;
  std::vector<SparseVec> x_terms;
  std::vector<std::string> x_names;
  double assembly_seconds = 0;
};

struct LpiOptions {
  int degree = 3;
  SdpOptions sdp;
};

namespace detail {

// Self-adjoint basis element of L2^n operators for a coefficient key of the
// canonical half.
inline PiOperator<double> unit_self_adjoint(std::uint64_t k, int n, const Interval<double>& dom) {
  PiOperator<double> E({0, n}, {0, n}, dom);
  const int i = static_cast<int>((k >> 44) & 0xfff);
  const int j = static_cast<int>((k >> 32) & 0xfff);
  const int ex = static_cast<int>((k >> 16) & 0xffff);
  const int et = static_cast<int>(k & 0xffff);
  switch (key_param(k)) {
    case Param::R0:
      E.R0(i, j) = Poly<double>::monomial(ex, 0, 1.0);
      E.R0(j, i) = Poly<double>::monomial(ex, 0, 1.0);
      break;
    case Param::R1:
      E.R1(i, j) = Poly<double>::monomial(ex, et, 1.0);
      E.R2(j, i) = Poly<double>::monomial(et, ex, 1.0);
      break;
    default: throw ConstructionError("Lyapunov cone produced a finite-dimensional part");
  }
  return E;
}

}  // namespace detail

inline LpiProblem assemble(const PieSystem<Rational>& sys, const TrajectoryOperator<Rational>& traj, int d,
                           int slack_degree = -1) {
  if (d < 1) throw UsageError("LPI degree d must be at least 1");
  auto t0 = std::chrono::steady_clock::now();
  LpiProblem L;
  const auto& M = sys.maps;
  L.m = M.m;
  L.n = M.n;
  L.d = d;
  L.x_degree = 2 * d + 2;
  L.dom = M.dom.cast<double>();
  L.dom_exact = M.dom;
  L.T_tilde = traj.T_tilde.cast<double>().canonical();
  L.A_tilde = traj.A_tilde.cast<double>().canonical();
  L.K = sys.K;
  const int n = L.n;
  const int m = L.m;
  const PiOperator<double> Kd = sys.K.cast<double>();

  L.cone = build_cone<double>(d, n, L.dom);
  const int NP = L.cone.size();

  // Lyapunov pairs expressed in a basis of self-adjoint PI parameters.
  KeyTable pkeys;
  std::vector<SparseVec> pair_params;
  for (int i = 0; i < NP; ++i)
    for (int j = i; j < NP; ++j) {
      L.p_pairs.emplace_back(i, j);
      pair_params.push_back(coefficients(cone_pair(L.cone, i, j), pkeys));
    }
  for (int i = 0; i < n; ++i) pkeys.get(coeff_key(Param::R0, i, i, 0, 0));

  // Q(E) for each basis element E, split into the alpha-free and alpha parts.
  const PiOperator<double> At_adj = adjoint(L.A_tilde);
  const PiOperator<double> Tt_adj = adjoint(L.T_tilde);
  std::vector<SparseVec> q_base(pkeys.size()), q_rate(pkeys.size());
  for (int e = 0; e < pkeys.size(); ++e) {
    PiOperator<double> E = detail::unit_self_adjoint(pkeys.key(e), n, L.dom);
    PiOperator<double> ET = compose(E, L.T_tilde);
    PiOperator<double> C = compose(At_adj, ET);
    q_base[e] = coefficients((C + adjoint(C)).canonical(), L.keys);
    q_rate[e] = coefficients((compose(Tt_adj, ET) * 2.0).canonical(), L.keys);
  }
  for (const auto& pp : pair_params) {
    SparseVec b, r;
    for (const auto& [e, c] : pp) {
      axpy(b, c, q_base[e]);
      axpy(r, c, q_rate[e]);
    }
    L.p_base.push_back(compress(std::move(b)));
    L.p_rate.push_back(compress(std::move(r)));
  }
  for (int i = 0; i < n; ++i) {
    int e = pkeys.find(coeff_key(Param::R0, i, i, 0, 0));
    axpy(L.eps_base, 1.0, q_base[e]);
    axpy(L.eps_rate, 1.0, q_rate[e]);
  }
  L.eps_base = compress(std::move(L.eps_base));
  L.eps_rate = compress(std::move(L.eps_rate));

  // Slack cone: rows act on w = (v0, T~ v, d/dx T~ v) = (v0, u, u_x). Rows acting on
  // v itself would contain boundary values of u_x, which the Lyapunov
  // derivative does not control, and the feasible set would have no interior.
  bool finite = false;
  for (int k = 0; k < L.keys.size(); ++k) {
    Param p = key_param(L.keys.key(k));
    if (p == Param::P || p == Param::Q1) finite = true;
  }
  const int d2 = slack_degree >= 0 ? slack_degree : d + 1;
  ConeShape shape{finite && m > 0 ? d2 : -1, d2, d2};
  L.cone_n = build_cone<double>({m, 2 * n}, L.dom, shape, d2);
  PiOperator<double> B({m, 2 * n}, {m, n}, L.dom);
  B.P = PolyMat<double>::identity(m);
  {
    const PiOperator<double> Td = L.T_tilde;
    const PiOperator<double> Rd = derivative(L.T_tilde).canonical();
    B.Q2.set_block(0, 0, Td.Q2);
    B.Q2.set_block(n, 0, Rd.Q2);
    B.R0.set_block(0, 0, Td.R0);
    B.R0.set_block(n, 0, Rd.R0);
    B.R1.set_block(0, 0, Td.R1);
    B.R1.set_block(n, 0, Rd.R1);
    B.R2.set_block(0, 0, Td.R2);
    B.R2.set_block(n, 0, Rd.R2);
  }
  L.slack_map = B;
  std::vector<PiOperator<double>> Y, Yadj;
  for (const auto& r : L.cone_n.rows) {
    Y.push_back(compose(row_operator(L.cone_n, r), B).canonical());
    Yadj.push_back(adjoint(Y.back()));
  }
  const int NN = L.cone_n.size();
  for (int i = 0; i < NN; ++i)
    for (int j = i; j < NN; ++j) {
      PiOperator<double> C = compose(Yadj[i], Y[j]);
      if (i != j) C = C + adjoint(C);
      L.n_pairs.emplace_back(i, j);
      L.n_terms.push_back(coefficients(C.canonical(), L.keys));
    }
  // Pointwise terms only need to be nonnegative on [a, b], not on the whole
  // line: a second Gram block weighted by (x - a)(b - x).
  L.cone_w = build_cone<double>({0, 2 * n}, L.dom, {-1, d2, -1}, d2);
  {
    Poly<double> xv = Poly<double>::monomial(1, 0, 1.0);
    Poly<double> w = (xv - Poly<double>(L.dom.a)) * (Poly<double>(L.dom.b) - xv);
    PiOperator<double> Wm = PiOperator<double>::multiplier(PolyMat<double>::scaled_identity(1, w), L.dom);
    std::vector<PiOperator<double>> Yw, Ywadj;
    PiOperator<double> Bf = select_rows(B, 0, 0, 0, 2 * n);
    for (const auto& r : L.cone_w.rows) {
      Yw.push_back(compose(row_operator(L.cone_w, r), Bf).canonical());
      Ywadj.push_back(adjoint(Yw.back()));
    }
    for (int i = 0; i < L.cone_w.size(); ++i)
      for (int j = i; j < L.cone_w.size(); ++j) {
        PiOperator<double> C = compose(Ywadj[i], compose(Wm, Yw[j]));
        if (i != j) C = C + adjoint(C);
        L.w_pairs.emplace_back(i, j);
        L.w_terms.push_back(coefficients(C.canonical(), L.keys));
      }
  }

  // Slack X = [P_X; Q2_X(x)] on R^m, entering as X K + K* X*.
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      PiOperator<double> X({m, n}, {m, 0}, L.dom);
      X.P(i, j) = Poly<double>(1.0);
      PiOperator<double> C = compose(X, Kd);
      L.x_terms.push_back(coefficients((C + adjoint(C)).canonical(), L.keys));
      L.x_names.push_back("P(" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k <= L.x_degree; ++k) {
        PiOperator<double> X({m, n}, {m, 0}, L.dom);
        X.Q2(i, j) = Poly<double>::monomial(k, 0, 1.0);
        PiOperator<double> C = compose(X, Kd);
        L.x_terms.push_back(coefficients((C + adjoint(C)).canonical(), L.keys));
        L.x_names.push_back("Q2(" + std::to_string(i) + "," + std::to_string(j) + ") x^" + std::to_string(k));
      }

  // Degree bookkeeping: the slack terms must reach the degree of every
  // coefficient the Lyapunov part can produce.
  int slack_deg = 0;
  for (const auto* terms : {&L.n_terms, &L.w_terms, &L.x_terms})
    for (const auto& t : *terms)
      for (const auto& e : t) slack_deg = std::max(slack_deg, key_degree(L.keys.key(e.first)));
  auto check = [&](const SparseVec& v) {
    for (const auto& e : v)
      if (key_degree(L.keys.key(e.first)) > slack_deg)
        throw ConstructionError("LPI coefficient " + key_name(L.keys.key(e.first)) +
                                " exceeds the cone degree capacity; increase the degree d");
  };
  for (const auto& v : L.p_base) check(v);
  for (const auto& v : L.p_rate) check(v);
  check(L.eps_base);
  check(L.eps_rate);
  L.assembly_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return L;
}

// Blocks: 0 = M_P, 1 = M_2, 2 = weighted M_2, 3 = eps^2 - 1; free variables = slack X.
inline SdpProblem build_sdp(const LpiProblem& L, double alpha) {
  if (alpha < 0) throw UsageError("decay rate alpha must be nonnegative");
  SdpProblem p;
  p.blocks = {L.cone.size(), std::max(1, L.cone_n.size()), std::max(1, L.cone_w.size()), 1};
  p.num_free = static_cast<int>(L.x_terms.size());
  p.constraints.resize(L.keys.size());
  auto add = [&](const SparseVec& v, double s, int block, int i, int j) {
    for (const auto& [k, c] : v) p.constraints[k].terms.push_back({block, i, j, s * c});
  };
  for (std::size_t q = 0; q < L.p_pairs.size(); ++q) {
    auto [i, j] = L.p_pairs[q];
    add(L.p_base[q], 1.0, 0, i, j);
    if (alpha != 0) add(L.p_rate[q], alpha, 0, i, j);
  }
  for (std::size_t q = 0; q < L.n_pairs.size(); ++q) add(L.n_terms[q], 1.0, 1, L.n_pairs[q].first, L.n_pairs[q].second);
  for (std::size_t q = 0; q < L.w_pairs.size(); ++q) add(L.w_terms[q], 1.0, 2, L.w_pairs[q].first, L.w_pairs[q].second);
  for (std::size_t q = 0; q < L.x_terms.size(); ++q) add(L.x_terms[q], 1.0, -1, static_cast<int>(q), 0);
  add(L.eps_base, 1.0, 3, 0, 0);
  if (alpha != 0) add(L.eps_rate, alpha, 3, 0, 0);
  for (const auto& [k, c] : L.eps_base) p.constraints[k].rhs -= c;
  if (alpha != 0)
    for (const auto& [k, c] : L.eps_rate) p.constraints[k].rhs -= alpha * c;
  // Merge duplicate entries so the dump stays canonical.
  for (auto& con : p.constraints) {
    std::sort(con.terms.begin(), con.terms.end(), [](const SdpEntry& l, const SdpEntry& r) {
      return std::tie(l.block, l.i, l.j) < std::tie(r.block, r.i, r.j);
    });
    std::vector<SdpEntry> merged;
    for (const auto& e : con.terms) {
      if (!merged.empty() && merged.back().block == e.block && merged.back().i == e.i && merged.back().j == e.j)
        merged.back().v += e.v;
      else merged.push_back(e);
    }
    con.terms = std::move(merged);
  }
  return p;
}

struct Certificate {
  double alpha = 0;
  double eps2 = 0;
  Eigen::MatrixXd M_P;
  Eigen::MatrixXd M_slack;
  Eigen::MatrixXd M_weighted;
  Eigen::VectorXd X_params;
  double mp_min_eig = 0;
  double slack_min_eig = 0;
  double residual = 0;
  int iterations = 0;
  double seconds = 0;
};

struct StabilityResult {
  SdpStatus status = SdpStatus::indeterminate;
  std::optional<Certificate> certificate;
  double farkas_violation = 0;
  std::string message;
};

// Coefficient-matching residual recomputed from the assembled terms,
// independently of the solver: max |LHS coefficient| / (1 + max |variable|).
inline double matching_residual(const LpiProblem& L, const Certificate& c) {
  if (c.M_P.rows() != L.cone.size() || c.M_slack.rows() != L.cone_n.size() ||
      c.M_weighted.rows() != L.cone_w.size() || c.X_params.size() != static_cast<long>(L.x_terms.size()))
    throw UsageError("certificate does not match the problem's dimensions");
  std::vector<double> r(L.keys.size(), 0.0);
  auto add = [&](const SparseVec& v, double s) {
    for (const auto& [k, x] : v) r[k] += s * x;
  };
  double scale = std::max({c.M_P.cwiseAbs().maxCoeff(), c.M_slack.size() ? c.M_slack.cwiseAbs().maxCoeff() : 0.0,
                           c.M_weighted.size() ? c.M_weighted.cwiseAbs().maxCoeff() : 0.0, c.eps2});
  if (c.X_params.size()) scale = std::max(scale, c.X_params.cwiseAbs().maxCoeff());
  for (std::size_t q = 0; q < L.p_pairs.size(); ++q) {
    double v = c.M_P(L.p_pairs[q].first, L.p_pairs[q].second);
    add(L.p_base[q], v);
    add(L.p_rate[q], c.alpha * v);
  }
  for (std::size_t q = 0; q < L.n_pairs.size(); ++q) add(L.n_terms[q], c.M_slack(L.n_pairs[q].first, L.n_pairs[q].second));
  for (std::size_t q = 0; q < L.w_pairs.size(); ++q)
    add(L.w_terms[q], c.M_weighted(L.w_pairs[q].first, L.w_pairs[q].second));
  for (std::size_t q = 0; q < L.x_terms.size(); ++q) add(L.x_terms[q], c.X_params(q));
  add(L.eps_base, c.eps2);
  add(L.eps_rate, c.alpha * c.eps2);
  double mx = 0;
  for (double v : r) mx = std::max(mx, std::abs(v));
  return mx / (1 + scale);
}

inline StabilityResult check_stability(const LpiProblem& L, double alpha, const SdpOptions& opt = {}) {
  auto t0 = std::chrono::steady_clock::now();
  SdpSolution sol = solve_sdp(build_sdp(L, alpha), opt);
  StabilityResult res;
  res.status = sol.status;
  res.message = sol.message;
  res.farkas_violation = sol.farkas_violation;
  if (sol.status != SdpStatus::feasible) return res;
  Certificate c;
  c.alpha = alpha;
  c.M_P = sol.X[0];
  c.M_slack = L.cone_n.size() ? sol.X[1] : Eigen::MatrixXd(0, 0);
  c.M_weighted = L.cone_w.size() ? sol.X[2] : Eigen::MatrixXd(0, 0);
  c.eps2 = 1.0 + sol.X[3](0, 0);
  c.X_params = sol.free;
  c.mp_min_eig = detail::min_eig(c.M_P);
  c.slack_min_eig = std::min(L.cone_n.size() ? detail::min_eig(c.M_slack) : 0.0,
                             L.cone_w.size() ? detail::min_eig(c.M_weighted) : 0.0);
  c.residual = matching_residual(L, c);
  c.iterations = sol.iterations;
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double psd_tol = 1e-9 * std::max(1.0, c.M_P.cwiseAbs().maxCoeff());
  if (c.residual >= 1e-7 || c.mp_min_eig < -psd_tol || c.slack_min_eig < -psd_tol || c.eps2 < 1.0) {
    res.status = SdpStatus::indeterminate;
    res.message = "solution failed independent validation";
    return res;
  }
  res.certificate = c;
  return res;
}

struct RateSearch {
  std::optional<double> alpha;  // empty when not certifiable at alpha = 0
  std::optional<Certificate> certificate;
  std::vector<std::pair<double, SdpStatus>> history;
  double seconds = 0;
};

// Largest certified alpha in [0, alpha_hi] by bisection.
inline RateSearch max_decay_rate(const LpiProblem& L, double alpha_hi, double tol = 1e-3, int max_iters = 30,
                                 const SdpOptions& opt = {}) {
  if (!(tol > 0)) throw UsageError("bisection tolerance must be positive");
  auto t0 = std::chrono::steady_clock::now();
  RateSearch out;
  auto probe = [&](double a) {
    StabilityResult r = check_stability(L, a, opt);
    out.history.emplace_back(a, r.status);
    if (r.certificate) out.certificate = r.certificate;
    return r.certificate.has_value();
  };
  if (probe(0.0)) {
    double lo = 0, hi = std::max(alpha_hi, 0.0);
    if (probe(hi)) {
      lo = hi;
    } else {
      for (int it = 0; it < max_iters && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        if (probe(mid)) lo = mid;
        else hi = mid;
      }
    }
    out.alpha = lo;
    // Keep the certificate of the reported rate.
    if (out.certificate && out.certificate->alpha != lo) probe(lo);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// Random fundamental state with K v = 0 enforced exactly.
template <class Rng>
MixedVector<Rational> sample_y(Rng& rng, const PiOperator<Rational>& K, Dims d, int deg = 4) {
  std::uniform_int_distribution<int> coef(-4, 4);
  std::uniform_int_distribution<int> den(1, 3);
  Mat<Rational> v0(d.m, 1);
  for (int i = 0; i < d.m; ++i) v0(i, 0) = Rational(coef(rng), den(rng));
  PolyMat<Rational> v1(d.n, 1);
  for (int i = 0; i < d.n; ++i)
    for (int k = 0; k <= deg; ++k) v1(i, 0) += Poly<Rational>::monomial(k, 0, Rational(coef(rng), den(rng)));
  MixedVector<Rational> v(v0, v1);
  if (K.out.m == 0) return v;
  std::vector<PolyMat<Rational>> basis;
  for (int c = 0; c < d.n; ++c)
    for (int k = 0; k <= 2; ++k) {
      PolyMat<Rational> e(d.n, 1);
      e(c, 0) = Poly<Rational>::monomial(k, 0, Rational(1));
      basis.push_back(e);
    }
  Mat<Rational> A(K.out.m, static_cast<int>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k)
    A.set_block(0, static_cast<int>(k), apply(K, MixedVector<Rational>(Mat<Rational>(d.m, 1), basis[k])).v0);
  Mat<Rational> rhs = apply(K, v).v0 * Rational(-1);
  auto gj = gauss_jordan(A, numerical_rank(A));
  Mat<Rational> y = gj.J * rhs;
  Mat<Rational> c(A.cols(), 1);
  for (std::size_t k = 0; k < gj.pivots.size(); ++k) c(gj.pivots[k], 0) = y(static_cast<int>(k), 0);
  if (!(A * c == rhs)) throw ConstructionError("sample_y: constraint cannot be met with low-degree corrections");
  for (std::size_t k = 0; k < basis.size(); ++k) v.v1 += basis[k] * c(static_cast<int>(k), 0);
  return v;
}

// A~* P T~ + T~* P A~ + 2 alpha T~* P T~ for the certificate's P.
inline PiOperator<double> lyapunov_derivative(const LpiProblem& L, const Certificate& c) {
  Mat<double> M(c.M_P.rows(), c.M_P.cols());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) M(i, j) = c.M_P(i, j);
  PiOperator<double> P = cone_operator(L.cone, M) + PiOperator<double>::identity({0, L.n}, L.dom) * c.eps2;
  PiOperator<double> PT = compose(P, L.T_tilde);
  PiOperator<double> C = compose(adjoint(L.A_tilde), PT);
  return (C + adjoint(C) + compose(adjoint(L.T_tilde), PT) * (2 * c.alpha)).canonical();
}

inline double inner_product(const MixedVector<double>& u, const MixedVector<double>& v, const Interval<double>& dom) {
  double r = 0;
  for (int i = 0; i < u.v0.rows(); ++i) r += u.v0(i, 0) * v.v0(i, 0);
  PolyMat<double> f = u.v1.transpose() * v.v1;
  return r + f.integrate(Var::x, dom.a, dom.b).constant_value()(0, 0);
}

// Largest sampled <v, LHS v> / (|v|^2 (1 + max |M_P|)) over members of Y.
inline double sampled_derivative(const LpiProblem& L, const Certificate& c, int samples = 50, unsigned seed = 1) {
  std::mt19937 rng(seed);
  PiOperator<double> D = lyapunov_derivative(L, c);
  const double scale = 1 + std::max(c.M_P.cwiseAbs().maxCoeff(), c.eps2);
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    MixedVector<Rational> ve = sample_y(rng, L.K, {L.m, L.n});
    MixedVector<double> v(ve.v0.cast<double>(), ve.v1.cast<double>());
    double q = inner_product(v, apply(D, v), L.dom);
    worst = std::max(worst, q / (inner_product(v, v, L.dom) * scale));
  }
  return worst;
}

inline std::string certificate_text(const Certificate& c) {
  std::ostringstream os;
  os.precision(17);
  os << "certificate\n";
  os << "alpha " << c.alpha << '\n';
  os << "eps2 " << c.eps2 << '\n';
  os << "mp_min_eig " << c.mp_min_eig << '\n';
  os << "slack_min_eig " << c.slack_min_eig << '\n';
  os << "residual " << c.residual << '\n';
  auto matrix = [&](const char* name, const Eigen::MatrixXd& M) {
    os << name << ' ' << M.rows() << '\n';
    for (int i = 0; i < M.rows(); ++i) {
      for (int j = 0; j < M.cols(); ++j) os << (j ? " " : "") << M(i, j);
      os << '\n';
    }
  };
  matrix("M_P", c.M_P);
  matrix("M_slack", c.M_slack);
  matrix("M_weighted", c.M_weighted);
  os << "X " << c.X_params.size() << '\n';
  for (int i = 0; i < c.X_params.size(); ++i) os << c.X_params(i) << '\n';
  os << "end\n";
  return os.str();
}

inline Certificate parse_certificate(std::istream& in) {
  Certificate c;
  std::string tag;
  auto expect = [&](const char* name) {
    if (!(in >> tag) || tag != name) throw UsageError(std::string("certificate: expected ") + name);
  };
  expect("certificate");
  expect("alpha");
  in >> c.alpha;
  expect("eps2");
  in >> c.eps2;
  expect("mp_min_eig");
  in >> c.mp_min_eig;
  expect("slack_min_eig");
  in >> c.slack_min_eig;
  expect("residual");
  in >> c.residual;
  int N = 0;
  auto matrix = [&](const char* name, Eigen::MatrixXd& M) {
    expect(name);
    if (!(in >> N) || N < 0) throw UsageError(std::string("certificate: bad size for ") + name);
    M.resize(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) in >> M(i, j);
  };
  matrix("M_P", c.M_P);
  matrix("M_slack", c.M_slack);
  matrix("M_weighted", c.M_weighted);
  expect("X");
  in >> N;
  c.X_params.resize(N);
  for (int i = 0; i < N; ++i) in >> c.X_params(i);
  expect("end");
  if (!in) throw UsageError("certificate: malformed numbers");
  return c;
}

}  // namespace pie
