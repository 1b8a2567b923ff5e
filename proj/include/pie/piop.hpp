#pragma once

#include <string>
#include <vector>

#include "pie/polymat.hpp"

namespace pie {

// Dimensions of R^m x L2^n.
struct Dims {
  int m = 0;
  int n = 0;
  bool operator==(const Dims& o) const { return m == o.m && n == o.n; }
};

inline std::string to_string(const Dims& d) {
  return "(" + std::to_string(d.m) + "," + std::to_string(d.n) + ")";
}

// Element of R^m x L2^n with polynomial function part.
template <class S>
struct MixedVector {
  Mat<S> v0;       // m x 1
  PolyMat<S> v1;   // n x 1, in x

  MixedVector() = default;
  MixedVector(Mat<S> a, PolyMat<S> f) : v0(std::move(a)), v1(std::move(f)) {
    if (v0.cols() != 1 || v1.cols() != 1) throw UsageError("mixed vector parts must be columns");
  }
  Dims dims() const { return {v0.rows(), v1.rows()}; }
};

// Bounded operator from R^p x L2^q to R^m x L2^n:
//   (A v)_0   = P v0 + int_a^b Q1(s) v1(s) ds
//   (A v)_1(x) = Q2(x) v0 + R0(x) v1(x) + int_a^x R1(x,t) v1(t) dt + int_x^b R2(x,t) v1(t) dt
// The kernels are stored split by region: R1 acts on t < x, R2 on t > x.
template <class S>
struct PiOperator {
  Dims out;
  Dims in;
  Interval<S> dom;
  PolyMat<S> P;   // m x p, constant
  PolyMat<S> Q1;  // m x q, in x
  PolyMat<S> Q2;  // n x p, in x
  PolyMat<S> R0;  // n x q, in x
  PolyMat<S> R1;  // n x q, in (x, theta)
  PolyMat<S> R2;  // n x q, in (x, theta)

  PiOperator() = default;
  PiOperator(Dims o, Dims i, Interval<S> d)
      : out(o), in(i), dom(std::move(d)), P(o.m, i.m), Q1(o.m, i.n), Q2(o.n, i.m), R0(o.n, i.n), R1(o.n, i.n),
        R2(o.n, i.n) {}

  static PiOperator zero(Dims o, Dims i, const Interval<S>& d) { return PiOperator(o, i, d); }
  static PiOperator identity(Dims d, const Interval<S>& dom) {
    PiOperator r(d, d, dom);
    r.P = PolyMat<S>::identity(d.m);
    r.R0 = PolyMat<S>::identity(d.n);
    return r;
  }
  // Pointwise multiplication by M(x) on L2^q -> L2^n.
  static PiOperator multiplier(const PolyMat<S>& M, const Interval<S>& dom) {
    if (M.has_theta()) throw UsageError("multiplier must not depend on theta");
    PiOperator r({0, M.rows()}, {0, M.cols()}, dom);
    r.R0 = M;
    return r;
  }
  // Integral kernel operator with one kernel on each side of the diagonal.
  static PiOperator integral(const PolyMat<S>& lower, const PolyMat<S>& upper, const Interval<S>& dom) {
    if (lower.rows() != upper.rows() || lower.cols() != upper.cols()) throw UsageError("kernel size mismatch");
    PiOperator r({0, lower.rows()}, {0, lower.cols()}, dom);
    r.R1 = lower;
    r.R2 = upper;
    return r;
  }
  // Builds from the form int_a^x K1 + int_a^b K2 (K2 acts on the whole interval).
  static PiOperator from_full_range(const PolyMat<S>& K1, const PolyMat<S>& K2, const Interval<S>& dom) {
    return integral(K1 + K2, K2, dom);
  }

  void validate() const {
    auto chk = [](const PolyMat<S>& M, int r, int c, const char* name) {
      if (M.rows() != r || M.cols() != c)
        throw UsageError(std::string("operator block ") + name + " has size " + std::to_string(M.rows()) + "x" +
                         std::to_string(M.cols()) + ", expected " + std::to_string(r) + "x" + std::to_string(c));
    };
    chk(P, out.m, in.m, "P");
    chk(Q1, out.m, in.n, "Q1");
    chk(Q2, out.n, in.m, "Q2");
    chk(R0, out.n, in.n, "R0");
    chk(R1, out.n, in.n, "R1");
    chk(R2, out.n, in.n, "R2");
    if (P.has_x() || P.has_theta()) throw UsageError("P block must be constant");
    if (Q1.has_theta() || Q2.has_theta() || R0.has_theta())
      throw UsageError("Q1, Q2, R0 must not depend on theta");
  }

  int degree() const {
    return std::max({P.degree(), Q1.degree(), Q2.degree(), R0.degree(), R1.degree(), R2.degree()});
  }

  PiOperator operator+(const PiOperator& o) const {
    check_same(o);
    PiOperator r = *this;
    r.P += o.P;
    r.Q1 += o.Q1;
    r.Q2 += o.Q2;
    r.R0 += o.R0;
    r.R1 += o.R1;
    r.R2 += o.R2;
    return r;
  }
  PiOperator operator-(const PiOperator& o) const { return *this + o * S(-1); }
  PiOperator operator*(const S& s) const {
    PiOperator r = *this;
    r.P = P * s;
    r.Q1 = Q1 * s;
    r.Q2 = Q2 * s;
    r.R0 = R0 * s;
    r.R1 = R1 * s;
    r.R2 = R2 * s;
    return r;
  }
  bool operator==(const PiOperator& o) const {
    return out == o.out && in == o.in && dom == o.dom && P == o.P && Q1 == o.Q1 && Q2 == o.Q2 && R0 == o.R0 &&
           R1 == o.R1 && R2 == o.R2;
  }

  PiOperator canonical() const {
    PiOperator r = *this;
    r.P = P.canonical();
    r.Q1 = Q1.canonical();
    r.Q2 = Q2.canonical();
    r.R0 = R0.canonical();
    r.R1 = R1.canonical();
    r.R2 = R2.canonical();
    return r;
  }

  bool is_zero() const {
    return P.is_zero() && Q1.is_zero() && Q2.is_zero() && R0.is_zero() && R1.is_zero() && R2.is_zero();
  }

  double max_abs() const {
    return std::max({P.max_abs(), Q1.max_abs(), Q2.max_abs(), R0.max_abs(), R1.max_abs(), R2.max_abs()});
  }

  template <class T>
  PiOperator<T> cast() const {
    PiOperator<T> r(out, in, dom.template cast<T>());
    r.P = P.template cast<T>();
    r.Q1 = Q1.template cast<T>();
    r.Q2 = Q2.template cast<T>();
    r.R0 = R0.template cast<T>();
    r.R1 = R1.template cast<T>();
    r.R2 = R2.template cast<T>();
    return r;
  }

 private:
  void check_same(const PiOperator& o) const {
    if (!(out == o.out) || !(in == o.in))
      throw UsageError("operator dimensions differ: " + to_string(out) + "x" + to_string(in) + " vs " +
                       to_string(o.out) + "x" + to_string(o.in));
    if (!(dom == o.dom)) throw UsageError("operators on different intervals");
  }
};

template <class S>
PiOperator<S> operator*(const S& s, const PiOperator<S>& A) {
  return A * s;
}

template <class S>
MixedVector<S> apply(const PiOperator<S>& A, const MixedVector<S>& v) {
  if (!(v.dims() == A.in))
    throw UsageError("apply: vector in " + to_string(v.dims()) + " but operator expects " + to_string(A.in));
  const S& a = A.dom.a;
  const S& b = A.dom.b;
  if (v.v1.has_theta()) throw UsageError("apply: function part must depend on x only");
  PolyMat<S> f_theta = v.v1.x_to_theta();
  PolyMat<S> head = (A.Q1 * v.v1).integrate(Var::x, a, b);
  Mat<S> out0 = A.P.constant_value() * v.v0;
  if (out0.rows() > 0) out0 = out0 + head.constant_value();
  PolyMat<S> out1 = A.Q2 * v.v0 + A.R0 * v.v1 +
                    (A.R1 * f_theta).integrate(Var::theta, Bound<S>::at(a), Bound<S>::x()) +
                    (A.R2 * f_theta).integrate(Var::theta, Bound<S>::x(), Bound<S>::at(b));
  return MixedVector<S>(out0, out1);
}

template <class S>
PiOperator<S> adjoint(const PiOperator<S>& A) {
  PiOperator<S> r(A.in, A.out, A.dom);
  r.P = A.P.transpose();
  r.Q1 = A.Q2.transpose();
  r.Q2 = A.Q1.transpose();
  r.R0 = A.R0.transpose();
  r.R1 = A.R2.swap_vars().transpose();
  r.R2 = A.R1.swap_vars().transpose();
  return r;
}

// Composition A o B.
template <class S>
PiOperator<S> compose(const PiOperator<S>& A, const PiOperator<S>& B) {
  if (!(A.in == B.out))
    throw UsageError("compose: left operator accepts " + to_string(A.in) + " but right produces " +
                     to_string(B.out));
  if (!(A.dom == B.dom)) throw UsageError("compose: operators on different intervals");
  using MB = MidBound<S>;
  const MB a = MB::at(A.dom.a);
  const MB b = MB::at(A.dom.b);
  const MB X = MB::x();
  const MB T = MB::theta();

  // Functions of one variable moved into the integration slot.
  const PolyMat<S> Q1A_s = A.Q1.x_to_theta();  // Q1_A(s) as A(x, s)
  const PolyMat<S> Q1B_t = B.Q1.x_to_theta();  // Q1_B(t)
  const PolyMat<S> R0B_t = B.R0.x_to_theta();  // R0_B(t)

  PiOperator<S> C(A.out, B.in, A.dom);
  C.P = A.P * B.P + integrate_product(Q1A_s, B.Q2, a, b);

  // Q1_C is a function of the right variable; computed in theta and renamed.
  PolyMat<S> q1 = (A.P * Q1B_t) + Q1A_s * R0B_t +
                  integrate_product(Q1A_s, B.R1, T, b) + integrate_product(Q1A_s, B.R2, a, T);
  C.Q1 = q1.theta_to_x();

  C.Q2 = A.Q2 * B.P + A.R0 * B.Q2 + integrate_product(A.R1, B.Q2, a, X) + integrate_product(A.R2, B.Q2, X, b);
  C.R0 = A.R0 * B.R0;

  const PolyMat<S> sep = A.Q2 * Q1B_t;
  C.R1 = sep + A.R0 * B.R1 + A.R1 * R0B_t + integrate_product(A.R1, B.R1, T, X) +
         integrate_product(A.R1, B.R2, a, T) + integrate_product(A.R2, B.R1, X, b);
  C.R2 = sep + A.R0 * B.R2 + A.R2 * R0B_t + integrate_product(A.R1, B.R2, a, X) +
         integrate_product(A.R2, B.R1, T, b) + integrate_product(A.R2, B.R2, X, T);
  return C;
}

// d/dx of an operator into L2^n without multiplier part.
template <class S>
PiOperator<S> derivative(const PiOperator<S>& A) {
  if (A.out.m != 0 || !A.R0.is_zero()) throw UsageError("derivative: operator must map into L2^n with R0 = 0");
  PiOperator<S> D(A.out, A.in, A.dom);
  D.Q2 = A.Q2.diff(Var::x);
  D.R0 = A.R1.on_diagonal() - A.R2.on_diagonal();
  D.R1 = A.R1.diff(Var::x);
  D.R2 = A.R2.diff(Var::x);
  return D;
}

// [U; L]: U maps into R^m x {}, L into {} x L2^n, both with the same input.
template <class S>
PiOperator<S> stack_rows(const PiOperator<S>& U, const PiOperator<S>& L) {
  if (U.out.n != 0 || L.out.m != 0) throw UsageError("stack_rows: top must be finite, bottom functional");
  if (!(U.in == L.in)) throw UsageError("stack_rows: input dimensions differ");
  PiOperator<S> r({U.out.m, L.out.n}, U.in, U.dom);
  r.P = U.P;
  r.Q1 = U.Q1;
  r.Q2 = L.Q2;
  r.R0 = L.R0;
  r.R1 = L.R1;
  r.R2 = L.R2;
  return r;
}

// General block concatenation of outputs: [A; B] mapping into
// R^{mA+mB} x L2^{nA+nB} with finite parts first.
template <class S>
PiOperator<S> vconcat(const PiOperator<S>& A, const PiOperator<S>& B) {
  if (!(A.in == B.in)) throw UsageError("vconcat: input dimensions differ");
  PiOperator<S> r({A.out.m + B.out.m, A.out.n + B.out.n}, A.in, A.dom);
  r.P = vstack(A.P, B.P);
  r.Q1 = vstack(A.Q1, B.Q1);
  r.Q2 = vstack(A.Q2, B.Q2);
  r.R0 = vstack(A.R0, B.R0);
  r.R1 = vstack(A.R1, B.R1);
  r.R2 = vstack(A.R2, B.R2);
  return r;
}

// Restriction to a subset of output rows: finite rows [m0, m0+mc), function rows [n0, n0+nc).
template <class S>
PiOperator<S> select_rows(const PiOperator<S>& A, int m0, int mc, int n0, int nc) {
  PiOperator<S> r({mc, nc}, A.in, A.dom);
  r.P = A.P.block(m0, 0, mc, A.in.m);
  r.Q1 = A.Q1.block(m0, 0, mc, A.in.n);
  r.Q2 = A.Q2.block(n0, 0, nc, A.in.m);
  r.R0 = A.R0.block(n0, 0, nc, A.in.n);
  r.R1 = A.R1.block(n0, 0, nc, A.in.n);
  r.R2 = A.R2.block(n0, 0, nc, A.in.n);
  return r;
}

// Restriction to a subset of input columns.
template <class S>
PiOperator<S> select_cols(const PiOperator<S>& A, int m0, int mc, int n0, int nc) {
  PiOperator<S> r(A.out, {mc, nc}, A.dom);
  r.P = A.P.block(0, m0, A.out.m, mc);
  r.Q1 = A.Q1.block(0, n0, A.out.m, nc);
  r.Q2 = A.Q2.block(0, m0, A.out.n, mc);
  r.R0 = A.R0.block(0, n0, A.out.n, nc);
  r.R1 = A.R1.block(0, n0, A.out.n, nc);
  r.R2 = A.R2.block(0, n0, A.out.n, nc);
  return r;
}

template <class S>
bool is_self_adjoint(const PiOperator<S>& A) {
  if (!(A.in == A.out)) return false;
  return (A - adjoint(A)).canonical().is_zero();
}

template <class S>
std::string to_text(const PiOperator<S>& A) {
  std::ostringstream os;
  os << "operator " << A.out.m << ' ' << A.out.n << ' ' << A.in.m << ' ' << A.in.n << '\n';
  os << "interval " << format_scalar(A.dom.a) << ' ' << format_scalar(A.dom.b) << '\n';
  const std::pair<const char*, const PolyMat<S>*> blocks[] = {{"P", &A.P},   {"Q1", &A.Q1}, {"Q2", &A.Q2},
                                                               {"R0", &A.R0}, {"R1", &A.R1}, {"R2", &A.R2}};
  for (const auto& [name, M] : blocks) os << "block " << name << '\n' << to_tuples(*M);
  return os.str();
}

}  // namespace pie
