#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "pie/linalg.hpp"
#include "pie/scalar.hpp"

namespace pie {

enum class Var { x, theta };

template <class S>
struct Interval {
  S a;
  S b;
  Interval() : a(0), b(1) {}
  Interval(S lo, S hi) : a(std::move(lo)), b(std::move(hi)) {
    if (!(a < b)) throw UsageError("interval requires a < b");
  }
  S length() const { return b - a; }
  bool operator==(const Interval& o) const { return a == o.a && b == o.b; }
  template <class T>
  Interval<T> cast() const {
    return Interval<T>(scalar_cast<T>(a), scalar_cast<T>(b));
  }
};

// Integration limit: a constant or one of the two polynomial variables.
template <class S>
struct Bound {
  enum class Kind { constant, x, theta } kind = Kind::constant;
  S value{0};
  static Bound at(S v) { return {Kind::constant, std::move(v)}; }
  static Bound x() { return {Kind::x, S(0)}; }
  static Bound theta() { return {Kind::theta, S(0)}; }
};

template <class S>
struct Term {
  int ex;
  int et;
  S c;
};

// Dense coefficient scratch used to accumulate products; sized by degree.
template <class S>
class Accumulator {
 public:
  Accumulator(int max_ex, int max_et) : nx_(max_ex + 1), nt_(max_et + 1), c_(static_cast<std::size_t>(nx_) * nt_, S(0)) {}
  void add(int ex, int et, const S& v) { c_[static_cast<std::size_t>(ex) * nt_ + et] += v; }
  std::vector<Term<S>> terms() const {
    std::vector<Term<S>> out;
    for (int i = 0; i < nx_; ++i)
      for (int j = 0; j < nt_; ++j) {
        const S& v = c_[static_cast<std::size_t>(i) * nt_ + j];
        if (!ScalarTraits<S>::is_zero(v)) out.push_back({i, j, v});
      }
    return out;
  }

 private:
  int nx_;
  int nt_;
  std::vector<S> c_;
};

// Polynomial in (x, theta) with sparse terms sorted by (exp_x, exp_theta).
template <class S>
class Poly {
 public:
  Poly() = default;
  explicit Poly(const S& c) {
    if (!ScalarTraits<S>::is_zero(c)) terms_.push_back({0, 0, c});
  }
  static Poly monomial(int ex, int et, const S& c) {
    if (ex < 0 || et < 0) throw UsageError("negative exponent");
    Poly p;
    if (!ScalarTraits<S>::is_zero(c)) p.terms_.push_back({ex, et, c});
    return p;
  }
  static Poly from_terms(std::vector<Term<S>> t) {
    Poly p;
    std::sort(t.begin(), t.end(), [](const Term<S>& l, const Term<S>& r) {
      return std::tie(l.ex, l.et) < std::tie(r.ex, r.et);
    });
    for (auto& term : t) {
      if (term.ex < 0 || term.et < 0) throw UsageError("negative exponent");
      if (!p.terms_.empty() && p.terms_.back().ex == term.ex && p.terms_.back().et == term.et) {
        p.terms_.back().c += term.c;
      } else {
        p.terms_.push_back(std::move(term));
      }
    }
    p.drop_zeros();
    return p;
  }

  const std::vector<Term<S>>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const {
    int d = -1;
    for (const auto& t : terms_) d = std::max(d, t.ex + t.et);
    return d;
  }
  int degree_x() const {
    int d = -1;
    for (const auto& t : terms_) d = std::max(d, t.ex);
    return d;
  }
  int degree_theta() const {
    int d = -1;
    for (const auto& t : terms_) d = std::max(d, t.et);
    return d;
  }
  bool has_x() const { return degree_x() > 0; }
  bool has_theta() const { return degree_theta() > 0; }

  S coeff(int ex, int et) const {
    for (const auto& t : terms_)
      if (t.ex == ex && t.et == et) return t.c;
    return S(0);
  }

  Poly operator+(const Poly& o) const { return merge(o, S(1)); }
  Poly operator-(const Poly& o) const { return merge(o, S(-1)); }
  Poly operator-() const { return *this * S(-1); }
  Poly& operator+=(const Poly& o) { return *this = *this + o; }
  Poly& operator-=(const Poly& o) { return *this = *this - o; }
  Poly operator*(const S& s) const {
    if (ScalarTraits<S>::is_zero(s)) return Poly();
    Poly r = *this;
    for (auto& t : r.terms_) t.c *= s;
    r.drop_zeros();
    return r;
  }
  Poly operator*(const Poly& o) const {
    if (is_zero() || o.is_zero()) return Poly();
    Accumulator<S> acc(degree_x() + o.degree_x(), degree_theta() + o.degree_theta());
    for (const auto& l : terms_)
      for (const auto& r : o.terms_) acc.add(l.ex + r.ex, l.et + r.et, l.c * r.c);
    Poly p;
    p.terms_ = acc.terms();
    return p;
  }
  bool operator==(const Poly& o) const {
    if (terms_.size() != o.terms_.size()) return false;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const auto& l = terms_[k];
      const auto& r = o.terms_[k];
      if (l.ex != r.ex || l.et != r.et || !(l.c == r.c)) return false;
    }
    return true;
  }

  S eval(const S& x, const S& theta) const {
    S v(0);
    for (const auto& t : terms_) v += t.c * ipow(x, t.ex) * ipow(theta, t.et);
    return v;
  }

  Poly diff(Var v) const {
    Poly p;
    for (const auto& t : terms_) {
      int e = v == Var::x ? t.ex : t.et;
      if (e == 0) continue;
      if (v == Var::x) {
        p.terms_.push_back({t.ex - 1, t.et, t.c * S(t.ex)});
      } else {
        p.terms_.push_back({t.ex, t.et - 1, t.c * S(t.et)});
      }
    }
    return from_terms(std::move(p.terms_));
  }

  // Definite integral in `v`; each limit is a constant or the other variable.
  Poly integrate(Var v, const Bound<S>& lo, const Bound<S>& hi) const {
    using K = typename Bound<S>::Kind;
    auto self_kind = v == Var::x ? K::x : K::theta;
    if (lo.kind == self_kind || hi.kind == self_kind)
      throw UsageError("integration limit refers to the integration variable");
    std::vector<Term<S>> out;
    for (const auto& t : terms_) {
      int e = v == Var::x ? t.ex : t.et;
      int other = v == Var::x ? t.et : t.ex;
      S c = t.c / S(e + 1);
      auto push = [&](const Bound<S>& lim, const S& sign) {
        if (lim.kind == K::constant) {
          S val = sign * c * ipow(lim.value, e + 1);
          if (v == Var::x) out.push_back({0, other, val});
          else out.push_back({other, 0, val});
        } else {
          // The limit is the remaining variable, which absorbs the power.
          if (v == Var::x) out.push_back({0, other + e + 1, sign * c});
          else out.push_back({other + e + 1, 0, sign * c});
        }
      };
      push(hi, S(1));
      push(lo, S(-1));
    }
    return from_terms(std::move(out));
  }

  // p(x, theta) -> p(theta, x).
  Poly swap_vars() const {
    std::vector<Term<S>> out;
    for (const auto& t : terms_) out.push_back({t.et, t.ex, t.c});
    return from_terms(std::move(out));
  }

  // p(x, x).
  Poly on_diagonal() const {
    std::vector<Term<S>> out;
    for (const auto& t : terms_) out.push_back({t.ex + t.et, 0, t.c});
    return from_terms(std::move(out));
  }

  // Drops coefficients that are negligible for the scalar type.
  Poly canonical() const {
    Poly p = *this;
    p.terms_.erase(std::remove_if(p.terms_.begin(), p.terms_.end(),
                                  [](const Term<S>& t) { return ScalarTraits<S>::negligible(t.c); }),
                   p.terms_.end());
    return p;
  }

  template <class T>
  Poly<T> cast() const {
    std::vector<Term<T>> out;
    for (const auto& t : terms_) out.push_back({t.ex, t.et, scalar_cast<T>(t.c)});
    return Poly<T>::from_terms(std::move(out));
  }

 private:
  template <class>
  friend class Poly;

  Poly merge(const Poly& o, const S& sign) const {
    Poly r;
    std::size_t i = 0, j = 0;
    while (i < terms_.size() || j < o.terms_.size()) {
      if (j == o.terms_.size() ||
          (i < terms_.size() && std::tie(terms_[i].ex, terms_[i].et) < std::tie(o.terms_[j].ex, o.terms_[j].et))) {
        r.terms_.push_back(terms_[i++]);
      } else if (i == terms_.size() ||
                 std::tie(o.terms_[j].ex, o.terms_[j].et) < std::tie(terms_[i].ex, terms_[i].et)) {
        r.terms_.push_back({o.terms_[j].ex, o.terms_[j].et, sign * o.terms_[j].c});
        ++j;
      } else {
        S c = terms_[i].c + sign * o.terms_[j].c;
        if (!ScalarTraits<S>::is_zero(c)) r.terms_.push_back({terms_[i].ex, terms_[i].et, c});
        ++i;
        ++j;
      }
    }
    return r;
  }
  void drop_zeros() {
    terms_.erase(std::remove_if(terms_.begin(), terms_.end(),
                                [](const Term<S>& t) { return ScalarTraits<S>::is_zero(t.c); }),
                 terms_.end());
  }

  std::vector<Term<S>> terms_;
};

// Matrix of polynomials in the variables x and theta.
template <class S>
class PolyMat {
 public:
  PolyMat() = default;
  PolyMat(int rows, int cols) : rows_(rows), cols_(cols), e_(static_cast<std::size_t>(rows) * cols) {
    if (rows < 0 || cols < 0) throw UsageError("negative dimension");
  }
  static PolyMat zero(int rows, int cols) { return PolyMat(rows, cols); }
  static PolyMat identity(int n) {
    PolyMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = Poly<S>(S(1));
    return m;
  }
  static PolyMat constant(const Mat<S>& c) {
    PolyMat m(c.rows(), c.cols());
    for (int i = 0; i < c.rows(); ++i)
      for (int j = 0; j < c.cols(); ++j) m(i, j) = Poly<S>(c(i, j));
    return m;
  }
  // Scalar polynomial times the n x n identity.
  static PolyMat scaled_identity(int n, const Poly<S>& p) {
    PolyMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = p;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Poly<S>& operator()(int i, int j) { return e_[idx(i, j)]; }
  const Poly<S>& operator()(int i, int j) const { return e_[idx(i, j)]; }

  bool is_zero() const {
    return std::all_of(e_.begin(), e_.end(), [](const Poly<S>& p) { return p.is_zero(); });
  }
  int degree() const {
    int d = -1;
    for (const auto& p : e_) d = std::max(d, p.degree());
    return d;
  }
  int degree_x() const {
    int d = -1;
    for (const auto& p : e_) d = std::max(d, p.degree_x());
    return d;
  }
  int degree_theta() const {
    int d = -1;
    for (const auto& p : e_) d = std::max(d, p.degree_theta());
    return d;
  }
  bool has_x() const { return degree_x() > 0; }
  bool has_theta() const { return degree_theta() > 0; }

  PolyMat operator+(const PolyMat& o) const {
    check_same(o, "add");
    PolyMat r(rows_, cols_);
    for (std::size_t k = 0; k < e_.size(); ++k) r.e_[k] = e_[k] + o.e_[k];
    return r;
  }
  PolyMat operator-(const PolyMat& o) const {
    check_same(o, "subtract");
    PolyMat r(rows_, cols_);
    for (std::size_t k = 0; k < e_.size(); ++k) r.e_[k] = e_[k] - o.e_[k];
    return r;
  }
  PolyMat operator-() const { return *this * S(-1); }
  PolyMat& operator+=(const PolyMat& o) { return *this = *this + o; }
  PolyMat& operator-=(const PolyMat& o) { return *this = *this - o; }
  PolyMat operator*(const S& s) const {
    PolyMat r(rows_, cols_);
    for (std::size_t k = 0; k < e_.size(); ++k) r.e_[k] = e_[k] * s;
    return r;
  }
  PolyMat operator*(const PolyMat& o) const {
    if (cols_ != o.rows_)
      throw UsageError("polymat product: inner dimensions " + std::to_string(cols_) + " and " +
                       std::to_string(o.rows_) + " differ");
    PolyMat r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < o.cols_; ++j) {
        int dx = -1, dt = -1;
        bool any = false;
        for (int k = 0; k < cols_; ++k) {
          const auto& a = (*this)(i, k);
          const auto& b = o(k, j);
          if (a.is_zero() || b.is_zero()) continue;
          any = true;
          dx = std::max(dx, a.degree_x() + b.degree_x());
          dt = std::max(dt, a.degree_theta() + b.degree_theta());
        }
        if (!any) continue;
        Accumulator<S> acc(dx, dt);
        for (int k = 0; k < cols_; ++k) {
          const auto& a = (*this)(i, k);
          const auto& b = o(k, j);
          if (a.is_zero() || b.is_zero()) continue;
          for (const auto& l : a.terms())
            for (const auto& rt : b.terms()) acc.add(l.ex + rt.ex, l.et + rt.et, l.c * rt.c);
        }
        r(i, j) = Poly<S>::from_terms(acc.terms());
      }
    return r;
  }
  PolyMat operator*(const Mat<S>& m) const { return *this * constant(m); }
  bool operator==(const PolyMat& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && e_ == o.e_;
  }

  PolyMat transpose() const {
    PolyMat r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  // Evaluates at the given variable values. Throws if a variable that occurs
  // in the matrix has no value.
  Mat<S> eval(std::optional<S> x, std::optional<S> theta = std::nullopt) const {
    if (has_x() && !x) throw UsageError("evaluation needs a value for x");
    if (has_theta() && !theta) throw UsageError("evaluation needs a value for theta");
    S xv = x.value_or(S(0));
    S tv = theta.value_or(S(0));
    Mat<S> r(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j).eval(xv, tv);
    return r;
  }

  PolyMat diff(Var v) const { return map([&](const Poly<S>& p) { return p.diff(v); }); }
  PolyMat integrate(Var v, const Bound<S>& lo, const Bound<S>& hi) const {
    return map([&](const Poly<S>& p) { return p.integrate(v, lo, hi); });
  }
  PolyMat integrate(Var v, const S& lo, const S& hi) const {
    return integrate(v, Bound<S>::at(lo), Bound<S>::at(hi));
  }
  PolyMat swap_vars() const { return map([](const Poly<S>& p) { return p.swap_vars(); }); }
  PolyMat on_diagonal() const { return map([](const Poly<S>& p) { return p.on_diagonal(); }); }
  // Renames x to theta; requires that theta does not already occur.
  PolyMat x_to_theta() const {
    if (has_theta()) throw UsageError("x_to_theta on a matrix that depends on theta");
    return swap_vars();
  }
  PolyMat theta_to_x() const {
    if (has_x()) throw UsageError("theta_to_x on a matrix that depends on x");
    return swap_vars();
  }
  PolyMat canonical() const { return map([](const Poly<S>& p) { return p.canonical(); }); }

  PolyMat block(int r0, int c0, int nr, int nc) const {
    if (r0 < 0 || c0 < 0 || nr < 0 || nc < 0 || r0 + nr > rows_ || c0 + nc > cols_)
      throw UsageError("polymat block out of range");
    PolyMat b(nr, nc);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }
  void set_block(int r0, int c0, const PolyMat& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw UsageError("polymat block out of range");
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  // Constant part as a matrix; throws if a variable occurs.
  Mat<S> constant_value() const {
    if (has_x() || has_theta()) throw UsageError("polymat is not constant");
    return eval(S(0), S(0));
  }

  template <class T>
  PolyMat<T> cast() const {
    PolyMat<T> r(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j).template cast<T>();
    return r;
  }

  // Largest absolute coefficient.
  double max_abs() const {
    double m = 0;
    for (const auto& p : e_)
      for (const auto& t : p.terms()) m = std::max(m, std::abs(to_double(t.c)));
    return m;
  }

 private:
  std::size_t idx(int i, int j) const {
    if (i < 0 || j < 0 || i >= rows_ || j >= cols_) throw UsageError("polymat index out of range");
    return static_cast<std::size_t>(i) * cols_ + j;
  }
  void check_same(const PolyMat& o, const char* what) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw UsageError(std::string("polymat ") + what + ": " + std::to_string(rows_) + "x" +
                       std::to_string(cols_) + " vs " + std::to_string(o.rows_) + "x" + std::to_string(o.cols_));
  }
  template <class F>
  PolyMat map(F&& f) const {
    PolyMat r(rows_, cols_);
    for (std::size_t k = 0; k < e_.size(); ++k) r.e_[k] = f(e_[k]);
    return r;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<Poly<S>> e_;
};

template <class S>
PolyMat<S> operator*(const Mat<S>& m, const PolyMat<S>& p) {
  return PolyMat<S>::constant(m) * p;
}

template <class S>
PolyMat<S> hstack(const PolyMat<S>& a, const PolyMat<S>& b) {
  if (a.rows() != b.rows()) throw UsageError("hstack row mismatch");
  PolyMat<S> r(a.rows(), a.cols() + b.cols());
  r.set_block(0, 0, a);
  r.set_block(0, a.cols(), b);
  return r;
}

template <class S>
PolyMat<S> vstack(const PolyMat<S>& a, const PolyMat<S>& b) {
  if (a.cols() != b.cols()) throw UsageError("vstack column mismatch");
  PolyMat<S> r(a.rows() + b.rows(), a.cols());
  r.set_block(0, 0, a);
  r.set_block(a.rows(), 0, b);
  return r;
}

// Limits for integrate_product: constants or one of the result variables.
template <class S>
struct MidBound {
  enum class Kind { constant, outer_x, outer_theta } kind = Kind::constant;
  S value{0};
  static MidBound at(S v) { return {Kind::constant, std::move(v)}; }
  static MidBound x() { return {Kind::outer_x, S(0)}; }
  static MidBound theta() { return {Kind::outer_theta, S(0)}; }
};

// Computes C(x, t) = int_lo^hi A(x, s) B(s, t) ds, where A's second variable
// and B's first variable are the integration variable s.
template <class S>
PolyMat<S> integrate_product(const PolyMat<S>& A, const PolyMat<S>& B, const MidBound<S>& lo,
                             const MidBound<S>& hi) {
  if (A.cols() != B.rows()) throw UsageError("integrate_product: inner dimension mismatch");
  using K = typename MidBound<S>::Kind;
  PolyMat<S> C(A.rows(), B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j) {
      int ax = -1, as = -1, bs = -1, bt = -1;
      bool any = false;
      for (int k = 0; k < A.cols(); ++k) {
        const auto& a = A(i, k);
        const auto& b = B(k, j);
        if (a.is_zero() || b.is_zero()) continue;
        any = true;
        ax = std::max(ax, a.degree_x());
        as = std::max(as, a.degree_theta());
        bs = std::max(bs, b.degree_x());
        bt = std::max(bt, b.degree_theta());
      }
      if (!any) continue;
      const int p_max = as + bs + 1;
      Accumulator<S> acc(ax + p_max, bt + p_max);
      std::vector<S> inv(p_max + 1);
      for (int p = 1; p <= p_max; ++p) inv[p] = S(1) / S(p);
      std::vector<S> lo_pow, hi_pow;
      if (lo.kind == K::constant)
        for (int p = 0; p <= p_max; ++p) lo_pow.push_back(ipow(lo.value, p));
      if (hi.kind == K::constant)
        for (int p = 0; p <= p_max; ++p) hi_pow.push_back(ipow(hi.value, p));
      for (int k = 0; k < A.cols(); ++k) {
        const auto& a = A(i, k);
        const auto& b = B(k, j);
        if (a.is_zero() || b.is_zero()) continue;
        for (const auto& l : a.terms())
          for (const auto& r : b.terms()) {
            const int p = l.et + r.ex + 1;
            S c = l.c * r.c * inv[p];
            auto put = [&](const MidBound<S>& lim, const std::vector<S>& pw, bool upper) {
              S v = upper ? c : S(-c);
              switch (lim.kind) {
                case K::constant:
                  acc.add(l.ex, r.et, v * pw[p]);
                  break;
                case K::outer_x:
                  acc.add(l.ex + p, r.et, v);
                  break;
                case K::outer_theta:
                  acc.add(l.ex, r.et + p, v);
                  break;
              }
            };
            put(hi, hi_pow, true);
            put(lo, lo_pow, false);
          }
      }
      C(i, j) = Poly<S>::from_terms(acc.terms());
    }
  return C;
}

// Tuple form used for serialization: (row, col, exp_x, exp_theta, coef).
template <class S>
std::string to_tuples(const PolyMat<S>& m) {
  std::ostringstream os;
  os << "polymat " << m.rows() << ' ' << m.cols() << '\n';
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      for (const auto& t : m(i, j).terms())
        os << i << ' ' << j << ' ' << t.ex << ' ' << t.et << ' ' << format_scalar(t.c) << '\n';
  os << "end\n";
  return os.str();
}

template <class S>
std::ostream& operator<<(std::ostream& os, const Poly<S>& p) {
  if (p.is_zero()) return os << "0";
  bool first = true;
  for (const auto& t : p.terms()) {
    if (!first) os << " + ";
    first = false;
    os << format_scalar(t.c);
    if (t.ex) os << "*x^" << t.ex;
    if (t.et) os << "*th^" << t.et;
  }
  return os;
}

template <class S>
std::ostream& operator<<(std::ostream& os, const PolyMat<S>& m) {
  os << '[';
  for (int i = 0; i < m.rows(); ++i) {
    if (i) os << "; ";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ", ";
      os << m(i, j);
    }
  }
  return os << ']';
}

}  // namespace pie
