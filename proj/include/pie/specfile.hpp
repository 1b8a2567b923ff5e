#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "pie/convert.hpp"

namespace pie {

// PDE description files. Line-oriented:
//
//   # comment
//   [params]
//   lambda = 7.5
//   [domain]
//   a = -1
//   b = 1
//   [state]
//   n = 1
//   [dynamics]
//   A0 = { (0, 0, 0, lambda) }          # (row, col, exp_x, coefficient)
//   A2 = { (0, 0, 0, 1) }
//   [bc]
//   E = [ 1 -1 0 0 ; 0 0 1 -1 ]         # 2n x 4n, columns u(a) u(b) u_x(a) u_x(b)
//   F = { (0, 0, 1, 2) }                # 2n x n, optional
//   [options]
//   F3 = { (0, 0, 0, 1/2) }             # m x n
//   S = t0f                             # zero | t0f | custom
//   S_R1 = { (0, 0, 1, 0, 1) }          # custom kernels: (row, col, exp_x, exp_theta, coefficient)
//   degree = 3
//   N = 16
//
// Coefficients are products of rationals and parameters, e.g. -2*k or -k*k.
// Brackets may span lines.

class FormatError : public std::runtime_error {
 public:
  FormatError(int line, int col, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int column() const { return col_; }

 private:
  int line_, col_;
};

struct PdeSpecFile {
  PdeSystem<Rational> pde;
  std::optional<PolyMat<Rational>> f3;
  SMode s_mode = SMode::zero;
  std::optional<PiOperator<Rational>> s_custom;
  int degree = 3;
  int basis = 16;
  std::map<std::string, Rational> params;
};

namespace detail {

struct Tuple {
  std::vector<Rational> v;
  int line = 0, col = 0;
};

class SpecScanner {
 public:
  explicit SpecScanner(std::string text) : s_(std::move(text)) {}

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(line_, col_, what); }
  [[noreturn]] void fail_at(int line, int col, const std::string& what) const { throw FormatError(line, col, what); }
  int line() const { return line_; }
  int col() const { return col_; }
  bool done() const { return i_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[i_]; }

  char get() {
    char c = s_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  // Skips blanks and comments; newlines too when `lines` is set.
  void skip(bool lines) {
    while (!done()) {
      char c = peek();
      if (c == '#') {
        while (!done() && peek() != '\n') get();
      } else if (c == ' ' || c == '\t' || c == '\r' || (lines && c == '\n')) {
        get();
      } else {
        break;
      }
    }
  }

  void expect(char c, bool lines) {
    skip(lines);
    if (peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }

  void end_of_line() {
    skip(false);
    if (!done() && peek() != '\n') fail("unexpected text after value");
  }

  std::string word() {
    std::string w;
    while (!done() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) w.push_back(get());
    if (w.empty()) fail("expected a name");
    return w;
  }

  std::string number_text() {
    std::string w;
    while (!done() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '/')) w.push_back(get());
    return w;
  }

 private:
  std::string s_;
  std::size_t i_ = 0;
  int line_ = 1, col_ = 1;
};

class SpecParser {
 public:
  SpecParser(std::string text, const std::map<std::string, Rational>& overrides)
      : sc_(std::move(text)), overrides_(overrides) {}

  PdeSpecFile run();

 private:
  Rational expr(bool lines) {
    sc_.skip(lines);
    bool neg = false;
    if (sc_.peek() == '-' || sc_.peek() == '+') {
      neg = sc_.get() == '-';
      sc_.skip(lines);
    }
    Rational r = factor();
    for (;;) {
      sc_.skip(lines);
      if (sc_.peek() != '*') break;
      sc_.get();
      sc_.skip(lines);
      r *= factor();
    }
    return neg ? Rational(-r) : r;
  }

  Rational factor() {
    const int l = sc_.line(), c = sc_.col();
    char ch = sc_.peek();
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::string name = sc_.word();
      auto it = out_.params.find(name);
      if (it == out_.params.end()) sc_.fail_at(l, c, "unknown parameter '" + name + "'");
      return it->second;
    }
    std::string t = sc_.number_text();
    if (t.empty()) sc_.fail_at(l, c, "expected a number or parameter");
    try {
      return parse_rational(t);
    } catch (const UsageError&) {
      sc_.fail_at(l, c, "malformed number '" + t + "'");
    }
  }

  int integer(bool lines, const char* what) {
    sc_.skip(lines);
    const int l = sc_.line(), c = sc_.col();
    Rational r = expr(lines);
    if (boost::multiprecision::denominator(r) != 1 || r < 0 || r > 1000) sc_.fail_at(l, c, std::string(what) + " must be a small nonnegative integer");
    return static_cast<int>(to_double(r));
  }

  Mat<Rational> matrix() {
    sc_.expect('[', false);
    std::vector<std::vector<Rational>> rows(1);
    for (;;) {
      sc_.skip(true);
      if (sc_.done()) sc_.fail("unterminated matrix");
      if (sc_.peek() == ']') {
        sc_.get();
        break;
      }
      if (sc_.peek() == ';') {
        sc_.get();
        rows.emplace_back();
        continue;
      }
      if (sc_.peek() == ',') {
        sc_.get();
        continue;
      }
      rows.back().push_back(expr(true));
    }
    if (rows.back().empty() && rows.size() > 1) rows.pop_back();
    const int r = static_cast<int>(rows.size()), c = static_cast<int>(rows[0].size());
    Mat<Rational> M(r, c);
    for (int i = 0; i < r; ++i) {
      if (static_cast<int>(rows[i].size()) != c) sc_.fail("matrix rows have different lengths");
      for (int j = 0; j < c; ++j) M(i, j) = rows[i][j];
    }
    return M;
  }

  std::vector<Tuple> tuples() {
    sc_.expect('{', false);
    std::vector<Tuple> out;
    for (;;) {
      sc_.skip(true);
      if (sc_.done()) sc_.fail("unterminated polynomial list");
      if (sc_.peek() == '}') {
        sc_.get();
        break;
      }
      if (sc_.peek() == ',') {
        sc_.get();
        continue;
      }
      Tuple t;
      t.line = sc_.line();
      t.col = sc_.col();
      sc_.expect('(', true);
      for (;;) {
        t.v.push_back(expr(true));
        sc_.skip(true);
        if (sc_.peek() == ',') {
          sc_.get();
          continue;
        }
        if (sc_.peek() == ')') {
          sc_.get();
          break;
        }
        sc_.fail("expected ',' or ')' in tuple");
      }
      out.push_back(t);
    }
    return out;
  }

  struct Pending {
    std::vector<Tuple> t;
    int line = 0, col = 0;
  };

  PolyMat<Rational> polymat(const Pending& p, int rows, int cols, bool two_vars, const std::string& name) const {
    PolyMat<Rational> M(rows, cols);
    const std::size_t width = two_vars ? 5 : 4;
    for (const auto& t : p.t) {
      if (t.v.size() != width)
        sc_.fail_at(t.line, t.col, name + " entries need " + std::to_string(width) + " fields");
      int idx[4] = {0, 0, 0, 0};
      for (std::size_t k = 0; k + 1 < width; ++k) {
        if (boost::multiprecision::denominator(t.v[k]) != 1 || t.v[k] < 0) sc_.fail_at(t.line, t.col, name + ": indices and exponents must be nonnegative integers");
        idx[k] = static_cast<int>(to_double(t.v[k]));
      }
      if (idx[0] >= rows || idx[1] >= cols)
        sc_.fail_at(t.line, t.col, name + ": entry (" + std::to_string(idx[0]) + ", " + std::to_string(idx[1]) +
                                       ") outside " + std::to_string(rows) + " x " + std::to_string(cols));
      M(idx[0], idx[1]) += Poly<Rational>::monomial(idx[2], two_vars ? idx[3] : 0, t.v.back());
    }
    return M;
  }

  SpecScanner sc_;
  std::map<std::string, Rational> overrides_;
  PdeSpecFile out_;
};

inline PdeSpecFile SpecParser::run() {
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"params", {}},
      {"domain", {"a", "b"}},
      {"state", {"n"}},
      {"dynamics", {"A0", "A1", "A2"}},
      {"bc", {"E", "F"}},
      {"options", {"F3", "S", "S_R0", "S_R1", "S_R2", "degree", "N"}},
  };
  std::string section;
  std::set<std::string> seen;
  std::optional<Rational> a, b;
  std::optional<int> n;
  std::optional<Mat<Rational>> E;
  std::map<std::string, Pending> polys;
  int e_line = 0, e_col = 0;

  for (;;) {
    sc_.skip(true);
    if (sc_.done()) break;
    const int l = sc_.line(), c = sc_.col();
    if (sc_.peek() == '[') {
      sc_.get();
      sc_.skip(false);
      section = sc_.word();
      if (!allowed.count(section)) sc_.fail_at(l, c, "unknown section [" + section + "]");
      sc_.expect(']', false);
      sc_.end_of_line();
      continue;
    }
    if (!std::isalpha(static_cast<unsigned char>(sc_.peek()))) sc_.fail("expected a section or a key");
    std::string key = sc_.word();
    if (section.empty()) sc_.fail_at(l, c, "key '" + key + "' outside any section");
    const auto& keys = allowed.at(section);
    if (section != "params" && !keys.count(key)) sc_.fail_at(l, c, "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) sc_.fail_at(l, c, "duplicate key '" + key + "'");
    sc_.expect('=', false);
    sc_.skip(false);
    if (section == "params") {
      Rational v = expr(false);
      auto it = overrides_.find(key);
      out_.params[key] = it == overrides_.end() ? v : it->second;
    } else if (key == "a") {
      a = expr(false);
    } else if (key == "b") {
      b = expr(false);
    } else if (key == "n") {
      n = integer(false, "n");
      if (*n < 1) sc_.fail_at(l, c, "n must be at least 1");
    } else if (key == "E") {
      e_line = l;
      e_col = c;
      E = matrix();
    } else if (key == "S") {
      const int vl = sc_.line(), vc = sc_.col();
      std::string m = sc_.word();
      if (m == "zero") out_.s_mode = SMode::zero;
      else if (m == "t0f") out_.s_mode = SMode::t0f;
      else if (m == "custom") out_.s_mode = SMode::custom;
      else sc_.fail_at(vl, vc, "S must be zero, t0f or custom");
    } else if (key == "degree") {
      out_.degree = integer(false, "degree");
    } else if (key == "N") {
      out_.basis = integer(false, "N");
      if (out_.basis < 2) sc_.fail_at(l, c, "N must be at least 2");
    } else {
      polys[key] = {tuples(), l, c};
    }
    sc_.end_of_line();
  }

  for (const auto& [k, v] : overrides_)
    if (!out_.params.count(k)) throw UsageError("parameter '" + k + "' is not declared in [params]");
  if (!a || !b) throw FormatError(sc_.line(), 1, "[domain] needs a and b");
  if (!(*a < *b)) throw FormatError(sc_.line(), 1, "domain needs a < b");
  if (!n) throw FormatError(sc_.line(), 1, "[state] needs n");
  if (!E) throw FormatError(sc_.line(), 1, "[bc] needs E");
  const int N = *n;
  if (E->rows() != 2 * N || E->cols() != 4 * N)
    throw FormatError(e_line, e_col, "E must be " + std::to_string(2 * N) + " x " + std::to_string(4 * N));

  Interval<Rational> dom(*a, *b);
  auto poly_or_zero = [&](const std::string& key, int rows, int cols, bool two) {
    auto it = polys.find(key);
    return it == polys.end() ? PolyMat<Rational>(rows, cols) : polymat(it->second, rows, cols, two, key);
  };
  out_.pde.bc = BoundarySpec<Rational>{N, dom, *E, poly_or_zero("F", 2 * N, N, false)};
  out_.pde.A0 = poly_or_zero("A0", N, N, false);
  out_.pde.A1 = poly_or_zero("A1", N, N, false);
  out_.pde.A2 = poly_or_zero("A2", N, N, false);
  try {
    out_.pde.validate();
    const int m = split(out_.pde.bc).m;
    if (auto it = polys.find("F3"); it != polys.end()) out_.f3 = polymat(it->second, m, N, false, "F3");
  } catch (const UsageError& e) {
    throw FormatError(sc_.line(), 1, e.what());
  } catch (const ConstructionError& e) {
    throw FormatError(sc_.line(), 1, e.what());
  }

  const bool has_kernel = polys.count("S_R0") || polys.count("S_R1") || polys.count("S_R2");
  if (out_.s_mode == SMode::custom) {
    PiOperator<Rational> S({0, N}, {0, N}, dom);
    S.R0 = poly_or_zero("S_R0", N, N, false);
    S.R1 = poly_or_zero("S_R1", N, N, true);
    S.R2 = poly_or_zero("S_R2", N, N, true);
    out_.s_custom = S;
  } else if (has_kernel) {
    auto it = polys.count("S_R0") ? polys.find("S_R0") : polys.count("S_R1") ? polys.find("S_R1") : polys.find("S_R2");
    throw FormatError(it->second.line, it->second.col, "S kernels given but S is not custom");
  }
  return out_;
}

}  // namespace detail

inline PdeSpecFile parse_spec(const std::string& text, const std::map<std::string, Rational>& overrides = {}) {
  return detail::SpecParser(text, overrides).run();
}

inline PdeSpecFile load_spec(const std::string& path, const std::map<std::string, Rational>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str(), overrides);
}

}  // namespace pie
