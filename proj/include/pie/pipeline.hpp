#pragma once

#include <cmath>
#include <future>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pie/catalog.hpp"
#include "pie/lpi.hpp"
#include "pie/spectral.hpp"
#include "pie/specfile.hpp"

namespace pie {

// Library-side compositions behind the command-line tool.

struct Problem {
  PdeSpecFile spec;
  PieSystem<Rational> sys;
  TrajectoryOperator<Rational> traj;
};

inline Problem prepare(const PdeSpecFile& f) {
  Problem p;
  p.spec = f;
  p.sys = pde_to_pie(f.pde, f.f3);
  p.traj = s_transform(p.sys, f.s_mode, f.s_custom);
  return p;
}

inline Problem prepare(const CatalogEntry<Rational>& e, SMode mode, int degree = 3, int basis = 16) {
  PdeSpecFile f;
  f.pde = e.pde;
  f.f3 = e.f3;
  f.s_mode = mode;
  f.degree = degree;
  f.basis = basis;
  return prepare(f);
}

namespace detail {

inline std::string subscript_digits(int k) {
  static const char* digits[] = {"₀", "₁", "₂", "₃", "₄", "₅", "₆", "₇", "₈", "₉"};
  std::string s = std::to_string(k), out;
  for (char c : s) out += digits[c - '0'];
  return out;
}

// p(x) as a factor in front of a variable: "", "-", "3", "(1 - 2x)".
inline std::string factor_text(const Poly<Rational>& p) {
  auto mono = [](const Term<Rational>& t, bool leading) {
    std::string s;
    Rational c = t.c;
    bool neg = c < 0;
    if (neg) c = -c;
    s += neg ? (leading ? "-" : " - ") : (leading ? "" : " + ");
    if (c != 1 || t.ex == 0) s += c.str();
    if (t.ex >= 1) s += "x";
    if (t.ex > 1) s += "^" + std::to_string(t.ex);
    return s;
  };
  auto terms = p.terms();
  if (terms.size() == 1 && terms[0].ex == 0) {
    if (terms[0].c == 1) return "";
    if (terms[0].c == -1) return "-";
    return terms[0].c.str() + "·";
  }
  std::string s = "(";
  for (std::size_t k = 0; k < terms.size(); ++k) s += mono(terms[k], k == 0);
  return s + ")";
}

}  // namespace detail

// "K: ∫v₁=0" style rendering of K v = 0, each row scaled to a unit leading coefficient.
inline std::string describe_constraint(const PieSystem<Rational>& sys) {
  const auto& K = sys.K;
  const int m = K.out.m, n = K.in.n;
  std::ostringstream os;
  os << "m=" << m << ", ";
  if (m == 0) return os.str() + "K: none (Y is all of L2)\nn=" + std::to_string(n);
  auto name = [&](int level, int j, int count) {
    std::string s = "v" + detail::subscript_digits(level);
    return count > 1 ? s + "[" + std::to_string(j) + "]" : s;
  };
  for (int i = 0; i < m; ++i) {
    Rational lead(0);
    for (int j = 0; j < K.in.m && lead == 0; ++j)
      if (!K.P(i, j).is_zero()) lead = K.P(i, j).terms().front().c;
    for (int j = 0; j < n && lead == 0; ++j)
      if (!K.Q1(i, j).is_zero()) lead = K.Q1(i, j).terms().back().c;
    std::string row;
    auto add = [&](const std::string& t) {
      if (!row.empty()) row += t[0] == '-' ? " - " + t.substr(1) : " + " + t;
      else row = t;
    };
    if (lead != 0) {
      PolyMat<Rational> P = K.P.block(i, 0, 1, K.in.m) * (Rational(1) / lead);
      PolyMat<Rational> Q = K.Q1.block(i, 0, 1, n) * (Rational(1) / lead);
      for (int j = 0; j < K.in.m; ++j)
        if (!P(0, j).is_zero()) add(detail::factor_text(P(0, j)) + name(0, j, K.in.m));
      for (int j = 0; j < n; ++j)
        if (!Q(0, j).is_zero()) {
          std::string f = detail::factor_text(Q(0, j));
          bool neg = !f.empty() && f[0] == '-' && f.size() == 1;
          add((neg ? "-∫" : "∫" + f) + name(1, j, n));
        }
    }
    os << (i == 0 ? "K: " : "\n      ") << (row.empty() ? "0" : row) << "=0";
  }
  return os.str() + "\nn=" + std::to_string(n);
}

// Decay rate of the seminorm from the constrained pencil spectrum.
inline double spectral_oracle(const Problem& p, int N) {
  return decay_rate(constrained_spectrum(discretize_pencil(p.sys, p.traj, N)));
}

struct CertifyReport {
  bool search = false;
  double requested = 0;          // the tested alpha, or the search ceiling
  double tol = 1e-3;             // bisection tolerance on alpha
  SdpStatus status = SdpStatus::indeterminate;
  std::optional<double> alpha;   // certified rate
  std::optional<Certificate> certificate;
  std::optional<double> oracle;  // spectral decay rate
  int oracle_N = 0;
  std::vector<std::pair<double, SdpStatus>> history;
  std::string message;
  double seconds = 0;
};

inline CertifyReport certify(const Problem& p, std::optional<double> alpha, int degree, int N, double tol = 1e-3) {
  CertifyReport r;
  auto t0 = std::chrono::steady_clock::now();
  r.oracle_N = N;
  try {
    r.oracle = spectral_oracle(p, N);
  } catch (const ConstructionError& e) {
    r.message = std::string("spectral oracle: ") + e.what();
  }
  LpiProblem L = assemble(p.sys, p.traj, degree);
  if (alpha) {
    if (!(*alpha >= 0)) throw UsageError("alpha must be nonnegative");
    r.requested = *alpha;
    StabilityResult s = check_stability(L, *alpha);
    r.status = s.status;
    r.history.emplace_back(*alpha, s.status);
    if (s.certificate) {
      r.alpha = *alpha;
      r.certificate = s.certificate;
    }
    if (r.message.empty()) r.message = s.message;
  } else {
    r.search = true;
    r.tol = tol;
    r.requested = r.oracle ? std::max(0.0, 1.1 * *r.oracle) : 0.0;
    RateSearch s = max_decay_rate(L, r.requested, tol);
    r.history = s.history;
    r.alpha = s.alpha;
    r.certificate = s.certificate;
    r.status = s.alpha ? SdpStatus::feasible : s.history.front().second;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Initial states for simulations; each applies to every component.
struct InitialProfile {
  std::function<double(double)> u, u_xx;
};

inline InitialProfile initial_profile(const std::string& name, double a, double b) {
  const double L = b - a, w = 2 * std::numbers::pi / L, h = std::numbers::pi / L;
  if (name == "constant") return {[](double) { return 1.0; }, [](double) { return 0.0; }};
  if (name == "cos")
    return {[=](double x) { return std::cos(w * (x - a)); }, [=](double x) { return -w * w * std::cos(w * (x - a)); }};
  if (name == "sin")
    return {[=](double x) { return std::sin(h * (x - a)); }, [=](double x) { return -h * h * std::sin(h * (x - a)); }};
  if (name == "bump")
    return {[=](double x) { return (x - a) * (x - a) * (b - x) * (b - x); },
            [=](double x) { return 2 * (b - x) * (b - x) - 8 * (x - a) * (b - x) + 2 * (x - a) * (x - a); }};
  throw UsageError("unknown initial state '" + name + "' (constant, cos, sin, bump)");
}

struct Simulation {
  Trajectory trajectory;
  double constraint_residual = 0;
};

inline Simulation simulate(const Problem& p, int N, double t_end, double dt, const std::string& init, int stride = 1) {
  DiscretizedPencil pencil = discretize_pencil(p.sys, p.traj, N);
  InitialProfile prof = initial_profile(init, pencil.a, pencil.b);
  InitialState st = project_initial(p.sys, pencil, [&](int, double x) { return prof.u(x); },
                                    [&](int, double x) { return prof.u_xx(x); });
  return {integrate_pie(pencil, st.v, t_end, dt, stride), st.constraint_residual};
}

// Rows of the two reference tables.
struct TableRow {
  std::string param;
  double reference = 0;
  double analytic = 0;
  CertifyReport report;
  std::string error;
};

struct TableDef {
  std::string param_name;
  std::vector<std::string> params;
  std::vector<double> reference;
};

inline TableDef table_def(int table) {
  if (table == 1)
    return {"lambda",
            {"0", "1.5", "3", "4.5", "6", "7.5", "9", "9.5"},
            {9.8690, 8.3691, 6.8692, 5.3693, 3.8695, 2.3695, 0.8696, 0.3696}};
  if (table == 2)
    return {"k", {"1", "2", "3", "4", "5", "6", "7", "8"}, {0.981, 1.997, 2.993, 3.996, 4.994, 5.975, 6.969, 7.957}};
  throw UsageError("--table must be 1 or 2");
}

inline Problem table_problem(int table, const std::string& param, int degree, int N) {
  Rational v = parse_rational(param);
  if (table == 1) return prepare(periodic_reaction_diffusion(v), SMode::t0f, degree, N);
  return prepare(neumann_wave(v), SMode::zero, degree, N);
}

inline double table_analytic(int table, const std::string& param) {
  double v = to_double(parse_rational(param));
  return table == 1 ? std::numbers::pi * std::numbers::pi - v : v;
}

// Runs every row concurrently; rows come back in table order.
inline std::vector<TableRow> reproduce_table(int table, int degree = 3, int N = 16, double tol = 1e-3) {
  TableDef def = table_def(table);
  std::vector<std::future<TableRow>> jobs;
  for (std::size_t i = 0; i < def.params.size(); ++i)
    jobs.push_back(std::async(std::launch::async, [&, i] {
      TableRow row;
      row.param = def.params[i];
      row.reference = def.reference[i];
      row.analytic = table_analytic(table, row.param);
      try {
        row.report = certify(table_problem(table, row.param, degree, N), std::nullopt, degree, N, tol);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      return row;
    }));
  std::vector<TableRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

}  // namespace pie
