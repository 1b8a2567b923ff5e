// piecli: PDE to PIE conversion, LPI certification, spectra, simulation and
// table reproduction.
//
// Exit codes: 0 success or feasible, 2 infeasible, 3 indeterminate,
// 64 usage error, 65 bad input data.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "pie/pipeline.hpp"

namespace {

using namespace pie;

constexpr int kInfeasible = 2;
constexpr int kIndeterminate = 3;
constexpr int kUsage = 64;
constexpr int kData = 65;

// Tab-separated mirror of the report, written when --out is given.
struct Mirror {
  std::vector<std::vector<std::string>> rows;
  void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }
  void write(const std::string& path) const {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write '" + path + "'");
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "\t" : "") << r[i];
      out << '\n';
    }
  }
};

std::string num(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

int exit_for(SdpStatus s) {
  switch (s) {
    case SdpStatus::feasible: return 0;
    case SdpStatus::infeasible: return kInfeasible;
    default: return kIndeterminate;
  }
}

std::map<std::string, Rational> parse_overrides(const std::vector<std::string>& items) {
  std::map<std::string, Rational> out;
  for (const auto& s : items) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + s + "'");
    out[s.substr(0, eq)] = parse_rational(s.substr(eq + 1));
  }
  return out;
}

struct Common {
  std::string spec;
  std::vector<std::string> params;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool needs_spec = true) {
  if (needs_spec) app->add_option("spec", c.spec, "PDE description file")->required();
  app->add_option("--param", c.params, "override a [params] entry, name=value");
  app->add_option("--out", c.out, "write a tab-separated report here");
}

Problem load(const Common& c) { return prepare(load_spec(c.spec, parse_overrides(c.params))); }

int cmd_convert(const Common& c) {
  Problem p = load(c);
  std::cout << describe_constraint(p.sys) << '\n';
  std::cout << "# T_hat\n" << to_text(p.sys.T_hat) << "# A_hat\n" << to_text(p.sys.A_hat) << "# K\n" << to_text(p.sys.K);
  Mirror m;
  m.add({"m", std::to_string(p.sys.maps.m)});
  m.add({"n", std::to_string(p.sys.maps.n)});
  m.write(c.out);
  return 0;
}

int cmd_certify(const Common& c, std::optional<double> alpha, bool search, std::optional<int> degree, double tol) {
  if (alpha.has_value() == search) throw UsageError("certify needs exactly one of --alpha and --search");
  Problem p = load(c);
  const int d = degree.value_or(p.spec.degree);
  CertifyReport r = certify(p, search ? std::nullopt : alpha, d, p.spec.basis, tol);
  Mirror m;
  m.add({"method", "quantity", "value", "tolerance"});
  std::cout << "degree " << d << ", S " << (p.spec.s_mode == SMode::zero ? "zero" : p.spec.s_mode == SMode::t0f ? "t0f" : "custom")
            << '\n';
  for (const auto& [a, s] : r.history) std::cout << "  alpha " << num(a) << ": " << to_string(s) << '\n';
  if (r.search) {
    if (r.alpha) {
      std::cout << "certified alpha " << num(*r.alpha) << " (lpi, bisection tol " << num(r.tol) << ")\n";
      m.add({"lpi", "alpha", num(*r.alpha, 10), num(r.tol)});
    } else {
      std::cout << "not certifiable at alpha = 0 (" << to_string(r.status) << ")\n";
      m.add({"lpi", "alpha", "none", num(r.tol)});
    }
  } else {
    std::cout << "alpha " << num(r.requested) << ": " << to_string(r.status) << " (lpi)\n";
    m.add({"lpi", "status", to_string(r.status), num(r.requested)});
  }
  if (r.certificate) {
    const auto& ce = *r.certificate;
    std::cout << "  eps^2 " << num(ce.eps2) << ", M_P min eigenvalue " << num(ce.mp_min_eig) << ", matching residual "
              << num(ce.residual, 3) << '\n';
    m.add({"lpi", "residual", num(ce.residual, 3), "1e-07"});
  }
  if (r.oracle) {
    std::cout << "spectral oracle alpha " << num(*r.oracle, 8) << " (spectral, N=" << r.oracle_N << ")\n";
    m.add({"spectral", "alpha", num(*r.oracle, 10), "N=" + std::to_string(r.oracle_N)});
  }
  if (!r.message.empty() && r.status != SdpStatus::feasible) std::cout << "note: " << r.message << '\n';
  std::cout << "time " << num(r.seconds, 3) << " s\n";
  m.write(c.out);
  return exit_for(r.status);
}

int cmd_spectrum(const Common& c, std::optional<int> N) {
  Problem p = load(c);
  const int n = N.value_or(p.spec.basis);
  Spectrum s = constrained_spectrum(discretize_pencil(p.sys, p.traj, n));
  Mirror m;
  m.add({"re", "im", "visible"});
  std::cout << "N " << n << ", finite " << s.finite.size() << ", infinite " << s.infinite << '\n';
  int shown = 0;
  for (const auto& e : s.finite) {
    m.add({num(e.value.real(), 12), num(e.value.imag(), 12), e.visible ? "1" : "0"});
    if (shown++ < 12)
      std::cout << "  " << num(e.value.real(), 10) << (e.value.imag() < 0 ? " - " : " + ") << num(std::abs(e.value.imag()), 10)
                << "i" << (e.visible ? "" : "  (invisible to the seminorm)") << '\n';
  }
  try {
    std::cout << "decay rate " << num(decay_rate(s), 10) << " (spectral, N=" << n << ")\n";
  } catch (const ConstructionError&) {
    std::cout << "no visible mode\n";
  }
  m.write(c.out);
  return 0;
}

int cmd_simulate(const Common& c, double t_end, double dt, const std::string& init, std::optional<int> N) {
  Problem p = load(c);
  Simulation sim = simulate(p, N.value_or(p.spec.basis), t_end, dt, init);
  std::string csv = trajectory_csv(sim.trajectory);
  if (c.out.empty()) std::cout << csv;
  else {
    std::ofstream out(c.out);
    if (!out) throw UsageError("cannot write '" + c.out + "'");
    out << csv;
    std::cout << "wrote " << sim.trajectory.times.size() << " samples to " << c.out << '\n';
  }
  if (sim.constraint_residual > 1e-8) std::cerr << "initial state projected onto K v = 0 (residual " << num(sim.constraint_residual, 3) << ")\n";
  return 0;
}

int cmd_reproduce(const Common& c, int table, int degree, int N) {
  TableDef def = table_def(table);
  auto rows = reproduce_table(table, degree, N);
  Mirror m;
  m.add({def.param_name, "certified", "reference", "analytic", "spectral", "seconds", "note"});
  std::printf("%-8s %12s %10s %12s %12s %9s\n", def.param_name.c_str(), "certified", "reference", "analytic", "spectral", "time[s]");
  bool failed = false;
  for (const auto& r : rows) {
    std::string cert = r.report.alpha ? num(*r.report.alpha, 6) : "-";
    std::string spec = r.report.oracle ? num(*r.report.oracle, 8) : "-";
    std::string note = !r.error.empty() ? r.error : r.report.alpha ? "" : std::string("not certified: ") + to_string(r.report.status);
    failed = failed || !r.report.alpha;
    std::printf("%-8s %12s %10.4f %12.6f %12s %9.1f  %s\n", r.param.c_str(), cert.c_str(), r.reference, r.analytic, spec.c_str(),
                r.report.seconds, note.c_str());
    m.add({r.param, cert, num(r.reference), num(r.analytic, 8), spec, num(r.report.seconds, 3), note});
  }
  std::printf("certified: lpi, d=%d, bisection tol 1e-3; spectral: N=%d\n", degree, N);
  m.write(c.out);
  return failed ? kIndeterminate : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PDE to PIE conversion and stability certification"};
  app.require_subcommand(1);

  Common conv, cert, spec, sim, repro;
  auto* c_convert = app.add_subcommand("convert", "convert a PDE to its PIE and print the constraint K");
  add_common(c_convert, conv);

  auto* c_certify = app.add_subcommand("certify", "certify a decay rate with the LPI");
  add_common(c_certify, cert);
  std::optional<double> alpha;
  bool search = false;
  std::optional<int> degree;
  double tol = 1e-3;
  c_certify->add_option("--alpha", alpha, "test this rate");
  c_certify->add_flag("--search", search, "bisect for the largest certified rate");
  c_certify->add_option("--degree", degree, "monomial degree d")->check(CLI::Range(1, 8));
  c_certify->add_option("--tol", tol, "bisection tolerance")->check(CLI::PositiveNumber);

  auto* c_spectrum = app.add_subcommand("spectrum", "constrained pencil spectrum");
  add_common(c_spectrum, spec);
  std::optional<int> spec_N;
  c_spectrum->add_option("--N", spec_N, "Legendre degree")->check(CLI::Range(2, 200));

  auto* c_simulate = app.add_subcommand("simulate", "integrate the PIE in time");
  add_common(c_simulate, sim);
  double t_end = 1, dt = 1e-3;
  std::string init = "cos";
  std::optional<int> sim_N;
  c_simulate->add_option("--t-end", t_end, "final time")->check(CLI::NonNegativeNumber);
  c_simulate->add_option("--dt", dt, "time step")->check(CLI::PositiveNumber);
  c_simulate->add_option("--init", init, "initial state: constant, cos, sin, bump");
  c_simulate->add_option("--N", sim_N, "Legendre degree")->check(CLI::Range(2, 200));

  auto* c_reproduce = app.add_subcommand("reproduce", "reproduce a reference decay-rate table");
  add_common(c_reproduce, repro, false);
  int table = 0, r_degree = 3, r_N = 16;
  c_reproduce->add_option("--table", table, "1 (reaction-diffusion) or 2 (wave)")->required();
  c_reproduce->add_option("--degree", r_degree, "monomial degree d")->check(CLI::Range(1, 8));
  c_reproduce->add_option("--N", r_N, "Legendre degree of the spectral oracle")->check(CLI::Range(2, 200));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*c_convert) return cmd_convert(conv);
    if (*c_certify) return cmd_certify(cert, alpha, search, degree, tol);
    if (*c_spectrum) return cmd_spectrum(spec, spec_N);
    if (*c_simulate) return cmd_simulate(sim, t_end, dt, init, sim_N);
    if (*c_reproduce) return cmd_reproduce(repro, table, r_degree, r_N);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConstructionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (std::string(e.what()).find("F3") != std::string::npos)
      std::cerr << "hint: choose F3 rows whose moments complete the boundary conditions, or drop F3 to use the default\n";
    return kData;
  }
  return kUsage;
}
