#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include "pie/convert.hpp"

namespace pie {

// Legendre polynomials P_k((2x - a - b) / (b - a)), k = 0..N, on [a, b].
template <class S>
struct LegendreBasis {
  int N = 0;
  Interval<S> dom;
  std::vector<Poly<S>> phi;
  std::vector<S> norm2;  // int phi_k^2

  LegendreBasis(int degree, const Interval<S>& d) : N(degree), dom(d) {
    if (degree < 0) throw UsageError("basis degree must be non-negative");
    const S L = dom.b - dom.a;
    Poly<S> xi = Poly<S>::monomial(1, 0, S(2) / L) - Poly<S>((dom.a + dom.b) / L);
    phi.push_back(Poly<S>(S(1)));
    if (N >= 1) phi.push_back(xi);
    for (int k = 1; k < N; ++k)
      phi.push_back((xi * phi[k] * S(2 * k + 1) - phi[k - 1] * S(k)) * (S(1) / S(k + 1)));
    for (int k = 0; k <= N; ++k) norm2.push_back(L / S(2 * k + 1));
  }
  int size() const { return N + 1; }

  // coef(i) = <phi_i, p> / <phi_i, phi_i>.
  std::vector<S> project(const Poly<S>& p) const {
    std::vector<S> out(N + 1, S(0));
    if (p.is_zero()) return out;
    // Moments int x^e phi_i over the interval.
    for (int i = 0; i <= N; ++i) {
      S acc(0);
      for (const auto& tp : phi[i].terms())
        for (const auto& tq : p.terms()) {
          const int e = tp.ex + tq.ex + 1;
          acc += tp.c * tq.c * (ipow(dom.b, e) - ipow(dom.a, e)) / S(e);
        }
      out[i] = acc / norm2[i];
    }
    return out;
  }
};

// Matrix of op in Legendre coordinates: finite components first, then
// (N+1) coefficients per function component. Inputs use degree N_in,
// outputs are projected onto degree N_out.
template <class S>
Eigen::MatrixXd discretize(const PiOperator<S>& op, const LegendreBasis<S>& in, const LegendreBasis<S>& out) {
  const int rows = op.out.m + op.out.n * out.size();
  const int cols = op.in.m + op.in.n * in.size();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(rows, cols);
  auto fill = [&](int col, const MixedVector<S>& v) {
    MixedVector<S> r = apply(op, v);
    for (int i = 0; i < op.out.m; ++i) D(i, col) = to_double(r.v0(i, 0));
    for (int c = 0; c < op.out.n; ++c) {
      auto coef = out.project(r.v1(c, 0));
      for (int i = 0; i < out.size(); ++i) D(op.out.m + c * out.size() + i, col) = to_double(coef[i]);
    }
  };
  for (int l = 0; l < op.in.m; ++l) {
    Mat<S> v0(op.in.m, 1);
    v0(l, 0) = S(1);
    fill(l, MixedVector<S>(v0, PolyMat<S>(op.in.n, 1)));
  }
  for (int c = 0; c < op.in.n; ++c)
    for (int j = 0; j < in.size(); ++j) {
      PolyMat<S> f(op.in.n, 1);
      f(c, 0) = in.phi[j];
      fill(op.in.m + c * in.size() + j, MixedVector<S>(Mat<S>(op.in.m, 1), f));
    }
  return D;
}

template <class S>
Eigen::MatrixXd discretize(const PiOperator<S>& op, const LegendreBasis<S>& basis) {
  return discretize(op, basis, basis);
}

// Orthonormal basis of the nullspace of K (columns).
inline Eigen::MatrixXd nullspace(const Eigen::MatrixXd& K, double rel_tol = 1e-10) {
  const int s = static_cast<int>(K.cols());
  if (K.rows() == 0) return Eigen::MatrixXd::Identity(s, s);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(K, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * std::max(1.0, sv(0))) ++r;
  return svd.matrixV().rightCols(s - r);
}

// The PIE in Legendre coordinates, restricted to K v = 0.
struct DiscretizedPencil {
  int N = 0;
  int m = 0;
  int n = 0;
  double a = 0, b = 1;
  Eigen::MatrixXd T, A, K;     // full discretizations of T_hat, A_hat, K
  Eigen::MatrixXd Z;           // orthonormal nullspace of K
  Eigen::MatrixXd Tp, Ap;      // square projected pencil
  Eigen::MatrixXd state;       // T at output degree N + 2 (exact)
  Eigen::MatrixXd seminorm;    // (I - S) T at output degree N + 2 (exact)
  Eigen::VectorXd out_mass;    // L2 weights of the output coefficients

  int out_size() const { return N + 3; }
  double state_norm(const Eigen::VectorXcd& v) const { return weighted(state * v); }
  double seminorm_of(const Eigen::VectorXcd& v) const { return weighted(seminorm * v); }
  double weighted(const Eigen::VectorXcd& c) const {
    double s = 0;
    for (int i = 0; i < c.size(); ++i) s += out_mass(i) * std::norm(c(i));
    return std::sqrt(s);
  }
};

template <class S>
DiscretizedPencil discretize_pencil(const PieSystem<S>& sys, const TrajectoryOperator<S>& traj, int N) {
  if (N < 1) throw UsageError("basis size N must be at least 1");
  const auto& M = sys.maps;
  LegendreBasis<S> basis(N, M.dom);
  LegendreBasis<S> wide(N + 2, M.dom);
  DiscretizedPencil p;
  p.N = N;
  p.m = M.m;
  p.n = M.n;
  p.a = to_double(M.dom.a);
  p.b = to_double(M.dom.b);
  p.T = discretize(sys.T_hat, basis);
  p.A = discretize(sys.A_hat, basis);
  p.K = discretize(sys.K, basis);
  p.Z = nullspace(p.K);
  const int s = static_cast<int>(p.T.cols());
  if (p.Z.cols() != s - M.m)
    throw ConstructionError("constraint operator is rank deficient; boundary conditions are redundant");
  p.Tp = p.T.bottomRows(s - M.m) * p.Z;
  p.Ap = p.A.bottomRows(s - M.m) * p.Z;
  p.state = discretize(M.T, basis, wide);
  p.seminorm = discretize(traj.T_tilde, basis, wide);
  p.out_mass.resize(M.n * wide.size());
  for (int c = 0; c < M.n; ++c)
    for (int i = 0; i < wide.size(); ++i) p.out_mass(c * wide.size() + i) = to_double(wide.norm2[i]);
  return p;
}

struct Eigenpair {
  std::complex<double> value;
  Eigen::VectorXcd vector;  // full Legendre coordinates
  double seminorm = 0;      // |(I - S) T v| / |T v|
  bool visible = false;
};

struct Spectrum {
  std::vector<Eigenpair> finite;  // sorted by decreasing real part
  int infinite = 0;
  double visibility_threshold = 1e-8;
};

inline Spectrum constrained_spectrum(const DiscretizedPencil& p, double visibility_threshold = 1e-8) {
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(p.Ap, p.Tp, true);
  if (ges.info() != Eigen::Success) throw ConstructionError("generalized eigenvalue iteration failed");
  Spectrum out;
  out.visibility_threshold = visibility_threshold;
  const auto alphas = ges.alphas();
  const auto betas = ges.betas();
  const auto vecs = ges.eigenvectors();
  const double scale = std::max(1.0, p.Ap.norm() / std::max(1e-300, p.Tp.norm()));
  for (int i = 0; i < alphas.size(); ++i) {
    if (std::abs(betas(i)) <= 1e-13 * std::abs(alphas(i)) || std::abs(alphas(i) / betas(i)) > 1e12 * scale) {
      ++out.infinite;
      continue;
    }
    Eigenpair e;
    e.value = alphas(i) / betas(i);
    e.vector = p.Z.cast<std::complex<double>>() * vecs.col(i);
    double full = p.state_norm(e.vector);
    double semi = p.seminorm_of(e.vector);
    e.seminorm = full > 0 ? semi / full : 0;
    e.visible = e.seminorm > visibility_threshold;
    out.finite.push_back(std::move(e));
  }
  std::sort(out.finite.begin(), out.finite.end(),
            [](const Eigenpair& l, const Eigenpair& r) { return l.value.real() > r.value.real(); });
  return out;
}

// Largest real part among visible modes, negated: the decay rate of the
// measured seminorm. Throws when no mode is visible.
inline double decay_rate(const Spectrum& s) {
  for (const auto& e : s.finite)
    if (e.visible) return -e.value.real();
  throw ConstructionError("no visible eigenvalue");
}

inline const Eigenpair& leading_visible(const Spectrum& s) {
  for (const auto& e : s.finite)
    if (e.visible) return e;
  throw ConstructionError("no visible eigenvalue");
}

// Fundamental-state coordinates of u0 (given with its second derivative),
// projected onto K v = 0.
struct InitialState {
  Eigen::VectorXd v;
  double constraint_residual = 0;  // |K v| before projection
};

template <class S>
InitialState project_initial(const PieSystem<S>& sys, const DiscretizedPencil& p,
                             const std::function<double(int, double)>& u0,
                             const std::function<double(int, double)>& u0_xx) {
  const auto& M = sys.maps;
  using Gauss = boost::math::quadrature::gauss<double, 40>;
  const int s = static_cast<int>(p.T.cols());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(s);
  PolyMat<double> F3 = M.F3.template cast<double>();
  for (int i = 0; i < M.m; ++i) {
    double acc = 0;
    for (int c = 0; c < M.n; ++c)
      acc += Gauss::integrate([&](double x) { return F3(i, c).eval(x, 0) * u0(c, x); }, p.a, p.b);
    v(i) = acc;
  }
  LegendreBasis<double> basis(p.N, Interval<double>(p.a, p.b));
  for (int c = 0; c < M.n; ++c)
    for (int j = 0; j <= p.N; ++j) {
      double ip = Gauss::integrate([&](double x) { return basis.phi[j].eval(x, 0) * u0_xx(c, x); }, p.a, p.b);
      v(M.m + c * (p.N + 1) + j) = ip / basis.norm2[j];
    }
  InitialState st;
  st.constraint_residual = p.K.rows() ? (p.K * v).norm() : 0.0;
  st.v = p.Z * (p.Z.transpose() * v);
  return st;
}

struct Trajectory {
  std::vector<double> times;
  std::vector<double> seminorm;
  std::vector<double> norm;
  std::vector<Eigen::VectorXd> states;  // full coordinates, one per stored time
};

// Crank-Nicolson on the projected pencil. Stores every `stride`-th step.
inline Trajectory integrate_pie(const DiscretizedPencil& p, const Eigen::VectorXd& v0, double t_end, double dt,
                                int stride = 1) {
  if (!(dt > 0) || !(t_end >= 0)) throw UsageError("time step must be positive and end time non-negative");
  if (v0.size() != p.T.cols()) throw UsageError("initial state has the wrong size");
  if (p.K.rows() && (p.K * v0).norm() > 1e-8 * std::max(1.0, v0.norm()))
    throw UsageError("initial state violates the constraint K v = 0");
  Eigen::VectorXd c = p.Z.transpose() * v0;
  Eigen::MatrixXd lhs = p.Tp - 0.5 * dt * p.Ap;
  Eigen::MatrixXd rhs = p.Tp + 0.5 * dt * p.Ap;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
  Trajectory tr;
  auto record = [&](double t) {
    Eigen::VectorXd v = p.Z * c;
    tr.times.push_back(t);
    tr.seminorm.push_back(p.seminorm_of(v.cast<std::complex<double>>()));
    tr.norm.push_back(p.state_norm(v.cast<std::complex<double>>()));
    tr.states.push_back(v);
  };
  const long steps = std::lround(t_end / dt);
  record(0.0);
  for (long k = 1; k <= steps; ++k) {
    c = lu.solve(rhs * c);
    if (k % 100 == 0 && p.K.rows()) {
      double drift = (p.K * (p.Z * c)).norm();
      if (drift > 1e-8 * std::max(1.0, c.norm())) throw ConstructionError("constraint drift in time stepping");
    }
    if (k % stride == 0 || k == steps) record(k * dt);
  }
  return tr;
}

inline std::string trajectory_csv(const Trajectory& t) {
  std::ostringstream os;
  os.precision(12);
  os << "time,seminorm,norm\n";
  for (std::size_t k = 0; k < t.times.size(); ++k) os << t.times[k] << ',' << t.seminorm[k] << ',' << t.norm[k] << '\n';
  return os.str();
}

// Value of component c of u = T v at x, with v in full coordinates.
inline double evaluate_state(const DiscretizedPencil& p, const Eigen::VectorXd& v, int c, double x) {
  Eigen::VectorXd coef = p.state * v;
  const int W = p.out_size();
  // Legendre recurrence in the normalized variable.
  double xi = (2 * x - p.a - p.b) / (p.b - p.a);
  double pkm1 = 1, pk = xi, sum = coef(c * W);
  if (W > 1) sum += coef(c * W + 1) * xi;
  for (int k = 1; k + 1 < W; ++k) {
    double next = ((2 * k + 1) * xi * pk - k * pkm1) / (k + 1);
    sum += coef(c * W + k + 1) * next;
    pkm1 = pk;
    pk = next;
  }
  return sum;
}

// Least-squares slope of -log(y) against t over [t0, t1].
inline double fitted_rate(const Trajectory& tr, double t0, double t1) {
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    double t = tr.times[k];
    if (t < t0 || t > t1 || tr.seminorm[k] <= 0) continue;
    double y = std::log(tr.seminorm[k]);
    n += 1;
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  if (n < 2) throw UsageError("not enough samples to fit a rate");
  return -(n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace pie
