#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/Sparse>

#include "pie/scalar.hpp"

namespace pie {

// Coefficient of the variable X_ij (i <= j) of PSD block `block`, or of free
// variable i when block == -1.
struct SdpEntry {
  int block = 0;
  int i = 0;
  int j = 0;
  double v = 0;
};

struct SdpConstraint {
  std::vector<SdpEntry> terms;
  double rhs = 0;
};

// find X_k >= 0 (PSD blocks; 1x1 blocks are nonnegative scalars) and free
// variables y such that every constraint holds, minimizing the optional
// objective over the PSD blocks.
struct SdpProblem {
  std::vector<int> blocks;
  int num_free = 0;
  std::vector<SdpConstraint> constraints;
  std::vector<SdpEntry> objective;
};

enum class SdpStatus { feasible, infeasible, indeterminate };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::feasible: return "feasible";
    case SdpStatus::infeasible: return "infeasible";
    default: return "indeterminate";
  }
}

struct SdpSolution {
  SdpStatus status = SdpStatus::indeterminate;
  std::vector<Eigen::MatrixXd> X;
  Eigen::VectorXd free;
  Eigen::VectorXd farkas;         // infeasible: y with b'y = 1 and -A'y PSD (approximately)
  double max_eq_residual = 0;     // max |A x - b| / (1 + |x|_inf + |b|_inf)
  double min_eig = 0;             // smallest eigenvalue over the PSD blocks
  double farkas_violation = 0;    // largest eigenvalue of A'y over the blocks
  double objective = 0;
  int iterations = 0;
  std::string message;
};

struct SdpOptions {
  double feas_tol = 1e-8;
  double infeas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iters = 120;
  bool verbose = false;
};

namespace detail {

struct Block {
  int N = 0;
  Eigen::MatrixXd At;  // N^2 x r, column i = vec(A_i)
  Eigen::MatrixXd C;   // N x N
};

inline double min_eig(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return std::numeric_limits<double>::infinity();
  if (M.rows() == 1) return M(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Largest t in (0, inf] with X + t D PSD, given X = L L'.
inline double max_step(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& D) {
  Eigen::MatrixXd Y = llt.matrixL().solve(D);
  Eigen::MatrixXd M = llt.matrixL().solve(Y.transpose());
  M = 0.5 * (M + M.transpose()).eval();
  double lmin = min_eig(M);
  return lmin >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

}  // namespace detail

// Homogeneous self-dual primal-dual interior point method with
// Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
inline SdpSolution solve_sdp_interior(const SdpProblem& prob, const SdpOptions& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int nb = static_cast<int>(prob.blocks.size());
  const int mc = static_cast<int>(prob.constraints.size());
  const int nf = prob.num_free;
  std::vector<int> offset(nb + 1, 0);
  for (int k = 0; k < nb; ++k) {
    if (prob.blocks[k] <= 0) throw UsageError("PSD block sizes must be positive");
    offset[k + 1] = offset[k] + prob.blocks[k] * prob.blocks[k];
  }
  const int nvec = offset[nb];

  // Sparse constraint data in full-vec coordinates; off-diagonal coefficients
  // are split symmetrically.
  std::vector<Eigen::Triplet<double>> trip;
  MatrixXd AF = MatrixXd::Zero(mc, nf);
  VectorXd b(mc);
  for (int r = 0; r < mc; ++r) {
    const auto& con = prob.constraints[r];
    b(r) = con.rhs;
    for (const auto& e : con.terms) {
      if (e.block == -1) {
        if (e.i < 0 || e.i >= nf) throw UsageError("free variable index out of range");
        AF(r, e.i) += e.v;
        continue;
      }
      if (e.block < 0 || e.block >= nb) throw UsageError("block index out of range");
      const int N = prob.blocks[e.block];
      if (e.i < 0 || e.j < 0 || e.i >= N || e.j >= N) throw UsageError("block entry out of range");
      if (e.i == e.j) {
        trip.emplace_back(r, offset[e.block] + e.i * N + e.i, e.v);
      } else {
        trip.emplace_back(r, offset[e.block] + e.i * N + e.j, 0.5 * e.v);
        trip.emplace_back(r, offset[e.block] + e.j * N + e.i, 0.5 * e.v);
      }
    }
  }
  Eigen::SparseMatrix<double> AK(mc, nvec);
  AK.setFromTriplets(trip.begin(), trip.end());

  // Eliminate free variables: rows orthogonal to range(AF).
  MatrixXd Q2;
  Eigen::ColPivHouseholderQR<MatrixXd> fqr;
  int rf = 0;
  if (nf > 0) {
    fqr.setThreshold(1e-11);
    fqr.compute(AF);
    rf = static_cast<int>(fqr.rank());
    MatrixXd Qfull = fqr.householderQ();
    Q2 = Qfull.rightCols(mc - rf);
  } else {
    Q2 = MatrixXd::Identity(mc, mc);
  }
  MatrixXd Ared = Q2.transpose() * AK;  // r x nvec
  VectorXd bred = Q2.transpose() * b;

  // Drop rows that vanish (consistency is checked through the embedding).
  const int r0 = static_cast<int>(Ared.rows());
  std::vector<int> keep;
  VectorXd rowscale(r0);
  double amax = Ared.cwiseAbs().maxCoeff();
  if (!(amax > 0)) amax = 1;
  for (int i = 0; i < r0; ++i) {
    double nrm = Ared.row(i).norm();
    if (nrm > 1e-13 * amax) {
      keep.push_back(i);
      rowscale(i) = 1.0 / nrm;
    } else {
      rowscale(i) = 0;
    }
  }
  const int r = static_cast<int>(keep.size());
  SdpSolution sol;
  std::vector<detail::Block> blk(nb);
  VectorXd bh(r);
  for (int ii = 0; ii < r; ++ii) bh(ii) = bred(keep[ii]) * rowscale(keep[ii]);
  for (int k = 0; k < nb; ++k) {
    const int N = prob.blocks[k];
    blk[k].N = N;
    blk[k].At.resize(N * N, r);
    for (int ii = 0; ii < r; ++ii)
      blk[k].At.col(ii) = Ared.row(keep[ii]).segment(offset[k], N * N).transpose() * rowscale(keep[ii]);
    blk[k].C = MatrixXd::Zero(N, N);
  }
  bool has_obj = !prob.objective.empty();
  for (const auto& e : prob.objective) {
    if (e.block < 0 || e.block >= nb) throw UsageError("objective may only involve PSD blocks");
    if (e.i == e.j) {
      blk[e.block].C(e.i, e.i) += e.v;
    } else {
      blk[e.block].C(e.i, e.j) += 0.5 * e.v;
      blk[e.block].C(e.j, e.i) += 0.5 * e.v;
    }
  }
  // Consistency of dropped rows: their right-hand side must vanish.
  for (int i = 0; i < r0; ++i)
    if (rowscale(i) == 0 && std::abs(bred(i)) > 1e-9 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
      sol.status = SdpStatus::infeasible;
      sol.farkas = Q2.col(i) / bred(i);
      sol.message = "constraint rows are inconsistent";
      return sol;
    }
  Ared.resize(0, 0);

  auto Aop = [&](const std::vector<MatrixXd>& M) {
    VectorXd v = VectorXd::Zero(r);
    for (int k = 0; k < nb; ++k) v += blk[k].At.transpose() * Eigen::Map<const VectorXd>(M[k].data(), M[k].size());
    return v;
  };
  auto ATop = [&](const VectorXd& y) {
    std::vector<MatrixXd> out(nb);
    for (int k = 0; k < nb; ++k) {
      VectorXd v = blk[k].At * y;
      out[k] = Eigen::Map<MatrixXd>(v.data(), blk[k].N, blk[k].N);
      out[k] = 0.5 * (out[k] + out[k].transpose()).eval();
    }
    return out;
  };
  auto inner = [&](const std::vector<MatrixXd>& P, const std::vector<MatrixXd>& Q) {
    double s = 0;
    for (int k = 0; k < nb; ++k) s += P[k].cwiseProduct(Q[k]).sum();
    return s;
  };
  std::vector<MatrixXd> Cm(nb);
  for (int k = 0; k < nb; ++k) Cm[k] = blk[k].C;

  double nu = 0;
  for (int k = 0; k < nb; ++k) nu += blk[k].N;
  std::vector<MatrixXd> X(nb), S(nb);
  for (int k = 0; k < nb; ++k) {
    X[k] = MatrixXd::Identity(blk[k].N, blk[k].N);
    S[k] = MatrixXd::Identity(blk[k].N, blk[k].N);
  }
  VectorXd y = VectorXd::Zero(r);
  double tau = 1, kappa = 1;
  const double bnorm = bh.norm();

  // Recovers the original variables from a point of the reduced problem.
  auto recover = [&](const std::vector<MatrixXd>& Xs) {
    VectorXd xvec(nvec);
    for (int k = 0; k < nb; ++k)
      xvec.segment(offset[k], blk[k].N * blk[k].N) = Eigen::Map<const VectorXd>(Xs[k].data(), Xs[k].size());
    VectorXd resid = b - AK * xvec;
    VectorXd fv = VectorXd::Zero(nf);
    if (nf > 0) fv = fqr.solve(resid);
    VectorXd err = AK * xvec + AF * fv - b;
    double xinf = xvec.cwiseAbs().maxCoeff();
    if (nf > 0) xinf = std::max(xinf, fv.cwiseAbs().maxCoeff());
    double rel = mc ? err.cwiseAbs().maxCoeff() / (1 + xinf + b.cwiseAbs().maxCoeff()) : 0.0;
    return std::make_pair(fv, rel);
  };

  int stall = 0;
  double best_mu = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iters; ++it) {
    sol.iterations = it;
    VectorXd rp = Aop(X) - bh * tau;
    std::vector<MatrixXd> rd = ATop(y);
    for (int k = 0; k < nb; ++k) rd[k] += S[k] - Cm[k] * tau;
    double cx = inner(Cm, X);
    double by = bh.dot(y);
    double rg = -by + cx + kappa;
    double mu = (inner(X, S) + tau * kappa) / (nu + 1);

    // Termination tests.
    {
      double pres = (Aop(X) / tau - bh).norm() / (1 + bnorm);
      double dres = 0, gap = 0;
      if (has_obj) {
        double dn = 0;
        for (int k = 0; k < nb; ++k) dn += rd[k].squaredNorm();
        dres = std::sqrt(dn) / tau;
        gap = std::abs(cx - by) / tau / (1 + std::abs(cx / tau));
      }
      if (pres <= opt.feas_tol && (!has_obj || (dres <= opt.feas_tol && gap <= opt.gap_tol))) {
        std::vector<MatrixXd> Xs(nb);
        for (int k = 0; k < nb; ++k) Xs[k] = X[k] / tau;
        auto [fv, rel] = recover(Xs);
        if (rel <= opt.feas_tol) {
          sol.status = SdpStatus::feasible;
          sol.X = Xs;
          sol.free = fv;
          sol.max_eq_residual = rel;
          sol.min_eig = std::numeric_limits<double>::infinity();
          for (const auto& M : Xs) sol.min_eig = std::min(sol.min_eig, detail::min_eig(M));
          sol.objective = cx / tau;
          sol.message = "converged";
          return sol;
        }
      }
      if (by > 0) {
        VectorXd yb = y / by;
        auto ATy = ATop(yb);
        double viol = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < nb; ++k) {
          Eigen::SelfAdjointEigenSolver<MatrixXd> es(ATy[k], Eigen::EigenvaluesOnly);
          viol = std::max(viol, es.eigenvalues()(es.eigenvalues().size() - 1));
        }
        if (viol <= opt.infeas_tol) {
          sol.status = SdpStatus::infeasible;
          VectorXd full = VectorXd::Zero(r0);
          for (int ii = 0; ii < r; ++ii) full(keep[ii]) = yb(ii) * rowscale(keep[ii]);
          sol.farkas = Q2 * full;
          sol.farkas_violation = viol;
          sol.message = "Farkas certificate found";
          return sol;
        }
      }
    }

    // Nesterov-Todd scaling per block.
    std::vector<MatrixXd> G(nb), W(nb);
    std::vector<VectorXd> lam(nb);
    std::vector<Eigen::LLT<MatrixXd>> lx(nb), ls(nb);
    bool broken = false;
    for (int k = 0; k < nb; ++k) {
      lx[k].compute(X[k]);
      ls[k].compute(S[k]);
      if (lx[k].info() != Eigen::Success || ls[k].info() != Eigen::Success) {
        broken = true;
        break;
      }
      MatrixXd Lx = lx[k].matrixL();
      MatrixXd Ls = ls[k].matrixL();
      Eigen::JacobiSVD<MatrixXd> svd(Ls.transpose() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
      lam[k] = svd.singularValues();
      G[k] = Lx * svd.matrixV() * lam[k].cwiseSqrt().cwiseInverse().asDiagonal();
      W[k] = G[k] * G[k].transpose();
    }
    if (broken) {
      sol.message = "lost positive definiteness";
      break;
    }

    // Schur complement H = sum_k B_k' B_k with B_k columns vec(G' A_i G).
    MatrixXd H = MatrixXd::Zero(r, r);
    for (int k = 0; k < nb; ++k) {
      const int N = blk[k].N;
      MatrixXd B(N * N, r);
      for (int i = 0; i < r; ++i) {
        Eigen::Map<const MatrixXd> Ai(blk[k].At.col(i).data(), N, N);
        MatrixXd T = G[k].transpose() * Ai * G[k];
        B.col(i) = Eigen::Map<const VectorXd>(T.data(), N * N);
      }
      H.selfadjointView<Eigen::Lower>().rankUpdate(B.transpose());
    }
    H = H.selfadjointView<Eigen::Lower>();
    double hdiag = H.diagonal().cwiseAbs().maxCoeff();
    MatrixXd Hreg = H;
    Hreg.diagonal().array() += 1e-14 * std::max(1.0, hdiag);
    Eigen::LDLT<MatrixXd> hfac(Hreg);
    // Refine against the unregularized matrix.
    auto hsolve = [&](const VectorXd& rhs) {
      VectorXd z = hfac.solve(rhs);
      for (int k = 0; k < 2; ++k) z += hfac.solve(rhs - H * z);
      return z;
    };
    if (hfac.info() != Eigen::Success) {
      sol.message = "Schur complement factorization failed";
      break;
    }

    auto Wmul = [&](const std::vector<MatrixXd>& M) {
      std::vector<MatrixXd> out(nb);
      for (int k = 0; k < nb; ++k) out[k] = W[k] * M[k] * W[k];
      return out;
    };
    std::vector<MatrixXd> WC = Wmul(Cm);
    VectorXd AWC = Aop(WC);
    VectorXd g = AWC + bh;
    VectorXd h = AWC - bh;
    VectorXd q = hsolve(g);
    double cwc = inner(Cm, WC);
    std::vector<MatrixXd> Wrd = Wmul(rd);

    struct Dir {
      std::vector<MatrixXd> dX, dS;
      VectorXd dy;
      double dtau = 0, dkappa = 0;
    };
    auto direction = [&](double eta, const std::vector<MatrixXd>& V, double rtk) {
      std::vector<MatrixXd> Rc(nb);
      for (int k = 0; k < nb; ++k) {
        const int N = blk[k].N;
        MatrixXd U(N, N);
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < N; ++j) U(i, j) = 2 * V[k](i, j) / (lam[k](i) + lam[k](j));
        Rc[k] = G[k] * U * G[k].transpose();
      }
      std::vector<MatrixXd> tmp(nb);
      for (int k = 0; k < nb; ++k) tmp[k] = Rc[k] + eta * Wrd[k];
      VectorXd f1 = -eta * rp - Aop(tmp);
      double f2 = -eta * rg - inner(Cm, tmp) - rtk / tau;
      VectorXd p = hsolve(f1);
      Dir d;
      double den = h.dot(q) - cwc - kappa / tau;
      d.dtau = (f2 - h.dot(p)) / den;
      d.dy = p + q * d.dtau;
      auto ATdy = ATop(d.dy);
      d.dS.resize(nb);
      d.dX.resize(nb);
      for (int k = 0; k < nb; ++k) {
        d.dS[k] = -eta * rd[k] - ATdy[k] + Cm[k] * d.dtau;
        d.dX[k] = Rc[k] - W[k] * d.dS[k] * W[k];
        d.dX[k] = 0.5 * (d.dX[k] + d.dX[k].transpose()).eval();
        d.dS[k] = 0.5 * (d.dS[k] + d.dS[k].transpose()).eval();
      }
      d.dkappa = (rtk - kappa * d.dtau) / tau;
      return d;
    };
    auto step_len = [&](const Dir& d) {
      double a = std::numeric_limits<double>::infinity();
      for (int k = 0; k < nb; ++k) {
        a = std::min(a, detail::max_step(lx[k], d.dX[k]));
        a = std::min(a, detail::max_step(ls[k], d.dS[k]));
      }
      if (d.dtau < 0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    // Predictor.
    std::vector<MatrixXd> Vaff(nb);
    for (int k = 0; k < nb; ++k) Vaff[k] = -MatrixXd(lam[k].array().square().matrix().asDiagonal());
    Dir aff = direction(1.0, Vaff, -tau * kappa);
    double a_aff = std::min(1.0, step_len(aff));
    double sigma = std::pow(1 - a_aff, 3);
    sigma = std::min(1.0, std::max(0.0, sigma));

    // Corrector with the second-order term in scaled coordinates.
    std::vector<MatrixXd> Vc(nb);
    for (int k = 0; k < nb; ++k) {
      MatrixXd Ginv = G[k].inverse();
      MatrixXd dXs = Ginv * aff.dX[k] * Ginv.transpose();
      MatrixXd dSs = G[k].transpose() * aff.dS[k] * G[k];
      MatrixXd prod = 0.5 * (dXs * dSs + dSs * dXs);
      Vc[k] = sigma * mu * MatrixXd::Identity(blk[k].N, blk[k].N) -
              MatrixXd(lam[k].array().square().matrix().asDiagonal()) - prod;
    }
    Dir d = direction(1 - sigma, Vc, sigma * mu - tau * kappa - aff.dtau * aff.dkappa);
    double a = std::min(1.0, 0.99 * step_len(d));
    for (int k = 0; k < nb; ++k) {
      X[k] += a * d.dX[k];
      S[k] += a * d.dS[k];
    }
    y += a * d.dy;
    tau += a * d.dtau;
    kappa += a * d.dkappa;
    if (opt.verbose) {
      std::fprintf(stderr, "it %3d mu %.3e tau %.3e kappa %.3e step %.3f sigma %.3f |rp| %.2e by %.3e", it, mu,
                   tau, kappa, a, sigma, rp.norm(), by);
      for (int k = 0; k < nb; ++k) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(X[k] / tau, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        int small = 0;
        for (int i = 0; i < ev.size(); ++i) small += ev(i) < 1e-6 * ev(ev.size() - 1);
        std::fprintf(stderr, " | %.1e..%.1e (%d)", ev(0), ev(ev.size() - 1), small);
      }
      std::fprintf(stderr, "\n");
    }
    if (a < 1e-8) {
      if (++stall >= 3) {
        sol.message = "step length stalled";
        break;
      }
    } else {
      stall = 0;
    }
    if (mu < 1e-30) {
      sol.message = "complementarity exhausted";
      break;
    }
    // Weak infeasibility: tau dies without a Farkas vector, or mu turns back up.
    best_mu = std::min(best_mu, mu);
    if (tau < 1e-9 * std::max(1.0, kappa)) {
      sol.message = "no strictly feasible point (tau vanished without a certificate)";
      break;
    }
    if (it > 10 && mu > 1e3 * best_mu) {
      sol.message = "iterates diverge";
      break;
    }
  }
  sol.status = SdpStatus::indeterminate;
  if (sol.message.empty()) sol.message = "iteration limit reached";
  return sol;
}

// Diagonal facial reduction, then the interior point method. A constraint
// with zero right-hand side whose live terms are all diagonal entries of
// one sign forces those diagonals, and hence their rows and columns, to
// vanish; such rows are removed so the remaining problem can have an
// interior.
inline SdpSolution solve_sdp(const SdpProblem& prob, const SdpOptions& opt = {}) {
  const int nb = static_cast<int>(prob.blocks.size());
  struct Agg {
    std::vector<SdpEntry> terms;
    double rhs;
  };
  std::vector<Agg> cons;
  for (const auto& con : prob.constraints) {
    std::vector<SdpEntry> t = con.terms;
    for (auto& e : t)
      if (e.i > e.j && e.block >= 0) std::swap(e.i, e.j);
    std::sort(t.begin(), t.end(), [](const SdpEntry& l, const SdpEntry& r) {
      return std::tie(l.block, l.i, l.j) < std::tie(r.block, r.i, r.j);
    });
    std::vector<SdpEntry> merged;
    for (const auto& e : t) {
      if (!merged.empty() && merged.back().block == e.block && merged.back().i == e.i && merged.back().j == e.j)
        merged.back().v += e.v;
      else merged.push_back(e);
    }
    cons.push_back({merged, con.rhs});
  }
  std::vector<std::vector<char>> dead(nb);
  for (int k = 0; k < nb; ++k) dead[k].assign(std::max(0, prob.blocks[k]), 0);
  int removed = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& con : cons) {
      if (con.rhs != 0) continue;
      double mx = 0;
      for (const auto& e : con.terms) mx = std::max(mx, std::abs(e.v));
      int sign = 0;
      bool ok = true;
      for (const auto& e : con.terms) {
        if (std::abs(e.v) <= 1e-12 * mx) continue;
        if (e.block < 0 || e.block >= nb || e.i < 0 || e.j >= static_cast<int>(dead[e.block].size())) {
          ok = false;
          break;
        }
        if (dead[e.block][e.i] || dead[e.block][e.j]) continue;
        int s = e.v > 0 ? 1 : -1;
        if (e.i != e.j || (sign != 0 && s != sign)) {
          ok = false;
          break;
        }
        sign = s;
      }
      if (!ok || sign == 0) continue;
      for (const auto& e : con.terms)
        if (std::abs(e.v) > 1e-12 * mx && !dead[e.block][e.i]) {
          dead[e.block][e.i] = 1;
          ++removed;
          changed = true;
        }
    }
  }
  if (removed == 0) return solve_sdp_interior(prob, opt);

  SdpProblem red;
  red.num_free = prob.num_free;
  std::vector<int> bmap(nb, -1);
  std::vector<std::vector<int>> imap(nb);
  for (int k = 0; k < nb; ++k) {
    imap[k].assign(dead[k].size(), -1);
    int cnt = 0;
    for (std::size_t i = 0; i < dead[k].size(); ++i)
      if (!dead[k][i]) imap[k][i] = cnt++;
    if (cnt > 0) {
      bmap[k] = static_cast<int>(red.blocks.size());
      red.blocks.push_back(cnt);
    }
  }
  auto remap = [&](const std::vector<SdpEntry>& in) {
    std::vector<SdpEntry> out;
    for (const auto& e : in) {
      if (e.block < 0) {
        out.push_back(e);
        continue;
      }
      if (dead[e.block][e.i] || dead[e.block][e.j]) continue;
      out.push_back({bmap[e.block], imap[e.block][e.i], imap[e.block][e.j], e.v});
    }
    return out;
  };
  for (const auto& con : cons) red.constraints.push_back({remap(con.terms), con.rhs});
  red.objective = remap(prob.objective);
  SdpSolution s = solve_sdp_interior(red, opt);
  s.message += " (" + std::to_string(removed) + " rows fixed at zero by facial reduction)";
  if (s.status != SdpStatus::feasible) return s;
  std::vector<Eigen::MatrixXd> full(nb);
  for (int k = 0; k < nb; ++k) {
    const int N = prob.blocks[k];
    full[k] = Eigen::MatrixXd::Zero(N, N);
    if (bmap[k] < 0) continue;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (imap[k][i] >= 0 && imap[k][j] >= 0) full[k](i, j) = s.X[bmap[k]](imap[k][i], imap[k][j]);
  }
  s.X = std::move(full);
  s.min_eig = std::numeric_limits<double>::infinity();
  for (const auto& M : s.X) s.min_eig = std::min(s.min_eig, detail::min_eig(M));
  return s;
}

// Text form: header, block sizes, then one line per coefficient:
//   <constraint> <block> <i> <j> <value>
// with block 0 for free variables (i = index) and 1.. for PSD blocks;
// constraint 0 is the objective. Right-hand sides are listed as
//   rhs <constraint> <value>.
inline std::string dump_sdp(const SdpProblem& p) {
  std::ostringstream os;
  os.precision(17);
  os << "sdp " << p.blocks.size() << ' ' << p.num_free << ' ' << p.constraints.size() << '\n';
  os << "blocks";
  for (int n : p.blocks) os << ' ' << n;
  os << '\n';
  auto put = [&](int c, const SdpEntry& e) {
    os << c << ' ' << e.block + 1 << ' ' << e.i << ' ' << e.j << ' ' << e.v << '\n';
  };
  for (const auto& e : p.objective) put(0, e);
  for (std::size_t c = 0; c < p.constraints.size(); ++c) {
    os << "rhs " << c + 1 << ' ' << p.constraints[c].rhs << '\n';
    for (const auto& e : p.constraints[c].terms) put(static_cast<int>(c + 1), e);
  }
  return os.str();
}

inline SdpProblem parse_sdp(std::istream& in) {
  SdpProblem p;
  std::string tag;
  std::size_t nb = 0, nc = 0;
  if (!(in >> tag >> nb >> p.num_free >> nc) || tag != "sdp") throw UsageError("sdp dump: bad header");
  if (!(in >> tag) || tag != "blocks") throw UsageError("sdp dump: missing block sizes");
  p.blocks.resize(nb);
  for (auto& n : p.blocks)
    if (!(in >> n)) throw UsageError("sdp dump: bad block size");
  p.constraints.resize(nc);
  std::string tok;
  while (in >> tok) {
    if (tok == "rhs") {
      std::size_t c;
      double v;
      if (!(in >> c >> v) || c == 0 || c > nc) throw UsageError("sdp dump: bad rhs line");
      p.constraints[c - 1].rhs = v;
      continue;
    }
    SdpEntry e;
    std::size_t c = std::stoul(tok);
    if (!(in >> e.block >> e.i >> e.j >> e.v) || c > nc) throw UsageError("sdp dump: bad entry line");
    e.block -= 1;
    if (c == 0) p.objective.push_back(e);
    else p.constraints[c - 1].terms.push_back(e);
  }
  return p;
}

}  // namespace pie
