#include "pie/spectral.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "pie/catalog.hpp"

namespace pie {
namespace {

using Q = Rational;
const double kPi = 3.14159265358979323846;

TEST(Discretize, MultiplierByXIsLegendreRecurrence) {
  Interval<Q> dom(Q(-1), Q(1));
  PolyMat<Q> x(1, 1);
  x(0, 0) = Poly<Q>::monomial(1, 0, Q(1));
  LegendreBasis<Q> basis(2, dom);
  Eigen::MatrixXd D = discretize(PiOperator<Q>::multiplier(x, dom), basis);
  Eigen::MatrixXd expect(3, 3);
  expect << 0, 1.0 / 3, 0, 1, 0, 2.0 / 5, 0, 2.0 / 3, 0;
  EXPECT_LT((D - expect).norm(), 1e-15);
}

TEST(Discretize, IdentityIsIdentity) {
  Interval<Q> dom(Q(0), Q(3));
  LegendreBasis<Q> basis(5, dom);
  Eigen::MatrixXd D = discretize(PiOperator<Q>::identity({2, 1}, dom), basis);
  EXPECT_LT((D - Eigen::MatrixXd::Identity(8, 8)).norm(), 1e-15);
}

TEST(Spectrum, PeriodicHeatLeadingVisibleMode) {
  auto e = periodic_reaction_diffusion(Q(0));
  auto sys = pde_to_pie(e.pde, e.f3);
  auto tr = s_transform(sys, SMode::t0f);
  auto p = discretize_pencil(sys, tr, 16);
  auto spec = constrained_spectrum(p);
  EXPECT_NEAR(leading_visible(spec).value.real(), -kPi * kPi, 1e-6);
  EXPECT_NEAR(leading_visible(spec).value.imag(), 0.0, 1e-6);
  // The constant mode (eigenvalue 0) is present but invisible to the seminorm.
  ASSERT_FALSE(spec.finite.empty());
  EXPECT_NEAR(spec.finite.front().value.real(), 0.0, 1e-9);
  EXPECT_FALSE(spec.finite.front().visible);
}

TEST(Spectrum, ReactionShiftsEveryMode) {
  auto e = periodic_reaction_diffusion(Q(3));
  auto sys = pde_to_pie(e.pde, e.f3);
  auto p = discretize_pencil(sys, s_transform(sys, SMode::t0f), 16);
  EXPECT_NEAR(decay_rate(constrained_spectrum(p)), kPi * kPi - 3, 1e-6);
}

TEST(Spectrum, DirichletHeat) {
  auto e = dirichlet_heat(Q(0));
  auto sys = pde_to_pie(e.pde, e.f3);
  auto p = discretize_pencil(sys, s_transform(sys, SMode::zero), 16);
  EXPECT_NEAR(decay_rate(constrained_spectrum(p)), kPi * kPi, 1e-6);
}

TEST(Spectrum, DampedWaveRealParts) {
  for (int k : {1, 4}) {
    auto e = neumann_wave(Q(k));
    auto sys = pde_to_pie(e.pde, e.f3);
    auto p = discretize_pencil(sys, s_transform(sys, SMode::zero), 16);
    auto spec = constrained_spectrum(p);
    EXPECT_NEAR(decay_rate(spec), k, 1e-6);
    // Resolved modes -k +- i j pi.
    int found = 0;
    for (const auto& ev : spec.finite)
      for (int j = 1; j <= 3; ++j)
        if (std::abs(ev.value - std::complex<double>(-k, j * kPi)) < 1e-6) ++found;
    EXPECT_EQ(found, 3);
  }
}

TEST(Simulate, PeriodicHeatCosineDecay) {
  auto e = periodic_reaction_diffusion(Q(0));
  auto sys = pde_to_pie(e.pde, e.f3);
  auto p = discretize_pencil(sys, s_transform(sys, SMode::t0f), 16);
  auto init = project_initial(
      sys, p, [](int, double x) { return std::cos(kPi * x); },
      [](int, double x) { return -kPi * kPi * std::cos(kPi * x); });
  EXPECT_LT(init.constraint_residual, 1e-12);
  auto tr = integrate_pie(p, init.v, 0.3, 1e-4, 100);
  using Gauss = boost::math::quadrature::gauss<double, 30>;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    double t = tr.times[k];
    double decay = std::exp(-kPi * kPi * t);
    double err = std::sqrt(Gauss::integrate(
        [&](double x) {
          double d = evaluate_state(p, tr.states[k], 0, x) - decay * std::cos(kPi * x);
          return d * d;
        },
        -1.0, 1.0));
    EXPECT_LT(err / decay, 1e-3) << "t=" << t;
  }
}

TEST(Simulate, ReactionDiffusionSeminormRate) {
  auto e = periodic_reaction_diffusion(Q(1));
  auto sys = pde_to_pie(e.pde, e.f3);
  auto p = discretize_pencil(sys, s_transform(sys, SMode::t0f), 16);
  auto u0 = [](int, double x) { return 1 + std::cos(kPi * x) + 0.3 * std::sin(2 * kPi * x); };
  auto u0xx = [](int, double x) {
    return -kPi * kPi * std::cos(kPi * x) - 1.2 * kPi * kPi * std::sin(2 * kPi * x);
  };
  auto tr = integrate_pie(p, project_initial(sys, p, u0, u0xx).v, 0.6, 1e-4, 10);
  EXPECT_NEAR(fitted_rate(tr, 0.2, 0.6) / (kPi * kPi - 1), 1.0, 0.02);
  // The full norm grows with the mean.
  EXPECT_GT(tr.norm.back(), tr.norm.front() * 0.5);
}

TEST(Simulate, ConstantStateHasZeroSeminorm) {
  auto e = periodic_reaction_diffusion(Q(0));
  auto sys = pde_to_pie(e.pde, e.f3);
  auto p = discretize_pencil(sys, s_transform(sys, SMode::t0f), 8);
  auto init = project_initial(sys, p, [](int, double) { return 2.0; }, [](int, double) { return 0.0; });
  auto tr = integrate_pie(p, init.v, 0.1, 1e-3, 10);
  for (double s : tr.seminorm) EXPECT_LT(s, 1e-12);
  EXPECT_NEAR(tr.norm.back(), 2.0 * std::sqrt(2.0), 1e-10);
}

TEST(Simulate, RejectsInfeasibleInitialState) {
  auto e = periodic_reaction_diffusion(Q(0));
  auto sys = pde_to_pie(e.pde, e.f3);
  auto p = discretize_pencil(sys, s_transform(sys, SMode::t0f), 4);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p.T.cols());
  v(1) = 1;  // constant u_xx violates int u_xx = 0
  EXPECT_THROW(integrate_pie(p, v, 0.1, 1e-3), UsageError);
}

}  // namespace
}  // namespace pie
