#include "oracles.hpp"
#include "stagising/landau.hpp"
#include "stagising/multivariate.hpp"
#include "stagising/transition.hpp"
#include "stagising/univariate.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stagising;

namespace {

ModelParams point(double wx, double wz, double s = 0.5, double gamma = 1.0, double beta = kInf) {
  ModelParams p;
  p.n = 8;
  p.s = s;
  p.gamma = gamma;
  p.omega_x = wx * s * gamma;
  p.omega_z = wz * s * gamma;
  p.beta = std::isinf(beta) ? kInf : beta / (s * gamma);
  return p;
}

}  // namespace

TEST(EpsilonPm, Examples) {
  auto e = epsilon_pm(0.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(e.plus, 0.5);
  EXPECT_DOUBLE_EQ(e.minus, 0.5);
  e = epsilon_pm(0.5, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(e.plus, 0.5);
  EXPECT_DOUBLE_EQ(e.minus, 0.5);
  e = epsilon_pm(0.25, 0.8, 0.2);
  EXPECT_NEAR(e.plus, std::sqrt(0.04 + 1.69) / 2, 1e-15);
  EXPECT_NEAR(e.minus, std::sqrt(0.04 + 0.09) / 2, 1e-15);
  EXPECT_NEAR(e.plus, 0.657647, 1e-6);
  EXPECT_NEAR(e.minus, 0.180278, 1e-6);
}

TEST(E0, Examples) {
  ModelParams p = point(0, 0);
  EXPECT_DOUBLE_EQ(e0(0.0, p), 0.0);
  EXPECT_DOUBLE_EQ(e0(0.5, p), -0.25);
}

TEST(E0, Symmetry) {
  for (double wx : {-0.7, 0.0, 0.3, 1.1})
    for (double u = -0.5; u <= 0.5; u += 0.05) {
      ModelParams p = point(wx, 0.6);
      ModelParams q = point(-wx, 0.6);
      EXPECT_NEAR(e0(u, p), e0(-u, q), 1e-15);
      if (wx == 0.0) EXPECT_NEAR(e0(u, p), e0(-u, p), 1e-15);
    }
}

TEST(E0, AnalyticGradientMatchesFiniteDifference) {
  for (double wx : {0.0, 0.4, 1.2})
    for (double wz : {0.3, 1.0, 2.5}) {
      const ModelParams p = point(wx, wz);
      for (double u = -0.45; u <= 0.45; u += 0.05) {
        const double fd = oracle::derivative([&](double v) { return e0(v, p); }, u, 1e-5);
        const double an = free_energy_derivative(u, p);
        EXPECT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(fd))) << wx << ' ' << wz << ' ' << u;
      }
    }
}

TEST(FreeEnergy, LevelSumOracle) {
  for (double s : {0.5, 1.0, 2.5})
    for (double beta : {0.3, 2.0, 40.0}) {
      const ModelParams p = point(0.4, 0.9, s, 1.0, beta);
      for (double u = -0.9 * s; u <= 0.9 * s; u += 0.3 * s) {
        const auto e = epsilon_pm(u, p.omega_x, p.omega_z);
        const double want = u * u / p.gamma - (oracle::log_level_sum(p.beta * e.plus, s) +
                                               oracle::log_level_sum(p.beta * e.minus, s)) / (2.0 * p.beta);
        EXPECT_NEAR(free_energy(u, p), want, 1e-12 * std::max(1.0, std::abs(want)));
      }
    }
}

TEST(FreeEnergy, ZeroTemperatureLimit) {
  for (double u = -0.5; u <= 0.5; u += 0.05) {
    const ModelParams hot = point(0.3, 0.8, 0.5, 1.0, 1e6);
    EXPECT_LT(std::abs(free_energy(u, hot) - e0(u, point(0.3, 0.8))), 1e-6 * 0.5);
  }
}

TEST(FreeEnergy, FreeSpinPair) {
  for (double beta : {0.1, 1.0, 7.0}) {
    ModelParams p = point(0, 0);
    p.beta = beta;
    EXPECT_NEAR(free_energy(0.0, p), -std::log(2.0) / beta, 1e-14);
  }
}

TEST(FreeEnergy, HugeBetaIsFinite) {
  ModelParams p = point(0.2, 0.3);
  p.beta = 1e8;
  EXPECT_TRUE(std::isfinite(free_energy(0.1, p)));
  EXPECT_NEAR(free_energy(0.1, p), e0(0.1, point(0.2, 0.3)), 1e-7);
}

TEST(FreeEnergy, RejectsNonPositiveBeta) {
  ModelParams p = point(0.2, 0.3);
  p.beta = -1.0;
  EXPECT_THROW(free_energy(0.1, p), std::invalid_argument);
}

TEST(FreeEnergy, FiniteBetaGradient) {
  for (double s : {0.5, 1.5}) {
    const ModelParams p = point(0.5, 0.7, s, 1.0, 3.0);
    for (double u = -0.8 * s; u <= 0.8 * s; u += 0.2 * s) {
      const double fd = oracle::derivative([&](double v) { return free_energy(v, p); }, u, 1e-5);
      EXPECT_NEAR(free_energy_derivative(u, p), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(MinimizeUnivariate, ClosedFormAtZeroLongitudinalField) {
  for (double s : {0.5, 1.0, 2.0}) {
    const auto vp = minimize_univariate(point(0.0, 1.0, s));
    EXPECT_NEAR(vp.m_s, s * std::sqrt(3.0) / 2.0, 1e-9 * s);
    EXPECT_TRUE(vp.degenerate);
    EXPECT_EQ(minimize_univariate(point(0.0, 3.0, s)).m_s, 0.0);
  }
}

TEST(MinimizeUnivariate, LandscapeSwap) {
  EXPECT_EQ(minimize_univariate(point(1.2, 0.2)).m_s, 0.0);
  EXPECT_NEAR(minimize_univariate(point(0.8, 0.2)).m_s, 0.5, 0.01 * 0.5);
}

TEST(MinimizeUnivariate, AgreesWithBruteForce) {
  for (double wx : {0.0, 0.3, 0.9, 1.3})
    for (double wz : {0.1, 0.7, 1.5, 2.2})
      for (double beta : {kInf, 3.0}) {
        const ModelParams p = point(wx, wz, 0.5, 1.0, beta);
        const auto vp = minimize_univariate(p);
        const auto [u, f] = oracle::brute_minimize([&](double v) { return free_energy(v, p); }, -0.5, 0.5);
        EXPECT_LE(vp.energy, f + 1e-12) << wx << ' ' << wz;
        EXPECT_NEAR(vp.u_bar, std::abs(u), 1e-6) << wx << ' ' << wz;
        EXPECT_LE(std::abs(vp.m_s), p.s);
        EXPECT_LE(vp.energy, free_energy(0.0, p) + 1e-15);
      }
}

TEST(MinimizeUnivariate, DegenerateMinimaAtZeroLongitudinalField) {
  for (double wz : {0.2, 1.0, 1.8}) {
    const ModelParams p = point(0.0, wz);
    const auto vp = minimize_univariate(p);
    ASSERT_GT(vp.u_bar, 0.0);
    EXPECT_NEAR(free_energy(vp.u_bar, p), free_energy(-vp.u_bar, p), 1e-10);
  }
}

TEST(MinimizeUnivariate, LargeBetaMatchesZeroTemperature) {
  for (double wx : {0.0, 0.5})
    for (double wz : {0.4, 1.2}) {
      const auto cold = minimize_univariate(point(wx, wz));
      const auto warm = minimize_univariate(point(wx, wz, 0.5, 1.0, 1e6));
      EXPECT_NEAR(cold.m_s, warm.m_s, 1e-5 * 0.5);
    }
}

TEST(MinimizeUnivariate, ClassicalJumpAtZeroTransverseField) {
  const double s = 0.5;
  EXPECT_NEAR(minimize_univariate(point(0.999, 0.0)).m_s, s, 1e-8);
  EXPECT_EQ(minimize_univariate(point(1.001, 0.0)).m_s, 0.0);
  SliceSpec slice;
  slice.axis = FieldAxis::omega_x;
  slice.from = 0.0;
  slice.to = 2.0 * s;
  slice.count = 41;
  const auto rec = classify_transition(slice, point(0, 0));
  ASSERT_TRUE(rec.critical_value);
  EXPECT_NEAR(*rec.critical_value, s, 1e-6 * s);
  EXPECT_NEAR(rec.jump, s, 1e-8);
  EXPECT_EQ(rec.order, TransitionOrder::first);
}

TEST(Landau, MatchesFiniteDifferencesOfE0) {
  for (double wx : {0.0, 0.3, 0.7})
    for (double wz : {0.8, 1.5, 2.5}) {
      const ModelParams p = point(wx, wz);
      const auto c = landau_coefficients(p);
      // Symmetrized energy is even in m, so fit c2 and c4 from two small m values.
      auto even = [&](double m) { return 0.5 * (e0(p.gamma * m, p) + e0(-p.gamma * m, p)) - e0(0.0, p); };
      const double h = 2e-3;
      const double a = even(h), b = even(2 * h);
      const double c4 = (b - 4 * a) / (12 * h * h * h * h);
      const double c2 = (a - c4 * h * h * h * h) / (h * h);
      EXPECT_NEAR(c.c2, c2, 1e-6 * std::max(1.0, std::abs(c2)));
      EXPECT_NEAR(c.c4, c4, 1e-3 * std::max(1.0, std::abs(c4)));
    }
}

TEST(Landau, RejectsZeroTransverseFieldAtZeroTemperature) {
  EXPECT_THROW(landau_coefficients(point(0.3, 0.0)), std::domain_error);
}

TEST(Landau, SignChangeOnVerticalAxis) {
  EXPECT_GT(landau_coefficients(point(0.0, 2.0 + 1e-6)).c2, 0.0);
  EXPECT_LT(landau_coefficients(point(0.0, 2.0 - 1e-6)).c2, 0.0);
  EXPECT_GT(landau_coefficients(point(3.0, 3.0)).c2, 0.0);
}

TEST(Landau, TricriticalPoint) {
  const auto [wx, wz] = tricritical_point_exact(0.5, 1.0);
  EXPECT_NEAR(wx / 0.5, 0.715542, 1e-6);
  EXPECT_NEAR(wz / 0.5, 1.431084, 1e-6);
  const auto c = landau_coefficients(point(wx / 0.5, wz / 0.5));
  EXPECT_NEAR(c.c2, 0.0, 1e-10);
  EXPECT_NEAR(c.c4, 0.0, 1e-8);
}

TEST(SecondOrderLine, Examples) {
  const double s = 0.5;
  EXPECT_NEAR(*second_order_line(0.0, s, 1.0), 2.0 * s, 1e-14);
  const auto [tx, tz] = tricritical_point_exact(s, 1.0);
  ASSERT_TRUE(second_order_line(tx, s, 1.0));
  EXPECT_NEAR(*second_order_line(tx, s, 1.0), tz, 1e-9);
  EXPECT_FALSE(second_order_line(2.0 * s, s, 1.0));
}

TEST(SecondOrderLine, SolvesTheSexticAndMatchesLandau) {
  const double s = 0.5, sg = 0.5;
  const auto [tx, tz] = tricritical_point_exact(s, 1.0);
  for (int k = 0; k < 10; ++k) {
    const double wx = 0.1 * k * tx;
    const double wz = *second_order_line(wx, s, 1.0);
    EXPECT_GT(wz, 2.0 * wx);
    const double lhs = 4 * sg * sg * std::pow(wz, 4), rhs = std::pow(wz * wz + wx * wx, 3);
    EXPECT_NEAR(lhs, rhs, 1e-12 * lhs);
    const auto cp = landau_critical_point(point(0, 0), wx);
    ASSERT_TRUE(cp);
    EXPECT_NEAR(cp->omega_z, wz, 1e-6 * sg);
    EXPECT_GT(landau_coefficients(point(wx / sg, wz / sg + 1e-5)).c2, 0.0);
    EXPECT_LT(landau_coefficients(point(wx / sg, wz / sg - 1e-5)).c2, 0.0);
  }
}

TEST(ClassifyTransition, HorizontalSliceIsSecondOrderAtTwoSGamma) {
  SliceSpec slice;
  slice.axis = FieldAxis::omega_z;
  slice.fixed = 0.0;
  slice.from = 0.0;
  slice.to = 1.5;
  const auto rec = classify_transition(slice, point(0, 0));
  EXPECT_EQ(rec.order, TransitionOrder::second);
  ASSERT_TRUE(rec.critical_value);
  EXPECT_NEAR(*rec.critical_value, 1.0, 1e-5);
}

TEST(ClassifyTransition, VerticalSliceIsFirstOrderNearSGamma) {
  SliceSpec slice;
  slice.axis = FieldAxis::omega_x;
  slice.fixed = 0.1;
  slice.from = 0.0;
  slice.to = 1.0;
  const auto rec = classify_transition(slice, point(0, 0));
  EXPECT_EQ(rec.order, TransitionOrder::first);
  EXPECT_TRUE(rec.resolved);
  EXPECT_NEAR(*rec.critical_value, 0.5, 0.05);
}

TEST(ClassifyTransition, NoCrossingInsideParamagnet) {
  SliceSpec slice;
  slice.axis = FieldAxis::omega_z;
  slice.fixed = 1.5;
  slice.from = 1.25;
  slice.to = 1.5;
  const auto rec = classify_transition(slice, point(0, 0));
  EXPECT_EQ(rec.order, TransitionOrder::none);
  EXPECT_FALSE(rec.critical_value);
}

TEST(PhaseDiagram, BoundaryPoints) {
  PhaseDiagramGrid g;
  g.wx_from = 0.0;
  g.wx_to = 1.5;
  g.wx_count = 7;
  g.wz_from = 0.0;
  g.wz_to = 1.5;
  g.wz_count = 7;
  const auto pd = phase_diagram(g, point(0, 0), 2, 20);
  ASSERT_EQ(pd.points.size(), 49u);
  for (const auto& pt : pd.points)
    if (pt.omega_z > 1.0) EXPECT_FALSE(pt.ordered());
  EXPECT_TRUE(pd.points.front().ordered());
  ASSERT_TRUE(pd.tricritical);
  EXPECT_NEAR(pd.tricritical->omega_x, tricritical_point_exact(0.5, 1.0).first, 1e-6);
  EXPECT_NEAR(pd.second_order_line.front().omega_z, 1.0, 1e-6);
  // (s Gamma, 0) and (0, 2 s Gamma) lie on the boundary.
  EXPECT_GT(minimize_univariate(point(0.99, 0.0)).m_s, 0.0);
  EXPECT_EQ(minimize_univariate(point(1.01, 0.0)).m_s, 0.0);
  EXPECT_GT(minimize_univariate(point(0.0, 1.99)).m_s, 0.0);
  EXPECT_EQ(minimize_univariate(point(0.0, 2.01)).m_s, 0.0);
}

TEST(PhaseDiagram, ParallelMatchesSerial) {
  PhaseDiagramGrid g;
  g.wx_count = 5;
  g.wz_count = 4;
  const auto a = phase_diagram(g, point(0, 0), 1, 5);
  const auto b = phase_diagram(g, point(0, 0), 3, 5);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) EXPECT_EQ(a.points[k].point.u_bar, b.points[k].point.u_bar);
}

TEST(FiniteTemperature, Summaries) {
  const auto cold = finite_temperature_summary(200.0 / 0.5, point(0, 0));
  ASSERT_TRUE(cold.tricritical);
  const auto [tx, tz] = tricritical_point_exact(0.5, 1.0);
  EXPECT_NEAR(cold.tricritical->omega_x, tx, 1e-2 * 0.5);
  EXPECT_NEAR(cold.tricritical->omega_z, tz, 1e-2 * 0.5);
  const auto mid = finite_temperature_summary(1.4 / 0.5, point(0, 0));
  EXPECT_TRUE(mid.has_ordered_phase);
  EXPECT_FALSE(mid.has_first_order);
  const auto hot = finite_temperature_summary(0.9 / 0.5, point(0, 0));
  EXPECT_FALSE(hot.has_ordered_phase);
}

TEST(Multivariate, StaggeredOnlyVectorMatchesUnivariate) {
  for (double beta : {kInf, 4.0}) {
    ModelParams p = point(0.3, 0.6, 0.5, 1.0, beta);
    p.n = 16;
    p.alpha = RangeExponent(0.5);
    const auto modes = active_modes(spectrum(p));
    for (double u : {-0.3, 0.0, 0.2, 0.45}) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(modes.eigenvalues.size());
      v(modes.staggered) = u;
      EXPECT_NEAR(multivariate_free_energy(v, p, modes, nullptr), free_energy(u, p), 1e-12);
    }
  }
}

TEST(Multivariate, GradientMatchesFiniteDifferences) {
  ModelParams p = point(0.3, 0.6);
  p.n = 12;
  p.alpha = RangeExponent(0.4);
  const auto modes = active_modes(spectrum(p));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-0.2, 0.2);
  Eigen::VectorXd u(modes.eigenvalues.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = d(rng);
  Eigen::VectorXd g;
  multivariate_free_energy(u, p, modes, &g);
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    auto f = [&](double x) {
      Eigen::VectorXd v = u;
      v(k) = x;
      return multivariate_free_energy(v, p, modes, nullptr);
    };
    const double fd = oracle::derivative(f, u(k), 1e-6);
    EXPECT_NEAR(g(k), fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Multivariate, RejectsWrongDimension) {
  ModelParams p = point(0.3, 0.6);
  p.alpha = RangeExponent(0.4);
  const auto modes = active_modes(spectrum(p));
  EXPECT_THROW(multivariate_free_energy(Eigen::VectorXd::Zero(modes.eigenvalues.size() + 1), p, modes, nullptr),
               std::invalid_argument);
}

TEST(Multivariate, ReductionAtSmallSize) {
  ModelParams p = point(0.4, 0.5);
  p.n = 12;
  p.alpha = RangeExponent(0.5);
  const auto rep = check_univariate_reduction(p, 6, 3);
  EXPECT_TRUE(rep.reduced);
  EXPECT_LT(rep.max_nonstaggered, 1e-6 * 0.5);
  EXPECT_NEAR(std::abs(rep.staggered_component), rep.univariate.u_bar, 1e-6);
}
