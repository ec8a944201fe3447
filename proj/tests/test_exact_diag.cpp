#include "oracles.hpp"
#include "stagising/exact_diag.hpp"
#include "stagising/univariate.hpp"

#include <gtest/gtest.h>

using namespace stagising;

namespace {

ModelParams point(int n, double alpha, double wx, double wz, double s = 0.5) {
  ModelParams p;
  p.n = n;
  p.s = s;
  p.alpha = RangeExponent(alpha);
  p.omega_x = wx * s;
  p.omega_z = wz * s;
  return p;
}

Eigen::MatrixXd pauli(const ModelParams& p, const Eigen::VectorXd& fields = {}) {
  return oracle::pauli_hamiltonian(build_dense_J(p), p.omega_x, p.omega_z, fields);
}

}  // namespace

TEST(FullHamiltonian, TwoSiteExample) {
  ModelParams p = point(2, 0.0, 0.0, 0.0);
  p.b = 0.0;
  const auto r = lowest_k(FullHamiltonian(p), 1);
  EXPECT_NEAR(r.eigenvalues(0), -0.5, 1e-14);
  EXPECT_NEAR(r.eigenvalues(0) / 2, -0.25, 1e-14);
}

TEST(FullHamiltonian, FieldDominatedLimit) {
  const ModelParams p = point(10, 0.0, 0.0, 1e6);
  const double e = lowest_k(FullHamiltonian(p), 1).eigenvalues(0);
  EXPECT_NEAR(e / (-10 * 0.5 * p.omega_z), 1.0, 1e-6);
}

TEST(FullHamiltonian, SymmetricAndMatchesPauliOracle) {
  for (double alpha : {0.0, 0.7, 2.0})
    for (double wx : {0.0, 0.4})
      for (double wz : {0.3, 1.7}) {
        const ModelParams p = point(6, alpha, wx, wz);
        const FullHamiltonian h(p);
        const Eigen::MatrixXd d = h.dense();
        EXPECT_EQ((d - d.transpose()).cwiseAbs().maxCoeff(), 0.0);
        const Eigen::VectorXd mine = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(d).eigenvalues();
        const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(pauli(p)).eigenvalues();
        EXPECT_LE((mine - ref).cwiseAbs().maxCoeff(), 1e-12);
        // Off-diagonal elements are non-positive.
        for (Eigen::Index i = 0; i < d.rows(); ++i)
          for (Eigen::Index j = 0; j < d.cols(); ++j)
            if (i != j) EXPECT_LE(d(i, j), 0.0);
      }
}

TEST(FullHamiltonian, MatvecMatchesDense) {
  const FullHamiltonian h(point(8, 1.0, 0.3, 0.8));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(static_cast<Eigen::Index>(h.dimension()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
  EXPECT_LE((h.apply(x) - h.dense() * x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FullHamiltonian, SpinOneMatchesSpinMatrixOracle) {
  ModelParams p = point(4, 0.5, 0.3, 0.7, 1.0);
  const FullHamiltonian h(p);
  const auto [sx, sz] = oracle::spin_matrices(1.0);
  const Eigen::MatrixXd j = build_dense_J(p);
  const int d = 3;
  auto site = [&](const Eigen::MatrixXd& op, int k) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Identity(1, 1);
    for (int i = 0; i < p.n; ++i) {
      Eigen::MatrixXd next = Eigen::kroneckerProduct(out, i == k ? op : Eigen::MatrixXd::Identity(d, d)).eval();
      out = next;
    }
    return out;
  };
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(81, 81);
  for (int i = 0; i < p.n; ++i) ref -= p.omega_z * site(sz, i) + p.omega_x * site(sx, i);
  for (int i = 0; i < p.n; ++i)
    for (int k = 0; k < p.n; ++k) ref -= j(i, k) * site(sx, i) * site(sx, k);
  const Eigen::VectorXd a = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h.dense()).eigenvalues();
  const Eigen::VectorXd b = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ref).eigenvalues();
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(FullHamiltonian, OnsiteConstant) {
  const ModelParams p = point(6, 0.0, 0.2, 0.5);
  HamiltonianOptions off;
  off.include_onsite = false;
  const double with = ground_energy(p);
  const double without = ground_energy(p, off);
  const auto c = FullHamiltonian(p).onsite_constant();
  ASSERT_TRUE(c);
  EXPECT_NEAR(with - without, *c, 1e-12);
  EXPECT_NEAR(*c, -build_dense_J(p).trace() / 4, 1e-15);
}

TEST(FullHamiltonian, RejectsHugeDimension) {
  EXPECT_THROW(FullHamiltonian(point(26, 0.0, 0.0, 1.0)), std::invalid_argument);
}

TEST(BigSpin, ExampleAndRestriction) {
  const ModelParams p = point(10, 0.0, 0.0, 0.0);
  const auto r = lowest_k(BigSpinHamiltonian(p), 1);
  EXPECT_NEAR(r.eigenvalues(0), -2.5, 1e-12);
  EXPECT_NEAR(r.eigenvalues(0) / 10, -0.25, 1e-12);
  EXPECT_THROW(BigSpinHamiltonian(point(10, 0.5, 0.0, 0.0)), std::invalid_argument);
}

TEST(BigSpin, GroundEnergyMatchesFullOnGrid) {
  for (int n : {4, 6, 8, 10, 12})
    for (double wx : {0.0, 0.6, 1.2})
      for (double wz : {0.2, 1.0, 2.4}) {
        const ModelParams p = point(n, 0.0, wx, wz);
        const double full = lowest_k(FullHamiltonian(p), 1).eigenvalues(0);
        const double big = lowest_k(BigSpinHamiltonian(p), 1).eigenvalues(0);
        EXPECT_LE(std::abs(full - big), 1e-10 * n * 0.5) << n << ' ' << wx << ' ' << wz;
      }
}

TEST(BigSpin, LevelsAreASubsetOfFullLevels) {
  const ModelParams p = point(8, 0.0, 0.4, 0.9);
  const Eigen::VectorXd full =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(FullHamiltonian(p).dense(), Eigen::EigenvaluesOnly).eigenvalues();
  const auto big = lowest_k(BigSpinHamiltonian(p), 5).eigenvalues;
  for (Eigen::Index k = 0; k < big.size(); ++k) EXPECT_LT((full.array() - big(k)).abs().minCoeff(), 1e-9);
}

TEST(LowestK, IterativeMatchesDense) {
  const ModelParams p = point(12, 0.8, 0.2, 0.7);
  const FullHamiltonian h(p);
  EigenOptions iterative;
  iterative.dense_limit = 0;
  const auto it = lowest_k(h, 8, iterative);
  EXPECT_TRUE(it.converged);
  const double bound = h.norm_bound();
  for (Eigen::Index k = 0; k < 8; ++k) {
    const Eigen::VectorXd v = it.eigenvectors.col(k);
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    EXPECT_LE((h.apply(v) - it.eigenvalues(k) * v).norm(), 1e-10 * bound);
    if (k > 0) EXPECT_LE(it.eigenvalues(k - 1), it.eigenvalues(k));
  }
}

TEST(LowestK, IterativeSpectrumMatchesPauliOracle) {
  const ModelParams p = point(10, 1.5, 0.3, 0.9);
  EigenOptions iterative;
  iterative.dense_limit = 0;
  const auto it = lowest_k(FullHamiltonian(p), 8, iterative);
  const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(pauli(p), Eigen::EigenvaluesOnly).eigenvalues();
  for (Eigen::Index k = 0; k < 8; ++k) EXPECT_NEAR(it.eigenvalues(k), ref(k), 1e-10);
}

TEST(LowestK, GroundStateIsPositive) {
  for (double wz : {0.3, 1.5}) {
    const auto r = lowest_k(FullHamiltonian(point(10, 2.0, 0.2, wz)), 1);
    EXPECT_GT(r.eigenvectors.col(0).minCoeff(), 0.0);
  }
}

TEST(LowestK, QuasiDegenerateGroundDoublet) {
  const auto r = lowest_k(FullHamiltonian(point(10, 0.0, 0.0, 0.05)), 2);
  EXPECT_LT(r.eigenvalues(1) - r.eigenvalues(0), 1e-8);
}

TEST(LowestK, RejectsTooManyLevels) {
  EXPECT_THROW(lowest_k(FullHamiltonian(point(6, 0.0, 0.0, 1.0)), 33), std::invalid_argument);
}

TEST(Observables, ProductStates) {
  const FullHamiltonian h(point(6, 0.0, 0.0, 0.0));
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(h.dimension()));
  // Levels per site: 1 is S^x = +1/2. Neel: even sites up, odd sites down.
  std::size_t neel = 0;
  for (int i = 0; i < 6; i += 2) neel += std::size_t{1} << i;
  psi(static_cast<Eigen::Index>(neel)) = 1.0;
  const auto o = observables(psi, h);
  EXPECT_NEAR(o.m_s2, 0.25, 1e-15);
  EXPECT_NEAR(o.m_s, 0.5, 1e-15);
  EXPECT_NEAR(o.sxsx(0, 1), -0.25, 1e-15);
}

TEST(Observables, SymmetricGroundStateHasZeroMsButFiniteMs2) {
  const FullHamiltonian h(point(10, 0.0, 0.0, 0.5));
  const auto r = lowest_k(h, 1);
  const auto o = observables(r.eigenvectors.col(0), h);
  EXPECT_NEAR(o.m_s, 0.0, 1e-10);
  EXPECT_GT(o.m_s2, 0.05);
  EXPECT_NEAR(o.energy_per_site, r.eigenvalues(0) / 10, 1e-12);
}

TEST(Observables, GlobalFlipWithReversedField) {
  for (double wx : {0.3, 0.9}) {
    const double a = ground_energy(point(8, 1.0, wx, 0.6));
    const double b = ground_energy(point(8, 1.0, -wx, 0.6));
    EXPECT_NEAR(a, b, 1e-11);
  }
}

TEST(FiniteFieldChi, MatchesPauliOracleSecondDifferences) {
  const ModelParams p = point(4, 0.0, 0.3, 2.5);
  const double step = 1e-3;
  const auto chi = finite_field_chi(p, step);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      auto e = [&](double hi, double hj) {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(4);
        f(i) += hi;
        f(j) += hj;
        return oracle::ground_energy(pauli(p, f));
      };
      const double ref = i == j ? -(e(step, 0) - 2 * e(0, 0) + e(-step, 0)) / (step * step)
                                : -(e(step, step) - e(step, -step) - e(-step, step) + e(-step, -step)) / (4 * step * step);
      EXPECT_NEAR(chi(i, j), ref, 1e-6);
    }
}

TEST(ExactDiag, ApproachesThermodynamicEnergy) {
  const double e_inf = minimize_univariate(point(6, 0.0, 0.3, 1.0)).energy;
  double prev = 1e300;
  for (int n : {6, 8, 10, 12}) {
    const double gap = std::abs(ground_energy(point(n, 0.0, 0.3, 1.0)) / n - e_inf);
    EXPECT_LT(gap, prev) << n;
    prev = gap;
  }
}
