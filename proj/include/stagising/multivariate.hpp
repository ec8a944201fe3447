#pragma once

// Full multivariate variational free energy over the M auxiliary fields
// attached to the non-zero interaction eigenvalues, and a numerical check
// that its global minimum only populates the staggered mode.

#include "stagising/model.hpp"
#include "stagising/thermal.hpp"
#include "stagising/univariate.hpp"

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace stagising {

/// Modes with non-zero eigenvalue, in spectrum order.
struct ActiveModes {
  Eigen::VectorXd eigenvalues;
  /// N x M, columns are lambda_ik.
  Eigen::MatrixXd table;
  /// Position of the staggered mode among the active ones.
  Eigen::Index staggered = 0;
};

inline ActiveModes active_modes(const InteractionSpectrum& spec, double zero_tolerance = 1e-12) {
  const double gamma = spec.eigenvalues(spec.staggered_index);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k)
    if (std::abs(spec.eigenvalues(k)) > zero_tolerance * gamma) keep.push_back(k);
  ActiveModes out;
  out.eigenvalues.resize(static_cast<Eigen::Index>(keep.size()));
  out.table.resize(spec.n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    out.eigenvalues(col) = spec.eigenvalues(keep[c]);
    out.table.col(col) = spec.mode_vector(keep[c]);
    if (keep[c] == spec.staggered_index) out.staggered = col;
  }
  return out;
}

/// f[u_k] = sum_k u_k^2/D_k - (1/(N beta)) sum_i ln[sinh((2s+1) beta eps_i)/sinh(beta eps_i)]
/// with 2 eps_i = sqrt(wz^2 + (wx + 2 sum_k lambda_ik u_k)^2). Optionally
/// writes the gradient.
inline double multivariate_free_energy(const Eigen::VectorXd& u, const ModelParams& p, const ActiveModes& modes,
                                       Eigen::VectorXd* gradient = nullptr) {
  if (u.size() != modes.eigenvalues.size())
    throw std::invalid_argument("u has " + std::to_string(u.size()) + " components, expected " +
                                std::to_string(modes.eigenvalues.size()));
  const auto n = static_cast<double>(modes.table.rows());
  const Eigen::VectorXd mu = modes.table * u;
  double f = (u.array().square() / modes.eigenvalues.array()).sum();
  Eigen::VectorXd site_force(modes.table.rows());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double h = p.omega_x + 2.0 * mu(i);
    const double eps = 0.5 * std::hypot(p.omega_z, h);
    if (p.zero_temperature())
      f -= 2.0 * p.s * eps / n;
    else
      f -= log_sinh_ratio(p.beta * eps, p.s) / (n * p.beta);
    // d f / d mu_i = -(s/N) B_s(2 s beta eps_i) (wx + 2 mu_i) / eps_i
    site_force(i) = -(p.s / n) * polarization_over_eps(p.beta, eps, p.s) * h;
  }
  if (gradient) {
    *gradient = (2.0 * u.array() / modes.eigenvalues.array()).matrix() + modes.table.transpose() * site_force;
  }
  return f;
}

struct ReductionReport {
  int starts = 0;
  double best_energy = 0.0;
  Eigen::VectorXd best_u;
  double staggered_component = 0.0;
  double max_nonstaggered = 0.0;
  /// The univariate minimum for comparison.
  VariationalPoint univariate;
  bool reduced = false;
};

namespace detail {

/// Works in w_k = u_k / sqrt(D_k) so the quadratic term is isotropic.
class ScaledFreeEnergy final : public ceres::FirstOrderFunction {
 public:
  ScaledFreeEnergy(const ModelParams& p, const ActiveModes& modes) : p_(p), modes_(modes) {
    sqrt_d_ = modes.eigenvalues.array().sqrt();
  }

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const Eigen::Map<const Eigen::VectorXd> w(parameters, NumParameters());
    const Eigen::VectorXd u = (w.array() * sqrt_d_.array()).matrix();
    Eigen::VectorXd g;
    cost[0] = multivariate_free_energy(u, p_, modes_, gradient ? &g : nullptr);
    if (gradient) {
      Eigen::Map<Eigen::VectorXd>(gradient, NumParameters()) = (g.array() * sqrt_d_.array()).matrix();
    }
    return std::isfinite(cost[0]);
  }

  int NumParameters() const override { return static_cast<int>(modes_.eigenvalues.size()); }

 private:
  ModelParams p_;
  const ActiveModes& modes_;
  Eigen::VectorXd sqrt_d_;
};

}  // namespace detail

/// Local minimization of the multivariate free energy from a starting point.
inline Eigen::VectorXd minimize_multivariate(const ModelParams& p, const ActiveModes& modes, Eigen::VectorXd u0) {
  Eigen::VectorXd w = (u0.array() / modes.eigenvalues.array().sqrt()).matrix();
  ceres::GradientProblem problem(new detail::ScaledFreeEnergy(p, modes));
  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::LBFGS;
  options.max_num_iterations = 5000;
  options.function_tolerance = 1e-16;
  options.gradient_tolerance = 1e-13;
  options.parameter_tolerance = 1e-16;
  options.logging_type = ceres::SILENT;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(options, problem, w.data(), &summary);
  return (w.array() * modes.eigenvalues.array().sqrt()).matrix();
}

/// Minimizes the multivariate free energy from `starts` random points and
/// reports how much weight the best minimum puts outside the staggered mode.
inline ReductionReport check_univariate_reduction(const ModelParams& p, int starts = 20, std::uint64_t seed = 12345,
                                                  double tolerance = 1e-6) {
  p.validate();
  const auto spec = spectrum(p);
  const auto modes = active_modes(spec);
  const double sg = p.s_gamma();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-sg, sg);

  ReductionReport rep;
  rep.starts = starts;
  rep.univariate = minimize_univariate(p);
  bool have = false;
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd u0(modes.eigenvalues.size());
    for (Eigen::Index k = 0; k < u0.size(); ++k) u0(k) = uniform(rng);
    const Eigen::VectorXd u = minimize_multivariate(p, modes, u0);
    const double f = multivariate_free_energy(u, p, modes);
    if (!have || f < rep.best_energy) {
      have = true;
      rep.best_energy = f;
      rep.best_u = u;
    }
  }
  rep.staggered_component = rep.best_u(modes.staggered);
  rep.max_nonstaggered = 0.0;
  for (Eigen::Index k = 0; k < rep.best_u.size(); ++k)
    if (k != modes.staggered) rep.max_nonstaggered = std::max(rep.max_nonstaggered, std::abs(rep.best_u(k)));
  rep.reduced = rep.max_nonstaggered < tolerance * sg;
  return rep;
}

}  // namespace stagising
