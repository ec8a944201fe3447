#pragma once

// Strong-long-range solution reduced to one auxiliary field u (the staggered
// mode). The per-site variational free energy is
//
//   f(u) = u^2/Gamma - (1/2beta) sum_{+-} ln[ sinh((2s+1) beta eps_+-) / sinh(beta eps_+-) ]
//   2 eps_+-(u) = sqrt(wz^2 + (wx +- 2u)^2)
//
// and its zero-temperature limit e0(u) = u^2/Gamma - s (eps_+ + eps_-).
// Both are even in u, so minimization runs over u in [0, s Gamma].

#include "stagising/model.hpp"
#include "stagising/thermal.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace stagising {

struct EpsilonPair {
  double plus = 0.0;
  double minus = 0.0;
};

inline EpsilonPair epsilon_pm(double u, double omega_x, double omega_z) {
  return {0.5 * std::hypot(omega_z, omega_x + 2.0 * u), 0.5 * std::hypot(omega_z, omega_x - 2.0 * u)};
}

/// Zero-temperature variational energy per site.
inline double e0(double u, const ModelParams& p) {
  const auto eps = epsilon_pm(u, p.omega_x, p.omega_z);
  return u * u / p.gamma - p.s * (eps.plus + eps.minus);
}

/// Variational free energy per site; equals e0 when beta is infinite.
inline double free_energy(double u, const ModelParams& p) {
  if (!(p.beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (p.zero_temperature()) return e0(u, p);
  const auto eps = epsilon_pm(u, p.omega_x, p.omega_z);
  const double entropy = log_sinh_ratio(p.beta * eps.plus, p.s) + log_sinh_ratio(p.beta * eps.minus, p.s);
  return u * u / p.gamma - entropy / (2.0 * p.beta);
}

/// df/du = 2u/Gamma - s sum_{+-} B_s(2 s beta eps) d eps/du.
inline double free_energy_derivative(double u, const ModelParams& p) {
  const auto eps = epsilon_pm(u, p.omega_x, p.omega_z);
  // d eps_+-/du = +-(wx +- 2u) / (2 eps_+-)
  const double plus = polarization_over_eps(p.beta, eps.plus, p.s) * (p.omega_x + 2.0 * u) / 2.0;
  const double minus = -polarization_over_eps(p.beta, eps.minus, p.s) * (p.omega_x - 2.0 * u) / 2.0;
  return 2.0 * u / p.gamma - p.s * (plus + minus);
}

/// Global minimizer of the univariate (free) energy.
struct VariationalPoint {
  /// Non-negative representative of the minimizing field.
  double u_bar = 0.0;
  /// Staggered magnetization u_bar / Gamma.
  double m_s = 0.0;
  double energy = 0.0;
  /// True when -u_bar is an equally good minimizer (u_bar > 0).
  bool degenerate = false;
};

struct UnivariateOptions {
  int grid_points = 101;
  /// m_s below this (in units of s) is reported as exactly zero.
  double zero_threshold = 1e-12;
};

namespace detail {

inline VariationalPoint make_point(double u, const ModelParams& p, double zero_threshold) {
  if (u < zero_threshold * p.s_gamma()) u = 0.0;
  VariationalPoint vp;
  vp.u_bar = u;
  vp.m_s = u / p.gamma;
  vp.energy = free_energy(u, p);
  vp.degenerate = u > 0.0;
  return vp;
}

/// The zero-temperature, zero-transverse-field landscape has kinks at
/// u = |wx|/2; between them it is piecewise quadratic, so the minimum is
/// one of 0, s Gamma or the kink itself.
inline VariationalPoint minimize_classical_branch(const ModelParams& p, double zero_threshold) {
  const double sg = p.s_gamma();
  std::array<double, 3> candidates{0.0, sg, std::min(std::abs(p.omega_x) / 2.0, sg)};
  double best_u = 0.0;
  double best_e = e0(0.0, p);
  for (double u : candidates) {
    const double e = e0(u, p);
    if (e < best_e) {
      best_e = e;
      best_u = u;
    }
  }
  return make_point(best_u, p, zero_threshold);
}

/// Polishes a local minimum by bisecting the analytic derivative, which is
/// far better conditioned than comparing nearly equal function values.
inline double polish_stationary_point(double u, double lo_limit, double hi_limit, const ModelParams& p) {
  if (!(u > 0.0)) return u;
  auto df = [&](double x) { return free_energy_derivative(x, p); };
  const double sg = p.s_gamma();
  const std::array<double, 2> widths{1e-6 * sg, 0.5 * u};
  for (double w : widths) {
    const double lo = std::max(lo_limit, u - w);
    const double hi = std::min(hi_limit, u + w);
    if (!(lo > 0.0) || !(hi > lo)) continue;
    const double flo = df(lo);
    const double fhi = df(hi);
    if (!(flo < 0.0 && fhi > 0.0)) continue;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(df, lo, hi, flo, fhi,
                                                     boost::math::tools::eps_tolerance<double>(52), iters);
    const double root = 0.5 * (r.first + r.second);
    if (free_energy(root, p) <= free_energy(u, p)) return root;
    return u;
  }
  return u;
}

}  // namespace detail

/// Global minimum of f (or e0) over u in [-s Gamma, s Gamma].
///
/// A coarse grid locates every basin (the landscape has at most three local
/// minima), each basin is refined with Brent's method and then polished on
/// the derivative. Ties between +-u_bar report the non-negative root.
inline VariationalPoint minimize_univariate(const ModelParams& p, const UnivariateOptions& opt = {}) {
  p.validate();
  if (p.zero_temperature() && p.omega_z == 0.0) return detail::minimize_classical_branch(p, opt.zero_threshold);

  const double sg = p.s_gamma();
  const int g = std::max(opt.grid_points, 3);
  std::vector<double> us(static_cast<std::size_t>(g));
  std::vector<double> fs(static_cast<std::size_t>(g));
  for (int k = 0; k < g; ++k) {
    us[static_cast<std::size_t>(k)] = sg * static_cast<double>(k) / static_cast<double>(g - 1);
    fs[static_cast<std::size_t>(k)] = free_energy(us[static_cast<std::size_t>(k)], p);
  }

  auto f = [&](double u) { return free_energy(u, p); };
  double best_u = 0.0;
  double best_f = fs[0];
  for (int k = 0; k < g; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const bool left_ok = (k == 0) || fs[uk] <= fs[uk - 1];
    const bool right_ok = (k == g - 1) || fs[uk] <= fs[uk + 1];
    if (!left_ok || !right_ok) continue;
    const double lo = us[static_cast<std::size_t>(std::max(k - 1, 0))];
    const double hi = us[static_cast<std::size_t>(std::min(k + 1, g - 1))];
    std::uintmax_t iters = 500;
    const auto r = boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits, iters);
    double u = detail::polish_stationary_point(r.first, 0.0, sg, p);
    // Brent cannot resolve u below ~1e-8 s Gamma; trust the slope there.
    if (u < 1e-6 * sg && !(free_energy_derivative(0.5 * u, p) < 0.0)) continue;
    const double fu = f(u);
    if (fu < best_f) {
      best_f = fu;
      best_u = u;
    }
  }
  return detail::make_point(best_u, p, opt.zero_threshold);
}

}  // namespace stagising
