#pragma once

// Classical two-angle picture of the alpha = 0 chain: each sublattice is a
// single classical moment of length s in the x-z plane at polar angle
// theta measured from the x axis.

#include "stagising/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace stagising {

/// Which couplings survive in the classical energy.
enum class SublatticeCoupling {
  /// Full staggered kernel: ferromagnetic inside, antiferromagnetic across.
  staggered,
  /// Intrasublattice couplings removed, only the A-B bond remains.
  intersublattice_only,
};

struct AngleConfig {
  double theta_a = 0.0;
  double theta_b = 0.0;
  double energy = 0.0;
  /// s (cos theta_a - cos theta_b) / 2.
  double m_s = 0.0;
  /// More than one symmetry-related global minimum exists.
  bool degenerate = false;
};

namespace detail {

inline void require_all_to_all(const ModelParams& p) {
  if (p.alpha.is_nearest_neighbor() || p.alpha.value() != 0.0)
    throw std::invalid_argument("classical two-angle energy requires alpha = 0, got " + p.alpha.to_string());
}

inline double wrap_angle(double t) {
  const double two_pi = 2.0 * std::numbers::pi;
  t = std::fmod(t, two_pi);
  return t < 0.0 ? t + two_pi : t;
}

}  // namespace detail

/// Energy per site,
///   e = -(s wz/2)(sin A + sin B) - (s wx/2)(cos A + cos B) - (s^2 Gamma/4)(cos A - cos B)^2
/// or, for the intersublattice-only variant, the last term replaced by
/// +(s^2 Gamma/2) cos A cos B.
inline double classical_energy(double theta_a, double theta_b, const ModelParams& p,
                               SublatticeCoupling coupling = SublatticeCoupling::staggered) {
  detail::require_all_to_all(p);
  const double s = p.s;
  const double ca = std::cos(theta_a), cb = std::cos(theta_b);
  const double sa = std::sin(theta_a), sb = std::sin(theta_b);
  const double field = -0.5 * s * p.omega_z * (sa + sb) - 0.5 * s * p.omega_x * (ca + cb);
  if (coupling == SublatticeCoupling::staggered) return field - 0.25 * s * s * p.gamma * (ca - cb) * (ca - cb);
  return field + 0.5 * s * s * p.gamma * ca * cb;
}

inline Eigen::Vector2d classical_gradient(double theta_a, double theta_b, const ModelParams& p,
                                          SublatticeCoupling coupling = SublatticeCoupling::staggered) {
  detail::require_all_to_all(p);
  const double s = p.s;
  const double ca = std::cos(theta_a), cb = std::cos(theta_b);
  const double sa = std::sin(theta_a), sb = std::sin(theta_b);
  Eigen::Vector2d g;
  g(0) = -0.5 * s * p.omega_z * ca + 0.5 * s * p.omega_x * sa;
  g(1) = -0.5 * s * p.omega_z * cb + 0.5 * s * p.omega_x * sb;
  if (coupling == SublatticeCoupling::staggered) {
    const double d = ca - cb;
    g(0) += 0.5 * s * s * p.gamma * d * sa;
    g(1) -= 0.5 * s * s * p.gamma * d * sb;
  } else {
    g(0) -= 0.5 * s * s * p.gamma * sa * cb;
    g(1) -= 0.5 * s * s * p.gamma * ca * sb;
  }
  return g;
}

inline Eigen::Matrix2d classical_hessian(double theta_a, double theta_b, const ModelParams& p,
                                         SublatticeCoupling coupling = SublatticeCoupling::staggered) {
  detail::require_all_to_all(p);
  const double s = p.s;
  const double ca = std::cos(theta_a), cb = std::cos(theta_b);
  const double sa = std::sin(theta_a), sb = std::sin(theta_b);
  const double k = s * s * p.gamma;
  Eigen::Matrix2d h;
  h(0, 0) = 0.5 * s * p.omega_z * sa + 0.5 * s * p.omega_x * ca;
  h(1, 1) = 0.5 * s * p.omega_z * sb + 0.5 * s * p.omega_x * cb;
  if (coupling == SublatticeCoupling::staggered) {
    const double d = ca - cb;
    h(0, 0) += 0.5 * k * (d * ca - sa * sa);
    h(1, 1) += 0.5 * k * (-d * cb - sb * sb);
    h(0, 1) = 0.5 * k * sa * sb;
  } else {
    h(0, 0) -= 0.5 * k * ca * cb;
    h(1, 1) -= 0.5 * k * ca * cb;
    h(0, 1) = 0.5 * k * sa * sb;
  }
  h(1, 0) = h(0, 1);
  return h;
}

struct ClassicalOptions {
  int grid = 181;
  int newton_iterations = 100;
  double gradient_tolerance = 1e-14;
  /// Minima within this energy (units of s^2 Gamma) count as degenerate.
  double tie_tolerance = 1e-10;
  /// m_s below this (units of s) reports as zero.
  double zero_threshold = 1e-9;
};

namespace detail {

/// Damped Newton with a gradient-descent fallback whenever the Hessian is
/// not positive definite or the step fails to lower the energy.
inline std::array<double, 2> refine_classical(double a, double b, const ModelParams& p, SublatticeCoupling coupling,
                                              const ClassicalOptions& opt) {
  double e = classical_energy(a, b, p, coupling);
  const double scale = std::max(p.s * p.s * p.gamma, 1e-300);
  for (int it = 0; it < opt.newton_iterations; ++it) {
    const Eigen::Vector2d g = classical_gradient(a, b, p, coupling);
    if (g.norm() < opt.gradient_tolerance * scale) break;
    const Eigen::Matrix2d h = classical_hessian(a, b, p, coupling);
    Eigen::Vector2d step;
    Eigen::LLT<Eigen::Matrix2d> llt(h);
    if (llt.info() == Eigen::Success && h.eigenvalues().real().minCoeff() > 1e-12 * scale)
      step = -llt.solve(g);
    else
      step = -g / scale;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const double na = a + t * step(0);
      const double nb = b + t * step(1);
      const double ne = classical_energy(na, nb, p, coupling);
      if (ne <= e) {
        a = na;
        b = nb;
        moved = ne < e || t == 1.0;
        e = ne;
        break;
      }
    }
    if (!moved) break;
  }
  return {wrap_angle(a), wrap_angle(b)};
}

}  // namespace detail

/// Global minimum over the torus: a grid over both angles, Newton
/// refinement of every grid-local minimum, then the lowest energy wins.
/// Among degenerate minima the one with the largest m_s is reported.
inline AngleConfig minimize_classical(const ModelParams& p,
                                      SublatticeCoupling coupling = SublatticeCoupling::staggered,
                                      const ClassicalOptions& opt = {}) {
  detail::require_all_to_all(p);
  const int g = opt.grid;
  const double step = 2.0 * std::numbers::pi / g;
  std::vector<double> e(static_cast<std::size_t>(g) * static_cast<std::size_t>(g));
  auto idx = [g](int i, int j) {
    return static_cast<std::size_t>(((i % g) + g) % g) * static_cast<std::size_t>(g) +
           static_cast<std::size_t>(((j % g) + g) % g);
  };
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) e[idx(i, j)] = classical_energy(i * step, j * step, p, coupling);

  std::vector<AngleConfig> minima;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double c = e[idx(i, j)];
      bool local = true;
      for (int di = -1; di <= 1 && local; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          if ((di || dj) && e[idx(i + di, j + dj)] < c) {
            local = false;
            break;
          }
      if (!local) continue;
      const auto r = detail::refine_classical(i * step, j * step, p, coupling, opt);
      AngleConfig cfg;
      cfg.theta_a = r[0];
      cfg.theta_b = r[1];
      cfg.energy = classical_energy(r[0], r[1], p, coupling);
      cfg.m_s = 0.5 * p.s * (std::cos(r[0]) - std::cos(r[1]));
      minima.push_back(cfg);
    }
  }
  const double tie = opt.tie_tolerance * p.s * p.s * p.gamma;
  AngleConfig best = minima.front();
  for (const auto& m : minima)
    if (m.energy < best.energy - tie || (std::abs(m.energy - best.energy) <= tie && m.m_s > best.m_s)) best = m;
  for (const auto& m : minima)
    if (std::abs(m.energy - best.energy) <= tie && std::abs(m.m_s - best.m_s) > opt.zero_threshold * p.s)
      best.degenerate = true;
  if (std::abs(best.m_s) < opt.zero_threshold * p.s) best.m_s = 0.0;
  return best;
}

/// theta_a, theta_b, energy rows on a count x count grid over [0, 2 pi).
inline void write_landscape_csv(std::ostream& os, const ModelParams& p, int count,
                                SublatticeCoupling coupling = SublatticeCoupling::staggered) {
  os << "theta_a,theta_b,energy\n";
  os.precision(17);
  const double step = 2.0 * std::numbers::pi / count;
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j)
      os << i * step << ',' << j * step << ',' << classical_energy(i * step, j * step, p, coupling) << '\n';
}

}  // namespace stagising
