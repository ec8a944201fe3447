#pragma once

// Landau analysis of the univariate energy: series coefficients about
// m_s = 0, the second-order critical line and the tricritical point.

#include "stagising/taylor.hpp"
#include "stagising/univariate.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>

namespace stagising {

/// e0(Gamma m) = e0(0) + c2 m^2 + c4 m^4 + c6 m^6 + O(m^8).
struct LandauCoefficients {
  double c2 = 0.0;
  double c4 = 0.0;
  double c6 = 0.0;
};

namespace detail {

using Series7 = TaylorSeries<7>;

/// Series in u of the per-site single-spin term for one sublattice, where
/// the effective field is wx + sign * 2u.
inline Series7 sublattice_term_series(const ModelParams& p, double sign) {
  // 4 eps^2 = wz^2 + (wx + sign 2u)^2
  Series7 q;
  q[0] = p.omega_z * p.omega_z + p.omega_x * p.omega_x;
  q[1] = sign * 4.0 * p.omega_x;
  q[2] = 4.0;
  const Series7 eps = 0.5 * sqrt(q);
  if (p.zero_temperature()) return (-p.s) * eps;
  const double n = 2.0 * p.s + 1.0;
  const Series7 x = p.beta * eps;
  // ln[sinh(n x)/sinh(x)] = 2s x + ln(1 - e^{-2 n x}) - ln(1 - e^{-2x})
  const Series7 a = (-1.0) * expm1((-2.0 * n) * x);
  const Series7 c = (-1.0) * expm1((-2.0) * x);
  const Series7 ratio = (2.0 * p.s) * x + log(a) - log(c);
  return (-0.5 / p.beta) * ratio;
}

}  // namespace detail

/// Coefficients of the (free) energy in powers of m_s, exact to rounding.
///
/// Zero temperature with wz = 0 has a kink at u = |wx|/2 and, at wx = 0, at
/// the origin itself; no expansion exists there.
inline LandauCoefficients landau_coefficients(const ModelParams& p) {
  p.validate();
  if (p.zero_temperature() && p.omega_z == 0.0)
    throw std::domain_error("energy is not analytic at m_s = 0 when omega_z = 0");
  if (p.omega_z == 0.0 && p.omega_x == 0.0)
    throw std::domain_error("series about a vanishing effective field is not supported");
  detail::Series7 total = detail::sublattice_term_series(p, 1.0) + detail::sublattice_term_series(p, -1.0);
  total[2] += 1.0 / p.gamma;
  const double g2 = p.gamma * p.gamma;
  return {total[2] * g2, total[4] * g2 * g2, total[6] * g2 * g2 * g2};
}

/// Largest positive root wz of 4 s^2 Gamma^2 wz^4 = (wz^2 + wx^2)^3 with
/// wz >= 2|wx|; empty beyond the tricritical point.
inline std::optional<double> second_order_line(double omega_x, double s, double gamma) {
  const double sg = s * gamma;
  const double x2 = omega_x * omega_x;
  auto g = [&](double wz) {
    const double z = wz * wz;
    return (z + x2) * (z + x2) * (z + x2) - 4.0 * sg * sg * z * z;
  };
  const double lo = 2.0 * std::abs(omega_x);
  const double hi = 2.0 * sg;
  if (lo > hi) return std::nullopt;
  if (omega_x == 0.0) return hi;
  const double glo = g(lo);
  // Endpoint root at the tricritical point, judged relative to the two terms.
  const double zlo = lo * lo;
  const double term = std::max((zlo + x2) * (zlo + x2) * (zlo + x2), 4.0 * sg * sg * zlo * zlo);
  if (std::abs(glo) <= 1e-12 * term) return lo;
  if (glo > 0.0) return std::nullopt;
  const double ghi = g(hi);
  if (ghi <= 0.0) return hi;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

/// Closed-form tricritical point (wx, wz) = (8, 16) s Gamma / (5 sqrt 5).
inline std::pair<double, double> tricritical_point_exact(double s, double gamma) {
  const double k = s * gamma / (5.0 * std::sqrt(5.0));
  return {8.0 * k, 16.0 * k};
}

/// Point on the c2 = 0 locus at fixed wx, with the sign of c4 there.
struct CriticalLinePoint {
  double omega_x = 0.0;
  double omega_z = 0.0;
  double c4 = 0.0;
  bool second_order() const { return c4 > 0.0; }
};

struct LandauScanOptions {
  /// Grid used to find the topmost sign change of c2 in wz.
  int wz_grid = 400;
  /// Smallest wz probed, in units of s Gamma.
  double wz_floor = 1e-6;
  /// Largest wz probed, in units of s Gamma.
  double wz_ceiling = 2.5;
};

/// Largest wz where c2 changes sign at fixed wx (the paramagnetic
/// instability line), found by scanning down from the paramagnet and
/// bisecting. Works at any temperature.
inline std::optional<CriticalLinePoint> landau_critical_point(const ModelParams& base, double omega_x,
                                                               const LandauScanOptions& opt = {}) {
  ModelParams p = base;
  p.omega_x = omega_x;
  const double sg = p.s_gamma();
  auto c2_at = [&](double wz) {
    ModelParams q = p;
    q.omega_z = wz;
    return landau_coefficients(q).c2;
  };
  const double top = opt.wz_ceiling * sg;
  const double floor = opt.wz_floor * sg;
  double prev_wz = top;
  double prev_c2 = c2_at(top);
  if (!(prev_c2 > 0.0)) return std::nullopt;
  for (int k = 1; k <= opt.wz_grid; ++k) {
    const double wz = top - (top - floor) * static_cast<double>(k) / static_cast<double>(opt.wz_grid);
    const double c2 = c2_at(wz);
    if (c2 <= 0.0) {
      std::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(c2_at, wz, prev_wz, c2, prev_c2,
                                                       boost::math::tools::eps_tolerance<double>(50), iters);
      CriticalLinePoint cp;
      cp.omega_x = omega_x;
      cp.omega_z = 0.5 * (r.first + r.second);
      ModelParams q = p;
      q.omega_z = cp.omega_z;
      cp.c4 = landau_coefficients(q).c4;
      return cp;
    }
    prev_wz = wz;
    prev_c2 = c2;
  }
  return std::nullopt;
}

/// Tricritical point located by scanning the c2 = 0 locus for the sign
/// change of c4, at the temperature of `base`. Empty if the locus stays
/// second order until it leaves the scanned window.
inline std::optional<CriticalLinePoint> landau_tricritical_point(const ModelParams& base, int wx_grid = 200,
                                                                 double wx_max_sgamma = 2.0) {
  const double sg = base.s_gamma();
  auto c4_on_line = [&](double wx) -> std::optional<double> {
    const auto cp = landau_critical_point(base, wx);
    if (!cp) return std::nullopt;
    return cp->c4;
  };
  double prev_wx = 0.0;
  auto prev = c4_on_line(0.0);
  if (!prev || *prev <= 0.0) return std::nullopt;
  for (int k = 1; k <= wx_grid; ++k) {
    const double wx = wx_max_sgamma * sg * static_cast<double>(k) / static_cast<double>(wx_grid);
    const auto cur = c4_on_line(wx);
    if (!cur) return std::nullopt;
    if (*cur <= 0.0) {
      double lo = prev_wx;
      double hi = wx;
      for (int it = 0; it < 200 && hi - lo > 1e-13 * sg; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto c = c4_on_line(mid);
        if (c && *c > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      return landau_critical_point(base, 0.5 * (lo + hi));
    }
    prev_wx = wx;
    prev = cur;
  }
  return std::nullopt;
}

}  // namespace stagising
