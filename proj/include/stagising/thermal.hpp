#pragma once

// Single-spin thermal functions for a spin-s moment in an effective field.

#include <cmath>

namespace stagising {

/// ln[ sinh((2s+1) x) / sinh(x) ] for x >= 0.
///
/// Rewritten as 2s x + ln(1 - e^{-2(2s+1)x}) - ln(1 - e^{-2x}) so that
/// x up to ~1e8 neither overflows nor loses the small-x limit ln(2s+1).
inline double log_sinh_ratio(double x, double s) {
  const double n = 2.0 * s + 1.0;
  x = std::abs(x);
  if (x == 0.0) return std::log(n);
  return 2.0 * s * x + std::log(-std::expm1(-2.0 * n * x)) - std::log(-std::expm1(-2.0 * x));
}

namespace detail {

/// n coth(n x) - coth(x), odd in x; the small-x branch is its series.
inline double coth_difference(double x, double n) {
  const double ax = std::abs(x);
  if (ax < 1e-4) {
    const double n2 = n * n;
    return (n2 - 1.0) * x / 3.0 - (n2 * n2 - 1.0) * x * x * x / 45.0;
  }
  // coth(y) = 1 + 2 e^{-2y} / (1 - e^{-2y})
  auto coth = [](double y) { return -1.0 - 2.0 / std::expm1(-2.0 * y); };
  const double v = n * coth(n * ax) - coth(ax);
  return x < 0 ? -v : v;
}

/// d/dx [n coth(n x) - coth(x)] = csch^2(x) - n^2 csch^2(n x), even in x.
inline double coth_difference_derivative(double x, double n) {
  const double ax = std::abs(x);
  const double n2 = n * n;
  if (ax < 1e-4) return (n2 - 1.0) / 3.0 - (n2 * n2 - 1.0) * ax * ax / 15.0;
  auto csch2 = [](double y) {
    const double e = std::exp(-2.0 * y);
    const double d = -std::expm1(-2.0 * y);
    return 4.0 * e / (d * d);
  };
  return csch2(ax) - n2 * csch2(n * ax);
}

}  // namespace detail

/// Brillouin function B_s(y); B_{1/2}(y) = tanh(y).
inline double brillouin(double y, double s) {
  if (std::isinf(y)) return y > 0 ? 1.0 : -1.0;
  const double two_s = 2.0 * s;
  return detail::coth_difference(y / two_s, two_s + 1.0) / two_s;
}

/// dB_s/dy.
inline double brillouin_derivative(double y, double s) {
  if (std::isinf(y)) return 0.0;
  const double two_s = 2.0 * s;
  return detail::coth_difference_derivative(y / two_s, two_s + 1.0) / (two_s * two_s);
}

/// B_s(2 s beta eps) / eps, finite as eps -> 0 at finite beta. Zero
/// temperature is 1/eps, and the eps = 0 kink reports 0 (a subgradient).
inline double polarization_over_eps(double beta, double eps, double s) {
  if (std::isinf(beta)) return eps == 0.0 ? 0.0 : 1.0 / eps;
  const double y = 2.0 * s * beta * eps;
  if (std::abs(y) < 1e-6) return 2.0 * s * beta * (s + 1.0) / (3.0 * s);
  return brillouin(y, s) / eps;
}

}  // namespace stagising
