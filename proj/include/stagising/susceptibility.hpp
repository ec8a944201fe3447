#pragma once

// Linear-response susceptibility chi = (I - 2 diag(Y) J)^{-1} diag(Y) around
// the variational solution, and power-law fits of its decay with distance.

#include "stagising/model.hpp"
#include "stagising/parallel.hpp"
#include "stagising/thermal.hpp"
#include "stagising/univariate.hpp"

#include <boost/math/tools/minima.hpp>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace stagising {

/// Single-site longitudinal response d<S^x>/dh for a spin in the effective
/// field `h` along x and `omega_z` along z.
inline double site_response(double h, double omega_z, double beta, double s) {
  const double eps = 0.5 * std::hypot(omega_z, h);
  if (std::isinf(beta)) {
    if (eps == 0.0) return 0.0;
    return s * omega_z * omega_z / (8.0 * eps * eps * eps);
  }
  const double y = 2.0 * s * beta * eps;
  // Curie limit s(s+1) beta / 3 once the field is negligible.
  if (y < 1e-6) return s * (s + 1.0) * beta / 3.0;
  const double bs = brillouin(y, s);
  const double dbs = brillouin_derivative(y, s);
  return s / (2.0 * eps * eps) * (eps * bs + h * h * (0.5 * s * beta * dbs - bs / (4.0 * eps)));
}

/// Y_i at the variational point, site i seeing wx + 2 (-1)^i u_bar.
inline Eigen::VectorXd y_vector(const ModelParams& p, double u_bar) {
  Eigen::VectorXd y(p.n);
  for (int i = 0; i < p.n; ++i) {
    const double h = p.omega_x + ((i % 2 == 0) ? 2.0 : -2.0) * u_bar;
    y(i) = site_response(h, p.omega_z, p.beta, p.s);
  }
  return y;
}

class CriticalDivergence : public std::runtime_error {
 public:
  CriticalDivergence(double condition, const std::string& where)
      : std::runtime_error("susceptibility diverges (condition number " + std::to_string(condition) + ") " + where),
        condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

struct SusceptibilityMatrix {
  Eigen::MatrixXd chi;
  ModelParams params;
  double u_bar = 0.0;
  Eigen::VectorXd y;
  /// 2-norm condition number of I - 2 diag(Y) J.
  double condition = 1.0;
};

inline double condition_number(const Eigen::MatrixXd& a) {
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues();
  const double smin = sv(sv.size() - 1);
  return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

inline Eigen::MatrixXd response_kernel(const ModelParams& p, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd j = build_dense_J(p);
  return Eigen::MatrixXd::Identity(p.n, p.n) - 2.0 * y.asDiagonal() * j;
}

/// Condition number of the response kernel at the variational minimum.
inline double response_condition(const ModelParams& p) {
  const auto vp = minimize_univariate(p);
  return condition_number(response_kernel(p, y_vector(p, vp.u_bar)));
}

inline SusceptibilityMatrix chi_matrix(const ModelParams& p, double max_condition = 1e12) {
  p.validate();
  if (p.n > 4096) throw std::invalid_argument("dense susceptibility limited to n <= 4096");
  SusceptibilityMatrix out;
  out.params = p;
  out.u_bar = minimize_univariate(p).u_bar;
  out.y = y_vector(p, out.u_bar);
  const Eigen::MatrixXd a = response_kernel(p, out.y);
  out.condition = condition_number(a);
  if (!(out.condition <= max_condition))
    throw CriticalDivergence(out.condition, "at omega_x=" + std::to_string(p.omega_x) +
                                                " omega_z=" + std::to_string(p.omega_z));
  out.chi = a.partialPivLu().solve(Eigen::MatrixXd(out.y.asDiagonal()));
  return out;
}

struct DivergenceLocation {
  double value = 0.0;
  double condition = 0.0;
};

/// Where the response kernel is closest to singular along one field axis:
/// a grid scan for the worst condition number, refined by Brent on its log.
inline DivergenceLocation locate_divergence(const ModelParams& base, bool vary_omega_z, double from, double to,
                                            int count = 81) {
  auto at = [&](double v) {
    ModelParams p = base;
    (vary_omega_z ? p.omega_z : p.omega_x) = v;
    return p;
  };
  auto neg_log_cond = [&](double v) { return -std::log(response_condition(at(v))); };
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k) {
    const double v = from + (to - from) * k / (count - 1.0);
    const double f = neg_log_cond(v);
    if (f < best_val) {
      best_val = f;
      best = k;
    }
  }
  const double step = (to - from) / (count - 1.0);
  const double lo = from + step * std::max(best - 1, 0);
  const double hi = from + step * std::min(best + 1, count - 1);
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::brent_find_minima(neg_log_cond, lo, hi, 40, iters);
  return {r.first, std::exp(-r.second)};
}

/// Intersublattice (0-1), even-sublattice (0-0) and odd-sublattice (1-1) pairs.
enum class CorrelationFamily { inter, even, odd };

inline std::string to_string(CorrelationFamily f) {
  switch (f) {
    case CorrelationFamily::inter: return "01";
    case CorrelationFamily::even: return "00";
    default: return "11";
  }
}

inline CorrelationFamily family_of(int i, int j) {
  if ((i + j) % 2 != 0) return CorrelationFamily::inter;
  return i % 2 == 0 ? CorrelationFamily::even : CorrelationFamily::odd;
}

enum class FitStatus { ok, flat, non_monotonic, too_few_points };

inline std::string to_string(FitStatus s) {
  switch (s) {
    case FitStatus::ok: return "ok";
    case FitStatus::flat: return "flat";
    case FitStatus::non_monotonic: return "non_monotonic";
    default: return "too_few_points";
  }
}

struct DecayFit {
  CorrelationFamily family = CorrelationFamily::inter;
  FitStatus status = FitStatus::ok;
  /// |chi_r| ~ r^{-alpha_chi}.
  double alpha_chi = 0.0;
  double log_amplitude = 0.0;
  double r_squared = 0.0;
  std::vector<int> distances;
  std::vector<double> values;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 2) throw std::invalid_argument("a line fit needs at least two points");
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    a(k, 0) = x[static_cast<std::size_t>(k)];
    a(k, 1) = 1.0;
    b(k) = y[static_cast<std::size_t>(k)];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  const double ss_res = (a * c - b).squaredNorm();
  return {c(0), c(1), ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

/// Log-log least squares of |chi_r| against lattice distance r over
/// 1 <= r <= N/4, using translation invariance by two sites.
inline DecayFit decay_fit(const Eigen::MatrixXd& chi, CorrelationFamily family, double flat_tolerance = 1e-9) {
  const auto n = static_cast<int>(chi.rows());
  const int origin = family == CorrelationFamily::odd ? 1 : 0;
  DecayFit fit;
  fit.family = family;
  for (int r = 1; r <= n / 4; ++r) {
    const bool odd_distance = r % 2 != 0;
    if (odd_distance != (family == CorrelationFamily::inter)) continue;
    fit.distances.push_back(r);
    fit.values.push_back(std::abs(chi(origin, (origin + r) % n)));
  }
  if (fit.values.size() < 2) {
    fit.status = FitStatus::too_few_points;
    return fit;
  }
  const auto [mn, mx] = std::minmax_element(fit.values.begin(), fit.values.end());
  if (*mx - *mn <= flat_tolerance * *mx) {
    fit.status = FitStatus::flat;
    fit.alpha_chi = 0.0;
    fit.log_amplitude = std::log(*mx);
    fit.r_squared = 1.0;
    return fit;
  }
  for (std::size_t k = 1; k < fit.values.size(); ++k) {
    if (fit.values[k] > fit.values[k - 1]) {
      fit.status = FitStatus::non_monotonic;
      return fit;
    }
  }
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < fit.values.size(); ++k) {
    lx.push_back(std::log(static_cast<double>(fit.distances[k])));
    ly.push_back(std::log(fit.values[k]));
  }
  const auto line = least_squares_line(lx, ly);
  fit.alpha_chi = -line.slope;
  fit.log_amplitude = line.intercept;
  fit.r_squared = line.r_squared;
  return fit;
}

struct SlopeScan {
  std::vector<double> alphas;
  std::vector<DecayFit> fits;
  /// alpha_chi = slope * alpha + intercept.
  LineFit line;
};

/// Fits the decay exponent at each alpha and regresses it linearly on alpha.
inline SlopeScan slope_scan(const std::vector<double>& alphas, const ModelParams& point, CorrelationFamily family,
                            unsigned jobs = 1) {
  SlopeScan out;
  out.alphas = alphas;
  out.fits = parallel_map(alphas.size(), jobs, [&](std::size_t k) {
    ModelParams p = point;
    p.alpha = RangeExponent(alphas[k]);
    p.b.reset();
    return decay_fit(chi_matrix(p).chi, family);
  });
  std::vector<double> x, y;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (out.fits[k].status != FitStatus::ok && out.fits[k].status != FitStatus::flat) continue;
    x.push_back(alphas[k]);
    y.push_back(out.fits[k].alpha_chi);
  }
  if (x.size() >= 2) out.line = least_squares_line(x, y);
  return out;
}

}  // namespace stagising
