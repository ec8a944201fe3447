#pragma once

// Model definition for the tunable-range staggered Ising chain:
//
//   H = -wz sum_i S^z_i - wx sum_i S^x_i - sum_ij J_ij S^x_i S^x_j
//   J_ij = (-1)^(i+j) Gamma K(r_ij) / Ntilde,   K(0) = b,  K(r) = r^-alpha
//
// with nearest-image distances on a ring and the Kac factor Ntilde = sum_r K(r).

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stagising {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Interaction-range exponent. The nearest-neighbour limit is a distinct
/// variant instead of a large float so that r^-alpha never overflows.
class RangeExponent {
 public:
  explicit RangeExponent(double value = 0.0) : value_(value) {
    if (!(value >= 0.0) || !std::isfinite(value))
      throw std::invalid_argument("alpha must be a finite non-negative number");
  }

  static RangeExponent nearest_neighbor() {
    RangeExponent a;
    a.nearest_neighbor_ = true;
    a.value_ = kInf;
    return a;
  }

  bool is_nearest_neighbor() const { return nearest_neighbor_; }

  /// Finite exponent; throws for the nearest-neighbour variant.
  double value() const {
    if (nearest_neighbor_) throw std::logic_error("alpha is infinite");
    return value_;
  }

  /// Kernel value at lattice distance d >= 1.
  double coupling(int d) const {
    if (nearest_neighbor_) return d == 1 ? 1.0 : 0.0;
    if (value_ == 0.0) return 1.0;
    return std::pow(static_cast<double>(d), -value_);
  }

  std::string to_string() const {
    if (nearest_neighbor_) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value_);
    return buf;
  }

  friend bool operator==(const RangeExponent& a, const RangeExponent& b) {
    return a.nearest_neighbor_ == b.nearest_neighbor_ &&
           (a.nearest_neighbor_ || a.value_ == b.value_);
  }

 private:
  double value_ = 0.0;
  bool nearest_neighbor_ = false;
};

/// All physical knobs of the chain. Fields are in absolute energy units;
/// `b` unset means "tune so that the smallest interaction eigenvalue is 0".
struct ModelParams {
  int n = 8;
  double s = 0.5;
  RangeExponent alpha{0.0};
  double gamma = 1.0;
  double omega_x = 0.0;
  double omega_z = 0.0;
  std::optional<double> b;
  double beta = kInf;

  double s_gamma() const { return s * gamma; }
  bool zero_temperature() const { return std::isinf(beta); }

  void validate() const {
    if (n < 2 || n % 2 != 0)
      throw std::invalid_argument("n must be a positive even integer, got " + std::to_string(n));
    const double two_s = 2.0 * s;
    if (!(s > 0.0) || std::abs(two_s - std::round(two_s)) > 1e-12)
      throw std::invalid_argument("s must be a positive half-integer");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw std::invalid_argument("gamma must be positive");
    if (!std::isfinite(omega_x) || !std::isfinite(omega_z))
      throw std::invalid_argument("fields must be finite");
    if (omega_z < 0.0) throw std::invalid_argument("omega_z must be non-negative");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive or infinite");
    if (b && !std::isfinite(*b)) throw std::invalid_argument("b must be finite");
  }

  /// Number of S^x levels per site.
  int levels() const { return static_cast<int>(std::lround(2.0 * s)) + 1; }
};

/// min(|i-j|, N-|i-j|) on a ring of N sites.
inline int nearest_image_distance(int i, int j, int n) {
  const int d = std::abs(i - j);
  return std::min(d, n - d);
}

/// Kernel K(r) for r = 0..N-1 with K(0) = b and nearest-image distances.
inline std::vector<double> build_kernel(int n, const RangeExponent& alpha, double b) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("kernel requires an even site count");
  std::vector<double> k(static_cast<std::size_t>(n));
  k[0] = b;
  for (int r = 1; r < n; ++r) k[static_cast<std::size_t>(r)] = alpha.coupling(nearest_image_distance(0, r, n));
  return k;
}

namespace detail {

/// Real parts of the DFT of a symmetric real sequence, c_m = sum_r k_r cos(2 pi m r / N).
inline std::vector<double> symmetric_dft(const std::vector<double>& k) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> out;
  fft.fwd(out, k);
  std::vector<double> c(k.size());
  for (std::size_t m = 0; m < k.size(); ++m) c[m] = out[m].real();
  return c;
}

}  // namespace detail

/// The on-site shift that puts the smallest interaction eigenvalue at zero.
///
/// J is a circulant conjugated by diag((-1)^i), so its eigenvalues are the
/// cosine transform of the kernel. Changing b adds b to every numerator,
/// hence b = -min_m sum_{r>0} K(r) cos(2 pi m r / N).
inline double tune_b(int n, const RangeExponent& alpha) {
  const auto offsite = detail::symmetric_dft(build_kernel(n, alpha, 0.0));
  return -*std::min_element(offsite.begin(), offsite.end());
}

inline double resolved_b(const ModelParams& p) { return p.b ? *p.b : tune_b(p.n, p.alpha); }

/// Eigen-decomposition of the interaction matrix J = (1/N) lambda D lambda^T.
struct InteractionSpectrum {
  /// D_k, descending.
  Eigen::VectorXd eigenvalues;
  /// Momentum label m of each eigenvalue and whether its real mode is the
  /// cosine (true) or sine (false) member of the +-m pair.
  std::vector<int> momentum;
  std::vector<bool> cosine_mode;
  Eigen::Index staggered_index = 0;
  double kac_norm = 0.0;
  double b = 0.0;
  int n = 0;

  /// Column k of lambda, scaled so that lambda/sqrt(N) is orthogonal.
  Eigen::VectorXd mode_vector(Eigen::Index k) const {
    Eigen::VectorXd v(n);
    const int m = momentum[static_cast<std::size_t>(k)];
    const bool self_conjugate = (m == 0 || 2 * m == n);
    const double scale = self_conjugate ? 1.0 : std::numbers::sqrt2;
    for (int i = 0; i < n; ++i) {
      const double phase = 2.0 * std::numbers::pi * m * i / n;
      const double wave = cosine_mode[static_cast<std::size_t>(k)] ? std::cos(phase) : std::sin(phase);
      v(i) = ((i % 2 == 0) ? 1.0 : -1.0) * scale * wave;
    }
    return v;
  }

  Eigen::MatrixXd mode_table() const {
    Eigen::MatrixXd table(n, n);
    for (Eigen::Index k = 0; k < n; ++k) table.col(k) = mode_vector(k);
    return table;
  }
};

inline InteractionSpectrum spectrum(const ModelParams& p) {
  p.validate();
  InteractionSpectrum out;
  out.n = p.n;
  out.b = resolved_b(p);
  const auto kernel = build_kernel(p.n, p.alpha, out.b);
  out.kac_norm = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  if (out.kac_norm == 0.0) throw std::invalid_argument("Kac normalization vanishes; choose a different b");
  const auto c = detail::symmetric_dft(kernel);

  struct Entry {
    double value;
    int m;
    bool cosine;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(p.n));
  const int half = p.n / 2;
  for (int m = 0; m <= half; ++m) {
    // Mode (-1)^i e^{i q j} of J has the eigenvalue of the circulant at q.
    const double value = (m == 0) ? p.gamma : p.gamma * c[static_cast<std::size_t>(m)] / out.kac_norm;
    entries.push_back({value, m, true});
    if (m != 0 && m != half) entries.push_back({value, m, false});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.value > b.value; });

  out.eigenvalues.resize(p.n);
  out.momentum.resize(entries.size());
  out.cosine_mode.resize(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    out.eigenvalues(static_cast<Eigen::Index>(k)) = entries[k].value;
    out.momentum[k] = entries[k].m;
    out.cosine_mode[k] = entries[k].cosine;
    if (entries[k].m == 0) out.staggered_index = static_cast<Eigen::Index>(k);
  }
  return out;
}

/// Dense J_ij = (-1)^(i+j) Gamma K(r_ij) / Ntilde.
inline Eigen::MatrixXd build_dense_J(const ModelParams& p) {
  p.validate();
  const double b = resolved_b(p);
  const auto kernel = build_kernel(p.n, p.alpha, b);
  const double kac = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  Eigen::MatrixXd j(p.n, p.n);
  for (int r = 0; r < p.n; ++r) {
    for (int c = 0; c < p.n; ++c) {
      const double sign = ((r + c) % 2 == 0) ? 1.0 : -1.0;
      j(r, c) = sign * p.gamma * kernel[static_cast<std::size_t>(nearest_image_distance(r, c, p.n))] / kac;
    }
  }
  return j;
}

/// J_ij with the intrasublattice (i+j even) couplings removed, off-site only.
inline Eigen::MatrixXd build_intersublattice_J(const ModelParams& p) {
  Eigen::MatrixXd j = build_dense_J(p);
  for (int r = 0; r < p.n; ++r)
    for (int c = 0; c < p.n; ++c)
      if ((r + c) % 2 == 0) j(r, c) = 0.0;
  return j;
}

}  // namespace stagising
