#pragma once

// Truncated Taylor series a_0 + a_1 t + ... + a_{K-1} t^{K-1} with the usual
// recurrences for products, quotients and elementary functions. Used to get
// series coefficients of the variational energy to machine precision.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace stagising {

template <std::size_t K>
class TaylorSeries {
 public:
  TaylorSeries() { c_.fill(0.0); }

  static TaylorSeries constant(double v) {
    TaylorSeries r;
    r.c_[0] = v;
    return r;
  }

  /// The series of t itself, scaled: v0 + slope * t.
  static TaylorSeries variable(double v0, double slope = 1.0) {
    TaylorSeries r;
    r.c_[0] = v0;
    if constexpr (K > 1) r.c_[1] = slope;
    return r;
  }

  double operator[](std::size_t k) const { return c_[k]; }
  double& operator[](std::size_t k) { return c_[k]; }

  friend TaylorSeries operator+(TaylorSeries a, const TaylorSeries& b) {
    for (std::size_t k = 0; k < K; ++k) a.c_[k] += b.c_[k];
    return a;
  }
  friend TaylorSeries operator-(TaylorSeries a, const TaylorSeries& b) {
    for (std::size_t k = 0; k < K; ++k) a.c_[k] -= b.c_[k];
    return a;
  }
  friend TaylorSeries operator*(double s, TaylorSeries a) {
    for (auto& v : a.c_) v *= s;
    return a;
  }
  friend TaylorSeries operator+(TaylorSeries a, double s) {
    a.c_[0] += s;
    return a;
  }
  friend TaylorSeries operator*(const TaylorSeries& a, const TaylorSeries& b) {
    TaylorSeries r;
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j <= k; ++j) r.c_[k] += a.c_[j] * b.c_[k - j];
    return r;
  }

  friend TaylorSeries sqrt(const TaylorSeries& a) {
    if (!(a.c_[0] > 0.0)) throw std::domain_error("series sqrt needs a positive constant term");
    TaylorSeries r;
    r.c_[0] = std::sqrt(a.c_[0]);
    for (std::size_t k = 1; k < K; ++k) {
      double acc = a.c_[k];
      for (std::size_t j = 1; j < k; ++j) acc -= r.c_[j] * r.c_[k - j];
      r.c_[k] = acc / (2.0 * r.c_[0]);
    }
    return r;
  }

  /// Coefficients of exp(a) for k >= 1, with the constant term supplied.
  static TaylorSeries exp_like(const TaylorSeries& a, double c0, double exp_a0) {
    TaylorSeries e;
    e.c_[0] = exp_a0;
    for (std::size_t k = 1; k < K; ++k) {
      double acc = 0.0;
      for (std::size_t j = 1; j <= k; ++j) acc += static_cast<double>(j) * a.c_[j] * e.c_[k - j];
      e.c_[k] = acc / static_cast<double>(k);
    }
    e.c_[0] = c0;
    return e;
  }

  friend TaylorSeries exp(const TaylorSeries& a) {
    const double e0 = std::exp(a.c_[0]);
    return exp_like(a, e0, e0);
  }

  friend TaylorSeries expm1(const TaylorSeries& a) {
    return exp_like(a, std::expm1(a.c_[0]), std::exp(a.c_[0]));
  }

  friend TaylorSeries log(const TaylorSeries& a) {
    if (!(a.c_[0] > 0.0)) throw std::domain_error("series log needs a positive constant term");
    TaylorSeries l;
    l.c_[0] = std::log(a.c_[0]);
    for (std::size_t k = 1; k < K; ++k) {
      double acc = a.c_[k];
      for (std::size_t j = 1; j < k; ++j) acc -= static_cast<double>(j) * l.c_[j] * a.c_[k - j] / static_cast<double>(k);
      l.c_[k] = acc / a.c_[0];
    }
    return l;
  }

 private:
  std::array<double, K> c_;
};

}  // namespace stagising
