#pragma once

// Real log-amplitude wave functions over S^x configurations x_i = +-1.
// Each ansatz exposes a Walker that caches whatever makes single-flip
// amplitude ratios cheap.

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace stagising {

/// Configuration of 2 S^x_i eigenvalues, each +1 or -1.
class SpinConfig {
 public:
  SpinConfig() = default;
  explicit SpinConfig(Eigen::VectorXd x) : x_(std::move(x)) {
    for (Eigen::Index i = 0; i < x_.size(); ++i)
      if (x_(i) != 1.0 && x_(i) != -1.0)
        throw std::invalid_argument("spin entries must be +1 or -1, got " + std::to_string(x_(i)) + " at " +
                                    std::to_string(i));
  }

  static SpinConfig uniform(int n, double value) { return SpinConfig(Eigen::VectorXd::Constant(n, value)); }

  static SpinConfig neel(int n) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = i % 2 == 0 ? 1.0 : -1.0;
    return SpinConfig(std::move(x));
  }

  template <class Rng>
  static SpinConfig random(int n, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = coin(rng) ? 1.0 : -1.0;
    return SpinConfig(std::move(x));
  }

  /// Basis index with site i as bit i, x_i = +1 setting the bit.
  static SpinConfig from_index(std::size_t index, int n) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = ((index >> i) & 1u) ? 1.0 : -1.0;
    return SpinConfig(std::move(x));
  }

  std::size_t index() const {
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < x_.size(); ++i)
      if (x_(i) > 0.0) k |= std::size_t{1} << i;
    return k;
  }

  int size() const { return static_cast<int>(x_.size()); }
  double operator[](Eigen::Index i) const { return x_(i); }
  const Eigen::VectorXd& values() const { return x_; }
  void flip(Eigen::Index i) { x_(i) = -x_(i); }

  /// sum_i (-1)^i x_i / (2N): the staggered magnetization of this configuration.
  double staggered() const {
    double m = 0.0;
    for (Eigen::Index i = 0; i < x_.size(); ++i) m += (i % 2 == 0 ? 1.0 : -1.0) * x_(i);
    return m / (2.0 * static_cast<double>(x_.size()));
  }

  friend bool operator==(const SpinConfig& a, const SpinConfig& b) { return a.x_ == b.x_; }

 private:
  Eigen::VectorXd x_;
};

template <class A>
concept Ansatz = requires(const A& a, A& m, const SpinConfig& x, const Eigen::VectorXd& theta, Eigen::Index i) {
  { a.sites() } -> std::convertible_to<int>;
  { a.num_parameters() } -> std::convertible_to<Eigen::Index>;
  { a.parameters() } -> std::convertible_to<Eigen::VectorXd>;
  m.set_parameters(theta);
  { a.log_amplitude(x) } -> std::convertible_to<double>;
  { a.log_amplitude_ratio(x, i) } -> std::convertible_to<double>;
  { a.gradient(x) } -> std::convertible_to<Eigen::VectorXd>;
  typename A::Walker;
  { typename A::Walker(a, x) };
};

/// log cosh without overflow.
inline double log_cosh(double v) {
  const double a = std::abs(v);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

/// log psi = sum_i a_i x_i.
class MeanFieldAnsatz {
 public:
  explicit MeanFieldAnsatz(int n) : a_(Eigen::VectorXd::Zero(n)) {}

  int sites() const { return static_cast<int>(a_.size()); }
  Eigen::Index num_parameters() const { return a_.size(); }
  const Eigen::VectorXd& parameters() const { return a_; }
  void set_parameters(const Eigen::VectorXd& theta) {
    if (theta.size() != a_.size()) throw std::invalid_argument("parameter vector has the wrong length");
    a_ = theta;
  }

  double log_amplitude(const SpinConfig& x) const { return a_.dot(x.values()); }
  double log_amplitude_ratio(const SpinConfig& x, Eigen::Index i) const { return -2.0 * a_(i) * x[i]; }
  Eigen::VectorXd gradient(const SpinConfig& x) const { return x.values(); }

  class Walker {
   public:
    Walker(const MeanFieldAnsatz& a, SpinConfig x) : a_(&a), x_(std::move(x)) {}
    const SpinConfig& config() const { return x_; }
    double log_ratio(Eigen::Index i) const { return a_->log_amplitude_ratio(x_, i); }
    void flip(Eigen::Index i) { x_.flip(i); }

   private:
    const MeanFieldAnsatz* a_;
    SpinConfig x_;
  };

 private:
  Eigen::VectorXd a_;
};

namespace detail {

/// Accumulates log of a long product without overflow.
class LogProduct {
 public:
  void multiply(double f) {
    prod_ *= f;
    if (prod_ > 1e150 || prod_ < 1e-150) {
      acc_ += std::log(prod_);
      prod_ = 1.0;
    }
  }
  double value() const { return acc_ + std::log(prod_); }

 private:
  double prod_ = 1.0;
  double acc_ = 0.0;
};

/// Beyond this |2w| the factored flip ratio cosh(2w) - tanh(t) sinh(2w)
/// cancels too badly and the exact log cosh difference is used instead.
inline constexpr double kFactoredLimit = 6.0;

}  // namespace detail

/// log psi = sum_i a_i x_i + sum_k log cosh(b_k + sum_i W_ki x_i).
/// Parameters are packed as [a (N), b (M), W (M x N, column-major)].
///
/// Flipping x_i multiplies cosh(t_k) by cosh(2W_ki) - x_i tanh(t_k) sinh(2W_ki),
/// so walkers cache tanh of the hidden angles.
class RbmAnsatz {
 public:
  RbmAnsatz(int n, int hidden) : n_(n), m_(hidden) { set_parameters(Eigen::VectorXd::Zero(n + hidden + n * hidden)); }

  int sites() const { return n_; }
  int hidden() const { return m_; }
  Eigen::Index num_parameters() const { return theta_.size(); }
  const Eigen::VectorXd& parameters() const { return theta_; }
  void set_parameters(const Eigen::VectorXd& theta) {
    if (theta_.size() != 0 && theta.size() != theta_.size())
      throw std::invalid_argument("parameter vector has the wrong length");
    theta_ = theta;
    const Eigen::MatrixXd w2 = 2.0 * weights();
    cosh2w_ = w2.array().cosh();
    sinh2w_ = w2.array().sinh();
    factored_ = w2.size() == 0 || w2.cwiseAbs().maxCoeff() <= detail::kFactoredLimit;
  }

  auto visible_bias() const { return theta_.segment(0, n_); }
  auto hidden_bias() const { return theta_.segment(n_, m_); }
  Eigen::Map<const Eigen::MatrixXd> weights() const { return {theta_.data() + n_ + m_, m_, n_}; }

  Eigen::VectorXd angles(const SpinConfig& x) const { return hidden_bias() + weights() * x.values(); }

  double log_amplitude(const SpinConfig& x) const {
    const Eigen::VectorXd t = angles(x);
    double v = visible_bias().dot(x.values());
    for (Eigen::Index k = 0; k < m_; ++k) v += log_cosh(t(k));
    return v;
  }

  /// Flip ratio from cached angles t and their tanh.
  double ratio_cached(const Eigen::VectorXd& t, const Eigen::VectorXd& th, const SpinConfig& x, Eigen::Index i) const {
    const double xi = x[i];
    double v = -2.0 * visible_bias()(i) * xi;
    if (factored_) {
      detail::LogProduct prod;
      for (Eigen::Index k = 0; k < m_; ++k) prod.multiply(cosh2w_(k, i) - xi * th(k) * sinh2w_(k, i));
      return v + prod.value();
    }
    const auto w = weights();
    for (Eigen::Index k = 0; k < m_; ++k) v += log_cosh(t(k) - 2.0 * w(k, i) * xi) - log_cosh(t(k));
    return v;
  }

  double log_amplitude_ratio(const SpinConfig& x, Eigen::Index i) const {
    const Eigen::VectorXd t = angles(x);
    return ratio_cached(t, t.array().tanh(), x, i);
  }

  Eigen::VectorXd gradient(const SpinConfig& x) const {
    Eigen::VectorXd g(theta_.size());
    const Eigen::VectorXd th = angles(x).array().tanh();
    g.segment(0, n_) = x.values();
    g.segment(n_, m_) = th;
    Eigen::Map<Eigen::MatrixXd>(g.data() + n_ + m_, m_, n_) = th * x.values().transpose();
    return g;
  }

  class Walker {
   public:
    Walker(const RbmAnsatz& a, SpinConfig x) : a_(&a), x_(std::move(x)), t_(a.angles(x_)), th_(t_.array().tanh()) {}
    const SpinConfig& config() const { return x_; }
    double log_ratio(Eigen::Index i) const { return a_->ratio_cached(t_, th_, x_, i); }
    void flip(Eigen::Index i) {
      t_ -= 2.0 * x_[i] * a_->weights().col(i);
      th_ = t_.array().tanh();
      x_.flip(i);
    }

   private:
    const RbmAnsatz* a_;
    SpinConfig x_;
    Eigen::VectorXd t_;
    Eigen::VectorXd th_;
  };

 private:
  int n_;
  int m_;
  Eigen::VectorXd theta_;
  Eigen::MatrixXd cosh2w_;
  Eigen::MatrixXd sinh2w_;
  bool factored_ = true;
};

/// RBM invariant under translation by two sites (one unit cell). Each of
/// the F filters w_f has one hidden unit per cell offset t, with weights
/// W_{(f,t),i} = w_f[(i - 2t) mod N]. Parameters are packed as
/// [a_even, a_odd, b (F), w (F x N, row-major)].
class SymmetricRbmAnsatz {
 public:
  SymmetricRbmAnsatz(int n, int filters) : n_(n), f_(filters) {
    if (n % 2 != 0) throw std::invalid_argument("translation by two sites needs an even site count");
    set_parameters(Eigen::VectorXd::Zero(2 + filters + filters * n));
  }

  int sites() const { return n_; }
  int filters() const { return f_; }
  int cells() const { return n_ / 2; }
  Eigen::Index num_parameters() const { return theta_.size(); }
  const Eigen::VectorXd& parameters() const { return theta_; }
  void set_parameters(const Eigen::VectorXd& theta) {
    if (theta_.size() != 0 && theta.size() != theta_.size())
      throw std::invalid_argument("parameter vector has the wrong length");
    theta_ = theta;
    const Eigen::ArrayXd w2 = 2.0 * theta_.tail(static_cast<Eigen::Index>(f_) * n_).array();
    cosh2w_ = w2.cosh();
    sinh2w_ = w2.sinh();
    factored_ = w2.size() == 0 || w2.abs().maxCoeff() <= detail::kFactoredLimit;
  }

  double visible_bias(Eigen::Index i) const { return theta_(i % 2); }
  double hidden_bias(int f) const { return theta_(2 + f); }
  double filter(int f, Eigen::Index d) const { return theta_(2 + f_ + f * n_ + d); }
  Eigen::Index wrap(Eigen::Index i) const { return ((i % n_) + n_) % n_; }

  /// Hidden angles, indexed f * cells + t.
  Eigen::VectorXd angles(const SpinConfig& x) const {
    Eigen::VectorXd t(f_ * cells());
    for (int f = 0; f < f_; ++f)
      for (int c = 0; c < cells(); ++c) {
        double v = hidden_bias(f);
        for (int i = 0; i < n_; ++i) v += filter(f, wrap(i - 2 * c)) * x[i];
        t(f * cells() + c) = v;
      }
    return t;
  }

  double log_amplitude(const SpinConfig& x) const {
    double v = 0.0;
    for (int i = 0; i < n_; ++i) v += visible_bias(i) * x[i];
    const Eigen::VectorXd t = angles(x);
    for (Eigen::Index k = 0; k < t.size(); ++k) v += log_cosh(t(k));
    return v;
  }

  double ratio_cached(const Eigen::VectorXd& t, const Eigen::VectorXd& th, const SpinConfig& x, Eigen::Index i) const {
    const double xi = x[i];
    double v = -2.0 * visible_bias(i) * xi;
    if (factored_) {
      detail::LogProduct prod;
      for (int f = 0; f < f_; ++f)
        for (int c = 0; c < cells(); ++c) {
          const Eigen::Index d = f * n_ + wrap(i - 2 * c);
          prod.multiply(cosh2w_(d) - xi * th(f * cells() + c) * sinh2w_(d));
        }
      return v + prod.value();
    }
    for (int f = 0; f < f_; ++f)
      for (int c = 0; c < cells(); ++c) {
        const double tk = t(f * cells() + c);
        v += log_cosh(tk - 2.0 * filter(f, wrap(i - 2 * c)) * xi) - log_cosh(tk);
      }
    return v;
  }

  double log_amplitude_ratio(const SpinConfig& x, Eigen::Index i) const {
    const Eigen::VectorXd t = angles(x);
    return ratio_cached(t, t.array().tanh(), x, i);
  }

  Eigen::VectorXd gradient(const SpinConfig& x) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(theta_.size());
    for (int i = 0; i < n_; ++i) g(i % 2) += x[i];
    const Eigen::VectorXd t = angles(x);
    for (int f = 0; f < f_; ++f)
      for (int c = 0; c < cells(); ++c) {
        const double th = std::tanh(t(f * cells() + c));
        g(2 + f) += th;
        for (int i = 0; i < n_; ++i) g(2 + f_ + f * n_ + wrap(i - 2 * c)) += th * x[i];
      }
    return g;
  }

  class Walker {
   public:
    Walker(const SymmetricRbmAnsatz& a, SpinConfig x)
        : a_(&a), x_(std::move(x)), t_(a.angles(x_)), th_(t_.array().tanh()) {}
    const SpinConfig& config() const { return x_; }
    double log_ratio(Eigen::Index i) const { return a_->ratio_cached(t_, th_, x_, i); }
    void flip(Eigen::Index i) {
      for (int f = 0; f < a_->filters(); ++f)
        for (int c = 0; c < a_->cells(); ++c) t_(f * a_->cells() + c) -= 2.0 * x_[i] * a_->filter(f, a_->wrap(i - 2 * c));
      th_ = t_.array().tanh();
      x_.flip(i);
    }

   private:
    const SymmetricRbmAnsatz* a_;
    SpinConfig x_;
    Eigen::VectorXd t_;
    Eigen::VectorXd th_;
  };

 private:
  int n_;
  int f_;
  Eigen::VectorXd theta_;
  Eigen::ArrayXd cosh2w_;
  Eigen::ArrayXd sinh2w_;
  bool factored_ = true;
};

/// One free log-amplitude per basis configuration (2^N parameters); meant
/// for injecting exactly known states at small N.
class LookupAnsatz {
 public:
  explicit LookupAnsatz(int n) : n_(n), theta_(Eigen::VectorXd::Zero(Eigen::Index{1} << n)) {
    if (n > 20) throw std::invalid_argument("lookup ansatz limited to 20 sites");
  }

  /// From positive amplitudes indexed like SpinConfig::index().
  static LookupAnsatz from_amplitudes(const Eigen::VectorXd& psi, int n) {
    LookupAnsatz a(n);
    if (psi.size() != a.theta_.size()) throw std::invalid_argument("amplitude vector has the wrong length");
    for (Eigen::Index k = 0; k < psi.size(); ++k) {
      if (!(psi(k) > 0.0)) throw std::invalid_argument("lookup amplitudes must be strictly positive");
      a.theta_(k) = std::log(psi(k));
    }
    return a;
  }

  int sites() const { return n_; }
  Eigen::Index num_parameters() const { return theta_.size(); }
  const Eigen::VectorXd& parameters() const { return theta_; }
  void set_parameters(const Eigen::VectorXd& theta) {
    if (theta.size() != theta_.size()) throw std::invalid_argument("parameter vector has the wrong length");
    theta_ = theta;
  }

  double log_amplitude(const SpinConfig& x) const { return theta_(static_cast<Eigen::Index>(x.index())); }
  double log_amplitude_ratio(const SpinConfig& x, Eigen::Index i) const {
    const std::size_t k = x.index();
    return theta_(static_cast<Eigen::Index>(k ^ (std::size_t{1} << i))) - theta_(static_cast<Eigen::Index>(k));
  }
  Eigen::VectorXd gradient(const SpinConfig& x) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(theta_.size());
    g(static_cast<Eigen::Index>(x.index())) = 1.0;
    return g;
  }

  class Walker {
   public:
    Walker(const LookupAnsatz& a, SpinConfig x) : a_(&a), x_(std::move(x)) {}
    const SpinConfig& config() const { return x_; }
    double log_ratio(Eigen::Index i) const { return a_->log_amplitude_ratio(x_, i); }
    void flip(Eigen::Index i) { x_.flip(i); }

   private:
    const LookupAnsatz* a_;
    SpinConfig x_;
  };

 private:
  int n_;
  Eigen::VectorXd theta_;
};

}  // namespace stagising
