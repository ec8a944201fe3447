#pragma once

// Exact diagonalization in the S^x product basis, where the interaction and
// the longitudinal field are diagonal and the transverse field is the only
// off-diagonal term (all of it non-positive, so the ground state is
// positive). Also the two-big-spin Hamiltonian valid at alpha = 0.

#include "stagising/model.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace stagising {

inline constexpr std::size_t kMaxDimension = std::size_t{1} << 24;

enum class BasisTag { site_x, bigspin };

inline std::string to_string(BasisTag b) { return b == BasisTag::site_x ? "site_x" : "bigspin"; }

struct HamiltonianOptions {
  /// Keep the J_ii (S_i^x)^2 terms; for s = 1/2 they only shift energies.
  bool include_onsite = true;
  /// Probe fields entering as -sum_i h_i S_i^x; empty means none.
  std::vector<double> site_fields;
};

/// Off-diagonal amplitude between S^x levels m and m+1 of -wz S^z.
inline double transverse_element(double s, double m, double omega_z) {
  return -0.5 * omega_z * std::sqrt(std::max(0.0, s * (s + 1.0) - m * (m + 1.0)));
}

/// H = -wz sum S^z - wx sum S^x - sum_ij J_ij S^x_i S^x_j, applied on the fly.
class FullHamiltonian {
 public:
  explicit FullHamiltonian(const ModelParams& p, HamiltonianOptions opt = {}) : params_(p), opt_(std::move(opt)) {
    p.validate();
    levels_ = p.levels();
    dim_ = 1;
    for (int i = 0; i < p.n; ++i) {
      if (dim_ > kMaxDimension / static_cast<std::size_t>(levels_))
        throw std::invalid_argument("Hilbert space (2s+1)^N exceeds the 2^24 limit");
      dim_ *= static_cast<std::size_t>(levels_);
    }
    if (!opt_.site_fields.empty() && static_cast<int>(opt_.site_fields.size()) != p.n)
      throw std::invalid_argument("site_fields must have one entry per site");
    j_ = build_dense_J(p);
    for (int l = 0; l + 1 < levels_; ++l) hop_.push_back(transverse_element(p.s, l - p.s, p.omega_z));
    build_diagonal();
  }

  const ModelParams& params() const { return params_; }
  std::size_t dimension() const { return dim_; }
  int sites() const { return params_.n; }
  int levels() const { return levels_; }
  const Eigen::VectorXd& diagonal() const { return diag_; }
  const Eigen::MatrixXd& couplings() const { return j_; }

  /// Level index (0 .. 2s) of `site` in basis state `state`.
  int level(std::size_t state, int site) const {
    for (int i = 0; i < site; ++i) state /= static_cast<std::size_t>(levels_);
    return static_cast<int>(state % static_cast<std::size_t>(levels_));
  }

  /// S^x eigenvalue m of `site` in `state`.
  double sx(std::size_t state, int site) const { return level(state, site) - params_.s; }

  /// Sum of the on-site terms when they are a constant (s = 1/2).
  std::optional<double> onsite_constant() const {
    if (levels_ != 2) return std::nullopt;
    return opt_.include_onsite ? -0.25 * j_.diagonal().sum() : 0.0;
  }

  void apply(const double* x, double* y) const {
    const int n = params_.n;
    const auto L = static_cast<std::size_t>(levels_);
    for (std::size_t st = 0; st < dim_; ++st) {
      double acc = diag_(static_cast<Eigen::Index>(st)) * x[st];
      std::size_t rest = st;
      std::size_t stride = 1;
      for (int i = 0; i < n; ++i) {
        const auto l = static_cast<int>(rest % L);
        rest /= L;
        if (l + 1 < levels_) acc += hop_[static_cast<std::size_t>(l)] * x[st + stride];
        if (l > 0) acc += hop_[static_cast<std::size_t>(l - 1)] * x[st - stride];
        stride *= L;
      }
      y[st] = acc;
    }
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(x.size());
    apply(x.data(), y.data());
    return y;
  }

  Eigen::MatrixXd dense() const {
    const auto d = static_cast<Eigen::Index>(dim_);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    for (Eigen::Index c = 0; c < d; ++c) {
      e(c) = 1.0;
      h.col(c) = apply(e);
      e(c) = 0.0;
    }
    return h;
  }

  /// Gershgorin-style bound on the spectral norm.
  double norm_bound() const {
    return diag_.cwiseAbs().maxCoeff() + std::abs(params_.omega_z) * params_.n * (params_.s + 0.5);
  }

 private:
  void build_diagonal() {
    const int n = params_.n;
    diag_.resize(static_cast<Eigen::Index>(dim_));
    Eigen::MatrixXd jj = j_;
    if (!opt_.include_onsite) jj.diagonal().setZero();
    Eigen::VectorXd m(n);
    for (std::size_t st = 0; st < dim_; ++st) {
      std::size_t rest = st;
      for (int i = 0; i < n; ++i) {
        m(i) = static_cast<double>(rest % static_cast<std::size_t>(levels_)) - params_.s;
        rest /= static_cast<std::size_t>(levels_);
      }
      double e = -params_.omega_x * m.sum() - m.dot(jj * m);
      if (!opt_.site_fields.empty())
        for (int i = 0; i < n; ++i) e -= opt_.site_fields[static_cast<std::size_t>(i)] * m(i);
      diag_(static_cast<Eigen::Index>(st)) = e;
    }
  }

  ModelParams params_;
  HamiltonianOptions opt_;
  int levels_ = 2;
  std::size_t dim_ = 0;
  Eigen::MatrixXd j_;
  std::vector<double> hop_;
  Eigen::VectorXd diag_;
};

/// H = -wz (J_A^z + J_B^z) - wx (J_A^x + J_B^x) - (Gamma/N)(J_A^x - J_B^x)^2
/// on two spins of length sN/2, in the product basis |m_A, m_B> of J^x.
class BigSpinHamiltonian {
 public:
  explicit BigSpinHamiltonian(const ModelParams& p) : params_(p) {
    p.validate();
    if (p.alpha.is_nearest_neighbor() || p.alpha.value() != 0.0)
      throw std::invalid_argument("the big-spin form requires alpha = 0, got " + p.alpha.to_string());
    j_ = 0.5 * p.s * p.n;
    side_ = static_cast<int>(std::lround(2.0 * j_)) + 1;
    const Eigen::Index d = static_cast<Eigen::Index>(side_) * side_;
    h_ = Eigen::MatrixXd::Zero(d, d);
    for (int a = 0; a < side_; ++a) {
      for (int b = 0; b < side_; ++b) {
        const Eigen::Index st = index(a, b);
        const double ma = a - j_, mb = b - j_;
        h_(st, st) = -p.omega_x * (ma + mb) - p.gamma / p.n * (ma - mb) * (ma - mb);
        if (a + 1 < side_) {
          const double t = transverse_element(j_, ma, p.omega_z);
          h_(st, index(a + 1, b)) = t;
          h_(index(a + 1, b), st) = t;
        }
        if (b + 1 < side_) {
          const double t = transverse_element(j_, mb, p.omega_z);
          h_(st, index(a, b + 1)) = t;
          h_(index(a, b + 1), st) = t;
        }
      }
    }
  }

  const ModelParams& params() const { return params_; }
  std::size_t dimension() const { return static_cast<std::size_t>(h_.rows()); }
  double spin_length() const { return j_; }
  Eigen::Index index(int a, int b) const { return static_cast<Eigen::Index>(a) * side_ + b; }
  /// (m_A, m_B) of a basis state.
  std::pair<double, double> moments(Eigen::Index st) const {
    return {static_cast<double>(st / side_) - j_, static_cast<double>(st % side_) - j_};
  }

  void apply(const double* x, double* y) const {
    Eigen::Map<Eigen::VectorXd>(y, h_.rows()) = h_ * Eigen::Map<const Eigen::VectorXd>(x, h_.rows());
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return h_ * x; }
  const Eigen::MatrixXd& dense() const { return h_; }
  double norm_bound() const { return h_.cwiseAbs().rowwise().sum().maxCoeff(); }

 private:
  ModelParams params_;
  double j_ = 0.0;
  int side_ = 1;
  Eigen::MatrixXd h_;
};

struct EigenOptions {
  /// Dense diagonalization up to this dimension (a dense 4096 solve takes
  /// minutes, the iterative path about a second).
  std::size_t dense_limit = 1024;
  /// Block size of the iterative solver; 0 picks min(k, 8) but at least 2.
  int block = 0;
  int max_restarts = 300;
  /// Residual target relative to the norm bound of H.
  double tolerance = 1e-10;
  std::uint64_t seed = 20240601;
};

struct SpectrumResult {
  /// Ascending.
  Eigen::VectorXd eigenvalues;
  /// Unit-norm columns, signed so that their amplitudes sum to >= 0.
  Eigen::MatrixXd eigenvectors;
  BasisTag basis = BasisTag::site_x;
  ModelParams params;
  Eigen::VectorXd residuals;
  bool converged = true;
  int restarts = 0;
};

namespace detail {

/// Orthogonalizes the columns of `b` against `v` (twice) and among
/// themselves, dropping columns that become numerically dependent.
inline Eigen::MatrixXd orthonormal_extension(const Eigen::MatrixXd& v, Eigen::Index used, Eigen::MatrixXd b) {
  for (int pass = 0; pass < 2; ++pass)
    if (used > 0) b -= v.leftCols(used) * (v.leftCols(used).transpose() * b);
  std::vector<Eigen::VectorXd> kept;
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    Eigen::VectorXd x = b.col(c);
    const double before = x.norm();
    if (before == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : kept) x -= q.dot(x) * q;
      if (used > 0) x -= v.leftCols(used) * (v.leftCols(used).transpose() * x);
    }
    const double after = x.norm();
    if (after > 1e-10 * before) kept.push_back(x / after);
  }
  Eigen::MatrixXd out(b.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = kept[c];
  return out;
}

inline void fix_signs(Eigen::MatrixXd& vecs) {
  for (Eigen::Index c = 0; c < vecs.cols(); ++c)
    if (vecs.col(c).sum() < 0.0) vecs.col(c) *= -1.0;
}

}  // namespace detail

/// Lowest k eigenpairs. Dense below `dense_limit`; above it a restarted
/// block Lanczos with full reorthogonalization and explicit Rayleigh-Ritz
/// projection, which only needs H applied to vectors.
template <class Op>
SpectrumResult lowest_k(const Op& h, int k, BasisTag basis, const EigenOptions& opt = {}) {
  if (k < 1 || k > 32) throw std::invalid_argument("k must lie in [1, 32]");
  const auto dim = static_cast<Eigen::Index>(h.dimension());
  k = static_cast<int>(std::min<Eigen::Index>(k, dim));
  SpectrumResult out;
  out.basis = basis;
  out.params = h.params();
  const double tol = opt.tolerance * std::max(h.norm_bound(), 1e-300);

  auto finish = [&](const Eigen::VectorXd& vals, Eigen::MatrixXd vecs) {
    detail::fix_signs(vecs);
    out.eigenvalues = vals;
    out.eigenvectors = std::move(vecs);
    out.residuals.resize(k);
    for (int c = 0; c < k; ++c)
      out.residuals(c) = (h.apply(Eigen::VectorXd(out.eigenvectors.col(c))) - vals(c) * out.eigenvectors.col(c)).norm();
    out.converged = out.residuals.maxCoeff() <= tol;
    return out;
  };

  if (static_cast<std::size_t>(dim) <= opt.dense_limit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(h.dense()));
    return finish(es.eigenvalues().head(k), es.eigenvectors().leftCols(k));
  }

  const int bs = opt.block > 0 ? opt.block : std::max(2, std::min(k, 8));
  const Eigen::Index keep = std::min<Eigen::Index>(dim, k + bs);
  const Eigen::Index cap = std::min<Eigen::Index>(dim, keep + std::max(40, 6 * bs));
  Eigen::MatrixXd v(dim, cap), hv(dim, cap);
  Eigen::Index used = 0;

  auto append = [&](const Eigen::MatrixXd& block) {
    const Eigen::MatrixXd q = detail::orthonormal_extension(v, used, block);
    for (Eigen::Index c = 0; c < q.cols() && used < cap; ++c, ++used) {
      v.col(used) = q.col(c);
      hv.col(used) = h.apply(Eigen::VectorXd(q.col(c)));
    }
    return q.cols();
  };

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd start(dim, bs);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (int c = 0; c < bs; ++c) start(r, c) = normal(rng);
  Eigen::Index block_start = 0;
  append(start);

  Eigen::VectorXd theta;
  Eigen::MatrixXd x, hx;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    out.restarts = restart;
    Eigen::Index last = block_start;
    while (used < cap) {
      const Eigen::Index from = last;
      const Eigen::Index count = used - last;
      last = used;
      if (append(hv.middleCols(from, count)) == 0) break;
    }
    const Eigen::MatrixXd t = v.leftCols(used).transpose() * hv.leftCols(used);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (t + t.transpose()));
    const Eigen::Index nk = std::min(keep, used);
    theta = es.eigenvalues().head(nk);
    x = v.leftCols(used) * es.eigenvectors().leftCols(nk);
    hx = hv.leftCols(used) * es.eigenvectors().leftCols(nk);
    const Eigen::MatrixXd r = hx - x * theta.asDiagonal();
    double worst = 0.0;
    for (int c = 0; c < k; ++c) worst = std::max(worst, r.col(c).norm());
    if (worst <= tol || used == dim) break;
    v.leftCols(nk) = x;
    hv.leftCols(nk) = hx;
    used = nk;
    // The residuals of all kept Ritz pairs span (up to rounding) a space of
    // dimension bs, the next block of the Krylov sequence.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeThinU);
    const Eigen::Index rank = std::min<Eigen::Index>(bs, svd.singularValues().size());
    block_start = used;
    append(svd.matrixU().leftCols(rank) * svd.singularValues().head(rank).asDiagonal());
  }
  return finish(theta.head(k), x.leftCols(k));
}

inline SpectrumResult lowest_k(const FullHamiltonian& h, int k, const EigenOptions& opt = {}) {
  return lowest_k(h, k, BasisTag::site_x, opt);
}

inline SpectrumResult lowest_k(const BigSpinHamiltonian& h, int k, const EigenOptions& opt = {}) {
  return lowest_k(h, k, BasisTag::bigspin, opt);
}

struct Observables {
  /// <sum_i (-1)^i S^x_i> / N.
  double m_s = 0.0;
  /// <(sum_i (-1)^i S^x_i / N)^2>.
  double m_s2 = 0.0;
  double energy_per_site = 0.0;
  Eigen::VectorXd sx;
  /// <S^x_i S^x_j>.
  Eigen::MatrixXd sxsx;
};

/// Diagonal observables of a normalized state of the full Hamiltonian.
inline Observables observables(const Eigen::VectorXd& psi, const FullHamiltonian& h) {
  const int n = h.sites();
  Observables o;
  o.sx = Eigen::VectorXd::Zero(n);
  o.sxsx = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd m(n);
  for (std::size_t st = 0; st < h.dimension(); ++st) {
    const double w = psi(static_cast<Eigen::Index>(st)) * psi(static_cast<Eigen::Index>(st));
    if (w == 0.0) continue;
    double stag = 0.0;
    for (int i = 0; i < n; ++i) {
      m(i) = h.sx(st, i);
      stag += (i % 2 == 0 ? 1.0 : -1.0) * m(i);
    }
    stag /= n;
    o.m_s += w * stag;
    o.m_s2 += w * stag * stag;
    o.sx += w * m;
    o.sxsx += w * m * m.transpose();
  }
  o.energy_per_site = psi.dot(h.apply(psi)) / n;
  return o;
}

/// Observables averaged over the eigenvectors whose energy lies within
/// `tolerance` of the lowest one (the ground multiplet).
inline Observables ground_observables(const SpectrumResult& spec, const FullHamiltonian& h,
                                      double tolerance = 1e-10) {
  int count = 0;
  Observables avg;
  for (Eigen::Index c = 0; c < spec.eigenvalues.size(); ++c) {
    if (spec.eigenvalues(c) - spec.eigenvalues(0) > tolerance) break;
    const auto o = observables(spec.eigenvectors.col(c), h);
    if (count == 0) {
      avg = o;
    } else {
      avg.m_s += o.m_s;
      avg.m_s2 += o.m_s2;
      avg.energy_per_site += o.energy_per_site;
      avg.sx += o.sx;
      avg.sxsx += o.sxsx;
    }
    ++count;
  }
  avg.m_s /= count;
  avg.m_s2 /= count;
  avg.energy_per_site /= count;
  avg.sx /= count;
  avg.sxsx /= count;
  return avg;
}

inline double ground_energy(const ModelParams& p, const HamiltonianOptions& opt = {}, const EigenOptions& eig = {}) {
  return lowest_k(FullHamiltonian(p, opt), 1, eig).eigenvalues(0);
}

/// chi_ij = -d^2 E_0 / dh_i dh_j from central differences of the ground
/// energy with probe fields -h_i S^x_i; `step` in absolute energy units.
inline Eigen::MatrixXd finite_field_chi(const ModelParams& p, double step, const EigenOptions& eig = {}) {
  const int n = p.n;
  auto energy = [&](int i, double hi, int j, double hj) {
    HamiltonianOptions opt;
    opt.site_fields.assign(static_cast<std::size_t>(n), 0.0);
    if (i >= 0) opt.site_fields[static_cast<std::size_t>(i)] += hi;
    if (j >= 0) opt.site_fields[static_cast<std::size_t>(j)] += hj;
    return ground_energy(p, opt, eig);
  };
  const double e0 = energy(-1, 0.0, -1, 0.0);
  Eigen::MatrixXd chi(n, n);
  for (int i = 0; i < n; ++i) {
    chi(i, i) = -(energy(i, step, -1, 0.0) - 2.0 * e0 + energy(i, -step, -1, 0.0)) / (step * step);
    for (int j = i + 1; j < n; ++j) {
      const double pp = energy(i, step, j, step), pm = energy(i, step, j, -step);
      const double mp = energy(i, -step, j, step), mm = energy(i, -step, j, -step);
      chi(i, j) = chi(j, i) = -(pp - pm - mp + mm) / (4.0 * step * step);
    }
  }
  return chi;
}

}  // namespace stagising
