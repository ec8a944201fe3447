#pragma once

// Variational Monte Carlo for s = 1/2 in the S^x product basis: Metropolis
// sampling of |psi|^2, local energies, stochastic reconfiguration and the
// warm-up/decay learning-rate schedule.

#include "stagising/ansatz.hpp"
#include "stagising/model.hpp"
#include "stagising/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace stagising {

struct TrainConfig {
  double lr0 = 0.1;
  double lr_max = 6.0;
  int n_warm = 150;
  double gamma_decay = 0.999;
  double diag_shift = 1e-4;
  int n_iters = 500;
  int n_chains = 8;
  int n_sweeps_per_sample = 1;
  /// Samples per chain and iteration.
  int n_samples = 256;
  /// Samples per chain for the final estimates after training.
  int n_eval_samples = 1024;
  /// Standard deviation of the random initial parameters.
  double init_scale = 0.01;
  int restarts = 5;
  std::uint64_t seed = 1;
  unsigned jobs = 1;

  void validate() const {
    if (!(lr0 > 0.0) || !(lr_max > 0.0)) throw std::invalid_argument("learning rates must be positive");
    if (n_warm < 0 || n_iters < 0) throw std::invalid_argument("iteration counts must be non-negative");
    if (!(gamma_decay > 0.0 && gamma_decay <= 1.0)) throw std::invalid_argument("gamma_decay must lie in (0, 1]");
    if (!(diag_shift >= 0.0)) throw std::invalid_argument("diag_shift must be non-negative");
    if (n_chains < 1 || n_samples < 1 || n_eval_samples < 1 || n_sweeps_per_sample < 1)
      throw std::invalid_argument("chain and sample counts must be positive");
    if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  }
};

/// Linear warm-up from lr0 to lr_max over n_warm iterations, then
/// lr_max * gamma_decay^(t - n_warm).
inline double learning_rate(const TrainConfig& c, int t) {
  if (t < c.n_warm) return c.lr0 + (c.lr_max - c.lr0) * static_cast<double>(t) / static_cast<double>(c.n_warm);
  return c.lr_max * std::pow(c.gamma_decay, t - c.n_warm);
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  return splitmix64(splitmix64(splitmix64(master ^ splitmix64(a)) ^ b) ^ c);
}

/// E_loc(x) = E_diag(x) - (wz/2) sum_i psi(x with i flipped)/psi(x), where
/// E_diag(x) = -(wx/2) sum_i x_i - (1/4) x^T J x.
class LocalEnergy {
 public:
  /// Exponents above this are clamped (and counted) before exponentiation.
  static constexpr double kMaxLogRatio = 700.0;

  explicit LocalEnergy(const ModelParams& p) : params_(p), j_(build_dense_J(p)) {
    if (p.s != 0.5) throw std::invalid_argument("variational Monte Carlo supports s = 1/2 only");
  }

  const ModelParams& params() const { return params_; }
  const Eigen::MatrixXd& couplings() const { return j_; }

  double diagonal(const SpinConfig& x) const { return diagonal(x, j_ * x.values()); }

  /// With the cached local field J x.
  double diagonal(const SpinConfig& x, const Eigen::VectorXd& field) const {
    return -0.5 * params_.omega_x * x.values().sum() - 0.25 * x.values().dot(field);
  }

  template <class Walker>
  double off_diagonal(const Walker& w, std::size_t& clamped) const {
    if (params_.omega_z == 0.0) return 0.0;
    double sum = 0.0;
    const int n = w.config().size();
    for (int i = 0; i < n; ++i) {
      double r = w.log_ratio(i);
      if (r > kMaxLogRatio) {
        r = kMaxLogRatio;
        ++clamped;
      }
      sum += std::exp(r);
    }
    return -0.5 * params_.omega_z * sum;
  }

  template <Ansatz A>
  double operator()(const SpinConfig& x, const A& ansatz) const {
    std::size_t clamped = 0;
    typename A::Walker w(ansatz, x);
    return diagonal(x) + off_diagonal(w, clamped);
  }

 private:
  ModelParams params_;
  Eigen::MatrixXd j_;
};

/// Samples from one or more Markov chains, pooled in chain order.
struct SampleBatch {
  /// Rows are log-derivative vectors O(x); empty when not requested.
  Eigen::MatrixXd o;
  /// Local energy per site.
  Eigen::VectorXd e_loc;
  /// (sum_i (-1)^i x_i / 2N)^2 per sample.
  Eigen::VectorXd ms2;
  std::vector<std::size_t> config_index;
  double acceptance = 0.0;
  std::size_t clamped = 0;
};

struct ChainOptions {
  int n_samples = 256;
  int n_sweeps_per_sample = 1;
  bool gradients = true;
  /// Record SpinConfig::index() of every sample (small N only).
  bool record_configs = false;
};

/// Single-spin-flip Metropolis chain with acceptance min(1, |psi'/psi|^2).
/// One sweep is N proposals; the first 10% of the sweeps are discarded.
template <Ansatz A>
SampleBatch metropolis_chain(const A& ansatz, const LocalEnergy& h, SpinConfig& start, const ChainOptions& opt,
                             std::uint64_t seed) {
  const int n = ansatz.sites();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> site(0, n - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  typename A::Walker w(ansatz, start);
  Eigen::VectorXd field = h.couplings() * start.values();

  const long total_sweeps = static_cast<long>(opt.n_samples) * opt.n_sweeps_per_sample;
  const long burn = (total_sweeps + 9) / 10;
  SampleBatch b;
  b.e_loc.resize(opt.n_samples);
  b.ms2.resize(opt.n_samples);
  if (opt.gradients) b.o.resize(opt.n_samples, ansatz.num_parameters());
  long accepted = 0;
  long proposed = 0;
  int taken = 0;
  for (long sweep = 0; sweep < burn + total_sweeps; ++sweep) {
    for (int step = 0; step < n; ++step) {
      const int i = site(rng);
      const double r = w.log_ratio(i);
      ++proposed;
      if (r >= 0.0 || unif(rng) < std::exp(2.0 * r)) {
        field -= 2.0 * w.config()[i] * h.couplings().col(i);
        w.flip(i);
        ++accepted;
      }
    }
    if (sweep >= burn && (sweep - burn + 1) % opt.n_sweeps_per_sample == 0) {
      const SpinConfig& x = w.config();
      b.e_loc(taken) = (h.diagonal(x, field) + h.off_diagonal(w, b.clamped)) / n;
      const double m = x.staggered();
      b.ms2(taken) = m * m;
      if (opt.gradients) b.o.row(taken) = ansatz.gradient(x).transpose();
      if (opt.record_configs) b.config_index.push_back(x.index());
      ++taken;
    }
  }
  b.acceptance = proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  start = w.config();
  return b;
}

inline SampleBatch pool(const std::vector<SampleBatch>& parts) {
  SampleBatch out;
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.e_loc.size();
  out.e_loc.resize(rows);
  out.ms2.resize(rows);
  const Eigen::Index cols = parts.empty() ? 0 : parts.front().o.cols();
  if (!parts.empty() && parts.front().o.rows() > 0) out.o.resize(rows, cols);
  Eigen::Index at = 0;
  double acc = 0.0;
  for (const auto& p : parts) {
    const Eigen::Index k = p.e_loc.size();
    out.e_loc.segment(at, k) = p.e_loc;
    out.ms2.segment(at, k) = p.ms2;
    if (out.o.rows() > 0) out.o.middleRows(at, k) = p.o;
    out.config_index.insert(out.config_index.end(), p.config_index.begin(), p.config_index.end());
    out.clamped += p.clamped;
    acc += p.acceptance;
    at += k;
  }
  out.acceptance = parts.empty() ? 0.0 : acc / static_cast<double>(parts.size());
  return out;
}

/// Runs every chain from its stored start (updated in place) and pools.
template <Ansatz A>
SampleBatch sample_chains(const A& ansatz, const LocalEnergy& h, std::vector<SpinConfig>& starts,
                          const ChainOptions& opt, std::uint64_t seed, std::uint64_t iteration, unsigned jobs = 1) {
  auto parts = parallel_map(starts.size(), jobs, [&](std::size_t c) {
    return metropolis_chain(ansatz, h, starts[c], opt, stream_seed(seed, iteration, c, 0x5a4dULL));
  });
  return pool(parts);
}

/// Mean and binned standard error (bins of consecutive samples).
struct Estimate {
  double mean = 0.0;
  double error = 0.0;
};

inline Estimate binned_estimate(const Eigen::VectorXd& v, int bins = 16) {
  Estimate e;
  if (v.size() == 0) return e;
  e.mean = v.mean();
  const Eigen::Index per = v.size() / bins;
  if (per < 1) return e;
  Eigen::VectorXd means(bins);
  for (int k = 0; k < bins; ++k) means(k) = v.segment(k * per, per).mean();
  const double var = (means.array() - means.mean()).square().sum() / (bins - 1);
  e.error = std::sqrt(var / bins);
  return e;
}

struct SrResult {
  Eigen::VectorXd delta;
  bool applied = false;
  std::string diagnostic;
};

/// Natural-gradient direction S^{-1} f with S = cov(O, O) + shift I and
/// f = -cov(O, E_loc). Non-finite input skips the step.
inline SrResult sr_direction(const Eigen::MatrixXd& o, const Eigen::VectorXd& e_loc, double diag_shift) {
  SrResult r;
  const double n = static_cast<double>(o.rows());
  if (o.rows() < 2) {
    r.diagnostic = "fewer than two samples";
    return r;
  }
  const Eigen::RowVectorXd mean = o.colwise().mean();
  const Eigen::MatrixXd oc = o.rowwise() - mean;
  const Eigen::VectorXd ec = e_loc.array() - e_loc.mean();
  Eigen::MatrixXd s = (oc.transpose() * oc) / n;
  const Eigen::VectorXd f = -(oc.transpose() * ec) / n;
  if (!s.allFinite() || !f.allFinite()) {
    r.diagnostic = "non-finite covariance";
    return r;
  }
  s.diagonal().array() += diag_shift;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    r.diagnostic = "covariance not positive definite";
    return r;
  }
  r.delta = llt.solve(f);
  if (!r.delta.allFinite()) {
    r.diagnostic = "non-finite update";
    return r;
  }
  r.applied = true;
  return r;
}

template <Ansatz A>
SrResult sr_step(A& ansatz, const SampleBatch& batch, double lr, double diag_shift) {
  SrResult r = sr_direction(batch.o, batch.e_loc, diag_shift);
  if (r.applied) ansatz.set_parameters(ansatz.parameters() + lr * r.delta);
  return r;
}

struct TraceRow {
  int iter = 0;
  double lr = 0.0;
  double energy_mean = 0.0;
  double energy_err = 0.0;
  double ms2_mean = 0.0;
  double ms2_err = 0.0;
  double acceptance = 0.0;
};

struct TrainResult {
  std::vector<TraceRow> trace;
  /// Final estimates from a fresh evaluation run; energy per site.
  Estimate energy;
  Estimate ms2;
  double acceptance = 0.0;
  bool converged = false;
  int skipped_steps = 0;
  std::vector<std::string> diagnostics;
  std::size_t clamped = 0;
  Eigen::VectorXd parameters;
  /// Over restarts: max - min of the final energies.
  double restart_spread = 0.0;
  int restart_index = 0;
};

/// Plateau test: a straight-line fit to the last fifth of the trace may not
/// drift by more than twice the typical statistical error over that window.
inline bool trace_plateaued(const std::vector<TraceRow>& trace) {
  const std::size_t n = trace.size();
  const std::size_t w = std::max<std::size_t>(10, n / 5);
  if (n < w) return false;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, err = 0;
  for (std::size_t k = n - w; k < n; ++k) {
    const double x = static_cast<double>(k);
    sx += x;
    sy += trace[k].energy_mean;
    sxx += x * x;
    sxy += x * trace[k].energy_mean;
    err += trace[k].energy_err;
  }
  const double m = static_cast<double>(w);
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return std::abs(slope) * m <= 2.0 * err / m;
}

template <Ansatz A>
void randomize_parameters(A& ansatz, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd theta(ansatz.num_parameters());
  for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = normal(rng);
  ansatz.set_parameters(theta);
}

template <Ansatz A>
TrainResult evaluate(const A& ansatz, const LocalEnergy& h, std::vector<SpinConfig>& starts, const TrainConfig& cfg,
                     std::uint64_t seed) {
  ChainOptions opt;
  opt.n_samples = cfg.n_eval_samples;
  opt.n_sweeps_per_sample = cfg.n_sweeps_per_sample;
  opt.gradients = false;
  const SampleBatch b = sample_chains(ansatz, h, starts, opt, seed, std::numeric_limits<std::uint64_t>::max(), cfg.jobs);
  TrainResult r;
  r.energy = binned_estimate(b.e_loc);
  r.ms2 = binned_estimate(b.ms2);
  r.acceptance = b.acceptance;
  r.clamped = b.clamped;
  return r;
}

/// Trains `ansatz` in place with the configured schedule, then evaluates.
template <Ansatz A>
TrainResult train(A& ansatz, const ModelParams& p, const TrainConfig& cfg) {
  cfg.validate();
  p.validate();
  const LocalEnergy h(p);
  std::vector<SpinConfig> starts;
  std::mt19937_64 init(stream_seed(cfg.seed, 0x1417ULL));
  for (int c = 0; c < cfg.n_chains; ++c) starts.push_back(SpinConfig::random(ansatz.sites(), init));

  ChainOptions opt;
  opt.n_samples = cfg.n_samples;
  opt.n_sweeps_per_sample = cfg.n_sweeps_per_sample;
  TrainResult out;
  for (int t = 0; t < cfg.n_iters; ++t) {
    const SampleBatch b = sample_chains(ansatz, h, starts, opt, cfg.seed, static_cast<std::uint64_t>(t), cfg.jobs);
    TraceRow row;
    row.iter = t;
    row.lr = learning_rate(cfg, t);
    const auto e = binned_estimate(b.e_loc);
    const auto m = binned_estimate(b.ms2);
    row.energy_mean = e.mean;
    row.energy_err = e.error;
    row.ms2_mean = m.mean;
    row.ms2_err = m.error;
    row.acceptance = b.acceptance;
    out.trace.push_back(row);
    out.clamped += b.clamped;
    const auto sr = sr_step(ansatz, b, row.lr, cfg.diag_shift);
    if (!sr.applied) {
      ++out.skipped_steps;
      out.diagnostics.push_back("iteration " + std::to_string(t) + ": " + sr.diagnostic);
    }
  }
  TrainResult final = evaluate(ansatz, h, starts, cfg, cfg.seed);
  final.trace = std::move(out.trace);
  final.skipped_steps = out.skipped_steps;
  final.diagnostics = std::move(out.diagnostics);
  final.clamped += out.clamped;
  final.converged = trace_plateaued(final.trace);
  final.parameters = ansatz.parameters();
  return final;
}

/// Independent restarts from different random initializations; the one with
/// the lowest final energy is returned together with the restart spread.
template <Ansatz A>
TrainResult train_with_restarts(const std::function<A()>& make, const ModelParams& p, const TrainConfig& cfg,
                                A* best_ansatz = nullptr) {
  TrainResult best;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int r = 0; r < cfg.restarts; ++r) {
    TrainConfig c = cfg;
    c.seed = stream_seed(cfg.seed, 0x7e57ULL, static_cast<std::uint64_t>(r));
    A ansatz = make();
    randomize_parameters(ansatz, cfg.init_scale, stream_seed(c.seed, 0x1a17ULL));
    TrainResult res = train(ansatz, p, c);
    lo = std::min(lo, res.energy.mean);
    hi = std::max(hi, res.energy.mean);
    if (r == 0 || res.energy.mean < best.energy.mean) {
      best = std::move(res);
      best.restart_index = r;
      if (best_ansatz) *best_ansatz = ansatz;
    }
  }
  best.restart_spread = hi - lo;
  return best;
}

}  // namespace stagising
