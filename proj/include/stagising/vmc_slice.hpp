#pragma once

// Trained-ansatz sweeps along one field axis and the jump analysis of the
// resulting <m_s^2> curves.

#include "stagising/ansatz.hpp"
#include "stagising/io.hpp"
#include "stagising/transition.hpp"
#include "stagising/vmc.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace stagising {

/// Trains the configured ansatz kind (best of cfg.restarts runs).
inline TrainResult train_ansatz(AnsatzKind kind, int hidden_density, const ModelParams& p, const TrainConfig& cfg) {
  switch (kind) {
    case AnsatzKind::rbm:
      return train_with_restarts<RbmAnsatz>([&] { return RbmAnsatz(p.n, hidden_density * p.n); }, p, cfg);
    case AnsatzKind::symmetric_rbm:
      return train_with_restarts<SymmetricRbmAnsatz>([&] { return SymmetricRbmAnsatz(p.n, hidden_density); }, p, cfg);
    default:
      return train_with_restarts<MeanFieldAnsatz>([&] { return MeanFieldAnsatz(p.n); }, p, cfg);
  }
}

struct VmcSlicePoint {
  double value = 0.0;
  TrainResult result;
};

struct VmcCurveAnalysis {
  /// Largest |<m_s^2>(x_{k+1}) - <m_s^2>(x_k)| and the step where it occurs.
  double max_step_ms2 = 0.0;
  int max_step_index = -1;
  /// Same for sqrt(<m_s^2>), the quantity the order threshold applies to.
  double max_step_root = 0.0;
  TransitionOrder order = TransitionOrder::none;
};

/// First order if sqrt(<m_s^2>) drops by more than jump_threshold * s in
/// one grid step; second order if the curve goes from ordered to
/// disordered without such a step; none otherwise.
inline VmcCurveAnalysis analyze_vmc_curve(const std::vector<double>& ms2, double s, double jump_threshold = 0.05,
                                          double ordered_fraction = 0.25) {
  VmcCurveAnalysis a;
  for (std::size_t k = 0; k + 1 < ms2.size(); ++k) {
    const double d = std::abs(ms2[k + 1] - ms2[k]);
    if (d > a.max_step_ms2) {
      a.max_step_ms2 = d;
      a.max_step_index = static_cast<int>(k);
    }
    a.max_step_root = std::max(a.max_step_root, std::abs(std::sqrt(std::max(ms2[k + 1], 0.0)) -
                                                         std::sqrt(std::max(ms2[k], 0.0))));
  }
  if (ms2.empty()) return a;
  const double lo = *std::min_element(ms2.begin(), ms2.end());
  const double hi = *std::max_element(ms2.begin(), ms2.end());
  const bool crosses = hi > ordered_fraction * s * s && lo < ordered_fraction * s * s;
  if (!crosses) return a;
  a.order = a.max_step_root > jump_threshold * s ? TransitionOrder::first : TransitionOrder::second;
  return a;
}

/// Trains at every point of the slice; each point gets its own seed.
inline std::vector<VmcSlicePoint> vmc_slice(const SliceSpec& slice, const ModelParams& base, AnsatzKind kind,
                                            int hidden_density, const TrainConfig& cfg,
                                            const std::function<void(const VmcSlicePoint&)>& on_point = {}) {
  std::vector<VmcSlicePoint> out;
  for (int k = 0; k < slice.count; ++k) {
    const double x = grid_value(slice.from, slice.to, slice.count, k);
    TrainConfig c = cfg;
    c.seed = stream_seed(cfg.seed, 0x511ceULL, static_cast<std::uint64_t>(k));
    VmcSlicePoint pt;
    pt.value = x;
    pt.result = train_ansatz(kind, hidden_density, at_slice_point(base, slice, x), c);
    if (on_point) on_point(pt);
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace stagising
