#pragma once

// Locating and classifying the antiferromagnet/paramagnet transition along
// one-dimensional slices of the (wx, wz) plane, full phase diagrams and the
// finite-temperature summary.

#include "stagising/landau.hpp"
#include "stagising/parallel.hpp"
#include "stagising/univariate.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stagising {

enum class FieldAxis { omega_x, omega_z };

inline std::string to_string(FieldAxis a) { return a == FieldAxis::omega_x ? "omega_x" : "omega_z"; }

enum class TransitionOrder { none, first, second };

inline std::string to_string(TransitionOrder o) {
  switch (o) {
    case TransitionOrder::first: return "first";
    case TransitionOrder::second: return "second";
    default: return "none";
  }
}

/// A line through the phase diagram: `axis` varies over [from, to] in
/// `count` points, the other field is held at `fixed`. Absolute units.
struct SliceSpec {
  FieldAxis axis = FieldAxis::omega_x;
  double fixed = 0.0;
  double from = 0.0;
  double to = 1.0;
  int count = 41;
  double beta = kInf;
};

struct ClassifyOptions {
  /// |dm_s| above this (units of s) across the refined crossing is first order.
  double jump_threshold = 0.05;
  /// |m_s| above this (units of s) counts as ordered.
  double ordered_threshold = 1e-6;
  /// Bisection stops once the bracket is this narrow (units of s Gamma).
  double resolution = 1e-6;
  int max_bisections = 200;
};

struct TransitionRecord {
  SliceSpec slice;
  std::optional<double> critical_value;
  TransitionOrder order = TransitionOrder::none;
  /// |m_s(left) - m_s(right)| across the refined bracket, units of spin.
  double jump = 0.0;
  bool resolved = true;
};

/// Scans an order parameter m(x) on a grid and classifies the first change
/// between ordered and disordered samples. Any callable works, which lets
/// the classical analyzer and the VMC curves share the same rule.
inline TransitionRecord classify_order_parameter(const std::function<double(double)>& m_of, double from, double to,
                                                 int count, double s, double s_gamma,
                                                 const ClassifyOptions& opt = {}) {
  TransitionRecord rec;
  rec.slice.from = from;
  rec.slice.to = to;
  rec.slice.count = count;
  if (count < 2) return rec;
  auto ordered = [&](double m) { return std::abs(m) > opt.ordered_threshold * s; };
  auto at = [&](int k) { return from + (to - from) * static_cast<double>(k) / static_cast<double>(count - 1); };

  double x_prev = at(0);
  double m_prev = m_of(x_prev);
  for (int k = 1; k < count; ++k) {
    const double x = at(k);
    const double m = m_of(x);
    if (ordered(m) != ordered(m_prev)) {
      double lo = x_prev;
      double hi = x;
      double m_lo = m_prev;
      double m_hi = m;
      const bool lo_ordered = ordered(m_prev);
      int it = 0;
      for (; it < opt.max_bisections && std::abs(hi - lo) > opt.resolution * s_gamma; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double mm = m_of(mid);
        if (ordered(mm) == lo_ordered) {
          lo = mid;
          m_lo = mm;
        } else {
          hi = mid;
          m_hi = mm;
        }
      }
      rec.resolved = std::abs(hi - lo) <= opt.resolution * s_gamma;
      rec.critical_value = 0.5 * (lo + hi);
      rec.jump = std::abs(std::abs(m_lo) - std::abs(m_hi));
      rec.order = rec.jump > opt.jump_threshold * s ? TransitionOrder::first : TransitionOrder::second;
      return rec;
    }
    x_prev = x;
    m_prev = m;
  }
  return rec;
}

inline ModelParams at_slice_point(const ModelParams& base, const SliceSpec& slice, double x) {
  ModelParams p = base;
  p.beta = slice.beta;
  if (slice.axis == FieldAxis::omega_x) {
    p.omega_x = x;
    p.omega_z = slice.fixed;
  } else {
    p.omega_z = x;
    p.omega_x = slice.fixed;
  }
  return p;
}

/// First transition along a slice of the exact univariate solution.
inline TransitionRecord classify_transition(const SliceSpec& slice, const ModelParams& base,
                                            const ClassifyOptions& opt = {}) {
  auto m_of = [&](double x) { return minimize_univariate(at_slice_point(base, slice, x)).m_s; };
  TransitionRecord rec = classify_order_parameter(m_of, slice.from, slice.to, slice.count, base.s, base.s_gamma(), opt);
  rec.slice = slice;
  return rec;
}

struct PhaseDiagramPoint {
  double omega_x = 0.0;
  double omega_z = 0.0;
  double beta = kInf;
  VariationalPoint point;
  bool ordered() const { return point.m_s > 0.0; }
};

struct PhaseDiagramGrid {
  double wx_from = 0.0, wx_to = 1.0;
  int wx_count = 21;
  double wz_from = 0.0, wz_to = 1.0;
  int wz_count = 21;
};

struct PhaseDiagram {
  /// Row-major with omega_z as the slow index.
  std::vector<PhaseDiagramPoint> points;
  std::vector<CriticalLinePoint> second_order_line;
  std::optional<CriticalLinePoint> tricritical;
};

inline double grid_value(double from, double to, int count, int k) {
  return count < 2 ? from : from + (to - from) * static_cast<double>(k) / static_cast<double>(count - 1);
}

/// Minimizes on every grid point and overlays the Landau critical line
/// (second-order portion only) and the tricritical point.
inline PhaseDiagram phase_diagram(const PhaseDiagramGrid& grid, const ModelParams& base, unsigned jobs = 1,
                                  int line_points = 100) {
  base.validate();
  PhaseDiagram out;
  const auto total = static_cast<std::size_t>(grid.wx_count) * static_cast<std::size_t>(grid.wz_count);
  out.points = parallel_map(total, jobs, [&](std::size_t idx) {
    const int row = static_cast<int>(idx / static_cast<std::size_t>(grid.wx_count));
    const int col = static_cast<int>(idx % static_cast<std::size_t>(grid.wx_count));
    ModelParams p = base;
    p.omega_x = grid_value(grid.wx_from, grid.wx_to, grid.wx_count, col);
    p.omega_z = grid_value(grid.wz_from, grid.wz_to, grid.wz_count, row);
    PhaseDiagramPoint pt;
    pt.omega_x = p.omega_x;
    pt.omega_z = p.omega_z;
    pt.beta = p.beta;
    pt.point = minimize_univariate(p);
    return pt;
  });
  out.tricritical = landau_tricritical_point(base);
  const double wx_end = out.tricritical ? out.tricritical->omega_x : std::max(grid.wx_to, 0.0);
  for (int k = 0; k <= line_points; ++k) {
    const double wx = wx_end * static_cast<double>(k) / static_cast<double>(line_points);
    const auto cp = landau_critical_point(base, wx);
    if (cp && (cp->second_order() || k == line_points)) out.second_order_line.push_back(*cp);
  }
  return out;
}

/// Critical behaviour at one temperature.
struct ThermalSummary {
  double beta = kInf;
  std::vector<CriticalLinePoint> second_order_line;
  std::optional<CriticalLinePoint> tricritical;
  /// Classifier verdict on the probe slice (vertical, wz fixed).
  TransitionRecord probe;
  bool has_first_order = false;
  bool has_ordered_phase = false;
};

struct ThermalSummaryOptions {
  /// Probe slice: wx from 0 to wx_max at fixed wz, all in units of s Gamma.
  double probe_omega_z = 0.0;
  double probe_wx_max = 2.0;
  int probe_count = 41;
  int line_points = 40;
};

inline ThermalSummary finite_temperature_summary(double beta, const ModelParams& base,
                                                 const ThermalSummaryOptions& opt = {}) {
  ModelParams p = base;
  p.beta = beta;
  p.validate();
  const double sg = p.s_gamma();
  ThermalSummary out;
  out.beta = beta;

  SliceSpec slice;
  slice.axis = FieldAxis::omega_x;
  slice.fixed = opt.probe_omega_z * sg;
  slice.from = 0.0;
  slice.to = opt.probe_wx_max * sg;
  slice.count = opt.probe_count;
  slice.beta = beta;
  out.probe = classify_transition(slice, p);
  out.has_first_order = out.probe.order == TransitionOrder::first;
  out.has_ordered_phase = out.probe.order != TransitionOrder::none ||
                          minimize_univariate(at_slice_point(p, slice, slice.from)).m_s > 0.0;

  if (!out.has_ordered_phase) return out;
  out.tricritical = landau_tricritical_point(p);
  const double wx_end = out.tricritical ? out.tricritical->omega_x : opt.probe_wx_max * sg;
  for (int k = 0; k <= opt.line_points; ++k) {
    const double wx = wx_end * static_cast<double>(k) / static_cast<double>(opt.line_points);
    const auto cp = landau_critical_point(p, wx);
    if (!cp) break;
    if (cp->second_order() || k == opt.line_points) out.second_order_line.push_back(*cp);
  }
  return out;
}

inline std::vector<ThermalSummary> finite_temperature_summary(const std::vector<double>& betas,
                                                              const ModelParams& base,
                                                              const ThermalSummaryOptions& opt = {},
                                                              unsigned jobs = 1) {
  return parallel_map(betas.size(), jobs, [&](std::size_t i) { return finite_temperature_summary(betas[i], base, opt); });
}

}  // namespace stagising
