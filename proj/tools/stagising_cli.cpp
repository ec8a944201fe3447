// Command-line driver: sweeps over the solvers with CSV/JSON output.

#include "stagising/classical.hpp"
#include "stagising/exact_diag.hpp"
#include "stagising/io.hpp"
#include "stagising/landau.hpp"
#include "stagising/multivariate.hpp"
#include "stagising/susceptibility.hpp"
#include "stagising/transition.hpp"
#include "stagising/univariate.hpp"
#include "stagising/vmc_slice.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace stagising;

namespace {

struct Common {
  std::string config_path;
  std::string out;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  int verbose = 0;
  std::optional<int> n;
  std::optional<double> s, gamma, omega_x, omega_z;
  std::optional<std::string> alpha, b, beta, units;
};

struct Run {
  Config config;
  ModelParams params;
  fs::path out;
  unsigned jobs = 1;
  int verbose = 0;
  double scale = 1.0;
};

double parse_inf(const std::string& text, const std::string& key) {
  YAML::Node node(text);
  return detail::parse_number_or_inf(node, key);
}

Run resolve(const Common& c) {
  Config cfg = c.config_path.empty() ? Config{} : load_config(c.config_path);
  if (c.units) {
    if (*c.units == "sGamma")
      cfg.units = Units::s_gamma;
    else if (*c.units == "absolute")
      cfg.units = Units::absolute;
    else
      throw ConfigError("--units must be sGamma or absolute");
  }
  if (c.n) cfg.n = *c.n;
  if (c.s) cfg.s = *c.s;
  if (c.gamma) cfg.gamma = *c.gamma;
  if (c.omega_x) cfg.omega_x = *c.omega_x;
  if (c.omega_z) cfg.omega_z = *c.omega_z;
  if (c.alpha) {
    const double a = parse_inf(*c.alpha, "alpha");
    cfg.alpha = std::isinf(a) ? RangeExponent::nearest_neighbor() : RangeExponent(a);
  }
  if (c.b) {
    if (*c.b == "auto")
      cfg.b.reset();
    else
      cfg.b = parse_inf(*c.b, "b");
  }
  if (c.beta) cfg.beta = parse_inf(*c.beta, "beta");
  if (c.seed) cfg.vmc.train.seed = *c.seed;
  Run r;
  r.config = cfg;
  try {
    r.params = cfg.model();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!c.out.empty())
    r.out = c.out;
  else if (const char* env = std::getenv("STAGISING_OUT"); env && *env)
    r.out = env;
  else
    r.out = ".";
  r.jobs = std::max(1u, c.jobs);
  r.config.vmc.train.jobs = r.jobs;
  r.verbose = c.verbose;
  r.scale = cfg.field_scale();
  return r;
}

/// Per-point failures collected during a sweep.
class ErrorLog {
 public:
  explicit ErrorLog(std::size_t count) : messages_(count) {}
  void record(std::size_t i, const std::string& where, const std::string& what) { messages_[i] = where + ": " + what; }
  bool any() const {
    for (const auto& m : messages_)
      if (!m.empty()) return true;
    return false;
  }
  /// Writes errors.log and returns the exit status.
  int finish(const fs::path& out) const {
    if (!any()) return 0;
    std::string text;
    for (const auto& m : messages_)
      if (!m.empty()) text += m + "\n";
    write_atomic(out / "errors.log", text);
    std::cerr << text;
    return 2;
  }

 private:
  std::vector<std::string> messages_;
};

template <class Fn>
auto sweep(std::size_t count, unsigned jobs, ErrorLog& log, const std::function<std::string(std::size_t)>& where,
           Fn&& fn) {
  using R = decltype(fn(std::size_t{}));
  return parallel_map(count, jobs, [&](std::size_t i) -> std::optional<R> {
    try {
      return fn(i);
    } catch (const std::exception& e) {
      log.record(i, where(i), e.what());
      return std::nullopt;
    }
  });
}

std::string fmt(double v) { return format_double(v); }

Json params_json(const Run& r) {
  Json j = to_json(r.params);
  j["units"] = to_string(r.config.units);
  j["field_scale"] = r.scale;
  return j;
}

Json record_json(const TransitionRecord& rec, double scale) {
  Json j;
  j["axis"] = to_string(rec.slice.axis);
  j["order"] = to_string(rec.order);
  j["critical_value"] = rec.critical_value ? Json(*rec.critical_value / scale) : Json(nullptr);
  j["jump"] = rec.jump;
  j["resolved"] = rec.resolved;
  return j;
}

Json line_point_json(const std::optional<CriticalLinePoint>& cp, double scale) {
  if (!cp) return nullptr;
  Json j;
  j["omega_x"] = cp->omega_x / scale;
  j["omega_z"] = cp->omega_z / scale;
  j["c4"] = cp->c4;
  return j;
}

// ---------------------------------------------------------------- phase-diagram

struct GridArgs {
  double wx_from = 0.0, wx_to = 2.0;
  int wx_count = 41;
  double wz_from = 0.0, wz_to = 2.5;
  int wz_count = 51;
  int line_points = 100;
};

int run_phase_diagram(const Run& r, const GridArgs& g) {
  if (g.wx_count < 1 || g.wz_count < 1) throw ConfigError("grid counts must be at least 1");
  const auto total = static_cast<std::size_t>(g.wx_count) * static_cast<std::size_t>(g.wz_count);
  auto wx_at = [&](int k) { return grid_value(g.wx_from, g.wx_to, g.wx_count, k) * r.scale; };
  auto wz_at = [&](int k) { return grid_value(g.wz_from, g.wz_to, g.wz_count, k) * r.scale; };
  ErrorLog log(total + static_cast<std::size_t>(g.wz_count));
  auto where = [&](std::size_t i) {
    const int row = static_cast<int>(i / static_cast<std::size_t>(g.wx_count));
    const int col = static_cast<int>(i % static_cast<std::size_t>(g.wx_count));
    return "omega_x=" + fmt(wx_at(col) / r.scale) + " omega_z=" + fmt(wz_at(row) / r.scale);
  };
  const auto points = sweep(total, r.jobs, log, where, [&](std::size_t i) {
    ModelParams p = r.params;
    p.omega_x = wx_at(static_cast<int>(i % static_cast<std::size_t>(g.wx_count)));
    p.omega_z = wz_at(static_cast<int>(i / static_cast<std::size_t>(g.wx_count)));
    return minimize_univariate(p);
  });
  // Each row is one slice in omega_x; its transition order labels the row.
  ErrorLog row_log(static_cast<std::size_t>(g.wz_count));
  const auto rows = sweep(
      static_cast<std::size_t>(g.wz_count), r.jobs, row_log,
      [&](std::size_t i) { return "row omega_z=" + fmt(wz_at(static_cast<int>(i)) / r.scale); },
      [&](std::size_t i) {
        SliceSpec slice;
        slice.axis = FieldAxis::omega_x;
        slice.fixed = wz_at(static_cast<int>(i));
        slice.from = g.wx_from * r.scale;
        slice.to = g.wx_to * r.scale;
        slice.count = g.wx_count;
        slice.beta = r.params.beta;
        return classify_transition(slice, r.params);
      });

  CsvTable csv({"omega_x", "omega_z", "beta", "u_bar", "m_s", "energy", "order"});
  const double beta_out = r.params.zero_temperature() ? kInf : r.params.beta * r.scale;
  for (std::size_t i = 0; i < total; ++i) {
    const int row = static_cast<int>(i / static_cast<std::size_t>(g.wx_count));
    const int col = static_cast<int>(i % static_cast<std::size_t>(g.wx_count));
    if (!points[i]) continue;
    const auto& vp = *points[i];
    const std::string order = rows[static_cast<std::size_t>(row)] ? to_string(rows[static_cast<std::size_t>(row)]->order) : "error";
    csv.row({wx_at(col) / r.scale, wz_at(row) / r.scale, beta_out, vp.u_bar / r.scale, vp.m_s, vp.energy / r.scale,
             order});
    if (r.verbose >= 1)
      std::cout << "omega_x=" << fmt(wx_at(col) / r.scale) << " omega_z=" << fmt(wz_at(row) / r.scale)
                << " m_s=" << fmt(vp.m_s) << " energy=" << fmt(vp.energy / r.scale) << '\n';
  }
  csv.save(r.out / "phase_diagram.csv");

  Json j;
  j["params"] = params_json(r);
  const auto tp = landau_tricritical_point(r.params);
  j["tricritical"] = line_point_json(tp, r.scale);
  Json line = Json::array();
  const double wx_end = tp ? tp->omega_x : std::max(g.wx_to * r.scale, 0.0);
  for (int k = 0; k <= g.line_points; ++k) {
    const double wx = wx_end * static_cast<double>(k) / static_cast<double>(g.line_points);
    const auto cp = landau_critical_point(r.params, wx);
    if (cp && cp->second_order()) line.push_back({cp->omega_x / r.scale, cp->omega_z / r.scale});
  }
  j["second_order_line"] = line;
  save_json(r.out / "phase_diagram.json", j);
  std::cout << "phase diagram: " << total << " points, tricritical "
            << (tp ? "(" + fmt(tp->omega_x / r.scale) + ", " + fmt(tp->omega_z / r.scale) + ")" : std::string("none"))
            << '\n';
  const int a = log.finish(r.out);
  const int b = row_log.finish(r.out);
  return std::max(a, b);
}

// ---------------------------------------------------------------- slice

struct SliceArgs {
  std::string axis = "omega_x";
  double from = 0.0, to = 2.0;
  int count = 41;
  bool vmc = false;
};

SliceSpec make_slice(const Run& r, const SliceArgs& a) {
  SliceSpec slice;
  if (a.axis == "omega_x") {
    slice.axis = FieldAxis::omega_x;
    slice.fixed = r.params.omega_z;
  } else if (a.axis == "omega_z") {
    slice.axis = FieldAxis::omega_z;
    slice.fixed = r.params.omega_x;
  } else {
    throw ConfigError("--axis must be omega_x or omega_z");
  }
  if (a.count < 1) throw ConfigError("--count must be at least 1");
  slice.from = a.from * r.scale;
  slice.to = a.to * r.scale;
  slice.count = a.count;
  slice.beta = r.params.beta;
  return slice;
}

int run_slice(const Run& r, const SliceArgs& a) {
  const SliceSpec slice = make_slice(r, a);
  Json j;
  j["params"] = params_json(r);
  j["axis"] = a.axis;
  j["fixed"] = slice.fixed / r.scale;
  if (!a.vmc) {
    ErrorLog log(static_cast<std::size_t>(slice.count));
    auto x_at = [&](std::size_t k) { return grid_value(slice.from, slice.to, slice.count, static_cast<int>(k)); };
    const auto pts = sweep(
        static_cast<std::size_t>(slice.count), r.jobs, log,
        [&](std::size_t k) { return a.axis + "=" + fmt(x_at(k) / r.scale); },
        [&](std::size_t k) { return minimize_univariate(at_slice_point(r.params, slice, x_at(k))); });
    CsvTable csv({"value", "u_bar", "m_s", "energy"});
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (!pts[k]) continue;
      csv.row({x_at(k) / r.scale, pts[k]->u_bar / r.scale, pts[k]->m_s, pts[k]->energy / r.scale});
      if (r.verbose >= 1) std::cout << a.axis << '=' << fmt(x_at(k) / r.scale) << " m_s=" << fmt(pts[k]->m_s) << '\n';
    }
    csv.save(r.out / "slice.csv");
    const auto rec = classify_transition(slice, r.params);
    j["transition"] = record_json(rec, r.scale);
    save_json(r.out / "slice.json", j);
    std::cout << "slice " << a.axis << ": " << to_string(rec.order) << " transition";
    if (rec.critical_value) std::cout << " at " << fmt(*rec.critical_value / r.scale);
    std::cout << " (jump " << fmt(rec.jump) << ")\n";
    return log.finish(r.out);
  }

  if (r.params.s != 0.5) throw ConfigError("VMC supports s = 1/2 only");
  CsvTable csv({"value", "energy", "energy_err", "ms2", "ms2_err", "acceptance", "converged", "restart_spread"});
  std::vector<double> ms2;
  const auto pts = vmc_slice(slice, r.params, r.config.vmc.ansatz, r.config.vmc.hidden_density, r.config.vmc.train,
                             [&](const VmcSlicePoint& pt) {
                               if (r.verbose >= 1)
                                 std::cout << a.axis << '=' << fmt(pt.value / r.scale)
                                           << " ms2=" << fmt(pt.result.ms2.mean) << " +- " << fmt(pt.result.ms2.error)
                                           << " energy=" << fmt(pt.result.energy.mean / r.scale) << '\n';
                             });
  for (const auto& pt : pts) {
    const auto& res = pt.result;
    csv.row({pt.value / r.scale, res.energy.mean / r.scale, res.energy.error / r.scale, res.ms2.mean, res.ms2.error,
             res.acceptance, res.converged, res.restart_spread / r.scale});
    ms2.push_back(res.ms2.mean);
  }
  csv.save(r.out / "slice_vmc.csv");
  const auto an = analyze_vmc_curve(ms2, r.params.s);
  Json v;
  v["order"] = to_string(an.order);
  v["max_step_ms2"] = an.max_step_ms2;
  v["max_step_root"] = an.max_step_root;
  v["max_step_between"] = an.max_step_index >= 0
                              ? Json::array({pts[static_cast<std::size_t>(an.max_step_index)].value / r.scale,
                                             pts[static_cast<std::size_t>(an.max_step_index) + 1].value / r.scale})
                              : Json(nullptr);
  j["vmc"] = v;
  save_json(r.out / "slice_vmc.json", j);
  std::cout << "vmc slice " << a.axis << ": " << to_string(an.order) << ", largest ms2 step " << fmt(an.max_step_ms2)
            << '\n';
  return 0;
}

// ---------------------------------------------------------------- critical-line

int run_critical_line(const Run& r, double from, double to, int count) {
  if (count < 1) throw ConfigError("--count must be at least 1");
  ErrorLog log(static_cast<std::size_t>(count));
  auto wx_at = [&](std::size_t k) { return grid_value(from, to, count, static_cast<int>(k)) * r.scale; };
  const auto pts = sweep(
      static_cast<std::size_t>(count), r.jobs, log, [&](std::size_t k) { return "omega_x=" + fmt(wx_at(k) / r.scale); },
      [&](std::size_t k) { return landau_critical_point(r.params, wx_at(k)); });
  CsvTable csv({"omega_x", "omega_z", "c4", "order", "omega_z_closed_form"});
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (!pts[k]) continue;
    const auto& cp = *pts[k];
    std::string closed;
    if (r.params.zero_temperature())
      if (const auto z = second_order_line(wx_at(k), r.params.s, r.params.gamma)) closed = format_csv_double(*z / r.scale);
    if (!cp) {
      csv.row({wx_at(k) / r.scale, std::string(), std::string(), std::string("none"), closed});
      continue;
    }
    csv.row({wx_at(k) / r.scale, cp->omega_z / r.scale, cp->c4, std::string(cp->second_order() ? "second" : "first"),
             closed});
    if (r.verbose >= 1)
      std::cout << "omega_x=" << fmt(wx_at(k) / r.scale) << " omega_z=" << fmt(cp->omega_z / r.scale)
                << (cp->second_order() ? " second" : " first") << '\n';
  }
  csv.save(r.out / "critical_line.csv");
  std::cout << "critical line: " << count << " points\n";
  return log.finish(r.out);
}

// ---------------------------------------------------------------- tricritical

int run_tricritical(const Run& r) {
  const auto scan = landau_tricritical_point(r.params);
  Json j;
  j["params"] = params_json(r);
  j["scan"] = line_point_json(scan, r.scale);
  std::cout << "tricritical point (units of " << (r.config.units == Units::s_gamma ? "s Gamma" : "energy") << ")\n";
  std::cout << "  scan        " << (scan ? "(" + fmt(scan->omega_x / r.scale) + ", " + fmt(scan->omega_z / r.scale) + ")"
                                         : std::string("none"))
            << '\n';
  if (r.params.zero_temperature()) {
    const auto [wx, wz] = tricritical_point_exact(r.params.s, r.params.gamma);
    j["closed_form"] = {{"omega_x", wx / r.scale}, {"omega_z", wz / r.scale}};
    std::cout << "  closed form (" << fmt(wx / r.scale) << ", " << fmt(wz / r.scale) << ")\n";
  }
  save_json(r.out / "tricritical.json", j);
  return 0;
}

// ---------------------------------------------------------------- susceptibility

Json fit_json(const DecayFit& f) {
  Json j;
  j["family"] = to_string(f.family);
  j["status"] = to_string(f.status);
  j["alpha_chi"] = f.alpha_chi;
  j["log_amplitude"] = f.log_amplitude;
  j["r_squared"] = f.r_squared;
  return j;
}

int run_susceptibility(const Run& r, bool mask_diagonal) {
  const auto sm = chi_matrix(r.params);
  CsvTable csv({"row", "col", "value"});
  for (int i = 0; i < r.params.n; ++i)
    for (int k = 0; k < r.params.n; ++k) {
      if (mask_diagonal && i == k) continue;
      csv.row({i, k, sm.chi(i, k) * r.scale});
    }
  csv.save(r.out / "chi.csv");
  Json j;
  j["params"] = params_json(r);
  j["u_bar"] = sm.u_bar / r.scale;
  j["condition"] = sm.condition;
  Json fits = Json::array();
  for (auto fam : {CorrelationFamily::inter, CorrelationFamily::even, CorrelationFamily::odd})
    fits.push_back(fit_json(decay_fit(sm.chi, fam)));
  j["decay_fits"] = fits;
  save_json(r.out / "chi.json", j);
  std::cout << "susceptibility: n=" << r.params.n << " condition " << fmt(sm.condition) << " chi_00 "
            << fmt(sm.chi(0, 0) * r.scale) << " chi_01 " << fmt(sm.chi(0, 1) * r.scale) << '\n';
  return 0;
}

// ---------------------------------------------------------------- decay-fit

CorrelationFamily parse_family(const std::string& s) {
  if (s == "01") return CorrelationFamily::inter;
  if (s == "00") return CorrelationFamily::even;
  if (s == "11") return CorrelationFamily::odd;
  throw ConfigError("--family must be 01, 00 or 11");
}

int run_decay_fit(const Run& r, const std::vector<double>& alphas, const std::vector<std::string>& families) {
  CsvTable csv({"alpha", "family", "status", "alpha_chi", "r_squared"});
  Json j;
  j["params"] = params_json(r);
  Json lines = Json::array();
  for (const auto& name : families) {
    const auto fam = parse_family(name);
    const auto scan = slope_scan(alphas, r.params, fam, r.jobs);
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      const auto& f = scan.fits[k];
      csv.row({alphas[k], name, to_string(f.status), f.alpha_chi, f.r_squared});
      if (r.verbose >= 1)
        std::cout << "alpha=" << fmt(alphas[k]) << " family " << name << " alpha_chi=" << fmt(f.alpha_chi) << ' '
                  << to_string(f.status) << '\n';
    }
    lines.push_back({{"family", name}, {"slope", scan.line.slope}, {"intercept", scan.line.intercept},
                     {"r_squared", scan.line.r_squared}});
    std::cout << "family " << name << ": alpha_chi = " << fmt(scan.line.slope) << " alpha + "
              << fmt(scan.line.intercept) << '\n';
  }
  j["lines"] = lines;
  csv.save(r.out / "decay_fit.csv");
  save_json(r.out / "decay_fit.json", j);
  return 0;
}

// ---------------------------------------------------------------- classical

int run_classical(const Run& r, int landscape, int grid, double grid_max) {
  Json j;
  j["params"] = params_json(r);
  const auto cfg = minimize_classical(r.params);
  j["theta_a"] = cfg.theta_a;
  j["theta_b"] = cfg.theta_b;
  j["energy"] = cfg.energy / r.scale;
  j["m_s"] = cfg.m_s;
  j["degenerate"] = cfg.degenerate;
  std::cout << "classical minimum: theta_a=" << fmt(cfg.theta_a) << " theta_b=" << fmt(cfg.theta_b)
            << " m_s=" << fmt(cfg.m_s) << (cfg.degenerate ? " (degenerate)" : "") << '\n';
  if (landscape > 0) {
    std::ostringstream os;
    write_landscape_csv(os, r.params, landscape);
    write_atomic(r.out / "landscape.csv", os.str());
  }
  int status = 0;
  if (grid > 0) {
    const auto total = static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid);
    auto value = [&](int k) { return grid_value(0.0, grid_max, grid, k) * r.scale; };
    ErrorLog log(total);
    struct Row {
      AngleConfig c;
      VariationalPoint v;
    };
    const auto rows = sweep(
        total, r.jobs, log,
        [&](std::size_t i) {
          return "omega_x=" + fmt(value(static_cast<int>(i % static_cast<std::size_t>(grid))) / r.scale) +
                 " omega_z=" + fmt(value(static_cast<int>(i / static_cast<std::size_t>(grid))) / r.scale);
        },
        [&](std::size_t i) {
          ModelParams p = r.params;
          p.omega_x = value(static_cast<int>(i % static_cast<std::size_t>(grid)));
          p.omega_z = value(static_cast<int>(i / static_cast<std::size_t>(grid)));
          return Row{minimize_classical(p), minimize_univariate(p)};
        });
    CsvTable csv({"omega_x", "omega_z", "theta_a", "theta_b", "m_s_classical", "m_s_variational", "difference"});
    double worst = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      if (!rows[i]) continue;
      const double d = std::abs(rows[i]->c.m_s - rows[i]->v.m_s);
      worst = std::max(worst, d);
      csv.row({value(static_cast<int>(i % static_cast<std::size_t>(grid))) / r.scale,
               value(static_cast<int>(i / static_cast<std::size_t>(grid))) / r.scale, rows[i]->c.theta_a,
               rows[i]->c.theta_b, rows[i]->c.m_s, rows[i]->v.m_s, d});
    }
    csv.save(r.out / "classical_grid.csv");
    j["grid_max_difference"] = worst;
    std::cout << "classical vs variational m_s on " << grid << "x" << grid << " grid: max difference " << fmt(worst)
              << '\n';
    status = log.finish(r.out);
  }
  save_json(r.out / "classical.json", j);
  return status;
}

// ---------------------------------------------------------------- variant

struct VariantArgs {
  double wz_from = 0.1, wz_to = 1.9;
  int wz_count = 10;
  double wx_from = 0.0, wx_to = 2.0;
  int count = 41;
};

int run_variant(const Run& r, const VariantArgs& a) {
  const auto rows = static_cast<std::size_t>(a.wz_count);
  ErrorLog log(rows);
  auto wz_at = [&](std::size_t k) { return grid_value(a.wz_from, a.wz_to, a.wz_count, static_cast<int>(k)) * r.scale; };
  struct Pair {
    TransitionRecord variant, staggered;
  };
  const auto recs = sweep(
      rows, r.jobs, log, [&](std::size_t k) { return "omega_z=" + fmt(wz_at(k) / r.scale); },
      [&](std::size_t k) {
        Pair out;
        for (auto coupling : {SublatticeCoupling::intersublattice_only, SublatticeCoupling::staggered}) {
          auto m_of = [&](double wx) {
            ModelParams p = r.params;
            p.omega_x = wx;
            p.omega_z = wz_at(k);
            return minimize_classical(p, coupling).m_s;
          };
          auto rec = classify_order_parameter(m_of, a.wx_from * r.scale, a.wx_to * r.scale, a.count, r.params.s,
                                              r.params.s_gamma());
          (coupling == SublatticeCoupling::staggered ? out.staggered : out.variant) = rec;
        }
        return out;
      });
  CsvTable csv({"omega_z", "variant_order", "variant_critical_omega_x", "variant_jump", "staggered_order",
                "staggered_critical_omega_x", "staggered_jump"});
  bool always_second = true;
  int crossings = 0;
  for (std::size_t k = 0; k < rows; ++k) {
    if (!recs[k]) continue;
    const auto& v = recs[k]->variant;
    const auto& s = recs[k]->staggered;
    auto crit = [&](const TransitionRecord& t) {
      return t.critical_value ? format_csv_double(*t.critical_value / r.scale) : std::string();
    };
    csv.row({wz_at(k) / r.scale, to_string(v.order), crit(v), v.jump, to_string(s.order), crit(s), s.jump});
    if (v.order == TransitionOrder::first) always_second = false;
    if (v.order != TransitionOrder::none) ++crossings;
    if (r.verbose >= 1)
      std::cout << "omega_z=" << fmt(wz_at(k) / r.scale) << " variant " << to_string(v.order) << " staggered "
                << to_string(s.order) << '\n';
  }
  csv.save(r.out / "variant.csv");
  Json j;
  j["params"] = params_json(r);
  j["crossings"] = crossings;
  j["always_second_order"] = always_second;
  save_json(r.out / "variant.json", j);
  std::cout << "intersublattice-only variant: " << crossings << " transitions, "
            << (always_second ? "all second order" : "first-order transition found") << '\n';
  return log.finish(r.out);
}

// ---------------------------------------------------------------- ed

int run_ed(const Run& r, int k, bool bigspin, bool no_onsite, bool dump) {
  SpectrumResult spec;
  std::optional<double> onsite;
  std::optional<FullHamiltonian> full;
  if (bigspin) {
    spec = lowest_k(BigSpinHamiltonian(r.params), k);
  } else {
    HamiltonianOptions opt;
    opt.include_onsite = !no_onsite;
    full.emplace(r.params, opt);
    onsite = full->onsite_constant();
    spec = lowest_k(*full, k);
  }
  CsvTable csv({"index", "energy", "energy_without_onsite", "residual"});
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    const double e = spec.eigenvalues(i);
    const double unshifted = (onsite && !no_onsite) ? e - *onsite : e;
    csv.row({static_cast<long>(i), e / r.scale, unshifted / r.scale, spec.residuals(i)});
  }
  csv.save(r.out / "spectrum.csv");
  Json j;
  j["params"] = params_json(r);
  j["basis"] = to_string(spec.basis);
  j["dimension"] = spec.eigenvectors.rows();
  j["converged"] = spec.converged;
  j["ground_energy"] = spec.eigenvalues(0) / r.scale;
  j["onsite_constant"] = onsite ? Json(*onsite / r.scale) : Json(nullptr);
  if (full) {
    const auto o = ground_observables(spec, *full);
    j["m_s"] = o.m_s;
    j["m_s2"] = o.m_s2;
    j["energy_per_site"] = o.energy_per_site / r.scale;
    j["sx"] = std::vector<double>(o.sx.data(), o.sx.data() + o.sx.size());
    Json corr = Json::array();
    for (Eigen::Index i = 0; i < o.sxsx.rows(); ++i) {
      const Eigen::VectorXd row = o.sxsx.row(i);
      corr.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    j["sxsx"] = corr;
  }
  save_json(r.out / "ed.json", j);
  if (dump)
    for (Eigen::Index c = 0; c < spec.eigenvectors.cols(); ++c)
      save_vector(r.out / ("eigenvector_" + std::to_string(c) + ".bin"), spec.eigenvectors.col(c));
  std::cout << "ed (" << to_string(spec.basis) << ", dim " << spec.eigenvectors.rows() << "): ground energy "
            << fmt(spec.eigenvalues(0) / r.scale) << (spec.converged ? "" : " (not converged)") << '\n';
  return spec.converged ? 0 : 2;
}

// ---------------------------------------------------------------- ed-compare

struct CompareArgs {
  int k_full = 15;
  int k_big = 5;
  std::optional<double> wz_from, wz_to;
  int count = 1;
};

int run_ed_compare(const Run& r, const CompareArgs& a) {
  const double from = a.wz_from ? *a.wz_from * r.scale : r.params.omega_z;
  const double to = a.wz_to ? *a.wz_to * r.scale : from;
  const auto count = static_cast<std::size_t>(std::max(a.count, 1));
  ErrorLog log(count);
  auto wz_at = [&](std::size_t k) { return grid_value(from, to, static_cast<int>(count), static_cast<int>(k)); };
  struct Levels {
    Eigen::VectorXd full, big;
  };
  const auto res = sweep(
      count, r.jobs, log, [&](std::size_t k) { return "omega_z=" + fmt(wz_at(k) / r.scale); },
      [&](std::size_t k) {
        ModelParams p = r.params;
        p.omega_z = wz_at(k);
        return Levels{lowest_k(FullHamiltonian(p), a.k_full).eigenvalues, lowest_k(BigSpinHamiltonian(p), a.k_big).eigenvalues};
      });
  CsvTable csv({"omega_z", "level", "full", "bigspin"});
  for (std::size_t k = 0; k < count; ++k) {
    if (!res[k]) continue;
    const auto& lv = *res[k];
    const Eigen::Index m = std::max(lv.full.size(), lv.big.size());
    if (r.verbose >= 1 || count == 1) std::cout << "omega_z=" << fmt(wz_at(k) / r.scale) << '\n';
    for (Eigen::Index i = 0; i < m; ++i) {
      const std::string f = i < lv.full.size() ? format_csv_double(lv.full(i) / r.scale) : std::string();
      const std::string b = i < lv.big.size() ? format_csv_double(lv.big(i) / r.scale) : std::string();
      csv.row({wz_at(k) / r.scale, static_cast<long>(i), f, b});
      if (r.verbose >= 1 || count == 1) {
        char line[128];
        std::snprintf(line, sizeof line, "  %3ld  %22s  %22s\n", static_cast<long>(i), f.c_str(), b.c_str());
        std::cout << line;
      }
    }
  }
  csv.save(r.out / "ed_compare.csv");
  return log.finish(r.out);
}

// ---------------------------------------------------------------- vmc

int run_vmc(const Run& r, bool ed_reference) {
  if (r.params.s != 0.5) throw ConfigError("VMC supports s = 1/2 only");
  const auto& v = r.config.vmc;
  TrainResult res = train_ansatz(v.ansatz, v.hidden_density, r.params, v.train);
  CsvTable trace({"iter", "lr", "energy_mean", "energy_err", "ms2_mean", "ms2_err", "acceptance"});
  for (const auto& row : res.trace)
    trace.row({row.iter, row.lr, row.energy_mean / r.scale, row.energy_err / r.scale, row.ms2_mean, row.ms2_err,
               row.acceptance});
  trace.save(r.out / "trace.csv");
  save_vector(r.out / "parameters.bin", res.parameters);
  Json j;
  j["params"] = params_json(r);
  j["ansatz"] = to_string(v.ansatz);
  j["energy"] = res.energy.mean / r.scale;
  j["energy_err"] = res.energy.error / r.scale;
  j["ms2"] = res.ms2.mean;
  j["ms2_err"] = res.ms2.error;
  j["acceptance"] = res.acceptance;
  j["converged"] = res.converged;
  j["skipped_steps"] = res.skipped_steps;
  j["clamped_ratios"] = res.clamped;
  j["restart_spread"] = res.restart_spread / r.scale;
  j["restart_index"] = res.restart_index;
  j["diagnostics"] = res.diagnostics;
  std::cout << "vmc: energy/site " << fmt(res.energy.mean / r.scale) << " +- " << fmt(res.energy.error / r.scale)
            << "  ms2 " << fmt(res.ms2.mean) << " +- " << fmt(res.ms2.error) << (res.converged ? "" : "  (not plateaued)")
            << '\n';
  if (ed_reference) {
    if (r.params.n > 20) throw ConfigError("--ed-reference needs n <= 20");
    const FullHamiltonian h(r.params);
    const auto spec = lowest_k(h, 2);
    const auto o = ground_observables(spec, h);
    j["ed_energy"] = o.energy_per_site / r.scale;
    j["ed_ms2"] = o.m_s2;
    std::cout << "ed:  energy/site " << fmt(o.energy_per_site / r.scale) << "  ms2 " << fmt(o.m_s2) << '\n';
  }
  save_json(r.out / "vmc.json", j);
  return 0;
}

// ---------------------------------------------------------------- finite-t

struct FiniteTArgs {
  std::vector<double> betas{2.0, 1.4, 0.9};
  double probe_omega_z = 0.0;
  double probe_wx_max = 2.0;
  int count = 41;
};

int run_finite_t(const Run& r, const FiniteTArgs& a) {
  ThermalSummaryOptions opt;
  opt.probe_omega_z = a.probe_omega_z * r.scale / r.params.s_gamma();
  opt.probe_wx_max = a.probe_wx_max * r.scale / r.params.s_gamma();
  opt.probe_count = a.count;
  std::vector<double> betas;
  for (double b : a.betas) betas.push_back(std::isinf(b) ? kInf : b / r.scale);
  ErrorLog log(betas.size());
  const auto sums = sweep(
      betas.size(), r.jobs, log, [&](std::size_t k) { return "beta=" + fmt(a.betas[k]); },
      [&](std::size_t k) { return finite_temperature_summary(betas[k], r.params, opt); });
  CsvTable csv({"beta", "ordered_phase", "first_order", "probe_order", "probe_critical_omega_x", "probe_jump",
                "tricritical_omega_x", "tricritical_omega_z"});
  Json j;
  j["params"] = params_json(r);
  Json list = Json::array();
  for (std::size_t k = 0; k < sums.size(); ++k) {
    if (!sums[k]) continue;
    const auto& s = *sums[k];
    const std::string crit = s.probe.critical_value ? format_csv_double(*s.probe.critical_value / r.scale) : "";
    const std::string twx = s.tricritical ? format_csv_double(s.tricritical->omega_x / r.scale) : "";
    const std::string twz = s.tricritical ? format_csv_double(s.tricritical->omega_z / r.scale) : "";
    csv.row({a.betas[k], s.has_ordered_phase, s.has_first_order, to_string(s.probe.order), crit, s.probe.jump, twx, twz});
    Json e;
    e["beta"] = json_number(a.betas[k]);
    e["ordered_phase"] = s.has_ordered_phase;
    e["first_order"] = s.has_first_order;
    e["probe"] = record_json(s.probe, r.scale);
    e["tricritical"] = line_point_json(s.tricritical, r.scale);
    Json line = Json::array();
    for (const auto& cp : s.second_order_line) line.push_back({cp.omega_x / r.scale, cp.omega_z / r.scale});
    e["second_order_line"] = line;
    list.push_back(e);
    std::cout << "beta=" << fmt(a.betas[k]) << ": " << (s.has_ordered_phase ? "ordered phase" : "no ordered phase")
              << ", " << (s.has_first_order ? "first-order segment" : "no first-order segment") << '\n';
  }
  j["temperatures"] = list;
  csv.save(r.out / "finite_t.csv");
  save_json(r.out / "finite_t.json", j);
  return log.finish(r.out);
}

// ---------------------------------------------------------------- check-reduction

int run_check_reduction(const Run& r, int starts, std::uint64_t seed, double tolerance) {
  const auto rep = check_univariate_reduction(r.params, starts, seed, tolerance);
  Json j;
  j["params"] = params_json(r);
  j["starts"] = rep.starts;
  j["best_energy"] = rep.best_energy / r.scale;
  j["staggered_component"] = rep.staggered_component / r.scale;
  j["max_nonstaggered"] = rep.max_nonstaggered / r.scale;
  j["univariate_u_bar"] = rep.univariate.u_bar / r.scale;
  j["univariate_energy"] = rep.univariate.energy / r.scale;
  j["reduced"] = rep.reduced;
  save_json(r.out / "reduction.json", j);
  std::cout << "univariate reduction: max non-staggered |u_k| " << fmt(rep.max_nonstaggered / r.scale)
            << (rep.reduced ? " (reduced)" : " (NOT reduced)") << '\n';
  return rep.reduced ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase diagram, correlations and transition order of the staggered long-range Ising chain"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--config", c.config_path, "YAML config file")->check(CLI::ExistingFile);
  app.add_option("--out", c.out, "Output directory (default $STAGISING_OUT or .)");
  app.add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed, "Master random seed");
  app.add_option("--verbose", c.verbose, "Verbosity (1 prints every grid point)");
  app.add_option("--n", c.n, "Site count");
  app.add_option("--s", c.s, "Spin size");
  app.add_option("--alpha", c.alpha, "Range exponent or inf");
  app.add_option("--gamma", c.gamma, "Interaction strength");
  app.add_option("--omega-x", c.omega_x, "Longitudinal field");
  app.add_option("--omega-z", c.omega_z, "Transverse field");
  app.add_option("--b", c.b, "On-site shift or auto");
  app.add_option("--beta", c.beta, "Inverse temperature or inf");
  app.add_option("--units", c.units, "sGamma or absolute");

  GridArgs grid;
  auto* pd = app.add_subcommand("phase-diagram", "Variational phase diagram on a field grid");
  pd->add_option("--wx-from", grid.wx_from);
  pd->add_option("--wx-to", grid.wx_to);
  pd->add_option("--wx-count", grid.wx_count);
  pd->add_option("--wz-from", grid.wz_from);
  pd->add_option("--wz-to", grid.wz_to);
  pd->add_option("--wz-count", grid.wz_count);
  pd->add_option("--line-points", grid.line_points);

  SliceArgs slice;
  auto* sl = app.add_subcommand("slice", "Order parameter along one field axis");
  sl->add_option("--axis", slice.axis, "omega_x or omega_z");
  sl->add_option("--from", slice.from);
  sl->add_option("--to", slice.to);
  sl->add_option("--count", slice.count);
  sl->add_flag("--vmc", slice.vmc, "Use trained variational Monte Carlo instead of the exact solution");

  double cl_from = 0.0, cl_to = 1.0;
  int cl_count = 41;
  auto* cl = app.add_subcommand("critical-line", "c2 = 0 locus with its local order");
  cl->add_option("--wx-from", cl_from);
  cl->add_option("--wx-to", cl_to);
  cl->add_option("--count", cl_count);

  auto* tc = app.add_subcommand("tricritical", "Tricritical point, scanned and closed form");

  bool mask = false;
  auto* su = app.add_subcommand("susceptibility", "Linear-response susceptibility matrix");
  su->add_flag("--mask-diagonal", mask, "Leave autocorrelations out of chi.csv");

  std::vector<double> alphas{0.2, 0.4, 0.6, 0.8};
  std::vector<std::string> families{"01", "00", "11"};
  auto* df = app.add_subcommand("decay-fit", "Power-law decay exponent of chi against alpha");
  df->add_option("--alphas", alphas)->delimiter(',');
  df->add_option("--family", families, "01, 00 or 11")->delimiter(',');

  int landscape = 0, cgrid = 0;
  double cgrid_max = 1.5;
  auto* cs = app.add_subcommand("classical", "Classical two-angle minimum (alpha = 0)");
  cs->add_option("--landscape", landscape, "Write an energy landscape with this many angles per axis");
  cs->add_option("--grid", cgrid, "Compare with the variational solution on a grid x grid field grid");
  cs->add_option("--grid-max", cgrid_max);

  int ed_k = 15;
  bool ed_big = false, ed_no_onsite = false, ed_dump = false;
  auto* ed = app.add_subcommand("ed", "Exact diagonalization, lowest levels and observables");
  ed->add_option("--k", ed_k)->check(CLI::Range(1, 32));
  ed->add_flag("--bigspin", ed_big, "Two-big-spin Hamiltonian (alpha = 0)");
  ed->add_flag("--no-onsite", ed_no_onsite, "Drop the on-site b term");
  ed->add_flag("--dump-eigenvectors", ed_dump);

  CompareArgs cmp;
  auto* ec = app.add_subcommand("ed-compare", "Full against big-spin lowest levels");
  ec->add_option("--k-full", cmp.k_full)->check(CLI::Range(1, 32));
  ec->add_option("--k-big", cmp.k_big)->check(CLI::Range(1, 32));
  ec->add_option("--wz-from", cmp.wz_from);
  ec->add_option("--wz-to", cmp.wz_to);
  ec->add_option("--count", cmp.count);

  bool ed_reference = false;
  auto* vm = app.add_subcommand("vmc", "Train an ansatz at one point");
  vm->add_flag("--ed-reference", ed_reference, "Also report the exact ground state");

  FiniteTArgs ft;
  auto* fi = app.add_subcommand("finite-t", "Critical behaviour at several temperatures");
  fi->add_option("--betas", ft.betas)->delimiter(',');
  fi->add_option("--probe-omega-z", ft.probe_omega_z);
  fi->add_option("--probe-wx-max", ft.probe_wx_max);
  fi->add_option("--count", ft.count);

  int starts = 20;
  double red_tol = 1e-6;
  auto* cr = app.add_subcommand("check-reduction", "Multivariate minimization against the univariate solution");
  cr->add_option("--starts", starts);
  cr->add_option("--tolerance", red_tol);

  VariantArgs va;
  auto* vr = app.add_subcommand("variant", "Classical analysis without intrasublattice couplings");
  vr->add_option("--wz-from", va.wz_from);
  vr->add_option("--wz-to", va.wz_to);
  vr->add_option("--wz-count", va.wz_count);
  vr->add_option("--wx-from", va.wx_from);
  vr->add_option("--wx-to", va.wx_to);
  vr->add_option("--count", va.count);

  CLI11_PARSE(app, argc, argv);
  try {
    const Run r = resolve(c);
    fs::create_directories(r.out);
    if (*pd) return run_phase_diagram(r, grid);
    if (*sl) return run_slice(r, slice);
    if (*cl) return run_critical_line(r, cl_from, cl_to, cl_count);
    if (*tc) return run_tricritical(r);
    if (*su) return run_susceptibility(r, mask);
    if (*df) return run_decay_fit(r, alphas, families);
    if (*cs) return run_classical(r, landscape, cgrid, cgrid_max);
    if (*ed) return run_ed(r, ed_k, ed_big, ed_no_onsite, ed_dump);
    if (*ec) return run_ed_compare(r, cmp);
    if (*vm) return run_vmc(r, ed_reference);
    if (*fi) return run_finite_t(r, ft);
    if (*cr) return run_check_reduction(r, starts, c.seed.value_or(12345), red_tol);
    if (*vr) return run_variant(r, va);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 64;
  } catch (const CriticalDivergence& e) {
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
