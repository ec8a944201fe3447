#pragma once

// Configuration files, CSV/JSON output and binary vector dumps.
//
// Config layout (YAML):
//
//   n: 10
//   s: 0.5
//   alpha: 2          # or "inf"
//   gamma: 1
//   omega_x: 0.5
//   omega_z: 0.5
//   b: auto           # or a number
//   beta: inf         # or a number
//   units: sGamma     # or "absolute"
//   vmc:
//     ansatz: rbm     # rbm, symmetric_rbm, mean_field
//     hidden_density: 2
//     lr0: 0.1
//     ...
//
// With units = sGamma the fields are read in units of s Gamma and beta in
// units of 1/(s Gamma).

#include "stagising/model.hpp"
#include "stagising/vmc.hpp"

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stagising {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Units { s_gamma, absolute };

inline std::string to_string(Units u) { return u == Units::s_gamma ? "sGamma" : "absolute"; }

enum class AnsatzKind { rbm, symmetric_rbm, mean_field };

inline std::string to_string(AnsatzKind k) {
  switch (k) {
    case AnsatzKind::rbm: return "rbm";
    case AnsatzKind::symmetric_rbm: return "symmetric_rbm";
    default: return "mean_field";
  }
}

inline AnsatzKind parse_ansatz_kind(const std::string& s) {
  if (s == "rbm") return AnsatzKind::rbm;
  if (s == "symmetric_rbm") return AnsatzKind::symmetric_rbm;
  if (s == "mean_field") return AnsatzKind::mean_field;
  throw ConfigError("unknown ansatz '" + s + "' (expected rbm, symmetric_rbm or mean_field)");
}

struct VmcSection {
  AnsatzKind ansatz = AnsatzKind::rbm;
  /// Hidden units per site (rbm) or filters (symmetric_rbm).
  int hidden_density = 2;
  TrainConfig train;
};

/// Parsed configuration, with field values kept in the units they were
/// written in so that re-serialization reproduces the input.
struct Config {
  int n = 8;
  double s = 0.5;
  RangeExponent alpha{0.0};
  double gamma = 1.0;
  double omega_x = 0.0;
  double omega_z = 0.0;
  std::optional<double> b;
  double beta = kInf;
  Units units = Units::s_gamma;
  VmcSection vmc;

  double field_scale() const { return units == Units::s_gamma ? s * gamma : 1.0; }

  ModelParams model() const {
    ModelParams p;
    p.n = n;
    p.s = s;
    p.alpha = alpha;
    p.gamma = gamma;
    p.omega_x = omega_x * field_scale();
    p.omega_z = omega_z * field_scale();
    p.b = b;
    p.beta = std::isinf(beta) ? kInf : beta / field_scale();
    p.validate();
    return p;
  }

  /// Inverse of model(): stores p in this config's units.
  void set_model(const ModelParams& p) {
    n = p.n;
    s = p.s;
    alpha = p.alpha;
    gamma = p.gamma;
    b = p.b;
    omega_x = p.omega_x / field_scale();
    omega_z = p.omega_z / field_scale();
    beta = std::isinf(p.beta) ? kInf : p.beta * field_scale();
  }
};

/// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// Fixed 17 significant digits, as used in CSV output.
inline std::string format_csv_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline double parse_number_or_inf(const YAML::Node& node, const std::string& key) {
  const auto text = node.as<std::string>();
  if (text == "inf" || text == "infinity" || text == ".inf") return kInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number or \"inf\", got '" + text + "'");
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ConfigError("key '" + key + "' must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("key '" + key + "' has an invalid value '" + node.as<std::string>() + "'");
  }
}

inline void reject_unknown(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& prefix) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + prefix + key + "'");
  }
}

inline void read_vmc(const YAML::Node& node, VmcSection& v) {
  if (!node.IsMap()) throw ConfigError("key 'vmc' must be a mapping");
  reject_unknown(node,
                 {"ansatz", "hidden_density", "lr0", "lr_max", "n_warm", "gamma_decay", "diag_shift", "n_iters",
                  "n_chains", "n_sweeps_per_sample", "n_samples", "n_eval_samples", "init_scale", "restarts", "seed"},
                 "vmc.");
  auto& t = v.train;
  if (node["ansatz"]) v.ansatz = parse_ansatz_kind(scalar<std::string>(node["ansatz"], "vmc.ansatz"));
  if (node["hidden_density"]) v.hidden_density = scalar<int>(node["hidden_density"], "vmc.hidden_density");
  if (node["lr0"]) t.lr0 = scalar<double>(node["lr0"], "vmc.lr0");
  if (node["lr_max"]) t.lr_max = scalar<double>(node["lr_max"], "vmc.lr_max");
  if (node["n_warm"]) t.n_warm = scalar<int>(node["n_warm"], "vmc.n_warm");
  if (node["gamma_decay"]) t.gamma_decay = scalar<double>(node["gamma_decay"], "vmc.gamma_decay");
  if (node["diag_shift"]) t.diag_shift = scalar<double>(node["diag_shift"], "vmc.diag_shift");
  if (node["n_iters"]) t.n_iters = scalar<int>(node["n_iters"], "vmc.n_iters");
  if (node["n_chains"]) t.n_chains = scalar<int>(node["n_chains"], "vmc.n_chains");
  if (node["n_sweeps_per_sample"]) t.n_sweeps_per_sample = scalar<int>(node["n_sweeps_per_sample"], "vmc.n_sweeps_per_sample");
  if (node["n_samples"]) t.n_samples = scalar<int>(node["n_samples"], "vmc.n_samples");
  if (node["n_eval_samples"]) t.n_eval_samples = scalar<int>(node["n_eval_samples"], "vmc.n_eval_samples");
  if (node["init_scale"]) t.init_scale = scalar<double>(node["init_scale"], "vmc.init_scale");
  if (node["restarts"]) t.restarts = scalar<int>(node["restarts"], "vmc.restarts");
  if (node["seed"]) t.seed = scalar<std::uint64_t>(node["seed"], "vmc.seed");
  if (v.hidden_density < 1) throw ConfigError("vmc.hidden_density must be at least 1");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("vmc: ") + e.what());
  }
}

}  // namespace detail

inline Config parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  Config c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("config must be a mapping");
  detail::reject_unknown(root, {"n", "s", "alpha", "gamma", "omega_x", "omega_z", "b", "beta", "units", "vmc"}, "");
  if (root["n"]) c.n = detail::scalar<int>(root["n"], "n");
  if (root["s"]) c.s = detail::scalar<double>(root["s"], "s");
  if (root["alpha"]) {
    const double a = detail::parse_number_or_inf(root["alpha"], "alpha");
    try {
      c.alpha = std::isinf(a) ? RangeExponent::nearest_neighbor() : RangeExponent(a);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("alpha: ") + e.what());
    }
  }
  if (root["gamma"]) c.gamma = detail::scalar<double>(root["gamma"], "gamma");
  if (root["omega_x"]) c.omega_x = detail::scalar<double>(root["omega_x"], "omega_x");
  if (root["omega_z"]) c.omega_z = detail::scalar<double>(root["omega_z"], "omega_z");
  if (root["b"]) {
    const auto text = detail::scalar<std::string>(root["b"], "b");
    if (text == "auto")
      c.b.reset();
    else
      c.b = detail::scalar<double>(root["b"], "b");
  }
  if (root["beta"]) c.beta = detail::parse_number_or_inf(root["beta"], "beta");
  if (root["units"]) {
    const auto u = detail::scalar<std::string>(root["units"], "units");
    if (u == "sGamma")
      c.units = Units::s_gamma;
    else if (u == "absolute")
      c.units = Units::absolute;
    else
      throw ConfigError("units must be \"sGamma\" or \"absolute\", got '" + u + "'");
  }
  if (root["vmc"]) detail::read_vmc(root["vmc"], c.vmc);
  try {
    c.model();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Canonical YAML text; parse_config(serialize_config(c)) reproduces c.
inline std::string serialize_config(const Config& c) {
  std::ostringstream os;
  const auto& t = c.vmc.train;
  os << "n: " << c.n << '\n'
     << "s: " << format_double(c.s) << '\n'
     << "alpha: " << c.alpha.to_string() << '\n'
     << "gamma: " << format_double(c.gamma) << '\n'
     << "omega_x: " << format_double(c.omega_x) << '\n'
     << "omega_z: " << format_double(c.omega_z) << '\n'
     << "b: " << (c.b ? format_double(*c.b) : std::string("auto")) << '\n'
     << "beta: " << format_double(c.beta) << '\n'
     << "units: " << to_string(c.units) << '\n'
     << "vmc:\n"
     << "  ansatz: " << to_string(c.vmc.ansatz) << '\n'
     << "  hidden_density: " << c.vmc.hidden_density << '\n'
     << "  lr0: " << format_double(t.lr0) << '\n'
     << "  lr_max: " << format_double(t.lr_max) << '\n'
     << "  n_warm: " << t.n_warm << '\n'
     << "  gamma_decay: " << format_double(t.gamma_decay) << '\n'
     << "  diag_shift: " << format_double(t.diag_shift) << '\n'
     << "  n_iters: " << t.n_iters << '\n'
     << "  n_chains: " << t.n_chains << '\n'
     << "  n_sweeps_per_sample: " << t.n_sweeps_per_sample << '\n'
     << "  n_samples: " << t.n_samples << '\n'
     << "  n_eval_samples: " << t.n_eval_samples << '\n'
     << "  init_scale: " << format_double(t.init_scale) << '\n'
     << "  restarts: " << t.restarts << '\n'
     << "  seed: " << t.seed << '\n';
  return os.str();
}

/// Writes to a sibling temporary file and renames it over the target, so
/// the target never holds a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write to " + tmp.string() + " failed");
    }
  }
  fs::rename(tmp, path);
}

/// Accumulates a CSV table in memory; numbers use 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t k = 0; k < header.size(); ++k) text_ += (k ? "," : "") + header[k];
    text_ += '\n';
  }

  /// Cells are either numbers or pre-formatted strings.
  struct Cell {
    Cell(double v) : text(format_csv_double(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(long v) : text(std::to_string(v)) {}
    Cell(long long v) : text(std::to_string(v)) {}
    Cell(unsigned long v) : text(std::to_string(v)) {}
    Cell(unsigned long long v) : text(std::to_string(v)) {}
    Cell(bool v) : text(v ? "1" : "0") {}
    Cell(std::string v) : text(std::move(v)) {}
    Cell(const char* v) : text(v) {}
    std::string text;
  };

  void row(std::initializer_list<Cell> cells) { row(std::vector<Cell>(cells)); }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) throw std::logic_error("csv row has the wrong number of cells");
    for (std::size_t k = 0; k < cells.size(); ++k) text_ += (k ? "," : "") + cells[k].text;
    text_ += '\n';
  }

  const std::string& str() const { return text_; }
  void save(const std::filesystem::path& path) const { write_atomic(path, text_); }

 private:
  std::size_t columns_;
  std::string text_;
};

using Json = nlohmann::ordered_json;

/// JSON number, or the strings "inf"/"-inf"/"nan" for non-finite values.
inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline Json to_json(const ModelParams& p) {
  Json j;
  j["n"] = p.n;
  j["s"] = p.s;
  j["alpha"] = p.alpha.is_nearest_neighbor() ? Json("inf") : Json(p.alpha.value());
  j["gamma"] = p.gamma;
  j["omega_x"] = p.omega_x;
  j["omega_z"] = p.omega_z;
  j["b"] = json_number(resolved_b(p));
  j["b_auto"] = !p.b.has_value();
  j["beta"] = json_number(p.beta);
  return j;
}

inline void save_json(const std::filesystem::path& path, const Json& j) { write_atomic(path, j.dump(2) + "\n"); }

/// Binary vector: uint64 element count then float64 values, little-endian.
inline std::string encode_vector(const Eigen::VectorXd& v) {
  std::string out(8 + 8 * static_cast<std::size_t>(v.size()), '\0');
  auto put = [&](std::size_t at, std::uint64_t bits) {
    for (int b = 0; b < 8; ++b) out[at + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  };
  put(0, static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) put(8 + 8 * static_cast<std::size_t>(i), std::bit_cast<std::uint64_t>(v(i)));
  return out;
}

inline Eigen::VectorXd decode_vector(const std::string& bytes) {
  auto get = [&](std::size_t at) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + static_cast<std::size_t>(b)])) << (8 * b);
    return bits;
  };
  if (bytes.size() < 8) throw std::runtime_error("vector dump is missing its header");
  const std::uint64_t n = get(0);
  if (bytes.size() != 8 + 8 * n) throw std::runtime_error("vector dump length does not match its header");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = std::bit_cast<double>(get(8 + 8 * i));
  return v;
}

inline void save_vector(const std::filesystem::path& path, const Eigen::VectorXd& v) {
  write_atomic(path, encode_vector(v));
}

inline Eigen::VectorXd load_vector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_vector(ss.str());
}

}  // namespace stagising
