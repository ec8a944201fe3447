#include "stagising/io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <sys/wait.h>

using namespace stagising;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("stagising_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STAGISING_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsFromEmptyDocument) {
  const Config c = parse_config("");
  EXPECT_EQ(c.n, 8);
  EXPECT_EQ(c.s, 0.5);
  EXPECT_FALSE(c.b.has_value());
  EXPECT_TRUE(std::isinf(c.beta));
  EXPECT_EQ(c.units, Units::s_gamma);
  EXPECT_EQ(c.vmc.ansatz, AnsatzKind::rbm);
}

TEST(Config, ParsesAllKeys) {
  const Config c = parse_config(R"(
n: 12
s: 1
alpha: inf
gamma: 2
omega_x: 0.3
omega_z: 1.25
b: 0.5
beta: 7
units: absolute
vmc:
  ansatz: symmetric_rbm
  hidden_density: 3
  lr_max: 2
  n_iters: 40
  seed: 99
)");
  EXPECT_EQ(c.n, 12);
  EXPECT_TRUE(c.alpha.is_nearest_neighbor());
  EXPECT_EQ(c.gamma, 2.0);
  EXPECT_EQ(*c.b, 0.5);
  EXPECT_EQ(c.beta, 7.0);
  EXPECT_EQ(c.units, Units::absolute);
  EXPECT_EQ(c.vmc.ansatz, AnsatzKind::symmetric_rbm);
  EXPECT_EQ(c.vmc.hidden_density, 3);
  EXPECT_EQ(c.vmc.train.lr_max, 2.0);
  EXPECT_EQ(c.vmc.train.n_iters, 40);
  EXPECT_EQ(c.vmc.train.seed, 99u);
}

TEST(Config, AutoAndInfinityKeywords) {
  const Config c = parse_config("b: auto\nbeta: inf\nalpha: 1.5\n");
  EXPECT_FALSE(c.b.has_value());
  EXPECT_TRUE(std::isinf(c.beta));
  EXPECT_EQ(c.alpha.value(), 1.5);
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(parse_config("omega: 1\n"), ConfigError);
  EXPECT_THROW(parse_config("vmc:\n  learning_rate: 1\n"), ConfigError);
  EXPECT_THROW(parse_config("vmc:\n  ansatz: cnn\n"), ConfigError);
  EXPECT_THROW(parse_config("units: kelvin\n"), ConfigError);
  EXPECT_THROW(parse_config("n: [1, 2]\n"), ConfigError);
  EXPECT_THROW(parse_config("n: eight\n"), ConfigError);
  EXPECT_THROW(parse_config("- 1\n- 2\n"), ConfigError);
  EXPECT_THROW(parse_config("n: 7\n").model(), ConfigError);
}

TEST(Config, UnitConversion) {
  Config c = parse_config("s: 1\ngamma: 2\nomega_x: 0.5\nomega_z: 0.25\nbeta: 4\n");
  ModelParams p = c.model();
  EXPECT_EQ(p.omega_x, 1.0);
  EXPECT_EQ(p.omega_z, 0.5);
  EXPECT_EQ(p.beta, 2.0);
  c.units = Units::absolute;
  p = c.model();
  EXPECT_EQ(p.omega_x, 0.5);
  EXPECT_EQ(p.beta, 4.0);
  Config back;
  back.units = Units::s_gamma;
  back.s = 1.0;
  back.gamma = 2.0;
  back.set_model(c.model());
  EXPECT_EQ(back.omega_x, 0.25);
  EXPECT_EQ(back.beta, 8.0);
}

TEST(Config, RoundTripIsIdempotent) {
  const Config c = parse_config(R"(
n: 10
alpha: 0.7
omega_x: 0.1
omega_z: 0.30000000000000004
b: 0.123456789012345678
vmc:
  ansatz: mean_field
  diag_shift: 1.0e-5
)");
  const std::string once = serialize_config(c);
  const Config again = parse_config(once);
  EXPECT_EQ(serialize_config(again), once);
  EXPECT_EQ(again.omega_z, c.omega_z);
  EXPECT_EQ(*again.b, *c.b);
  EXPECT_EQ(again.vmc.train.diag_shift, 1e-5);
  EXPECT_EQ(again.vmc.ansatz, AnsatzKind::mean_field);
}

TEST(Config, LoadFromFile) {
  const fs::path d = scratch_dir("load");
  write_atomic(d / "c.yaml", "n: 6\nomega_z: 1\n");
  EXPECT_EQ(load_config(d / "c.yaml").n, 6);
  EXPECT_THROW(load_config(d / "missing.yaml"), ConfigError);
}

TEST(Formatting, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.30000000000000004})
    EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(Formatting, CsvUsesSeventeenDigits) {
  EXPECT_EQ(format_csv_double(0.1), "0.10000000000000001");
  CsvTable t({"a", "b", "c", "d"});
  t.row({1.0 / 3.0, 7, true, "x"});
  EXPECT_EQ(t.str(), "a,b,c,d\n0.33333333333333331,7,1,x\n");
  EXPECT_THROW(t.row({1.0}), std::logic_error);
}

TEST(Files, AtomicWriteLeavesNoTemporary) {
  const fs::path d = scratch_dir("atomic");
  write_atomic(d / "sub" / "out.csv", "hello\n");
  EXPECT_EQ(slurp(d / "sub" / "out.csv"), "hello\n");
  write_atomic(d / "sub" / "out.csv", "again\n");
  EXPECT_EQ(slurp(d / "sub" / "out.csv"), "again\n");
  for (const auto& e : fs::directory_iterator(d / "sub")) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST(Files, VectorDumpRoundTrip) {
  Eigen::VectorXd v(5);
  v << 0.1, -3.0, 1e-310, std::numeric_limits<double>::infinity(), 42.0;
  const std::string bytes = encode_vector(v);
  EXPECT_EQ(bytes.size(), 8u + 40u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 5u);
  const Eigen::VectorXd w = decode_vector(bytes);
  ASSERT_EQ(w.size(), 5);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(w(i)), std::bit_cast<std::uint64_t>(v(i)));
  EXPECT_THROW(decode_vector("abc"), std::runtime_error);
  EXPECT_THROW(decode_vector(bytes.substr(0, 20)), std::runtime_error);
  const fs::path d = scratch_dir("vec");
  save_vector(d / "v.bin", v);
  EXPECT_EQ(load_vector(d / "v.bin").size(), 5);
}

TEST(Json, ModelParameters) {
  ModelParams p;
  p.n = 6;
  p.alpha = RangeExponent::nearest_neighbor();
  p.omega_z = 0.5;
  const Json j = to_json(p);
  EXPECT_EQ(j["alpha"], "inf");
  EXPECT_EQ(j["beta"], "inf");
  EXPECT_EQ(j["b_auto"], true);
  EXPECT_EQ(j["n"], 6);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const fs::path a = scratch_dir("cli_a"), b = scratch_dir("cli_b");
  const std::string args = " slice --n 8 --omega-z 0.2 --axis omega_x --from 0 --to 1.5 --count 31";
  ASSERT_EQ(run_cli("--out " + a.string() + args), 0);
  ASSERT_EQ(run_cli("--out " + b.string() + args + " --jobs 2"), 0);
  for (const char* f : {"slice.csv", "slice.json"}) {
    EXPECT_FALSE(slurp(a / f).empty()) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, ConfigErrorsExitWithUsageCode) {
  const fs::path d = scratch_dir("cli_bad");
  write_atomic(d / "bad.yaml", "omega: 1\n");
  EXPECT_EQ(run_cli("--config " + (d / "bad.yaml").string() + " --out " + d.string() + " tricritical"), 64);
}
