#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <unistd.h>
#include <sys/wait.h>

#include "prandtl/config.hpp"
#include "prandtl/field_io.hpp"
#include "prandtl/scenario.hpp"

using namespace prandtl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("prandtl_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs the CLI with stdout and stderr captured into `log`; returns the exit status.
int cli(const std::string& args, std::string* log = nullptr) {
  const fs::path out = scratch_dir() / "cli.log";
  const std::string cmd = std::string(PRANDTL_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  if (log) *log = slurp(out);
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

const char* kSmallSimulate = R"([scenario]
kind = simulate
seed = 7
[grid]
nx = 16
ny = 33
ymax = 15
stretch = 1
[gevrey]
jmax = 4
[solver]
dt = 0.01
t_end = 0.1
sample_every = 2
snapshot_times = 0.05
[euler]
kind = cosine
value = 0.1
)";

}  // namespace

TEST_CASE("ini parsing reports positions") {
  try {
    parse_ini("[grid]\nnx = 16\nthis is not a pair\n", "a.ini");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).rfind("a.ini:3:", 0) == 0);
  }
  CHECK_THROWS_AS(parse_ini("nx = 3\n", "b.ini"), ConfigError);
  CHECK_THROWS_AS(parse_ini("[grid]\nnx = 3\nnx = 4\n", "c.ini"), ConfigError);

  const auto kv = parse_ini("# comment\n[grid]\n  ny = 65   ; trailing\n", "d.ini");
  REQUIRE(kv.count("grid.ny") == 1);
  CHECK(kv.at("grid.ny").text == "65");
  CHECK(kv.at("grid.ny").line == 3);
  CHECK(kv.at("grid.ny").key_column == 3);
  CHECK(kv.at("grid.ny").column == 8);
}

TEST_CASE("config: required kind, unknown keys, bad values") {
  try {
    parse_config_text("", "empty.ini", scratch_dir());
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("scenario.kind") != std::string::npos);
  }
  try {
    parse_config_text("[scenario]\nkind = simulate\n[grid]\n  nxx = 16\n", "u.ini", scratch_dir());
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 4);
    CHECK(e.column() == 3);
    CHECK(std::string(e.what()).find("nxx") != std::string::npos);
  }
  try {
    parse_config_text("[scenario]\nkind = simulate\n[grid]\nny = lots\n", "v.ini", scratch_dir());
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 4);
    CHECK(e.column() == 6);
  }
  CHECK_THROWS_AS(parse_config_text("[scenario]\nkind = dance\n", "k.ini", scratch_dir()), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[scenario]\nkind = simulate\n[grid]\nnx = 12\n", "n.ini", scratch_dir()),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("[scenario]\nkind = simulate\n[initial]\nkind = dump\npath = missing.prgv\n",
                                    "p.ini", scratch_dir()),
                  ConfigError);
}

TEST_CASE("config: defaults and the parameter-set warnings") {
  const Scenario s = parse_config_text("[scenario]\nkind = simulate\n", "min.ini", scratch_dir());
  CHECK(s.kind == ScenarioKind::Simulate);
  CHECK(s.solver.gevrey.gamma == 2.0);
  CHECK(s.solver.gevrey.r == 5.0);
  CHECK(s.solver.weights.alpha == 1.0);
  CHECK(s.solver.weights.m == 8.0);
  CHECK(s.R == 9.0);
  CHECK(s.s == 6);
  CHECK(s.warnings.empty());

  const Scenario w = parse_config_text("[scenario]\nkind = simulate\n[weights]\nalpha = 0.3\n", "w.ini", scratch_dir());
  bool cited = false;
  for (const auto& msg : w.warnings) cited = cited || msg.find("alpha >= 1/2") != std::string::npos;
  CHECK(cited);
}

TEST_CASE("manifest re-parses to the same scenario") {
  const fs::path cfg = write_file("manifest_src.ini", kSmallSimulate);
  const Scenario a = parse_config(cfg);
  const std::string m = render_manifest(a, "test", "2000-01-01T00:00:00Z", 1);
  const Scenario b = parse_config_text(m, "manifest.ini", scratch_dir());
  CHECK(render_manifest(b, "test", "2000-01-01T00:00:00Z", 1) == m);
  CHECK(b.solver.dt == a.solver.dt);
  CHECK(b.output.snapshot_times == a.output.snapshot_times);
  CHECK(b.seed == 7);
}

TEST_CASE("field dump round trip") {
  const auto g = YGrid::build(17, 10.0, 1.3);
  Field f = Field::sample(8, g, [](double x, double y) { return std::sin(3.0 * x) * std::exp(-y) + 1e-300 * y; });
  f(3, 4) = -0.0;
  f(5, 6) = std::numeric_limits<double>::denorm_min();
  const fs::path p = scratch_dir() / "f.prgv";
  write_field_dump(p, f);
  CHECK(fs::file_size(p) == 4 + 3 * 4 + 17 * 8 + 8 * 17 * 8);
  const Field back = read_field_dump(p, g);
  CHECK(std::memcmp(back.values().data(), f.values().data(), f.values().size_bytes()) == 0);
  const Field own = read_field_dump(p);
  CHECK(std::memcmp(own.grid().nodes().data(), g->nodes().data(), 17 * sizeof(double)) == 0);

  const auto other = YGrid::build(17, 10.0, 1.0);
  CHECK_THROWS(read_field_dump(p, other));
  std::string bytes = slurp(p);
  std::ofstream(scratch_dir() / "short.prgv", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  CHECK_THROWS(read_field_dump(scratch_dir() / "short.prgv"));
  bytes[0] = 'X';
  std::ofstream(scratch_dir() / "magic.prgv", std::ios::binary) << bytes;
  CHECK_THROWS(read_field_dump(scratch_dir() / "magic.prgv"));

  for (double v : {0.1, 1.0 / 3.0, -2.5e-310, 6.02214076e23}) {
    CHECK(std::strtod(format_exact(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("cli: usage and config errors exit with 2") {
  CHECK(cli("") == 2);
  CHECK(cli("simulate") == 2);
  CHECK(cli("frobnicate --config x.ini") == 2);
  CHECK(cli("simulate --config " + (scratch_dir() / "does_not_exist.ini").string()) == 2);
  const fs::path bad = write_file("bad.ini", "[scenario]\nkind = simulate\n[grid]\nnx = 12\n");
  std::string log;
  CHECK(cli("simulate --config " + bad.string(), &log) == 2);
  CHECK(log.find("nx") != std::string::npos);
  const fs::path ok = write_file("kind.ini", kSmallSimulate);
  CHECK(cli("linstab --config " + ok.string()) == 2);
  CHECK(cli("simulate --config " + ok.string() + " --threads 0") == 2);
}

TEST_CASE("cli: simulate outputs, t_end = 0, determinism, manifest replay") {
  const fs::path cfg = write_file("sim.ini", kSmallSimulate);
  const fs::path out1 = scratch_dir() / "sim1";
  const fs::path out2 = scratch_dir() / "sim2";
  const fs::path out3 = scratch_dir() / "sim3";
  REQUIRE(cli("simulate --config " + cfg.string() + " --out " + out1.string()) == 0);
  REQUIRE(cli("simulate --config " + cfg.string() + " --out " + out2.string() + " --threads 3") == 0);
  const std::string csv = slurp(out1 / "diagnostics.csv");
  CHECK(csv.rfind("t,gevrey_norm_u,gevrey_norm_w,radius_delta,radius_residual,low_norm,hs_norm,energy_l2,dt_effective\n", 0) == 0);
  CHECK(csv == slurp(out2 / "diagnostics.csv"));
  CHECK(fs::exists(out1 / "u_t0.05.prgv"));
  CHECK(slurp(out1 / "u_t0.05.prgv") == slurp(out2 / "u_t0.05.prgv"));

  // The manifest alone reproduces the run.
  REQUIRE(fs::exists(out1 / "manifest.ini"));
  REQUIRE(cli("simulate --config " + (out1 / "manifest.ini").string() + " --out " + out3.string()) == 0);
  CHECK(slurp(out3 / "diagnostics.csv") == csv);

  std::string zero = kSmallSimulate;
  zero.replace(zero.find("t_end = 0.1"), 11, "t_end = 0\n");
  zero.replace(zero.find("snapshot_times = 0.05"), 21, "");
  const fs::path zcfg = write_file("zero.ini", zero);
  REQUIRE(cli("simulate --config " + zcfg.string() + " --out " + (scratch_dir() / "zero").string()) == 0);
  const std::string zcsv = slurp(scratch_dir() / "zero" / "diagnostics.csv");
  CHECK(std::count(zcsv.begin(), zcsv.end(), '\n') == 2);
}

TEST_CASE("cli: warnings do not stop a run") {
  std::string text = kSmallSimulate;
  text += "[weights]\nalpha = 0.3\n";
  text.replace(text.find("t_end = 0.1"), 11, "t_end = 0.02");
  text.replace(text.find("snapshot_times = 0.05"), 21, "");
  const fs::path cfg = write_file("warn.ini", text);
  std::string log;
  CHECK(cli("simulate --config " + cfg.string() + " --out " + (scratch_dir() / "warn").string(), &log) == 0);
  CHECK(log.find("alpha >= 1/2") != std::string::npos);
}

TEST_CASE("cli: blow-up exits with 3 and marks the CSV") {
  const fs::path cfg = write_file("blow.ini", R"([scenario]
kind = simulate
[grid]
nx = 16
ny = 33
ymax = 15
[gevrey]
jmax = 4
[solver]
dt = 0.05
t_end = 5
[euler]
kind = cosine
value = 50
[initial]
amp = 50
)");
  const fs::path out = scratch_dir() / "blow";
  CHECK(cli("simulate --config " + cfg.string() + " --out " + out.string()) == 3);
  const std::string csv = slurp(out / "diagnostics.csv");
  CHECK(csv.find("# TRUNCATED:") != std::string::npos);
}

TEST_CASE("cli: failed invariant exits with 4") {
  // An unattainable residual bound turns the hierarchy check into a failure.
  const fs::path cfg = write_file("inv.ini", R"([scenario]
kind = verify-estimates
[grid]
nx = 16
ny = 33
ymax = 15
[gevrey]
jmax = 4
[solver]
dt = 0.01
t_end = 0.05
[euler]
kind = cosine
value = 0.1
[estimates]
identity_jmax = 3
residual_jmax = 1
residual_snapshots = 1
residual_bound = 1e-14
aux_jmax = -1
)");
  const fs::path out = scratch_dir() / "inv";
  CHECK(cli("verify-estimates --config " + cfg.string() + " --out " + out.string()) == 4);
  const std::string csv = slurp(out / "estimates.csv");
  CHECK(csv.find("hierarchy_residual") != std::string::npos);
  CHECK(csv.find(",0\n") != std::string::npos);
}

TEST_CASE("cli: verify-weights writes nonnegative margins") {
  const fs::path cfg = write_file("vw.ini", "[scenario]\nkind = verify-weights\n[grid]\nny = 257\nymax = 40\nstretch = 2\n"
                                            "[verify_weights]\nalphas = 0.5, 1\njmax = 8\nfields = 5\n");
  const fs::path out = scratch_dir() / "vw";
  REQUIRE(cli("verify-weights --config " + cfg.string() + " --out " + out.string()) == 0);
  std::istringstream csv(slurp(out / "weights.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "alpha,lemma,j,n,margin");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    CHECK(std::stod(line.substr(line.rfind(',') + 1)) >= 0.0);
  }
  CHECK(rows > 0);
}

TEST_CASE("cli: synth-data feeds a simulate run through files") {
  const fs::path cfg = write_file("synth.ini", "[scenario]\nkind = synth-data\n[grid]\nnx = 16\nny = 33\nymax = 15\n"
                                               "[gevrey]\njmax = 4\n[solver]\ndt = 0.01\nt_end = 0.04\nsample_every = 2\n"
                                               "[euler]\nkind = cosine\nvalue = 0.1\n");
  const fs::path out = scratch_dir() / "synth";
  REQUIRE(cli("synth-data --config " + cfg.string() + " --out " + out.string()) == 0);
  REQUIRE(fs::exists(out / "initial.prgv"));
  REQUIRE(fs::exists(out / "euler_samples.csv"));
  const fs::path sim = write_file("from_files.ini", "[scenario]\nkind = simulate\n[grid]\nnx = 16\nny = 33\nymax = 15\n"
                                                   "[gevrey]\njmax = 4\n[solver]\ndt = 0.01\nt_end = 0.04\n"
                                                   "[euler]\nkind = sampled\npath = synth/euler_samples.csv\n"
                                                   "[initial]\nkind = dump\npath = synth/initial.prgv\n");
  CHECK(cli("simulate --config " + sim.string() + " --out " + (scratch_dir() / "from_files").string()) == 0);
}
