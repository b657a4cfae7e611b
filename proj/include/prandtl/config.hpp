#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prandtl/solver.hpp"

namespace prandtl {

/// Malformed or invalid configuration. line/column are 1-based; 0 when the
/// error is not tied to a position (e.g. a missing key).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// One `key = value` entry with the position of its value.
struct IniValue {
  std::string text;
  int line = 0;
  int column = 0;
  int key_column = 0;
};

/// Flat view of an INI file: "section.key" -> value. Keys outside any
/// section are rejected, as are duplicates and malformed lines. `#` and `;`
/// start comments at the beginning of a line or after whitespace.
std::map<std::string, IniValue> parse_ini(std::string_view text, const std::string& source);

enum class ScenarioKind { Simulate, Linstab, GevreyFit, VerifyWeights, VerifyEstimates, SynthData };

const char* to_string(ScenarioKind kind);
/// Throws std::invalid_argument for unknown names.
ScenarioKind parse_scenario_kind(std::string_view name);

struct GridSpec {
  std::size_t nx = 128;
  std::size_t ny = 257;
  double ymax = 60.0;
  double stretch = 0.0;
};

enum class EulerKind { Zero, Constant, Cosine, Sampled };

/// Outer flow registry: zero, constant c, a*cos(x), or a sampled file of
/// lines `t, U(x_0), ..., U(x_{n-1})` on the uniform x-grid.
struct EulerSpec {
  EulerKind kind = EulerKind::Zero;
  double value = 0.0;
  std::filesystem::path path;
};

enum class InitialKind { Zero, Synth, Dump };

/// Initial data: synth_gevrey2(delta, amp, profile) or a field dump.
struct InitialSpec {
  InitialKind kind = InitialKind::Synth;
  double delta = 1.0;
  double amp = 0.1;
  std::string profile = "y_exp";  // y e^{-y}; "y2_exp" is y^2 e^{-y}
  std::filesystem::path path;
};

struct OutputSpec {
  std::size_t sample_every = 10;
  std::vector<double> snapshot_times;
};

struct LinstabSpec {
  std::string shear = "critical";  // y e^{-y}; "monotone" is 1 - e^{-y}
  std::size_t ny = 513;
  double ymax = 30.0;
  double stretch = 0.0;
  double kmin = 32.0;
  double kmax = 512.0;
  std::size_t count = 9;
  bool refine = true;
  bool cross_check = true;
  double refine_tolerance = 0.01;
  std::size_t min_modes = 4;
};

struct FitSpec {
  std::size_t seeds = 20;
  double noise = 0.01;
  std::size_t kmin = 0;  // 0 selects the default window
  std::size_t kmax = 0;
};

struct VerifyWeightsSpec {
  std::vector<double> alphas{0.5, 1.0};
  int jmax = 64;
  std::size_t fields = 100;
};

/// Frozen calibration constant for the auxiliary-problem decay rate
/// beta = B* (1 + low_norm); see data/bstar_scan.csv and data/bstar_scan_run5.csv.
inline constexpr double kDefaultBStar = 1.0e4;

/// Index ranges of the verify-estimates checks; -1 skips a check.
struct EstimatesSpec {
  int identity_jmax = 31;
  int residual_jmax = 4;
  std::size_t residual_snapshots = 3;
  double residual_bound = 1e-3;
  int aux_jmax = 8;
  double bstar = kDefaultBStar;
  double duality_tol = 1e-8;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::Simulate;
  std::uint64_t seed = 1;
  /// Relative to the working directory of the run, not the config file.
  std::filesystem::path out_dir = "out";
  GridSpec grid;
  SolverConfig solver;
  double R = 9.0;
  int s = 6;
  EulerSpec euler;
  InitialSpec initial;
  OutputSpec output;
  LinstabSpec linstab;
  FitSpec fit;
  VerifyWeightsSpec verify_weights;
  EstimatesSpec estimates;

  /// Violated parameter constraints; reported, not fatal.
  std::vector<std::string> warnings;
};

/// Parses and validates a config file. Relative input paths are resolved against
/// the file's directory and must exist.
Scenario parse_config(const std::filesystem::path& path);
Scenario parse_config_text(std::string_view text, const std::string& source,
                           const std::filesystem::path& base_dir);

/// Parameter-set checks (alpha in [1/2, gamma-1], m >= (2gamma-1)/alpha + 1,
/// m >= 8, m >= s+2, r > 2gamma, R >= r + 3gamma - 2, R > 2gamma + 1, and
/// tau0 < delta^2/4 for synthetic Gevrey-2 data).
std::vector<std::string> constraint_warnings(const Scenario& s);

/// Every resolved parameter as a config that parse_config accepts, plus an
/// informational [manifest] section.
std::string render_manifest(const Scenario& s, const std::string& git_describe,
                            const std::string& wall_clock, std::size_t threads);

}  // namespace prandtl
