#pragma once

#include <cstddef>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "prandtl/config.hpp"
#include "prandtl/field.hpp"
#include "prandtl/linstab.hpp"
#include "prandtl/solver.hpp"
#include "prandtl/ygrid.hpp"

namespace prandtl {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitBlowUp = 3,
  kExitInvariant = 4,
};

struct RunContext {
  std::size_t threads = 1;
  std::string git_describe;
  std::string wall_clock;
  std::ostream* log = nullptr;  // progress and warnings; may be null
};

std::shared_ptr<const YGrid> build_grid(const Scenario& s);
EulerTrace build_trace(const Scenario& s);
/// Reads a sampled Euler file: one line per time, `t, U(x_0), ..., U(x_{n-1})`.
EulerTrace read_euler_samples(const std::filesystem::path& path);
/// Initial data from the scenario; synthetic data uses `seed`.
Field build_initial(const Scenario& s, const std::shared_ptr<const YGrid>& grid,
                    std::uint64_t seed);
ShearFlow build_shear(const LinstabSpec& spec);
/// count points from a to b, equally spaced in log, endpoints exact.
std::vector<double> log_spaced(double a, double b, std::size_t count);

/// Runs one scenario, writing its outputs and manifest.ini under
/// s.out_dir. Returns one of ExitCode.
int run_scenario(const Scenario& s, const RunContext& ctx);

}  // namespace prandtl
