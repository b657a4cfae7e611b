#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "prandtl/config.hpp"
#include "prandtl/estimates.hpp"
#include "prandtl/field_io.hpp"
#include "prandtl/parallel.hpp"
#include "prandtl/scenario.hpp"

/// Calibration scan for the auxiliary-problem damping beta = B* (1 + low).
/// For every B* and every j <= estimates.aux_jmax of a verify-estimates
/// scenario it records both sides of the phi_j energy inequality.
int main(int argc, char** argv) {
  CLI::App app{"B* calibration scan for the phi_j energy inequality"};
  std::string config_path;
  std::string out_path = "bstar_scan.csv";
  std::vector<double> bstars;
  std::size_t threads = 1;
  app.add_option("--config", config_path, "verify-estimates scenario")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "output CSV");
  app.add_option("--bstar", bstars, "B* values (default: decades 1e-12 .. 1e4)");
  app.add_option("--threads", threads)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  if (bstars.empty()) {
    for (int e = -12; e <= 4; ++e) bstars.push_back(std::pow(10.0, e));
  }
  try {
    prandtl::set_thread_count(threads);
    const prandtl::Scenario s = prandtl::parse_config(config_path);
    if (s.estimates.aux_jmax < 0) {
      std::cerr << "bstar_scan: scenario has estimates.aux_jmax = -1\n";
      return prandtl::kExitUsage;
    }
    const auto grid = prandtl::build_grid(s);
    const prandtl::EulerTrace trace = prandtl::build_trace(s);
    const prandtl::Field u0 = prandtl::build_initial(s, grid, s.seed);
    prandtl::RunOptions opts;
    opts.keep_trajectory = true;
    opts.sample_every = s.output.sample_every;
    const prandtl::RunResult res = prandtl::run(u0, trace, s.solver, opts);
    if (res.blew_up) {
      std::cerr << "bstar_scan: blow-up at t=" << res.blowup_time << "\n";
      return prandtl::kExitBlowUp;
    }
    const auto flow = prandtl::FlowTrajectory::from_states(res.trajectory, trace, s.solver.dt);
    const prandtl::WeightTable weights(grid, s.solver.weights, s.estimates.aux_jmax);
    const double low = prandtl::sup_low_norm(*flow, weights);
    std::cout << "sup low_norm = " << prandtl::format_exact(low) << "\n";

    prandtl::CsvWriter csv(out_path, {"bstar", "beta", "j", "lhs", "rhs", "margin", "holds"});
    for (double b : bstars) {
      const double beta = b * (1.0 + low);
      int failures = 0;
      for (int j = 0; j <= s.estimates.aux_jmax; ++j) {
        const prandtl::AuxProblem problem(weights, j, beta, flow);
        prandtl::AuxFields aux = prandtl::solve_Hj(problem, res.trajectory, s.solver.gevrey);
        prandtl::solve_phij(problem, aux);
        const prandtl::PhiBoundReport rep = prandtl::verify_phi_bound(problem, aux);
        failures += rep.holds ? 0 : 1;
        csv.row_text({prandtl::format_exact(b), prandtl::format_exact(beta), std::to_string(j),
                      prandtl::format_exact(rep.lhs), prandtl::format_exact(rep.rhs),
                      prandtl::format_exact(rep.margin), rep.holds ? "1" : "0"});
      }
      std::cout << "B* = " << b << ": " << failures << " failing j\n";
    }
  } catch (const prandtl::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return prandtl::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "bstar_scan: " << e.what() << "\n";
    return prandtl::kExitInvariant;
  }
  return prandtl::kExitOk;
}
