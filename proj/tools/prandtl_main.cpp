#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "prandtl/config.hpp"
#include "prandtl/parallel.hpp"
#include "prandtl/scenario.hpp"

#ifndef PRANDTL_GIT_DESCRIBE
#define PRANDTL_GIT_DESCRIBE "unknown"
#endif

namespace {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<std::size_t> env_threads() {
  const char* v = std::getenv("PRANDTL_THREADS");
  if (!v || !*v) return std::nullopt;
  try {
    const long n = std::stol(v);
    if (n > 0) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  std::cerr << "warning: ignoring PRANDTL_THREADS='" << v << "'\n";
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gevrey-class Prandtl boundary layer toolkit"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t threads = 0;

  const char* kinds[] = {"simulate", "linstab", "gevrey-fit", "verify-weights", "verify-estimates",
                         "synth-data"};
  const char* help[] = {"integrate the Prandtl system and write diagnostics",
                        "shear-flow growth-rate scan and power-law fit",
                        "Gevrey radius fits on synthetic or dumped data",
                        "weight-lemma margins",
                        "hierarchy, duality and auxiliary-field checks",
                        "write synthetic initial data and sampled Euler trace"};
  for (int i = 0; i < 6; ++i) {
    CLI::App* sub = app.add_subcommand(kinds[i], help[i]);
    sub->add_option("--config", config_path, "scenario file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides scenario.out)");
    sub->add_option("--seed", seed, "RNG seed (overrides scenario.seed)");
    sub->add_option("--threads", threads, "worker threads (default: PRANDTL_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : prandtl::kExitUsage;
  }
  const std::string kind = app.get_subcommands().front()->get_name();
  CLI::App* sub = app.get_subcommands().front();

  prandtl::Scenario scenario;
  try {
    scenario = prandtl::parse_config(config_path);
  } catch (const prandtl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return prandtl::kExitUsage;
  }
  if (kind != prandtl::to_string(scenario.kind)) {
    std::cerr << "config error: " << config_path << " describes a '"
              << prandtl::to_string(scenario.kind) << "' scenario, not '" << kind << "'\n";
    return prandtl::kExitUsage;
  }
  if (sub->count("--out")) scenario.out_dir = out_dir;
  if (sub->count("--seed")) scenario.seed = seed;

  if (sub->count("--threads")) {
    prandtl::set_thread_count(threads);
  } else if (const auto n = env_threads()) {
    prandtl::set_thread_count(*n);
  }

  prandtl::RunContext ctx;
  ctx.threads = prandtl::thread_count();
  ctx.git_describe = PRANDTL_GIT_DESCRIBE;
  ctx.wall_clock = utc_now();
  ctx.log = &std::cerr;
  try {
    return prandtl::run_scenario(scenario, ctx);
  } catch (const prandtl::BlowUp& e) {
    std::cerr << "blow-up: " << e.what() << '\n';
    return prandtl::kExitBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return prandtl::kExitInvariant;
  }
}
