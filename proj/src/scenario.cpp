#include "prandtl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "prandtl/estimates.hpp"
#include "prandtl/field_io.hpp"
#include "prandtl/spectral.hpp"
#include "prandtl/weights.hpp"

namespace prandtl {

namespace {

void say(const RunContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << '\n';
}

void write_manifest(const Scenario& s, const RunContext& ctx) {
  std::ofstream out(s.out_dir / "manifest.ini", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (s.out_dir / "manifest.ini").string());
  out << render_manifest(s, ctx.git_describe, ctx.wall_clock, ctx.threads);
}

std::string dump_name(const std::string& stem, double t) {
  return stem + "_t" + format_exact(t) + ".prgv";
}

SolverConfig solver_config(const Scenario& s) { return s.solver; }

RunOptions run_options(const Scenario& s) {
  RunOptions o;
  o.sample_every = s.output.sample_every;
  o.hs_order = s.s;
  o.snapshot_times = s.output.snapshot_times;
  return o;
}

const std::vector<std::string>& diagnostics_header() {
  static const std::vector<std::string> h{"t",        "gevrey_norm_u",   "gevrey_norm_w",
                                          "radius_delta", "radius_residual", "low_norm",
                                          "hs_norm",  "energy_l2",       "dt_effective"};
  return h;
}

std::vector<double> row_values(const DiagnosticsRow& r) {
  return {r.t,        r.gevrey_norm_u, r.gevrey_norm_w, r.radius_delta, r.radius_residual,
          r.low_norm, r.hs_norm,       r.energy_l2,     r.dt_effective};
}

int run_simulate(const Scenario& s, const RunContext& ctx) {
  const auto grid = build_grid(s);
  const EulerTrace trace = build_trace(s);
  const Field u0 = build_initial(s, grid, s.seed);
  CsvWriter csv(s.out_dir / "diagnostics.csv", diagnostics_header());
  RunOptions opts = run_options(s);
  opts.on_row = [&csv](const DiagnosticsRow& r) { csv.row(row_values(r)); };
  const RunResult res = run(u0, trace, solver_config(s), opts);
  for (const State& snap : res.snapshots) write_field_dump(s.out_dir / dump_name("u", snap.t), snap.u);
  if (res.blew_up) {
    std::ostringstream why;
    why << "blow-up at t=" << format_exact(res.blowup_time) << ": " << res.blowup_reason;
    csv.truncation_marker(why.str());
    say(ctx, why.str());
    return kExitBlowUp;
  }
  say(ctx, "simulate: " + std::to_string(res.rows.size()) + " diagnostics rows");
  return kExitOk;
}

int run_linstab(const Scenario& s, const RunContext& ctx) {
  const auto& l = s.linstab;
  ScanOptions opt;
  opt.refine = l.refine;
  opt.cross_check = l.cross_check;
  opt.refine_tolerance = l.refine_tolerance;
  opt.min_modes = l.min_modes;
  const auto ks = log_spaced(l.kmin, l.kmax, l.count);
  const ScanResult scan = scan_and_fit(ks, build_shear(l), l.ny, l.ymax, l.stretch, opt);
  CsvWriter csv(s.out_dir / "linstab.csv",
                {"k", "sigma_re", "sigma_im", "sigma_refined_re", "sigma_refined_im", "refine_change",
                 "sigma_power_re", "sigma_power_im", "power_rel_diff", "included", "note"});
  for (const ScanRow& r : scan.rows) {
    csv.row_text({format_exact(r.k), format_exact(r.sigma.real()), format_exact(r.sigma.imag()),
                  format_exact(r.sigma_refined.real()), format_exact(r.sigma_refined.imag()),
                  format_exact(r.refine_change), format_exact(r.sigma_power.real()),
                  format_exact(r.sigma_power.imag()), format_exact(r.power_rel_diff),
                  r.included ? "1" : "0", r.note.empty() ? "-" : r.note});
  }
  CsvWriter fit(s.out_dir / "linstab_fit.csv", {"fit_ok", "p", "lambda", "residual", "message"});
  fit.row_text({scan.fit_ok ? "1" : "0", format_exact(scan.fit.p), format_exact(scan.fit.lambda),
                format_exact(scan.fit.residual), scan.message.empty() ? "-" : scan.message});
  say(ctx, scan.fit_ok ? "linstab: fitted exponent p = " + format_exact(scan.fit.p)
                       : "linstab: " + scan.message);
  return kExitOk;
}

int run_gevrey_fit(const Scenario& s, const RunContext& ctx) {
  const auto grid = build_grid(s);
  const std::size_t nx = s.grid.nx;
  const std::size_t kmin = s.fit.kmin ? s.fit.kmin : default_fit_kmin(nx);
  const std::size_t kmax = s.fit.kmax ? s.fit.kmax : default_fit_kmax(nx);
  CsvWriter csv(s.out_dir / "gevrey_fit.csv",
                {"seed", "delta_true", "delta_fit", "abs_error", "c", "residual", "modes"});
  const bool synthetic = s.initial.kind == InitialKind::Synth;
  const std::size_t count = synthetic ? std::max<std::size_t>(1, s.fit.seeds) : 1;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = s.seed + i;
    SpectrumProfile prof = mode_profile(build_initial(s, grid, seed));
    if (s.fit.noise > 0.0) {
      std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
      std::normal_distribution<double> xi(0.0, 1.0);
      for (double& a : prof.amplitudes) a *= 1.0 + s.fit.noise * xi(rng);
    }
    const RadiusFit f = fit_radius(prof, s.solver.gevrey.gamma, kmin, kmax);
    const double truth = synthetic ? s.initial.delta : std::numeric_limits<double>::quiet_NaN();
    csv.row({static_cast<double>(seed), truth, f.delta, std::abs(f.delta - truth), f.c, f.residual,
             static_cast<double>(f.used)});
  }
  say(ctx, "gevrey-fit: " + std::to_string(count) + " fits");
  return kExitOk;
}

int run_verify_weights(const Scenario& s, const RunContext& ctx) {
  const auto grid = build_grid(s);
  CsvWriter csv(s.out_dir / "weights.csv", {"alpha", "lemma", "j", "n", "margin"});
  bool ok = true;
  for (double alpha : s.verify_weights.alphas) {
    const WeightTable table(grid, {s.solver.weights.m, alpha}, s.verify_weights.jmax);
    const LemmaReport rep = check_weight_lemmas(table, s.verify_weights.fields, s.seed);
    for (const auto& r : rep.rows) {
      csv.row_text({format_exact(alpha), r.lemma, std::to_string(r.j), std::to_string(r.n),
                    format_exact(r.margin)});
    }
    ok = ok && rep.holds;
    say(ctx, "verify-weights: alpha = " + format_exact(alpha) +
                 ", min margin = " + format_exact(rep.min_margin));
  }
  return ok ? kExitOk : kExitInvariant;
}

/// Largest relative deviation in the index identity d_x u_j = c_j u_{j+1}.
double index_identity_error(const Field& u, const GevreyParams& p, double t, int j) {
  const DerivedSeq a = compute_uj(u, p, t, j);
  const DerivedSeq b = compute_uj(u, p, t, j + 1);
  const Field lhs = dx_pow(a.uj, 1);
  const double scale = std::max(max_abs(lhs), std::numeric_limits<double>::min());
  const Field diff = lhs - index_ratio(j, p, t) * b.uj;
  return max_abs(diff) / scale;
}

int run_verify_estimates(const Scenario& s, const RunContext& ctx) {
  const auto grid = build_grid(s);
  const EulerTrace trace = build_trace(s);
  const Field u0 = build_initial(s, grid, s.seed);
  const SolverConfig cfg = solver_config(s);
  const GevreyParams& p = cfg.gevrey;
  const auto& e = s.estimates;
  const double dt = cfg.dt;
  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_end / dt));

  RunOptions opts = run_options(s);
  opts.keep_trajectory = e.aux_jmax >= 0;
  // Residual snapshots: consecutive pairs at evenly spaced interior times.
  std::vector<std::size_t> centres;
  if (e.residual_jmax >= 0 && n_steps >= 2) {
    for (std::size_t i = 1; i <= e.residual_snapshots; ++i) {
      std::size_t c = (n_steps * i) / (e.residual_snapshots + 1);
      c = std::clamp<std::size_t>(c, 1, n_steps - 1);
      if (std::find(centres.begin(), centres.end(), c) == centres.end()) centres.push_back(c);
    }
    for (std::size_t c : centres) {
      for (std::size_t d = c; d <= c + 1; ++d) opts.snapshot_times.push_back(d * dt);
    }
  }
  const RunResult res = run(u0, trace, cfg, opts);
  if (res.blew_up) {
    say(ctx, "verify-estimates: blow-up at t=" + format_exact(res.blowup_time));
    return kExitBlowUp;
  }

  CsvWriter csv(s.out_dir / "estimates.csv", {"check", "j", "t", "value", "bound", "margin", "pass"});
  bool ok = true;
  auto emit = [&](const std::string& check, int j, double t, double value, double bound) {
    const bool pass = value <= bound;
    ok = ok && pass;
    csv.row_text({check, std::to_string(j), format_exact(t), format_exact(value),
                  format_exact(bound), format_exact(bound - value), pass ? "1" : "0"});
  };

  const Field start = admissible_initial_data(u0);
  for (int j = 0; j <= e.identity_jmax; ++j) {
    emit("index_identity", j, 0.0, index_identity_error(start, p, 0.0, j), 1e-10);
  }

  if (!centres.empty()) {
    const WeightTable weights(grid, cfg.weights, std::max(e.residual_jmax, 0));
    auto snapshot_at = [&](std::size_t step) -> const State& {
      for (const State& st : res.snapshots) {
        if (std::llround(st.t / dt) == static_cast<long long>(step)) return st;
      }
      throw std::logic_error("verify-estimates: missing snapshot");
    };
    for (std::size_t c : centres) {
      const State& a = snapshot_at(c);
      const State& b = snapshot_at(c + 1);
      for (int j = 0; j <= e.residual_jmax; ++j) {
        const HierarchyResidual h = hierarchy_residual(a.u, b.u, a.t, dt, trace, p, j, cfg.eps);
        const double res_n = weighted_norm(h.residual, j, weights);
        const double scale = weighted_norm(h.fj, j, weights) +
                             (1.0 + p.beta * (j + 1)) * weighted_norm(h.uj, j, weights);
        emit("hierarchy_residual", j, a.t, res_n, e.residual_bound * scale);
      }
    }
  }

  if (e.aux_jmax >= 0) {
    const auto flow = FlowTrajectory::from_states(res.trajectory, trace, dt);
    const WeightTable weights(grid, cfg.weights, e.aux_jmax);
    const double low = sup_low_norm(*flow, weights);
    const double beta = e.bstar * (1.0 + low);
    say(ctx, "verify-estimates: sup low_norm = " + format_exact(low) +
                 ", auxiliary beta = " + format_exact(beta));
    for (int j = 0; j <= e.aux_jmax; ++j) {
      const AuxProblem problem(weights, j, beta, flow);
      // Space-time duality on seeded interior-supported data.
      std::mt19937_64 rng(s.seed + 7919 * static_cast<std::uint64_t>(j));
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      auto random_field = [&] {
        Field f(s.grid.nx, grid);
        for (std::size_t ix = 0; ix < f.nx(); ++ix) {
          for (std::size_t iy = 1; iy < f.ny(); ++iy) f(ix, iy) = unit(rng);
        }
        return f;
      };
      const std::size_t N = problem.steps();
      std::vector<Field> src(N);
      std::vector<Field> frc(N + 1);
      for (auto& f : src) f = random_field();
      frc[0] = Field(s.grid.nx, grid);
      for (std::size_t n = 1; n <= N; ++n) frc[n] = random_field();
      const auto a = problem.solve_forward(src);
      const auto phi = problem.solve_backward(frc);
      double lhs = 0.0;
      double rhs = 0.0;
      double mag = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        lhs += problem.inner(src[n], phi[n]);
        mag += std::abs(problem.inner(src[n], phi[n]));
      }
      for (std::size_t m = 1; m <= N; ++m) rhs += problem.inner(a[m], frc[m]);
      emit("duality", j, 0.0, std::abs(lhs - rhs) / std::max(mag, 1e-300), e.duality_tol);

      AuxFields aux = solve_Hj(problem, res.trajectory, p);
      solve_phij(problem, aux);
      const PhiBoundReport rep = verify_phi_bound(problem, aux);
      emit("phi_bound", j, 0.0, rep.lhs, rep.rhs);
    }
  }
  say(ctx, ok ? "verify-estimates: all checks pass" : "verify-estimates: some checks FAILED");
  return ok ? kExitOk : kExitInvariant;
}

int run_synth_data(const Scenario& s, const RunContext& ctx) {
  const auto grid = build_grid(s);
  const Field u0 = admissible_initial_data(build_initial(s, grid, s.seed));
  write_field_dump(s.out_dir / "initial.prgv", u0);
  const EulerTrace trace = build_trace(s);
  std::ofstream out(s.out_dir / "euler_samples.csv", std::ios::trunc);
  const auto n_steps = static_cast<std::size_t>(std::llround(s.solver.t_end / s.solver.dt));
  std::vector<std::size_t> levels;
  for (std::size_t n = 0; n < n_steps; n += s.output.sample_every) levels.push_back(n);
  levels.push_back(n_steps);
  for (std::size_t n : levels) {
    const double t = static_cast<double>(n) * s.solver.dt;
    out << format_exact(t);
    for (double v : trace.sample(t, s.grid.nx)) out << ", " << format_exact(v);
    out << '\n';
  }
  say(ctx, "synth-data: wrote initial.prgv and euler_samples.csv");
  return kExitOk;
}

}  // namespace

std::shared_ptr<const YGrid> build_grid(const Scenario& s) {
  return YGrid::build(s.grid.ny, s.grid.ymax, s.grid.stretch);
}

EulerTrace read_euler_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open Euler samples " + path.string());
  std::vector<double> times;
  std::vector<std::vector<double>> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number");
      }
    }
    if (cells.size() < 2) throw std::runtime_error(path.string() + ": line without samples");
    times.push_back(cells.front());
    values.emplace_back(cells.begin() + 1, cells.end());
  }
  return EulerTrace::sampled(std::move(times), std::move(values));
}

EulerTrace build_trace(const Scenario& s) {
  switch (s.euler.kind) {
    case EulerKind::Zero: return EulerTrace::zero();
    case EulerKind::Constant: return EulerTrace::constant(s.euler.value);
    case EulerKind::Cosine: return EulerTrace::cosine(s.euler.value);
    case EulerKind::Sampled: return read_euler_samples(s.euler.path);
  }
  return EulerTrace::zero();
}

Field build_initial(const Scenario& s, const std::shared_ptr<const YGrid>& grid, std::uint64_t seed) {
  switch (s.initial.kind) {
    case InitialKind::Zero: return Field(s.grid.nx, grid);
    case InitialKind::Dump: {
      Field f = read_field_dump(s.initial.path, grid);
      if (f.nx() != s.grid.nx) throw std::runtime_error("initial dump nx differs from grid.nx");
      return f;
    }
    case InitialKind::Synth: break;
  }
  std::function<double(double)> g = [](double y) { return y * std::exp(-y); };
  if (s.initial.profile == "y2_exp") g = [](double y) { return y * y * std::exp(-y); };
  return synth_gevrey2(s.initial.delta, s.initial.amp, g, seed, s.grid.nx, grid);
}

ShearFlow build_shear(const LinstabSpec& spec) {
  return spec.shear == "monotone" ? ShearFlow::monotone() : ShearFlow::critical_point();
}

std::vector<double> log_spaced(double a, double b, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {a};
  std::vector<double> out(count);
  const double la = std::log(a);
  const double lb = std::log(b);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = a;
  out.back() = b;
  return out;
}

int run_scenario(const Scenario& s, const RunContext& ctx) {
  std::filesystem::create_directories(s.out_dir);
  for (const auto& w : s.warnings) say(ctx, "warning: " + w);
  write_manifest(s, ctx);
  switch (s.kind) {
    case ScenarioKind::Simulate: return run_simulate(s, ctx);
    case ScenarioKind::Linstab: return run_linstab(s, ctx);
    case ScenarioKind::GevreyFit: return run_gevrey_fit(s, ctx);
    case ScenarioKind::VerifyWeights: return run_verify_weights(s, ctx);
    case ScenarioKind::VerifyEstimates: return run_verify_estimates(s, ctx);
    case ScenarioKind::SynthData: return run_synth_data(s, ctx);
  }
  return kExitUsage;
}

}  // namespace prandtl
