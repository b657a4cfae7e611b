#include "prandtl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "prandtl/estimates.hpp"
#include "prandtl/parallel.hpp"

namespace prandtl {

namespace {

/// Beyond this many advective substeps per step the state is treated as
/// blown up.
constexpr double kMaxSubsteps = 1.0e6;

using cplx = std::complex<double>;

std::vector<double> project_band(std::span<const double> samples) {
  auto coef = rfft_x(samples);
  const std::size_t K = dealias_cutoff(samples.size());
  for (std::size_t k = K + 1; k < coef.size(); ++k) coef[k] = cplx{};
  return irfft_x(coef, samples.size());
}

std::vector<double> derivative_x(std::span<const double> samples) {
  auto coef = rfft_x(samples);
  const std::size_t nyq = samples.size() / 2;
  for (std::size_t k = 0; k < coef.size(); ++k) {
    coef[k] = (k == nyq) ? cplx{} : coef[k] * cplx(0.0, static_cast<double>(k));
  }
  return irfft_x(coef, samples.size());
}

double x_node(std::size_t ix, std::size_t nx) {
  return 2.0 * std::numbers::pi * static_cast<double>(ix) / static_cast<double>(nx);
}

}  // namespace

EulerTrace EulerTrace::zero() {
  return {[](double, double) { return 0.0; }, [](double, double) { return 0.0; }, "zero"};
}

EulerTrace EulerTrace::constant(double c) {
  return {[c](double, double) { return c; }, [](double, double) { return 0.0; },
          "constant " + std::to_string(c)};
}

EulerTrace EulerTrace::cosine(double a) {
  return {[a](double, double x) { return a * std::cos(x); }, [](double, double) { return 0.0; },
          "cosine " + std::to_string(a)};
}

EulerTrace EulerTrace::sampled(std::vector<double> times, std::vector<std::vector<double>> values) {
  if (times.empty() || times.size() != values.size()) {
    throw std::invalid_argument("EulerTrace::sampled: need one row of values per time");
  }
  if (!std::is_sorted(times.begin(), times.end()) ||
      std::adjacent_find(times.begin(), times.end()) != times.end()) {
    throw std::invalid_argument("EulerTrace::sampled: times must be strictly increasing");
  }
  const std::size_t nx = values.front().size();
  for (const auto& row : values) {
    if (row.size() != nx) throw std::invalid_argument("EulerTrace::sampled: ragged rows");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("EulerTrace::sampled: non-finite value");
    }
  }
  auto data = std::make_shared<std::pair<std::vector<double>, std::vector<std::vector<double>>>>(
      std::move(times), std::move(values));

  // Index of the interval [t_i, t_{i+1}] containing t, or npos outside.
  auto locate = [data](double t) -> std::size_t {
    const auto& ts = data->first;
    if (ts.size() < 2 || t <= ts.front() || t >= ts.back()) return std::string::npos;
    return static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
  };
  auto column = [data](double x) {
    const std::size_t n = data->second.front().size();
    const double pos = x / (2.0 * std::numbers::pi) * static_cast<double>(n);
    const auto ix = static_cast<std::size_t>(std::llround(pos)) % n;
    if (std::abs(pos - std::round(pos)) > 1e-9) {
      throw std::invalid_argument("EulerTrace::sampled: x is not a sample node");
    }
    return ix;
  };

  EulerTrace trace;
  trace.ue = [data, locate, column](double t, double x) {
    const auto& ts = data->first;
    const auto& vs = data->second;
    const std::size_t ix = column(x);
    const std::size_t i = locate(t);
    if (i == std::string::npos) return t <= ts.front() ? vs.front()[ix] : vs.back()[ix];
    const double s = (t - ts[i]) / (ts[i + 1] - ts[i]);
    return (1.0 - s) * vs[i][ix] + s * vs[i + 1][ix];
  };
  trace.due_dt = [data, locate, column](double t, double x) {
    const auto& ts = data->first;
    const auto& vs = data->second;
    const std::size_t ix = column(x);
    const std::size_t i = locate(t);
    if (i == std::string::npos) return 0.0;
    return (vs[i + 1][ix] - vs[i][ix]) / (ts[i + 1] - ts[i]);
  };
  trace.label = "sampled";
  return trace;
}

std::vector<double> EulerTrace::sample(double t, std::size_t nx) const {
  std::vector<double> s(nx);
  for (std::size_t ix = 0; ix < nx; ++ix) s[ix] = ue(t, x_node(ix, nx));
  return project_band(s);
}

std::vector<double> EulerTrace::sample_dt(double t, std::size_t nx) const {
  std::vector<double> s(nx);
  for (std::size_t ix = 0; ix < nx; ++ix) s[ix] = due_dt(t, x_node(ix, nx));
  return project_band(s);
}

Lift lift_fields(const EulerTrace& trace, double t, std::size_t nx,
                 const std::shared_ptr<const YGrid>& grid) {
  const auto UE = trace.sample(t, nx);
  const auto DUE = derivative_x(UE);
  Lift lift{Field(nx, grid), Field(nx, grid), Field(nx, grid), Field(nx, grid)};
  for (std::size_t iy = 0; iy < grid->size(); ++iy) {
    const double y = grid->node(iy);
    const double decay = std::exp(-y);
    const double one_minus = -std::expm1(-y);
    const double ramp = y + std::expm1(-y);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      lift.ue(ix, iy) = one_minus * UE[ix];
      lift.ve(ix, iy) = -ramp * DUE[ix];
      lift.ue_y(ix, iy) = decay * UE[ix];
      lift.ve_y(ix, iy) = -one_minus * DUE[ix];
    }
  }
  return lift;
}

Field forcing_fe(const EulerTrace& trace, double t, std::size_t nx,
                 const std::shared_ptr<const YGrid>& grid) {
  const auto UE = trace.sample(t, nx);
  const auto UEt = trace.sample_dt(t, nx);
  const auto DUE = derivative_x(UE);
  std::vector<double> prod(nx);
  for (std::size_t ix = 0; ix < nx; ++ix) prod[ix] = UE[ix] * DUE[ix];
  prod = project_band(prod);

  Field fe(nx, grid);
  for (std::size_t iy = 0; iy < grid->size(); ++iy) {
    const double y = grid->node(iy);
    const double decay = std::exp(-y);
    const double ramp = y + std::expm1(-y);
    // d_t U^E - d_t U^e = e^{-y} d_t U^E
    // U^E d_x U^E - U^e d_x U^e = (1 - (1 - e^{-y})^2) U^E d_x U^E
    // -V^e d_y U^e = (y + e^{-y} - 1) e^{-y} U^E d_x U^E
    // d_y^2 U^e = -e^{-y} U^E
    const double prod_factor = decay * (2.0 - decay) + ramp * decay;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      fe(ix, iy) = decay * UEt[ix] + prod_factor * prod[ix] - decay * UE[ix];
    }
  }
  return fe;
}

Field v_from_u(const Field& u) {
  Field v = antideriv_field(dx_pow(u, 1));
  v *= -1.0;
  return v;
}

double divergence_residual(const Field& u, const Field& v) {
  if (!u.same_shape(v)) throw std::invalid_argument("divergence_residual: shape mismatch");
  const Field ux = dx_pow(u, 1);
  const YGrid& g = u.grid();
  double worst = 0.0;
  for (std::size_t ix = 0; ix < u.nx(); ++ix) {
    for (std::size_t iy = 0; iy + 1 < u.ny(); ++iy) {
      const double dv = (v(ix, iy + 1) - v(ix, iy)) / g.spacing(iy);
      const double du = 0.5 * (ux(ix, iy) + ux(ix, iy + 1));
      worst = std::max(worst, std::abs(du + dv));
    }
  }
  return worst;
}

Field admissible_initial_data(const Field& u0) {
  Field u = dealias(u0);
  for (std::size_t ix = 0; ix < u.nx(); ++ix) {
    u(ix, 0) = 0.0;
    u(ix, u.ny() - 1) = 0.0;
  }
  return u;
}

Stepper::Stepper(std::size_t nx, std::shared_ptr<const YGrid> grid, EulerTrace trace,
                 SolverConfig cfg)
    : nx_(nx), grid_(std::move(grid)), trace_(std::move(trace)), cfg_(std::move(cfg)) {
  if (!(cfg_.dt > 0.0)) throw std::invalid_argument("Stepper: dt must be positive");
  if (!(cfg_.eps >= 0.0)) throw std::invalid_argument("Stepper: eps must be nonnegative");
  if (!(cfg_.cfl_guard > 0.0 && cfg_.cfl_guard <= 1.0)) {
    throw std::invalid_argument("Stepper: cfl_guard must lie in (0, 1]");
  }
}

void Stepper::prepare_factors(double dt) {
  if (dt == factor_dt_) return;
  const std::size_t K = dealias_cutoff(nx_);
  factors_.assign(K + 1, TridiagonalFactor{});
  const EndConditions bc{EndCondition::Dirichlet0, EndCondition::Dirichlet0};
  std::vector<double> a(grid_->size());
  for (std::size_t k = 0; k <= K; ++k) {
    if (k > 0 && cfg_.eps == 0.0) {
      factors_[k] = factors_[0];
      continue;
    }
    std::fill(a.begin(), a.end(), 1.0 / dt + cfg_.eps * static_cast<double>(k * k));
    factors_[k] = TridiagonalFactor(helmholtz_matrix(*grid_, a, 1.0, bc));
  }
  factor_dt_ = dt;
}

double Stepper::courant(const State& state, double dt) const {
  const Field v = v_from_u(state.u);
  const Lift lift = lift_fields(trace_, state.t, nx_, grid_);
  const double inv_dx = static_cast<double>(nx_) / (2.0 * std::numbers::pi);
  const std::size_t ny = grid_->size();
  double c = 0.0;
  for (std::size_t ix = 0; ix < nx_; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const double hy = (iy == 0) ? grid_->spacing(0)
                        : (iy + 1 == ny)
                            ? grid_->spacing(ny - 2)
                            : std::min(grid_->spacing(iy - 1), grid_->spacing(iy));
      const double up = state.u(ix, iy) + lift.ue(ix, iy);
      const double vp = v(ix, iy) + lift.ve(ix, iy);
      c = std::max(c, std::abs(up) * inv_dx + std::abs(vp) / hy);
    }
  }
  return c * dt;
}

Field Stepper::explicit_tendency(const State& state) const {
  const Field& u = state.u;
  const SpectralField uh = to_spectral(u);
  const Field ux = to_physical(dx_pow(uh, 1));
  const Field uy = dy_field(u);
  Field v = antideriv_field(ux);
  v *= -1.0;
  const Lift lift = lift_fields(trace_, state.t, nx_, grid_);
  Field rhs = forcing_fe(trace_, state.t, nx_, grid_);
  if (source_) {
    Field extra(nx_, grid_);
    source_(state.t, extra);
    rhs += extra;
  }

  // Physical-space part of N(u). The u d_x u term is split half advective
  // (here) and half conservative (added spectrally below).
  Field usq(nx_, grid_);
  {
    auto r = rhs.values();
    auto sq = usq.values();
    const auto uv = u.values();
    const auto uxv = ux.values();
    const auto uyv = uy.values();
    const auto vv = v.values();
    const auto ue = lift.ue.values();
    const auto ve = lift.ve.values();
    const auto ue_y = lift.ue_y.values();
    const auto ve_y = lift.ve_y.values();
    parallel_for(nx_, [&](std::size_t ix) {
      const std::size_t ny = grid_->size();
      for (std::size_t i = ix * ny; i < (ix + 1) * ny; ++i) {
        const double ue_x = -ve_y[i];
        const double n = 0.5 * uv[i] * uxv[i] + vv[i] * uyv[i] + ue[i] * uxv[i] + ve[i] * uyv[i] +
                         uv[i] * ue_x + vv[i] * ue_y[i];
        r[i] -= n;
        sq[i] = uv[i] * uv[i];
      }
    });
  }
  SpectralField rh = to_spectral(rhs);
  const SpectralField sqh = to_spectral(usq);
  const std::size_t K = dealias_cutoff(nx_);
  for (std::size_t k = 0; k <= K; ++k) {
    auto m = rh.mode(k);
    const auto s = sqh.mode(k);
    const cplx ik(0.0, static_cast<double>(k));
    for (std::size_t iy = 0; iy < m.size(); ++iy) m[iy] -= 0.25 * ik * s[iy];
  }
  dealias(rh);
  return to_physical(rh);
}

void Stepper::substep(State& state, double dt) {
  prepare_factors(dt);
  const Field rhs = explicit_tendency(state);
  SpectralField uh = to_spectral(state.u);
  const SpectralField rh = to_spectral(rhs);
  const std::size_t K = dealias_cutoff(nx_);
  const std::size_t ny = grid_->size();
  parallel_for(uh.nmodes(), [&](std::size_t k) {
    auto m = uh.mode(k);
    if (k > K) {
      std::fill(m.begin(), m.end(), cplx{});
      return;
    }
    const auto r = rh.mode(k);
    for (std::size_t iy = 0; iy < ny; ++iy) m[iy] = m[iy] / dt + r[iy];
    m[0] = cplx{};
    m[ny - 1] = cplx{};
    factors_[k].solve_in_place(m);
  });
  state.u = to_physical(uh);
  state.t += dt;
  if (!state.u.all_finite()) throw BlowUp("non-finite value in u", state.t);
}

StepInfo Stepper::step(State& state) {
  const double c = courant(state, cfg_.dt);
  StepInfo info;
  if (!std::isfinite(c)) throw BlowUp("non-finite Courant number", state.t);
  const double needed = std::ceil(c / cfg_.cfl_guard);
  if (needed > kMaxSubsteps) {
    std::ostringstream msg;
    msg << "Courant number " << c << " needs more than " << kMaxSubsteps << " substeps";
    throw BlowUp(msg.str(), state.t);
  }
  info.substeps = c > cfg_.cfl_guard ? static_cast<std::size_t>(needed) : 1;
  info.dt_effective = cfg_.dt / static_cast<double>(info.substeps);
  const double t0 = state.t;
  for (std::size_t s = 0; s < info.substeps; ++s) substep(state, info.dt_effective);
  // Avoid drift of t from repeated substep additions.
  state.t = t0 + cfg_.dt;
  return info;
}

DiagnosticsRow diagnose(const State& state, const EulerTrace& trace, const SolverConfig& cfg,
                        const WeightTable& weights, int hs_order, double dt_effective) {
  const Field& u = state.u;
  const auto& grid = u.grid_ptr();
  DiagnosticsRow row;
  row.t = state.t;
  row.dt_effective = dt_effective;
  const double tau = cfg.gevrey.tau(state.t);
  row.gevrey_norm_u =
      ModeEnergies(u, weights, cfg.gevrey.jmax).gevrey_norm(cfg.gevrey.gamma, tau, cfg.gevrey.r);

  const Field uy = dy_field(u);
  Field w = uy;
  for (std::size_t ix = 0; ix < w.nx(); ++ix) {
    for (std::size_t iy = 0; iy < w.ny(); ++iy) w(ix, iy) *= 1.0 + grid->node(iy);
  }
  row.gevrey_norm_w =
      ModeEnergies(w, weights, cfg.gevrey.jmax).gevrey_norm(cfg.gevrey.gamma, tau, cfg.gevrey.r);

  const SpectrumProfile profile = mode_profile(u);
  try {
    const RadiusFit fit = fit_radius(profile, cfg.gevrey.gamma, default_fit_kmin(u.nx()),
                                     default_fit_kmax(u.nx()));
    row.radius_delta = fit.delta;
    row.radius_residual = fit.residual;
  } catch (const std::runtime_error&) {
    row.radius_delta = std::numeric_limits<double>::quiet_NaN();
    row.radius_residual = std::numeric_limits<double>::quiet_NaN();
  }

  const Lift lift = lift_fields(trace, state.t, u.nx(), grid);
  const Field up = u + lift.ue;
  const Field vp = v_from_u(u) + lift.ve;
  row.low_norm = low_norm(up, vp, weights).value;
  const Field omega_p = uy + lift.ue_y;
  row.hs_norm = hs_norm(omega_p, hs_order, weights);

  double e = 0.0;
  const auto q = grid->qweights();
  for (std::size_t ix = 0; ix < u.nx(); ++ix) {
    for (std::size_t iy = 0; iy < u.ny(); ++iy) e += u(ix, iy) * u(ix, iy) * q[iy];
  }
  row.energy_l2 = std::sqrt(e * 2.0 * std::numbers::pi / static_cast<double>(u.nx()));
  return row;
}

TripleSample triple_sample(const State& state, const GevreyParams& p, const WeightTable& weights) {
  const Field& u = state.u;
  const auto& grid = u.grid_ptr();
  const Field uy = dy_field(u);
  const Field uyy = dy_field(uy);
  Field w = uy;
  Field wy = uyy;
  for (std::size_t ix = 0; ix < u.nx(); ++ix) {
    for (std::size_t iy = 0; iy < u.ny(); ++iy) {
      const double f = 1.0 + grid->node(iy);
      w(ix, iy) *= f;
      wy(ix, iy) *= f;
    }
  }
  const double tau = p.tau(state.t);
  const double g = p.gamma;
  const ModeEnergies eu(u, weights, p.jmax);
  const ModeEnergies ew(w, weights, p.jmax);
  const ModeEnergies ewy(wy, weights, p.jmax);
  auto sq = [](double x) { return x * x; };
  TripleSample s;
  s.t = state.t;
  s.u_r = sq(eu.gevrey_norm(g, tau, p.r));
  s.u_r_half = sq(eu.gevrey_norm(g, tau, p.r - g / 2.0));
  s.w_r1 = sq(ew.gevrey_norm(g, tau, p.r + 1.0 - g));
  s.w_rhalf = sq(ew.gevrey_norm(g, tau, p.r + 0.5 - g));
  s.wy_rhalf = sq(ewy.gevrey_norm(g, tau, p.r + 0.5 - g));
  return s;
}

RunResult run(const Field& u0, const EulerTrace& trace, const SolverConfig& cfg,
              const RunOptions& options) {
  RunResult result;
  const auto grid = u0.grid_ptr();
  const WeightTable weights(grid, cfg.weights, std::max(cfg.gevrey.jmax, 0));
  Stepper stepper(u0.nx(), grid, trace, cfg);
  State state{admissible_initial_data(u0), 0.0};

  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  const std::size_t every = std::max<std::size_t>(1, options.sample_every);
  std::vector<bool> snapped(options.snapshot_times.size(), false);

  double g0 = 0.0;
  auto record = [&](double dt_eff) {
    DiagnosticsRow row = diagnose(state, trace, cfg, weights, options.hs_order, dt_eff);
    result.rows.push_back(row);
    if (options.on_row) options.on_row(row);
    if (options.record_triple) result.triple.push_back(triple_sample(state, cfg.gevrey, weights));
    return row;
  };
  auto take_snapshots = [&] {
    for (std::size_t i = 0; i < options.snapshot_times.size(); ++i) {
      if (!snapped[i] && std::abs(state.t - options.snapshot_times[i]) <= 0.5 * cfg.dt) {
        result.snapshots.push_back(state);
        snapped[i] = true;
      }
    }
  };

  g0 = record(cfg.dt).gevrey_norm_u;
  take_snapshots();
  if (options.keep_trajectory) result.trajectory.push_back(state);

  for (std::size_t n = 1; n <= n_steps; ++n) {
    StepInfo info;
    try {
      info = stepper.step(state);
    } catch (const BlowUp& e) {
      result.blew_up = true;
      result.blowup_time = e.time();
      result.blowup_reason = e.what();
      return result;
    }
    state.t = static_cast<double>(n) * cfg.dt;
    if (options.keep_trajectory) result.trajectory.push_back(state);
    take_snapshots();
    if (n % every == 0 || n == n_steps) {
      const DiagnosticsRow row = record(info.dt_effective);
      if (g0 > 0.0 && row.gevrey_norm_u > 1e6 * g0) {
        result.blew_up = true;
        result.blowup_time = state.t;
        result.blowup_reason = "Gevrey norm exceeded 1e6 times its initial value";
        return result;
      }
    }
  }
  return result;
}

}  // namespace prandtl
