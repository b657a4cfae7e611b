#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "prandtl/field.hpp"
#include "prandtl/spectral.hpp"
#include "prandtl/weights.hpp"
#include "prandtl/ygrid.hpp"

namespace prandtl {

/// Outer (Euler) tangential velocity U^E(t, x) and its time derivative.
/// Values are sampled on the x-grid and band-limited to the 2/3 cutoff
/// before use, so x-derivatives are taken spectrally.
struct EulerTrace {
  std::function<double(double, double)> ue;
  std::function<double(double, double)> due_dt;
  std::string label;

  static EulerTrace zero();
  static EulerTrace constant(double c);
  /// U^E = a cos x.
  static EulerTrace cosine(double a);
  /// Piecewise-linear interpolation in time between rows of samples taken
  /// on the uniform x-grid of nx = values[i].size() points; constant
  /// extrapolation outside [times.front(), times.back()].
  static EulerTrace sampled(std::vector<double> times, std::vector<std::vector<double>> values);

  /// U^E(t, .) on nx uniform points, projected onto the 2/3 band.
  std::vector<double> sample(double t, std::size_t nx) const;
  std::vector<double> sample_dt(double t, std::size_t nx) const;
};

/// The divergence-free lift matching U^E at infinity,
///   U^e = (1 - e^{-y}) U^E,   V^e = -(y + e^{-y} - 1) d_x U^E,
/// with closed-form y-derivatives.
struct Lift {
  Field ue;
  Field ve;
  Field ue_y;  // e^{-y} U^E
  Field ve_y;  // -(1 - e^{-y}) d_x U^E
};

Lift lift_fields(const EulerTrace& trace, double t, std::size_t nx,
                 const std::shared_ptr<const YGrid>& grid);

/// f^e = d_t U^E + U^E d_x U^E - d_t U^e - U^e d_x U^e - V^e d_y U^e + d_y^2 U^e,
/// with the x-products projected onto the 2/3 band.
Field forcing_fe(const EulerTrace& trace, double t, std::size_t nx,
                 const std::shared_ptr<const YGrid>& grid);

/// v = -int_0^y d_x u (cumulative trapezoid of the spectral derivative).
Field v_from_u(const Field& u);

/// Largest |d_x u + d_y v| on cell midpoints, where d_y v is the cell
/// difference and d_x u the average of its endpoints. Zero to round-off for
/// v = v_from_u(u).
double divergence_residual(const Field& u, const Field& v);

struct SolverConfig {
  double dt = 1e-3;
  double eps = 0.0;
  double t_end = 0.5;
  double cfl_guard = 0.5;
  GevreyParams gevrey;
  WeightParams weights;
};

struct State {
  Field u;
  double t = 0.0;
};

/// Raised when a step produces NaN/Inf. Carries the time of the failed step.
class BlowUp : public std::runtime_error {
 public:
  BlowUp(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct StepInfo {
  std::size_t substeps = 1;
  double dt_effective = 0.0;
};

/// First-order IMEX integrator for the homogenized system
///   d_t u + (u d_x + v d_y) u + (U^e d_x + V^e d_y) u + (u d_x + v d_y) U^e
///     - eps d_x^2 u - d_y^2 u = f^e (+ optional source),
/// with u = 0 at y = 0 and y = ymax. Diffusion is implicit per Fourier mode,
/// everything else explicit. The state stays band-limited to the 2/3 cutoff.
class Stepper {
 public:
  /// source(t, out) overwrites out with an extra right-hand side at time t.
  using Source = std::function<void(double, Field&)>;

  Stepper(std::size_t nx, std::shared_ptr<const YGrid> grid, EulerTrace trace, SolverConfig cfg);

  void set_source(Source source) { source_ = std::move(source); }
  const SolverConfig& config() const { return cfg_; }

  /// Advances by cfg.dt, subdividing so that the advective Courant number
  /// stays below cfg.cfl_guard. Throws BlowUp on non-finite values.
  StepInfo step(State& state);

  /// Advective Courant number of dt for the current state.
  double courant(const State& state, double dt) const;

  /// Explicit right-hand side f^e - N(u) (+ source) at state.t, dealiased.
  Field explicit_tendency(const State& state) const;

 private:
  void substep(State& state, double dt);
  void prepare_factors(double dt);

  std::size_t nx_;
  std::shared_ptr<const YGrid> grid_;
  EulerTrace trace_;
  SolverConfig cfg_;
  Source source_;
  double factor_dt_ = -1.0;
  std::vector<TridiagonalFactor> factors_;  // per mode k = 0..K
};

/// Projects an initial condition onto the solver's state space: 2/3 band,
/// u = 0 at both ends of the y-grid.
Field admissible_initial_data(const Field& u0);

struct DiagnosticsRow {
  double t = 0.0;
  double gevrey_norm_u = 0.0;
  double gevrey_norm_w = 0.0;  // of (1 + y) d_y u
  double radius_delta = 0.0;
  double radius_residual = 0.0;
  double low_norm = 0.0;
  double hs_norm = 0.0;
  double energy_l2 = 0.0;
  double dt_effective = 0.0;
};

/// Squared Gevrey norms feeding the triple norm, at one sample time.
struct TripleSample {
  double t = 0.0;
  double u_r = 0.0;         // ||u||^2_{gamma,tau,r}
  double u_r_half = 0.0;    // ||u||^2_{gamma,tau,r-gamma/2}
  double w_r1 = 0.0;        // ||(1+y) w||^2_{gamma,tau,r+1-gamma}
  double w_rhalf = 0.0;     // ||(1+y) w||^2_{gamma,tau,r+1/2-gamma}
  double wy_rhalf = 0.0;    // ||(1+y) d_y w||^2_{gamma,tau,r+1/2-gamma}
};

struct RunOptions {
  std::size_t sample_every = 10;  // steps between diagnostics rows
  int hs_order = 6;
  bool record_triple = false;
  bool keep_trajectory = false;   // store u after every step
  std::vector<double> snapshot_times;
  /// Invoked after every diagnostics row, e.g. to stream the CSV.
  std::function<void(const DiagnosticsRow&)> on_row;
};

struct RunResult {
  std::vector<DiagnosticsRow> rows;
  std::vector<TripleSample> triple;
  std::vector<State> snapshots;
  std::vector<State> trajectory;
  bool blew_up = false;
  double blowup_time = 0.0;
  std::string blowup_reason;
};

/// Diagnostics of one state. `weights` must cover cfg.gevrey.jmax.
DiagnosticsRow diagnose(const State& state, const EulerTrace& trace, const SolverConfig& cfg,
                        const WeightTable& weights, int hs_order, double dt_effective);
TripleSample triple_sample(const State& state, const GevreyParams& p, const WeightTable& weights);

/// Integrates from u0 at t = 0 to cfg.t_end. Stops early (blew_up = true)
/// on non-finite values or when the Gevrey norm of u exceeds 1e6 times its
/// initial value.
RunResult run(const Field& u0, const EulerTrace& trace, const SolverConfig& cfg,
              const RunOptions& options);

}  // namespace prandtl
