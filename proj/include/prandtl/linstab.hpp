#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prandtl/ygrid.hpp"

namespace prandtl {

/// Parallel shear flow (U_s(y), 0).
struct ShearFlow {
  std::function<double(double)> us;
  std::function<double(double)> dus;
  std::string label;

  /// U_s = y e^{-y}: one non-degenerate critical point at y = 1.
  static ShearFlow critical_point();
  /// U_s = 1 - e^{-y}: monotone.
  static ShearFlow monotone();
  static ShearFlow constant(double c);
  static ShearFlow zero();
  /// Adds c to U_s.
  ShearFlow shifted(double c) const;
};

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Linearised operator for mode e^{ikx}:
///   L_k u = -ik U_s u + ik U_s' int_0^y u + d_y^2 u,
/// acting on the interior nodes 1..ny-2 (u = 0 at both ends has been
/// eliminated, which is the same as Dirichlet rows at the ends). The
/// antiderivative is the cumulative trapezoid, d_y^2 the three-point stencil.
CMatrix build_linop(double k, const ShearFlow& shear, const YGrid& grid);

enum class EigenMethod { Dense, Power };

const char* to_string(EigenMethod m);

struct ModeResult {
  double k = 0.0;
  std::complex<double> sigma;
  /// Eigenfunction on all ny nodes (zero at both ends), unit L^2_y norm.
  std::vector<std::complex<double>> eigfun;
  EigenMethod method = EigenMethod::Dense;
  /// ||L v - sigma v|| for the unit (Euclidean) interior eigenvector.
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Leading (largest real part) eigenvalue of L_k. Dense uses LAPACK zgeev;
/// Power iterates the exact propagator e^{L_k T} with T doubled until the
/// Rayleigh quotient settles. Throws std::runtime_error on non-convergence.
ModeResult growth_rate(double k, const ShearFlow& shear, const YGrid& grid,
                       EigenMethod method = EigenMethod::Dense);

/// Least-squares fit log y = log lambda + p log x.
struct PowerLawFit {
  double p = 0.0;
  double lambda = 0.0;
  double residual = 0.0;
};

/// Throws std::invalid_argument on mismatched or non-positive data.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

struct ScanOptions {
  bool refine = true;        // recompute on 2ny-1 nodes
  bool cross_check = true;   // power-iteration estimate
  double refine_tolerance = 0.01;
  std::size_t min_modes = 4;
};

struct ScanRow {
  double k = 0.0;
  std::complex<double> sigma;
  std::complex<double> sigma_refined;
  double refine_change = 0.0;   // relative change of Re sigma under refinement
  std::complex<double> sigma_power;
  double power_rel_diff = 0.0;  // |sigma_dense - sigma_power| / |sigma_dense|
  bool included = false;
  std::string note;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  bool fit_ok = false;
  PowerLawFit fit;
  std::string message;
};

/// Growth rates for every k (parallel over k, merged in input order), then
/// the power-law fit of Re sigma_k over the modes that are unstable and
/// grid-converged. Fewer than min_modes such modes leaves fit_ok = false.
ScanResult scan_and_fit(const std::vector<double>& ks, const ShearFlow& shear, std::size_t ny,
                        double ymax, double stretch, const ScanOptions& options = {});

/// Discretised resolvent operator
///   (lambda + ik U_s) Psi' - ik U_s' Psi - Psi''' = f,
///   Psi(0) = Psi'(0) = 0, Psi'(ymax) = 0,
/// with five-point stencils for Psi' and Psi''' (centred where possible).
/// Row layout: 0 -> Psi(0), 1 -> Psi'(0), 2..ny-2 -> equation,
/// ny-1 -> Psi'(ymax).
struct ResolventResult {
  std::vector<std::complex<double>> psi;
  double rcond = 0.0;     // reciprocal 1-norm condition estimate
  double residual = 0.0;  // ||A psi - b|| / ||b|| (0 if b = 0)
};

ResolventResult resolvent_solve(std::complex<double> lambda, double k, const ShearFlow& shear,
                                const std::vector<std::complex<double>>& rhs, const YGrid& grid);

/// The banded operator above applied to psi (boundary rows included).
std::vector<std::complex<double>> resolvent_apply(std::complex<double> lambda, double k,
                                                  const ShearFlow& shear,
                                                  const std::vector<std::complex<double>>& psi,
                                                  const YGrid& grid);

}  // namespace prandtl
