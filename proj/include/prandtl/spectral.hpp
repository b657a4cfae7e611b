#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "prandtl/field.hpp"
#include "prandtl/weights.hpp"

namespace prandtl {

/// Parameters of the Gevrey norm
///   ||f||^2_{gamma,tau,r} = sum_{j<=jmax} M_j^2 ||d_x^j f||_j^2,
///   M_j = tau^{j+1} (j+1)^r / (j!)^gamma,  tau(t) = tau0 exp(-beta t).
struct GevreyParams {
  double gamma = 2.0;
  double tau0 = 0.1;
  double beta = 1.0;
  double r = 5.0;
  int jmax = 32;

  double tau(double t) const;
};

/// log M_j, evaluated through lgamma so that large j does not overflow.
double log_m_coefficient(int j, double tau, double gamma, double r);
double m_coefficient(int j, double tau, double gamma, double r);

/// Spectral j-th x-derivative: multiplies mode k by (ik)^j. The Nyquist
/// mode is dropped for j >= 1. Throws std::domain_error if j > nx/4.
Field dx_pow(const Field& f, int j);
SpectralField dx_pow(const SpectralField& f, int j);

/// Zeroes modes above the 2/3 cutoff.
void dealias(SpectralField& f);
Field dealias(const Field& f);

/// Product a*b with both factors and the result truncated to the 2/3 band.
/// For band-limited inputs this is the exact truncated product.
Field dealiased_product(const Field& a, const Field& b);

/// Per-mode weighted y-energies S_k(j) = sum_i |fhat_k(y_i)|^2 rho_j(y_i) w_i,
/// from which every Gevrey norm of f is a finite sum. Built once per field.
class ModeEnergies {
 public:
  ModeEnergies(const Field& f, const WeightTable& weights, int jmax);

  int jmax() const { return jmax_; }
  std::size_t nmodes() const { return nmodes_; }
  std::size_t nx() const { return nx_; }

  /// ||d_x^j f||_j^2.
  double derivative_norm_sq(int j) const;

  /// Truncated Gevrey norm at radius tau and Sobolev exponent r.
  double gevrey_norm(double gamma, double tau, double r) const;

 private:
  std::size_t nx_;
  std::size_t nmodes_;
  int jmax_;
  std::vector<double> energy_;  // [j * nmodes + k]
};

/// Truncated Gevrey norm with tau = p.tau(t) and jmax = p.jmax. Throws
/// std::invalid_argument if p.jmax exceeds the weight table.
double gevrey_norm(const Field& f, const GevreyParams& p, double t, const WeightTable& weights);

/// a_k = ||fhat(k, .)||_{L^2_y}, scaled so that a_0^2 + 2 sum_{0<k<nx/2} a_k^2
/// + a_{nx/2}^2 equals the L^2 norm squared of f over [0, 2pi) x [0, ymax].
struct SpectrumProfile {
  std::vector<double> amplitudes;
};

SpectrumProfile mode_profile(const Field& f);

/// Least-squares fit log a_k = log c - delta k^{1/gamma} over kmin..kmax.
/// Modes with a_k = 0 are skipped. residual is the RMS misfit in log a_k.
struct RadiusFit {
  double delta = 0.0;
  double c = 0.0;
  double residual = 0.0;
  std::size_t used = 0;
};

/// Throws std::invalid_argument for an empty window and std::runtime_error
/// when fewer than three modes are usable.
RadiusFit fit_radius(const SpectrumProfile& profile, double gamma, std::size_t kmin,
                     std::size_t kmax);

/// Default fit window [nx/16, nx/3].
std::size_t default_fit_kmin(std::size_t nx);
std::size_t default_fit_kmax(std::size_t nx);

/// Gevrey-2 data: mode k = 1..K carries amp e^{-delta sqrt k} e^{i theta_k} g(y)
/// with theta_k uniform from a seeded mt19937_64. k = 0 and modes above the
/// 2/3 cutoff are zero. Throws std::invalid_argument if g(0) != 0,
/// delta <= 0 or amp < 0.
Field synth_gevrey2(double delta, double amp, const std::function<double(double)>& profile_y,
                    std::uint64_t seed, std::size_t nx, std::shared_ptr<const YGrid> grid);

}  // namespace prandtl
