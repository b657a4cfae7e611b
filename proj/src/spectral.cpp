#include "prandtl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace prandtl {

namespace {

using cplx = std::complex<double>;

// i^j for integer j >= 0.
cplx i_pow(int j) {
  switch (j % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

double multiplicity(std::size_t k, std::size_t nx) { return (k == 0 || 2 * k == nx) ? 1.0 : 2.0; }

}  // namespace

double GevreyParams::tau(double t) const { return tau0 * std::exp(-beta * t); }

double log_m_coefficient(int j, double tau, double gamma, double r) {
  if (j < 0) throw std::invalid_argument("log_m_coefficient: j < 0");
  if (!(tau > 0.0)) throw std::invalid_argument("log_m_coefficient: tau must be positive");
  return (j + 1) * std::log(tau) + r * std::log(static_cast<double>(j + 1)) -
         gamma * std::lgamma(static_cast<double>(j) + 1.0);
}

double m_coefficient(int j, double tau, double gamma, double r) {
  return std::exp(log_m_coefficient(j, tau, gamma, r));
}

SpectralField dx_pow(const SpectralField& f, int j) {
  if (j < 0) throw std::invalid_argument("dx_pow: negative order");
  SpectralField out = f;
  if (j == 0) return out;
  const cplx ij = i_pow(j);
  const std::size_t nyq = f.nx() / 2;
  for (std::size_t k = 0; k < out.nmodes(); ++k) {
    auto m = out.mode(k);
    const cplx factor = (k == nyq) ? cplx{} : ij * std::pow(static_cast<double>(k), j);
    for (auto& c : m) c *= factor;
  }
  return out;
}

Field dx_pow(const Field& f, int j) {
  if (j < 0) throw std::invalid_argument("dx_pow: negative order");
  if (static_cast<std::size_t>(j) > f.nx() / 4) {
    throw std::domain_error("dx_pow: order " + std::to_string(j) + " exceeds nx/4 = " +
                            std::to_string(f.nx() / 4));
  }
  if (j == 0) return f;
  return to_physical(dx_pow(to_spectral(f), j));
}

void dealias(SpectralField& f) {
  const std::size_t K = dealias_cutoff(f.nx());
  for (std::size_t k = K + 1; k < f.nmodes(); ++k) {
    for (auto& c : f.mode(k)) c = cplx{};
  }
}

Field dealias(const Field& f) {
  SpectralField s = to_spectral(f);
  dealias(s);
  return to_physical(s);
}

Field dealiased_product(const Field& a, const Field& b) {
  return dealias(pointwise(dealias(a), dealias(b)));
}

ModeEnergies::ModeEnergies(const Field& f, const WeightTable& weights, int jmax)
    : nx_(f.nx()), nmodes_(f.nx() / 2 + 1), jmax_(jmax) {
  if (jmax < 0 || jmax > weights.jmax()) {
    throw std::invalid_argument("ModeEnergies: jmax outside the weight table");
  }
  if (weights.grid().size() != f.ny()) throw std::invalid_argument("ModeEnergies: grid mismatch");
  const SpectralField s = to_spectral(f);
  const auto w = weights.grid().qweights();
  energy_.assign(static_cast<std::size_t>(jmax_ + 1) * nmodes_, 0.0);
  for (int j = 0; j <= jmax_; ++j) {
    const auto rho = weights.rho(j);
    for (std::size_t k = 0; k < nmodes_; ++k) {
      const auto m = s.mode(k);
      double acc = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i) acc += std::norm(m[i]) * rho[i] * w[i];
      energy_[static_cast<std::size_t>(j) * nmodes_ + k] = acc;
    }
  }
}

double ModeEnergies::derivative_norm_sq(int j) const {
  if (j < 0 || j > jmax_) throw std::out_of_range("ModeEnergies: j out of range");
  double acc = 0.0;
  for (std::size_t k = 0; k < nmodes_; ++k) {
    if (j > 0 && (k == 0 || 2 * k == nx_)) continue;
    const double e = energy_[static_cast<std::size_t>(j) * nmodes_ + k];
    acc += multiplicity(k, nx_) * std::pow(static_cast<double>(k), 2 * j) * e;
  }
  return 2.0 * std::numbers::pi * acc;
}

double ModeEnergies::gevrey_norm(double gamma, double tau, double r) const {
  double acc = 0.0;
  for (int j = 0; j <= jmax_; ++j) {
    const double log_m = log_m_coefficient(j, tau, gamma, r);
    for (std::size_t k = 0; k < nmodes_; ++k) {
      if (j > 0 && (k == 0 || 2 * k == nx_)) continue;
      const double e = energy_[static_cast<std::size_t>(j) * nmodes_ + k];
      if (e == 0.0) continue;
      const double log_factor = 2.0 * log_m + (j > 0 ? 2.0 * j * std::log(static_cast<double>(k)) : 0.0);
      acc += multiplicity(k, nx_) * std::exp(log_factor) * e;
    }
  }
  return std::sqrt(2.0 * std::numbers::pi * acc);
}

double gevrey_norm(const Field& f, const GevreyParams& p, double t, const WeightTable& weights) {
  if (p.jmax > weights.jmax()) {
    throw std::invalid_argument("gevrey_norm: jmax " + std::to_string(p.jmax) +
                                " exceeds weight table " + std::to_string(weights.jmax()));
  }
  return ModeEnergies(f, weights, p.jmax).gevrey_norm(p.gamma, p.tau(t), p.r);
}

SpectrumProfile mode_profile(const Field& f) {
  const SpectralField s = to_spectral(f);
  const auto w = f.grid().qweights();
  SpectrumProfile out;
  out.amplitudes.resize(s.nmodes());
  for (std::size_t k = 0; k < s.nmodes(); ++k) {
    const auto m = s.mode(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) acc += std::norm(m[i]) * w[i];
    out.amplitudes[k] = std::sqrt(2.0 * std::numbers::pi * acc);
  }
  return out;
}

RadiusFit fit_radius(const SpectrumProfile& profile, double gamma, std::size_t kmin,
                     std::size_t kmax) {
  if (kmin < 1 || kmax <= kmin) throw std::invalid_argument("fit_radius: need 1 <= kmin < kmax");
  if (!(gamma > 0.0)) throw std::invalid_argument("fit_radius: gamma must be positive");
  const auto& a = profile.amplitudes;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = kmin; k <= kmax && k < a.size(); ++k) {
    if (!(a[k] > 0.0) || !std::isfinite(a[k])) continue;
    xs.push_back(std::pow(static_cast<double>(k), 1.0 / gamma));
    ys.push_back(std::log(a[k]));
  }
  if (xs.size() < 3) {
    throw std::runtime_error("fit_radius: only " + std::to_string(xs.size()) +
                             " usable modes in window");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + slope * xs[i]);
    ss += e * e;
  }
  RadiusFit fit;
  fit.delta = -slope;
  fit.c = std::exp(intercept);
  fit.residual = std::sqrt(ss / n);
  fit.used = xs.size();
  return fit;
}

std::size_t default_fit_kmin(std::size_t nx) { return std::max<std::size_t>(1, nx / 16); }
std::size_t default_fit_kmax(std::size_t nx) { return nx / 3; }

Field synth_gevrey2(double delta, double amp, const std::function<double(double)>& profile_y,
                    std::uint64_t seed, std::size_t nx, std::shared_ptr<const YGrid> grid) {
  if (!(delta > 0.0)) throw std::invalid_argument("synth_gevrey2: delta must be positive");
  if (!(amp >= 0.0)) throw std::invalid_argument("synth_gevrey2: amp must be nonnegative");
  const double g0 = profile_y(0.0);
  if (g0 != 0.0) {
    throw std::invalid_argument("synth_gevrey2: profile must vanish at the wall, g(0) = " +
                                std::to_string(g0));
  }
  SpectralField s(nx, grid);
  std::vector<double> g(s.ny());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = profile_y(grid->node(i));

  std::mt19937_64 rng(seed);
  const std::size_t K = dealias_cutoff(nx);
  for (std::size_t k = 1; k <= K; ++k) {
    const double theta = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 * std::numbers::pi;
    // fhat_{-k} = conj(fhat_k) is implied by the half-spectrum storage.
    const cplx c = amp * std::exp(-delta * std::sqrt(static_cast<double>(k))) *
                   std::polar(1.0, theta);
    auto m = s.mode(k);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = c * g[i];
  }
  return to_physical(s);
}

}  // namespace prandtl
