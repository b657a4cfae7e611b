#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "prandtl/ygrid.hpp"

namespace prandtl {

/// Real scalar on the periodic-x / truncated-y grid. x is sampled uniformly
/// on [0, 2*pi) with nx points; value(ix, iy) is stored at ix * ny + iy so
/// each x-station is a contiguous y-profile.
class Field {
 public:
  Field() = default;
  /// Zero field. nx must be a power of two (>= 4).
  Field(std::size_t nx, std::shared_ptr<const YGrid> grid);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return grid_ ? grid_->size() : 0; }
  const YGrid& grid() const { return *grid_; }
  const std::shared_ptr<const YGrid>& grid_ptr() const { return grid_; }

  double x(std::size_t ix) const;

  double& operator()(std::size_t ix, std::size_t iy) { return values_[ix * ny() + iy]; }
  double operator()(std::size_t ix, std::size_t iy) const { return values_[ix * ny() + iy]; }

  std::span<double> row(std::size_t ix) { return {values_.data() + ix * ny(), ny()}; }
  std::span<const double> row(std::size_t ix) const { return {values_.data() + ix * ny(), ny()}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const Field& other) const;
  bool all_finite() const;
  /// Throws std::runtime_error naming `what` if any value is NaN or Inf.
  void require_finite(const char* what) const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

  /// Fills from f(x, y).
  template <class F>
  static Field sample(std::size_t nx, std::shared_ptr<const YGrid> grid, F&& f) {
    Field out(nx, std::move(grid));
    for (std::size_t ix = 0; ix < out.nx(); ++ix) {
      const double xv = out.x(ix);
      for (std::size_t iy = 0; iy < out.ny(); ++iy) out(ix, iy) = f(xv, out.grid().node(iy));
    }
    return out;
  }

 private:
  std::size_t nx_ = 0;
  std::shared_ptr<const YGrid> grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Pointwise product a .* b (no dealiasing).
Field pointwise(const Field& a, const Field& b);

/// Max |f| over the grid.
double max_abs(const Field& f);

/// Half-spectrum in x: coefficient (k, iy) for k = 0..nx/2, normalised so
/// that f(x) = sum_{k=-nx/2}^{nx/2-1} fhat_k e^{ikx}.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(std::size_t nx, std::shared_ptr<const YGrid> grid);

  std::size_t nx() const { return nx_; }
  std::size_t nmodes() const { return nx_ / 2 + 1; }
  std::size_t ny() const { return grid_ ? grid_->size() : 0; }
  const YGrid& grid() const { return *grid_; }
  const std::shared_ptr<const YGrid>& grid_ptr() const { return grid_; }

  std::span<std::complex<double>> mode(std::size_t k) { return {coef_.data() + k * ny(), ny()}; }
  std::span<const std::complex<double>> mode(std::size_t k) const {
    return {coef_.data() + k * ny(), ny()};
  }
  std::span<std::complex<double>> coefficients() { return coef_; }
  std::span<const std::complex<double>> coefficients() const { return coef_; }

 private:
  std::size_t nx_ = 0;
  std::shared_ptr<const YGrid> grid_;
  std::vector<std::complex<double>> coef_;
};

SpectralField to_spectral(const Field& f);
Field to_physical(const SpectralField& s);

/// y-operators applied to every x-station.
Field dy_field(const Field& f);
Field dyy_field(const Field& f);
Field antideriv_field(const Field& f);

/// One-dimensional periodic transforms of nx samples on [0, 2*pi), with
/// the same normalisation as to_spectral.
std::vector<std::complex<double>> rfft_x(std::span<const double> samples);
std::vector<double> irfft_x(std::span<const std::complex<double>> coef, std::size_t nx);

/// Largest wavenumber kept by the 2/3 rule: K = floor((nx - 1) / 3).
std::size_t dealias_cutoff(std::size_t nx);

}  // namespace prandtl
