#include "prandtl/field.hpp"

#include <fftw3.h>

#include "prandtl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace prandtl {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 4 && (n & (n - 1)) == 0; }

// Batched 1D transforms along x, one per y-node (stride ny).
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(std::size_t nx, std::size_t ny) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find({nx, ny});
    if (it != plans_.end()) return it->second;

    std::vector<double> real(nx * ny);
    std::vector<std::complex<double>> cplx((nx / 2 + 1) * ny);
    const int n = static_cast<int>(nx);
    const int howmany = static_cast<int>(ny);
    const int stride = static_cast<int>(ny);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_many_dft_r2c(1, &n, howmany, real.data(), nullptr, stride, 1,
                                       reinterpret_cast<fftw_complex*>(cplx.data()), nullptr,
                                       stride, 1, flags);
    p.backward = fftw_plan_many_dft_c2r(1, &n, howmany,
                                        reinterpret_cast<fftw_complex*>(cplx.data()), nullptr,
                                        stride, 1, real.data(), nullptr, stride, 1, flags);
    if (!p.forward || !p.backward) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(std::make_pair(nx, ny), p);
    return p;
  }

  ~PlanCache() {
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, std::size_t>, PlanPair> plans_;
};

}  // namespace

Field::Field(std::size_t nx, std::shared_ptr<const YGrid> grid)
    : nx_(nx), grid_(std::move(grid)) {
  if (!is_power_of_two(nx)) {
    throw std::invalid_argument("Field: nx must be a power of two >= 4, got " + std::to_string(nx));
  }
  if (!grid_) throw std::invalid_argument("Field: null grid");
  values_.assign(nx_ * grid_->size(), 0.0);
}

double Field::x(std::size_t ix) const {
  return 2.0 * std::numbers::pi * static_cast<double>(ix) / static_cast<double>(nx_);
}

bool Field::same_shape(const Field& other) const {
  return nx_ == other.nx_ && ny() == other.ny() &&
         (grid_ == other.grid_ ||
          (grid_ && other.grid_ && std::ranges::equal(grid_->nodes(), other.grid_->nodes())));
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Field::require_finite(const char* what) const {
  if (!all_finite()) throw std::runtime_error(std::string(what) + ": non-finite value in field");
}

Field& Field::operator+=(const Field& other) {
  if (!same_shape(other)) throw std::invalid_argument("Field +=: shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  if (!same_shape(other)) throw std::invalid_argument("Field -=: shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Field pointwise(const Field& a, const Field& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("pointwise: shape mismatch");
  Field out(a.nx(), a.grid_ptr());
  auto o = out.values();
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
  return out;
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

SpectralField::SpectralField(std::size_t nx, std::shared_ptr<const YGrid> grid)
    : nx_(nx), grid_(std::move(grid)) {
  if (!is_power_of_two(nx)) throw std::invalid_argument("SpectralField: nx must be a power of two");
  coef_.assign((nx_ / 2 + 1) * grid_->size(), {0.0, 0.0});
}

SpectralField to_spectral(const Field& f) {
  SpectralField s(f.nx(), f.grid_ptr());
  const PlanPair p = PlanCache::instance().get(f.nx(), f.ny());
  std::vector<double> in(f.values().begin(), f.values().end());
  fftw_execute_dft_r2c(p.forward, in.data(),
                       reinterpret_cast<fftw_complex*>(s.coefficients().data()));
  const double scale = 1.0 / static_cast<double>(f.nx());
  for (auto& c : s.coefficients()) c *= scale;
  return s;
}

Field to_physical(const SpectralField& s) {
  Field f(s.nx(), s.grid_ptr());
  const PlanPair p = PlanCache::instance().get(s.nx(), s.ny());
  std::vector<std::complex<double>> in(s.coefficients().begin(), s.coefficients().end());
  // c2r ignores the imaginary part of the k = 0 and Nyquist coefficients.
  fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(in.data()),
                       f.values().data());
  return f;
}

Field dy_field(const Field& f) {
  Field out(f.nx(), f.grid_ptr());
  parallel_for(f.nx(), [&](std::size_t ix) { d_y(f.grid(), f.row(ix), out.row(ix)); });
  return out;
}

Field dyy_field(const Field& f) {
  Field out(f.nx(), f.grid_ptr());
  parallel_for(f.nx(), [&](std::size_t ix) { d_yy(f.grid(), f.row(ix), out.row(ix)); });
  return out;
}

Field antideriv_field(const Field& f) {
  Field out(f.nx(), f.grid_ptr());
  parallel_for(f.nx(), [&](std::size_t ix) { antideriv_y(f.grid(), f.row(ix), out.row(ix)); });
  return out;
}

std::vector<std::complex<double>> rfft_x(std::span<const double> samples) {
  const std::size_t nx = samples.size();
  if (!is_power_of_two(nx)) throw std::invalid_argument("rfft_x: length must be a power of two");
  std::vector<std::complex<double>> out(nx / 2 + 1);
  const PlanPair p = PlanCache::instance().get(nx, 1);
  std::vector<double> in(samples.begin(), samples.end());
  fftw_execute_dft_r2c(p.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  for (auto& c : out) c /= static_cast<double>(nx);
  return out;
}

std::vector<double> irfft_x(std::span<const std::complex<double>> coef, std::size_t nx) {
  if (!is_power_of_two(nx) || coef.size() != nx / 2 + 1) {
    throw std::invalid_argument("irfft_x: coefficient count does not match nx");
  }
  std::vector<double> out(nx);
  const PlanPair p = PlanCache::instance().get(nx, 1);
  std::vector<std::complex<double>> in(coef.begin(), coef.end());
  fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  return out;
}

std::size_t dealias_cutoff(std::size_t nx) { return (nx - 1) / 3; }

}  // namespace prandtl
