#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

#include "prandtl/solver.hpp"

namespace prandtl::test {

/// Composite 5-point Gauss-Legendre rule on `panels` equal panels. Used as
/// an independent quadrature oracle for smooth integrands.
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                             int panels) {
  static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831,
                                           -0.9061798459386640, 0.9061798459386640};
  static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665,
                                           0.4786286704993665, 0.2369268850561891,
                                           0.2369268850561891};
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double s = 0.0;
    for (int q = 0; q < 5; ++q) s += w[q] * f(mid + 0.5 * h * x[q]);
    acc += 0.5 * h * s;
  }
  return acc;
}

/// Observed convergence order from errors at spacing h and h/2.
inline double observed_order(double e_coarse, double e_fine) {
  return std::log2(e_coarse / e_fine);
}

/// Manufactured solution u* = (1 + t) cos(x) phi(y), phi = y (L - y) e^{-y},
/// with U^E = 0, so the injected source is u*_t + u* u*_x + v* u*_y - u*_yy.
struct Manufactured {
  double L;
  double phi(double y) const { return y * (L - y) * std::exp(-y); }
  double phi_y(double y) const { return (L - 2.0 * y - y * (L - y)) * std::exp(-y); }
  double phi_yy(double y) const {
    return (-2.0 - 2.0 * (L - 2.0 * y) + y * (L - y)) * std::exp(-y);
  }
  double phi_int(double y) const {
    return L * (1.0 - (1.0 + y) * std::exp(-y)) - (2.0 - (y * y + 2.0 * y + 2.0) * std::exp(-y));
  }
  double u(double t, double x, double y) const { return (1.0 + t) * std::cos(x) * phi(y); }
  double source(double t, double x, double y) const {
    const double a = 1.0 + t;
    const double ut = std::cos(x) * phi(y);
    const double ux = -a * std::sin(x) * phi(y);
    const double v = a * std::sin(x) * phi_int(y);  // -int_0^y u_x
    const double uy = a * std::cos(x) * phi_y(y);
    const double uyy = a * std::cos(x) * phi_yy(y);
    return ut + u(t, x, y) * ux + v * uy - uyy;
  }
};

inline Field run_manufactured(std::size_t ny, double dt, double t_end, std::size_t nx = 8) {
  const Manufactured m{8.0};
  const auto g = YGrid::build(ny, m.L, 0.0);
  SolverConfig cfg;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.gevrey.jmax = 2;
  Stepper st(nx, g, EulerTrace::zero(), cfg);
  st.set_source([&](double t, Field& out) {
    for (std::size_t ix = 0; ix < out.nx(); ++ix) {
      for (std::size_t iy = 0; iy < out.ny(); ++iy) out(ix, iy) = m.source(t, out.x(ix), g->node(iy));
    }
  });
  State s{Field::sample(nx, g, [&](double x, double y) { return m.u(0.0, x, y); }), 0.0};
  const auto n = static_cast<std::size_t>(std::llround(t_end / dt));
  for (std::size_t i = 0; i < n; ++i) st.step(s);
  return s.u;
}

/// Largest difference between two solutions on the nodes of the coarser
/// grid, which are every `stride`-th node of the finer one.
inline double nested_diff(const Field& coarse, const Field& fine, std::size_t stride) {
  double e = 0.0;
  for (std::size_t ix = 0; ix < coarse.nx(); ++ix) {
    for (std::size_t iy = 0; iy < coarse.ny(); ++iy) {
      e = std::max(e, std::abs(coarse(ix, iy) - fine(ix, iy * stride)));
    }
  }
  return e;
}

}  // namespace prandtl::test
