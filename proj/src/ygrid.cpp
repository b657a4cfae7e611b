#include "prandtl/ygrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace prandtl {

std::vector<std::vector<double>> fd_weights(double z, std::span<const double> x, int max_order) {
  const std::size_t n = x.size();
  if (n == 0 || max_order < 0 || static_cast<std::size_t>(max_order) >= n) {
    throw std::invalid_argument("fd_weights: need more nodes than the derivative order");
  }
  const int m = max_order;
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

namespace {

Stencil make_stencil(std::span<const double> nodes, std::size_t row, std::size_t first,
                     std::size_t count, int order) {
  Stencil s;
  s.first = first;
  s.count = count;
  const auto w = fd_weights(nodes[row], nodes.subspan(first, count), order);
  for (std::size_t k = 0; k < count; ++k) s.w[k] = w[order][k];
  return s;
}

inline double apply_stencil(const Stencil& s, std::span<const double> f) {
  double acc = 0.0;
  for (std::size_t k = 0; k < s.count; ++k) acc += s.w[k] * f[s.first + k];
  return acc;
}

void check_length(const YGrid& grid, std::size_t n, const char* what) {
  if (n != grid.size()) {
    throw std::invalid_argument(std::string(what) + ": column length " + std::to_string(n) +
                                " does not match grid size " + std::to_string(grid.size()));
  }
}

}  // namespace

double YGrid::stretch_map(double xi, double stretch) {
  return xi / (1.0 + stretch - stretch * xi);
}

std::shared_ptr<const YGrid> YGrid::build(std::size_t ny, double ymax, double stretch) {
  if (ny < 3) throw std::invalid_argument("YGrid: need at least 3 nodes");
  if (!(ymax > 0.0)) throw std::invalid_argument("YGrid: ymax must be positive");
  if (!(stretch >= 0.0)) throw std::invalid_argument("YGrid: stretch must be nonnegative");
  std::vector<double> nodes(ny);
  const double last = static_cast<double>(ny - 1);
  for (std::size_t i = 0; i < ny; ++i) {
    nodes[i] = ymax * stretch_map(static_cast<double>(i) / last, stretch);
  }
  nodes.front() = 0.0;
  nodes.back() = ymax;
  return std::shared_ptr<const YGrid>(new YGrid(std::move(nodes), stretch));
}

std::shared_ptr<const YGrid> YGrid::from_nodes(std::vector<double> nodes, double stretch) {
  if (nodes.size() < 3) throw std::invalid_argument("YGrid: need at least 3 nodes");
  if (nodes.front() != 0.0) throw std::invalid_argument("YGrid: first node must be 0");
  return std::shared_ptr<const YGrid>(new YGrid(std::move(nodes), stretch));
}

YGrid::YGrid(std::vector<double> nodes, double stretch)
    : nodes_(std::move(nodes)), stretch_(stretch) {
  const std::size_t n = nodes_.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) throw std::invalid_argument("YGrid: nodes not increasing");
  }
  qweights_.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = nodes_[i + 1] - nodes_[i];
    qweights_[i] += 0.5 * h;
    qweights_[i + 1] += 0.5 * h;
  }

  dy_.resize(n);
  dyy_.resize(n);
  dy_[0] = make_stencil(nodes_, 0, 0, 3, 1);
  dy_[n - 1] = make_stencil(nodes_, n - 1, n - 3, 3, 1);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    dy_[i] = make_stencil(nodes_, i, i - 1, 3, 1);
    dyy_[i] = make_stencil(nodes_, i, i - 1, 3, 2);
  }
  if (n >= 4) {
    dyy_[0] = make_stencil(nodes_, 0, 0, 4, 2);
    dyy_[n - 1] = make_stencil(nodes_, n - 1, n - 4, 4, 2);
  } else {
    dyy_[0] = make_stencil(nodes_, 0, 0, 3, 2);
    dyy_[n - 1] = make_stencil(nodes_, n - 1, n - 3, 3, 2);
  }
}

double YGrid::integrate(std::span<const double> f) const {
  check_length(*this, f.size(), "integrate");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += qweights_[i] * f[i];
  return acc;
}

void d_y(const YGrid& grid, std::span<const double> f, std::span<double> out) {
  check_length(grid, f.size(), "d_y");
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = apply_stencil(grid.dy_stencil(i), f);
}

Column d_y(const YGrid& grid, std::span<const double> f) {
  Column out(f.size());
  d_y(grid, f, out);
  return out;
}

void d_y_transpose(const YGrid& grid, std::span<const double> z, std::span<double> out) {
  check_length(grid, z.size(), "d_y_transpose");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Stencil& s = grid.dy_stencil(i);
    for (std::size_t k = 0; k < s.count; ++k) out[s.first + k] += s.w[k] * z[i];
  }
}

void d_yy(const YGrid& grid, std::span<const double> f, std::span<double> out) {
  check_length(grid, f.size(), "d_yy");
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = apply_stencil(grid.dyy_stencil(i), f);
}

Column d_yy(const YGrid& grid, std::span<const double> f) {
  Column out(f.size());
  d_yy(grid, f, out);
  return out;
}

void antideriv_y(const YGrid& grid, std::span<const double> f, std::span<double> out) {
  check_length(grid, f.size(), "antideriv_y");
  out[0] = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * grid.spacing(i - 1) * (f[i] + f[i - 1]);
  }
}

Column antideriv_y(const YGrid& grid, std::span<const double> f) {
  Column out(f.size());
  antideriv_y(grid, f, out);
  return out;
}

void Tridiagonal::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag[i] * x[i];
    if (i > 0) acc += lower[i] * x[i - 1];
    if (i + 1 < n) acc += upper[i] * x[i + 1];
    y[i] = acc;
  }
}

Tridiagonal Tridiagonal::transpose() const {
  const std::size_t n = size();
  Tridiagonal t(n);
  t.diag = diag;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    t.upper[i] = lower[i + 1];
    t.lower[i + 1] = upper[i];
  }
  return t;
}

Tridiagonal Tridiagonal::weighted_transpose(std::span<const double> w) const {
  const std::size_t n = size();
  Tridiagonal t(n);
  t.diag = diag;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    t.upper[i] = lower[i + 1] * w[i + 1] / w[i];
    t.lower[i + 1] = upper[i] * w[i] / w[i + 1];
  }
  return t;
}

TridiagonalFactor::TridiagonalFactor(const Tridiagonal& m) {
  const std::size_t n = m.size();
  lower_ = m.lower;
  upper_prime_.assign(n, 0.0);
  inv_pivot_.assign(n, 0.0);
  double prev_upper = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pivot = m.diag[i] - (i > 0 ? m.lower[i] * prev_upper : 0.0);
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw std::runtime_error("TridiagonalFactor: zero pivot at row " + std::to_string(i));
    }
    inv_pivot_[i] = 1.0 / pivot;
    upper_prime_[i] = (i + 1 < n) ? m.upper[i] * inv_pivot_[i] : 0.0;
    prev_upper = upper_prime_[i];
  }
}

template <class T>
void TridiagonalFactor::solve_impl(std::span<T> rhs) const {
  const std::size_t n = inv_pivot_.size();
  if (rhs.size() != n) throw std::invalid_argument("TridiagonalFactor: size mismatch");
  rhs[0] *= inv_pivot_[0];
  for (std::size_t i = 1; i < n; ++i) {
    rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) * inv_pivot_[i];
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper_prime_[i] * rhs[i + 1];
}

void TridiagonalFactor::solve_in_place(std::span<double> rhs) const { solve_impl(rhs); }

void TridiagonalFactor::solve_in_place(std::span<std::complex<double>> rhs) const {
  solve_impl(rhs);
}

Tridiagonal helmholtz_matrix(const YGrid& grid, std::span<const double> a, double b,
                             EndConditions bc) {
  const std::size_t n = grid.size();
  check_length(grid, a.size(), "helmholtz_matrix");
  Tridiagonal t(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Stencil& s = grid.dyy_stencil(i);
    t.lower[i] = -b * s.w[0];
    t.diag[i] = a[i] - b * s.w[1];
    t.upper[i] = -b * s.w[2];
  }
  if (bc.bottom == EndCondition::Dirichlet0) {
    t.diag[0] = 1.0;
  } else {
    const double h = grid.spacing(0);
    t.diag[0] = a[0] + 2.0 * b / (h * h);
    t.upper[0] = -2.0 * b / (h * h);
  }
  if (bc.top == EndCondition::Dirichlet0) {
    t.diag[n - 1] = 1.0;
  } else {
    const double h = grid.spacing(n - 2);
    t.diag[n - 1] = a[n - 1] + 2.0 * b / (h * h);
    t.lower[n - 1] = -2.0 * b / (h * h);
  }
  return t;
}

Column solve_helmholtz_y(const YGrid& grid, std::span<const double> a, double b,
                         std::span<const double> rhs, EndConditions bc) {
  check_length(grid, rhs.size(), "solve_helmholtz_y");
  if (b < 0.0) throw std::invalid_argument("solve_helmholtz_y: b must be nonnegative");
  if (b == 0.0) {
    for (double ai : a) {
      if (!(ai > 0.0)) throw std::invalid_argument("solve_helmholtz_y: singular system (a <= 0, b = 0)");
    }
  }
  const Tridiagonal m = helmholtz_matrix(grid, a, b, bc);
  Column u(rhs.begin(), rhs.end());
  if (bc.bottom == EndCondition::Dirichlet0) u.front() = 0.0;
  if (bc.top == EndCondition::Dirichlet0) u.back() = 0.0;
  TridiagonalFactor(m).solve_in_place(std::span<double>(u));
  return u;
}

Column solve_helmholtz_y(const YGrid& grid, double a, double b, std::span<const double> rhs,
                         EndConditions bc) {
  const Column av(grid.size(), a);
  return solve_helmholtz_y(grid, av, b, rhs, bc);
}

Column apply_helmholtz_y(const YGrid& grid, std::span<const double> a, double b,
                         std::span<const double> u, EndConditions bc) {
  check_length(grid, u.size(), "apply_helmholtz_y");
  const Tridiagonal m = helmholtz_matrix(grid, a, b, bc);
  Column out(u.size());
  m.apply(u, out);
  return out;
}

Column apply_helmholtz_y(const YGrid& grid, double a, double b, std::span<const double> u,
                         EndConditions bc) {
  const Column av(grid.size(), a);
  return apply_helmholtz_y(grid, av, b, u, bc);
}

}  // namespace prandtl
