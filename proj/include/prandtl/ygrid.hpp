#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace prandtl {

/// Finite-difference weights for derivative orders 0..max_order at point z
/// on arbitrary distinct nodes (Fornberg's recursion). Result is indexed
/// [order][node].
std::vector<std::vector<double>> fd_weights(double z, std::span<const double> nodes,
                                            int max_order);

/// Row of a banded difference operator: out[i] = sum_k w[k] * f[first + k].
struct Stencil {
  std::size_t first = 0;
  std::size_t count = 0;
  std::array<double, 4> w{};
};

/// Wall-normal grid on [0, ymax], clustered towards the wall.
///
/// Nodes are y_i = ymax * s(i/(ny-1)) with s(xi) = xi / (1 + c - c*xi),
/// c = stretch. s(0) = 0, s(1) = 1, and the spacing ratio between the last
/// and first cell is roughly (1+c)^2. c = 0 gives a uniform grid.
class YGrid {
 public:
  static std::shared_ptr<const YGrid> build(std::size_t ny, double ymax, double stretch);

  /// Grid on explicit nodes (strictly increasing, first node 0), e.g. read
  /// back from a field dump. `stretch` is recorded for reporting only.
  static std::shared_ptr<const YGrid> from_nodes(std::vector<double> nodes, double stretch = 0.0);

  /// The stretching map itself, exposed for tests and manifests.
  static double stretch_map(double xi, double stretch);

  std::size_t size() const { return nodes_.size(); }
  double ymax() const { return nodes_.back(); }
  double stretch() const { return stretch_; }
  std::span<const double> nodes() const { return nodes_; }
  double node(std::size_t i) const { return nodes_[i]; }
  /// nodes[i+1] - nodes[i]
  double spacing(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }
  /// Trapezoidal quadrature weights.
  std::span<const double> qweights() const { return qweights_; }

  const Stencil& dy_stencil(std::size_t i) const { return dy_[i]; }
  const Stencil& dyy_stencil(std::size_t i) const { return dyy_[i]; }

  double integrate(std::span<const double> f) const;

 private:
  YGrid(std::vector<double> nodes, double stretch);

  std::vector<double> nodes_;
  std::vector<double> qweights_;
  std::vector<Stencil> dy_;
  std::vector<Stencil> dyy_;
  double stretch_;
};

using Column = std::vector<double>;

/// Second-order centred first derivative; one-sided second order at the ends.
void d_y(const YGrid& grid, std::span<const double> f, std::span<double> out);
Column d_y(const YGrid& grid, std::span<const double> f);

/// out = D_y^T z, the transpose of the d_y matrix.
void d_y_transpose(const YGrid& grid, std::span<const double> z, std::span<double> out);

/// Three-point second derivative in the interior, four-point one-sided at
/// the ends.
void d_yy(const YGrid& grid, std::span<const double> f, std::span<double> out);
Column d_yy(const YGrid& grid, std::span<const double> f);

/// Cumulative trapezoid from y = 0; result[0] = 0.
void antideriv_y(const YGrid& grid, std::span<const double> f, std::span<double> out);
Column antideriv_y(const YGrid& grid, std::span<const double> f);

/// Tridiagonal matrix. lower[i] multiplies x[i-1] in row i (lower[0] unused),
/// upper[i] multiplies x[i+1] (upper[n-1] unused).
struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  std::size_t size() const { return diag.size(); }

  void apply(std::span<const double> x, std::span<double> y) const;
  Tridiagonal transpose() const;
  /// Adjoint with respect to <a, b>_w = sum a_i b_i w_i, i.e. W^{-1} T^T W.
  Tridiagonal weighted_transpose(std::span<const double> w) const;
};

/// Thomas factorisation of a tridiagonal matrix, reusable across many
/// right-hand sides (one per Fourier mode or x-column).
class TridiagonalFactor {
 public:
  TridiagonalFactor() = default;
  explicit TridiagonalFactor(const Tridiagonal& m);

  std::size_t size() const { return inv_pivot_.size(); }

  void solve_in_place(std::span<double> rhs) const;
  void solve_in_place(std::span<std::complex<double>> rhs) const;

 private:
  template <class T>
  void solve_impl(std::span<T> rhs) const;

  std::vector<double> lower_;
  std::vector<double> upper_prime_;
  std::vector<double> inv_pivot_;
};

enum class EndCondition { Dirichlet0, Neumann0 };

struct EndConditions {
  EndCondition bottom = EndCondition::Dirichlet0;
  EndCondition top = EndCondition::Dirichlet0;
};

/// Matrix of (a - b * d_yy) with the stated end rows. A Dirichlet row is the
/// identity row (u_end = 0 is imposed by zeroing that rhs entry); a Neumann
/// row uses the reflected ghost node, d_yy u_0 = 2 (u_1 - u_0) / h_0^2.
Tridiagonal helmholtz_matrix(const YGrid& grid, std::span<const double> a, double b,
                             EndConditions bc);

/// Solves (a - b d_yy) u = rhs. Throws std::invalid_argument when b = 0 and
/// some a_i <= 0.
Column solve_helmholtz_y(const YGrid& grid, std::span<const double> a, double b,
                         std::span<const double> rhs, EndConditions bc);
Column solve_helmholtz_y(const YGrid& grid, double a, double b, std::span<const double> rhs,
                         EndConditions bc);

/// Forward operator matching solve_helmholtz_y, for round-trip checks.
Column apply_helmholtz_y(const YGrid& grid, std::span<const double> a, double b,
                         std::span<const double> u, EndConditions bc);
Column apply_helmholtz_y(const YGrid& grid, double a, double b, std::span<const double> u,
                         EndConditions bc);

}  // namespace prandtl
