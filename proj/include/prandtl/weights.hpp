#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <memory>
#include <span>
#include <vector>

#include "prandtl/ygrid.hpp"

namespace prandtl {

class Field;

/// Exponents of the weight family
///   rho_0(y) = (1+y)^{2m},  rho_j(y) = rho_{j-1}(y) / (1 + y/j^alpha)^2.
struct WeightParams {
  double m = 8.0;
  double alpha = 1.0;
};

/// rho_j(y) by the closed product rho_0(y) * prod_{k<=j} (1 + y/k^alpha)^{-2}.
double eval_rho(int j, double y, const WeightParams& params);

/// rho_j(y) by the one-step recursion from rho_0. Used as a cross-check.
double eval_rho_recursive(int j, double y, const WeightParams& params);

/// d/dy log rho_j = 2m/(1+y) - 2 sum_{k<=j} 1 / (k^alpha (1 + y/k^alpha)).
double log_deriv_rho(int j, double y, const WeightParams& params);

/// C_{m-n} = sqrt(1 / (2(m-n) - 1)). Throws std::domain_error unless n < m - 1/2.
double poincare_constant(double m, int n);

/// rho_j tabulated on a grid for j = 0..jmax. Immutable after construction.
class WeightTable {
 public:
  WeightTable(std::shared_ptr<const YGrid> grid, WeightParams params, int jmax);

  const YGrid& grid() const { return *grid_; }
  const std::shared_ptr<const YGrid>& grid_ptr() const { return grid_; }
  const WeightParams& params() const { return params_; }
  int jmax() const { return jmax_; }

  std::span<const double> rho(int j) const;
  std::span<const double> logderiv(int j) const;

 private:
  std::shared_ptr<const YGrid> grid_;
  WeightParams params_;
  int jmax_;
  std::vector<std::vector<double>> rho_;
  std::vector<std::vector<double>> logderiv_;
};

/// (int |f|^2 rho_j dy)^{1/2} for a single y-profile, trapezoidal rule.
double weighted_norm_y(std::span<const double> column, int j, const WeightTable& weights);

/// (int int |f|^2 rho_j dx dy)^{1/2}: uniform sum in x times 2*pi/nx,
/// trapezoid in y.
double weighted_norm(const Field& f, int j, const WeightTable& weights);

/// Weighted inner product <f, g>_j on the same quadrature.
double weighted_inner(const Field& f, const Field& g, int j, const WeightTable& weights);

/// One checked weight inequality. `margin` is (right side - left side)
/// plus the absolute slack, minimised over the grid, so margin >= 0 means
/// the inequality holds up to round-off.
struct LemmaMargin {
  std::string lemma;
  int j = 0;
  int n = -1;  // second index where one applies (Poincare), else -1
  double margin = 0.0;
};

struct LemmaReport {
  std::vector<LemmaMargin> rows;
  double min_margin = 0.0;
  bool holds = true;
};

/// Seeded nonnegative y-profile used by the Poincare check: a sum of four
/// Gaussian bumps with random height, centre in [0, 10] and width in
/// [0.2, 3], damped by (1+y)^{-(m+1)} so it lies in every L^2(rho_j).
std::vector<double> random_profile(const YGrid& grid, double m, std::uint64_t seed);

/// Runs the weight lemmas on every tabulated (j, y):
///   "monotone":    rho_{j+1} <= rho_j (relative margin)
///   "trade":       (1+y)^2 rho_{j+1} <= (j+1)^{2 alpha} rho_j (relative margin)
///   "logderiv":    |rho_j'/rho_j| <= 2m + 2 sum_{k<=j} k^{-alpha}
///   "logderiv_y":  (1+y)|rho_j'/rho_j| <= 2m + 2j
///   "product":     1e-12 - relative gap between product and recursion
///   "poincare":    C_{m-n} ||f||_{L^2(rho_j)} + slack
///                    - sup_y (rho_j/rho_n)^{1/2} int_0^y f,
///                  for n <= min(j, m-1) and `fields` seeded profiles.
LemmaReport check_weight_lemmas(const WeightTable& table, std::size_t fields = 100,
                                std::uint64_t seed = 1, double slack = 1e-10);

}  // namespace prandtl
