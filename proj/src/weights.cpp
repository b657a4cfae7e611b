#include "prandtl/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <numbers>
#include <stdexcept>
#include <string>

#include "prandtl/field.hpp"

namespace prandtl {

double eval_rho(int j, double y, const WeightParams& params) {
  double denom = 1.0;
  for (int k = 1; k <= j; ++k) {
    const double f = 1.0 + y / std::pow(static_cast<double>(k), params.alpha);
    denom *= f * f;
  }
  return std::pow(1.0 + y, 2.0 * params.m) / denom;
}

double eval_rho_recursive(int j, double y, const WeightParams& params) {
  double rho = std::pow(1.0 + y, 2.0 * params.m);
  for (int k = 1; k <= j; ++k) {
    const double f = 1.0 + y / std::pow(static_cast<double>(k), params.alpha);
    rho /= f * f;
  }
  return rho;
}

double log_deriv_rho(int j, double y, const WeightParams& params) {
  double acc = 2.0 * params.m / (1.0 + y);
  for (int k = 1; k <= j; ++k) {
    const double ka = std::pow(static_cast<double>(k), params.alpha);
    acc -= 2.0 / (ka * (1.0 + y / ka));
  }
  return acc;
}

double poincare_constant(double m, int n) {
  const double l = m - static_cast<double>(n);
  if (!(l > 0.5)) {
    throw std::domain_error("poincare_constant: need n < m - 1/2 (m=" + std::to_string(m) +
                            ", n=" + std::to_string(n) + ")");
  }
  return std::sqrt(1.0 / (2.0 * l - 1.0));
}

WeightTable::WeightTable(std::shared_ptr<const YGrid> grid, WeightParams params, int jmax)
    : grid_(std::move(grid)), params_(params), jmax_(jmax) {
  if (jmax < 0) throw std::invalid_argument("WeightTable: jmax must be nonnegative");
  if (params.m < 0.0 || params.alpha < 0.0) {
    throw std::invalid_argument("WeightTable: m and alpha must be nonnegative");
  }
  const auto y = grid_->nodes();
  const std::size_t ny = y.size();
  rho_.assign(jmax + 1, std::vector<double>(ny));
  logderiv_.assign(jmax + 1, std::vector<double>(ny));
  for (std::size_t i = 0; i < ny; ++i) {
    rho_[0][i] = std::pow(1.0 + y[i], 2.0 * params.m);
    logderiv_[0][i] = 2.0 * params.m / (1.0 + y[i]);
  }
  for (int j = 1; j <= jmax; ++j) {
    const double ja = std::pow(static_cast<double>(j), params.alpha);
    for (std::size_t i = 0; i < ny; ++i) {
      const double f = 1.0 + y[i] / ja;
      rho_[j][i] = rho_[j - 1][i] / (f * f);
      logderiv_[j][i] = logderiv_[j - 1][i] - 2.0 / (ja * f);
    }
  }
}

std::span<const double> WeightTable::rho(int j) const {
  if (j < 0 || j > jmax_) throw std::out_of_range("WeightTable::rho: j out of range");
  return rho_[j];
}

std::span<const double> WeightTable::logderiv(int j) const {
  if (j < 0 || j > jmax_) throw std::out_of_range("WeightTable::logderiv: j out of range");
  return logderiv_[j];
}

double weighted_norm_y(std::span<const double> column, int j, const WeightTable& weights) {
  const auto rho = weights.rho(j);
  const auto w = weights.grid().qweights();
  if (column.size() != rho.size()) throw std::invalid_argument("weighted_norm_y: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < column.size(); ++i) acc += column[i] * column[i] * rho[i] * w[i];
  return std::sqrt(acc);
}

double weighted_inner(const Field& f, const Field& g, int j, const WeightTable& weights) {
  if (f.ny() != weights.grid().size() || g.ny() != f.ny() || g.nx() != f.nx()) {
    throw std::invalid_argument("weighted_inner: dimension mismatch between field and grid");
  }
  const auto rho = weights.rho(j);
  const auto w = weights.grid().qweights();
  const std::size_t ny = f.ny();
  double acc = 0.0;
  for (std::size_t ix = 0; ix < f.nx(); ++ix) {
    const auto a = f.row(ix);
    const auto b = g.row(ix);
    double row = 0.0;
    for (std::size_t i = 0; i < ny; ++i) row += a[i] * b[i] * rho[i] * w[i];
    acc += row;
  }
  return acc * 2.0 * std::numbers::pi / static_cast<double>(f.nx());
}

double weighted_norm(const Field& f, int j, const WeightTable& weights) {
  return std::sqrt(weighted_inner(f, f, j, weights));
}

std::vector<double> random_profile(const YGrid& grid, double m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double height[4];
  double centre[4];
  double width[4];
  for (int l = 0; l < 4; ++l) {
    height[l] = unit(rng);
    centre[l] = 10.0 * unit(rng);
    width[l] = 0.2 + 2.8 * unit(rng);
  }
  const auto y = grid.nodes();
  std::vector<double> f(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double acc = 0.0;
    for (int l = 0; l < 4; ++l) {
      const double z = (y[i] - centre[l]) / width[l];
      acc += height[l] * std::exp(-0.5 * z * z);
    }
    f[i] = acc * std::pow(1.0 + y[i], -(m + 1.0));
  }
  return f;
}

LemmaReport check_weight_lemmas(const WeightTable& table, std::size_t fields, std::uint64_t seed,
                                double slack) {
  const YGrid& grid = table.grid();
  const auto y = grid.nodes();
  const std::size_t ny = y.size();
  const WeightParams& p = table.params();
  const int jmax = table.jmax();
  LemmaReport report;
  auto add = [&report](std::string lemma, int j, int n, double margin) {
    report.rows.push_back({std::move(lemma), j, n, margin});
  };

  for (int j = 0; j <= jmax; ++j) {
    const auto rho = table.rho(j);
    const auto ld = table.logderiv(j);
    if (j < jmax) {
      const auto next = table.rho(j + 1);
      const double tj = std::pow(static_cast<double>(j + 1), 2.0 * p.alpha);
      double mono = std::numeric_limits<double>::infinity();
      double trade = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ny; ++i) {
        mono = std::min(mono, (rho[i] - next[i]) / rho[i]);
        const double lhs = (1.0 + y[i]) * (1.0 + y[i]) * next[i];
        trade = std::min(trade, (tj * rho[i] - lhs) / (tj * rho[i]));
      }
      add("monotone", j, -1, mono + slack);
      add("trade", j, -1, trade + slack);
    }
    double sum_k = 0.0;
    for (int k = 1; k <= j; ++k) sum_k += std::pow(static_cast<double>(k), -p.alpha);
    const double bound_abs = 2.0 * p.m + 2.0 * sum_k;
    const double bound_y = 2.0 * p.m + 2.0 * j;
    double m_abs = std::numeric_limits<double>::infinity();
    double m_y = std::numeric_limits<double>::infinity();
    double gap = 0.0;
    for (std::size_t i = 0; i < ny; ++i) {
      m_abs = std::min(m_abs, bound_abs - std::abs(ld[i]));
      m_y = std::min(m_y, bound_y - (1.0 + y[i]) * std::abs(ld[i]));
      const double prod = eval_rho(j, y[i], p);
      const double rec = eval_rho_recursive(j, y[i], p);
      gap = std::max({gap, std::abs(prod - rec) / rec, std::abs(rho[i] - prod) / prod});
    }
    add("logderiv", j, -1, m_abs + slack);
    add("logderiv_y", j, -1, m_y + slack);
    add("product", j, -1, 1e-12 - gap);
  }

  // Poincare: pairs (j, n) with n <= min(j, m - 1), worst case over fields.
  const int nmax_m = static_cast<int>(std::ceil(p.m)) - 1;
  std::vector<std::vector<double>> profiles(fields);
  std::vector<std::vector<double>> prims(fields);
  for (std::size_t s = 0; s < fields; ++s) {
    profiles[s] = random_profile(grid, p.m, seed + s);
    prims[s] = antideriv_y(grid, profiles[s]);
  }
  for (int j = 0; j <= jmax; ++j) {
    const auto rho_j = table.rho(j);
    for (int n = 0; n <= std::min(j, nmax_m); ++n) {
      if (!(static_cast<double>(n) < p.m - 0.5)) continue;
      const auto rho_n = table.rho(n);
      const double c = poincare_constant(p.m, n);
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < fields; ++s) {
        const double rhs = c * weighted_norm_y(profiles[s], j, table) + slack;
        double lhs = 0.0;
        for (std::size_t i = 0; i < ny; ++i) {
          lhs = std::max(lhs, std::sqrt(rho_j[i] / rho_n[i]) * prims[s][i]);
        }
        worst = std::min(worst, rhs - lhs);
      }
      add("poincare", j, n, worst);
    }
  }

  report.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : report.rows) report.min_margin = std::min(report.min_margin, r.margin);
  report.holds = report.min_margin >= 0.0;
  return report;
}

}  // namespace prandtl
