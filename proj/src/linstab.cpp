#include "prandtl/linstab.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <limits>
#include <stdexcept>
#include <string>

#include "prandtl/parallel.hpp"

namespace prandtl {

namespace {

using cplx = std::complex<double>;

// Fixes the eigenvector phase so the largest entry is real and positive,
// and scales to unit L^2_y norm on the full grid.
std::vector<cplx> normalise_profile(const CVector& interior, const YGrid& grid) {
  const std::size_t ny = grid.size();
  std::vector<cplx> full(ny, cplx{});
  Eigen::Index imax = 0;
  interior.cwiseAbs().maxCoeff(&imax);
  const cplx phase = std::abs(interior(imax)) > 0.0 ? std::conj(interior(imax)) / std::abs(interior(imax))
                                                    : cplx{1.0, 0.0};
  for (std::size_t i = 1; i + 1 < ny; ++i) full[i] = interior(static_cast<Eigen::Index>(i - 1)) * phase;
  const auto q = grid.qweights();
  double n2 = 0.0;
  for (std::size_t i = 0; i < ny; ++i) n2 += std::norm(full[i]) * q[i];
  const double n = std::sqrt(n2);
  if (n > 0.0) {
    for (auto& c : full) c /= n;
  }
  return full;
}

ModeResult dense_leading(const CMatrix& L, const YGrid& grid) {
  const auto n = static_cast<lapack_int>(L.rows());
  CMatrix a = L;
  CVector w(n);
  CMatrix vr(n, n);
  cplx dummy;
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, w.data(), &dummy,
                                        1, vr.data(), n);
  if (info != 0) {
    throw std::runtime_error("growth_rate: zgeev failed to converge (info = " +
                             std::to_string(info) + ")");
  }
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (w(i).real() > w(best).real()) best = i;
  }
  ModeResult r;
  r.sigma = w(best);
  CVector v = vr.col(best);
  v.normalize();
  r.residual = (L * v - r.sigma * v).norm();
  r.eigfun = normalise_profile(v, grid);
  r.method = EigenMethod::Dense;
  return r;
}

ModeResult power_leading(const CMatrix& L, const YGrid& grid) {
  const Eigen::Index n = L.rows();
  CMatrix E = L.exp();  // propagator over unit time
  E /= E.norm();
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  CVector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = cplx(dist(rng), dist(rng));
  x.normalize();

  auto rayleigh = [&L](const CVector& v) { return v.dot(L * v) / v.squaredNorm(); };
  cplx q = rayleigh(x);
  std::size_t iterations = 0;
  constexpr int kMaxLevels = 24;
  constexpr int kItersPerLevel = 60;
  for (int level = 0; level < kMaxLevels; ++level) {
    int settled = 0;
    for (int it = 0; it < kItersPerLevel; ++it) {
      x = E * x;
      const double nx = x.norm();
      if (!(nx > 0.0) || !std::isfinite(nx)) {
        throw std::runtime_error("growth_rate: power iteration lost the iterate");
      }
      x /= nx;
      ++iterations;
      const cplx q_new = rayleigh(x);
      const double change = std::abs(q_new - q);
      q = q_new;
      settled = change <= 1e-14 * std::max(1.0, std::abs(q)) ? settled + 1 : 0;
      if (settled >= 3) {
        ModeResult r;
        r.sigma = q;
        r.residual = (L * x - q * x).norm();
        r.eigfun = normalise_profile(x, grid);
        r.method = EigenMethod::Power;
        r.iterations = iterations;
        return r;
      }
    }
    E = E * E;  // double the propagation time
    E /= E.norm();
  }
  throw std::runtime_error("growth_rate: power iteration did not settle after " +
                           std::to_string(iterations) + " products (last estimate " +
                           std::to_string(q.real()) + ", " + std::to_string(q.imag()) + ")");
}

// Row coefficients of the resolvent operator; each row touches at most five
// consecutive nodes starting at `first`.
struct ResolventRows {
  std::vector<std::size_t> first;
  std::vector<std::size_t> count;
  std::vector<std::array<cplx, 5>> coef;
};

ResolventRows resolvent_rows(cplx lambda, double k, const ShearFlow& shear, const YGrid& grid) {
  const std::size_t ny = grid.size();
  if (ny < 6) throw std::invalid_argument("resolvent: need at least 6 nodes");
  const auto nodes = grid.nodes();
  ResolventRows rows;
  rows.first.assign(ny, 0);
  rows.count.assign(ny, 0);
  rows.coef.assign(ny, {});
  const cplx ik(0.0, k);

  auto window = [&](std::size_t i) { return std::min(i >= 2 ? i - 2 : 0, ny - 5); };

  rows.first[0] = 0;
  rows.count[0] = 1;
  rows.coef[0][0] = 1.0;

  {
    const auto w = fd_weights(nodes[0], nodes.subspan(0, 5), 1);
    rows.first[1] = 0;
    rows.count[1] = 5;
    for (std::size_t m = 0; m < 5; ++m) rows.coef[1][m] = w[1][m];
  }
  for (std::size_t i = 2; i + 1 < ny; ++i) {
    const std::size_t s = window(i);
    const auto w = fd_weights(nodes[i], nodes.subspan(s, 5), 3);
    const double y = nodes[i];
    const cplx a1 = lambda + ik * shear.us(y);
    rows.first[i] = s;
    rows.count[i] = 5;
    for (std::size_t m = 0; m < 5; ++m) rows.coef[i][m] = a1 * w[1][m] - w[3][m];
    rows.coef[i][i - s] -= ik * shear.dus(y);
  }
  {
    const std::size_t s = ny - 5;
    const auto w = fd_weights(nodes[ny - 1], nodes.subspan(s, 5), 1);
    rows.first[ny - 1] = s;
    rows.count[ny - 1] = 5;
    for (std::size_t m = 0; m < 5; ++m) rows.coef[ny - 1][m] = w[1][m];
  }
  return rows;
}

}  // namespace

ShearFlow ShearFlow::critical_point() {
  return {[](double y) { return y * std::exp(-y); },
          [](double y) { return (1.0 - y) * std::exp(-y); }, "y*exp(-y)"};
}

ShearFlow ShearFlow::monotone() {
  return {[](double y) { return -std::expm1(-y); }, [](double y) { return std::exp(-y); },
          "1-exp(-y)"};
}

ShearFlow ShearFlow::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }, "constant"};
}

ShearFlow ShearFlow::zero() { return constant(0.0); }

ShearFlow ShearFlow::shifted(double c) const {
  auto base = us;
  return {[base, c](double y) { return base(y) + c; }, dus, label + "+const"};
}

CMatrix build_linop(double k, const ShearFlow& shear, const YGrid& grid) {
  const std::size_t ny = grid.size();
  const auto n = static_cast<Eigen::Index>(ny - 2);
  CMatrix L = CMatrix::Zero(n, n);
  const cplx ik(0.0, k);
  const auto nodes = grid.nodes();

  // Cumulative trapezoid restricted to interior nodes:
  // (C f)_i = sum_{s<i} h_s (f_s + f_{s+1}) / 2.
  for (std::size_t i = 1; i + 1 < ny; ++i) {
    const auto r = static_cast<Eigen::Index>(i - 1);
    const double y = nodes[i];
    L(r, r) += -ik * shear.us(y);
    const cplx c = ik * shear.dus(y);
    for (std::size_t s = 0; s < i; ++s) {
      const double half = 0.5 * grid.spacing(s);
      if (s >= 1) L(r, static_cast<Eigen::Index>(s - 1)) += c * half;
      if (s + 1 <= ny - 2) L(r, static_cast<Eigen::Index>(s)) += c * half;  // node s+1
    }
    const Stencil& st = grid.dyy_stencil(i);
    for (std::size_t m = 0; m < st.count; ++m) {
      const std::size_t col = st.first + m;
      if (col == 0 || col == ny - 1) continue;
      L(r, static_cast<Eigen::Index>(col - 1)) += st.w[m];
    }
  }
  return L;
}

const char* to_string(EigenMethod m) { return m == EigenMethod::Dense ? "dense" : "power"; }

ModeResult growth_rate(double k, const ShearFlow& shear, const YGrid& grid, EigenMethod method) {
  if (!(k >= 1.0)) throw std::invalid_argument("growth_rate: k must be >= 1");
  const CMatrix L = build_linop(k, shear, grid);
  ModeResult r = method == EigenMethod::Dense ? dense_leading(L, grid) : power_leading(L, grid);
  r.k = k;
  return r;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_power_law: need at least two matched points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_power_law: data must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_power_law: abscissae must differ");
  PowerLawFit fit;
  fit.p = sxy / sxx;
  fit.lambda = std::exp(my - fit.p * mx);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::log(y[i]) - (std::log(fit.lambda) + fit.p * std::log(x[i]));
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

ScanResult scan_and_fit(const std::vector<double>& ks, const ShearFlow& shear, std::size_t ny,
                        double ymax, double stretch, const ScanOptions& options) {
  const auto grid = YGrid::build(ny, ymax, stretch);
  const auto fine = options.refine ? YGrid::build(2 * ny - 1, ymax, stretch) : nullptr;
  ScanResult result;
  result.rows.resize(ks.size());
  parallel_for(ks.size(), [&](std::size_t i) {
    ScanRow& row = result.rows[i];
    row.k = ks[i];
    const CMatrix L = build_linop(ks[i], shear, *grid);
    row.sigma = dense_leading(L, *grid).sigma;
    if (options.refine) {
      row.sigma_refined = growth_rate(ks[i], shear, *fine, EigenMethod::Dense).sigma;
      row.refine_change = std::abs(row.sigma_refined.real() - row.sigma.real()) /
                          std::max(std::abs(row.sigma.real()), 1e-300);
    }
    if (options.cross_check) {
      row.sigma_power = power_leading(L, *grid).sigma;
      row.power_rel_diff = std::abs(row.sigma_power - row.sigma) / std::abs(row.sigma);
    }
  });

  std::vector<double> xs;
  std::vector<double> ys;
  for (ScanRow& row : result.rows) {
    if (!(row.sigma.real() > 0.0)) {
      row.note = "stable";
    } else if (options.refine && !(row.refine_change < options.refine_tolerance)) {
      row.note = "not grid-converged";
    } else {
      row.included = true;
      xs.push_back(row.k);
      ys.push_back(row.sigma.real());
    }
  }
  if (xs.size() < std::max<std::size_t>(options.min_modes, 2)) {
    result.message = "only " + std::to_string(xs.size()) + " unstable converged modes; fit rejected";
    return result;
  }
  result.fit = fit_power_law(xs, ys);
  result.fit_ok = true;
  return result;
}

ResolventResult resolvent_solve(std::complex<double> lambda, double k, const ShearFlow& shear,
                                const std::vector<std::complex<double>>& rhs, const YGrid& grid) {
  const std::size_t ny = grid.size();
  if (rhs.size() != ny) throw std::invalid_argument("resolvent_solve: rhs length differs from ny");
  const ResolventRows rows = resolvent_rows(lambda, k, shear, grid);
  constexpr lapack_int kl = 4;
  constexpr lapack_int ku = 3;
  constexpr lapack_int ldab = 2 * kl + ku + 1;
  const auto n = static_cast<lapack_int>(ny);
  std::vector<cplx> ab(static_cast<std::size_t>(ldab) * ny, cplx{});
  std::vector<double> colsum(ny, 0.0);
  for (std::size_t i = 0; i < ny; ++i) {
    for (std::size_t m = 0; m < rows.count[i]; ++m) {
      const std::size_t j = rows.first[i] + m;
      const auto row_in_band = static_cast<std::size_t>(kl + ku) + i - j;
      ab[row_in_band + j * ldab] += rows.coef[i][m];
      colsum[j] += std::abs(rows.coef[i][m]);
    }
  }
  const double anorm = *std::max_element(colsum.begin(), colsum.end());

  std::vector<cplx> b = rhs;
  b[0] = b[1] = b[ny - 1] = cplx{};
  std::vector<lapack_int> ipiv(ny);
  lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab.data(), ldab, ipiv.data());
  ResolventResult out;
  if (info > 0) {
    // Exactly singular: report and return zeros rather than garbage.
    out.psi.assign(ny, cplx{});
    out.rcond = 0.0;
    out.residual = std::numeric_limits<double>::infinity();
    return out;
  }
  if (info < 0) throw std::runtime_error("resolvent_solve: zgbtrf argument error");
  double rcond = 0.0;
  LAPACKE_zgbcon(LAPACK_COL_MAJOR, '1', n, kl, ku, ab.data(), ldab, ipiv.data(), anorm, &rcond);
  std::vector<cplx> x = b;
  info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, ab.data(), ldab, ipiv.data(),
                        x.data(), n);
  if (info != 0) throw std::runtime_error("resolvent_solve: zgbtrs failed");
  out.psi = std::move(x);
  out.rcond = rcond;

  const auto applied = resolvent_apply(lambda, k, shear, out.psi, grid);
  double rn = 0.0;
  double bn = 0.0;
  for (std::size_t i = 0; i < ny; ++i) {
    rn += std::norm(applied[i] - b[i]);
    bn += std::norm(b[i]);
  }
  out.residual = bn > 0.0 ? std::sqrt(rn / bn) : std::sqrt(rn);
  return out;
}

std::vector<std::complex<double>> resolvent_apply(std::complex<double> lambda, double k,
                                                  const ShearFlow& shear,
                                                  const std::vector<std::complex<double>>& psi,
                                                  const YGrid& grid) {
  const std::size_t ny = grid.size();
  if (psi.size() != ny) throw std::invalid_argument("resolvent_apply: length differs from ny");
  const ResolventRows rows = resolvent_rows(lambda, k, shear, grid);
  std::vector<cplx> out(ny, cplx{});
  for (std::size_t i = 0; i < ny; ++i) {
    for (std::size_t m = 0; m < rows.count[i]; ++m) out[i] += rows.coef[i][m] * psi[rows.first[i] + m];
  }
  return out;
}

}  // namespace prandtl
