#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "prandtl/spectral.hpp"
#include "test_support.hpp"

using namespace prandtl;

namespace {

double max_diff(const Field& a, const Field& b) { return max_abs(a - b); }

Field random_band_limited(std::size_t nx, const std::shared_ptr<const YGrid>& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(nx, g);
  for (auto& v : f.values()) v = u(rng);
  return dealias(f);
}

}  // namespace

TEST_CASE("dx_pow on trigonometric data") {
  const auto g = YGrid::build(9, 1.0, 0.0);
  const Field c = Field::sample(32, g, [](double x, double) { return std::cos(x); });
  const Field s = Field::sample(32, g, [](double x, double) { return -std::sin(x); });
  CHECK(max_diff(dx_pow(c, 1), s) <= 1e-12);
  CHECK(max_diff(dx_pow(c, 2), -1.0 * c) <= 1e-12);
  const Field flat = Field::sample(32, g, [](double, double y) { return 1.0 + y * y; });
  CHECK(max_abs(dx_pow(flat, 1)) == 0.0);
  CHECK(max_abs(dx_pow(flat, 3)) == 0.0);
  CHECK_THROWS_AS(dx_pow(c, 9), std::domain_error);
}

TEST_CASE("dx_pow composes") {
  const auto g = YGrid::build(17, 2.0, 0.0);
  const Field f = random_band_limited(64, g, 3);
  for (int a = 0; a <= 6; ++a) {
    for (int b = 0; a + b <= 16; b += 3) {
      const Field ab = dx_pow(dx_pow(f, a), b);
      const Field direct = dx_pow(f, a + b);
      CHECK(max_diff(ab, direct) <= 1e-10 * std::max(1.0, max_abs(direct)));
    }
  }
}

TEST_CASE("dealiased product is the truncated exact product") {
  const auto g = YGrid::build(5, 1.0, 0.0);
  const std::size_t nx = 64;
  // cos(15x) * cos(12x) = (cos 27x + cos 3x)/2; K = 21, so only cos 3x survives.
  const Field a = Field::sample(nx, g, [](double x, double) { return std::cos(15.0 * x); });
  const Field b = Field::sample(nx, g, [](double x, double) { return std::cos(12.0 * x); });
  const Field expect = Field::sample(nx, g, [](double x, double) { return 0.5 * std::cos(3.0 * x); });
  CHECK(dealias_cutoff(nx) == 21);
  CHECK(max_diff(dealiased_product(a, b), expect) <= 1e-13);
}

TEST_CASE("gevrey norm basic properties") {
  const auto g = YGrid::build(129, 30.0, 1.0);
  const WeightTable w(g, {8.0, 1.0}, 16);
  GevreyParams p;
  p.jmax = 16;
  CHECK(gevrey_norm(Field(64, g), p, 0.0, w) == 0.0);

  const Field flat = Field::sample(64, g, [](double, double y) { return y * std::exp(-y); });
  CHECK(gevrey_norm(flat, p, 0.3, w) == doctest::Approx(p.tau(0.3) * weighted_norm(flat, 0, w)).epsilon(1e-13));

  const Field f = Field::sample(64, g, [](double x, double y) {
    return (std::cos(x) + 0.2 * std::sin(5.0 * x)) * y * std::exp(-y);
  });
  GevreyParams p0 = p;
  p0.jmax = 0;
  CHECK(gevrey_norm(f, p0, 0.0, w) == doctest::Approx(p.tau0 * weighted_norm(f, 0, w)).epsilon(1e-13));
  double prev = 0.0;
  for (int jm = 0; jm <= 16; ++jm) {
    GevreyParams q = p;
    q.jmax = jm;
    const double n = gevrey_norm(f, q, 0.0, w);
    CHECK(n >= prev);
    prev = n;
  }
  CHECK(gevrey_norm(f, p, 0.5, w) <= gevrey_norm(f, p, 0.0, w));
  Field f3 = f;
  f3 *= 3.0;
  CHECK(gevrey_norm(f3, p, 0.0, w) == doctest::Approx(3.0 * gevrey_norm(f, p, 0.0, w)).epsilon(1e-13));
}

TEST_CASE("gevrey norm of 0.1 cos(4x) e^{-y} against direct summation") {
  GevreyParams p;
  p.gamma = 2.0;
  p.tau0 = 0.5;
  p.r = 5.0;
  p.jmax = 32;
  const WeightParams wp{8.0, 1.0};
  auto mj = [&p](int j) {
    return std::pow(0.5, j + 1) * std::pow(j + 1.0, 5.0) / std::pow(std::tgamma(j + 1.0), 2.0);
  };
  auto norm_from_integrals = [&](const std::function<double(int)>& y_integral) {
    double acc = 0.0;
    for (int j = 0; j <= 32; ++j) {
      // ||d_x^j f||_j^2 = 4^{2j} * 0.01 * pi * int e^{-2y} rho_j dy.
      acc += mj(j) * mj(j) * std::pow(4.0, 2 * j) * 0.01 * std::numbers::pi * y_integral(j);
    }
    return std::sqrt(acc);
  };

  // Same-grid oracle: the trapezoid sums written out term by term.
  const auto g = YGrid::build(1025, 60.0, 0.0);
  const WeightTable w(g, wp, 32);
  const Field f = Field::sample(256, g, [](double x, double y) { return 0.1 * std::cos(4.0 * x) * std::exp(-y); });
  const double direct = norm_from_integrals([&](int j) {
    double s = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double q = (i == 0 || i + 1 == g->size()) ? 0.5 * g->spacing(0) : g->spacing(0);
      s += std::exp(-2.0 * g->node(i)) * eval_rho(j, g->node(i), wp) * q;
    }
    return s;
  });
  CHECK(gevrey_norm(f, p, 0.0, w) == doctest::Approx(direct).epsilon(1e-10));

  // Continuum oracle: Gauss-Legendre integrals against Romberg-extrapolated norms.
  const double exact = norm_from_integrals([&](int j) {
    return test::gauss_legendre([&](double y) { return std::exp(-2.0 * y) * eval_rho(j, y, wp); }, 0.0,
                                60.0, 1200);
  });
  double n2[3];
  for (int r = 0; r < 3; ++r) {
    const auto gr = YGrid::build(1024 * (1u << r) + 1, 60.0, 0.0);
    const WeightTable wr(gr, wp, 32);
    const Field fr = Field::sample(256, gr, [](double x, double y) { return 0.1 * std::cos(4.0 * x) * std::exp(-y); });
    const double n = gevrey_norm(fr, p, 0.0, wr);
    n2[r] = n * n;
  }
  const double r1a = (4.0 * n2[1] - n2[0]) / 3.0;
  const double r1b = (4.0 * n2[2] - n2[1]) / 3.0;
  CHECK(std::sqrt((16.0 * r1b - r1a) / 15.0) == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("mode profile") {
  const auto g = YGrid::build(65, 10.0, 1.0);
  const Field f = Field::sample(32, g, [](double x, double y) { return std::cos(3.0 * x) * y * std::exp(-y); });
  const SpectrumProfile prof = mode_profile(f);
  REQUIRE(prof.amplitudes.size() == 17);
  for (std::size_t k = 0; k < prof.amplitudes.size(); ++k) {
    if (k == 3) {
      CHECK(prof.amplitudes[k] > 0.1);
    } else {
      CHECK(prof.amplitudes[k] <= 1e-14);
    }
  }
  for (double a : mode_profile(Field(32, g)).amplitudes) CHECK(a == 0.0);

  // Parseval against direct L^2 quadrature on random data (Nyquist included).
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field r(32, g);
  for (auto& v : r.values()) v = u(rng);
  const auto a = mode_profile(r).amplitudes;
  double spec = a[0] * a[0] + a[16] * a[16];
  for (std::size_t k = 1; k < 16; ++k) spec += 2.0 * a[k] * a[k];
  double direct = 0.0;
  const auto q = g->qweights();
  for (std::size_t ix = 0; ix < 32; ++ix) {
    for (std::size_t iy = 0; iy < g->size(); ++iy) direct += r(ix, iy) * r(ix, iy) * q[iy];
  }
  direct *= 2.0 * std::numbers::pi / 32.0;
  CHECK(spec == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("fit_radius") {
  SpectrumProfile exact;
  SpectrumProfile expo;
  for (int k = 0; k <= 64; ++k) {
    exact.amplitudes.push_back(3.0 * std::exp(-0.7 * std::sqrt(k)));
    expo.amplitudes.push_back(std::exp(-static_cast<double>(k)));
  }
  const RadiusFit a = fit_radius(exact, 2.0, 4, 40);
  CHECK(a.delta == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(a.c == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(a.residual <= 1e-10);
  CHECK(fit_radius(expo, 1.0, 1, 20).delta == doctest::Approx(1.0).epsilon(1e-12));

  SpectrumProfile scaled = exact;
  for (double& v : scaled.amplitudes) v *= 17.0;
  const RadiusFit s = fit_radius(scaled, 2.0, 4, 40);
  CHECK(s.delta == doctest::Approx(a.delta).epsilon(1e-13));
  CHECK(s.c == doctest::Approx(17.0 * a.c).epsilon(1e-12));

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> eta(-0.01, 0.01);
    SpectrumProfile noisy = exact;
    for (double& v : noisy.amplitudes) v *= 1.0 + eta(rng);
    CHECK(std::abs(fit_radius(noisy, 2.0, 4, 40).delta - 0.7) <= 0.05);
  }

  CHECK_THROWS_AS(fit_radius(exact, 2.0, 10, 5), std::invalid_argument);
  SpectrumProfile sparse;
  sparse.amplitudes.assign(20, 0.0);
  sparse.amplitudes[5] = 1.0;
  sparse.amplitudes[6] = 0.5;
  CHECK_THROWS_AS(fit_radius(sparse, 2.0, 1, 19), std::runtime_error);
  CHECK(default_fit_kmin(256) == 16);
  CHECK(default_fit_kmax(256) == 85);
}

TEST_CASE("synth_gevrey2") {
  const auto g = YGrid::build(129, 30.0, 1.0);
  auto prof = [](double y) { return y * std::exp(-y); };
  const Field zero = synth_gevrey2(1.0, 0.0, prof, 7, 256, g);
  CHECK(max_abs(zero) == 0.0);

  const Field f = synth_gevrey2(1.0, 0.1, prof, 7, 256, g);
  const RadiusFit fit = fit_radius(mode_profile(f), 2.0, default_fit_kmin(256), default_fit_kmax(256));
  CHECK(fit.delta == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t ix = 0; ix < f.nx(); ++ix) CHECK(f(ix, 0) == 0.0);

  const Field h = synth_gevrey2(1.0, 0.1, prof, 8, 256, g);
  const auto pa = mode_profile(f).amplitudes;
  const auto pb = mode_profile(h).amplitudes;
  for (std::size_t k = 0; k < pa.size(); ++k) CHECK(pa[k] == doctest::Approx(pb[k]).epsilon(1e-12));
  CHECK(max_diff(f, h) > 1e-3);

  CHECK_THROWS_AS(synth_gevrey2(1.0, 0.1, [](double y) { return std::exp(-y); }, 1, 64, g),
                  std::invalid_argument);
  CHECK_THROWS_AS(synth_gevrey2(0.0, 0.1, prof, 1, 64, g), std::invalid_argument);
}

TEST_CASE("truncated norm of Gevrey-2 data grows with jmax beyond the radius") {
  const auto g = YGrid::build(129, 30.0, 1.0);
  const Field f = synth_gevrey2(1.0, 0.1, [](double y) { return y * std::exp(-y); }, 3, 256, g);
  const WeightTable w(g, {8.0, 1.0}, 32);
  GevreyParams p;
  p.tau0 = 0.6;  // beyond delta^2/4
  p.jmax = 16;
  const double n16 = gevrey_norm(f, p, 0.0, w);
  p.jmax = 32;
  const double n32 = gevrey_norm(f, p, 0.0, w);
  CHECK(n32 / n16 > 1.0);
}
