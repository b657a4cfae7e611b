#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "prandtl/solver.hpp"
#include "test_support.hpp"

using namespace prandtl;

namespace {

double max_diff(const Field& a, const Field& b) { return max_abs(a - b); }

Field random_band_limited(std::size_t nx, const std::shared_ptr<const YGrid>& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(nx, g);
  for (auto& v : f.values()) v = u(rng);
  return admissible_initial_data(f);
}

}  // namespace

TEST_CASE("lift fields") {
  const auto g = YGrid::build(65, 20.0, 1.0);
  const Lift z = lift_fields(EulerTrace::zero(), 0.0, 16, g);
  CHECK(max_abs(z.ue) == 0.0);
  CHECK(max_abs(z.ve) == 0.0);

  const Lift one = lift_fields(EulerTrace::constant(1.0), 0.3, 16, g);
  CHECK(max_diff(one.ue, Field::sample(16, g, [](double, double y) { return 1.0 - std::exp(-y); })) <= 1e-15);
  CHECK(max_abs(one.ve) == 0.0);

  const Lift c = lift_fields(EulerTrace::cosine(1.0), 0.0, 16, g);
  const Field ve = Field::sample(16, g, [](double x, double y) { return (y + std::exp(-y) - 1.0) * std::sin(x); });
  CHECK(max_diff(c.ve, ve) <= 1e-13);
  for (std::size_t ix = 0; ix < 16; ++ix) CHECK(c.ve(ix, 0) == 0.0);
  CHECK(max_abs(dx_pow(c.ue, 1) + c.ve_y) <= 1e-12);
}

TEST_CASE("forcing f^e") {
  const auto g = YGrid::build(65, 20.0, 1.0);
  CHECK(max_abs(forcing_fe(EulerTrace::zero(), 0.0, 16, g)) == 0.0);
  const Field fc = forcing_fe(EulerTrace::constant(0.7), 0.0, 16, g);
  CHECK(max_diff(fc, Field::sample(16, g, [](double, double y) { return -0.7 * std::exp(-y); })) <= 1e-15);

  // Term-by-term closed form for U^E = a cos x at doubled x-resolution.
  const double a = 0.1;
  auto oracle = [a](double x, double y) {
    const double e = std::exp(-y);
    const double UE = a * std::cos(x);
    const double UEx = -a * std::sin(x);
    const double Ue = (1.0 - e) * UE;
    const double Uex = (1.0 - e) * UEx;
    const double Ve = -(y + e - 1.0) * UEx;
    const double Uey = e * UE;
    const double Ueyy = -e * UE;
    return UE * UEx - Ue * Uex - Ve * Uey + Ueyy;
  };
  const Field f32 = forcing_fe(EulerTrace::cosine(a), 0.4, 32, g);
  CHECK(max_diff(f32, Field::sample(32, g, oracle)) <= 1e-10);
}

TEST_CASE("v from u") {
  const auto g = YGrid::build(129, 15.0, 2.0);
  const Field flat = Field::sample(16, g, [](double, double y) { return y * std::exp(-y); });
  CHECK(max_abs(v_from_u(flat)) == 0.0);

  auto gy = [](double y) { return y * std::exp(-y); };
  const Field s = Field::sample(16, g, [&](double x, double y) { return std::sin(x) * gy(y); });
  Column gc(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) gc[i] = gy(g->node(i));
  const Column G = antideriv_y(*g, gc);
  Field want(16, g);
  for (std::size_t ix = 0; ix < 16; ++ix) {
    for (std::size_t iy = 0; iy < g->size(); ++iy) want(ix, iy) = -std::cos(want.x(ix)) * G[iy];
  }
  CHECK(max_diff(v_from_u(s), want) <= 1e-13);

  const Field r = random_band_limited(32, g, 4);
  const Field v = v_from_u(r);
  for (std::size_t ix = 0; ix < 32; ++ix) CHECK(v(ix, 0) == 0.0);
  CHECK(divergence_residual(r, v) <= 1e-10 * max_abs(dx_pow(r, 1)));
}

TEST_CASE("heat limit decays at the Dirichlet eigenvalue") {
  const double ymax = 60.0;
  const auto g = YGrid::build(257, ymax, 0.0);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.gevrey.jmax = 2;
  const Field u0 = Field::sample(8, g, [ymax](double, double y) { return std::sin(std::numbers::pi * y / ymax); });
  Stepper st(8, g, EulerTrace::zero(), cfg);
  State s{u0, 0.0};
  for (int n = 0; n < 1000; ++n) st.step(s);
  const std::size_t mid = 128;
  const double factor = s.u(3, mid) / u0(3, mid);
  const double expected = std::exp(-std::pow(std::numbers::pi / ymax, 2));
  CHECK(std::abs(factor - expected) / expected <= 1e-4);

  // x-independent data ignores the tangential viscosity.
  SolverConfig reg = cfg;
  reg.eps = 0.05;
  Stepper sr(8, g, EulerTrace::zero(), reg);
  State r{u0, 0.0};
  for (int n = 0; n < 1000; ++n) sr.step(r);
  CHECK(max_diff(r.u, s.u) <= 1e-10);
}

TEST_CASE("zero data stays exactly zero") {
  const auto g = YGrid::build(65, 20.0, 1.0);
  SolverConfig cfg;
  cfg.dt = 1e-2;
  cfg.gevrey.jmax = 4;
  Stepper st(16, g, EulerTrace::zero(), cfg);
  State s{Field(16, g), 0.0};
  for (int n = 0; n < 20; ++n) st.step(s);
  CHECK(max_abs(s.u) == 0.0);
}

TEST_CASE("manufactured solution: spatial order") {
  // Differences between successive y-refinements at a fixed small dt; the
  // shared time error cancels.
  const Field a = test::run_manufactured(33, 1e-3, 0.2);
  const Field b = test::run_manufactured(65, 1e-3, 0.2);
  const Field c = test::run_manufactured(129, 1e-3, 0.2);
  const double order = test::observed_order(test::nested_diff(a, b, 2), test::nested_diff(b, c, 2));
  MESSAGE("spatial order " << order);
  CHECK(order >= 1.9);

  // The solution also approaches u* itself.
  const test::Manufactured m{8.0};
  const Field exact = Field::sample(8, c.grid_ptr(), [&](double x, double y) { return m.u(0.2, x, y); });
  CHECK(max_diff(c, exact) <= 5e-3);
}

TEST_CASE("manufactured solution: temporal order") {
  const Field a = test::run_manufactured(65, 4e-3, 0.2);
  const Field b = test::run_manufactured(65, 2e-3, 0.2);
  const Field c = test::run_manufactured(65, 1e-3, 0.2);
  const double order = test::observed_order(max_diff(a, b), max_diff(b, c));
  MESSAGE("temporal order " << order);
  CHECK(order >= 0.9);
}

TEST_CASE("boundary values and divergence during a nonlinear run") {
  const auto g = YGrid::build(129, 30.0, 2.0);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.gevrey.jmax = 8;
  Stepper st(32, g, EulerTrace::cosine(0.1), cfg);
  State s{synth_gevrey2(1.0, 0.1, [](double y) { return y * std::exp(-y); }, 7, 32, g), 0.0};
  s.u = admissible_initial_data(s.u);
  for (int n = 0; n < 50; ++n) {
    st.step(s);
    const Field v = v_from_u(s.u);
    for (std::size_t ix = 0; ix < 32; ++ix) {
      REQUIRE(s.u(ix, 0) == 0.0);
      REQUIRE(s.u(ix, g->size() - 1) == 0.0);
      REQUIRE(v(ix, 0) == 0.0);
    }
    REQUIRE(divergence_residual(s.u, v) <= 1e-10 * std::max(1.0, max_abs(dx_pow(s.u, 1))));
  }
}

TEST_CASE("quadratic homogeneity") {
  // u solves the unforced system on [0, L]; c u(c t, x, sqrt(c) y) solves it
  // on [0, L/sqrt(c)].
  const double c = 2.0;
  const double L = 24.0;
  const auto ga = YGrid::build(97, L, 1.0);
  const auto gb = YGrid::build(97, L / std::sqrt(c), 1.0);
  auto u0 = [](double x, double y) { return 0.3 * (std::cos(x) + 0.5 * std::sin(2.0 * x)) * y * y * std::exp(-y); };
  SolverConfig ca;
  ca.dt = 2e-3;
  ca.gevrey.jmax = 4;
  SolverConfig cb = ca;
  cb.dt = ca.dt / c;
  Stepper sa(16, ga, EulerTrace::zero(), ca);
  Stepper sb(16, gb, EulerTrace::zero(), cb);
  State a{admissible_initial_data(Field::sample(16, ga, u0)), 0.0};
  State b{admissible_initial_data(Field::sample(16, gb, [&](double x, double y) { return c * u0(x, std::sqrt(c) * y); })), 0.0};
  for (int n = 0; n < 100; ++n) {
    sa.step(a);
    sb.step(b);
  }
  double err = 0.0;
  for (std::size_t ix = 0; ix < 16; ++ix) {
    for (std::size_t iy = 0; iy < 97; ++iy) err = std::max(err, std::abs(b.u(ix, iy) - c * a.u(ix, iy)));
  }
  MESSAGE("homogeneity error " << err);
  CHECK(err <= 1e-10 * c * max_abs(a.u));
}

TEST_CASE("run: t_end = 0 gives one row, reruns are bit-identical") {
  const auto g = YGrid::build(65, 20.0, 1.0);
  const Field u0 = synth_gevrey2(1.0, 0.1, [](double y) { return y * std::exp(-y); }, 3, 32, g);
  SolverConfig cfg;
  cfg.t_end = 0.0;
  cfg.gevrey.jmax = 8;
  CHECK(run(u0, EulerTrace::cosine(0.1), cfg, {}).rows.size() == 1);

  cfg.t_end = 0.05;
  RunOptions o;
  o.sample_every = 5;
  o.record_triple = true;
  const RunResult a = run(u0, EulerTrace::cosine(0.1), cfg, o);
  const RunResult b = run(u0, EulerTrace::cosine(0.1), cfg, o);
  REQUIRE(a.rows.size() == 11);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(std::memcmp(&a.rows[i], &b.rows[i], sizeof(DiagnosticsRow)) == 0);
  }
  CHECK_FALSE(a.blew_up);
}

TEST_CASE("non-finite state raises a blow-up") {
  const auto g = YGrid::build(33, 10.0, 0.0);
  SolverConfig cfg;
  cfg.gevrey.jmax = 2;
  Stepper st(8, g, EulerTrace::zero(), cfg);
  State s{Field(8, g), 0.25};
  s.u(2, 5) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(st.step(s), BlowUp);
}

TEST_CASE("sampled Euler trace interpolates in time") {
  std::vector<double> times{0.0, 1.0};
  std::vector<std::vector<double>> vals(2, std::vector<double>(8));
  for (std::size_t i = 0; i < 8; ++i) {
    const double x = 2.0 * std::numbers::pi * i / 8.0;
    vals[0][i] = std::cos(x);
    vals[1][i] = 3.0 * std::cos(x);
  }
  const EulerTrace tr = EulerTrace::sampled(times, vals);
  const auto mid = tr.sample(0.5, 8);
  const auto dt = tr.sample_dt(0.5, 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(mid[i] == doctest::Approx(2.0 * vals[0][i]).epsilon(1e-12));
    CHECK(dt[i] == doctest::Approx(2.0 * vals[0][i]).epsilon(1e-12));
  }
}
