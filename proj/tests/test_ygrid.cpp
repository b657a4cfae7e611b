#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "prandtl/ygrid.hpp"
#include "test_support.hpp"

using namespace prandtl;

namespace {

double max_interior_error(const YGrid& g, const Column& got, const std::function<double(double)>& f) {
  double e = 0.0;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) e = std::max(e, std::abs(got[i] - f(g.node(i))));
  return e;
}

Column sample(const YGrid& g, const std::function<double(double)>& f) {
  Column c(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) c[i] = f(g.node(i));
  return c;
}

}  // namespace

TEST_CASE("three-node uniform grid") {
  const auto g = YGrid::build(3, 2.0, 0.0);
  CHECK(g->node(0) == 0.0);
  CHECK(g->node(1) == 1.0);
  CHECK(g->node(2) == 2.0);
}

TEST_CASE("stretched grid endpoints and spacing ratio") {
  const auto g = YGrid::build(257, 60.0, 4.0);
  CHECK(g->node(0) == 0.0);
  CHECK(g->node(256) == 60.0);
  CHECK(YGrid::stretch_map(0.0, 4.0) == 0.0);
  CHECK(YGrid::stretch_map(1.0, 4.0) == 1.0);
  for (std::size_t i = 1; i < g->size(); ++i) CHECK(g->node(i) > g->node(i - 1));
  const double first = g->spacing(0);
  const double last = g->spacing(255);
  CHECK(first < last);
  // Direct evaluation of s(xi) = xi / (1 + c - c xi).
  auto s = [](double xi) { return xi / (1.0 + 4.0 - 4.0 * xi); };
  const double expected = (s(1.0) - s(255.0 / 256.0)) / (s(1.0 / 256.0) - s(0.0));
  CHECK(last / first == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("quadrature weights") {
  const auto g = YGrid::build(101, 7.5, 2.0);
  const auto q = g->qweights();
  for (double w : q) CHECK(w >= 0.0);
  CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(7.5).epsilon(1e-14));
  // Exact for piecewise-linear integrands: p(y) = 3y - 1.
  const Column p = sample(*g, [](double y) { return 3.0 * y - 1.0; });
  CHECK(g->integrate(p) == doctest::Approx(1.5 * 7.5 * 7.5 - 7.5).epsilon(1e-13));
}

TEST_CASE("derivatives exact on low-degree polynomials") {
  const auto g = YGrid::build(65, 5.0, 3.0);
  const Column lin = sample(*g, [](double y) { return y; });
  for (double v : d_y(*g, lin)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  const Column quad = sample(*g, [](double y) { return y * y; });
  const Column dq = d_y(*g, quad);
  for (std::size_t i = 0; i < g->size(); ++i) CHECK(dq[i] == doctest::Approx(2.0 * g->node(i)).epsilon(1e-11));
  const Column d2 = d_yy(*g, quad);
  for (std::size_t i = 1; i + 1 < g->size(); ++i) CHECK(d2[i] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("second-order convergence of d_y and d_yy on exp(-y)") {
  auto f = [](double y) { return std::exp(-y); };
  double e1[2];
  double e2[2];
  const std::size_t sizes[2] = {129, 257};
  for (int r = 0; r < 2; ++r) {
    const auto g = YGrid::build(sizes[r], 10.0, 0.0);
    const Column c = sample(*g, f);
    e1[r] = max_interior_error(*g, d_y(*g, c), [](double y) { return -std::exp(-y); });
    e2[r] = max_interior_error(*g, d_yy(*g, c), f);
  }
  CHECK(test::observed_order(e1[0], e1[1]) >= 1.9);
  CHECK(test::observed_order(e2[0], e2[1]) >= 1.9);
}

TEST_CASE("antiderivative") {
  const auto g = YGrid::build(33, 4.0, 1.5);
  const Column ones(g->size(), 1.0);
  const Column a = antideriv_y(*g, ones);
  for (std::size_t i = 0; i < g->size(); ++i) CHECK(a[i] == doctest::Approx(g->node(i)).epsilon(1e-14));
  const Column z = antideriv_y(*g, Column(g->size(), 0.0));
  for (double v : z) CHECK(v == 0.0);
  const auto u = YGrid::build(41, 4.0, 0.0);
  const Column two_y = sample(*u, [](double y) { return 2.0 * y; });
  const Column sq = antideriv_y(*u, two_y);
  for (std::size_t i = 0; i < u->size(); ++i) {
    CHECK(sq[i] == doctest::Approx(u->node(i) * u->node(i)).epsilon(1e-13));
  }
}

TEST_CASE("d_y of the antiderivative converges at second order") {
  auto f = [](double y) { return std::cos(y) * std::exp(-0.3 * y); };
  double e[2];
  const std::size_t sizes[2] = {129, 257};
  for (int r = 0; r < 2; ++r) {
    const auto g = YGrid::build(sizes[r], 8.0, 1.0);
    const Column c = sample(*g, f);
    e[r] = max_interior_error(*g, d_y(*g, antideriv_y(*g, c)), f);
  }
  CHECK(test::observed_order(e[0], e[1]) >= 1.9);
}

TEST_CASE("d_y_transpose is the matrix transpose") {
  const auto g = YGrid::build(23, 3.0, 2.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Column a(g->size());
  Column b(g->size());
  for (auto& v : a) v = u(rng);
  for (auto& v : b) v = u(rng);
  const Column da = d_y(*g, a);
  Column dtb(g->size());
  d_y_transpose(*g, b, dtb);
  double lhs = 0.0;
  double rhs = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    lhs += da[i] * b[i];
    rhs += a[i] * dtb[i];
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("helmholtz solves") {
  const auto g = YGrid::build(129, 12.0, 2.0);
  const std::size_t n = g->size();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  SUBCASE("b = 0 divides by a") {
    Column rhs(n);
    for (auto& v : rhs) v = u(rng);
    const Column x = solve_helmholtz_y(*g, 2.5, 0.0, rhs, {EndCondition::Neumann0, EndCondition::Neumann0});
    for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(rhs[i] / 2.5).epsilon(1e-14));
  }
  SUBCASE("round trip on random columns, both end conditions") {
    for (auto bc : {EndConditions{EndCondition::Dirichlet0, EndCondition::Dirichlet0},
                    EndConditions{EndCondition::Dirichlet0, EndCondition::Neumann0}}) {
      Column a(n);
      Column xs(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = 1.0 + 0.5 * (u(rng) + 1.0);
        xs[i] = u(rng);
      }
      xs[0] = 0.0;
      if (bc.top == EndCondition::Dirichlet0) xs[n - 1] = 0.0;
      const Column rhs = apply_helmholtz_y(*g, a, 0.7, xs, bc);
      const Column x = solve_helmholtz_y(*g, a, 0.7, rhs, bc);
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(x[i] - xs[i]));
      CHECK(err <= 1e-10);
    }
  }
  SUBCASE("singular system rejected") {
    Column rhs(n, 1.0);
    CHECK_THROWS_AS(solve_helmholtz_y(*g, 0.0, 0.0, rhs, {}), std::invalid_argument);
  }
}

TEST_CASE("helmholtz manufactured solution converges at second order") {
  const double ymax = 5.0;
  auto exact = [ymax](double y) { return std::sin(M_PI * y / ymax); };
  const double k2 = (M_PI / ymax) * (M_PI / ymax);
  double e[2];
  const std::size_t sizes[2] = {65, 129};
  for (int r = 0; r < 2; ++r) {
    const auto g = YGrid::build(sizes[r], ymax, 1.0);
    Column rhs = sample(*g, [&](double y) { return (1.0 + k2) * exact(y); });
    const Column x = solve_helmholtz_y(*g, 1.0, 1.0, rhs, {});
    double err = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) err = std::max(err, std::abs(x[i] - exact(g->node(i))));
    e[r] = err;
  }
  CHECK(test::observed_order(e[0], e[1]) >= 1.9);
}

TEST_CASE("tridiagonal weighted transpose") {
  const auto g = YGrid::build(17, 2.0, 1.0);
  const std::size_t n = g->size();
  Column a(n, 3.0);
  const Tridiagonal m = helmholtz_matrix(*g, a, 1.3, {EndCondition::Dirichlet0, EndCondition::Neumann0});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  Column w(n);
  Column x(n);
  Column z(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = u(rng);
    x[i] = u(rng);
    z[i] = u(rng);
  }
  const Tridiagonal mt = m.weighted_transpose(w);
  Column mx(n);
  Column mtz(n);
  m.apply(x, mx);
  mt.apply(z, mtz);
  double lhs = 0.0;
  double rhs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lhs += mx[i] * z[i] * w[i];
    rhs += x[i] * mtz[i] * w[i];
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("finite-difference weights") {
  const std::vector<double> nodes{0.0, 0.5, 1.5, 3.0};
  const auto w = fd_weights(0.5, nodes, 2);
  // d/dy and d^2/dy^2 of y^2 at 0.5.
  double d1 = 0.0;
  double d2 = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    d1 += w[1][i] * nodes[i] * nodes[i];
    d2 += w[2][i] * nodes[i] * nodes[i];
  }
  CHECK(d1 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(d2 == doctest::Approx(2.0).epsilon(1e-12));
}
