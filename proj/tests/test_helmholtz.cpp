#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gen.hpp"
#include "nsfp/helmholtz.hpp"

using namespace nsfp;
constexpr double pi = std::numbers::pi;

TEST_CASE("summation by parts: grad_c and div_c are negative adjoints")
{
  testgen::Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Grid2D g(rng.integer(4, 20));
    const ScalarField f = testgen::scalar(rng, g);
    const VectorField v = testgen::vector(rng, g);
    const ScalarField d = div_c(g, v);
    double lhs = testgen::dot(g, grad_c(g, f), v), rhs = 0;
    for (std::size_t c = 0; c < g.size(); ++c)
      rhs -= f[c] * d[c] * g.cell_area();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("mode ordering and eigenvalues")
{
  const Grid2D g(16);
  const SpectralBasis B(g, 6);
  CHECK(B.mode(0).k == 1);
  CHECK(B.mode(0).l == 0);
  CHECK(B.mode(1).k == 0);
  CHECK(B.mode(1).l == 1);
  CHECK(B.mode(2).k == 1);
  CHECK(B.mode(2).l == 1);
  CHECK(B.mode(0).lambda == doctest::Approx(pi * pi));
  CHECK(B.mode(2).lambda == doctest::Approx(2 * pi * pi));
  CHECK(B.find(2, 0) == 3);
  CHECK(B.find(9, 9) == -1);
  // -div_c grad_c cos(pi x): sin^2(pi/n)/h^2 = (n sin(pi/n))^2
  CHECK(B.discrete_lambda(0) == doctest::Approx(std::pow(16 * std::sin(pi / 16), 2)).epsilon(1e-13));
  CHECK_THROWS_AS(neumann_eigenbasis(Grid2D(4), 16), Error);
}

TEST_CASE("mode coefficients of a pure (1,0) mode")
{
  Params p;
  p.epsilon = 0.1;
  const Grid2D g(32);
  const SpectralBasis B(g, 4);
  ScalarField rho = g.scalar();
  VectorField m = g.vector(1.0, 0.0);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      rho[g.index(i, j)] = 1.0 + p.epsilon * std::sqrt(2.0) * std::cos(pi * g.xc(i));
  const ModeSample s = mode_coefficients(rho, m, B, p, 4);
  CHECK(s.b[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.b[1]) < 1e-12);
  // V = (1, 0): a = pi^-1 int sqrt2 (-pi sin pi x) dx = -2 sqrt2 / pi, not zero
  CHECK(s.a[0] == doctest::Approx(-2 * std::sqrt(2.0) / pi).epsilon(1e-3));
  CHECK(std::abs(s.a[1]) < 1e-12);
}

TEST_CASE("constant field has no solenoidal part")
{
  const Grid2D g(16);
  const SpectralBasis B(g, 0);
  const Projection P = helmholtz_project(g.vector(1.0, 0.0), B);
  CHECK(max_abs(P.H.x) < 1e-12);
  CHECK(max_abs(P.H.y) < 1e-12);
  CHECK(max_abs(P.Hperp.x) == doctest::Approx(1.0));
}

TEST_CASE("gradient fields are annihilated, discrete solenoidal fields kept")
{
  const Grid2D g(24);
  const SpectralBasis B(g, 0);
  ScalarField phi = g.scalar();
  ScalarField s = g.scalar();
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      phi[g.index(i, j)] = std::cos(pi * g.xc(i)) * std::cos(2 * pi * g.xc(j)) + std::cos(3 * pi * g.xc(i));
      s[g.index(i, j)] = std::sin(pi * g.xc(i)) * std::sin(pi * g.xc(j));
    }
  const VectorField gp = grad_c(g, phi);
  const Projection P = helmholtz_project(gp, B);
  CHECK(max_abs(P.H.x) < 1e-12);
  CHECK(max_abs(P.H.y) < 1e-12);
  // rot of the stream function sin(pi x) sin(pi y), discrete centred differences
  VectorField w = g.vector();
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const double x = g.xc(i), y = g.xc(j), h = g.h;
      auto S = [](double a, double b) { return std::sin(pi * a) * std::sin(pi * b); };
      w.x[g.index(i, j)] = -(S(x, y + h) - S(x, y - h)) / (2 * h);
      w.y[g.index(i, j)] = (S(x + h, y) - S(x - h, y)) / (2 * h);
    }
  CHECK(max_abs(div_c(g, w)) < 1e-12);
  const Projection Q = helmholtz_project(w, B);
  for (std::size_t c = 0; c < g.size(); ++c) {
    CHECK(Q.H.x[c] == doctest::Approx(w.x[c]).epsilon(1e-10));
    CHECK(Q.H.y[c] == doctest::Approx(w.y[c]).epsilon(1e-10));
  }
}

TEST_CASE("property: projection algebra on random fields")
{
  testgen::Rng rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    const Grid2D g(2 * rng.integer(3, 12));
    const SpectralBasis B(g, 0);
    const VectorField v = testgen::vector(rng, g), w = testgen::vector(rng, g);
    const Projection pv = helmholtz_project(v, B), pw = helmholtz_project(w, B);
    const Projection pp = helmholtz_project(pv.H, B);
    CAPTURE(g.n);
    double d = 0;
    for (std::size_t c = 0; c < g.size(); ++c) {
      d = std::max(d, std::abs(pp.H.x[c] - pv.H.x[c]) + std::abs(pp.H.y[c] - pv.H.y[c]));
      CHECK(pv.H.x[c] + pv.Hperp.x[c] == doctest::Approx(v.x[c]).epsilon(1e-12));
    }
    CHECK(d < 1e-10);
    CHECK(std::abs(testgen::dot(g, pv.H, pw.Hperp)) < 1e-10);
    CHECK(max_abs(div_c(g, pv.H)) < 1e-10);
    CHECK(std::abs(integrate(g, pv.phi)) < 1e-12);
  }
}

TEST_CASE("truncated gradient part converges to the full one")
{
  const Grid2D g(16);
  const SpectralBasis B(g, g.n * g.n - 1);
  testgen::Rng rng(23);
  const VectorField v = testgen::vector(rng, g);
  const VectorField full = helmholtz_project(v, B).Hperp;
  const VectorField all = pn_truncate(v, B, B.size());
  double e = 0;
  for (std::size_t c = 0; c < g.size(); ++c)
    e = std::max({e, std::abs(all.x[c] - full.x[c]), std::abs(all.y[c] - full.y[c])});
  CHECK(e < 1e-10);
  const double e4 = l2_norm(g, pn_truncate(v, B, 4)), e40 = l2_norm(g, pn_truncate(v, B, 40));
  CHECK(e4 <= e40 + 1e-12);
}

TEST_CASE("frequency fit")
{
  std::vector<double> t, y;
  const double w = std::sqrt(2 * pi * pi) / 0.1; // 44.429
  for (int s = 0; s <= 400; ++s) {
    t.push_back(s * 0.5 / 400);
    y.push_back(0.3 + std::cos(w * t.back() + 0.4));
  }
  CHECK(w == doctest::Approx(44.4288).epsilon(1e-5));
  CHECK(fit_frequency(t, y) == doctest::Approx(w).epsilon(0.01));
  std::vector<double> flat(t.size(), 2.0);
  CHECK_THROWS_WITH_AS(fit_frequency(t, flat), doctest::Contains("no signal"), Error);
}
