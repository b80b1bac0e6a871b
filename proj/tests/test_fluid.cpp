#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gen.hpp"
#include "nsfp/fluid.hpp"

using namespace nsfp;
constexpr double pi = std::numbers::pi;

namespace {

FluidState smooth_state(const Grid2D& g, double eps_amp)
{
  FluidState s(g, 1.0);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const double x = g.xc(i), y = g.xc(j);
      const auto c = g.index(i, j);
      s.rho[c] = 1.0 + eps_amp * std::cos(pi * x) * std::cos(pi * y);
      s.m.x[c] = s.rho[c] * 0.3 * std::sin(pi * x) * std::cos(pi * y);
      s.m.y[c] = s.rho[c] * 0.2 * std::sin(pi * y);
    }
  return s;
}

double total_mass(const FluidState& s) { return integrate(s.grid, s.rho); }

} // namespace

TEST_CASE("pressure potential")
{
  Params p;
  CHECK(pressure_potential(1.1, p) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(pressure_potential(1.0, p) == 0.0);
  p.gamma = 1.7;
  // (rho^g - 1 - g (rho - 1)) / (g - 1) for small deviation stays accurate
  const double d = 1e-7;
  CHECK(pressure_potential(1.0 + d, p) == doctest::Approx(0.5 * 1.7 * d * d).epsilon(1e-6));
  CHECK_THROWS_AS(pressure_potential(0.0, p), Error);
}

TEST_CASE("viscous stress")
{
  Params p;
  TensorField G(1);
  G.xx[0] = 1;
  G.yy[0] = -1;
  TensorField S = stress(G, p);
  CHECK(S.xx[0] == doctest::Approx(p.mu_s));
  CHECK(S.yy[0] == doctest::Approx(-p.mu_s));
  CHECK(S.xy[0] == 0.0);
  // rigid rotation
  G.xx[0] = G.yy[0] = 0;
  G.xy[0] = -1;
  G.yx[0] = 1;
  S = stress(G, p);
  CHECK(S.xx[0] == 0.0);
  CHECK(S.xy[0] == 0.0);
  CHECK(S.yx[0] == 0.0);
  // pure dilation: only bulk viscosity
  G = TensorField(1);
  G.xx[0] = G.yy[0] = 1;
  S = stress(G, p);
  CHECK(S.xx[0] == doctest::Approx(2 * p.mu_b));
}

TEST_CASE("rest state is a fixed point")
{
  Params p;
  const Grid2D g(12);
  FluidState s(g, p.rho_bar);
  for (int k = 0; k < 50; ++k)
    s = fluid_step(s, {}, {}, 1e-3, p);
  for (std::size_t c = 0; c < g.size(); ++c) {
    CHECK(s.rho[c] == p.rho_bar);
    CHECK(s.m.x[c] == 0.0);
    CHECK(s.m.y[c] == 0.0);
  }
}

TEST_CASE("mass conservation and CFL errors")
{
  Params p;
  p.epsilon = 0.3;
  const Grid2D g(16);
  FluidState s = smooth_state(g, 0.05);
  const double m0 = total_mass(s);
  const double dt = 0.5 * fluid_dt_limits(s, p).min();
  for (int k = 0; k < 40; ++k)
    s = fluid_step(s, {}, {}, dt, p);
  CHECK(std::abs(total_mass(s) - m0) / m0 < 1e-13);
  CHECK_THROWS_WITH_AS(fluid_step(s, {}, {}, 5 * fluid_dt_limits(s, p).min(), p), doctest::Contains("CFL"), Error);
}

TEST_CASE("density floor")
{
  Params p;
  const Grid2D g(4);
  FluidState s(g, 1.0);
  s.rho[5] = 1e-10;
  CHECK_THROWS_WITH_AS(fluid_rhs(s, {}, {}, p), doctest::Contains("density floor"), Error);
}

TEST_CASE("energy decays without forcing")
{
  Params p;
  p.epsilon = 0.2;
  const Grid2D g(16);
  FluidState s = smooth_state(g, 0.02);
  double prev = kinetic_energy(s) + pressure_energy(s, p);
  const double dt = 0.5 * fluid_dt_limits(s, p).min();
  for (int k = 0; k < 60; ++k) {
    s = fluid_step(s, {}, {}, dt, p);
    const double e = kinetic_energy(s) + pressure_energy(s, p);
    CHECK(e <= prev * (1 + 1e-12));
    prev = e;
  }
}

TEST_CASE("manufactured solution: first-order convergence or better")
{
  // Steady rho = 1 + a cos(pi x), u = 0 kept in place by a momentum source that
  // balances the pressure gradient.
  Params p;
  p.epsilon = 0.5;
  const double a = 0.1, T = 0.05;
  auto run = [&](int n) {
    const Grid2D g(n);
    FluidState s(g, 1.0);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        s.rho[g.index(i, j)] = 1.0 + a * std::cos(pi * g.xc(i));
    const FluidSource src = [&](double, ScalarField&, VectorField& sm) {
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double x = g.xc(i), r = 1.0 + a * std::cos(pi * x);
          sm.x[g.index(i, j)] = p.c_p * p.gamma * std::pow(r, p.gamma - 1) * (-a * pi * std::sin(pi * x)) /
                                (p.epsilon * p.epsilon);
        }
    };
    const double dt0 = 0.4 * fluid_dt_limits(s, p).min();
    const int steps = static_cast<int>(std::ceil(T / dt0));
    for (int k = 0; k < steps; ++k)
      s = fluid_step(s, {}, {}, T / steps, p, nullptr, src);
    double e = 0;
    for (std::size_t c = 0; c < g.size(); ++c)
      e += std::abs(s.m.x[c]) + std::abs(s.rho[c] - 1.0 - a * std::cos(pi * g.xc(static_cast<int>(c % n))));
    return e * g.cell_area();
  };
  const double e1 = run(16), e2 = run(32);
  const double order = std::log2(e1 / e2);
  CAPTURE(e1);
  CAPTURE(e2);
  CHECK(order >= 1.0);
}

TEST_CASE("property: rhs vanishes on rest states of any admissible density level")
{
  testgen::Rng rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    Params p;
    p.rho_bar = rng.uniform(0.5, 2.0);
    p.gamma = rng.uniform(1.6, 3.0);
    p.epsilon = rng.uniform(0.05, 0.9);
    const Grid2D g(rng.integer(4, 12));
    const FluidState s(g, p.rho_bar);
    const FluidRhs r = fluid_rhs(s, {}, {}, p);
    CHECK(max_abs(r.rho) == 0.0);
    CHECK(max_abs(r.m.x) < 1e-12);
    CHECK(max_abs(r.m.y) < 1e-12);
  }
}
