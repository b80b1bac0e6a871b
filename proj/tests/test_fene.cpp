#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gen.hpp"
#include "nsfp/fene.hpp"

using namespace nsfp;
constexpr double pi = std::numbers::pi;

namespace {

// Composite Simpson on [0, sqrt(b)] of 2 pi r exp(-U(r^2/2)); the integrand is
// (1 - r^2/b)^(b/2) which is smooth enough for this at b >= 4.
double z_simpson(double b, int n = 20000)
{
  const double R = std::sqrt(b), h = R / n;
  auto f = [&](double r) { return 2 * pi * r * std::pow(std::max(0.0, 1 - r * r / b), 0.5 * b); };
  double s = f(0) + f(R);
  for (int i = 1; i < n; ++i)
    s += (i % 2 ? 4 : 2) * f(i * h);
  return s * h / 3;
}

} // namespace

TEST_CASE("FENE potential values")
{
  const auto v = fene_eval(1.0, 4.0);
  CHECK(v.U == doctest::Approx(2 * std::log(2.0)).epsilon(1e-15));
  CHECK(v.dU == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(fene_eval(0.0, 4.0).U == 0.0);
  CHECK(fene_eval(0.0, 4.0).dU == doctest::Approx(1.0));
  CHECK_THROWS_WITH_AS(fene_eval(2.0, 4.0), doctest::Contains("finite extensibility"), Error);
  CHECK_THROWS_AS(fene_eval(-0.1, 4.0), Error);
}

TEST_CASE("Gauss-Legendre is exact to degree 2n-1")
{
  const auto [x, w] = gauss_legendre(6);
  double s = 0, s0 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += w[i] * std::pow(x[i], 10);
    s0 += w[i];
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s == doctest::Approx(2.0 / 11).epsilon(1e-14));
}

TEST_CASE("Maxwellian of b = 4")
{
  const SpringPotential pot{4.0};
  const Maxwellian m = build_maxwellian(pot, QGrid(24, 16, pot.radius()));
  CHECK(std::abs(m.Z - 4 * pi / 3) < 1e-12);
  CHECK(std::abs(m.Z - z_simpson(4.0)) < 1e-9);
  CHECK(std::abs(m.mass() - 1.0) < 1e-12);
  CHECK(m.face.back() == 0.0);
  CHECK(m(0.0) == doctest::Approx(3 / (4 * pi)));
}

TEST_CASE("coarse q-grids are rejected")
{
  const SpringPotential pot{4.0};
  CHECK_THROWS_WITH_AS(build_maxwellian(pot, QGrid(2, 4, pot.radius())), doctest::Contains("insufficient"), Error);
}

TEST_CASE("structural assumptions at b = 4")
{
  Params p;
  const ConfigSpace space(p, 24, 16);
  const AssumptionReport r = verify_assumptions(space);
  REQUIRE(r.springs.size() == 1);
  const auto& s = r.springs[0];
  CHECK(r.ok());
  CHECK(s.theta_fit == doctest::Approx(2.0).epsilon(0.05));
  // dist * U' = b / (R + |q|) = 4 / (2 + |q|) lies in [1, 2]
  CHECK(s.c3 >= 1.0 - 1e-6);
  CHECK(s.c4 <= 2.0 + 1e-6);
}

TEST_CASE("gradient identity of the Maxwellian")
{
  const SpringPotential pot{4.0};
  // s = 1/2 at |q| = 1: U' = 1 / (1 - 1/4)
  CHECK(pot.eval(0.5).dU == doctest::Approx(4.0 / 3.0));
  double prev = 0;
  for (int nr : {12, 24, 48}) {
    const Maxwellian m = build_maxwellian(pot, QGrid(nr, 8, pot.radius()));
    const auto gi = maxwellian_gradient_identity_check(m);
    CHECK(gi.origin == 0.0);
    if (prev > 0)
      CHECK(gi.max_residual <= 0.5 * prev);
    prev = gi.max_residual;
  }
}

TEST_CASE("two-spring configuration space")
{
  Params p;
  p.K = 2;
  p.b = {4, 6};
  p.A.resize(2, 2);
  p.A << 2, -1, -1, 2;
  const ConfigSpace space(p, 8, 8);
  CHECK(space.size() == 64u * 64u);
  double total = 0;
  for (double w : space.weight())
    total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(space.stride(0) * space.stride(1) == 64u);
}

TEST_CASE("property: normalization and partition constant for random b")
{
  testgen::Rng rng(3);
  for (int trial = 0; trial < 12; ++trial) {
    const double b = rng.uniform(4.0, 30.0);
    const SpringPotential pot{b};
    const Maxwellian m = build_maxwellian(pot, QGrid(24, 16, pot.radius()));
    CAPTURE(b);
    CHECK(std::abs(m.mass() - 1.0) < 1e-10);
    CHECK(m.Z == doctest::Approx(2 * pi * b / (b + 2)).epsilon(1e-8));
    CHECK(m.Z == doctest::Approx(z_simpson(b)).epsilon(1e-7));
    for (std::size_t j = 1; j < m.node.size(); ++j)
      CHECK(m.node[j] < m.node[j - 1]);
  }
}
