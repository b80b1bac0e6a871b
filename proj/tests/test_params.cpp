#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "nsfp/params.hpp"

using namespace nsfp;

TEST_CASE("baseline parameters are admissible")
{
  const ValidationReport r = validate(Params::baseline());
  CHECK(r.valid());
  CHECK(r.a0 == doctest::Approx(2.0));
  CHECK(Params{}.pressure_derivative(1.0) == doctest::Approx(2.0));
}

TEST_CASE("validation names each violated constraint")
{
  Params p;
  p.gamma = 1.5;
  p.mu_s = -1;
  p.beta_comp = 1.0;
  const ValidationReport r = validate(p);
  CHECK_FALSE(r.valid());
  CHECK(r.violations.size() >= 3);
  bool gamma = false;
  for (const auto& v : r.violations)
    gamma = gamma || v.find("gamma") != std::string::npos;
  CHECK(gamma);
}

TEST_CASE("rouse matrix eigenvalue")
{
  Eigen::MatrixXd A(2, 2);
  A << 2, -1, -1, 2;
  CHECK(rouse_min_eigenvalue(A) == doctest::Approx(1.0).epsilon(1e-14));
  Eigen::MatrixXd B(2, 2);
  B << 1, 2, 0, 1;
  CHECK_THROWS_WITH_AS(rouse_min_eigenvalue(B), doctest::Contains("not symmetric"), Error);

  Params p;
  p.K = 2;
  p.b = {4, 4};
  p.A = B;
  CHECK_FALSE(validate(p).valid());
}

TEST_CASE("scaled numbers")
{
  Params p;
  p.epsilon = 0.2;
  const ScaledNumbers s = scaled_numbers(p);
  CHECK(s.pressure_prefactor == doctest::Approx(25.0));
  CHECK(s.interaction == doctest::Approx(p.xi_bar));
}

TEST_CASE("property: validity follows the individual constraints")
{
  testgen::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Params p;
    p.gamma = rng.uniform(1.0, 3.0);
    p.mu_s = rng.uniform(-0.5, 2.0);
    p.mu_b = rng.uniform(-0.5, 2.0);
    p.beta_comp = rng.uniform(-0.2, 1.2);
    p.epsilon = rng.uniform(-0.1, 1.1);
    p.b = {rng.uniform(1.0, 10.0)};
    const bool expect = p.gamma > 1.5 && p.mu_s > 0 && p.mu_b >= 0 && p.beta_comp > 0 && p.beta_comp < 1 &&
                        p.epsilon > 0 && p.epsilon < 1 && p.b[0] > 2;
    CAPTURE(trial);
    CHECK(validate(p).valid() == expect);
  }
}
