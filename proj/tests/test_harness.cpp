#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nsfp/harness.hpp"

using namespace nsfp;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

const char* minimal = R"(
[time]
final_time = 0.01
[continuation]
epsilon_list = [0.3]
)";

std::string tiny(const std::string& extra_model = "", const std::string& eps = "[0.3]")
{
  return "[model]\n" + extra_model +
         "\n[grid]\nnx = 8\nq_radial = 8\nq_angular = 8\n[time]\nfinal_time = 0.01\nsamples = 4\n"
         "[continuation]\nepsilon_list = " +
         eps + "\n[output]\ndirectory = unused\n";
}

fs::path scratch(const std::string& name)
{
  const fs::path d = fs::temp_directory_path() / ("nsfp_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

} // namespace

TEST_CASE("minimal config gets defaults")
{
  const RunConfig c = parse_config_string(minimal);
  CHECK(c.nx == 32);
  CHECK(c.q_radial == 24);
  CHECK(c.params.gamma == 2.0);
  CHECK(c.params.epsilon == 0.3);
  CHECK(c.final_time == 0.01);
  // the echo parses back to the same configuration
  const RunConfig d = parse_config_string(c.echo());
  CHECK(d.echo() == c.echo());
}

TEST_CASE("config errors")
{
  CHECK_THROWS_WITH_AS(parse_config_string("[time]\nfinal_time = 1\n"), doctest::Contains("continuation.epsilon_list"),
                       Error);
  const std::string bad = std::string(minimal) + "[model]\ngama = 2\nfoo = 1\n";
  CHECK_THROWS_WITH_AS(parse_config_string(bad), doctest::Contains("model.gama"), Error);
  CHECK_THROWS_WITH_AS(parse_config_string(bad), doctest::Contains("model.foo"), Error);
  CHECK_THROWS_WITH_AS(parse_config_string(std::string(minimal) + "[model]\ngamma = 2\ngamma = 3\n"),
                       doctest::Contains("duplicate key 'model.gamma'"), Error);
  CHECK_THROWS_WITH_AS(parse_config_string(tiny("", "[0.2, 0.3]")), doctest::Contains("decreasing"), Error);
  CHECK_THROWS_WITH_AS(parse_config_string(tiny("gamma = 1.2")), doctest::Contains("gamma"), Error);
  CHECK_THROWS_AS(parse_config_string(tiny("init_recipe = wobbly")), Error);
  CHECK_THROWS_AS(parse_config_string("[grid]\nnx = 4\n" + std::string(minimal)), Error);
  CHECK_THROWS_AS(parse_config_string("[mystery]\nx = 1\n" + std::string(minimal)), Error);
  CHECK_THROWS_AS(parse_config("/nonexistent/file.cfg"), Error);
}

TEST_CASE("three-dimensional configurations are refused at run time")
{
  const RunConfig c = parse_config_string(tiny("dim = 3"));
  const RunResult r = run_simulation(c, 0.3, nullptr, "", "x");
  CHECK_FALSE(r.ok);
  CHECK(r.reason.find("dim = 2") != std::string::npos);
}

TEST_CASE("essential / residual split")
{
  Params p;
  const ScalarField a(10, p.rho_bar), b(10, 3 * p.rho_bar);
  CHECK(essential_residual_split(a, p) == std::pair<double, double>{1.0, 0.0});
  CHECK(essential_residual_split(b, p) == std::pair<double, double>{0.0, 1.0});
}

TEST_CASE("well-prepared initial data")
{
  Params p;
  p.epsilon = 0.1;
  const Grid2D g(16);
  auto space = std::make_shared<ConfigSpace>(p, 8, 8);
  CoupledIntegrator integ(p, space, g);
  for (const char* recipe : {"cosine", "balanced"}) {
    CAPTURE(recipe);
    const CoupledState s = well_prepared_init(recipe, 0.5, p, integ, true);
    ScalarField r = s.fluid.rho;
    for (double& v : r)
      v = (v - p.rho_bar) / p.epsilon;
    CHECK(std::abs(integrate(g, r)) < 1e-12);
    CHECK(max_abs(r) <= 0.5 + 1e-12);
    const VectorField u = s.fluid.velocity();
    CHECK(max_abs(div_c(g, u)) < 1e-10);
    CHECK(wall_normal_trace(g, u) < 1e-12);
    for (double v : s.dist.psi)
      CHECK(v >= 0.0);
  }
  const CoupledState e = well_prepared_init("cosine", 0.0, p, integ, true);
  CHECK(max_abs(e.fluid.m.x) == 0.0);
  for (double v : e.fluid.rho)
    CHECK(v == p.rho_bar);
  CHECK_THROWS_WITH_AS(well_prepared_init("cosine", 20.0, p, integ, true), doctest::Contains("nonpositive"), Error);
}

TEST_CASE("empirical order")
{
  CHECK(empirical_order(0.04, 0.01, 0.2, 0.1) == doctest::Approx(2.0));
  CHECK(std::isnan(empirical_order(1e-12, 0.01, 0.2, 0.1)));
}

TEST_CASE("single-epsilon continuation writes files and has no orders")
{
  const fs::path dir = scratch("cont");
  RunConfig c = parse_config_string(tiny());
  c.field_stride = 2;
  const ConvergenceReport r = run_continuation(c, dir.string());
  REQUIRE(r.runs.size() == 1);
  CHECK(r.orders.empty());
  CHECK(r.reference_ok);
  CHECK(r.runs[0].ok);
  CHECK(fs::exists(dir / "report.csv"));
  CHECK(fs::exists(dir / "ledger_0.3.csv"));
  CHECK(fs::exists(dir / "ledger_reference.csv"));
  std::ifstream ac(dir / "acoustic_0.3.csv");
  std::string header;
  std::getline(ac, header);
  CHECK(header == "t,k,l,b_n,a_n");

  // field dump: header then n rows of n values
  bool found = false;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("field_rho_eps0.3_", 0) != 0)
      continue;
    found = true;
    std::ifstream in(e.path());
    int nx = 0, ny = 0;
    in >> nx >> ny;
    CHECK(nx == 8);
    CHECK(ny == 8);
    int count = 0;
    double v;
    while (in >> v)
      ++count;
    CHECK(count == 64);
  }
  CHECK(found);
}

TEST_CASE("runs are deterministic")
{
  const RunConfig c = parse_config_string(tiny());
  const RunResult a = run_simulation(c, 0.3, nullptr, "", "a");
  const RunResult b = run_simulation(c, 0.3, nullptr, "", "b");
  REQUIRE(a.ok);
  CHECK(a.sup_rho_dev == b.sup_rho_dev);
  CHECK(a.div_l2l2 == b.div_l2l2);
  CHECK(a.ledger.samples.back().energy() == b.ledger.samples.back().energy());
}

TEST_CASE("verify suite passes at default resolution")
{
  const RunConfig c = parse_config_string(minimal);
  for (const CheckLine& l : run_verify(c)) {
    CAPTURE(l.name);
    CAPTURE(l.value);
    CHECK(l.pass);
  }
}
