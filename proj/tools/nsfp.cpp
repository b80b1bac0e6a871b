// Command-line driver: simulate, continuation, verify.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "nsfp/harness.hpp"
#include "nsfp/parallel.hpp"

namespace fs = std::filesystem;

namespace {

nsfp::RunConfig load(const std::string& path, const std::string& out_override)
{
  nsfp::RunConfig cfg = nsfp::parse_config(path);
  if (!out_override.empty())
    cfg.output_dir = out_override;
  fs::create_directories(cfg.output_dir);
  std::ofstream echo(fs::path(cfg.output_dir) / "config_effective.txt");
  echo << cfg.echo();
  return cfg;
}

void print_run(const nsfp::RunResult& r)
{
  std::cout << "eps " << r.epsilon << ": " << (r.ok ? "ok" : "FAILED (" + r.reason + ")") << '\n'
            << "  steps " << r.steps << "  dt " << r.dt << "  wall " << std::setprecision(3) << r.seconds << " s\n"
            << std::setprecision(6) << "  sup ||rho - rho_bar||   " << r.sup_rho_dev << '\n'
            << "  ||div u||_L2L2         " << r.div_l2l2 << '\n';
  if (std::isfinite(r.solenoidal_err))
    std::cout << "  ||H[u] - U||_L2L2      " << r.solenoidal_err << '\n'
              << "  ||rho_p - ref||_L2L2   " << r.rho_p_err << '\n';
  std::cout << "  omega fit / theory     " << r.omega_fit << " / " << r.omega_theory << '\n'
            << "  energy monitor         " << (r.energy_monitor ? "pass" : "fail") << " (worst excess "
            << r.energy_excess << ")\n"
            << "  exp monitor            " << (r.exp_monitor ? "pass" : "fail") << '\n'
            << "  mass drift rho / psi   " << r.mass_drift << " / " << r.psi_mass_drift << '\n';
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Compressible Navier-Stokes / Fokker-Planck solver with Mach continuation"};
  app.require_subcommand(1);
  int threads = 1;
  std::string out_dir;
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", out_dir, "overrides [output] directory");

  std::string config;
  auto* sim = app.add_subcommand("simulate", "single compressible run at the first epsilon");
  sim->add_option("config", config)->required()->check(CLI::ExistingFile);
  auto* cont = app.add_subcommand("continuation", "reference plus one run per epsilon, writes report.csv");
  cont->add_option("config", config)->required()->check(CLI::ExistingFile);
  auto* ver = app.add_subcommand("verify", "configuration-space and projection identity checks");
  ver->add_option("config", config)->required()->check(CLI::ExistingFile);
  for (auto* s : {sim, cont, ver}) {
    s->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    s->add_option("--output-dir", out_dir, "overrides [output] directory");
  }

  CLI11_PARSE(app, argc, argv);
  nsfp::set_threads(threads);

  try {
    if (*ver) {
      const nsfp::RunConfig cfg = nsfp::parse_config(config);
      bool all = true;
      for (const auto& c : nsfp::run_verify(cfg)) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << std::left << std::setw(44) << c.name << std::right
                  << std::scientific << std::setprecision(3) << std::setw(12) << c.value << "  (limit "
                  << c.limit << ")\n";
        all = all && c.pass;
      }
      return all ? 0 : 1;
    }
    const nsfp::RunConfig cfg = load(config, out_dir);
    if (*sim) {
      const double eps = cfg.epsilon_list.front();
      const nsfp::RunResult r =
          nsfp::run_simulation(cfg, eps, nullptr, cfg.output_dir, "eps" + nsfp::format_epsilon(eps));
      print_run(r);
      return r.ok && r.energy_monitor ? 0 : 1;
    }
    const nsfp::ConvergenceReport rep = nsfp::run_continuation(cfg, cfg.output_dir);
    if (cfg.reference)
      std::cout << "reference: " << (rep.reference_ok ? "ok" : "FAILED (" + rep.reference_reason + ")") << '\n';
    bool ok = !cfg.reference || rep.reference_ok;
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
      print_run(rep.runs[i]);
      ok = ok && rep.runs[i].ok;
      if (i > 0) {
        const auto& o = rep.orders[i - 1];
        std::cout << "  empirical orders vs previous eps: rho " << o.rho_dev << ", div u " << o.div_u
                  << ", H[u]-U " << o.solenoidal << ", rho_p " << o.rho_p << '\n';
      }
    }
    std::cout << "report written to " << (fs::path(cfg.output_dir) / "report.csv").string() << '\n';
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
