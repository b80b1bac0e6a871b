#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nsfp/config.hpp"
#include "nsfp/coupled.hpp"

namespace nsfp {

/// Initial data rho = rho_bar + eps r0, solenoidal stream-function velocity and
/// psi_hat = 1 + amplitude g(x) h(|q|). Recipes:
///   equilibrium  rest state
///   cosine       r0 = amplitude cos(pi x)
///   balanced     r0 = eps Pi0 / p'(rho_bar), Pi0 the initial pressure of the limit system
///   acoustic     u = 0, psi_hat = 1, r0 = amplitude cos(pi x)
CoupledState well_prepared_init(const std::string& recipe, double amplitude, const Params& params,
                                CoupledIntegrator& integrator, bool polymer);

/// Cell fractions inside and outside [rho_bar/2, 2 rho_bar].
std::pair<double, double> essential_residual_split(const ScalarField& rho, const Params& params);

/// Samples of the incompressible reference at the shared sample times.
struct ReferenceRun {
  std::vector<double> t;
  std::vector<VectorField> U;
  std::vector<ScalarField> rho_p;
  EnergyLedger ledger;
  double dt = 0;
  int steps = 0;
};

struct RunResult {
  double epsilon = 0;
  bool ok = false;
  std::string reason;

  double sup_rho_dev = 0;   // sup_t ||rho - rho_bar||_L2
  double div_l2l2 = 0;      // ||div u||_{L2 L2}
  double solenoidal_err = 0; // ||H[u] - U||_{L2 L2}
  double rho_p_err = 0;     // ||rho_p - rho_p_ref||_{L2 L2}
  double omega_fit = 0, omega_theory = 0, acoustic_residual = 0;
  double residual_fraction = 0; // max over samples
  bool energy_monitor = false, exp_monitor = false, dissipation_nonnegative = false;
  double energy_excess = 0; // worst (E + int D - E0) / |E0|
  double mass_drift = 0, psi_mass_drift = 0;
  double dt = 0;
  int steps = 0;
  double seconds = 0;

  EnergyLedger ledger;
  AcousticTrace trace;
};

struct ConvergenceReport {
  std::vector<RunResult> runs;
  bool reference_ok = false;
  std::string reference_reason;
  /// order[i] compares runs i and i+1; NaN when a metric is at solver tolerance.
  struct Orders {
    double rho_dev, div_u, solenoidal, rho_p;
  };
  std::vector<Orders> orders;
  void write_csv(const std::string& path) const;
};

/// Compressible run at the given epsilon. Metrics against the reference are
/// filled when ref is not null. Files go to out_dir when it is not empty.
RunResult run_simulation(const RunConfig& cfg, double epsilon, const ReferenceRun* ref, const std::string& out_dir,
                         const std::string& tag);
ReferenceRun run_reference(const RunConfig& cfg, const std::string& out_dir);
ConvergenceReport run_continuation(const RunConfig& cfg, const std::string& out_dir);

/// Empirical order log(m_i / m_j) / log(e_i / e_j); NaN unless both exceed 1e-9.
double empirical_order(double m_i, double m_j, double e_i, double e_j);

struct CheckLine {
  std::string name;
  double value;
  double limit;
  bool pass;
};

/// Structural checks of the configuration space and the projection algebra.
std::vector<CheckLine> run_verify(const RunConfig& cfg);

/// Plain text: "nx ny" then rows of 17-digit values.
void write_field(const std::string& path, const Grid2D& g, const ScalarField& f);
void write_acoustic_csv(const std::string& path, const AcousticTrace& trace);
std::string format_epsilon(double eps);

} // namespace nsfp
