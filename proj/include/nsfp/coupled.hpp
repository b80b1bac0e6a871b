#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsfp/fluid.hpp"
#include "nsfp/fokker_planck.hpp"
#include "nsfp/helmholtz.hpp"

namespace nsfp {

struct CoupledState {
  FluidState fluid;
  ConfigDistribution dist;
  ScalarField rho_p; // number density, recomputed from psi_hat after each step
  TensorField tau;   // tau1 of the current psi_hat
  bool polymer = true; // false: psi_hat is frozen and exerts no force

  double time() const { return fluid.time; }
};

struct LedgerSample {
  double t = 0;
  // energy
  double kinetic = 0, pressure = 0, entropy = 0, interaction = 0;
  // dissipation rates
  double viscous = 0, bulk = 0, fisher_x = 0, fisher_q = 0, density_gradient = 0;
  double cumulative = 0;  // integral of the dissipation rate up to t (trapezoid)
  bool monitor_ok = true; // E + int D <= E(0) + tol |E(0)|
  bool exp_monitor_ok = true; // (E + c) + int D <= e^t (E(0) + c), c = (1-beta)|Omega|

  double energy() const { return kinetic + pressure + entropy + interaction; }
  double dissipation() const { return viscous + bulk + fisher_x + fisher_q + density_gradient; }
};

class EnergyLedger {
public:
  double tolerance = 1e-6;
  std::vector<LedgerSample> samples;

  bool monitor_ok() const;
  bool exp_monitor_ok() const;
  bool dissipation_nonnegative() const;
  /// Largest (E + int D) - E(0), relative to |E(0)|.
  double worst_excess() const;
  void write_csv(const std::string& path) const;
};

/// Evaluates all ledger terms of the state without touching a ledger.
LedgerSample ledger_terms(const CoupledState& state, const Params& params);
/// Appends one sample, integrating the dissipation from the previous sample.
void energy_ledger_update(const CoupledState& state, const Params& params, EnergyLedger& ledger);

/// Coupled stepper. Holds the Fokker-Planck operators and the projection basis.
class CoupledIntegrator {
public:
  CoupledIntegrator(const Params& params, std::shared_ptr<const ConfigSpace> space, const Grid2D& grid);

  /// Fluid step with tau1 and rho_p frozen, then the Fokker-Planck step with
  /// the stage-averaged velocity, then refresh of rho_p and tau1.
  void coupled_step(CoupledState& state, double dt);
  /// Projection step of the limit system with rho = rho_bar.
  void incompressible_step(CoupledState& state, double dt);
  /// Largest admissible dt for the current state (no safety factor).
  double max_dt(const CoupledState& state, bool incompressible = false) const;
  /// Builds the state, filling rho_p and tau from psi_hat.
  CoupledState make_state(FluidState fluid, ConfigDistribution dist, bool polymer = true) const;

  const Params& params() const { return params_; }
  const SpectralBasis& basis() const { return basis_; }
  std::shared_ptr<const ConfigSpace> space() const { return space_; }
  const Grid2D& grid() const { return fp_.grid(); }
  FpSolver& fp() { return fp_; }

private:
  void refresh(CoupledState& state) const;

  Params params_;
  std::shared_ptr<const ConfigSpace> space_;
  FpSolver fp_;
  SpectralBasis basis_;
};

} // namespace nsfp
