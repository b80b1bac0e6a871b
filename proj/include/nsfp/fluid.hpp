#pragma once

#include <functional>

#include "nsfp/grid.hpp"
#include "nsfp/params.hpp"

namespace nsfp {

struct FluidState {
  Grid2D grid;
  ScalarField rho;
  VectorField m; // momentum rho u
  double time = 0;

  FluidState() = default;
  FluidState(const Grid2D& g, double rho0) : grid(g), rho(g.scalar(rho0)), m(g.vector()) {}
  VectorField velocity() const;
};

ScalarField pressure(const ScalarField& rho, const Params& params);
/// P(rho) - P'(rho_bar)(rho - rho_bar) - P(rho_bar) with P = p / (gamma - 1).
ScalarField pressure_potential(const ScalarField& rho, const Params& params);
double pressure_potential(double rho, const Params& params);

/// mu_s (Du - (1/d) div u I) + mu_b div u I for the gradient G = grad u.
TensorField stress(const TensorField& G, const Params& params);

/// Optional manufactured source added to the right-hand side at time t.
using FluidSource = std::function<void(double t, ScalarField& s_rho, VectorField& s_m)>;

struct FluidRhs {
  ScalarField rho;
  VectorField m;
};

/// Semi-discrete right-hand side: Rusanov/MUSCL transport with pressure,
/// viscous stress and polymer forcing div tau1 - xi_bar grad rho_p^2.
/// Passing an empty tau1 or rho_p drops that forcing.
FluidRhs fluid_rhs(const FluidState& s, const TensorField& tau1, const ScalarField& rho_p, const Params& params);

/// dU/dt of the constant-density momentum equation before projection:
/// (-div(rho_bar U U) + div(S + tau1) - xi_bar grad rho_p^2) / rho_bar.
VectorField incompressible_rhs(const Grid2D& g, const VectorField& U, const TensorField& tau1,
                               const ScalarField& rho_p, const Params& params);

/// Velocity and gradient weighted as the three SSP-RK3 stages enter the update.
struct StageAverage {
  VectorField u;
  TensorField G;
};

/// One SSP-RK3 step with tau1 and rho_p frozen. Throws "density floor reached"
/// if any stage drops below 1e-8 rho_bar and a CFL error if dt exceeds fluid_max_dt.
FluidState fluid_step(const FluidState& s, const TensorField& tau1, const ScalarField& rho_p, double dt,
                      const Params& params, StageAverage* average = nullptr, const FluidSource& source = {});

struct DtLimits {
  double acoustic = 0; // h / (max(|u|+c) + max(|v|+c))
  double viscous = 0;
  double min() const { return std::min(acoustic, viscous); }
};
DtLimits fluid_dt_limits(const FluidState& s, const Params& params);

/// Kinetic energy 1/2 int rho |u|^2 and eps^-2 int P_rel.
double kinetic_energy(const FluidState& s);
double pressure_energy(const FluidState& s, const Params& params);

} // namespace nsfp
