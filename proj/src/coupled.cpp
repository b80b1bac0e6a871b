#include "nsfp/coupled.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace nsfp {

bool EnergyLedger::monitor_ok() const
{
  return std::all_of(samples.begin(), samples.end(), [](const LedgerSample& s) { return s.monitor_ok; });
}

bool EnergyLedger::exp_monitor_ok() const
{
  return std::all_of(samples.begin(), samples.end(), [](const LedgerSample& s) { return s.exp_monitor_ok; });
}

bool EnergyLedger::dissipation_nonnegative() const
{
  return std::all_of(samples.begin(), samples.end(), [](const LedgerSample& s) {
    return s.viscous >= 0 && s.bulk >= 0 && s.fisher_x >= 0 && s.fisher_q >= 0 && s.density_gradient >= 0;
  });
}

double EnergyLedger::worst_excess() const
{
  if (samples.empty())
    return 0.0;
  const double E0 = samples.front().energy();
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples)
    worst = std::max(worst, s.energy() + s.cumulative - E0);
  return worst / std::max(std::abs(E0), 1e-300);
}

void EnergyLedger::write_csv(const std::string& path) const
{
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write " + path);
  out << "t,kinetic,pressure,entropy,interaction,energy,viscous,bulk,fisher_x,fisher_q,density_gradient,"
         "dissipation,cumulative_dissipation,monitor_ok,exp_monitor_ok\n";
  out << std::setprecision(17);
  for (const auto& s : samples)
    out << s.t << ',' << s.kinetic << ',' << s.pressure << ',' << s.entropy << ',' << s.interaction << ','
        << s.energy() << ',' << s.viscous << ',' << s.bulk << ',' << s.fisher_x << ',' << s.fisher_q << ','
        << s.density_gradient << ',' << s.dissipation() << ',' << s.cumulative << ','
        << (s.monitor_ok ? "true" : "false") << ',' << (s.exp_monitor_ok ? "true" : "false") << '\n';
}

LedgerSample ledger_terms(const CoupledState& state, const Params& params)
{
  const Grid2D& g = state.fluid.grid;
  LedgerSample s;
  s.t = state.time();
  s.kinetic = kinetic_energy(state.fluid);
  s.pressure = pressure_energy(state.fluid, params);

  const TensorField G = velocity_gradient(g, state.fluid.velocity());
  double dev = 0, bulk = 0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const double tr = G.xx[c] + G.yy[c];
    const double a = G.xx[c] - 0.5 * tr, d = G.yy[c] - 0.5 * tr, o = 0.5 * (G.xy[c] + G.yx[c]);
    dev += a * a + d * d + 2.0 * o * o;
    bulk += tr * tr;
  }
  s.viscous = params.mu_s * dev * g.cell_area();
  s.bulk = params.mu_b * bulk * g.cell_area();

  const EntropyFisher ef = entropy_fisher(state.dist, params);
  s.entropy = params.beta_comp * ef.entropy;
  double sq = 0;
  for (double r : state.rho_p)
    sq += r * r;
  s.interaction = params.xi_bar * sq * g.cell_area();

  if (state.polymer) {
    s.fisher_x = params.beta_comp * ef.fisher_x;
    s.fisher_q = params.beta_comp * ef.fisher_q;
    double grad = 0;
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i + 1 < g.n; ++i) {
        const double dx = state.rho_p[g.index(i + 1, j)] - state.rho_p[g.index(i, j)];
        const double dy = state.rho_p[g.index(j, i + 1)] - state.rho_p[g.index(j, i)];
        grad += dx * dx + dy * dy;
      }
    s.density_gradient = 2.0 * params.delta * params.xi_bar * grad;
  }
  return s;
}

void energy_ledger_update(const CoupledState& state, const Params& params, EnergyLedger& ledger)
{
  LedgerSample s = ledger_terms(state, params);
  if (!ledger.samples.empty()) {
    const LedgerSample& prev = ledger.samples.back();
    s.cumulative = prev.cumulative + 0.5 * (s.t - prev.t) * (prev.dissipation() + s.dissipation());
  }
  const LedgerSample& first = ledger.samples.empty() ? s : ledger.samples.front();
  const double E0 = first.energy();
  s.monitor_ok = s.energy() + s.cumulative <= E0 + ledger.tolerance * std::abs(E0);
  const double shift = params.beta_comp * 1.0; // entropy >= -(1-beta)|Omega|
  s.exp_monitor_ok = (s.energy() + shift) + s.cumulative <=
                     std::exp(s.t - first.t) * (E0 + shift) + ledger.tolerance * std::abs(E0);
  ledger.samples.push_back(s);
}

CoupledIntegrator::CoupledIntegrator(const Params& params, std::shared_ptr<const ConfigSpace> space,
                                     const Grid2D& grid)
    : params_(params), space_(space), fp_(params, space, grid), basis_(grid, 0)
{
}

void CoupledIntegrator::refresh(CoupledState& state) const
{
  state.rho_p = number_density(state.dist);
  if (state.polymer)
    state.tau = tau1(state.dist, params_);
  else
    state.tau = TensorField();
}

CoupledState CoupledIntegrator::make_state(FluidState fluid, ConfigDistribution dist, bool polymer) const
{
  CoupledState s{std::move(fluid), std::move(dist), {}, {}, polymer};
  refresh(s);
  return s;
}

double CoupledIntegrator::max_dt(const CoupledState& state, bool incompressible) const
{
  const Grid2D& g = state.fluid.grid;
  const VectorField u = state.fluid.velocity();
  double dt;
  if (incompressible) {
    double ax = 0, ay = 0;
    for (std::size_t c = 0; c < g.size(); ++c) {
      ax = std::max(ax, std::abs(u.x[c]));
      ay = std::max(ay, std::abs(u.y[c]));
    }
    dt = 0.6 * g.h * g.h * params_.rho_bar / (params_.mu_s + params_.mu_b);
    if (ax + ay > 0)
      dt = std::min(dt, g.h / (ax + ay));
  } else {
    dt = fluid_dt_limits(state.fluid, params_).min();
  }
  if (state.polymer)
    dt = std::min(dt, fp_.max_dt(u, velocity_gradient(g, u)));
  return dt;
}

void CoupledIntegrator::coupled_step(CoupledState& state, double dt)
{
  const ScalarField none;
  StageAverage avg;
  state.fluid = fluid_step(state.fluid, state.tau, state.polymer ? state.rho_p : none, dt, params_, &avg);
  if (state.polymer) {
    fp_.step(state.dist, avg.u, avg.G, dt);
    refresh(state);
  } else {
    state.dist.time += dt;
  }
}

void CoupledIntegrator::incompressible_step(CoupledState& state, double dt)
{
  const Grid2D& g = state.fluid.grid;
  const double rb = params_.rho_bar;
  const ScalarField none;
  const ScalarField& rp = state.polymer ? state.rho_p : none;

  VectorField U0 = g.vector();
  for (std::size_t c = 0; c < g.size(); ++c) {
    U0.x[c] = state.fluid.m.x[c] / rb;
    U0.y[c] = state.fluid.m.y[c] / rb;
  }
  auto stage = [&](const VectorField& U, const VectorField& base, double a, double b) {
    const VectorField L = incompressible_rhs(g, U, state.tau, rp, params_);
    VectorField out = g.vector();
    for (std::size_t c = 0; c < g.size(); ++c) {
      out.x[c] = a * base.x[c] + b * (U.x[c] + dt * L.x[c]);
      out.y[c] = a * base.y[c] + b * (U.y[c] + dt * L.y[c]);
    }
    return helmholtz_project(out, basis_).H;
  };
  const VectorField U1 = stage(U0, U0, 0.0, 1.0);
  const VectorField U2 = stage(U1, U0, 0.75, 0.25);
  const VectorField U3 = stage(U2, U0, 1.0 / 3.0, 2.0 / 3.0);

  const double div = max_abs(div_c(g, U3));
  if (div > 1e-8) {
    std::ostringstream os;
    os << "projection residual " << div << " exceeds 1e-8";
    throw Error(os.str());
  }

  if (state.polymer) {
    VectorField ue = g.vector();
    for (std::size_t c = 0; c < g.size(); ++c) {
      ue.x[c] = (U0.x[c] + U1.x[c] + 4.0 * U2.x[c]) / 6.0;
      ue.y[c] = (U0.y[c] + U1.y[c] + 4.0 * U2.y[c]) / 6.0;
    }
    fp_.step(state.dist, ue, velocity_gradient(g, ue), dt);
    refresh(state);
  } else {
    state.dist.time += dt;
  }
  for (std::size_t c = 0; c < g.size(); ++c) {
    state.fluid.rho[c] = rb;
    state.fluid.m.x[c] = rb * U3.x[c];
    state.fluid.m.y[c] = rb * U3.y[c];
  }
  state.fluid.time += dt;
}

} // namespace nsfp
