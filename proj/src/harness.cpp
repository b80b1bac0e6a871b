#include "nsfp/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace nsfp {

namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double stream(double x, double y) { return (std::sin(pi * x) + 0.5 * std::sin(2 * pi * x)) * std::sin(pi * y); }

// Centred differences of the analytic stream function. It is odd across every
// wall, so these values coincide with the mirrored ghosts and div_c u = 0.
VectorField stream_velocity(const Grid2D& g, double amp)
{
  VectorField u = g.vector();
  const double a = amp / pi, h = g.h;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const double x = g.xc(i), y = g.xc(j);
      const auto c = g.index(i, j);
      u.x[c] = -a * (stream(x, y + h) - stream(x, y - h)) / (2 * h);
      u.y[c] = a * (stream(x + h, y) - stream(x - h, y)) / (2 * h);
    }
  return u;
}

double l2_diff(const Grid2D& g, const VectorField& a, const VectorField& b)
{
  double s = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double dx = a.x[c] - b.x[c], dy = a.y[c] - b.y[c];
    s += dx * dx + dy * dy;
  }
  return s * g.cell_area();
}

double l2_diff(const Grid2D& g, const ScalarField& a, const ScalarField& b)
{
  double s = 0;
  for (std::size_t c = 0; c < a.size(); ++c)
    s += (a[c] - b[c]) * (a[c] - b[c]);
  return s * g.cell_area();
}

struct Stepping {
  double dt;
  int per_sample;
};

Stepping choose_dt(double limit, const RunConfig& cfg)
{
  const double interval = cfg.final_time / cfg.samples;
  const double target = cfg.dt_safety * limit;
  if (!(target > 0) || !std::isfinite(target))
    return {interval, 1};
  const int per = static_cast<int>(std::ceil(interval / target - 1e-12));
  return {interval / per, std::max(per, 1)};
}

ScalarField component(const CoupledState& s, const std::string& name)
{
  if (name == "rho")
    return s.fluid.rho;
  const VectorField u = s.fluid.velocity();
  if (name == "ux")
    return u.x;
  if (name == "uy")
    return u.y;
  if (name == "rho_p")
    return s.rho_p;
  const ScalarField zero = s.fluid.grid.scalar();
  if (name == "tau_xx")
    return s.tau.size() ? s.tau.xx : zero;
  if (name == "tau_xy")
    return s.tau.size() ? s.tau.xy : zero;
  if (name == "tau_yy")
    return s.tau.size() ? s.tau.yy : zero;
  throw Error("unknown field " + name);
}

void dump_fields(const RunConfig& cfg, const CoupledState& s, const std::string& out_dir, const std::string& tag,
                 int step)
{
  if (out_dir.empty())
    return;
  for (const auto& name : cfg.fields) {
    std::ostringstream path;
    path << "field_" << name << (tag.empty() ? "" : "_" + tag) << '_' << std::setw(6) << std::setfill('0') << step
         << ".dat";
    write_field((fs::path(out_dir) / path.str()).string(), s.fluid.grid, component(s, name));
  }
}

void require_2d(const Params& p)
{
  if (p.dim_x != 2)
    throw Error("only dim = 2 grids are implemented");
}

double psi_mass(const CoupledState& s) { return integrate(s.fluid.grid, number_density(s.dist)); }

} // namespace

std::string format_epsilon(double eps)
{
  std::ostringstream os;
  os << eps;
  return os.str();
}

void write_field(const std::string& path, const Grid2D& g, const ScalarField& f)
{
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write " + path);
  out << g.n << ' ' << g.n << '\n' << std::setprecision(17);
  for (int j = 0; j < g.n; ++j) {
    for (int i = 0; i < g.n; ++i)
      out << (i ? " " : "") << f[g.index(i, j)];
    out << '\n';
  }
}

void write_acoustic_csv(const std::string& path, const AcousticTrace& trace)
{
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write " + path);
  out << "t,k,l,b_n,a_n\n" << std::setprecision(17);
  for (std::size_t s = 0; s < trace.t.size(); ++s)
    for (std::size_t n = 0; n < trace.modes.size(); ++n)
      out << trace.t[s] << ',' << trace.modes[n].k << ',' << trace.modes[n].l << ',' << trace.samples[s].b[n] << ','
          << trace.samples[s].a[n] << '\n';
}

std::pair<double, double> essential_residual_split(const ScalarField& rho, const Params& params)
{
  if (rho.empty())
    return {0.0, 0.0};
  std::size_t ess = 0;
  for (double r : rho)
    if (r >= 0.5 * params.rho_bar && r <= 2.0 * params.rho_bar)
      ++ess;
  const double f = static_cast<double>(ess) / rho.size();
  return {f, 1.0 - f};
}

CoupledState well_prepared_init(const std::string& recipe, double amplitude, const Params& params,
                                CoupledIntegrator& integrator, bool polymer)
{
  require_2d(params);
  const Grid2D& g = integrator.grid();
  auto space = integrator.space();
  FluidState fluid(g, params.rho_bar);
  ConfigDistribution dist(space, g, 1.0);

  if (recipe == "equilibrium")
    return integrator.make_state(fluid, dist, polymer);
  if (recipe != "cosine" && recipe != "balanced" && recipe != "acoustic")
    throw Error("unknown initial-data recipe '" + recipe + "'");

  ScalarField r0 = g.scalar();
  VectorField u0 = g.vector();
  if (recipe != "acoustic") {
    u0 = stream_velocity(g, amplitude);
    // psi_hat = 1 + amplitude cos(pi x) cos(pi y) (1 - |q_1|^2 / b_1)
    const Maxwellian& m = space->spring(0);
    const std::size_t nq = dist.nq();
    std::vector<double> hq(nq);
    for (std::size_t n = 0; n < nq; ++n) {
      const auto q = m.grid.node(space->local(n, 0));
      hq[n] = 1.0 - (q[0] * q[0] + q[1] * q[1]) / params.b[0];
    }
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const double gx = std::cos(pi * g.xc(i)) * std::cos(pi * g.xc(j));
        double* p = dist.cell(g.index(i, j));
        for (std::size_t n = 0; n < nq; ++n)
          p[n] = std::max(0.0, 1.0 + amplitude * gx * hq[n]);
      }
  }

  if (recipe == "cosine" || recipe == "acoustic") {
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i)
        r0[g.index(i, j)] = amplitude * std::cos(pi * g.xc(i));
  } else {
    // Pressure of the limit system at t = 0: the gradient part of its momentum
    // right-hand side. Matching it removes the leading acoustic content.
    CoupledState tmp = integrator.make_state(fluid, dist, polymer);
    const ScalarField none;
    VectorField L = incompressible_rhs(g, u0, tmp.tau, polymer ? tmp.rho_p : none, params);
    for (std::size_t c = 0; c < g.size(); ++c) {
      L.x[c] *= params.rho_bar;
      L.y[c] *= params.rho_bar;
    }
    const Projection P = helmholtz_project(L, integrator.basis());
    const double pp = params.pressure_derivative(params.rho_bar);
    for (std::size_t c = 0; c < g.size(); ++c)
      r0[c] = params.epsilon * P.phi[c] / pp;
  }

  for (std::size_t c = 0; c < g.size(); ++c) {
    fluid.rho[c] = params.rho_bar + params.epsilon * r0[c];
    if (!(fluid.rho[c] > 0))
      throw Error("initial amplitude makes the density nonpositive");
    fluid.m.x[c] = fluid.rho[c] * u0.x[c];
    fluid.m.y[c] = fluid.rho[c] * u0.y[c];
  }
  return integrator.make_state(fluid, dist, polymer);
}

ReferenceRun run_reference(const RunConfig& cfg, const std::string& out_dir)
{
  Params p = cfg.params;
  require_2d(p);
  const Grid2D g(cfg.nx);
  auto space = std::make_shared<ConfigSpace>(p, cfg.q_radial, cfg.q_angular);
  CoupledIntegrator integ(p, space, g);
  CoupledState st = well_prepared_init(cfg.init_recipe, cfg.init_amplitude, p, integ, cfg.polymer);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const double ux = st.fluid.m.x[c] / st.fluid.rho[c], uy = st.fluid.m.y[c] / st.fluid.rho[c];
    st.fluid.rho[c] = p.rho_bar;
    st.fluid.m.x[c] = p.rho_bar * ux;
    st.fluid.m.y[c] = p.rho_bar * uy;
  }

  ReferenceRun ref;
  const Stepping step = choose_dt(integ.max_dt(st, true), cfg);
  ref.dt = step.dt;
  const double interval = cfg.final_time / cfg.samples;
  auto record = [&](int s) {
    ref.t.push_back(s * interval);
    ref.U.push_back(st.fluid.velocity());
    ref.rho_p.push_back(st.rho_p);
  };
  energy_ledger_update(st, p, ref.ledger);
  record(0);
  dump_fields(cfg, st, cfg.field_stride ? out_dir : "", "ref", 0);
  for (int s = 1; s <= cfg.samples; ++s) {
    for (int k = 0; k < step.per_sample; ++k) {
      integ.incompressible_step(st, step.dt);
      energy_ledger_update(st, p, ref.ledger);
      ++ref.steps;
    }
    record(s);
    if (cfg.field_stride && s % cfg.field_stride == 0)
      dump_fields(cfg, st, out_dir, "ref", ref.steps);
  }
  if (!out_dir.empty())
    ref.ledger.write_csv((fs::path(out_dir) / "ledger_reference.csv").string());
  return ref;
}

RunResult run_simulation(const RunConfig& cfg, double epsilon, const ReferenceRun* ref, const std::string& out_dir,
                         const std::string& tag)
{
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  res.epsilon = epsilon;
  Params p = cfg.params;
  p.epsilon = epsilon;
  const std::string eps_name = format_epsilon(epsilon);

  double div_acc = 0, sol_acc = 0, rp_acc = 0;
  try {
    require_2d(p);
    const Grid2D g(cfg.nx);
    auto space = std::make_shared<ConfigSpace>(p, cfg.q_radial, cfg.q_angular);
    CoupledIntegrator integ(p, space, g);
    CoupledState st = well_prepared_init(cfg.init_recipe, cfg.init_amplitude, p, integ, cfg.polymer);
    const SpectralBasis basis(g, std::min(cfg.tracked_modes, g.n * g.n - 1));
    for (int n = 0; n < basis.size(); ++n)
      res.trace.modes.push_back(basis.mode(n));

    const double mass0 = integrate(g, st.fluid.rho);
    const double psi0 = psi_mass(st);
    const Stepping step = choose_dt(integ.max_dt(st), cfg);
    res.dt = step.dt;
    const double interval = cfg.final_time / cfg.samples;

    auto sample = [&](int s) {
      const double t = s * interval;
      res.trace.push(t, mode_coefficients(st.fluid.rho, st.fluid.m, basis, p, basis.size()));
      ScalarField dev = st.fluid.rho;
      for (double& v : dev)
        v -= p.rho_bar;
      res.sup_rho_dev = std::max(res.sup_rho_dev, l2_norm(g, dev));
      const VectorField u = st.fluid.velocity();
      const double w = (s == 0 || s == cfg.samples) ? 0.5 * interval : interval;
      const double dn = l2_norm(g, div_c(g, u));
      div_acc += w * dn * dn;
      if (ref) {
        sol_acc += w * l2_diff(g, helmholtz_project(u, integ.basis()).H, ref->U[s]);
        rp_acc += w * l2_diff(g, st.rho_p, ref->rho_p[s]);
      }
      res.residual_fraction = std::max(res.residual_fraction, essential_residual_split(st.fluid.rho, p).second);
      if (cfg.field_stride && s % cfg.field_stride == 0)
        dump_fields(cfg, st, out_dir, tag, res.steps);
    };

    energy_ledger_update(st, p, res.ledger);
    sample(0);
    for (int s = 1; s <= cfg.samples; ++s) {
      for (int k = 0; k < step.per_sample; ++k) {
        integ.coupled_step(st, step.dt);
        energy_ledger_update(st, p, res.ledger);
        ++res.steps;
      }
      sample(s);
    }
    res.mass_drift = std::abs(integrate(g, st.fluid.rho) - mass0) / std::abs(mass0);
    res.psi_mass_drift = std::abs(psi_mass(st) - psi0) / std::max(std::abs(psi0), 1e-300);
    res.ok = true;
  } catch (const std::exception& e) {
    res.ok = false;
    res.reason = e.what();
  }

  res.div_l2l2 = std::sqrt(div_acc);
  res.solenoidal_err = ref ? std::sqrt(sol_acc) : nan;
  res.rho_p_err = ref ? std::sqrt(rp_acc) : nan;
  res.energy_monitor = res.ledger.monitor_ok();
  res.exp_monitor = res.ledger.exp_monitor_ok();
  res.dissipation_nonnegative = res.ledger.dissipation_nonnegative();
  res.energy_excess = res.ledger.worst_excess();

  res.omega_fit = res.omega_theory = res.acoustic_residual = nan;
  if (res.ok && res.trace.t.size() >= 3) {
    try {
      const AcousticFit fit = acoustic_residual(res.trace, p, 0);
      res.omega_fit = fit.omega_fit;
      res.omega_theory = fit.omega_theory;
      res.acoustic_residual = fit.residual;
    } catch (const Error&) {
      res.omega_theory = std::sqrt(p.pressure_derivative(p.rho_bar) * res.trace.modes[0].lambda) / epsilon;
    }
  }

  if (!out_dir.empty()) {
    res.ledger.write_csv((fs::path(out_dir) / ("ledger_" + eps_name + ".csv")).string());
    write_acoustic_csv((fs::path(out_dir) / ("acoustic_" + eps_name + ".csv")).string(), res.trace);
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

double empirical_order(double m_i, double m_j, double e_i, double e_j)
{
  if (!(m_i > 1e-9) || !(m_j > 1e-9))
    return nan;
  return std::log(m_i / m_j) / std::log(e_i / e_j);
}

ConvergenceReport run_continuation(const RunConfig& cfg, const std::string& out_dir)
{
  ConvergenceReport report;
  std::optional<ReferenceRun> ref;
  if (cfg.reference) {
    try {
      ref = run_reference(cfg, out_dir);
      report.reference_ok = true;
    } catch (const std::exception& e) {
      report.reference_reason = e.what();
    }
  }
  for (double eps : cfg.epsilon_list)
    report.runs.push_back(run_simulation(cfg, eps, ref ? &*ref : nullptr, out_dir, "eps" + format_epsilon(eps)));
  for (std::size_t i = 0; i + 1 < report.runs.size(); ++i) {
    const RunResult& a = report.runs[i];
    const RunResult& b = report.runs[i + 1];
    ConvergenceReport::Orders o{nan, nan, nan, nan};
    if (a.ok && b.ok) {
      o.rho_dev = empirical_order(a.sup_rho_dev, b.sup_rho_dev, a.epsilon, b.epsilon);
      o.div_u = empirical_order(a.div_l2l2, b.div_l2l2, a.epsilon, b.epsilon);
      o.solenoidal = empirical_order(a.solenoidal_err, b.solenoidal_err, a.epsilon, b.epsilon);
      o.rho_p = empirical_order(a.rho_p_err, b.rho_p_err, a.epsilon, b.epsilon);
    }
    report.orders.push_back(o);
  }
  if (!out_dir.empty())
    report.write_csv((fs::path(out_dir) / "report.csv").string());
  return report;
}

void ConvergenceReport::write_csv(const std::string& path) const
{
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write " + path);
  out << "epsilon,status,sup_rho_dev_l2,div_u_l2l2,solenoidal_err_l2l2,rho_p_err_l2l2,omega_fit,omega_theory,"
         "acoustic_residual,residual_fraction,energy_monitor,exp_monitor,energy_worst_excess,mass_drift,"
         "psi_mass_drift,dt,steps,seconds,order_rho_dev_empirical,order_div_u_empirical,"
         "order_solenoidal_empirical,order_rho_p_empirical,reason\n";
  out << std::setprecision(10);
  auto num = [&](double v) -> std::ostream& {
    if (std::isfinite(v))
      out << v;
    return out;
  };
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunResult& r = runs[i];
    out << r.epsilon << ',' << (r.ok ? "ok" : "failed") << ',';
    num(r.sup_rho_dev) << ',';
    num(r.div_l2l2) << ',';
    num(r.solenoidal_err) << ',';
    num(r.rho_p_err) << ',';
    num(r.omega_fit) << ',';
    num(r.omega_theory) << ',';
    num(r.acoustic_residual) << ',';
    num(r.residual_fraction) << ',' << (r.energy_monitor ? "pass" : "fail") << ','
                             << (r.exp_monitor ? "pass" : "fail") << ',';
    num(r.energy_excess) << ',';
    num(r.mass_drift) << ',';
    num(r.psi_mass_drift) << ',';
    num(r.dt) << ',' << r.steps << ',';
    num(r.seconds) << ',';
    if (i > 0) {
      const Orders& o = orders[i - 1];
      num(o.rho_dev) << ',';
      num(o.div_u) << ',';
      num(o.solenoidal) << ',';
      num(o.rho_p) << ',';
    } else {
      out << ",,,,";
    }
    std::string reason = r.reason;
    for (char& c : reason)
      if (c == ',' || c == '\n')
        c = ';';
    out << reason << '\n';
  }
}

std::vector<CheckLine> run_verify(const RunConfig& cfg)
{
  std::vector<CheckLine> out;
  auto check = [&](std::string name, double value, double limit, bool pass) {
    out.push_back({std::move(name), value, limit, pass});
  };
  const Params& p = cfg.params;

  const ValidationReport vr = validate(p);
  check("params valid (a0)", vr.a0, 0.0, vr.valid());

  const ConfigSpace space(p, cfg.q_radial, cfg.q_angular);
  const AssumptionReport ar = verify_assumptions(space);
  for (int i = 0; i < space.springs(); ++i) {
    const std::string s = "spring " + std::to_string(i) + ": ";
    const Maxwellian& m = space.spring(i);
    const double b = p.b[i];
    check(s + "|int M - 1|", std::abs(m.mass() - 1.0), 1e-10, std::abs(m.mass() - 1.0) < 1e-10);
    const double Zexact = 2 * pi * b / (b + 2);
    check(s + "|Z - 2 pi b/(b+2)|", std::abs(m.Z - Zexact), 1e-10, std::abs(m.Z - Zexact) < 1e-10);
    const auto& sp = ar.springs[i];
    const double terr = std::abs(sp.theta_fit / (b / 2) - 1.0);
    check(s + "theta fit rel. error", terr, 0.05, terr < 0.05 && sp.boundary_decay_ok);
    check(s + "c1 (M >= c1 dist^theta)", sp.c1, 0.0, sp.c1 > 0);
    check(s + "c2 (M <= c2 dist^theta)", sp.c2, 0.0, std::isfinite(sp.c2) && sp.c2 >= sp.c1);
    check(s + "c3 (dist U' >= c3)", sp.c3, 0.0, sp.c3 > 0);
    check(s + "c4 (dist U' <= c4)", sp.c4, 0.0, std::isfinite(sp.c4) && sp.force_bound_ok);
    check(s + "int (1 + U^2 + U'^2) M", sp.u3_integral, 1e3, sp.integrability_ok && sp.u3_integral < 1e3);
    // The residual is a discretization error: it has to shrink at least
    // linearly when the radial resolution doubles.
    const GradientIdentityResidual gi = maxwellian_gradient_identity_check(m);
    const Maxwellian fine = build_maxwellian(m.pot, QGrid(2 * m.grid.nr, m.grid.ntheta, m.grid.R));
    const double gi2 = maxwellian_gradient_identity_check(fine).max_residual;
    check(s + "grad ln M residual, nr", gi.max_residual, 0.0, std::isfinite(gi.max_residual));
    check(s + "grad ln M residual, 2 nr", gi2, 0.5 * gi.max_residual, gi2 <= 0.5 * gi.max_residual);

    const auto one = [](double, double) { return 1.0; };
    const auto zero_grad = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
    const auto r2 = [](double x, double y) { return x * x + y * y; };
    const auto r2_grad = [](double x, double y) { return std::array<double, 2>{2 * x, 2 * y}; };
    const auto qx = [](double x, double) { return x; };
    const auto qx_grad = [](double, double) { return std::array<double, 2>{1.0, 0.0}; };
    const double k1 = kramers_identity_check(space, i, one, zero_grad).residual;
    const double k2 = kramers_identity_check(space, i, r2, r2_grad).residual;
    const double k3 = kramers_identity_check(space, i, qx, qx_grad).residual;
    check(s + "Kramers identity, phi = 1", k1, 1e-8, k1 < 1e-8);
    check(s + "Kramers identity, phi = |q|^2", k2, 1e-8, k2 < 1e-8);
    check(s + "Kramers identity, phi = q_x", k3, 1e-8, k3 < 1e-8);
  }

  const Grid2D g(std::min(cfg.nx, 32));
  const int modes = std::min(64, g.n * g.n - 1);
  const SpectralBasis basis(g, modes);
  double ortho = 0;
  for (int a = 0; a < modes; ++a)
    for (int b = a; b < modes; ++b) {
      double s = 0;
      for (std::size_t c = 0; c < g.size(); ++c)
        s += basis.zeta(a)[c] * basis.zeta(b)[c];
      ortho = std::max(ortho, std::abs(s * g.cell_area() - (a == b ? 1.0 : 0.0)));
    }
  check("eigenbasis orthonormality", ortho, 1e-10, ortho < 1e-10);

  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double idem = 0, orth = 0, div = 0;
  for (int trial = 0; trial < 20; ++trial) {
    VectorField v = g.vector(), w = g.vector();
    for (std::size_t c = 0; c < g.size(); ++c) {
      v.x[c] = U(rng);
      v.y[c] = U(rng);
      w.x[c] = U(rng);
      w.y[c] = U(rng);
    }
    const Projection pv = helmholtz_project(v, basis);
    const Projection pw = helmholtz_project(w, basis);
    const Projection pp = helmholtz_project(pv.H, basis);
    double d = 0, o = 0;
    for (std::size_t c = 0; c < g.size(); ++c) {
      d = std::max({d, std::abs(pp.H.x[c] - pv.H.x[c]), std::abs(pp.H.y[c] - pv.H.y[c])});
      o += pv.H.x[c] * pw.Hperp.x[c] + pv.H.y[c] * pw.Hperp.y[c];
    }
    idem = std::max(idem, d);
    orth = std::max(orth, std::abs(o * g.cell_area()));
    div = std::max(div, max_abs(div_c(g, pv.H)));
  }
  check("H idempotent (20 random fields)", idem, 1e-10, idem < 1e-10);
  check("<H v, Hperp w> (20 random fields)", orth, 1e-10, orth < 1e-10);
  check("max |div H v| (20 random fields)", div, 1e-10, div < 1e-10);

  const Projection pc = helmholtz_project(g.vector(1.0, 0.0), basis);
  double hmax = 0;
  for (std::size_t c = 0; c < g.size(); ++c)
    hmax = std::max({hmax, std::abs(pc.H.x[c]), std::abs(pc.H.y[c])});
  check("constant field (1,0): max |H v|", hmax, 1e-10, hmax < 1e-10);
  return out;
}

} // namespace nsfp
