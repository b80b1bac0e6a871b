#include "nsfp/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsfp/parallel.hpp"

namespace nsfp {

VectorField FluidState::velocity() const
{
  VectorField u = grid.vector();
  for (std::size_t c = 0; c < rho.size(); ++c) {
    u.x[c] = m.x[c] / rho[c];
    u.y[c] = m.y[c] / rho[c];
  }
  return u;
}

ScalarField pressure(const ScalarField& rho, const Params& params)
{
  ScalarField p(rho.size());
  for (std::size_t c = 0; c < rho.size(); ++c) {
    if (!(rho[c] > 0))
      throw Error("pressure: nonpositive density");
    p[c] = params.c_p * std::pow(rho[c], params.gamma);
  }
  return p;
}

double pressure_potential(double rho, const Params& params)
{
  if (!(rho > 0))
    throw Error("pressure_potential: nonpositive density");
  const double g = params.gamma;
  const double x = rho / params.rho_bar - 1.0;
  // (1+x)^g - 1 - g x without cancelling the leading terms
  const double bracket = std::expm1(g * std::log1p(x)) - g * x;
  return params.c_p * std::pow(params.rho_bar, g) / (g - 1.0) * std::max(bracket, 0.0);
}

ScalarField pressure_potential(const ScalarField& rho, const Params& params)
{
  ScalarField P(rho.size());
  for (std::size_t c = 0; c < rho.size(); ++c)
    P[c] = pressure_potential(rho[c], params);
  return P;
}

TensorField stress(const TensorField& G, const Params& params)
{
  const double d = 2.0;
  TensorField S(G.size());
  for (std::size_t c = 0; c < G.size(); ++c) {
    const double div = G.xx[c] + G.yy[c];
    const double off = 0.5 * params.mu_s * (G.xy[c] + G.yx[c]);
    S.xx[c] = params.mu_s * (G.xx[c] - div / d) + params.mu_b * div;
    S.yy[c] = params.mu_s * (G.yy[c] - div / d) + params.mu_b * div;
    S.xy[c] = S.yx[c] = off;
  }
  return S;
}

namespace {

inline double mc(double a, double b)
{
  if (a * b <= 0.0)
    return 0.0;
  const double s = a > 0 ? 1.0 : -1.0;
  return s * std::min({2.0 * std::abs(a), 2.0 * std::abs(b), 0.5 * std::abs(a + b)});
}

struct Prim {
  double rho, un, ut; // density, normal and tangential velocity relative to the face
};

struct Flux {
  double mass, mn, mt;
};

// Local Lax-Friedrichs flux with two low-Mach repairs. The tangential momentum
// only travels with the shear wave, so its dissipation uses |u_n| instead of
// |u_n| + c. The normal velocity jump is damped at |u_n| + min(|u|, c) rather
// than |u_n| + c (Rieper's scaling); otherwise the 1/eps sound speed smears the
// vortical flow as eps -> 0. The density jump keeps the full speed.
//
// The central mass and pressure fluxes use the cell values CL, CR: their face
// differences are then exactly div_c and grad_c, so the pressure force lies in
// the range the Helmholtz projection removes and the low-Mach limit of the
// scheme is the projection method of incompressible_rhs.
inline Flux rusanov(const Prim& L, const Prim& R, const Prim& CL, const Prim& CR, const Params& p, bool acoustic)
{
  const double an = std::max(std::abs(L.un), std::abs(R.un));
  const double speed = std::max(std::hypot(L.un, L.ut), std::hypot(R.un, R.ut));
  double pL = 0, pR = 0, a = an, au = an + speed;
  if (acoustic) {
    const double ie2 = 1.0 / (p.epsilon * p.epsilon);
    pL = p.c_p * std::pow(CL.rho, p.gamma) * ie2;
    pR = p.c_p * std::pow(CR.rho, p.gamma) * ie2;
    const double cL = std::sqrt(p.pressure_derivative(L.rho)) / p.epsilon;
    const double cR = std::sqrt(p.pressure_derivative(R.rho)) / p.epsilon;
    a = std::max(std::abs(L.un) + cL, std::abs(R.un) + cR);
    au = an + std::min(speed, std::max(cL, cR));
  }
  // jump of rho u_n split as ubar d(rho) + rhobar d(u_n)
  const double ubar = 0.5 * (L.un + R.un), rbar = 0.5 * (L.rho + R.rho);
  Flux f;
  f.mass = 0.5 * (CL.rho * CL.un + CR.rho * CR.un) - 0.5 * a * (R.rho - L.rho);
  f.mn = 0.5 * (L.rho * L.un * L.un + pL + R.rho * R.un * R.un + pR) -
         0.5 * (a * ubar * (R.rho - L.rho) + au * rbar * (R.un - L.un));
  f.mt = 0.5 * (L.rho * L.un * L.ut + R.rho * R.un * R.ut) - 0.5 * an * (R.rho * R.ut - L.rho * L.ut);
  return f;
}

// One line of cells (length n) with two mirrored ghosts on each side.
// rho and ut are even, un is odd. Writes n+1 face fluxes.
void line_fluxes(int n, const double* rho, const double* un, const double* ut, std::size_t stride, const Params& p,
                 bool acoustic, Flux* out)
{
  std::vector<double> R(n + 4), U(n + 4), T(n + 4);
  for (int i = 0; i < n; ++i) {
    R[i + 2] = rho[i * stride];
    U[i + 2] = un[i * stride];
    T[i + 2] = ut[i * stride];
  }
  for (int g = 0; g < 2; ++g) {
    R[1 - g] = R[2 + g];
    U[1 - g] = -U[2 + g];
    T[1 - g] = T[2 + g];
    R[n + 2 + g] = R[n + 1 - g];
    U[n + 2 + g] = -U[n + 1 - g];
    T[n + 2 + g] = T[n + 1 - g];
  }
  std::vector<double> sR(n + 2), sU(n + 2), sT(n + 2); // slopes of cells -1..n
  for (int i = 1; i <= n + 2; ++i) {
    sR[i - 1] = mc(R[i] - R[i - 1], R[i + 1] - R[i]);
    sU[i - 1] = mc(U[i] - U[i - 1], U[i + 1] - U[i]);
    sT[i - 1] = mc(T[i] - T[i - 1], T[i + 1] - T[i]);
  }
  for (int f = 0; f <= n; ++f) {
    // Left cell f-1 (padded f+1, slope index f), right cell f (padded f+2, slope f+1).
    const Prim L{R[f + 1] + 0.5 * sR[f], U[f + 1] + 0.5 * sU[f], T[f + 1] + 0.5 * sT[f]};
    const Prim Rt{R[f + 2] - 0.5 * sR[f + 1], U[f + 2] - 0.5 * sU[f + 1], T[f + 2] - 0.5 * sT[f + 1]};
    const Prim CL{R[f + 1], U[f + 1], T[f + 1]}, CR{R[f + 2], U[f + 2], T[f + 2]};
    out[f] = rusanov(L, Rt, CL, CR, p, acoustic);
    if (f == 0 || f == n) {
      // Slip wall: no mass and no tangential momentum through the boundary.
      out[f].mass = 0.0;
      out[f].mt = 0.0;
    }
  }
}

void check_density(const ScalarField& rho, const Params& params)
{
  const double floor = 1e-8 * params.rho_bar;
  for (double r : rho)
    if (!(r > floor))
      throw Error("density floor reached");
}

} // namespace

FluidRhs fluid_rhs(const FluidState& s, const TensorField& tau1, const ScalarField& rho_p, const Params& params)
{
  const Grid2D& g = s.grid;
  const int n = g.n;
  check_density(s.rho, params);
  const VectorField u = s.velocity();

  FluidRhs r{g.scalar(), g.vector()};
  const double ih = 1.0 / g.h;

  parallel_for(0, n, [&](int j0, int j1) {
    std::vector<Flux> fl(n + 1);
    for (int j = j0; j < j1; ++j) {
      const std::size_t row = g.index(0, j);
      line_fluxes(n, &s.rho[row], &u.x[row], &u.y[row], 1, params, true, fl.data());
      for (int i = 0; i < n; ++i) {
        const auto c = g.index(i, j);
        r.rho[c] -= (fl[i + 1].mass - fl[i].mass) * ih;
        r.m.x[c] -= (fl[i + 1].mn - fl[i].mn) * ih;
        r.m.y[c] -= (fl[i + 1].mt - fl[i].mt) * ih;
      }
    }
  });
  // Columns write disjoint cells, so they can run after the rows finished.
  parallel_for(0, n, [&](int i0, int i1) {
    std::vector<Flux> fl(n + 1);
    for (int i = i0; i < i1; ++i) {
      const std::size_t col = g.index(i, 0);
      line_fluxes(n, &s.rho[col], &u.y[col], &u.x[col], n, params, true, fl.data());
      for (int j = 0; j < n; ++j) {
        const auto c = g.index(i, j);
        r.rho[c] -= (fl[j + 1].mass - fl[j].mass) * ih;
        r.m.y[c] -= (fl[j + 1].mn - fl[j].mn) * ih;
        r.m.x[c] -= (fl[j + 1].mt - fl[j].mt) * ih;
      }
    }
  });

  TensorField T = stress(velocity_gradient(g, u), params);
  if (tau1.size() == g.size())
    for (std::size_t c = 0; c < g.size(); ++c) {
      T.xx[c] += tau1.xx[c];
      T.xy[c] += tau1.xy[c];
      T.yx[c] += tau1.yx[c];
      T.yy[c] += tau1.yy[c];
    }
  const VectorField dT = div_tensor(g, T);
  for (std::size_t c = 0; c < g.size(); ++c) {
    r.m.x[c] += dT.x[c];
    r.m.y[c] += dT.y[c];
  }
  if (rho_p.size() == g.size() && params.xi_bar != 0.0) {
    ScalarField sq(rho_p.size());
    for (std::size_t c = 0; c < sq.size(); ++c)
      sq[c] = rho_p[c] * rho_p[c];
    const VectorField gs = grad_c(g, sq);
    for (std::size_t c = 0; c < g.size(); ++c) {
      r.m.x[c] -= params.xi_bar * gs.x[c];
      r.m.y[c] -= params.xi_bar * gs.y[c];
    }
  }
  return r;
}

VectorField incompressible_rhs(const Grid2D& g, const VectorField& U, const TensorField& tau1,
                               const ScalarField& rho_p, const Params& params)
{
  const int n = g.n;
  const ScalarField rho(g.size(), params.rho_bar);
  VectorField r = g.vector();
  const double ih = 1.0 / g.h;
  std::vector<Flux> fl(n + 1);
  for (int j = 0; j < n; ++j) {
    const std::size_t row = g.index(0, j);
    line_fluxes(n, &rho[row], &U.x[row], &U.y[row], 1, params, false, fl.data());
    for (int i = 0; i < n; ++i) {
      r.x[g.index(i, j)] -= (fl[i + 1].mn - fl[i].mn) * ih;
      r.y[g.index(i, j)] -= (fl[i + 1].mt - fl[i].mt) * ih;
    }
  }
  for (int i = 0; i < n; ++i) {
    const std::size_t col = g.index(i, 0);
    line_fluxes(n, &rho[col], &U.y[col], &U.x[col], n, params, false, fl.data());
    for (int j = 0; j < n; ++j) {
      r.y[g.index(i, j)] -= (fl[j + 1].mn - fl[j].mn) * ih;
      r.x[g.index(i, j)] -= (fl[j + 1].mt - fl[j].mt) * ih;
    }
  }
  TensorField T = stress(velocity_gradient(g, U), params);
  if (tau1.size() == g.size())
    for (std::size_t c = 0; c < g.size(); ++c) {
      T.xx[c] += tau1.xx[c];
      T.xy[c] += tau1.xy[c];
      T.yx[c] += tau1.yx[c];
      T.yy[c] += tau1.yy[c];
    }
  const VectorField dT = div_tensor(g, T);
  const double ir = 1.0 / params.rho_bar;
  for (std::size_t c = 0; c < g.size(); ++c) {
    r.x[c] = (r.x[c] + dT.x[c]) * ir;
    r.y[c] = (r.y[c] + dT.y[c]) * ir;
  }
  if (rho_p.size() == g.size() && params.xi_bar != 0.0) {
    ScalarField sq(rho_p.size());
    for (std::size_t c = 0; c < sq.size(); ++c)
      sq[c] = rho_p[c] * rho_p[c];
    const VectorField gs = grad_c(g, sq);
    for (std::size_t c = 0; c < g.size(); ++c) {
      r.x[c] -= params.xi_bar * gs.x[c] * ir;
      r.y[c] -= params.xi_bar * gs.y[c] * ir;
    }
  }
  return r;
}

DtLimits fluid_dt_limits(const FluidState& s, const Params& params)
{
  double ax = 0, ay = 0, rmin = s.rho[0];
  for (std::size_t c = 0; c < s.rho.size(); ++c) {
    const double cs = std::sqrt(params.pressure_derivative(s.rho[c])) / params.epsilon;
    ax = std::max(ax, std::abs(s.m.x[c] / s.rho[c]) + cs);
    ay = std::max(ay, std::abs(s.m.y[c] / s.rho[c]) + cs);
    rmin = std::min(rmin, s.rho[c]);
  }
  const double h = s.grid.h;
  DtLimits lim;
  lim.acoustic = h / (ax + ay);
  lim.viscous = 0.6 * h * h * rmin / (params.mu_s + params.mu_b);
  return lim;
}

FluidState fluid_step(const FluidState& s, const TensorField& tau1, const ScalarField& rho_p, double dt,
                      const Params& params, StageAverage* average, const FluidSource& source)
{
  const DtLimits lim = fluid_dt_limits(s, params);
  if (dt > lim.min()) {
    std::ostringstream os;
    os << "fluid CFL violation: dt = " << dt << ", suggested dt <= " << 0.5 * lim.min();
    throw Error(os.str());
  }
  const Grid2D& g = s.grid;
  auto rhs = [&](const FluidState& st, double t) {
    FluidRhs r = fluid_rhs(st, tau1, rho_p, params);
    if (source) {
      ScalarField sr = g.scalar();
      VectorField sm = g.vector();
      source(t, sr, sm);
      for (std::size_t c = 0; c < g.size(); ++c) {
        r.rho[c] += sr[c];
        r.m.x[c] += sm.x[c];
        r.m.y[c] += sm.y[c];
      }
    }
    return r;
  };
  // U_new = a U0 + b (U + dt L(U))
  auto combine = [&](const FluidState& U0, const FluidState& U, const FluidRhs& L, double a, double b) {
    FluidState out = U;
    for (std::size_t c = 0; c < g.size(); ++c) {
      out.rho[c] = a * U0.rho[c] + b * (U.rho[c] + dt * L.rho[c]);
      out.m.x[c] = a * U0.m.x[c] + b * (U.m.x[c] + dt * L.m.x[c]);
      out.m.y[c] = a * U0.m.y[c] + b * (U.m.y[c] + dt * L.m.y[c]);
    }
    check_density(out.rho, params);
    return out;
  };

  const FluidState s1 = combine(s, s, rhs(s, s.time), 0.0, 1.0);
  const FluidState s2 = combine(s, s1, rhs(s1, s.time + dt), 0.75, 0.25);
  FluidState s3 = combine(s, s2, rhs(s2, s.time + 0.5 * dt), 1.0 / 3.0, 2.0 / 3.0);
  s3.time = s.time + dt;

  if (average) {
    const VectorField u0 = s.velocity(), u1 = s1.velocity(), u2 = s2.velocity();
    average->u = g.vector();
    for (std::size_t c = 0; c < g.size(); ++c) {
      average->u.x[c] = (u0.x[c] + u1.x[c] + 4.0 * u2.x[c]) / 6.0;
      average->u.y[c] = (u0.y[c] + u1.y[c] + 4.0 * u2.y[c]) / 6.0;
    }
    average->G = velocity_gradient(g, average->u);
  }
  return s3;
}

double kinetic_energy(const FluidState& s)
{
  double e = 0;
  for (std::size_t c = 0; c < s.rho.size(); ++c)
    e += 0.5 * (s.m.x[c] * s.m.x[c] + s.m.y[c] * s.m.y[c]) / s.rho[c];
  return e * s.grid.cell_area();
}

double pressure_energy(const FluidState& s, const Params& params)
{
  double e = 0;
  for (double r : s.rho)
    e += pressure_potential(r, params);
  return e * s.grid.cell_area() / (params.epsilon * params.epsilon);
}

} // namespace nsfp
