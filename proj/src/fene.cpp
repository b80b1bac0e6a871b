#include "nsfp/fene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nsfp {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n)
{
  if (n < 1)
    throw Error("gauss_legendre: n < 1");
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
        break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

SpringPotential::Value SpringPotential::eval(double s) const
{
  const double half = 0.5 * b;
  if (!(s >= 0.0) || !(s < half))
    throw Error("beyond finite extensibility");
  const double t = 1.0 - s / half;
  return {-half * std::log(t), 1.0 / t};
}

double SpringPotential::radius() const { return std::sqrt(b); }

SpringPotential::Value fene_eval(double s, double b) { return SpringPotential{b}.eval(s); }

QGrid::QGrid(int nr_, int ntheta_, double radius) : nr(nr_), ntheta(ntheta_), R(radius)
{
  if (nr < 2 || ntheta < 4)
    throw Error("QGrid: need at least 2 radial and 4 angular nodes");
  auto [x, w] = gauss_legendre(nr);
  r.resize(nr);
  wr.resize(nr);
  for (int j = 0; j < nr; ++j) {
    r[j] = 0.5 * R * (x[j] + 1.0);
    wr[j] = 0.5 * R * w[j];
  }
  // Faces chosen so that each annulus has area wr * r * 2 pi.
  rface.assign(nr + 1, 0.0);
  double acc = 0;
  for (int j = 0; j < nr; ++j) {
    acc += 2.0 * wr[j] * r[j];
    rface[j + 1] = std::sqrt(acc);
  }
  rface[nr] = R;
  dtheta = 2.0 * std::numbers::pi / ntheta;
  theta.resize(ntheta);
  for (int k = 0; k < ntheta; ++k)
    theta[k] = k * dtheta;
}

std::array<double, 2> QGrid::node(int n) const
{
  const int j = n / ntheta;
  const int k = n % ntheta;
  return {r[j] * std::cos(theta[k]), r[j] * std::sin(theta[k])};
}

double Maxwellian::operator()(double rr) const
{
  if (rr >= grid.R)
    return 0.0;
  return std::exp(-pot.eval(0.5 * rr * rr).U) / Z;
}

double Maxwellian::mass() const
{
  double m = 0;
  for (int j = 0; j < grid.nr; ++j)
    m += grid.cell_volume(j) * node[j] * grid.ntheta;
  return m;
}

namespace {

double unnormalized(const SpringPotential& pot, double r)
{
  if (r >= pot.radius())
    return 0.0;
  return std::exp(-pot.eval(0.5 * r * r).U);
}

// Gauss-Legendre integral of f over [a, b].
template <class F>
double integrate(F&& f, double a, double b, int n)
{
  static thread_local std::vector<std::pair<int, std::pair<std::vector<double>, std::vector<double>>>> cache;
  const std::pair<std::vector<double>, std::vector<double>>* rule = nullptr;
  for (auto& [m, xw] : cache)
    if (m == n)
      rule = &xw;
  if (!rule) {
    cache.emplace_back(n, gauss_legendre(n));
    rule = &cache.back().second;
  }
  double s = 0;
  for (int i = 0; i < n; ++i) {
    const double x = 0.5 * (b - a) * (rule->first[i] + 1.0) + a;
    s += rule->second[i] * f(x);
  }
  return 0.5 * (b - a) * s;
}

} // namespace

Maxwellian build_maxwellian(const SpringPotential& pot, const QGrid& grid)
{
  if (std::abs(grid.R - pot.radius()) > 1e-12 * pot.radius())
    throw Error("q-grid radius does not match sqrt(b)");
  Maxwellian m;
  m.pot = pot;
  m.grid = grid;

  double Z = 0;
  for (int j = 0; j < grid.nr; ++j)
    Z += grid.wr[j] * grid.r[j] * unnormalized(pot, grid.r[j]);
  Z *= 2.0 * std::numbers::pi;

  // Reference partition constant on a finer composite rule.
  double Zref = 0;
  const int pieces = 8;
  for (int p = 0; p < pieces; ++p) {
    const double a = grid.R * p / pieces, b = grid.R * (p + 1) / pieces;
    Zref += integrate([&](double r) { return r * unnormalized(pot, r); }, a, b, 4 * grid.nr);
  }
  Zref *= 2.0 * std::numbers::pi;
  if (std::abs(Z / Zref - 1.0) > 1e-6)
    throw Error("insufficient q-resolution");

  m.Z = Z;
  m.node.resize(grid.nr);
  for (int j = 0; j < grid.nr; ++j)
    m.node[j] = unnormalized(pot, grid.r[j]) / Z;
  m.face.resize(grid.nr + 1);
  for (int j = 0; j <= grid.nr; ++j)
    m.face[j] = unnormalized(pot, grid.rface[j]) / Z;
  m.face[grid.nr] = 0.0;
  m.ring_r.resize(grid.nr);
  m.ring.resize(grid.nr);
  for (int j = 0; j < grid.nr; ++j) {
    const double a = grid.rface[j], b = grid.rface[j + 1];
    m.ring_r[j] = integrate([&](double r) { return r * unnormalized(pot, r) / Z; }, a, b, 16);
    m.ring[j] = integrate([&](double r) { return unnormalized(pot, r) / Z; }, a, b, 16);
  }
  return m;
}

ConfigSpace::ConfigSpace(const Params& params, int nr, int ntheta)
{
  if (params.dim_q != 2)
    throw Error("configuration grids are implemented for dim_q = 2 only");
  const int K = params.K;
  if (static_cast<int>(params.b.size()) != K)
    throw Error("b must have K entries");
  maxw_.reserve(K);
  for (int i = 0; i < K; ++i) {
    SpringPotential pot{params.b[i]};
    maxw_.push_back(build_maxwellian(pot, QGrid(nr, ntheta, pot.radius())));
  }
  // Spring 0 varies slowest.
  stride_.assign(K, 1);
  for (int i = K - 2; i >= 0; --i)
    stride_[i] = stride_[i + 1] * maxw_[i + 1].grid.size();
  size_ = stride_[0] * maxw_[0].grid.size();

  spring_weight_.resize(K);
  for (int i = 0; i < K; ++i) {
    const QGrid& g = maxw_[i].grid;
    spring_weight_[i].resize(g.size());
    for (int n = 0; n < g.size(); ++n) {
      const int j = n / g.ntheta;
      spring_weight_[i][n] = g.cell_volume(j) * maxw_[i].node[j];
    }
  }
  weight_.assign(size_, 1.0);
  for (std::size_t c = 0; c < size_; ++c)
    for (int i = 0; i < K; ++i)
      weight_[c] *= spring_weight_[i][local(c, i)];
}

bool AssumptionReport::ok() const
{
  return std::all_of(springs.begin(), springs.end(), [](const Spring& s) {
    return s.boundary_decay_ok && s.force_bound_ok && s.integrability_ok;
  });
}

AssumptionReport verify_assumptions(const ConfigSpace& space)
{
  AssumptionReport report;
  for (int i = 0; i < space.springs(); ++i) {
    const Maxwellian& M = space.spring(i);
    const double R = M.grid.R;
    AssumptionReport::Spring s;

    // Boundary exponent: least-squares slope of ln M against ln dist.
    {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int n = 0;
      for (int k = 4; k <= 14; ++k) {
        const double d = R * std::pow(10.0, -0.5 * k);
        const double lx = std::log(d), ly = std::log(M(R - d));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
      }
      s.theta_fit = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    s.c1 = s.c3 = std::numeric_limits<double>::infinity();
    s.c2 = s.c4 = 0.0;
    const int samples = 4000;
    for (int k = 0; k < samples; ++k) {
      // Dense near the rim, where the bounds are tight.
      const double t = (k + 0.5) / samples;
      const double d = R * t * t;
      const double r = R - d;
      const double ratio = M(r) / std::pow(d, s.theta_fit);
      s.c1 = std::min(s.c1, ratio);
      s.c2 = std::max(s.c2, ratio);
      const double f = d * M.pot.eval(0.5 * r * r).dU;
      s.c3 = std::min(s.c3, f);
      s.c4 = std::max(s.c4, f);
    }

    double integral = 0;
    for (int j = 0; j < M.grid.nr; ++j) {
      const auto v = M.pot.eval(0.5 * M.grid.r[j] * M.grid.r[j]);
      integral += M.grid.cell_volume(j) * M.grid.ntheta * (1.0 + v.U * v.U + v.dU * v.dU) * M.node[j];
    }
    s.u3_integral = integral;

    s.boundary_decay_ok = s.theta_fit > 1.0 && s.c1 > 0 && std::isfinite(s.c2) && s.c1 <= s.c2;
    s.force_bound_ok = s.c3 > 0 && std::isfinite(s.c4) && s.c3 <= s.c4;
    s.integrability_ok = std::isfinite(integral);
    report.springs.push_back(s);
  }
  return report;
}

GradientIdentityResidual maxwellian_gradient_identity_check(const Maxwellian& maxw, double fraction)
{
  const QGrid& g = maxw.grid;
  GradientIdentityResidual out;
  out.origin = maxw.pot.eval(0.0).dU * 0.0;
  for (int j = 1; j + 1 < g.nr; ++j) {
    if (g.r[j] > fraction * g.R)
      break;
    const double dlnM = (std::log(maxw.node[j + 1]) - std::log(maxw.node[j - 1])) / (g.r[j + 1] - g.r[j - 1]);
    const double force = maxw.pot.eval(0.5 * g.r[j] * g.r[j]).dU * g.r[j];
    out.max_residual = std::max(out.max_residual, std::abs(-dlnM - force));
  }
  return out;
}

} // namespace nsfp
