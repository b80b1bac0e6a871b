#include "nsfp/helmholtz.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace nsfp {

namespace {

constexpr double pi = std::numbers::pi;

double cnorm(int k) { return k == 0 ? 1.0 : std::sqrt(2.0); }

Eigen::MatrixXd to_matrix(const Grid2D& g, const ScalarField& f)
{
  // Row j, column i.
  Eigen::MatrixXd M(g.n, g.n);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      M(j, i) = f[g.index(i, j)];
  return M;
}

ScalarField from_matrix(const Grid2D& g, const Eigen::MatrixXd& M)
{
  ScalarField f = g.scalar();
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      f[g.index(i, j)] = M(j, i);
  return f;
}

double dot(const Grid2D& g, const VectorField& a, const VectorField& b)
{
  double s = 0;
  for (std::size_t c = 0; c < a.size(); ++c)
    s += a.x[c] * b.x[c] + a.y[c] * b.y[c];
  return s * g.cell_area();
}

double sin2(int k, int n)
{
  const double s = std::sin(k * pi / n);
  return s * s;
}

} // namespace

SpectralBasis::SpectralBasis(const Grid2D& grid, int count) : grid_(grid)
{
  const int n = grid.n;
  if (count < 0 || count > n * n - 1)
    throw Error("requested modes exceed the grid Nyquist set (" + std::to_string(n * n - 1) + ")");

  std::vector<Mode> all;
  all.reserve(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      if (k || l)
        all.push_back({k, l, pi * pi * (k * k + l * l)});
  // (1,0) before (0,1) on ties.
  std::stable_sort(all.begin(), all.end(), [](const Mode& a, const Mode& b) {
    const int na = a.k * a.k + a.l * a.l, nb = b.k * b.k + b.l * b.l;
    return na != nb ? na < nb : a.k > b.k;
  });
  modes_.assign(all.begin(), all.begin() + count);

  C_.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      C_(i, k) = cnorm(k) * std::cos(k * pi * grid.xc(i)) / std::sqrt(static_cast<double>(n));

  zeta_.reserve(count);
  grad_zeta_.reserve(count);
  for (const Mode& m : modes_) {
    ScalarField z = grid.scalar();
    VectorField gz = grid.vector();
    const double c = cnorm(m.k) * cnorm(m.l);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double x = grid.xc(i), y = grid.xc(j);
        const auto idx = grid.index(i, j);
        z[idx] = c * std::cos(m.k * pi * x) * std::cos(m.l * pi * y);
        gz.x[idx] = -c * m.k * pi * std::sin(m.k * pi * x) * std::cos(m.l * pi * y);
        gz.y[idx] = -c * m.l * pi * std::cos(m.k * pi * x) * std::sin(m.l * pi * y);
      }
    zeta_.push_back(std::move(z));
    grad_zeta_.push_back(std::move(gz));
  }
}

double SpectralBasis::discrete_lambda(int n) const
{
  const Mode& m = modes_[n];
  return (sin2(m.k, grid_.n) + sin2(m.l, grid_.n)) / (grid_.h * grid_.h);
}

int SpectralBasis::find(int k, int l) const
{
  for (int n = 0; n < size(); ++n)
    if (modes_[n].k == k && modes_[n].l == l)
      return n;
  return -1;
}

SpectralBasis neumann_eigenbasis(const Grid2D& grid, int modes) { return SpectralBasis(grid, modes); }

Projection helmholtz_project(const VectorField& v, const SpectralBasis& basis)
{
  const Grid2D& g = basis.grid();
  const Eigen::MatrixXd& C = basis.cosine_matrix();
  const int n = g.n;

  Eigen::MatrixXd hat = C.transpose() * to_matrix(g, div_c(g, v)) * C; // (l, k)
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) {
      if (k == 0 && l == 0) {
        hat(l, k) = 0.0;
        continue;
      }
      hat(l, k) /= -(sin2(k, n) + sin2(l, n)) / (g.h * g.h);
    }

  Projection p;
  p.phi = from_matrix(g, C * hat * C.transpose());
  p.Hperp = grad_c(g, p.phi);
  p.H = v;
  for (std::size_t c = 0; c < v.size(); ++c) {
    p.H.x[c] -= p.Hperp.x[c];
    p.H.y[c] -= p.Hperp.y[c];
  }
  return p;
}

VectorField pn_truncate(const VectorField& v, const SpectralBasis& basis, int N)
{
  if (N < 0 || N > basis.size())
    throw Error("pn_truncate: basis has fewer than N modes");
  const Grid2D& g = basis.grid();
  VectorField out = g.vector();
  for (int n = 0; n < N; ++n) {
    // Discrete gradients of the sampled cosines are mutually orthogonal with
    // squared norm equal to the discrete eigenvalue.
    const VectorField gz = grad_c(g, basis.zeta(n));
    const double coef = dot(g, v, gz) / basis.discrete_lambda(n);
    for (std::size_t c = 0; c < out.size(); ++c) {
      out.x[c] += coef * gz.x[c];
      out.y[c] += coef * gz.y[c];
    }
  }
  return out;
}

double wall_normal_trace(const Grid2D& g, const VectorField& v)
{
  // With odd reflection the face average of the normal component is zero by
  // construction; this evaluates it from the ghost values anyway.
  double m = 0;
  for (int k = 0; k < g.n; ++k) {
    const double west = 0.5 * (v.x[g.index(0, k)] + -v.x[g.index(0, k)]);
    const double east = 0.5 * (v.x[g.index(g.n - 1, k)] + -v.x[g.index(g.n - 1, k)]);
    const double south = 0.5 * (v.y[g.index(k, 0)] + -v.y[g.index(k, 0)]);
    const double north = 0.5 * (v.y[g.index(k, g.n - 1)] + -v.y[g.index(k, g.n - 1)]);
    m = std::max({m, std::abs(west), std::abs(east), std::abs(south), std::abs(north)});
  }
  return m;
}

ModeSample mode_coefficients(const ScalarField& rho, const VectorField& mom, const SpectralBasis& basis,
                             const Params& params, int modes)
{
  if (modes > basis.size())
    throw Error("mode_coefficients: basis has too few modes");
  const Grid2D& g = basis.grid();
  const double area = g.cell_area();
  ModeSample s;
  s.b.resize(modes);
  s.a.resize(modes);
  for (int n = 0; n < modes; ++n) {
    const ScalarField& z = basis.zeta(n);
    const VectorField& gz = basis.grad_zeta(n);
    double b = 0, a = 0;
    for (std::size_t c = 0; c < rho.size(); ++c) {
      b += (rho[c] - params.rho_bar) * z[c];
      a += mom.x[c] * gz.x[c] + mom.y[c] * gz.y[c];
    }
    s.b[n] = b * area / params.epsilon;
    s.a[n] = a * area / std::sqrt(basis.mode(n).lambda);
  }
  return s;
}

double fit_frequency(const std::vector<double>& t, const std::vector<double>& y)
{
  const std::size_t N = y.size();
  if (N < 3 || t.size() != N)
    throw Error("fit_frequency: need at least 3 uniform samples");
  const double dt = (t.back() - t.front()) / (N - 1);
  if (!(dt > 0))
    throw Error("fit_frequency: non-increasing sample times");

  double mean = 0;
  for (double v : y)
    mean += v;
  mean /= N;
  std::vector<double> w(N);
  double peak = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const double hann = 0.5 * (1.0 - std::cos(2.0 * pi * k / (N - 1)));
    w[k] = hann * (y[k] - mean);
    peak = std::max(peak, std::abs(y[k] - mean));
  }
  if (!(peak > 1e-300))
    throw Error("no signal");

  const int pad = 64;
  const double span = N * dt;
  const double dw = 2.0 * pi / (span * pad);
  const int bins = static_cast<int>(std::floor((pi / dt) / dw));
  const int first = std::max(1, static_cast<int>(std::ceil((2.0 * pi / span) / dw)));
  if (bins <= first + 1)
    throw Error("fit_frequency: trace too short");

  auto power = [&](double omega) {
    std::complex<double> acc = 0;
    const std::complex<double> step = std::polar(1.0, -omega * dt);
    std::complex<double> rot = 1.0;
    for (std::size_t k = 0; k < N; ++k) {
      acc += w[k] * rot;
      rot *= step;
    }
    return std::abs(acc);
  };

  std::vector<double> P(bins + 1);
  for (int j = first - 1; j <= bins; ++j)
    P[j] = power(j * dw);
  int best = first;
  for (int j = first; j < bins; ++j)
    if (P[j] > P[best])
      best = j;
  const double l = P[best - 1], c = P[best], r = P[best + 1];
  const double denom = l - 2.0 * c + r;
  const double shift = denom != 0.0 ? 0.5 * (l - r) / denom : 0.0;
  return (best + shift) * dw;
}

AcousticFit acoustic_residual(const AcousticTrace& trace, const Params& params, int n)
{
  const std::size_t N = trace.t.size();
  if (N < 3)
    throw Error("acoustic_residual: need at least 3 samples");
  if (n < 0 || n >= static_cast<int>(trace.modes.size()))
    throw Error("acoustic_residual: mode not tracked");

  std::vector<double> b(N), a(N);
  double amp = 0;
  for (std::size_t k = 0; k < N; ++k) {
    b[k] = trace.samples[k].b[n];
    a[k] = trace.samples[k].a[n];
    amp = std::max({amp, std::abs(b[k]), std::abs(a[k])});
  }
  if (!(amp > 1e-300))
    throw Error("no signal");

  const double eps = params.epsilon;
  const double sl = std::sqrt(trace.modes[n].lambda);
  const double pp = params.pressure_derivative(params.rho_bar);
  const double dt = (trace.t.back() - trace.t.front()) / (N - 1);

  double r1 = 0, r2 = 0, s1 = 0, s2 = 0;
  for (std::size_t k = 1; k + 1 < N; ++k) {
    const double db = eps * (b[k + 1] - b[k - 1]) / (2.0 * dt);
    const double da = eps * (a[k + 1] - a[k - 1]) / (2.0 * dt);
    const double e1 = db - sl * a[k];
    const double e2 = da + pp * sl * b[k];
    r1 += e1 * e1;
    r2 += e2 * e2;
    s1 += std::max(db * db, sl * sl * a[k] * a[k]);
    s2 += std::max(da * da, pp * pp * sl * sl * b[k] * b[k]);
  }

  AcousticFit fit;
  fit.residual = s1 > 0 ? std::sqrt(r1 / s1) : 0.0;
  fit.second_residual = s2 > 0 ? std::sqrt(r2 / s2) : 0.0;
  fit.omega_fit = fit_frequency(trace.t, b);
  fit.omega_theory = std::sqrt(pp * trace.modes[n].lambda) / eps;
  return fit;
}

} // namespace nsfp
