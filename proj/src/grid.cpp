#include "nsfp/grid.hpp"

#include <algorithm>
#include <cmath>

#include "nsfp/params.hpp"

namespace nsfp {

Grid2D::Grid2D(int cells) : n(cells), h(1.0 / cells)
{
  if (cells < 2)
    throw Error("grid needs at least 2 cells per side");
}

namespace {

// Centred x-difference with a mirror ghost of the given parity (+1 even, -1 odd).
inline double dx(const Grid2D& g, const ScalarField& f, int i, int j, double parity)
{
  const double left = i > 0 ? f[g.index(i - 1, j)] : parity * f[g.index(0, j)];
  const double right = i + 1 < g.n ? f[g.index(i + 1, j)] : parity * f[g.index(g.n - 1, j)];
  return (right - left) / (2.0 * g.h);
}

inline double dy(const Grid2D& g, const ScalarField& f, int i, int j, double parity)
{
  const double down = j > 0 ? f[g.index(i, j - 1)] : parity * f[g.index(i, 0)];
  const double up = j + 1 < g.n ? f[g.index(i, j + 1)] : parity * f[g.index(i, g.n - 1)];
  return (up - down) / (2.0 * g.h);
}

constexpr double even = 1.0;
constexpr double odd = -1.0;

} // namespace

VectorField grad_c(const Grid2D& g, const ScalarField& f)
{
  VectorField out = g.vector();
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const auto c = g.index(i, j);
      out.x[c] = dx(g, f, i, j, even);
      out.y[c] = dy(g, f, i, j, even);
    }
  return out;
}

ScalarField div_c(const Grid2D& g, const VectorField& v)
{
  ScalarField out = g.scalar();
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      out[g.index(i, j)] = dx(g, v.x, i, j, odd) + dy(g, v.y, i, j, odd);
  return out;
}

TensorField velocity_gradient(const Grid2D& g, const VectorField& u)
{
  TensorField G(g.size());
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const auto c = g.index(i, j);
      G.xx[c] = dx(g, u.x, i, j, odd);
      G.xy[c] = dy(g, u.x, i, j, even);
      G.yx[c] = dx(g, u.y, i, j, even);
      G.yy[c] = dy(g, u.y, i, j, odd);
    }
  return G;
}

VectorField div_tensor(const Grid2D& g, const TensorField& T)
{
  VectorField out = g.vector();
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const auto c = g.index(i, j);
      out.x[c] = dx(g, T.xx, i, j, even) + dy(g, T.xy, i, j, odd);
      out.y[c] = dx(g, T.yx, i, j, odd) + dy(g, T.yy, i, j, even);
    }
  return out;
}

FaceVelocity face_velocity(const Grid2D& g, const VectorField& u)
{
  const int n = g.n;
  FaceVelocity f;
  f.x.assign(static_cast<std::size_t>(n + 1) * n, 0.0);
  f.y.assign(static_cast<std::size_t>(n + 1) * n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 1; i < n; ++i)
      f.x[j * (n + 1) + i] = 0.5 * (u.x[g.index(i - 1, j)] + u.x[g.index(i, j)]);
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < n; ++i)
      f.y[j * n + i] = 0.5 * (u.y[g.index(i, j - 1)] + u.y[g.index(i, j)]);
  return f;
}

double integrate(const Grid2D& g, const ScalarField& f)
{
  double s = 0;
  for (double v : f)
    s += v;
  return s * g.cell_area();
}

double l2_norm(const Grid2D& g, const ScalarField& f)
{
  double s = 0;
  for (double v : f)
    s += v * v;
  return std::sqrt(s * g.cell_area());
}

double l2_norm(const Grid2D& g, const VectorField& v)
{
  double s = 0;
  for (std::size_t c = 0; c < v.size(); ++c)
    s += v.x[c] * v.x[c] + v.y[c] * v.y[c];
  return std::sqrt(s * g.cell_area());
}

double max_abs(const ScalarField& f)
{
  double m = 0;
  for (double v : f)
    m = std::max(m, std::abs(v));
  return m;
}

} // namespace nsfp
