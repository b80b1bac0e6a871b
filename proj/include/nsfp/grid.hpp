#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace nsfp {

using ScalarField = std::vector<double>;

struct VectorField {
  ScalarField x, y;

  VectorField() = default;
  explicit VectorField(std::size_t n, double vx = 0.0, double vy = 0.0) : x(n, vx), y(n, vy) {}
  std::size_t size() const { return x.size(); }
};

/// Full 2x2 tensor per cell; g[a][b] for row a, column b.
struct TensorField {
  ScalarField xx, xy, yx, yy;

  TensorField() = default;
  explicit TensorField(std::size_t n) : xx(n, 0.0), xy(n, 0.0), yx(n, 0.0), yy(n, 0.0) {}
  std::size_t size() const { return xx.size(); }
};

/// Uniform cell-centred grid on the unit square with slip walls.
///
/// Cell (i, j) has centre ((i + 1/2) h, (j + 1/2) h) and flat index j * n + i.
/// Every centred operator below reads one mirror ghost layer: scalars and
/// tangential components are even across a wall, normal components (and the
/// off-diagonal entries of wall-traction tensors) are odd. With these parities
/// grad/div and grad/div-of-tensor are exact negative adjoints of each other.
struct Grid2D {
  int n = 0;
  double h = 0;

  Grid2D() = default;
  explicit Grid2D(int cells);

  std::size_t size() const { return static_cast<std::size_t>(n) * n; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n + i; }
  double xc(int i) const { return (i + 0.5) * h; }
  double cell_area() const { return h * h; }

  ScalarField scalar(double v = 0.0) const { return ScalarField(size(), v); }
  VectorField vector(double vx = 0.0, double vy = 0.0) const { return VectorField(size(), vx, vy); }
};

/// Centred gradient of an even scalar.
VectorField grad_c(const Grid2D& g, const ScalarField& f);
/// Centred divergence of a wall-tangent vector field (normal component odd).
ScalarField div_c(const Grid2D& g, const VectorField& v);
/// Velocity gradient G[a][b] = d u_a / d x_b with slip parities.
TensorField velocity_gradient(const Grid2D& g, const VectorField& u);
/// Row divergence (div T)_a = sum_b d_b T_ab of a tensor with wall-traction
/// parities (diagonal even, off-diagonal odd).
VectorField div_tensor(const Grid2D& g, const TensorField& T);

/// Face-average normal velocity on x-faces (n+1 per row) and y-faces; zero on walls.
struct FaceVelocity {
  std::vector<double> x; // size (n+1) * n, index j * (n+1) + i for face between i-1 and i
  std::vector<double> y; // size n * (n+1), index j * n + i for face between j-1 and j
};
FaceVelocity face_velocity(const Grid2D& g, const VectorField& u);

double integrate(const Grid2D& g, const ScalarField& f);
double l2_norm(const Grid2D& g, const ScalarField& f);
double l2_norm(const Grid2D& g, const VectorField& v);
double max_abs(const ScalarField& f);

} // namespace nsfp
