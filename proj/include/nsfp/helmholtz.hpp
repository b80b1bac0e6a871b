#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nsfp/grid.hpp"
#include "nsfp/params.hpp"

namespace nsfp {

struct Mode {
  int k = 0, l = 0;
  double lambda = 0; // pi^2 (k^2 + l^2)
};

/// Neumann eigenfunctions of the unit square sampled at cell centres.
///
/// Sampled cosines are exactly orthonormal in the discrete h^2-weighted inner
/// product and are also the eigenvectors of the discrete Laplacian div_c grad_c,
/// which is what makes the projections below exact on the grid.
class SpectralBasis {
public:
  SpectralBasis() = default;
  SpectralBasis(const Grid2D& grid, int modes);

  const Grid2D& grid() const { return grid_; }
  int size() const { return static_cast<int>(modes_.size()); }
  const Mode& mode(int n) const { return modes_[n]; }
  const ScalarField& zeta(int n) const { return zeta_[n]; }
  /// Analytic gradient of zeta_n at cell centres.
  const VectorField& grad_zeta(int n) const { return grad_zeta_[n]; }
  /// Eigenvalue of -div_c grad_c on mode n.
  double discrete_lambda(int n) const;
  /// Index of mode (k, l) or -1 if it is not in the basis.
  int find(int k, int l) const;

  /// Orthonormal 1D cosine transform, C(i, k) = c_k cos(k pi (i+1/2)/n) / sqrt(n).
  const Eigen::MatrixXd& cosine_matrix() const { return C_; }

private:
  Grid2D grid_;
  std::vector<Mode> modes_;
  std::vector<ScalarField> zeta_;
  std::vector<VectorField> grad_zeta_;
  Eigen::MatrixXd C_;
};

/// Throws if modes exceeds the n^2 - 1 resolvable non-constant modes.
SpectralBasis neumann_eigenbasis(const Grid2D& grid, int modes);

struct Projection {
  VectorField H;     // solenoidal part
  VectorField Hperp; // gradient part, grad_c phi
  ScalarField phi;   // potential with zero mean
};

/// Solves div_c grad_c phi = div_c v by cosine expansion.
Projection helmholtz_project(const VectorField& v, const SpectralBasis& basis);

/// Gradient part restricted to the first N modes of the basis.
VectorField pn_truncate(const VectorField& v, const SpectralBasis& basis, int N);

/// Face average of the normal component on the four walls (max abs).
double wall_normal_trace(const Grid2D& g, const VectorField& v);

struct ModeSample {
  std::vector<double> b; // int r zeta_n
  std::vector<double> a; // Lambda^-1/2 int V . grad zeta_n
};

/// b_n of r = (rho - rho_bar)/epsilon and a_n of V = m for the first `modes` modes.
ModeSample mode_coefficients(const ScalarField& rho, const VectorField& m, const SpectralBasis& basis,
                             const Params& params, int modes);

struct AcousticTrace {
  std::vector<Mode> modes;
  std::vector<double> t;
  std::vector<ModeSample> samples;

  void push(double time, ModeSample s)
  {
    t.push_back(time);
    samples.push_back(std::move(s));
  }
};

struct AcousticFit {
  double omega_fit = 0;
  double omega_theory = 0;
  double residual = 0; // relative residual of eps db/dt - sqrt(Lambda) a
  double second_residual = 0; // relative residual of eps da/dt + p'(rho_bar) sqrt(Lambda) b
};

/// Frequency fit and oscillator residuals for mode index n of the trace.
AcousticFit acoustic_residual(const AcousticTrace& trace, const Params& params, int n);

/// Peak angular frequency of a uniformly sampled signal (Hann window, padded
/// DFT, parabolic peak interpolation). Throws "no signal" on a flat input.
double fit_frequency(const std::vector<double>& t, const std::vector<double>& y);

} // namespace nsfp
