#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "nsfp/fene.hpp"
#include "nsfp/grid.hpp"
#include "nsfp/params.hpp"

namespace nsfp {

/// psi_hat = psi / M on the tensor grid, stored cell-major: psi[c * nq + n].
struct ConfigDistribution {
  std::shared_ptr<const ConfigSpace> space;
  Grid2D grid;
  std::vector<double> psi;
  double time = 0;

  ConfigDistribution() = default;
  ConfigDistribution(std::shared_ptr<const ConfigSpace> s, const Grid2D& g, double value = 1.0);

  std::size_t nq() const { return space->size(); }
  double* cell(std::size_t c) { return psi.data() + c * nq(); }
  const double* cell(std::size_t c) const { return psi.data() + c * nq(); }
};

/// Quadrature form of C_i: sum_q W psi_hat U_i' q_i q_i^T.
TensorField kramers_tensor(int spring, const ConfigDistribution& dist);

/// Form of C_i adjoint to the discrete drift flux: G : C_i - tr(G) rho equals the
/// rate at which the drift moves relative entropy. Used for coupling so that the
/// work done on the fluid matches the polymer side exactly.
TensorField kramers_tensor_fv(int spring, const ConfigDistribution& dist);

struct KramersIdentity {
  double residual = 0; // max |LHS - RHS| over tensor entries
  Eigen::Matrix2d lhs, rhs;
};

/// Compares C_i(M phi) with int M grad(phi) q^T + (int M phi) I for a test
/// function of q_i alone.
KramersIdentity kramers_identity_check(const ConfigSpace& space, int spring,
                                       const std::function<double(double, double)>& phi,
                                       const std::function<std::array<double, 2>(double, double)>& grad_phi);

ScalarField number_density(const ConfigDistribution& dist);

/// (1 - beta)(sum_i C_i - (K + 1) rho I); drift-adjoint C_i unless quadrature is set.
TensorField tau1(const ConfigDistribution& dist, const Params& params, bool quadrature = false);

struct EntropyFisher {
  double entropy = 0;  // int int M F(psi_hat)
  double fisher_x = 0; // 4 delta int int M |grad_x sqrt(psi_hat)|^2
  double fisher_q = 0; // sum A_ij int int M grad_qi sqrt(psi_hat) . grad_qj sqrt(psi_hat)
};

EntropyFisher entropy_fisher(const ConfigDistribution& dist, const Params& params);

/// F(s) = s (log s - 1), with the limit 0 below 1e-14.
double relative_entropy_density(double s);

namespace detail {

// Drift face coefficients of one spring per unit entry of G. Radial face (j, k),
// j = 0..nr, lies between cells j-1 and j; angular face (j, k) between k and k+1.
struct DriftFaces {
  std::vector<double> rxx, rxy, ryy;
  std::vector<double> axx, axy, ayx, ayy;
};
DriftFaces drift_faces(const Maxwellian& m);

// Diffusion transmissibilities of one spring (without the A_ii / 4 factor).
struct DiffusionFaces {
  std::vector<double> radial;  // (j, k), j = 0..nr; zero at the centre and rim
  std::vector<double> angular; // (j, k) between k and k+1
};
DiffusionFaces diffusion_faces(const Maxwellian& m);

} // namespace detail

/// Conservative x-transport on the cell grid: explicit upwind advection with
/// face-averaged velocities and the exact exponential of the Neumann Laplacian.
/// Fields carry `width` interleaved components per cell.
class XTransport {
public:
  XTransport(const Grid2D& grid, double delta);

  /// out += -dt div(u_f f_upwind)
  void advect(const double* in, double* out, std::size_t width, const FaceVelocity& f, double dt) const;
  void diffuse(double* data, std::size_t width, double dt);
  /// Largest outflow rate sum(u_out) / h over cells.
  double max_rate(const FaceVelocity& f) const;
  const Grid2D& grid() const { return grid_; }

private:
  const Eigen::MatrixXd& exponential(double dt);

  Grid2D grid_;
  double delta_;
  Eigen::MatrixXd C_;
  Eigen::VectorXd lam_;
  std::map<double, Eigen::MatrixXd> cache_;
};

/// Fokker-Planck stepper. One step is: explicit upwind x-advection and q-drift
/// (plus explicit cross-spring diffusion when K > 1), then the exact exponential
/// of the q-diffusion of each spring, then the exact x-diffusion exponential.
class FpSolver {
public:
  FpSolver(const Params& params, std::shared_ptr<const ConfigSpace> space, const Grid2D& grid);

  void step(ConfigDistribution& dist, const VectorField& u, const TensorField& G, double dt);
  /// Advection-diffusion of the number density with the same x-operators.
  void rho_step(ScalarField& rho, const VectorField& u, double dt);
  /// Largest dt for which the explicit part keeps psi_hat nonnegative.
  double max_dt(const VectorField& u, const TensorField& G) const;

  const ConfigSpace& space() const { return *space_; }
  const Grid2D& grid() const { return x_.grid(); }

private:
  struct SpringOps {
    detail::DriftFaces drift;
    Eigen::VectorXd sqrtw;
    Eigen::MatrixXd eigvec;
    Eigen::VectorXd eigval;
    std::map<double, Eigen::MatrixXd> cache;
  };

  void explicit_part(ConfigDistribution& dist, const VectorField& u, const TensorField& G, double dt) const;
  void q_diffusion(ConfigDistribution& dist, double dt);
  const Eigen::MatrixXd& q_exponential(int spring, double dt);

  Params params_;
  std::shared_ptr<const ConfigSpace> space_;
  XTransport x_;
  std::vector<SpringOps> ops_;
};

/// Free-function forms; each builds a temporary solver.
ConfigDistribution fp_step(const ConfigDistribution& dist, const Params& params, const VectorField& u,
                           const TensorField& G, double dt);
ScalarField rho_ad_step(const ScalarField& rho, const Params& params, const Grid2D& grid, const VectorField& u,
                        double dt);

/// Replaces roundoff negatives in (-1e-12, 0) by zero; throws "positivity failure" below that.
void enforce_positivity(std::vector<double>& values);

} // namespace nsfp
