#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nsfp {

/// Thrown for contract violations of any solver operation. The message names
/// the failing condition ("density floor reached", "positivity failure", ...).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Dimensionless constants of the compressible Navier-Stokes-Fokker-Planck
/// system. All quantities are already scaled: De = Re = 1, Ma = epsilon.
struct Params {
  double epsilon = 0.1;   // Mach number
  double gamma = 2.0;     // adiabatic exponent
  double c_p = 1.0;       // pressure constant, p = c_p rho^gamma
  double mu_s = 1.0;      // shear viscosity
  double mu_b = 0.1;      // bulk viscosity
  double beta_comp = 0.5; // 1 - beta = eta_p / (eta_s + eta_p)
  double delta = 0.1;     // centre-of-mass diffusion
  double xi_bar = 0.1;    // polymer interaction coefficient
  double rho_bar = 1.0;   // static density
  int K = 1;              // springs per chain
  std::vector<double> b{4.0};
  Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, 2.0); // Rouse matrix
  int dim_x = 2;
  int dim_q = 2;

  static Params baseline() { return Params{}; }

  double pressure_derivative(double rho) const;
};

struct ValidationReport {
  std::vector<std::string> violations;
  double a0 = 0.0; // smallest eigenvalue of A (NaN if A is not symmetric)

  bool valid() const { return violations.empty(); }
};

ValidationReport validate(const Params& params);

/// Effective coefficients of the scaled momentum equation.
struct ScaledNumbers {
  double pressure_prefactor;  // 1 / epsilon^2
  double interaction;         // xi_bar: the epsilon^2 of xi_tilde cancels 1/Ma^2
  double deborah = 1.0;
  double reynolds = 1.0;
  double body_force = 0.0;
};

ScaledNumbers scaled_numbers(const Params& params);

/// Smallest eigenvalue of a symmetric matrix. Throws "matrix not symmetric".
double rouse_min_eigenvalue(const Eigen::MatrixXd& A);

} // namespace nsfp
