#include "nsfp/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace nsfp {

double Params::pressure_derivative(double rho) const
{
  return c_p * gamma * std::pow(rho, gamma - 1.0);
}

double rouse_min_eigenvalue(const Eigen::MatrixXd& A)
{
  if (A.rows() != A.cols() || A.rows() == 0)
    throw Error("matrix not square");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error("matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

ValidationReport validate(const Params& p)
{
  ValidationReport report;
  auto fail = [&](std::string what) { report.violations.push_back(std::move(what)); };

  if (!(p.gamma > 1.5))
    fail("gamma <= 3/2");
  if (!(p.c_p > 0))
    fail("c_p <= 0");
  if (!(p.mu_s > 0))
    fail("mu_s <= 0");
  if (!(p.mu_b >= 0))
    fail("mu_b < 0");
  if (!(p.delta > 0))
    fail("delta <= 0");
  if (!(p.xi_bar >= 0))
    fail("xi_bar < 0");
  if (!(p.rho_bar > 0))
    fail("rho_bar <= 0");
  if (!(p.epsilon > 0 && p.epsilon < 1))
    fail("epsilon not in (0,1)");
  if (!(p.beta_comp > 0 && p.beta_comp < 1))
    fail("1-beta not in (0,1)");
  if (p.dim_x != 2 && p.dim_x != 3)
    fail("dim_x not in {2,3}");
  if (p.dim_q != p.dim_x)
    fail("dim_q != dim_x");
  if (p.K < 1)
    fail("K < 1");
  if (static_cast<int>(p.b.size()) != p.K)
    fail("b has " + std::to_string(p.b.size()) + " entries, expected K=" + std::to_string(p.K));
  for (std::size_t i = 0; i < p.b.size(); ++i)
    if (!(p.b[i] > 2)) {
      std::ostringstream os;
      os << "b[" << i << "] <= 2";
      fail(os.str());
    }

  report.a0 = std::numeric_limits<double>::quiet_NaN();
  if (p.A.rows() != p.K || p.A.cols() != p.K) {
    fail("A is not K x K");
  } else {
    try {
      report.a0 = rouse_min_eigenvalue(p.A);
      if (!(report.a0 > 0))
        fail("A not positive definite (a0 <= 0)");
    } catch (const Error& e) {
      fail(std::string("A: ") + e.what());
    }
  }
  return report;
}

ScaledNumbers scaled_numbers(const Params& p)
{
  ScaledNumbers s{};
  s.pressure_prefactor = 1.0 / (p.epsilon * p.epsilon);
  s.interaction = p.xi_bar;
  return s;
}

} // namespace nsfp
