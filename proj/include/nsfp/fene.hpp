#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "nsfp/params.hpp"

namespace nsfp {

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// FENE spring potential U(s) = -(b/2) ln(1 - 2s/b) on s in [0, b/2).
struct SpringPotential {
  double b = 4.0;

  struct Value {
    double U;
    double dU;
  };

  Value eval(double s) const;
  double radius() const; // sqrt(b), the ball radius in q
  double theta() const { return 0.5 * b; } // boundary exponent of the Maxwellian
};

SpringPotential::Value fene_eval(double s, double b);

/// Polar finite-volume / quadrature grid on a ball B(0, sqrt(b)) in 2D.
///
/// Radial nodes are Gauss-Legendre points on [0, R]; angular nodes are uniform.
/// Each node owns a polar cell whose area equals its quadrature weight, so the
/// same grid serves as quadrature rule and finite-volume mesh.
struct QGrid {
  int nr = 0;
  int ntheta = 0;
  double R = 0;
  double dtheta = 0;
  std::vector<double> r;      // radial nodes
  std::vector<double> wr;     // Gauss-Legendre weights on [0, R]
  std::vector<double> rface;  // nr + 1 radial cell faces, rface[0] = 0, rface[nr] = R
  std::vector<double> theta;  // angular nodes

  QGrid() = default;
  QGrid(int nr, int ntheta, double radius);

  int size() const { return nr * ntheta; }
  int index(int j, int k) const { return j * ntheta + k; }
  double cell_volume(int j) const { return wr[j] * r[j] * dtheta; }
  std::array<double, 2> node(int n) const;
};

/// Partial Maxwellian of one spring sampled on its QGrid.
struct Maxwellian {
  SpringPotential pot;
  QGrid grid;
  double Z = 0;                  // partition constant
  std::vector<double> node;      // M at radial nodes (size nr)
  std::vector<double> face;      // M at radial faces (size nr + 1, zero at the rim)
  std::vector<double> ring_r;    // int_{rface[j]}^{rface[j+1]} M r dr
  std::vector<double> ring;      // int_{rface[j]}^{rface[j+1]} M dr

  double operator()(double r) const;
  /// Sum over the grid of V * M; equals one up to roundoff.
  double mass() const;
};

Maxwellian build_maxwellian(const SpringPotential& pot, const QGrid& grid);

/// Tensor-product configuration space D = B_1 x ... x B_K with total Maxwellian.
class ConfigSpace {
public:
  ConfigSpace() = default;
  ConfigSpace(const Params& params, int nr, int ntheta);

  int springs() const { return static_cast<int>(maxw_.size()); }
  std::size_t size() const { return size_; }
  const Maxwellian& spring(int i) const { return maxw_[i]; }
  std::size_t stride(int i) const { return stride_[i]; }
  /// Local (per-spring) node index of spring i inside flat node c.
  int local(std::size_t c, int i) const
  {
    return static_cast<int>((c / stride_[i]) % maxw_[i].grid.size());
  }
  /// M(q) times the quadrature cell volume at every flat node.
  const std::vector<double>& weight() const { return weight_; }
  /// Per-spring weights V_j M_j (size grid(i).size()).
  const std::vector<double>& spring_weight(int i) const { return spring_weight_[i]; }

private:
  std::vector<Maxwellian> maxw_;
  std::vector<std::size_t> stride_;
  std::vector<std::vector<double>> spring_weight_;
  std::vector<double> weight_;
  std::size_t size_ = 0;
};

struct AssumptionReport {
  struct Spring {
    double theta_fit = 0;
    double c1 = 0, c2 = 0; // c1 dist^theta <= M <= c2 dist^theta
    double c3 = 0, c4 = 0; // c3 <= dist U' <= c4
    double u3_integral = 0;
    bool boundary_decay_ok = false;
    bool force_bound_ok = false;
    bool integrability_ok = false;
  };
  std::vector<Spring> springs;
  bool ok() const;
};

AssumptionReport verify_assumptions(const ConfigSpace& space);

struct GradientIdentityResidual {
  double max_residual = 0; // max |-(ln M)' - U' r| over interior nodes with r <= fraction * R
  double origin = 0;       // value of both sides at q = 0
};

/// Compares the centred difference of -ln M on the radial nodes with the spring
/// force U'(r^2/2) r. Nodes beyond fraction * R are skipped: the log-singularity
/// at the rim is not resolved by any fixed-order difference.
GradientIdentityResidual maxwellian_gradient_identity_check(const Maxwellian& maxw, double fraction = 0.9);

} // namespace nsfp
