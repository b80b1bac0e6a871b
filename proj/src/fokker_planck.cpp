#include "nsfp/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nsfp/parallel.hpp"

namespace nsfp {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ConfigDistribution::ConfigDistribution(std::shared_ptr<const ConfigSpace> s, const Grid2D& g, double value)
    : space(std::move(s)), grid(g), psi(g.size() * space->size(), value)
{
}

double relative_entropy_density(double s)
{
  if (s < 1e-14)
    return 0.0;
  return s * (std::log(s) - 1.0);
}

void enforce_positivity(std::vector<double>& values)
{
  for (double& v : values) {
    if (v >= 0.0)
      continue;
    if (v > -1e-12) {
      v = 0.0;
      continue;
    }
    std::ostringstream os;
    os << "positivity failure (value " << v << ")";
    throw Error(os.str());
  }
}

namespace detail {

DriftFaces drift_faces(const Maxwellian& m)
{
  const QGrid& g = m.grid;
  const int nr = g.nr, nt = g.ntheta;
  DriftFaces d;
  d.rxx.assign((nr + 1) * nt, 0.0);
  d.rxy.assign((nr + 1) * nt, 0.0);
  d.ryy.assign((nr + 1) * nt, 0.0);
  for (int j = 1; j < nr; ++j) {
    const double pref = m.face[j] * g.rface[j] * g.rface[j];
    for (int k = 0; k < nt; ++k) {
      const double a = g.theta[k] - 0.5 * g.dtheta, b = g.theta[k] + 0.5 * g.dtheta;
      const double s2 = (std::sin(2 * b) - std::sin(2 * a)) / 4.0;
      const int f = j * nt + k;
      d.rxx[f] = pref * (0.5 * g.dtheta + s2);
      d.ryy[f] = pref * (0.5 * g.dtheta - s2);
      d.rxy[f] = pref * (std::cos(2 * a) - std::cos(2 * b)) / 4.0;
    }
  }
  d.axx.assign(nr * nt, 0.0);
  d.axy.assign(nr * nt, 0.0);
  d.ayx.assign(nr * nt, 0.0);
  d.ayy.assign(nr * nt, 0.0);
  for (int j = 0; j < nr; ++j)
    for (int k = 0; k < nt; ++k) {
      const double th = g.theta[k] + 0.5 * g.dtheta;
      const double s = std::sin(th), c = std::cos(th), w = m.ring_r[j];
      const int f = j * nt + k;
      d.axx[f] = -s * c * w;
      d.axy[f] = -s * s * w;
      d.ayx[f] = c * c * w;
      d.ayy[f] = s * c * w;
    }
  return d;
}

DiffusionFaces diffusion_faces(const Maxwellian& m)
{
  const QGrid& g = m.grid;
  const int nr = g.nr, nt = g.ntheta;
  DiffusionFaces d;
  d.radial.assign((nr + 1) * nt, 0.0);
  for (int j = 1; j < nr; ++j)
    for (int k = 0; k < nt; ++k)
      d.radial[j * nt + k] = m.face[j] * g.rface[j] * g.dtheta / (g.r[j] - g.r[j - 1]);
  d.angular.assign(nr * nt, 0.0);
  for (int j = 0; j < nr; ++j)
    for (int k = 0; k < nt; ++k)
      d.angular[j * nt + k] = (g.rface[j + 1] - g.rface[j]) * m.node[j] / (g.r[j] * g.dtheta);
  return d;
}

} // namespace detail

namespace {

// Symmetrised exponential with the kernel vector v0 restored exactly, so that
// the weighted mass is conserved to roundoff.
Eigen::MatrixXd conserving_exponential(const Eigen::MatrixXd& Q, const Eigen::VectorXd& lam, double t,
                                       const Eigen::VectorXd& v0)
{
  Eigen::VectorXd e = (t * lam.array()).exp().matrix();
  Eigen::MatrixXd E = Q * e.asDiagonal() * Q.transpose();
  const Eigen::VectorXd err = v0 - E * v0;
  const double c = v0.dot(err);
  E += err * v0.transpose() + v0 * err.transpose() - c * v0 * v0.transpose();
  return E;
}

// Cartesian gradient in q_i of node values at flat node n.
std::array<double, 2> polar_gradient(const double* f, std::size_t n, const ConfigSpace& space, int i)
{
  const QGrid& g = space.spring(i).grid;
  const int loc = space.local(n, i);
  const int j = loc / g.ntheta, k = loc % g.ntheta;
  const long s = static_cast<long>(space.stride(i));
  auto at = [&](int jj, int kk) { return f[n + s * ((jj - j) * g.ntheta + (kk - k))]; };
  const int jl = std::max(j - 1, 0), jh = std::min(j + 1, g.nr - 1);
  const double dr = (at(jh, k) - at(jl, k)) / (g.r[jh] - g.r[jl]);
  const int kp = (k + 1) % g.ntheta, km = (k + g.ntheta - 1) % g.ntheta;
  const double dth = (at(j, kp) - at(j, km)) / (2.0 * g.dtheta * g.r[j]);
  const double c = std::cos(g.theta[k]), sn = std::sin(g.theta[k]);
  return {dr * c - dth * sn, dr * sn + dth * c};
}

} // namespace

TensorField kramers_tensor(int spring, const ConfigDistribution& dist)
{
  const ConfigSpace& space = *dist.space;
  const Maxwellian& m = space.spring(spring);
  const std::size_t nq = dist.nq();
  // Per-node weight times U' q q^T.
  std::vector<double> kxx(nq), kxy(nq), kyy(nq);
  for (std::size_t n = 0; n < nq; ++n) {
    const auto q = m.grid.node(space.local(n, spring));
    const double up = m.pot.eval(0.5 * (q[0] * q[0] + q[1] * q[1])).dU * space.weight()[n];
    kxx[n] = up * q[0] * q[0];
    kxy[n] = up * q[0] * q[1];
    kyy[n] = up * q[1] * q[1];
  }
  TensorField C(dist.grid.size());
  for (std::size_t c = 0; c < dist.grid.size(); ++c) {
    const double* p = dist.cell(c);
    double xx = 0, xy = 0, yy = 0;
    for (std::size_t n = 0; n < nq; ++n) {
      xx += kxx[n] * p[n];
      xy += kxy[n] * p[n];
      yy += kyy[n] * p[n];
    }
    C.xx[c] = xx;
    C.xy[c] = C.yx[c] = xy;
    C.yy[c] = yy;
  }
  return C;
}

TensorField kramers_tensor_fv(int spring, const ConfigDistribution& dist)
{
  const ConfigSpace& space = *dist.space;
  const Maxwellian& m = space.spring(spring);
  const detail::DriftFaces d = detail::drift_faces(m);
  const int nr = m.grid.nr, nt = m.grid.ntheta;
  const std::size_t nq = dist.nq();
  const long s = static_cast<long>(space.stride(spring));
  const auto& W = space.weight();
  const auto& sw = space.spring_weight(spring);
  const ScalarField rho = number_density(dist);

  TensorField C(dist.grid.size());
  for (std::size_t c = 0; c < dist.grid.size(); ++c) {
    const double* p = dist.cell(c);
    double xx = 0, xy = 0, yx = 0, yy = 0;
    for (std::size_t n = 0; n < nq; ++n) {
      const int loc = space.local(n, spring);
      const int j = loc / nt, k = loc % nt;
      const double other = W[n] / sw[loc];
      if (j + 1 < nr) {
        const int f = (j + 1) * nt + k;
        const double jump = other * (p[n + s * nt] - p[n]);
        xx += d.rxx[f] * jump;
        xy += d.rxy[f] * jump;
        yx += d.rxy[f] * jump;
        yy += d.ryy[f] * jump;
      }
      const int f = j * nt + k;
      const long next = k + 1 < nt ? s : -s * (nt - 1);
      const double jump = other * (p[n + next] - p[n]);
      xx += d.axx[f] * jump;
      xy += d.axy[f] * jump;
      yx += d.ayx[f] * jump;
      yy += d.ayy[f] * jump;
    }
    C.xx[c] = xx + rho[c];
    C.xy[c] = xy;
    C.yx[c] = yx;
    C.yy[c] = yy + rho[c];
  }
  return C;
}

KramersIdentity kramers_identity_check(const ConfigSpace& space, int spring,
                                       const std::function<double(double, double)>& phi,
                                       const std::function<std::array<double, 2>(double, double)>& grad_phi)
{
  const Maxwellian& m = space.spring(spring);
  const auto& sw = space.spring_weight(spring);
  KramersIdentity out;
  out.lhs.setZero();
  out.rhs.setZero();
  double mass = 0;
  for (int n = 0; n < m.grid.size(); ++n) {
    const auto q = m.grid.node(n);
    const double w = sw[n];
    const double f = phi(q[0], q[1]);
    const auto gf = grad_phi(q[0], q[1]);
    const double up = m.pot.eval(0.5 * (q[0] * q[0] + q[1] * q[1])).dU;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        out.lhs(a, b) += w * f * up * q[a] * q[b];
        out.rhs(a, b) += w * gf[a] * q[b];
      }
    mass += w * f;
  }
  out.rhs += mass * Eigen::Matrix2d::Identity();
  out.residual = (out.lhs - out.rhs).cwiseAbs().maxCoeff();
  return out;
}

ScalarField number_density(const ConfigDistribution& dist)
{
  const auto& W = dist.space->weight();
  const std::size_t nq = dist.nq();
  ScalarField rho = dist.grid.scalar();
  for (std::size_t c = 0; c < rho.size(); ++c) {
    const double* p = dist.cell(c);
    double s = 0;
    for (std::size_t n = 0; n < nq; ++n)
      s += W[n] * p[n];
    rho[c] = s;
  }
  return rho;
}

TensorField tau1(const ConfigDistribution& dist, const Params& params, bool quadrature)
{
  const int K = dist.space->springs();
  const ScalarField rho = number_density(dist);
  TensorField t(dist.grid.size());
  for (int i = 0; i < K; ++i) {
    const TensorField C = quadrature ? kramers_tensor(i, dist) : kramers_tensor_fv(i, dist);
    for (std::size_t c = 0; c < t.size(); ++c) {
      t.xx[c] += C.xx[c];
      t.xy[c] += C.xy[c];
      t.yx[c] += C.yx[c];
      t.yy[c] += C.yy[c];
    }
  }
  const double f = params.beta_comp;
  for (std::size_t c = 0; c < t.size(); ++c) {
    t.xx[c] = f * (t.xx[c] - (K + 1) * rho[c]);
    t.xy[c] = f * t.xy[c];
    t.yx[c] = f * t.yx[c];
    t.yy[c] = f * (t.yy[c] - (K + 1) * rho[c]);
  }
  return t;
}

EntropyFisher entropy_fisher(const ConfigDistribution& dist, const Params& params)
{
  const ConfigSpace& space = *dist.space;
  const Grid2D& g = dist.grid;
  const std::size_t nq = dist.nq();
  const auto& W = space.weight();
  const int K = space.springs();

  std::vector<double> root(dist.psi.size());
  for (std::size_t k = 0; k < root.size(); ++k)
    root[k] = std::sqrt(std::max(dist.psi[k], 0.0));

  EntropyFisher out;
  double ent = 0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const double* p = dist.cell(c);
    for (std::size_t n = 0; n < nq; ++n)
      ent += W[n] * relative_entropy_density(p[n]);
  }
  out.entropy = ent * g.cell_area();

  // x-Fisher over interior faces; face length / centre distance is 1 in 2D.
  double fx = 0;
  auto face = [&](std::size_t a, std::size_t b) {
    const double* ra = root.data() + a * nq;
    const double* rb = root.data() + b * nq;
    for (std::size_t n = 0; n < nq; ++n) {
      const double d = ra[n] - rb[n];
      fx += W[n] * d * d;
    }
  };
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i + 1 < g.n; ++i) {
      face(g.index(i, j), g.index(i + 1, j));
      face(g.index(j, i), g.index(j, i + 1));
    }
  out.fisher_x = 4.0 * params.delta * fx;

  double fq = 0;
  for (int i = 0; i < K; ++i) {
    const Maxwellian& m = space.spring(i);
    const detail::DiffusionFaces d = detail::diffusion_faces(m);
    const int nr = m.grid.nr, nt = m.grid.ntheta;
    const long s = static_cast<long>(space.stride(i));
    const auto& sw = space.spring_weight(i);
    double acc = 0;
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double* r = root.data() + c * nq;
      for (std::size_t n = 0; n < nq; ++n) {
        const int loc = space.local(n, i);
        const int j = loc / nt, k = loc % nt;
        const double other = W[n] / sw[loc];
        if (j + 1 < nr) {
          const double dd = r[n + s * nt] - r[n];
          acc += other * d.radial[(j + 1) * nt + k] * dd * dd;
        }
        const long next = k + 1 < nt ? s : -s * (nt - 1);
        const double dd = r[n + next] - r[n];
        acc += other * d.angular[j * nt + k] * dd * dd;
      }
    }
    fq += params.A(i, i) * acc;
  }
  if (K > 1) {
    double cross = 0;
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double* r = root.data() + c * nq;
      for (std::size_t n = 0; n < nq; ++n)
        for (int i = 0; i < K; ++i)
          for (int j = 0; j < K; ++j) {
            if (i == j)
              continue;
            const auto gi = polar_gradient(r, n, space, i);
            const auto gj = polar_gradient(r, n, space, j);
            cross += params.A(i, j) * W[n] * (gi[0] * gj[0] + gi[1] * gj[1]);
          }
    }
    fq += cross;
  }
  out.fisher_q = fq * g.cell_area();
  return out;
}

// ---------------------------------------------------------------------------

XTransport::XTransport(const Grid2D& grid, double delta) : grid_(grid), delta_(delta)
{
  const int n = grid.n;
  C_.resize(n, n);
  lam_.resize(n);
  for (int k = 0; k < n; ++k) {
    const double ck = k == 0 ? 1.0 : std::sqrt(2.0);
    for (int i = 0; i < n; ++i)
      C_(i, k) = ck * std::cos(k * std::numbers::pi * grid.xc(i)) / std::sqrt(static_cast<double>(n));
    const double s = std::sin(k * std::numbers::pi / (2.0 * n));
    lam_[k] = -4.0 * s * s / (grid.h * grid.h);
  }
}

const Eigen::MatrixXd& XTransport::exponential(double dt)
{
  auto it = cache_.find(dt);
  if (it != cache_.end())
    return it->second;
  if (cache_.size() > 8)
    cache_.clear();
  const int n = grid_.n;
  const Eigen::VectorXd v0 = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  return cache_[dt] = conserving_exponential(C_, lam_, delta_ * dt, v0);
}

void XTransport::advect(const double* in, double* out, std::size_t width, const FaceVelocity& f, double dt) const
{
  const int n = grid_.n;
  const double r = dt / grid_.h;
  parallel_for(0, n, [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t c = grid_.index(i, j);
        double* o = out + c * width;
        // Four faces: west, east, south, north with outward sign.
        const double uw = f.x[j * (n + 1) + i], ue = f.x[j * (n + 1) + i + 1];
        const double vs = f.y[j * n + i], vn = f.y[(j + 1) * n + i];
        const double* self = in + c * width;
        auto flux = [&](double vel, double sign, int di, int dj) {
          if (vel == 0.0)
            return;
          const double outward = sign * vel;
          const double* src = outward > 0 ? self : in + grid_.index(i + di, j + dj) * width;
          const double a = r * outward;
          for (std::size_t q = 0; q < width; ++q)
            o[q] -= a * src[q];
        };
        flux(uw, -1.0, -1, 0);
        flux(ue, 1.0, 1, 0);
        flux(vs, -1.0, 0, -1);
        flux(vn, 1.0, 0, 1);
      }
  });
}

void XTransport::diffuse(double* data, std::size_t width, double dt)
{
  if (delta_ == 0.0 || dt == 0.0)
    return;
  const Eigen::MatrixXd& E = exponential(dt);
  const int n = grid_.n;
  const Eigen::Index w = static_cast<Eigen::Index>(width);
  // Along x: each row j is an n x width block.
  parallel_for(0, n, [&](int j0, int j1) {
    RowMajor tmp(n, w);
    for (int j = j0; j < j1; ++j) {
      Eigen::Map<RowMajor> B(data + static_cast<std::size_t>(j) * n * width, n, w);
      tmp.noalias() = E * B;
      B = tmp;
    }
  });
  // Along y: the whole field is an n x (n * width) block.
  Eigen::Map<RowMajor> B(data, n, n * w);
  RowMajor tmp = E * B;
  B = tmp;
}

double XTransport::max_rate(const FaceVelocity& f) const
{
  const int n = grid_.n;
  double rate = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double out = std::max(0.0, -f.x[j * (n + 1) + i]) + std::max(0.0, f.x[j * (n + 1) + i + 1]) +
                         std::max(0.0, -f.y[j * n + i]) + std::max(0.0, f.y[(j + 1) * n + i]);
      rate = std::max(rate, out / grid_.h);
    }
  return rate;
}

// ---------------------------------------------------------------------------

FpSolver::FpSolver(const Params& params, std::shared_ptr<const ConfigSpace> space, const Grid2D& grid)
    : params_(params), space_(std::move(space)), x_(grid, params.delta)
{
  const int K = space_->springs();
  ops_.resize(K);
  for (int i = 0; i < K; ++i) {
    const Maxwellian& m = space_->spring(i);
    const int nr = m.grid.nr, nt = m.grid.ntheta, nq = m.grid.size();
    SpringOps& op = ops_[i];
    op.drift = detail::drift_faces(m);
    const detail::DiffusionFaces d = detail::diffusion_faces(m);
    const auto& sw = space_->spring_weight(i);
    op.sqrtw.resize(nq);
    for (int n = 0; n < nq; ++n)
      op.sqrtw[n] = std::sqrt(sw[n]);

    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(nq, nq);
    auto link = [&](int a, int b, double T) {
      L(a, a) -= T;
      L(b, b) -= T;
      L(a, b) += T;
      L(b, a) += T;
    };
    for (int j = 0; j < nr; ++j)
      for (int k = 0; k < nt; ++k) {
        if (j + 1 < nr)
          link(j * nt + k, (j + 1) * nt + k, d.radial[(j + 1) * nt + k]);
        link(j * nt + k, j * nt + (k + 1) % nt, d.angular[j * nt + k]);
      }
    L *= 0.25 * params.A(i, i);
    const Eigen::VectorXd winv = op.sqrtw.cwiseInverse();
    const Eigen::MatrixXd S = winv.asDiagonal() * L * winv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    if (eig.info() != Eigen::Success)
      throw Error("q-diffusion eigensolver failed");
    op.eigvec = eig.eigenvectors();
    op.eigval = eig.eigenvalues().cwiseMin(0.0);
  }
}

const Eigen::MatrixXd& FpSolver::q_exponential(int spring, double dt)
{
  SpringOps& op = ops_[spring];
  auto it = op.cache.find(dt);
  if (it != op.cache.end())
    return it->second;
  if (op.cache.size() > 8)
    op.cache.clear();
  const Eigen::VectorXd v0 = op.sqrtw / op.sqrtw.norm();
  Eigen::MatrixXd E = conserving_exponential(op.eigvec, op.eigval, dt, v0);
  // Back to psi_hat variables: E_pq sqrt(W_q) / sqrt(W_p).
  E = op.sqrtw.cwiseInverse().asDiagonal() * E * op.sqrtw.asDiagonal();
  return op.cache[dt] = std::move(E);
}

void FpSolver::explicit_part(ConfigDistribution& dist, const VectorField& u, const TensorField& G, double dt) const
{
  const Grid2D& g = x_.grid();
  const std::size_t nq = dist.nq();
  const int K = space_->springs();
  std::vector<double> out = dist.psi;
  x_.advect(dist.psi.data(), out.data(), nq, face_velocity(g, u), dt);

  parallel_for(0, static_cast<int>(g.size()), [&](int c0, int c1) {
    std::vector<double> kr, ka;
    for (int c = c0; c < c1; ++c) {
      const double* p = dist.cell(c);
      double* o = out.data() + static_cast<std::size_t>(c) * nq;
      const double gxx = G.xx[c], gxy = G.xy[c], gyx = G.yx[c], gyy = G.yy[c];
      for (int i = 0; i < K; ++i) {
        const SpringOps& op = ops_[i];
        const Maxwellian& m = space_->spring(i);
        const int nr = m.grid.nr, nt = m.grid.ntheta;
        const long s = static_cast<long>(space_->stride(i));
        const auto& sw = space_->spring_weight(i);
        kr.resize((nr + 1) * nt);
        ka.resize(nr * nt);
        for (std::size_t f = 0; f < kr.size(); ++f)
          kr[f] = gxx * op.drift.rxx[f] + (gxy + gyx) * op.drift.rxy[f] + gyy * op.drift.ryy[f];
        for (std::size_t f = 0; f < ka.size(); ++f)
          ka[f] = gxx * op.drift.axx[f] + gxy * op.drift.axy[f] + gyx * op.drift.ayx[f] + gyy * op.drift.ayy[f];

        for (std::size_t n = 0; n < nq; ++n) {
          const int loc = space_->local(n, i);
          const int j = loc / nt, k = loc % nt;
          double net = 0; // outflow
          if (j + 1 < nr) {
            const double kap = kr[(j + 1) * nt + k];
            net += kap * (kap > 0 ? p[n] : p[n + s * nt]);
          }
          if (j > 0) {
            const double kap = kr[j * nt + k];
            net -= kap * (kap > 0 ? p[n - s * nt] : p[n]);
          }
          const long next = k + 1 < nt ? s : -s * (nt - 1);
          const long prev = k > 0 ? -s : s * (nt - 1);
          const double kp = ka[j * nt + k];
          net += kp * (kp > 0 ? p[n] : p[n + next]);
          const double km = ka[j * nt + (k + nt - 1) % nt];
          net -= km * (km > 0 ? p[n + prev] : p[n]);
          o[n] -= dt * net / sw[loc];
        }
      }

      if (K > 1) {
        // Cross-spring diffusion 1/4 A_ij div_qi (M grad_qj psi_hat), i != j.
        for (int i = 0; i < K; ++i) {
          const Maxwellian& m = space_->spring(i);
          const QGrid& qg = m.grid;
          const int nr = qg.nr, nt = qg.ntheta;
          const long s = static_cast<long>(space_->stride(i));
          const auto& sw = space_->spring_weight(i);
          for (std::size_t n = 0; n < nq; ++n) {
            const int loc = space_->local(n, i);
            const int j = loc / nt, k = loc % nt;
            auto face_flux = [&](std::size_t nb, double measure, double ex, double ey) {
              double acc = 0;
              for (int jj = 0; jj < K; ++jj) {
                if (jj == i || params_.A(i, jj) == 0.0)
                  continue;
                const auto ga = polar_gradient(p, n, *space_, jj);
                const auto gb = polar_gradient(p, nb, *space_, jj);
                acc += 0.25 * params_.A(i, jj) * 0.5 * ((ga[0] + gb[0]) * ex + (ga[1] + gb[1]) * ey);
              }
              return measure * acc;
            };
            double in = 0; // diffusive flux into the node
            const double c = std::cos(qg.theta[k]), sn = std::sin(qg.theta[k]);
            if (j + 1 < nr)
              in += face_flux(n + s * nt, m.face[j + 1] * qg.rface[j + 1] * qg.dtheta, c, sn);
            if (j > 0)
              in -= face_flux(n - s * nt, m.face[j] * qg.rface[j] * qg.dtheta, c, sn);
            const long next = k + 1 < nt ? s : -s * (nt - 1);
            const long prev = k > 0 ? -s : s * (nt - 1);
            const double tp = qg.theta[k] + 0.5 * qg.dtheta, tm = qg.theta[k] - 0.5 * qg.dtheta;
            in += face_flux(n + next, m.ring[j], -std::sin(tp), std::cos(tp));
            in -= face_flux(n + prev, m.ring[j], -std::sin(tm), std::cos(tm));
            o[n] += dt * in / sw[loc];
          }
        }
      }
    }
  });
  dist.psi.swap(out);
}

void FpSolver::q_diffusion(ConfigDistribution& dist, double dt)
{
  const int K = space_->springs();
  const std::size_t ncell = x_.grid().size();
  const std::size_t nq = dist.nq();
  for (int i = 0; i < K; ++i) {
    const Eigen::MatrixXd& E = q_exponential(i, dt);
    const Eigen::Index ni = E.rows();
    const std::size_t inner = space_->stride(i);
    const std::size_t outer = ncell * (nq / (inner * ni));
    if (inner == 1) {
      Eigen::Map<RowMajor> B(dist.psi.data(), static_cast<Eigen::Index>(outer), ni);
      const int rows = static_cast<int>(outer);
      parallel_for(0, rows, [&](int r0, int r1) {
        auto blk = B.middleRows(r0, r1 - r0);
        RowMajor tmp = blk * E.transpose();
        blk = tmp;
      });
    } else {
      parallel_for(0, static_cast<int>(outer), [&](int o0, int o1) {
        RowMajor tmp(ni, static_cast<Eigen::Index>(inner));
        for (int o = o0; o < o1; ++o) {
          Eigen::Map<RowMajor> B(dist.psi.data() + o * ni * inner, ni, static_cast<Eigen::Index>(inner));
          tmp.noalias() = E * B;
          B = tmp;
        }
      });
    }
  }
}

double FpSolver::max_dt(const VectorField& u, const TensorField& G) const
{
  const Grid2D& g = x_.grid();
  const double xrate = x_.max_rate(face_velocity(g, u));
  double qrate = 0;
  const int K = space_->springs();
  for (std::size_t c = 0; c < g.size(); ++c) {
    double rate = 0;
    for (int i = 0; i < K; ++i) {
      const SpringOps& op = ops_[i];
      const Maxwellian& m = space_->spring(i);
      const int nr = m.grid.nr, nt = m.grid.ntheta;
      const auto& sw = space_->spring_weight(i);
      double worst = 0;
      for (int j = 0; j < nr; ++j)
        for (int k = 0; k < nt; ++k) {
          double out = 0;
          auto kr = [&](int f) {
            return G.xx[c] * op.drift.rxx[f] + (G.xy[c] + G.yx[c]) * op.drift.rxy[f] + G.yy[c] * op.drift.ryy[f];
          };
          auto ka = [&](int f) {
            return G.xx[c] * op.drift.axx[f] + G.xy[c] * op.drift.axy[f] + G.yx[c] * op.drift.ayx[f] +
                   G.yy[c] * op.drift.ayy[f];
          };
          if (j + 1 < nr)
            out += std::max(0.0, kr((j + 1) * nt + k));
          if (j > 0)
            out += std::max(0.0, -kr(j * nt + k));
          out += std::max(0.0, ka(j * nt + k));
          out += std::max(0.0, -ka(j * nt + (k + nt - 1) % nt));
          worst = std::max(worst, out / sw[j * nt + k]);
        }
      rate += worst;
    }
    qrate = std::max(qrate, rate);
  }
  double rate = xrate + qrate;
  if (K > 1) {
    // Explicit cross diffusion: crude bound from the smallest cell width.
    double bound = 0;
    for (int i = 0; i < K; ++i) {
      const QGrid& qg = space_->spring(i).grid;
      double hmin = qg.r[0] * qg.dtheta;
      for (int j = 1; j < qg.nr; ++j)
        hmin = std::min(hmin, qg.r[j] - qg.r[j - 1]);
      for (int j = 0; j < K; ++j)
        if (j != i)
          bound += std::abs(params_.A(i, j)) / (hmin * hmin);
    }
    rate += bound;
  }
  return rate > 0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

void FpSolver::step(ConfigDistribution& dist, const VectorField& u, const TensorField& G, double dt)
{
  const double limit = max_dt(u, G);
  if (dt > limit) {
    std::ostringstream os;
    os << "Fokker-Planck CFL violation: dt = " << dt << ", suggested dt <= " << 0.9 * limit;
    throw Error(os.str());
  }
  explicit_part(dist, u, G, dt);
  q_diffusion(dist, dt);
  x_.diffuse(dist.psi.data(), dist.nq(), dt);
  enforce_positivity(dist.psi);
  dist.time += dt;
}

void FpSolver::rho_step(ScalarField& rho, const VectorField& u, double dt)
{
  const FaceVelocity f = face_velocity(x_.grid(), u);
  const double rate = x_.max_rate(f);
  if (dt * rate > 1.0) {
    std::ostringstream os;
    os << "advection CFL violation: dt = " << dt << ", suggested dt <= " << 0.9 / rate;
    throw Error(os.str());
  }
  ScalarField out = rho;
  x_.advect(rho.data(), out.data(), 1, f, dt);
  x_.diffuse(out.data(), 1, dt);
  rho.swap(out);
}

ConfigDistribution fp_step(const ConfigDistribution& dist, const Params& params, const VectorField& u,
                           const TensorField& G, double dt)
{
  FpSolver solver(params, dist.space, dist.grid);
  ConfigDistribution out = dist;
  solver.step(out, u, G, dt);
  return out;
}

ScalarField rho_ad_step(const ScalarField& rho, const Params& params, const Grid2D& grid, const VectorField& u,
                        double dt)
{
  XTransport x(grid, params.delta);
  const FaceVelocity f = face_velocity(grid, u);
  const double rate = x.max_rate(f);
  if (dt * rate > 1.0) {
    std::ostringstream os;
    os << "advection CFL violation: dt = " << dt << ", suggested dt <= " << 0.9 / rate;
    throw Error(os.str());
  }
  ScalarField out = rho;
  x.advect(rho.data(), out.data(), 1, f, dt);
  x.diffuse(out.data(), 1, dt);
  return out;
}

} // namespace nsfp
