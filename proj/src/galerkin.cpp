#include "marpo/galerkin.hpp"

#include <cmath>
#include <stdexcept>

#include "marpo/reaction.hpp"
#include "marpo/solver.hpp"

namespace marpo {

GalerkinSystem::GalerkinSystem(const Grid& grid, const Environment& env,
                               const ModelParams& params,
                               const GalerkinConfig& cfg)
    : grid_(&grid), env_(&env), params_(params), cfg_(cfg) {
  nx_ = grid.nx();
  ny_ = grid.ny();
  nz_ = grid.column_layers(0);
  for (int col = 0; col < grid.columns(); ++col)
    if (!grid.column_wet(col) || grid.column_layers(col) != nz_)
      throw std::invalid_argument(
          "galerkin: the cosine basis requires a flat box (uniform depth)");
  if (env.kappa_min() != env.kappa_max())
    throw std::invalid_argument("galerkin: requires constant kappa");
  mx_ = cfg.mx;
  my_ = cfg.my;
  mz_ = cfg.mz;
  if (mx_ < 1 || my_ < 1 || mz_ < 1 || mx_ > nx_ || my_ > ny_ || mz_ > nz_)
    throw std::invalid_argument(
        "galerkin: mode counts must lie in [1, cells per direction]");

  Lx_ = nx_ * grid.dx();
  Ly_ = ny_ * grid.dy();
  Lz_ = nz_ * grid.dz();

  auto fill = [](Eigen::MatrixXd& C, Eigen::MatrixXd& D, int n, int m,
                 double L) {
    C.resize(n, m);
    D.resize(n, m);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < m; ++k) {
        double arg = k * M_PI * (i + 0.5) / n;
        C(i, k) = std::cos(arg);
        D(i, k) = k * M_PI / L * std::sin(arg);
      }
  };
  fill(Cx_, Dx_, nx_, mx_, Lx_);
  fill(Cy_, Dy_, ny_, my_, Ly_);
  fill(Cz_, Dz_, nz_, mz_, Lz_);

  double kappa = env.kappa_min();
  eig_.resize(modes());
  norm_sq_.resize(modes());
  auto cfac = [](int k) { return k == 0 ? 1.0 : 0.5; };
  for (int kx = 0; kx < mx_; ++kx)
    for (int ky = 0; ky < my_; ++ky)
      for (int kz = 0; kz < mz_; ++kz) {
        int m = mode_index(kx, ky, kz);
        double mu = M_PI * M_PI *
                    (kx * kx / (Lx_ * Lx_) + ky * ky / (Ly_ * Ly_) +
                     kz * kz / (Lz_ * Lz_));
        eig_[m] = kappa * mu;
        norm_sq_[m] = Lx_ * Ly_ * Lz_ * cfac(kx) * cfac(ky) * cfac(kz);
      }

  has_velocity_ = env.max_abs_flux() > 0.0;
  if (has_velocity_) {
    int n = grid.cells();
    vx_.assign(n, 0.0);
    vy_.assign(n, 0.0);
    vz_.assign(n, 0.0);
    const auto& faces = grid.faces();
    const auto& flux = env.face_fluxes();
    for (size_t f = 0; f < faces.size(); ++f) {
      const Face& fc = faces[f];
      double v = flux[f] / fc.area;  // face-normal velocity
      std::vector<double>& comp = fc.axis == 0 ? vx_ : fc.axis == 1 ? vy_ : vz_;
      comp[fc.a] += 0.5 * v;
      comp[fc.b] += 0.5 * v;
    }
  }
}

// value(i,j,k) = sum_k u[kx,ky,kz] Mx(i,kx) My(j,ky) Mz(k,kz); cells are
// addressed as (col = j*nx + i)*nz + k.
std::vector<double> GalerkinSystem::synth(const Eigen::VectorXd& u,
                                          const Eigen::MatrixXd& Mx,
                                          const Eigen::MatrixXd& My,
                                          const Eigen::MatrixXd& Mz) const {
  // stage 1: contract kz
  std::vector<double> t1(static_cast<size_t>(mx_) * my_ * nz_, 0.0);
  for (int kx = 0; kx < mx_; ++kx)
    for (int ky = 0; ky < my_; ++ky)
      for (int k = 0; k < nz_; ++k) {
        double s = 0.0;
        for (int kz = 0; kz < mz_; ++kz)
          s += u[mode_index(kx, ky, kz)] * Mz(k, kz);
        t1[(kx * my_ + ky) * nz_ + k] = s;
      }
  // stage 2: contract ky
  std::vector<double> t2(static_cast<size_t>(mx_) * ny_ * nz_, 0.0);
  for (int kx = 0; kx < mx_; ++kx)
    for (int j = 0; j < ny_; ++j)
      for (int k = 0; k < nz_; ++k) {
        double s = 0.0;
        for (int ky = 0; ky < my_; ++ky)
          s += t1[(kx * my_ + ky) * nz_ + k] * My(j, ky);
        t2[(kx * ny_ + j) * nz_ + k] = s;
      }
  // stage 3: contract kx
  std::vector<double> out(static_cast<size_t>(nx_) * ny_ * nz_, 0.0);
  for (int i = 0; i < nx_; ++i)
    for (int j = 0; j < ny_; ++j)
      for (int k = 0; k < nz_; ++k) {
        double s = 0.0;
        for (int kx = 0; kx < mx_; ++kx)
          s += t2[(kx * ny_ + j) * nz_ + k] * Mx(i, kx);
        out[(static_cast<size_t>(j) * nx_ + i) * nz_ + k] = s;
      }
  return out;
}

// u_k = (sum_cells v * phi_k * vol) / ||phi_k||^2 (midpoint quadrature).
Eigen::VectorXd GalerkinSystem::project_field(
    const std::vector<double>& v) const {
  // stage 1: contract i
  std::vector<double> t1(static_cast<size_t>(mx_) * ny_ * nz_, 0.0);
  for (int kx = 0; kx < mx_; ++kx)
    for (int j = 0; j < ny_; ++j)
      for (int k = 0; k < nz_; ++k) {
        double s = 0.0;
        for (int i = 0; i < nx_; ++i)
          s += v[(static_cast<size_t>(j) * nx_ + i) * nz_ + k] * Cx_(i, kx);
        t1[(kx * ny_ + j) * nz_ + k] = s;
      }
  // stage 2: contract j
  std::vector<double> t2(static_cast<size_t>(mx_) * my_ * nz_, 0.0);
  for (int kx = 0; kx < mx_; ++kx)
    for (int ky = 0; ky < my_; ++ky)
      for (int k = 0; k < nz_; ++k) {
        double s = 0.0;
        for (int j = 0; j < ny_; ++j)
          s += t1[(kx * ny_ + j) * nz_ + k] * Cy_(j, ky);
        t2[(kx * my_ + ky) * nz_ + k] = s;
      }
  // stage 3: contract k
  Eigen::VectorXd u(modes());
  double vol = grid_->cell_volume();
  for (int kx = 0; kx < mx_; ++kx)
    for (int ky = 0; ky < my_; ++ky)
      for (int kz = 0; kz < mz_; ++kz) {
        double s = 0.0;
        for (int k = 0; k < nz_; ++k)
          s += t2[(kx * my_ + ky) * nz_ + k] * Cz_(k, kz);
        int m = mode_index(kx, ky, kz);
        u[m] = s * vol / norm_sq_[m];
      }
  return u;
}

GalerkinCoeffs GalerkinSystem::project(const TracerState& y) const {
  return {project_field(y.y1), project_field(y.y2)};
}

TracerState GalerkinSystem::reconstruct(const GalerkinCoeffs& u) const {
  TracerState y(grid_->cells());
  y.y1 = synth(u.u1, Cx_, Cy_, Cz_);
  y.y2 = synth(u.u2, Cx_, Cy_, Cz_);
  return y;
}

GalerkinCoeffs GalerkinSystem::phi(const GalerkinCoeffs& u, double t) const {
  TracerState y = reconstruct(u);
  ReactionOutput r = reaction_eval(y, *grid_, *env_, params_, t);

  if (has_velocity_) {
    std::vector<double> dx1 = synth(u.u1, Dx_, Cy_, Cz_);
    std::vector<double> dy1 = synth(u.u1, Cx_, Dy_, Cz_);
    std::vector<double> dz1 = synth(u.u1, Cx_, Cy_, Dz_);
    std::vector<double> dx2 = synth(u.u2, Dx_, Cy_, Cz_);
    std::vector<double> dy2 = synth(u.u2, Cx_, Dy_, Cz_);
    std::vector<double> dz2 = synth(u.u2, Cx_, Cy_, Dz_);
    // derivative synthesis carries d/dx cos = -sin * k pi/L; D holds +sin
    for (int c = 0; c < grid_->cells(); ++c) {
      r.d1[c] += -(vx_[c] * dx1[c] + vy_[c] * dy1[c] + vz_[c] * dz1[c]);
      r.d2[c] += -(vx_[c] * dx2[c] + vy_[c] * dy2[c] + vz_[c] * dz2[c]);
    }
  }

  GalerkinCoeffs out;
  out.u1 = project_field(r.d1);
  out.u2 = project_field(r.d2);

  // bottom boundary term: phi_k on the bottom plane carries (-1)^kz
  const auto& facets = grid_->facets();
  Eigen::VectorXd b1_cols = Eigen::VectorXd::Zero(nx_ * ny_);
  bool any_b = false;
  for (size_t f = 0; f < facets.size(); ++f) {
    if (facets[f].kind == FacetKind::Surface) continue;
    if (r.b1[f] != 0.0) any_b = true;
    b1_cols[facets[f].column] = r.b1[f];
  }
  if (any_b) {
    double area = grid_->column_area();
    for (int kx = 0; kx < mx_; ++kx)
      for (int ky = 0; ky < my_; ++ky) {
        double s = 0.0;
        for (int j = 0; j < ny_; ++j)
          for (int i = 0; i < nx_; ++i)
            s += b1_cols[j * nx_ + i] * Cx_(i, kx) * Cy_(j, ky);
        s *= area;
        for (int kz = 0; kz < mz_; ++kz) {
          int m = mode_index(kx, ky, kz);
          double sign = kz % 2 == 0 ? 1.0 : -1.0;
          out.u1[m] += sign * s / norm_sq_[m];
        }
      }
  }
  return out;
}

std::vector<GalerkinCoeffs> GalerkinSystem::solve(const TracerState& y0,
                                                  double T, int steps) const {
  if (steps < 1) throw std::invalid_argument("galerkin: steps must be >= 1");
  double dt = T / steps;
  std::vector<GalerkinCoeffs> traj;
  traj.reserve(steps + 1);
  traj.push_back(project(y0));

  int M = modes();
  for (int k = 0; k < steps; ++k) {
    double t_next = (k + 1) * dt;
    const GalerkinCoeffs& uk = traj.back();
    GalerkinCoeffs u = uk;
    bool done = false;
    for (int inner = 0; inner < cfg_.max_inner; ++inner) {
      GalerkinCoeffs p = phi(u, t_next);
      GalerkinCoeffs next;
      next.u1.resize(M);
      next.u2.resize(M);
      for (int m = 0; m < M; ++m) {
        next.u1[m] = (uk.u1[m] - dt * p.u1[m]) / (1.0 + dt * eig_[m]);
        next.u2[m] = (uk.u2[m] - dt * p.u2[m]) / (1.0 + dt * eig_[m]);
      }
      double diff = (next.u1 - u.u1).squaredNorm() +
                    (next.u2 - u.u2).squaredNorm();
      double scale =
          std::max(next.u1.squaredNorm() + next.u2.squaredNorm(), 1e-300);
      u = std::move(next);
      if (diff <= cfg_.inner_tol * cfg_.inner_tol * scale) {
        done = true;
        break;
      }
    }
    if (!done)
      throw SolverError("galerkin: implicit step fixed point did not converge");
    traj.push_back(std::move(u));
  }
  return traj;
}

}  // namespace marpo
