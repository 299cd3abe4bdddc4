/// @file galerkin.hpp
/// @brief Spectral Galerkin oracle on a flat-box domain: cosine modes
/// (Neumann-natural), diagonal diffusion coupling, pseudo-spectral
/// evaluation of the nonlinear reaction and of the non-local boundary term.
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "marpo/fields.hpp"
#include "marpo/geometry.hpp"

namespace marpo {

struct GalerkinConfig {
  int mx = 1, my = 1, mz = 1;  // modes per direction, <= cells per direction
  double inner_tol = 1e-12;    // fixed-point tolerance of the implicit step
  int max_inner = 500;
};

/// Mode coefficients of both tracers; mode (kx,ky,kz) sits at
/// (kx*my + ky)*mz + kz.
struct GalerkinCoeffs {
  Eigen::VectorXd u1, u2;
};

class GalerkinSystem {
 public:
  /// Requires a flat box (all columns wet with equal depth), constant kappa
  /// and mode counts within the per-direction cell counts.
  GalerkinSystem(const Grid& grid, const Environment& env,
                 const ModelParams& params, const GalerkinConfig& cfg);

  int modes() const { return mx_ * my_ * mz_; }
  int mode_index(int kx, int ky, int kz) const {
    return (kx * my_ + ky) * mz_ + kz;
  }
  /// Diffusion eigenvalue kappa * pi^2 (kx^2/Lx^2 + ky^2/Ly^2 + kz^2/Lz^2).
  double mode_eigenvalue(int m) const { return eig_[m]; }

  GalerkinCoeffs project(const TracerState& y) const;
  TracerState reconstruct(const GalerkinCoeffs& u) const;

  /// Phi(t,u): reaction, boundary and (if present) advective coefficients.
  GalerkinCoeffs phi(const GalerkinCoeffs& u, double t) const;

  /// Implicit Euler in the coefficients; Phi held at the new time level via
  /// an inner fixed point. Returns steps+1 coefficient slices.
  std::vector<GalerkinCoeffs> solve(const TracerState& y0, double T,
                                    int steps) const;

 private:
  std::vector<double> synth(const Eigen::VectorXd& u,
                            const Eigen::MatrixXd& Mx,
                            const Eigen::MatrixXd& My,
                            const Eigen::MatrixXd& Mz) const;
  Eigen::VectorXd project_field(const std::vector<double>& v) const;

  const Grid* grid_;
  const Environment* env_;
  ModelParams params_;
  GalerkinConfig cfg_;
  int nx_, ny_, nz_, mx_, my_, mz_;
  double Lx_, Ly_, Lz_;
  Eigen::MatrixXd Cx_, Cy_, Cz_;  // cosine synthesis, (cells x modes)
  Eigen::MatrixXd Dx_, Dy_, Dz_;  // d/dx synthesis (sine times k pi / L)
  std::vector<double> eig_;       // kappa * mu_k
  std::vector<double> norm_sq_;   // ||phi_k||^2
  bool has_velocity_ = false;
  std::vector<double> vx_, vy_, vz_;  // cell-center velocities
};

}  // namespace marpo
