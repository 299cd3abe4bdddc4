/// @file transport.hpp
/// @brief Discrete analog of the weak form's bilinear form B: conservative
/// face-difference diffusion, skew-symmetric advective fluxes, the
/// volume/area-weighted norm family and conservation diagnostics.
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "marpo/fields.hpp"
#include "marpo/geometry.hpp"

namespace marpo {

using SparseMat = Eigen::SparseMatrix<double>;

/// Face-loop operators in integrated form: applying to a cell field yields
/// volume-integrated rates, so <Au, w> is the plain dot product.
/// Diffusion is symmetric positive semidefinite with zero row and column
/// sums; advection with a divergence-free, wall-tight flux field is
/// skew-symmetric. Immutable once assembled for a given environment.
class TransportOperator {
 public:
  TransportOperator(const Grid& grid, const Environment& env);

  void add_diffusion(const std::vector<double>& u,
                     std::vector<double>& out) const;
  void add_advection(const std::vector<double>& u,
                     std::vector<double>& out) const;
  /// out = (A_diff + A_adv) u
  std::vector<double> apply(const std::vector<double>& u) const;

  /// B(u,w) = sum_j [ w_j . (A_diff + A_adv) u_j ].
  double apply_B(const TracerState& u, const TracerState& w) const;

  /// <A_adv w, w>; zero to rounding for divergence-free velocities
  /// (the discrete skew-symmetry identity).
  double advection_skew_check(const std::vector<double>& w) const;

  /// K = A_diff + A_adv as triplets, for assembling step matrices.
  std::vector<Eigen::Triplet<double>> triplets() const;

  const Grid& grid() const { return *grid_; }

 private:
  const Grid* grid_;
  const Environment* env_;
  std::vector<double> diff_coef_;  // kappa_f * area/dist per face
  std::vector<double> flux_;       // signed a->b volume flux per face
};

// ---- norms ----------------------------------------------------------------

double l2_norm_field(const Grid& grid, const std::vector<double>& u);
double l2_norm(const Grid& grid, const TracerState& u);

/// Volume-weighted gradient seminorm squared via the diffusion stencil with
/// kappa stripped: sum_f (area/dist)(u_a - u_b)^2.
double grad_seminorm_sq(const Grid& grid, const std::vector<double>& u);
double h1_norm(const Grid& grid, const TracerState& u);

double boundary_l2(const Grid& grid, const std::vector<double>& b1,
                   const std::vector<double>& b2);

/// sum_facets (b1 w1 + b2 w2)(adjacent cell) * area.
double boundary_term(const Grid& grid, const std::vector<double>& b1,
                     const std::vector<double>& b2, const TracerState& w);

double total_mass(const TracerState& y, const Grid& grid);

struct GardingReport {
  bool holds = false;
  double lhs = 0.0;    // kappa_min ||u||_H1^2
  double rhs = 0.0;    // B(u,u) + kappa_min ||u||_L2^2
  double margin = 0.0; // rhs - lhs
};

/// kappa_min ||u||_H1^2 <= B(u,u) + kappa_min ||u||_L2^2; holds exactly for
/// this discretization (up to rounding).
GardingReport garding_check(const TracerState& u, const Environment& env,
                            const Grid& grid);

/// Empirical discrete boundedness constant of B: the largest sampled
/// Rayleigh-type ratio |B(u,w)| / (||u||_H1 ||w||_H1). A measured surrogate,
/// not the continuous embedding constant.
double empirical_C_B(const Environment& env, const Grid& grid,
                     std::uint64_t seed, int samples);

/// Discrete H1-dual norm of integrated functionals r: ||r||^2 = r . z with
/// (M + D1) z = r, D1 the kappa-stripped diffusion operator.
class DualNormSolver {
 public:
  explicit DualNormSolver(const Grid& grid);
  /// r holds integrated functional values per cell and component.
  double dual_norm(const TracerState& r) const;

 private:
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMat>> chol_;
  int n_;
};

}  // namespace marpo
