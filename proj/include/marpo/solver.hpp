/// @file solver.hpp
/// @brief Time integration: implicit Euler steps, the Banach/Picard
/// fixed-point iteration with contraction diagnostics, the tangent-linear
/// solve and the energy-estimate checker.
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "marpo/fields.hpp"
#include "marpo/reaction.hpp"
#include "marpo/tangent.hpp"
#include "marpo/transport.hpp"

namespace marpo {

/// Raised on linear-solve or iteration failures; carries what was known.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PicardConfig {
  double epsilon = -1.0;   // Cauchy parameter; auto = kappa_min/4
  double weight_C = -1.0;  // exponential weight; auto = 4 L1^2/(2 eps) e^{2 T kappa_min}
  double tol = 1e-10;      // relative tolerance on the weighted residual
  // The weighted norm discounts late times steeply at desk scale; when a
  // consumer needs late-time accuracy too (tangent/identification oracles)
  // this additionally requires the plain sup-in-time residual to drop below
  // plain_tol relative to its first value. 0 disables the extra criterion.
  double plain_tol = 0.0;
  int max_iter = 200;
  double gamma = 0.0;      // monotone term strength (0 = plain PO4-DOP model)
};

struct PicardReport {
  int iterations = 0;       // index of the converged residual (map count - 1)
  bool converged = false;
  std::vector<double> residuals;        // weighted norms of iterate diffs
  std::vector<double> plain_residuals;  // sup-in-time L2 norms, for reading
  std::vector<double> ratios;           // residuals[k]/residuals[k-1]
  std::vector<double> iter_ms;          // wallclock per iteration
  double L_A = 0.0;
  double L1 = 0.0;
  double epsilon = 0.0;
  double weight_C = 0.0;
};

/// Thrown when the Picard iteration hits max_iter; carries the partial
/// report so callers can flush it for diagnosis.
struct PicardDivergence : SolverError {
  PicardReport report;
  PicardDivergence(const std::string& msg, PicardReport rep)
      : SolverError(msg), report(std::move(rep)) {}
};

/// Per-facet boundary source pair, aligned with grid.facets().
struct FacetPair {
  std::vector<double> g1, g2;
};

/// External inhomogeneity for solve_frozen: empty = none, one slice =
/// constant in time, steps+1 slices = per time level (slice k used at t_k).
struct ExternalSource {
  std::vector<TracerState> f;  // per-cell density pairs
  std::vector<FacetPair> g;    // per-facet pairs

  bool empty() const { return f.empty() && g.empty(); }
  const TracerState* f_at(int k) const {
    if (f.empty()) return nullptr;
    return f.size() == 1 ? &f[0] : &f[k];
  }
  const FacetPair* g_at(int k) const {
    if (g.empty()) return nullptr;
    return g.size() == 1 ? &g[0] : &g[k];
  }
};

/// Factorized implicit-Euler step operator for one (grid, env, dt).
/// Solves (M/dt + A_diff + A_adv) y + V m(y) = M/dt y_k + V f + boundary g
/// componentwise; the monotone term (gamma > 0) is handled by Newton with
/// the cellwise scalar derivative on the diagonal.
class StepSolver {
 public:
  StepSolver(const Grid& grid, const Environment& env, double dt,
             double gamma = 0.0);

  TracerState step(const TracerState& y_k, const TracerState* f_density,
                   const FacetPair* g) const;

  /// One linear component solve of (M/dt + K) x = rhs (integrated rhs).
  Eigen::VectorXd solve_component(const Eigen::VectorXd& rhs) const;

  const Grid& grid() const { return *grid_; }
  double dt() const { return dt_; }
  double gamma() const { return gamma_; }

 private:
  Eigen::VectorXd assemble_rhs(const std::vector<double>& y_k,
                               const std::vector<double>* f,
                               const std::vector<double>* g) const;
  Eigen::VectorXd solve_monotone(const Eigen::VectorXd& rhs,
                                 const Eigen::VectorXd& x0) const;

  const Grid* grid_;
  double dt_;
  double gamma_;
  double vol_;
  SparseMat S_;  // M/dt + K
  std::unique_ptr<Eigen::SparseLU<SparseMat>> lu_;
  std::vector<Eigen::Triplet<double>> base_triplets_;  // for Newton rebuilds
};

/// One Picard sweep: marches the linear (or monotone) problem with the
/// reaction frozen at the corresponding new-time slice of z, plus an
/// optional external (f, g).
Trajectory solve_frozen(const Trajectory& z, const Environment& env,
                        const Grid& grid, const ModelParams& params,
                        const TracerState& y0,
                        const ExternalSource& rhs = {}, double gamma = 0.0,
                        const StepSolver* reuse_stepper = nullptr);

/// sup_k ||delta(t_k)||_{L2} e^{-C t_k / 2}, the exponentially weighted
/// sup norm the contraction argument works in.
double weighted_norm(const std::vector<TracerState>& delta, double dt,
                     double C, const Grid& grid);
double weighted_norm_diff(const Trajectory& a, const Trajectory& b, double C,
                          const Grid& grid);
double plain_sup_norm_diff(const Trajectory& a, const Trajectory& b,
                           const Grid& grid);

/// L_A = sqrt((1/C) (L1^2/(2 eps)) e^{2 T kappa_min}).
double contraction_bound(double L1, double epsilon, double T, double kappa_min,
                         double C);

struct ResolvedPicard {
  double epsilon = 0.0;
  double weight_C = 0.0;
  double L_A = 0.0;
  LipschitzConstants lip;
};

/// Fills auto values and validates the invariants
/// (0 < eps < kappa_min/2; auto C above the contraction threshold).
ResolvedPicard resolve_picard(const PicardConfig& cfg, const Environment& env,
                              const Grid& grid, const ModelParams& params,
                              double T);

/// Picard iteration over whole space-time trajectories: z^0 is the
/// constant-in-time extension of y0, z^{m+1} = solve_frozen(z^m). Stops when
/// both the weighted and the plain residual fall below tol relative to the
/// first residual. Throws SolverError with the report attached on max_iter.
std::pair<Trajectory, PicardReport> picard_solve(
    const TracerState& y0, const Environment& env, const Grid& grid,
    const ModelParams& params, double T, int steps, const PicardConfig& cfg,
    const Trajectory* initial_iterate = nullptr);

/// Linearized (tangent) solve along a solved forward trajectory, for a
/// direction in parameter space. h(0) = 0; the state-Jacobian action is kept
/// implicit at the new time level via an inner fixed-point iteration.
Trajectory tangent_solve(const Trajectory& y, const Environment& env,
                         const Grid& grid, const ModelParams& params,
                         const std::array<double, 7>& direction,
                         double inner_tol = 1e-13);
Trajectory tangent_solve(const Trajectory& y, const Environment& env,
                         const Grid& grid, const ModelParams& params,
                         ParamName param, double inner_tol = 1e-13);

struct EnergyConstants {
  double c1 = 0.0;  // 2 kappa_min + L1^2/(2 eps)
  double C1 = 0.0;  // e^{T c1} max{1, 1/(2 eps)}
  double C2 = 0.0;  // (C1 T c1 + max{1/(2 eps), 1}) / (2(kappa_min - 2 eps))
  double C = 0.0;   // sqrt(C1) + sqrt(C2)
};

EnergyConstants energy_constants(double L1, double epsilon, double T,
                                 double kappa_min);

struct EnergyReport {
  double lhs = 0.0;  // ||y||_{C([0,T];L2)} + ||y||_{L2(0,T;H1)}
  double rhs = 0.0;  // C (||f||_{L2(0,T;H1*)} + ||y0||_{L2})
  EnergyConstants constants;
  double f_dual = 0.0;
  double margin = 0.0;
  bool pass = false;
};

/// Checks the a priori estimate with the derived constants. forcing holds
/// per-cell density slices (empty = no forcing). Requires eps < kappa_min/2.
EnergyReport energy_estimate_check(const Trajectory& y,
                                   const ExternalSource& forcing,
                                   const TracerState& y0, double L1,
                                   double epsilon, const Environment& env,
                                   const Grid& grid);

}  // namespace marpo
