/// @file reaction.hpp
/// @brief Nonlinear coupling d = (d1,d2), non-local boundary coupling
/// b = (b1,b2), their building blocks and the explicit Lipschitz constants.
#pragma once

#include <vector>

#include "marpo/fields.hpp"
#include "marpo/geometry.hpp"
#include "marpo/saturation.hpp"

namespace marpo {

/// Interior reaction values per cell plus boundary values per facet.
/// b1 vanishes on surface facets; b2 is identically zero (closed DOP system).
struct ReactionOutput {
  std::vector<double> d1, d2;  // mmol P m^-3 / time, per cell
  std::vector<double> b1, b2;  // mmol P m^-2 / time, per facet
};

/// Explicit constants of the interior and boundary couplings, plus the
/// combined constant of the weak-form operator. c_tau is the discrete trace
/// constant sqrt(max facet area / adjacent cell volume).
struct LipschitzConstants {
  double L_d = 0.0;
  double L_b = 0.0;
  double c_tau = 0.0;
  double L1 = 0.0;  // L_d + c_tau * L_b
};

/// Biological uptake G = alpha f_{K_P}(y1) * light factor on euphotic cells;
/// zero entries on aphotic cells. |G| <= alpha.
std::vector<double> uptake_G(const std::vector<double>& y1, const Grid& grid,
                             const Environment& env, const ModelParams& p,
                             double t);

/// Column export E = (1-nu) * sum_{euphotic} G dz (midpoint quadrature).
double export_E(const std::vector<double>& y1, const Grid& grid,
                const Environment& env, const ModelParams& p, double t,
                int column);

/// Exact layer integral of (beta/he_bar)(x3/he_bar)^(-beta-1) over
/// [z_top, z_bot]: (z_top/he_bar)^-beta - (z_bot/he_bar)^-beta.
/// Layer masses over a column telescope to 1 - (h/he_bar)^-beta.
double sinking_layer_mass(const ModelParams& p, double z_top, double z_bot,
                          double he_bar);

/// Full reaction evaluation; computes the per-column export once and shares
/// it between the aphotic redistribution and the boundary values.
ReactionOutput reaction_eval(const TracerState& y, const Grid& grid,
                             const Environment& env, const ModelParams& p,
                             double t);

/// Interior part only (d1, d2 slices of reaction_eval).
void reaction_d(const TracerState& y, const Grid& grid, const Environment& env,
                const ModelParams& p, double t, std::vector<double>& d1,
                std::vector<double>& d2);

/// Boundary part only (b1, b2 slices of reaction_eval).
void boundary_b(const TracerState& y, const Grid& grid, const Environment& env,
                const ModelParams& p, double t, std::vector<double>& b1,
                std::vector<double>& b2);

/// Budget residual of one column:
///   sum_cells (d1+d2) vol + b1(bottom facet) area.
/// Zero to machine precision: euphotic export = aphotic redeposit plus
/// boundary exchange, remineralization cancels.
double column_mass_balance(const TracerState& y, const Grid& grid,
                           const Environment& env, const ModelParams& p,
                           double t, int column);

/// L_d, L_b by direct substitution of the explicit formulas; L1 combines
/// them through the discrete trace constant.
LipschitzConstants lipschitz_constants(const ModelParams& p, const Grid& grid);

/// Pointwise monotone term m(v) = gamma v/(1+|v|), applied componentwise.
/// Satisfies m(0) = 0, |m(v)| <= gamma |v|, (m(a)-m(b))(a-b) >= 0.
double monotone_scalar(double v, double gamma);
double monotone_scalar_derivative(double v, double gamma);
TracerState monotone_term(const TracerState& y, double gamma);

}  // namespace marpo
